#include "sdlpq/mux.hpp"

#include <string>

namespace sdlpq {

FifoMux::FifoMux(MuxConfig config) : config_(config) {
  if (config.fan_in < 1) throw std::invalid_argument("multiplexer fan-in must be >= 1");
  if (config.buffer < 1) throw std::invalid_argument("multiplexer buffer must be >= 1");
}

std::optional<Packet> FifoMux::next_departure() const {
  if (fifo_.empty()) return std::nullopt;
  return fifo_.front();
}

MuxStep FifoMux::step(std::span<const Packet> arrivals) {
  if (static_cast<int>(arrivals.size()) > config_.fan_in) {
    throw LinkOvercommit(std::to_string(arrivals.size()) + " arrivals on a " +
                         std::to_string(config_.fan_in) + "-input multiplexer");
  }
  ++slot_;
  MuxStep out;
  std::size_t first = 0;
  if (!fifo_.empty()) {
    out.departure = fifo_.front();
    fifo_.pop_front();
  } else if (config_.timing == MuxTiming::cut_through && !arrivals.empty()) {
    out.departure = arrivals.front();
    first = 1;
  }
  for (std::size_t i = first; i < arrivals.size(); ++i) fifo_.push_back(arrivals[i]);
  while (static_cast<int>(fifo_.size()) > config_.buffer) {
    out.losses.push_back(fifo_.back());
    fifo_.pop_back();
  }
  return out;
}

}  // namespace sdlpq
