#include "sdlpq/compose.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace sdlpq {

ComposedMux::ComposedMux(int buffer)
    : buffer_(buffer),
      front_{FifoMux({2, buffer, MuxTiming::registered}),
             FifoMux({2, buffer, MuxTiming::registered})},
      back_({2, buffer, MuxTiming::cut_through}) {}

int ComposedMux::occupancy() const {
  return front_[0].occupancy() + front_[1].occupancy() + back_.occupancy();
}

std::optional<Packet> ComposedMux::next_departure() const {
  if (auto head = back_.next_departure()) return head;
  if (auto head = front_[0].next_departure()) return head;
  return front_[1].next_departure();
}

MuxStep ComposedMux::step(std::span<const Packet> arrivals) {
  if (static_cast<int>(arrivals.size()) > kFanIn) {
    throw LinkOvercommit(std::to_string(arrivals.size()) + " arrivals on a composed 4-to-1 unit");
  }

  // Front occupancy after this slot's emission, plus what is assigned so far.
  std::array<int, 2> load{};
  std::array<std::vector<Packet>, 2> assigned;
  for (int k = 0; k < 2; ++k) {
    load[k] = front_[k].occupancy() - (front_[k].occupancy() > 0 ? 1 : 0);
  }
  for (const Packet& p : arrivals) {
    int k = load[1] < load[0] ? 1 : 0;
    if (assigned[k].size() == 2) k = 1 - k;
    assigned[k].push_back(p);
    ++load[k];
  }

  MuxStep out;
  std::vector<Packet> into_back;
  for (int k = 0; k < 2; ++k) {
    MuxStep front = front_[k].step(assigned[k]);
    if (front.departure) into_back.push_back(*front.departure);
    out.losses.insert(out.losses.end(), front.losses.begin(), front.losses.end());
  }
  MuxStep back = back_.step(into_back);
  out.departure = back.departure;
  out.losses.insert(out.losses.end(), back.losses.begin(), back.losses.end());

  peak_ = std::max(peak_, occupancy());
  return out;
}

}  // namespace sdlpq
