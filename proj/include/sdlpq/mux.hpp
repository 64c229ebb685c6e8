#pragma once

#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sdlpq/model.hpp"

namespace sdlpq {

/// When a packet arriving at slot t may leave.
///  registered   - not before t+1; the output at t depends only on state at t-1.
///  cut_through  - at t itself if the buffer was empty.
enum class MuxTiming { registered, cut_through };

struct MuxConfig {
  int fan_in = 1;
  int buffer = 1;
  MuxTiming timing = MuxTiming::registered;
};

struct MuxStep {
  std::optional<Packet> departure;
  /// Overflow, latest-appended first.
  std::vector<Packet> losses;
};

/// More arrivals in one slot than the multiplexer has input links.
class LinkOvercommit : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Behavioral n-to-1 FIFO multiplexer with buffer B.
///
/// Same-slot arrivals are queued in the order given (input-link order). When
/// the stored count would exceed B the most recently appended packets are
/// reported as losses; nothing is dropped silently.
class FifoMux {
 public:
  explicit FifoMux(MuxConfig config);

  MuxStep step(std::span<const Packet> arrivals);

  /// Packet a registered step() will emit next, if any. For cut-through this
  /// ignores a possible same-slot transit.
  std::optional<Packet> next_departure() const;

  int occupancy() const { return static_cast<int>(fifo_.size()); }
  const MuxConfig& config() const { return config_; }
  const std::deque<Packet>& contents() const { return fifo_; }
  Slot slot() const { return slot_; }

 private:
  MuxConfig config_;
  std::deque<Packet> fifo_;
  Slot slot_ = 0;
};

}  // namespace sdlpq
