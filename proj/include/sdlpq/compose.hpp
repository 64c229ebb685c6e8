#pragma once

#include <array>
#include <optional>
#include <span>

#include "sdlpq/mux.hpp"

namespace sdlpq {

/// Simplified 4-to-1 multiplexer built from three 2-to-1 multiplexers of equal
/// buffer: two registered front stages feeding one cut-through back stage.
///
/// Each arrival goes to the front stage with the lower occupancy (front A on
/// ties), at most two per front per slot. A packet leaving a front at slot t
/// can leave the unit at t when the back stage is empty, so the unit's output
/// at t depends only on its state at t-1, like a registered FifoMux. The unit
/// is non-idling but only FIFO per front branch.
class ComposedMux {
 public:
  explicit ComposedMux(int buffer);

  static constexpr int kFanIn = 4;

  MuxStep step(std::span<const Packet> arrivals);
  std::optional<Packet> next_departure() const;

  int occupancy() const;
  int buffer() const { return buffer_; }
  /// Largest end-of-slot occupancy seen so far.
  int peak_occupancy() const { return peak_; }

  const FifoMux& front_a() const { return front_[0]; }
  const FifoMux& front_b() const { return front_[1]; }
  const FifoMux& back() const { return back_; }

 private:
  int buffer_;
  std::array<FifoMux, 2> front_;
  FifoMux back_;
  int peak_ = 0;
};

}  // namespace sdlpq
