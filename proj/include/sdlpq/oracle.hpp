#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sdlpq/model.hpp"

namespace sdlpq {

/// Outputs of one slot of a priority queue.
struct QueueOutputs {
  std::optional<Packet> departure;
  std::optional<Packet> loss;
};

/// Cumulative link tallies since t = 0.
struct OracleCounters {
  std::int64_t arrivals = 0;
  std::int64_t departures = 0;
  std::int64_t losses = 0;
};

/// Ideal discrete-time priority queue with buffer B.
///
/// Holds packets in an ordered array and answers departures and losses by rank:
/// on a departure request the highest-priority packet among the buffered ones
/// and the arrival leaves; when an arrival finds the buffer full and there is
/// no request, the lowest-priority of those B+1 packets is lost. Slot t = 1 is
/// the first call to step(); the queue starts empty.
class PriorityQueueOracle {
 public:
  explicit PriorityQueueOracle(int capacity);

  QueueOutputs step(const std::optional<Packet>& arrival, bool control);

  int capacity() const { return capacity_; }
  int occupancy() const { return static_cast<int>(buffered_.size()); }
  Slot slot() const { return slot_; }
  const OracleCounters& counters() const { return counters_; }
  /// Buffered packets, highest priority first.
  const std::vector<Packet>& buffered() const { return buffered_; }

 private:
  int capacity_;
  Slot slot_ = 0;
  OracleCounters counters_;
  std::vector<Packet> buffered_;
};

}  // namespace sdlpq
