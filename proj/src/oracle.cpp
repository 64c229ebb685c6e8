#include "sdlpq/oracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace sdlpq {

PriorityQueueOracle::PriorityQueueOracle(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("oracle capacity must be positive");
  buffered_.reserve(static_cast<std::size_t>(capacity) + 1);
}

QueueOutputs PriorityQueueOracle::step(const std::optional<Packet>& arrival, bool control) {
  const int q_prev = occupancy();
  if (arrival) {
    auto pos = std::lower_bound(buffered_.begin(), buffered_.end(), *arrival, outranks);
    if (pos != buffered_.end() && pos->priority == arrival->priority) {
      throw DuplicatePriority(arrival->priority);
    }
    buffered_.insert(pos, *arrival);
  }
  ++slot_;

  QueueOutputs out;
  if (control && !buffered_.empty()) {
    out.departure = buffered_.front();
    buffered_.erase(buffered_.begin());
  } else if (!control && arrival && q_prev == capacity_) {
    out.loss = buffered_.back();
    buffered_.pop_back();
  }

  counters_.arrivals += arrival ? 1 : 0;
  counters_.departures += out.departure ? 1 : 0;
  counters_.losses += out.loss ? 1 : 0;
  return out;
}

}  // namespace sdlpq
