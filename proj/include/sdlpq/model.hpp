#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace sdlpq {

using PacketId = std::uint64_t;
/// Larger value = higher priority.
using Priority = std::int64_t;
using Slot = std::int64_t;

struct Packet {
  PacketId id = 0;
  Priority priority = 0;
  Slot birth_slot = 0;

  friend bool operator==(const Packet&, const Packet&) = default;
};

/// Strict "a is more urgent than b".
inline bool outranks(const Packet& a, const Packet& b) { return a.priority > b.priority; }

/// One slot of external stimulus: at most one arrival and the departure-request bit.
struct TraceEvent {
  Slot t = 0;
  std::optional<Packet> arrival;
  bool control = false;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

/// Closed interval of ranks [lo, hi], 1 = highest priority.
struct RankInterval {
  int lo = 1;
  int hi = 1;

  int size() const { return hi - lo + 1; }
  bool contains(int rank) const { return lo <= rank && rank <= hi; }
  friend bool operator==(const RankInterval&, const RankInterval&) = default;
};

/// Thrown when two live packets carry the same priority value.
class DuplicatePriority : public std::logic_error {
 public:
  explicit DuplicatePriority(Priority p);
  Priority priority() const { return priority_; }

 private:
  Priority priority_;
};

/// Largest m for which the capacity 3*2^(m-1)-2 fits comfortably in an int.
inline constexpr int kMaxM = 30;

/// Rank partition of {1..B} into 2m-1 consecutive intervals, index 0 is group 1.
std::vector<RankInterval> psi_partition(int m);

/// Per-multiplexer buffer of group g (1-based); groups g and 2m-g are identical.
int group_buffer_size(int g, int m);

/// 3*2^(m-1)-2.
int queue_capacity(int m);

struct SystemParams {
  int m = 1;
  int group_count = 1;
  int capacity = 1;
  std::vector<RankInterval> psi;
  std::vector<int> group_buffers;

  static SystemParams make(int m);

  const RankInterval& interval(int g) const { return psi.at(static_cast<std::size_t>(g - 1)); }
  int buffer(int g) const { return group_buffers.at(static_cast<std::size_t>(g - 1)); }

  /// Group whose interval contains `rank`, or 0 when no interval does.
  int group_of_rank(int rank) const;

  /// Ranks a packet buffered in group g may hold: the entry interval widened by
  /// B_g - 1 on both sides and clipped to {1..capacity}.
  RankInterval drift_envelope(int g) const;

  /// Most packets group g can hold when every resident stays in its envelope:
  /// |psi_g| + 2(B_g - 1), which is 2^g - 2 for 2 <= g <= m.
  int group_capacity_bound(int g) const;
};

/// Rank of every packet in `population`: k-th largest priority gets rank k.
/// Throws DuplicatePriority when two packets share a priority.
std::unordered_map<PacketId, int> ranks(std::span<const Packet> population);

}  // namespace sdlpq
