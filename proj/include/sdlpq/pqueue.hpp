#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sdlpq/compose.hpp"
#include "sdlpq/model.hpp"
#include "sdlpq/mux.hpp"

namespace sdlpq {

enum class MuxKind { behavioral, composed };

/// Deliberate construction bugs used to check that the verifier notices them.
enum class Mutation {
  none,
  shifted_psi_boundary,  // lower-half intervals written as [2^(j-1)+1, 2^j]
  no_balancing,          // every packet goes to the first free multiplexer of its group
  pre_removal_ranking,   // route on ranks taken before the departure/loss is removed
  undersized_buffers,    // every multiplexer buffer halved, B_g / 2 (at least 1)
  /// Not a bug: B_g - 1 still satisfies |psi_g| + 2(b - 1) <= 4b, so the
  /// construction keeps emulating the queue. Kept to document that slack.
  trimmed_buffers,
};

std::string_view to_string(MuxKind kind);
std::string_view to_string(Mutation mutation);
MuxKind parse_mux_kind(std::string_view text);
Mutation parse_mutation(std::string_view text);

/// Per-group sources recorded as a bit set: bit 0 is the external input, bit g
/// is group g.
using SourceSet = std::uint64_t;

struct SlotReport {
  Slot t = 0;
  std::optional<PacketId> departure;
  std::optional<PacketId> loss;
  /// Index g-1 holds group g.
  std::vector<int> inflow;
  std::vector<SourceSet> sources;
  int max_inflow = 0;
  /// Multiplexer occupancies, four per group, group-major.
  std::vector<int> occupancies;
};

enum class FaultKind {
  unreachable_departure,
  unreachable_loss,
  over_capacity,
  unroutable_rank,
  source_locality,
  group_collision,
  link_overcommit,
  mux_loss,
  emission_mismatch,
  rank_drift,
  rank_interval,
  group_capacity,
  balance,
};

std::string_view to_string(FaultKind kind);

/// A slot-level invariant of the construction failed. Carries the slot, the
/// offending packet when there is one, and a dump of the state at the failure.
class ConstructionFault : public std::runtime_error {
 public:
  ConstructionFault(FaultKind kind, Slot t, std::optional<Packet> packet, std::string detail,
                    std::string state_dump);

  FaultKind kind() const { return kind_; }
  Slot slot() const { return slot_; }
  const std::optional<Packet>& packet() const { return packet_; }
  const std::string& detail() const { return detail_; }
  const std::string& state_dump() const { return dump_; }

 private:
  FaultKind kind_;
  Slot slot_;
  std::optional<Packet> packet_;
  std::string detail_;
  std::string dump_;
};

/// Running totals over every slot stepped so far.
struct ConstructionStats {
  std::int64_t slots = 0;
  int max_inflow = 0;
  int max_spread = 0;
  std::int64_t rank_interval_checks = 0;
  std::int64_t drift_checks = 0;
  std::int64_t mux_losses = 0;
  /// Peak end-of-slot occupancy per group.
  std::vector<int> peak_group_occupancy;
};

using Multiplexer = std::variant<FifoMux, ComposedMux>;

/// Priority queue built from 2m-1 groups of four 4-to-1 multiplexers behind
/// one crossbar.
///
/// Each slot every non-empty multiplexer puts its head on the switch; the
/// switch also sees the arrival. The highest-priority live packet departs on
/// request and, on overflow, the lowest-priority one is lost; both must be on
/// the switch at that moment. Every other packet on the switch is ranked over
/// the remaining population and sent to the group whose rank interval
/// contains that rank, to the least-occupied multiplexer of the group.
///
/// All invariants are checked at the end of every slot; any failure throws
/// ConstructionFault and leaves the object unusable.
class Construction {
 public:
  static Construction build(int m, MuxKind kind, Mutation mutation = Mutation::none);

  const SlotReport& step(const std::optional<Packet>& arrival, bool control);
  std::vector<SlotReport> run_trace(std::span<const TraceEvent> trace);

  const SystemParams& params() const { return params_; }
  MuxKind kind() const { return kind_; }
  Mutation mutation() const { return mutation_; }
  Slot slot() const { return slot_; }
  int occupancy() const { return static_cast<int>(live_.size()); }
  const ConstructionStats& stats() const { return stats_; }
  int mux_occupancy(int g, int k) const;
  /// Live packets, highest priority first.
  std::vector<Packet> live_packets() const;

  struct ResidentView {
    Packet packet;
    int group = 0;
  };
  /// Live packets with the group holding each, highest priority first.
  std::vector<ResidentView> residents() const;
  /// Group holding the packet, 0 if it is not live.
  int group_of(PacketId id) const;

  std::string state_dump() const;

 private:
  struct Resident {
    Packet packet;
    int group = 0;      // 0 while on the switch
    int source = 0;     // group it was emitted from this slot, 0 for the input
    int last_rank = 0;  // end-of-previous-slot rank, 0 if new
  };

  Construction(SystemParams params, MuxKind kind, Mutation mutation);

  Multiplexer& mux(int g, int k) { return muxes_[static_cast<std::size_t>(4 * (g - 1) + k)]; }
  const Multiplexer& mux(int g, int k) const {
    return muxes_[static_cast<std::size_t>(4 * (g - 1) + k)];
  }
  std::size_t find(Priority p) const;
  [[noreturn]] void fail(FaultKind kind, std::optional<Packet> packet, std::string detail) const;
  void audit();

  SystemParams params_;
  MuxKind kind_;
  Mutation mutation_;
  Slot slot_ = 0;
  std::vector<Multiplexer> muxes_;
  std::vector<Resident> live_;
  ConstructionStats stats_;
  SlotReport report_;

  // Per-slot scratch, kept to avoid reallocation.
  std::vector<std::optional<Packet>> emitted_;
  std::vector<std::vector<Packet>> assigned_;
  std::vector<std::vector<std::size_t>> routed_;
};

}  // namespace sdlpq
