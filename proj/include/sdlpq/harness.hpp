#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdlpq/model.hpp"
#include "sdlpq/pqueue.hpp"

namespace sdlpq {

enum class Pattern { random, burst, fill_drain, adversarial };

std::string_view to_string(Pattern pattern);
Pattern parse_pattern(std::string_view text);

/// Everything that determines a generated trace.
struct TraceSpec {
  Pattern pattern = Pattern::random;
  Slot slots = 0;
  double p_arrival = 0.5;
  double p_control = 0.5;
  std::uint64_t seed = 0;
  /// Queue capacity B; sets burst lengths and the fill level of fill_drain
  /// and adversarial traces.
  int capacity = 1;

  std::string describe() const;
};

/// Distance between neighbouring generated priorities.
inline constexpr Priority kPrioritySpacing = 1024;

/// Deterministic for a given spec. Slots are numbered from 1, packet ids
/// from 1 in arrival order, priorities unique.
///  random      - independent Bernoulli arrival and control bits
///  burst       - alternating arrival-only and control-only runs of 1..2B slots
///  fill_drain  - B arrivals then B departure requests, repeated up to `slots`
///  adversarial - fill to B, then an arrival every slot alternating between a
///                new highest and a new lowest priority, control ~ p_control
std::vector<TraceEvent> gen_trace(const TraceSpec& spec);

enum class Verdict { exact, divergent };
std::string_view to_string(Verdict v);

struct Divergence {
  Slot slot = 0;
  std::optional<PacketId> expected_departure;
  std::optional<PacketId> expected_loss;
  std::optional<PacketId> actual_departure;
  std::optional<PacketId> actual_loss;
  /// Set when the construction aborted instead of producing outputs.
  std::optional<FaultKind> fault;
  std::string detail;
  std::string state_dump;
};

struct InvariantTally {
  Slot slots = 0;
  int max_inflow = 0;
  int max_spread = 0;
  std::int64_t rank_interval_checks = 0;
  std::int64_t drift_checks = 0;
  std::int64_t rank_interval_violations = 0;
  std::int64_t drift_violations = 0;
  std::int64_t mux_losses = 0;
  std::int64_t other_violations = 0;

  std::int64_t violations() const {
    return rank_interval_violations + drift_violations + mux_losses + other_violations;
  }
};

struct VerdictReport {
  MuxKind mode = MuxKind::behavioral;
  Mutation mutation = Mutation::none;
  int m = 1;
  std::string trace_descriptor;
  Verdict verdict = Verdict::exact;
  std::optional<Divergence> divergence;
  InvariantTally tally;
  double wall_ms = 0.0;
};

/// Runs the ideal queue and the construction in lockstep and compares the
/// departing and lost packet ids slot by slot. Stops at the first mismatch or
/// construction fault; either makes the verdict DIVERGENT.
VerdictReport differential_run(int m, MuxKind mode, std::span<const TraceEvent> trace,
                               Mutation mutation = Mutation::none,
                               std::string trace_descriptor = {});

/// Renumbers slots 1..n, keeping packet ids and priorities.
std::vector<TraceEvent> reslot(std::span<const TraceEvent> trace);

/// Delta-debugs a divergent trace down to one from which no single event can
/// be removed without the divergence disappearing. Throws
/// std::invalid_argument if the trace does not diverge.
std::vector<TraceEvent> shrink(std::span<const TraceEvent> trace, int m, MuxKind mode,
                               Mutation mutation = Mutation::none);

struct SweepCell {
  int m = 1;
  MuxKind mode = MuxKind::behavioral;
  Mutation mutation = Mutation::none;
  TraceSpec spec;
};

struct CellResult {
  SweepCell cell;
  VerdictReport report;
  /// Shrunk replay trace for divergent cells when shrinking was requested.
  std::vector<TraceEvent> counterexample;
};

struct SweepOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  bool shrink_divergent = true;
};

inline constexpr double kArrivalGrid[] = {0.1, 0.5, 0.9, 1.0};
inline constexpr double kControlGrid[] = {0.0, 0.1, 0.5, 0.9, 1.0};
inline constexpr Pattern kAllPatterns[] = {Pattern::random, Pattern::burst, Pattern::fill_drain,
                                           Pattern::adversarial};

/// Every pattern x arrival probability x control probability x seed, seeds
/// first_seed .. first_seed + seeds - 1.
std::vector<SweepCell> standard_cells(int m, MuxKind mode, int seeds, Slot slots,
                                      std::uint64_t first_seed = 1,
                                      Mutation mutation = Mutation::none);

/// Results come back in canonical order (m, mode, mutation, pattern, seed,
/// p_arrival, p_control) and do not depend on the thread count.
std::vector<CellResult> run_sweep(std::span<const SweepCell> cells, const SweepOptions& options = {});

/// Line-oriented report, one `cell` line per result plus divergence details
/// and the counterexample trace, indented.
void write_verdicts_text(std::ostream& os, std::span<const CellResult> results);
/// m,mode,pattern,seed,slots,verdict,max_inflow,max_spread,violations,wall_ms
/// followed by p_arrival,p_control,mutation,first_divergence.
void write_verdicts_csv(std::ostream& os, std::span<const CellResult> results);

}  // namespace sdlpq
