// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "reference_models.hpp"
#include "sdlpq/cost.hpp"
#include "sdlpq/harness.hpp"
#include "sdlpq/model.hpp"
#include "sdlpq/mux.hpp"
#include "sdlpq/oracle.hpp"
#include "sdlpq/pqueue.hpp"
#include "sdlpq/trace_io.hpp"

using namespace sdlpq;

namespace {

constexpr int kSeedsPerGridPoint = 3;  // 4 patterns x 4 x 5 probabilities x 3 = 240 traces per m
constexpr Slot kSlots = 10000;
constexpr int kMaxObservedInflow = 13;
constexpr int kGroupLinks = 16;
constexpr double kScalingTolerance = 0.10;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << ']';
    }
  }
};

int failures = 0;

void report(int id, const std::string& name, Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << "  " << name << " :"
            << o.detail.str() << std::endl;
  if (!o.pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Largest number of packets group g may hold: 2^g - 2 for 2 <= g <= m,
/// mirrored above m, and one packet in the two end groups.
int group_bound(int g, int m) {
  const int j = std::min(g, 2 * m - g);
  return j == 1 ? 1 : (1 << j) - 2;
}

struct AuditTally {
  std::int64_t slot_checks = 0;
  std::int64_t rank_checks = 0;
  std::int64_t drift_checks = 0;
  std::int64_t rank_failures = 0;
  std::int64_t drift_failures = 0;
  std::int64_t locality_failures = 0;
  std::int64_t inflow_failures = 0;
  std::int64_t balance_failures = 0;
  std::int64_t capacity_failures = 0;
  std::int64_t output_mismatches = 0;
  int max_inflow = 0;
};

/// Steps the construction from outside and recomputes every slot-level
/// property from its observable state, with ranks counted by brute force.
void audit_trace(int m, MuxKind kind, const std::vector<TraceEvent>& trace, AuditTally& tally) {
  Construction c = Construction::build(m, kind);
  PriorityQueueOracle ideal(c.params().capacity);
  const std::vector<RankInterval> psi = psi_partition(m);
  std::map<PacketId, int> last;
  for (const TraceEvent& ev : trace) {
    const auto want = ideal.step(ev.arrival, ev.control);
    const SlotReport& got = c.step(ev.arrival, ev.control);
    const auto id = [](const std::optional<Packet>& p) {
      return p ? std::optional<PacketId>(p->id) : std::nullopt;
    };
    if (got.departure != id(want.departure) || got.loss != id(want.loss)) ++tally.output_mismatches;
    ++tally.slot_checks;

    for (int g = 1; g <= 2 * m - 1; ++g) {
      const int inflow = got.inflow[static_cast<std::size_t>(g - 1)];
      tally.max_inflow = std::max(tally.max_inflow, inflow);
      if (inflow > kGroupLinks) ++tally.inflow_failures;
      const SourceSet src = got.sources[static_cast<std::size_t>(g - 1)];
      for (int s = 1; s <= 2 * m - 1; ++s) {
        if ((src >> s & 1) && std::abs(s - g) > 1) ++tally.locality_failures;
      }
      int lo = 1 << 30, hi = 0, held = 0;
      for (int k = 0; k < 4; ++k) {
        const int q = c.mux_occupancy(g, k);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
        held += q;
      }
      if (hi - lo > 1) ++tally.balance_failures;
      if (held > group_bound(g, m)) ++tally.capacity_failures;
    }

    const auto res = c.residents();
    std::vector<Packet> pop;
    for (const auto& r : res) pop.push_back(r.packet);
    std::map<PacketId, int> now;
    for (const auto& r : res) {
      const int rank = testing::brute_rank(pop, r.packet);
      now[r.packet.id] = rank;
      const RankInterval& iv = psi[static_cast<std::size_t>(r.group - 1)];
      const int slack = group_buffer_size(r.group, m) - 1;
      ++tally.rank_checks;
      if (rank < iv.lo - slack || rank > iv.hi + slack) ++tally.rank_failures;
      if (auto it = last.find(r.packet.id); it != last.end()) {
        ++tally.drift_checks;
        if (std::abs(rank - it->second) > 1) ++tally.drift_failures;
      }
    }
    last = std::move(now);
  }
}

bool is_one_minimal(const std::vector<TraceEvent>& trace, int m, MuxKind kind, Mutation mu) {
  if (differential_run(m, kind, trace, mu).verdict != Verdict::divergent) return false;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    auto fewer = trace;
    fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(i));
    if (differential_run(m, kind, reslot(fewer), mu).verdict == Verdict::divergent) return false;
  }
  return true;
}

}  // namespace

int main() {
  const auto t_start = std::chrono::steady_clock::now();

  // ---- The behavioral sweep feeds criteria 1-4.
  std::vector<CellResult> sweep;
  std::map<int, std::pair<int, int>> per_m;  // m -> (cells, exact)
  double sweep_seconds = 0;
  {
    const auto t0 = std::chrono::steady_clock::now();
    for (int m = 1; m <= 6; ++m) {
      const auto cells = standard_cells(m, MuxKind::behavioral, kSeedsPerGridPoint, kSlots);
      auto results = run_sweep(cells);
      for (const CellResult& r : results) {
        ++per_m[m].first;
        per_m[m].second += r.report.verdict == Verdict::exact ? 1 : 0;
      }
      sweep.insert(sweep.end(), results.begin(), results.end());
    }
    sweep_seconds = seconds_since(t0);
    std::ofstream csv("acceptance_behavioral_sweep.csv");
    write_verdicts_csv(csv, sweep);
  }

  {
    Outcome o;
    for (const auto& [m, counts] : per_m) {
      o.detail << " m=" << m << " B=" << queue_capacity(m) << ' ' << counts.second << '/' << counts.first;
      o.require(counts.first >= 200, "fewer than 200 traces for m=" + std::to_string(m));
      o.require(counts.second == counts.first, "non-exact cell for m=" + std::to_string(m));
    }
    const std::vector<int> expected_b{1, 4, 10, 22, 46, 94};
    for (int m = 1; m <= 6; ++m) o.require(queue_capacity(m) == expected_b[static_cast<std::size_t>(m - 1)], "capacity");
    o.detail << " EXACT; " << std::fixed << std::setprecision(1) << sweep_seconds << " s";
    report(1, "exact emulation, behavioral, m=1..6", o);
  }

  // Independent external audit on a slice of the same traffic.
  AuditTally audit;
  for (int m = 1; m <= 6; ++m) {
    for (Pattern p : kAllPatterns) {
      for (double pc : {0.1, 0.5, 0.9}) {
        audit_trace(m, MuxKind::behavioral, gen_trace({p, kSlots, 0.9, pc, 101, queue_capacity(m)}), audit);
      }
    }
  }

  std::int64_t rank_checks = 0, drift_checks = 0, rank_viol = 0, drift_viol = 0, mux_losses = 0,
               other_viol = 0;
  int max_inflow = 0, max_spread = 0;
  for (const CellResult& r : sweep) {
    const InvariantTally& t = r.report.tally;
    rank_checks += t.rank_interval_checks;
    drift_checks += t.drift_checks;
    rank_viol += t.rank_interval_violations;
    drift_viol += t.drift_violations;
    mux_losses += t.mux_losses;
    other_viol += t.other_violations;
    max_inflow = std::max(max_inflow, t.max_inflow);
    max_spread = std::max(max_spread, t.max_spread);
  }

  {
    Outcome o;
    o.detail << " sweep max inflow " << max_inflow << " (links " << kGroupLinks << ", bound "
             << kMaxObservedInflow << "); audit max inflow " << audit.max_inflow << ", "
             << audit.locality_failures << " locality failures over " << audit.slot_checks << " slots";
    o.require(max_inflow <= kMaxObservedInflow && audit.max_inflow <= kMaxObservedInflow, "inflow above 13");
    o.require(audit.inflow_failures == 0, "inflow above 16");
    o.require(audit.locality_failures == 0 && other_viol == 0, "source locality");
    report(2, "collision freedom and source locality", o);
  }

  {
    Outcome o;
    o.detail << " sweep: " << rank_checks << " interval checks, " << rank_viol << " violations; "
             << drift_checks << " drift checks, " << drift_viol << " violations; audit: "
             << audit.rank_checks << " interval / " << audit.drift_checks << " drift checks, "
             << audit.rank_failures + audit.drift_failures << " failures";
    o.require(rank_viol == 0 && drift_viol == 0, "built-in rank checks");
    o.require(audit.rank_failures == 0 && audit.drift_failures == 0, "audited rank checks");
    o.require(rank_checks > 0 && drift_checks > 0 && audit.rank_checks > 0, "no checks ran");
    report(3, "rank interval and drift invariants", o);
  }

  {
    Outcome o;
    o.detail << " multiplexer losses " << mux_losses << ", max spread " << max_spread
             << ", audit balance/capacity failures " << audit.balance_failures << '/'
             << audit.capacity_failures << ", audit output mismatches " << audit.output_mismatches;
    o.require(mux_losses == 0, "multiplexer loss");
    o.require(max_spread <= 1 && audit.balance_failures == 0, "balance");
    o.require(audit.capacity_failures == 0, "group capacity");
    o.require(audit.output_mismatches == 0, "audit emulation");
    report(4, "no internal loss, balance, group capacity", o);
  }

  // ---- Criterion 5: cost formulas.
  {
    Outcome o;
    for (std::int64_t m = 1; m <= 10; ++m) {
      const CostSheet s = component_cost(static_cast<int>(m));
      const CostSheet c = combined_cost(static_cast<int>(m));
      o.require(s.main_switch_size == 32 * m - 14, "main switch m=" + std::to_string(m));
      o.require(s.fiber_count == 12 * (m * m - 2 * m + 3), "fibers m=" + std::to_string(m));
      o.require(c.combined_switch_size == 12 * m * m + 56 * m - 2, "combined m=" + std::to_string(m));
      o.require(c.combined_fiber_count == s.fiber_count, "combined fibers m=" + std::to_string(m));
      std::map<std::int64_t, std::int64_t> small{{3, 48}};
      for (std::int64_t j = 3; j <= m - 1; ++j) small[j + 1] += 24;
      small[m + 1] += 12;
      o.require(s.small_switches == small, "small switches m=" + std::to_string(m));
    }
    const CostSheet s4 = component_cost(4);
    o.require(s4.main_switch_size == 114 && s4.combined_switch_size == 414 && s4.fiber_count == 132, "m=4 spot values");
    double lo = 1e9, hi = 0;
    for (int m = 8; m <= 12; ++m) {
      lo = std::min(lo, log2_scaling_ratio(m));
      hi = std::max(hi, log2_scaling_ratio(m));
    }
    o.require(hi / lo - 1.0 <= kScalingTolerance, "log^2 scaling ratio spread");
    o.detail << " m=1..10 closed forms exact; m=4: 114x114, 414x414, 132 fibers; log2(B)^2/switch over m=8..12 in ["
             << std::setprecision(4) << lo << ", " << hi << "], spread " << std::setprecision(2)
             << 100.0 * (hi / lo - 1.0) << "% (limit 10%)";
    report(5, "cost formulas", o);
  }

  // ---- Criterion 6: multiplexer and oracle property suites.
  {
    Outcome o;
    std::int64_t mux_cases = 0, mux_fail = 0;
    for (int n : {1, 2, 4}) {
      for (int buffer : {1, 2, 4, 8}) {
        for (MuxTiming timing : {MuxTiming::registered, MuxTiming::cut_through}) {
          for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            std::mt19937_64 rng(seed * 104729 + static_cast<std::uint64_t>(n * 17 + buffer));
            FifoMux mux({n, buffer, timing});
            testing::BruteFifo ref(n, buffer, timing == MuxTiming::cut_through);
            PacketId next = 1;
            for (int t = 0; t < 100; ++t) {
              const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(n + 1));
              std::vector<Packet> in;
              for (int i = 0; i < k; ++i, ++next) in.push_back({next, static_cast<Priority>(next), t});
              const int q_prev = mux.occupancy();
              const auto got = mux.step(in);
              const auto want = ref.step(in);
              const bool busy = timing == MuxTiming::registered ? q_prev > 0 : q_prev + k > 0;
              const bool conserved = mux.occupancy() == q_prev + k - (got.departure ? 1 : 0) -
                                                            static_cast<int>(got.losses.size());
              if (got.departure != want.departure || got.losses != want.losses || !conserved ||
                  got.departure.has_value() != busy || mux.occupancy() > buffer) {
                ++mux_fail;
              }
              ++mux_cases;
            }
          }
        }
      }
    }
    std::int64_t oracle_slots = 0, oracle_fail = 0;
    for (int capacity : {1, 2, 4, 10, 22, 46, 94}) {
      testing::PacketSource src(static_cast<std::uint64_t>(capacity) * 31);
      for (double pa : {0.3, 0.7, 1.0}) {
        std::bernoulli_distribution arrive(pa), request(0.45);
        PriorityQueueOracle q(capacity);
        for (int t = 1; t <= 1000; ++t) {
          std::optional<Packet> a;
          if (arrive(src.rng())) a = src.next(t);
          const bool c = request(src.rng());
          const auto before = q.buffered();
          const auto out = q.step(a, c);
          if (!testing::check_queue_laws(capacity, before, a, c, out.departure, out.loss, q.buffered()).empty()) {
            ++oracle_fail;
          }
          ++oracle_slots;
        }
      }
    }
    o.detail << " multiplexer " << mux_cases - mux_fail << '/' << mux_cases
             << " cases match the brute-force FIFO; oracle " << oracle_slots - oracle_fail << '/'
             << oracle_slots << " slots satisfy the five queue laws";
    o.require(mux_cases >= 10000 && mux_fail == 0, "multiplexer suite");
    o.require(oracle_slots >= 10000 && oracle_fail == 0, "oracle suite");
    report(6, "multiplexer and oracle property suites", o);
  }

  // ---- Criterion 7: mutation sensitivity and shrinking.
  {
    Outcome o;
    for (Mutation mu : {Mutation::shifted_psi_boundary, Mutation::no_balancing, Mutation::pre_removal_ranking,
                        Mutation::undersized_buffers}) {
      std::vector<SweepCell> cells;
      for (int m = 1; m <= 6; ++m) {
        auto part = standard_cells(m, MuxKind::behavioral, kSeedsPerGridPoint, kSlots, 1, mu);
        cells.insert(cells.end(), part.begin(), part.end());
      }
      const auto results = run_sweep(cells, {0, false});
      int divergent = 0;
      const CellResult* first = nullptr;
      for (const CellResult& r : results) {
        if (r.report.verdict != Verdict::divergent) continue;
        ++divergent;
        if (!first) first = &r;
      }
      o.require(divergent > 0, std::string(to_string(mu)) + " not detected");
      std::size_t shrunk_len = 0;
      bool minimal = false;
      if (first) {
        const auto trace = gen_trace(first->cell.spec);
        const auto small = shrink(trace, first->cell.m, MuxKind::behavioral, mu);
        shrunk_len = small.size();
        minimal = is_one_minimal(small, first->cell.m, MuxKind::behavioral, mu);
        std::ostringstream text;
        write_trace(text, small);
        minimal = minimal && parse_trace_text(text.str()) == small;
      }
      o.require(minimal, std::string(to_string(mu)) + " counterexample not 1-minimal/replayable");
      o.detail << ' ' << to_string(mu) << ": " << divergent << '/' << results.size() << " divergent, cex "
               << shrunk_len << " slots (m=" << (first ? first->cell.m : 0) << ");";
    }
    report(7, "mutation sensitivity and 1-minimal counterexamples", o);
  }

  // ---- Criterion 8: composed-multiplexer experiment.
  {
    Outcome o;
    std::vector<SweepCell> cells;
    for (int m = 2; m <= 4; ++m) {
      auto part = standard_cells(m, MuxKind::composed, kSeedsPerGridPoint, kSlots);
      cells.insert(cells.end(), part.begin(), part.end());
    }
    const auto results = run_sweep(cells, {0, true});
    int exact = 0, divergent = 0, with_cex = 0;
    for (const CellResult& r : results) {
      if (r.report.verdict == Verdict::exact) {
        ++exact;
      } else {
        ++divergent;
        if (!r.counterexample.empty() &&
            differential_run(r.cell.m, MuxKind::composed, r.counterexample).verdict == Verdict::divergent) {
          ++with_cex;
        }
      }
    }
    std::ofstream text("acceptance_composed_report.txt");
    write_verdicts_text(text, results);
    o.require(exact + divergent == static_cast<int>(results.size()), "unclassified cell");
    o.require(with_cex == divergent, "divergent cell without a replayable counterexample");
    o.detail << " m=2..4, " << results.size() << " cells: " << exact << " EXACT, " << divergent
             << " DIVERGENT (" << with_cex << " with replayable counterexamples). Outcome: "
             << (divergent == 0 ? "composed 4-to-1 units emulate the priority queue exactly on every cell"
                                : "composed 4-to-1 units break emulation; see acceptance_composed_report.txt");
    report(8, "composed-multiplexer experiment", o);
  }

  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAILED") << " in "
            << std::fixed << std::setprecision(1) << seconds_since(t_start) << " s" << std::endl;
  return failures == 0 ? 0 : 1;
}
