#include "sdlpq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include "sdlpq/oracle.hpp"
#include "sdlpq/trace_io.hpp"

namespace sdlpq {

namespace {

// Only the engine comes from <random>; the distributions below are written
// out so generated traces are identical across standard libraries.
class TraceRng {
 public:
  explicit TraceRng(std::uint64_t seed) : engine_(seed) {}

  bool bernoulli(double p) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return u < p;
  }
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(const TraceSpec& spec) {
  auto per_mille = [](double p) { return static_cast<std::uint64_t>(std::llround(p * 1000.0)); };
  std::uint64_t h = splitmix(spec.seed);
  h = splitmix(h ^ static_cast<std::uint64_t>(spec.pattern));
  h = splitmix(h ^ per_mille(spec.p_arrival));
  h = splitmix(h ^ (per_mille(spec.p_control) << 16));
  return h;
}

/// Assigns ids in arrival order and a uniformly shuffled set of spaced
/// priorities to every slot flagged with an arrival.
void fill_random_priorities(std::vector<TraceEvent>& trace, TraceRng& rng) {
  std::vector<Priority> values;
  for (const TraceEvent& ev : trace) {
    if (ev.arrival) values.push_back(static_cast<Priority>(values.size()) * kPrioritySpacing);
  }
  rng.shuffle(values);
  std::size_t k = 0;
  for (TraceEvent& ev : trace) {
    if (!ev.arrival) continue;
    ev.arrival->id = k + 1;
    ev.arrival->priority = values[k];
    ev.arrival->birth_slot = ev.t;
    ++k;
  }
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
  }
}

std::string optional_id(const std::optional<PacketId>& id) {
  return id ? std::to_string(*id) : std::string("-");
}

void tally_fault(InvariantTally& t, FaultKind kind) {
  switch (kind) {
    case FaultKind::rank_interval: ++t.rank_interval_violations; break;
    case FaultKind::rank_drift: ++t.drift_violations; break;
    case FaultKind::mux_loss: break;  // counted from the construction stats
    default: ++t.other_violations; break;
  }
}

auto cell_key(const SweepCell& c) {
  return std::make_tuple(c.m, static_cast<int>(c.mode), static_cast<int>(c.mutation),
                         static_cast<int>(c.spec.pattern), c.spec.seed, c.spec.p_arrival,
                         c.spec.p_control, c.spec.slots);
}

}  // namespace

std::string_view to_string(Pattern pattern) {
  switch (pattern) {
    case Pattern::random: return "random";
    case Pattern::burst: return "burst";
    case Pattern::fill_drain: return "fill_drain";
    case Pattern::adversarial: return "adversarial";
  }
  return "?";
}

Pattern parse_pattern(std::string_view text) {
  for (Pattern p : kAllPatterns) {
    if (to_string(p) == text) return p;
  }
  throw std::invalid_argument("unknown pattern '" + std::string(text) + "'");
}

std::string_view to_string(Verdict v) { return v == Verdict::exact ? "EXACT" : "DIVERGENT"; }

std::string TraceSpec::describe() const {
  std::ostringstream os;
  os << "pattern=" << to_string(pattern) << " seed=" << seed << " slots=" << slots
     << " p_arrival=" << p_arrival << " p_control=" << p_control << " B=" << capacity;
  return os.str();
}

std::vector<TraceEvent> gen_trace(const TraceSpec& spec) {
  check_probability(spec.p_arrival, "p_arrival");
  check_probability(spec.p_control, "p_control");
  if (spec.slots < 0) throw std::invalid_argument("slots must be non-negative");
  if (spec.capacity < 1) throw std::invalid_argument("capacity must be positive");

  TraceRng rng(mix_seed(spec));
  const Slot cap = spec.capacity;
  std::vector<TraceEvent> trace(static_cast<std::size_t>(spec.slots));
  for (Slot t = 1; t <= spec.slots; ++t) trace[static_cast<std::size_t>(t - 1)].t = t;

  switch (spec.pattern) {
    case Pattern::random:
      for (TraceEvent& ev : trace) {
        if (rng.bernoulli(spec.p_arrival)) ev.arrival = Packet{};
        ev.control = rng.bernoulli(spec.p_control);
      }
      fill_random_priorities(trace, rng);
      break;

    case Pattern::burst: {
      bool arrival_run = true;
      std::size_t i = 0;
      while (i < trace.size()) {
        const std::size_t run = 1 + static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(2 * cap)));
        for (std::size_t k = 0; k < run && i < trace.size(); ++k, ++i) {
          if (arrival_run) {
            if (rng.bernoulli(spec.p_arrival)) trace[i].arrival = Packet{};
          } else {
            trace[i].control = rng.bernoulli(spec.p_control);
          }
        }
        arrival_run = !arrival_run;
      }
      fill_random_priorities(trace, rng);
      break;
    }

    case Pattern::fill_drain:
      for (std::size_t i = 0; i < trace.size(); ++i) {
        const bool filling = static_cast<Slot>(i) % (2 * cap) < cap;
        if (filling) trace[i].arrival = Packet{};
        else trace[i].control = true;
      }
      fill_random_priorities(trace, rng);
      break;

    case Pattern::adversarial: {
      const std::size_t fill = std::min<std::size_t>(trace.size(), static_cast<std::size_t>(cap));
      for (std::size_t i = 0; i < fill; ++i) trace[i].arrival = Packet{};
      std::vector<TraceEvent> head(trace.begin(), trace.begin() + static_cast<std::ptrdiff_t>(fill));
      fill_random_priorities(head, rng);
      std::copy(head.begin(), head.end(), trace.begin());

      Priority highest = 0;
      Priority lowest = 0;
      for (std::size_t i = 0; i < fill; ++i) {
        highest = std::max(highest, trace[i].arrival->priority);
        lowest = std::min(lowest, trace[i].arrival->priority);
      }
      PacketId next_id = fill + 1;
      bool high = true;
      for (std::size_t i = fill; i < trace.size(); ++i) {
        Packet p;
        p.id = next_id++;
        p.priority = high ? (highest += kPrioritySpacing) : (lowest -= kPrioritySpacing);
        p.birth_slot = trace[i].t;
        trace[i].arrival = p;
        trace[i].control = rng.bernoulli(spec.p_control);
        high = !high;
      }
      break;
    }
  }
  return trace;
}

VerdictReport differential_run(int m, MuxKind mode, std::span<const TraceEvent> trace,
                               Mutation mutation, std::string trace_descriptor) {
  const auto started = std::chrono::steady_clock::now();
  VerdictReport rep;
  rep.mode = mode;
  rep.mutation = mutation;
  rep.m = m;
  rep.trace_descriptor = std::move(trace_descriptor);

  Construction system = Construction::build(m, mode, mutation);
  PriorityQueueOracle oracle(system.params().capacity);

  Slot t = 0;
  for (const TraceEvent& ev : trace) {
    ++t;
    const QueueOutputs want = oracle.step(ev.arrival, ev.control);
    Divergence div;
    div.slot = t;
    if (want.departure) div.expected_departure = want.departure->id;
    if (want.loss) div.expected_loss = want.loss->id;
    try {
      const SlotReport& got = system.step(ev.arrival, ev.control);
      if (got.departure == div.expected_departure && got.loss == div.expected_loss) continue;
      div.actual_departure = got.departure;
      div.actual_loss = got.loss;
      div.detail = "output mismatch";
      div.state_dump = system.state_dump();
    } catch (const ConstructionFault& fault) {
      div.fault = fault.kind();
      div.detail = fault.detail();
      div.state_dump = fault.state_dump();
      tally_fault(rep.tally, fault.kind());
    }
    rep.verdict = Verdict::divergent;
    rep.divergence = std::move(div);
    break;
  }

  const ConstructionStats& st = system.stats();
  rep.tally.slots = t;
  rep.tally.max_inflow = st.max_inflow;
  rep.tally.max_spread = st.max_spread;
  rep.tally.rank_interval_checks = st.rank_interval_checks;
  rep.tally.drift_checks = st.drift_checks;
  rep.tally.mux_losses = st.mux_losses;
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return rep;
}

std::vector<TraceEvent> reslot(std::span<const TraceEvent> trace) {
  std::vector<TraceEvent> out(trace.begin(), trace.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].t = static_cast<Slot>(i) + 1;
    if (out[i].arrival) out[i].arrival->birth_slot = out[i].t;
  }
  return out;
}

std::vector<TraceEvent> shrink(std::span<const TraceEvent> trace, int m, MuxKind mode,
                               Mutation mutation) {
  // A candidate is a list of indices into `trace`. A divergent candidate is
  // cut right after its first divergent slot, since later events cannot matter.
  auto materialize = [&](const std::vector<std::size_t>& idx) {
    std::vector<TraceEvent> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(trace[i]);
    return reslot(out);
  };
  auto diverges = [&](std::vector<std::size_t>& idx) {
    const auto events = materialize(idx);
    const VerdictReport r = differential_run(m, mode, events, mutation);
    if (r.verdict != Verdict::divergent) return false;
    idx.resize(static_cast<std::size_t>(r.divergence->slot));
    return true;
  };

  std::vector<std::size_t> current(trace.size());
  std::iota(current.begin(), current.end(), std::size_t{0});
  if (!diverges(current)) throw std::invalid_argument("shrink: trace does not diverge");

  // Classic ddmin, repeated until a full pass changes nothing, which leaves the
  // result 1-minimal and makes shrink idempotent.
  for (bool changed = true; changed;) {
    changed = false;
    std::size_t n = 2;
    while (current.size() >= 2) {
      const std::size_t size = current.size();
      n = std::min(n, size);
      bool reduced = false;
      std::vector<std::vector<std::size_t>> chunks;
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t lo = k * size / n;
        const std::size_t hi = (k + 1) * size / n;
        chunks.emplace_back(current.begin() + static_cast<std::ptrdiff_t>(lo),
                            current.begin() + static_cast<std::ptrdiff_t>(hi));
      }
      for (auto& chunk : chunks) {
        if (diverges(chunk)) {
          current = std::move(chunk);
          n = 2;
          reduced = true;
          break;
        }
      }
      if (!reduced && n > 2) {
        for (std::size_t k = 0; k < n && !reduced; ++k) {
          std::vector<std::size_t> complement;
          for (std::size_t j = 0; j < n; ++j) {
            if (j != k) complement.insert(complement.end(), chunks[j].begin(), chunks[j].end());
          }
          if (diverges(complement)) {
            current = std::move(complement);
            n = std::max<std::size_t>(n - 1, 2);
            reduced = true;
          }
        }
      }
      if (reduced) {
        changed = true;
        continue;
      }
      if (n >= size) break;
      n = std::min(size, 2 * n);
    }
  }
  return materialize(current);
}

std::vector<SweepCell> standard_cells(int m, MuxKind mode, int seeds, Slot slots,
                                      std::uint64_t first_seed, Mutation mutation) {
  const int capacity = queue_capacity(m);
  std::vector<SweepCell> cells;
  for (Pattern pattern : kAllPatterns) {
    for (double pa : kArrivalGrid) {
      for (double pc : kControlGrid) {
        for (int s = 0; s < seeds; ++s) {
          SweepCell c;
          c.m = m;
          c.mode = mode;
          c.mutation = mutation;
          c.spec = TraceSpec{pattern, slots, pa, pc, first_seed + static_cast<std::uint64_t>(s), capacity};
          cells.push_back(c);
        }
      }
    }
  }
  return cells;
}

std::vector<CellResult> run_sweep(std::span<const SweepCell> cells, const SweepOptions& options) {
  std::vector<SweepCell> ordered(cells.begin(), cells.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const SweepCell& a, const SweepCell& b) { return cell_key(a) < cell_key(b); });

  std::vector<CellResult> results(ordered.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < ordered.size(); i = next++) {
      const SweepCell& c = ordered[i];
      CellResult& r = results[i];
      r.cell = c;
      const auto trace = gen_trace(c.spec);
      r.report = differential_run(c.m, c.mode, trace, c.mutation, c.spec.describe());
      if (r.report.verdict == Verdict::divergent && options.shrink_divergent) {
        r.counterexample = shrink(trace, c.m, c.mode, c.mutation);
      }
    }
  };

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(ordered.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  return results;
}

void write_verdicts_text(std::ostream& os, std::span<const CellResult> results) {
  for (const CellResult& r : results) {
    const VerdictReport& v = r.report;
    os << "cell m=" << r.cell.m << " mode=" << to_string(r.cell.mode);
    if (r.cell.mutation != Mutation::none) os << " mutation=" << to_string(r.cell.mutation);
    os << ' ' << r.cell.spec.describe() << " verdict=" << to_string(v.verdict)
       << " max_inflow=" << v.tally.max_inflow << " max_spread=" << v.tally.max_spread
       << " rank_checks=" << v.tally.rank_interval_checks << " drift_checks=" << v.tally.drift_checks
       << " violations=" << v.tally.violations() << " mux_losses=" << v.tally.mux_losses
       << " wall_ms=" << std::fixed << std::setprecision(1) << v.wall_ms << std::defaultfloat
       << '\n';
    if (!v.divergence) continue;
    const Divergence& d = *v.divergence;
    os << "  divergence slot=" << d.slot << " expected D " << optional_id(d.expected_departure)
       << " L " << optional_id(d.expected_loss);
    if (d.fault) {
      os << " fault=" << to_string(*d.fault) << " detail=\"" << d.detail << "\"\n";
    } else {
      os << " actual D " << optional_id(d.actual_departure) << " L "
         << optional_id(d.actual_loss) << '\n';
    }
    if (!r.counterexample.empty()) {
      os << "  counterexample slots=" << r.counterexample.size() << '\n';
      std::ostringstream trace;
      write_trace(trace, r.counterexample);
      std::istringstream lines(trace.str());
      for (std::string line; std::getline(lines, line);) os << "    " << line << '\n';
    }
  }
}

void write_verdicts_csv(std::ostream& os, std::span<const CellResult> results) {
  os << "m,mode,pattern,seed,slots,verdict,max_inflow,max_spread,violations,wall_ms,"
        "p_arrival,p_control,mutation,first_divergence\n";
  for (const CellResult& r : results) {
    const VerdictReport& v = r.report;
    os << r.cell.m << ',' << to_string(r.cell.mode) << ',' << to_string(r.cell.spec.pattern) << ','
       << r.cell.spec.seed << ',' << r.cell.spec.slots << ',' << to_string(v.verdict) << ','
       << v.tally.max_inflow << ',' << v.tally.max_spread << ',' << v.tally.violations() << ','
       << std::fixed << std::setprecision(3) << v.wall_ms << std::defaultfloat << ','
       << r.cell.spec.p_arrival << ',' << r.cell.spec.p_control << ',' << to_string(r.cell.mutation)
       << ',';
    if (v.divergence) os << v.divergence->slot;
    os << '\n';
  }
}

}  // namespace sdlpq
