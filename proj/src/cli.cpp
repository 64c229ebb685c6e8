#include "sdlpq/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sdlpq/cost.hpp"
#include "sdlpq/harness.hpp"
#include "sdlpq/pqueue.hpp"
#include "sdlpq/trace_io.hpp"

namespace sdlpq {

namespace {

struct RunConfig {
  std::vector<int> m;
  std::string mode = "behavioral";
  std::string trace_path;
  std::string out_path = "-";
  std::uint64_t seed = 1;
  int seeds = 3;
  Slot slots = -1;
  std::optional<double> p_arrival;
  std::optional<double> p_control;
  std::string pattern;
  std::string format;
  std::string mutation = "none";
  unsigned threads = 0;
  bool no_shrink = false;
};

/// Writes to the --out file, or to `out` for "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::out | std::ios::trunc);
    if (!file_) throw std::runtime_error("cannot open '" + path + "' for writing");
    stream_ = &file_;
  }
  std::ostream& stream() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw std::runtime_error("write failed");
  }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

int single_m(const RunConfig& cfg) {
  if (cfg.m.size() != 1) throw std::invalid_argument("exactly one --m is required");
  return cfg.m.front();
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const int m = single_m(cfg);
  std::ifstream in(cfg.trace_path);
  if (!in) throw std::runtime_error("cannot open trace '" + cfg.trace_path + "'");
  std::vector<TraceEvent> trace;
  try {
    trace = parse_trace(in);
  } catch (const TraceParseError& e) {
    err << cfg.trace_path << ':' << e.line() << ": " << e.reason() << '\n';
    return 2;
  }

  Construction system = Construction::build(m, parse_mux_kind(cfg.mode));
  Sink sink(cfg.out_path, out);
  RunSummary summary;
  try {
    for (const TraceEvent& ev : trace) {
      const SlotReport& r = system.step(ev.arrival, ev.control);
      write_slot_report(sink.stream(), r);
      summary.arrivals += ev.arrival ? 1 : 0;
      summary.departures += r.departure ? 1 : 0;
      summary.losses += r.loss ? 1 : 0;
    }
  } catch (const ConstructionFault& fault) {
    sink.finish();
    err << "construction fault at " << fault.what() << '\n' << fault.state_dump();
    return 3;
  }
  summary.slots = system.slot();
  summary.final_occupancy = system.occupancy();
  summary.max_inflow = system.stats().max_inflow;
  summary.max_spread = system.stats().max_spread;
  write_run_summary(sink.stream(), summary);
  sink.finish();
  return 0;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.m.empty()) throw std::invalid_argument("--m is required");
  const MuxKind mode = parse_mux_kind(cfg.mode);
  const Mutation mutation = parse_mutation(cfg.mutation);
  const Slot slots = cfg.slots < 0 ? 10000 : cfg.slots;
  if (cfg.seeds < 1) throw std::invalid_argument("--seeds must be >= 1");
  std::optional<Pattern> only_pattern;
  if (!cfg.pattern.empty()) only_pattern = parse_pattern(cfg.pattern);

  std::vector<SweepCell> cells;
  for (int m : cfg.m) {
    for (const SweepCell& c : standard_cells(m, mode, cfg.seeds, slots, cfg.seed, mutation)) {
      if (only_pattern && c.spec.pattern != *only_pattern) continue;
      if (cfg.p_arrival && c.spec.p_arrival != kArrivalGrid[0]) continue;
      if (cfg.p_control && c.spec.p_control != kControlGrid[0]) continue;
      SweepCell cell = c;
      if (cfg.p_arrival) cell.spec.p_arrival = *cfg.p_arrival;
      if (cfg.p_control) cell.spec.p_control = *cfg.p_control;
      cells.push_back(cell);
    }
  }

  SweepOptions opts;
  opts.threads = cfg.threads;
  opts.shrink_divergent = !cfg.no_shrink;
  const std::vector<CellResult> results = run_sweep(cells, opts);

  std::size_t exact = 0;
  bool gate = true;
  for (const CellResult& r : results) {
    const bool ok = r.report.verdict == Verdict::exact;
    exact += ok ? 1 : 0;
    if (r.cell.mode == MuxKind::behavioral && r.cell.mutation == Mutation::none && !ok) gate = false;
  }

  Sink sink(cfg.out_path, out);
  if (cfg.format == "csv") {
    write_verdicts_csv(sink.stream(), results);
  } else {
    write_verdicts_text(sink.stream(), results);
    sink.stream() << "summary mode=" << to_string(mode) << " mutation=" << to_string(mutation)
                  << " cells=" << results.size() << " exact=" << exact
                  << " divergent=" << results.size() - exact << '\n';
    if (mode == MuxKind::composed) {
      sink.stream() << "outcome composed multiplexers "
                    << (exact == results.size()
                            ? "emulate the priority queue exactly on every cell"
                            : "diverge on " + std::to_string(results.size() - exact) +
                                  " cell(s); counterexamples above")
                    << '\n';
    }
  }
  sink.finish();
  return gate ? 0 : 1;
}

int cmd_gen_trace(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const int m = single_m(cfg);
  TraceSpec spec;
  spec.pattern = parse_pattern(cfg.pattern);
  spec.capacity = queue_capacity(m);
  spec.slots = cfg.slots >= 0 ? cfg.slots
               : spec.pattern == Pattern::fill_drain ? 2 * Slot{spec.capacity}
                                                      : 1000;
  spec.p_arrival = cfg.p_arrival.value_or(0.5);
  spec.p_control = cfg.p_control.value_or(0.5);
  spec.seed = cfg.seed;
  const auto trace = gen_trace(spec);
  Sink sink(cfg.out_path, out);
  const std::vector<std::string> header{"m=" + std::to_string(m) + ' ' + spec.describe()};
  write_trace(sink.stream(), trace, header);
  sink.finish();
  return 0;
}

int cmd_cost(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const int m = single_m(cfg);
  const CostSheet s = component_cost(m);
  Sink sink(cfg.out_path, out);
  std::ostream& os = sink.stream();
  if (cfg.format == "csv") {
    os << "m,main_switch,small_switch_size,small_switch_count,fibers,combined_switch,combined_fibers\n";
    for (const auto& [side, count] : s.small_switches) {
      os << s.m << ',' << s.main_switch_size << ',' << side << ',' << count << ',' << s.fiber_count
         << ',' << s.combined_switch_size << ',' << s.combined_fiber_count << '\n';
    }
  } else {
    const CostDerivation d = m <= kMaxM ? derive_cost(m) : CostDerivation{};
    os << "m                 " << s.m << '\n'
       << "capacity B        " << (m <= kMaxM ? std::to_string(queue_capacity(m)) : "-") << '\n'
       << "main switch       " << s.main_switch_size << 'x' << s.main_switch_size << '\n';
    for (const auto& [side, count] : s.small_switches) {
      os << "small switches    " << count << " of " << side << 'x' << side << '\n';
    }
    os << "fiber delay lines " << s.fiber_count << '\n'
       << "combined switch   " << s.combined_switch_size << 'x' << s.combined_switch_size << '\n'
       << "combined fibers   " << s.combined_fiber_count << '\n';
    if (m <= kMaxM) {
      os << "bottom-up check   small switches " << (d.small_switches_match ? "match" : "differ")
         << ", fibers " << (d.fibers_match ? "match" : "differ") << ", combined switch "
         << (d.combined_matches ? "matches" : "differs") << " (derived combined "
         << d.derived.combined_switch_size << ")\n";
    }
  }
  sink.finish();
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulate and verify an optical priority queue built from 4-to-1 FIFO multiplexers",
               "sdlpq"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_m = [&cfg](CLI::App* sub) {
    return sub->add_option("--m", cfg.m, "construction parameter m (2m-1 groups, B = 3*2^(m-1)-2)")
        ->check(CLI::Range(1, kMaxM));
  };
  auto add_mode = [&cfg](CLI::App* sub) {
    sub->add_option("--mode", cfg.mode, "4-to-1 multiplexer model")
        ->check(CLI::IsMember({"behavioral", "composed"}));
  };
  auto add_probabilities = [&cfg](CLI::App* sub) {
    sub->add_option("--p-arrival", cfg.p_arrival, "arrival probability")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--p-control", cfg.p_control, "departure-request probability")->check(CLI::Range(0.0, 1.0));
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run one trace through the construction");
  add_m(simulate)->required()->expected(1);
  add_mode(simulate);
  simulate->add_option("--trace", cfg.trace_path, "trace file")->required();
  simulate->add_option("--out", cfg.out_path, "slot report output, - for stdout");

  CLI::App* verify = app.add_subcommand("verify", "differential sweep against the ideal queue");
  add_m(verify)->required()->expected(1, kMaxM);
  add_mode(verify);
  verify->add_option("--slots", cfg.slots, "slots per trace (default 10000)")->check(CLI::NonNegativeNumber);
  verify->add_option("--seeds", cfg.seeds, "seeds per grid point");
  verify->add_option("--seed", cfg.seed, "first seed");
  verify->add_option("--pattern", cfg.pattern, "restrict to one pattern")
      ->check(CLI::IsMember({"random", "burst", "fill_drain", "adversarial"}));
  add_probabilities(verify);
  verify->add_option("--format", cfg.format, "report format")->check(CLI::IsMember({"text", "csv"}));
  verify->add_option("--out", cfg.out_path, "report output, - for stdout");
  verify->add_option("--threads", cfg.threads, "worker threads, 0 for all cores");
  verify->add_option("--mutation", cfg.mutation, "run a deliberately broken construction")
      ->check(CLI::IsMember({"none", "shifted_psi_boundary", "no_balancing", "pre_removal_ranking",
                             "undersized_buffers", "trimmed_buffers"}));
  verify->add_flag("--no-shrink", cfg.no_shrink, "skip counterexample shrinking");

  CLI::App* gen = app.add_subcommand("gen-trace", "write a generated trace file");
  gen->add_option("--pattern", cfg.pattern, "trace pattern")
      ->required()
      ->check(CLI::IsMember({"random", "burst", "fill_drain", "adversarial"}));
  add_m(gen)->required()->expected(1);
  gen->add_option("--slots", cfg.slots, "number of slots")->check(CLI::NonNegativeNumber);
  add_probabilities(gen);
  gen->add_option("--seed", cfg.seed, "generator seed");
  gen->add_option("--out", cfg.out_path, "trace output, - for stdout");

  CLI::App* cost = app.add_subcommand("cost", "hardware cost of the construction");
  cost->add_option("--m", cfg.m, "construction parameter m")->required()->expected(1)->check(CLI::PositiveNumber);
  cost->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"table", "csv"}));
  cost->add_option("--out", cfg.out_path, "output, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*simulate) return cmd_simulate(cfg, out, err);
    if (*verify) return cmd_verify(cfg, out, err);
    if (*gen) return cmd_gen_trace(cfg, out, err);
    return cmd_cost(cfg, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace sdlpq
