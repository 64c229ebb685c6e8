#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sdlpq/cost.hpp"
#include "sdlpq/harness.hpp"
#include "sdlpq/model.hpp"
#include "sdlpq/oracle.hpp"
#include "sdlpq/pqueue.hpp"
#include "sdlpq/trace_io.hpp"

namespace py = pybind11;
using namespace sdlpq;

namespace {

std::string trace_to_text(const std::vector<TraceEvent>& trace) {
  std::ostringstream os;
  write_trace(os, trace);
  return os.str();
}

py::dict cost_dict(const CostSheet& s) {
  py::dict d;
  d["m"] = s.m;
  d["main_switch_size"] = s.main_switch_size;
  d["small_switches"] = s.small_switches;
  d["fiber_count"] = s.fiber_count;
  d["combined_switch_size"] = s.combined_switch_size;
  d["combined_fiber_count"] = s.combined_fiber_count;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.attr("__version__") = "0.1.0";

  py::class_<Packet>(mod, "Packet")
      .def(py::init([](PacketId id, Priority priority, Slot birth_slot) {
             return Packet{id, priority, birth_slot};
           }),
           py::arg("id"), py::arg("priority"), py::arg("birth_slot") = 0)
      .def_readwrite("id", &Packet::id)
      .def_readwrite("priority", &Packet::priority)
      .def_readwrite("birth_slot", &Packet::birth_slot)
      .def(py::self == py::self)
      .def("__repr__", [](const Packet& p) {
        return "Packet(id=" + std::to_string(p.id) + ", priority=" + std::to_string(p.priority) + ")";
      });

  py::class_<TraceEvent>(mod, "TraceEvent")
      .def(py::init([](Slot t, std::optional<Packet> arrival, bool control) {
             return TraceEvent{t, arrival, control};
           }),
           py::arg("t"), py::arg("arrival") = std::nullopt, py::arg("control") = false)
      .def_readwrite("t", &TraceEvent::t)
      .def_readwrite("arrival", &TraceEvent::arrival)
      .def_readwrite("control", &TraceEvent::control)
      .def(py::self == py::self);

  py::class_<RankInterval>(mod, "RankInterval")
      .def_readonly("lo", &RankInterval::lo)
      .def_readonly("hi", &RankInterval::hi)
      .def("size", &RankInterval::size)
      .def("__contains__", &RankInterval::contains)
      .def("__repr__", [](const RankInterval& r) {
        return "[" + std::to_string(r.lo) + ", " + std::to_string(r.hi) + "]";
      });

  mod.def("psi_partition", &psi_partition, py::arg("m"));
  mod.def("group_buffer_size", &group_buffer_size, py::arg("g"), py::arg("m"));
  mod.def("queue_capacity", &queue_capacity, py::arg("m"));
  mod.def("ranks", [](const std::vector<Packet>& pop) { return ranks(pop); }, py::arg("population"));

  py::register_exception<DuplicatePriority>(mod, "DuplicatePriority", PyExc_ValueError);
  py::register_exception<TraceParseError>(mod, "TraceParseError", PyExc_ValueError);
  py::register_exception<ConstructionFault>(mod, "ConstructionFault", PyExc_RuntimeError);

  py::class_<QueueOutputs>(mod, "QueueOutputs")
      .def_readonly("departure", &QueueOutputs::departure)
      .def_readonly("loss", &QueueOutputs::loss);

  py::class_<PriorityQueueOracle>(mod, "PriorityQueueOracle")
      .def(py::init<int>(), py::arg("capacity"))
      .def("step", &PriorityQueueOracle::step, py::arg("arrival"), py::arg("control"))
      .def_property_readonly("occupancy", &PriorityQueueOracle::occupancy)
      .def_property_readonly("buffered", &PriorityQueueOracle::buffered);

  py::enum_<MuxKind>(mod, "MuxKind")
      .value("behavioral", MuxKind::behavioral)
      .value("composed", MuxKind::composed);

  py::enum_<Mutation>(mod, "Mutation")
      .value("none", Mutation::none)
      .value("shifted_psi_boundary", Mutation::shifted_psi_boundary)
      .value("no_balancing", Mutation::no_balancing)
      .value("pre_removal_ranking", Mutation::pre_removal_ranking)
      .value("undersized_buffers", Mutation::undersized_buffers)
      .value("trimmed_buffers", Mutation::trimmed_buffers);

  py::class_<SlotReport>(mod, "SlotReport")
      .def_readonly("t", &SlotReport::t)
      .def_readonly("departure", &SlotReport::departure)
      .def_readonly("loss", &SlotReport::loss)
      .def_readonly("inflow", &SlotReport::inflow)
      .def_readonly("sources", &SlotReport::sources)
      .def_readonly("max_inflow", &SlotReport::max_inflow)
      .def_readonly("occupancies", &SlotReport::occupancies);

  py::class_<Construction>(mod, "Construction")
      .def(py::init(&Construction::build), py::arg("m"), py::arg("kind") = MuxKind::behavioral,
           py::arg("mutation") = Mutation::none)
      .def("step", &Construction::step, py::arg("arrival"), py::arg("control"))
      .def("run_trace", [](Construction& c, const std::vector<TraceEvent>& t) { return c.run_trace(t); })
      .def_property_readonly("m", [](const Construction& c) { return c.params().m; })
      .def_property_readonly("capacity", [](const Construction& c) { return c.params().capacity; })
      .def_property_readonly("occupancy", &Construction::occupancy)
      .def("mux_occupancy", &Construction::mux_occupancy, py::arg("g"), py::arg("k"))
      .def("live_packets", &Construction::live_packets)
      .def("group_of", &Construction::group_of, py::arg("id"))
      .def("state_dump", &Construction::state_dump);

  py::enum_<Pattern>(mod, "Pattern")
      .value("random", Pattern::random)
      .value("burst", Pattern::burst)
      .value("fill_drain", Pattern::fill_drain)
      .value("adversarial", Pattern::adversarial);

  mod.def(
      "gen_trace",
      [](Pattern pattern, Slot slots, double p_arrival, double p_control, std::uint64_t seed, int m) {
        return gen_trace({pattern, slots, p_arrival, p_control, seed, queue_capacity(m)});
      },
      py::arg("pattern"), py::arg("slots"), py::arg("p_arrival") = 0.5, py::arg("p_control") = 0.5,
      py::arg("seed") = 1, py::arg("m") = 3);

  py::class_<InvariantTally>(mod, "InvariantTally")
      .def_readonly("slots", &InvariantTally::slots)
      .def_readonly("max_inflow", &InvariantTally::max_inflow)
      .def_readonly("max_spread", &InvariantTally::max_spread)
      .def_readonly("rank_interval_checks", &InvariantTally::rank_interval_checks)
      .def_readonly("drift_checks", &InvariantTally::drift_checks)
      .def_readonly("mux_losses", &InvariantTally::mux_losses)
      .def("violations", &InvariantTally::violations);

  py::class_<Divergence>(mod, "Divergence")
      .def_readonly("slot", &Divergence::slot)
      .def_readonly("expected_departure", &Divergence::expected_departure)
      .def_readonly("expected_loss", &Divergence::expected_loss)
      .def_readonly("actual_departure", &Divergence::actual_departure)
      .def_readonly("actual_loss", &Divergence::actual_loss)
      .def_property_readonly("fault", [](const Divergence& d) -> std::optional<std::string> {
        if (!d.fault) return std::nullopt;
        return std::string(to_string(*d.fault));
      })
      .def_readonly("detail", &Divergence::detail)
      .def_readonly("state_dump", &Divergence::state_dump);

  py::class_<VerdictReport>(mod, "VerdictReport")
      .def_readonly("m", &VerdictReport::m)
      .def_readonly("mode", &VerdictReport::mode)
      .def_readonly("mutation", &VerdictReport::mutation)
      .def_property_readonly("verdict", [](const VerdictReport& r) { return std::string(to_string(r.verdict)); })
      .def_property_readonly("exact", [](const VerdictReport& r) { return r.verdict == Verdict::exact; })
      .def_readonly("divergence", &VerdictReport::divergence)
      .def_readonly("tally", &VerdictReport::tally)
      .def_readonly("wall_ms", &VerdictReport::wall_ms);

  mod.def(
      "differential_run",
      [](int m, const std::vector<TraceEvent>& trace, MuxKind mode, Mutation mutation) {
        py::gil_scoped_release release;
        return differential_run(m, mode, trace, mutation);
      },
      py::arg("m"), py::arg("trace"), py::arg("mode") = MuxKind::behavioral, py::arg("mutation") = Mutation::none);
  mod.def(
      "shrink",
      [](const std::vector<TraceEvent>& trace, int m, MuxKind mode, Mutation mutation) {
        py::gil_scoped_release release;
        return shrink(trace, m, mode, mutation);
      },
      py::arg("trace"), py::arg("m"), py::arg("mode") = MuxKind::behavioral, py::arg("mutation") = Mutation::none);
  mod.def("reslot", [](const std::vector<TraceEvent>& trace) { return reslot(trace); }, py::arg("trace"));

  mod.def("parse_trace", [](const std::string& text) { return parse_trace_text(text); }, py::arg("text"));
  mod.def("format_trace", &trace_to_text, py::arg("trace"));

  mod.def("component_cost", [](int m) { return cost_dict(component_cost(m)); }, py::arg("m"));
  mod.def("combined_cost", [](int m) { return cost_dict(combined_cost(m)); }, py::arg("m"));
  mod.def("log2_scaling_ratio", &log2_scaling_ratio, py::arg("m"));
}
