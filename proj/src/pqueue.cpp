#include "sdlpq/pqueue.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <sstream>
#include <utility>

namespace sdlpq {

namespace {

constexpr int kMuxesPerGroup = 4;
constexpr int kLinksPerMux = 4;
constexpr int kGroupLinks = kMuxesPerGroup * kLinksPerMux;

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

int occupancy_of(const Multiplexer& mux) {
  return std::visit([](const auto& x) { return x.occupancy(); }, mux);
}

std::optional<Packet> next_departure_of(const Multiplexer& mux) {
  return std::visit([](const auto& x) { return x.next_departure(); }, mux);
}

MuxStep step_mux(Multiplexer& mux, std::span<const Packet> arrivals) {
  return std::visit([&](auto& x) { return x.step(arrivals); }, mux);
}

void write_packet(std::ostream& os, const Packet& p) {
  os << p.id << '@' << p.priority;
}

void write_mux(std::ostream& os, const Multiplexer& mux) {
  auto write_fifo = [&os](const FifoMux& f) {
    os << '[';
    bool first = true;
    for (const Packet& p : f.contents()) {
      if (!first) os << ' ';
      write_packet(os, p);
      first = false;
    }
    os << ']';
  };
  std::visit(overloaded{
                 [&](const FifoMux& f) { write_fifo(f); },
                 [&](const ComposedMux& c) {
                   os << "A";
                   write_fifo(c.front_a());
                   os << " B";
                   write_fifo(c.front_b());
                   os << " out";
                   write_fifo(c.back());
                 },
             },
             mux);
}

SystemParams mutated_params(int m, Mutation mutation) {
  SystemParams p = SystemParams::make(m);
  switch (mutation) {
    case Mutation::shifted_psi_boundary:
      for (int j = 1; j <= m; ++j) {
        p.psi[static_cast<std::size_t>(j - 1)] = {(1 << (j - 1)) + 1, 1 << j};
      }
      break;
    case Mutation::undersized_buffers:
      for (int& b : p.group_buffers) b = std::max(1, b / 2);
      break;
    case Mutation::trimmed_buffers:
      for (int& b : p.group_buffers) b = std::max(1, b - 1);
      break;
    default:
      break;
  }
  return p;
}

}  // namespace

std::string_view to_string(MuxKind kind) {
  return kind == MuxKind::behavioral ? "behavioral" : "composed";
}

std::string_view to_string(Mutation mutation) {
  switch (mutation) {
    case Mutation::none: return "none";
    case Mutation::shifted_psi_boundary: return "shifted_psi_boundary";
    case Mutation::no_balancing: return "no_balancing";
    case Mutation::pre_removal_ranking: return "pre_removal_ranking";
    case Mutation::undersized_buffers: return "undersized_buffers";
    case Mutation::trimmed_buffers: return "trimmed_buffers";
  }
  return "?";
}

MuxKind parse_mux_kind(std::string_view text) {
  if (text == "behavioral") return MuxKind::behavioral;
  if (text == "composed") return MuxKind::composed;
  throw std::invalid_argument("unknown multiplexer kind '" + std::string(text) + "'");
}

Mutation parse_mutation(std::string_view text) {
  for (Mutation m : {Mutation::none, Mutation::shifted_psi_boundary, Mutation::no_balancing,
                     Mutation::pre_removal_ranking, Mutation::undersized_buffers,
                     Mutation::trimmed_buffers}) {
    if (to_string(m) == text) return m;
  }
  throw std::invalid_argument("unknown mutation '" + std::string(text) + "'");
}

std::string_view to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::unreachable_departure: return "unreachable_departure";
    case FaultKind::unreachable_loss: return "unreachable_loss";
    case FaultKind::over_capacity: return "over_capacity";
    case FaultKind::unroutable_rank: return "unroutable_rank";
    case FaultKind::source_locality: return "source_locality";
    case FaultKind::group_collision: return "group_collision";
    case FaultKind::link_overcommit: return "link_overcommit";
    case FaultKind::mux_loss: return "mux_loss";
    case FaultKind::emission_mismatch: return "emission_mismatch";
    case FaultKind::rank_drift: return "rank_drift";
    case FaultKind::rank_interval: return "rank_interval";
    case FaultKind::group_capacity: return "group_capacity";
    case FaultKind::balance: return "balance";
  }
  return "?";
}

ConstructionFault::ConstructionFault(FaultKind kind, Slot t, std::optional<Packet> packet,
                                     std::string detail, std::string state_dump)
    : std::runtime_error("slot " + std::to_string(t) + ": " + std::string(to_string(kind)) +
                         ": " + detail),
      kind_(kind),
      slot_(t),
      packet_(packet),
      detail_(std::move(detail)),
      dump_(std::move(state_dump)) {}

Construction::Construction(SystemParams params, MuxKind kind, Mutation mutation)
    : params_(std::move(params)), kind_(kind), mutation_(mutation) {
  const int groups = params_.group_count;
  muxes_.reserve(static_cast<std::size_t>(kMuxesPerGroup * groups));
  for (int g = 1; g <= groups; ++g) {
    for (int k = 0; k < kMuxesPerGroup; ++k) {
      if (kind == MuxKind::behavioral) {
        muxes_.emplace_back(
            FifoMux({kLinksPerMux, params_.buffer(g), MuxTiming::registered}));
      } else {
        muxes_.emplace_back(ComposedMux(params_.buffer(g)));
      }
    }
  }
  live_.reserve(static_cast<std::size_t>(params_.capacity) + 1);
  stats_.peak_group_occupancy.assign(static_cast<std::size_t>(groups), 0);
  report_.inflow.assign(static_cast<std::size_t>(groups), 0);
  report_.sources.assign(static_cast<std::size_t>(groups), 0);
  report_.occupancies.assign(muxes_.size(), 0);
  emitted_.resize(muxes_.size());
  routed_.resize(static_cast<std::size_t>(groups));
  assigned_.resize(muxes_.size());
}

Construction Construction::build(int m, MuxKind kind, Mutation mutation) {
  return Construction(mutated_params(m, mutation), kind, mutation);
}

int Construction::mux_occupancy(int g, int k) const { return occupancy_of(mux(g, k)); }

std::vector<Packet> Construction::live_packets() const {
  std::vector<Packet> out;
  out.reserve(live_.size());
  for (const Resident& r : live_) out.push_back(r.packet);
  return out;
}

std::vector<Construction::ResidentView> Construction::residents() const {
  std::vector<ResidentView> out;
  out.reserve(live_.size());
  for (const Resident& r : live_) out.push_back({r.packet, r.group});
  return out;
}

int Construction::group_of(PacketId id) const {
  for (const Resident& r : live_) {
    if (r.packet.id == id) return r.group;
  }
  return 0;
}

std::size_t Construction::find(Priority p) const {
  auto it = std::lower_bound(live_.begin(), live_.end(), p,
                             [](const Resident& r, Priority v) { return r.packet.priority > v; });
  if (it == live_.end() || it->packet.priority != p) return live_.size();
  return static_cast<std::size_t>(it - live_.begin());
}

std::string Construction::state_dump() const {
  std::ostringstream os;
  os << "m=" << params_.m << " B=" << params_.capacity << " mode=" << to_string(kind_)
     << " mutation=" << to_string(mutation_) << " slot=" << slot_ << '\n';
  os << "live (rank:id@priority/group):";
  for (std::size_t i = 0; i < live_.size(); ++i) {
    os << ' ' << i + 1 << ':';
    write_packet(os, live_[i].packet);
    os << '/' << live_[i].group;
  }
  os << '\n';
  for (int g = 1; g <= params_.group_count; ++g) {
    const RankInterval& iv = params_.interval(g);
    os << "group " << g << " psi=[" << iv.lo << ',' << iv.hi << "] B=" << params_.buffer(g)
       << ':';
    for (int k = 0; k < kMuxesPerGroup; ++k) {
      os << ' ';
      write_mux(os, mux(g, k));
    }
    os << '\n';
  }
  return os.str();
}

void Construction::fail(FaultKind kind, std::optional<Packet> packet, std::string detail) const {
  throw ConstructionFault(kind, slot_, packet, std::move(detail), state_dump());
}

const SlotReport& Construction::step(const std::optional<Packet>& arrival, bool control) {
  ++slot_;
  const int groups = params_.group_count;
  const int q_prev = occupancy();

  report_.t = slot_;
  report_.departure.reset();
  report_.loss.reset();
  std::fill(report_.inflow.begin(), report_.inflow.end(), 0);
  std::fill(report_.sources.begin(), report_.sources.end(), 0);

  // Emission: every non-empty multiplexer puts its head on the switch.
  for (int g = 1; g <= groups; ++g) {
    for (int k = 0; k < kMuxesPerGroup; ++k) {
      const std::size_t idx = static_cast<std::size_t>(kMuxesPerGroup * (g - 1) + k);
      emitted_[idx] = next_departure_of(muxes_[idx]);
      assigned_[idx].clear();
      if (!emitted_[idx]) continue;
      const std::size_t pos = find(emitted_[idx]->priority);
      if (pos == live_.size()) fail(FaultKind::emission_mismatch, emitted_[idx], "emitted packet is not live");
      live_[pos].group = 0;
      live_[pos].source = g;
    }
  }

  if (arrival) {
    auto pos = std::lower_bound(
        live_.begin(), live_.end(), arrival->priority,
        [](const Resident& r, Priority v) { return r.packet.priority > v; });
    if (pos != live_.end() && pos->packet.priority == arrival->priority) {
      throw DuplicatePriority(arrival->priority);
    }
    live_.insert(pos, Resident{*arrival, 0, 0, 0});
  }

  // Departure and loss are decided on ranks over the whole population, but the
  // switch can only hand over packets that are on it this slot.
  bool departed = false;
  if (control && !live_.empty()) {
    const Resident& top = live_.front();
    if (top.group != 0) {
      fail(FaultKind::unreachable_departure, top.packet,
           "rank-1 packet is buffered in group " + std::to_string(top.group));
    }
    report_.departure = top.packet.id;
    live_.erase(live_.begin());
    departed = true;
  } else if (!control && arrival && q_prev == params_.capacity) {
    const Resident& bottom = live_.back();
    if (bottom.group != 0) {
      fail(FaultKind::unreachable_loss, bottom.packet,
           "rank-" + std::to_string(live_.size()) + " packet is buffered in group " +
               std::to_string(bottom.group));
    }
    report_.loss = bottom.packet.id;
    live_.pop_back();
  }
  if (occupancy() > params_.capacity) {
    fail(FaultKind::over_capacity, std::nullopt,
         std::to_string(occupancy()) + " packets remain after departure/loss");
  }

  // Routing on post-removal ranks, highest priority first.
  const int rank_offset = (mutation_ == Mutation::pre_removal_ranking && departed) ? 1 : 0;
  for (auto& bucket : routed_) bucket.clear();
  for (std::size_t i = 0; i < live_.size(); ++i) {
    if (live_[i].group != 0) continue;
    const int rank = static_cast<int>(i) + 1 + rank_offset;
    const int g = params_.group_of_rank(rank);
    if (g == 0) {
      fail(FaultKind::unroutable_rank, live_[i].packet,
           "rank " + std::to_string(rank) + " lies in no group interval");
    }
    routed_[static_cast<std::size_t>(g - 1)].push_back(i);
  }

  std::array<int, kMuxesPerGroup> load{};
  std::array<int, kMuxesPerGroup> links{};
  for (int g = 1; g <= groups; ++g) {
    const auto& members = routed_[static_cast<std::size_t>(g - 1)];
    if (members.empty()) continue;
    for (int k = 0; k < kMuxesPerGroup; ++k) {
      const std::size_t idx = static_cast<std::size_t>(kMuxesPerGroup * (g - 1) + k);
      load[k] = occupancy_of(muxes_[idx]) - (emitted_[idx] ? 1 : 0);
      links[k] = 0;
    }
    for (std::size_t i : members) {
      Resident& r = live_[i];
      if (r.source != 0 && std::abs(r.source - g) > 1) {
        fail(FaultKind::source_locality, r.packet,
             "entering group " + std::to_string(g) + " from group " + std::to_string(r.source));
      }
      report_.sources[static_cast<std::size_t>(g - 1)] |= SourceSet{1} << r.source;
      const int inflow = ++report_.inflow[static_cast<std::size_t>(g - 1)];
      if (inflow > kGroupLinks) {
        fail(FaultKind::group_collision, r.packet,
             std::to_string(inflow) + " packets entering group " + std::to_string(g));
      }

      int best = -1;
      for (int k = 0; k < kMuxesPerGroup; ++k) {
        if (links[k] == kLinksPerMux) continue;
        if (best < 0) {
          best = k;
          if (mutation_ == Mutation::no_balancing) break;
        } else if (load[k] < load[best]) {
          best = k;
        }
      }
      ++load[best];
      ++links[best];
      assigned_[static_cast<std::size_t>(kMuxesPerGroup * (g - 1) + best)].push_back(r.packet);
      r.group = g;
      r.source = 0;
    }
  }

  // Multiplexers advance one slot with their assigned arrivals.
  for (std::size_t idx = 0; idx < muxes_.size(); ++idx) {
    MuxStep out;
    try {
      out = step_mux(muxes_[idx], assigned_[idx]);
    } catch (const LinkOvercommit& e) {
      fail(FaultKind::link_overcommit, std::nullopt, e.what());
    }
    if (out.departure != emitted_[idx]) {
      fail(FaultKind::emission_mismatch, out.departure,
           "multiplexer " + std::to_string(idx) + " emitted a packet it did not announce");
    }
    if (!out.losses.empty()) {
      stats_.mux_losses += static_cast<std::int64_t>(out.losses.size());
      fail(FaultKind::mux_loss, out.losses.front(),
           "group " + std::to_string(static_cast<int>(idx) / kMuxesPerGroup + 1) +
               " multiplexer " + std::to_string(static_cast<int>(idx) % kMuxesPerGroup) +
               " dropped " + std::to_string(out.losses.size()) + " packet(s)");
    }
    report_.occupancies[idx] = occupancy_of(muxes_[idx]);
  }

  audit();

  ++stats_.slots;
  for (int inflow : report_.inflow) stats_.max_inflow = std::max(stats_.max_inflow, inflow);
  report_.max_inflow = stats_.max_inflow;
  return report_;
}

void Construction::audit() {
  const int groups = params_.group_count;
  std::vector<int> held(static_cast<std::size_t>(groups), 0);
  for (std::size_t i = 0; i < live_.size(); ++i) {
    Resident& r = live_[i];
    const int rank = static_cast<int>(i) + 1;
    if (r.last_rank != 0) {
      ++stats_.drift_checks;
      if (std::abs(rank - r.last_rank) > 1) {
        fail(FaultKind::rank_drift, r.packet,
             "rank moved from " + std::to_string(r.last_rank) + " to " + std::to_string(rank));
      }
    }
    r.last_rank = rank;

    ++stats_.rank_interval_checks;
    const RankInterval env = params_.drift_envelope(r.group);
    if (!env.contains(rank)) {
      fail(FaultKind::rank_interval, r.packet,
           "rank " + std::to_string(rank) + " outside [" + std::to_string(env.lo) + ',' +
               std::to_string(env.hi) + "] of group " + std::to_string(r.group));
    }
    ++held[static_cast<std::size_t>(r.group - 1)];
  }

  for (int g = 1; g <= groups; ++g) {
    const int count = held[static_cast<std::size_t>(g - 1)];
    int lo = count;
    int hi = 0;
    int sum = 0;
    for (int k = 0; k < kMuxesPerGroup; ++k) {
      const int q = report_.occupancies[static_cast<std::size_t>(kMuxesPerGroup * (g - 1) + k)];
      lo = std::min(lo, q);
      hi = std::max(hi, q);
      sum += q;
    }
    if (sum != count) {
      fail(FaultKind::emission_mismatch, std::nullopt,
           "group " + std::to_string(g) + " stores " + std::to_string(sum) + " packets, " +
               std::to_string(count) + " expected");
    }
    stats_.max_spread = std::max(stats_.max_spread, hi - lo);
    if (hi - lo > 1) {
      fail(FaultKind::balance, std::nullopt,
           "group " + std::to_string(g) + " occupancy spread " + std::to_string(hi - lo));
    }
    if (count > params_.group_capacity_bound(g)) {
      fail(FaultKind::group_capacity, std::nullopt,
           "group " + std::to_string(g) + " holds " + std::to_string(count) + " > " +
               std::to_string(params_.group_capacity_bound(g)));
    }
    int& peak = stats_.peak_group_occupancy[static_cast<std::size_t>(g - 1)];
    peak = std::max(peak, count);
  }
}

std::vector<SlotReport> Construction::run_trace(std::span<const TraceEvent> trace) {
  std::vector<SlotReport> out;
  out.reserve(trace.size());
  for (const TraceEvent& ev : trace) out.push_back(step(ev.arrival, ev.control));
  return out;
}

}  // namespace sdlpq
