#include "sdlpq/trace_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace sdlpq {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
T parse_number(std::string_view tok, std::size_t line, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw TraceParseError(line, std::string("bad ") + what + " '" + std::string(tok) + "'");
  }
  return value;
}

bool parse_bit(std::string_view tok, std::size_t line, const char* what) {
  if (tok == "0") return false;
  if (tok == "1") return true;
  throw TraceParseError(line, std::string(what) + " must be 0 or 1, got '" + std::string(tok) + "'");
}

}  // namespace

TraceParseError::TraceParseError(std::size_t line, const std::string& reason)
    : std::runtime_error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}

std::vector<TraceEvent> parse_trace(std::istream& in) {
  std::vector<TraceEvent> out;
  std::unordered_set<Priority> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = split_ws(line);
    if (tok.empty() || tok.front().front() == '#') continue;
    if (tok.size() != 3 && tok.size() != 5) {
      throw TraceParseError(lineno, "expected 3 or 5 fields, got " + std::to_string(tok.size()));
    }
    TraceEvent ev;
    ev.t = parse_number<Slot>(tok[0], lineno, "slot");
    const Slot want = static_cast<Slot>(out.size()) + 1;
    if (ev.t != want) {
      throw TraceParseError(lineno, "slot " + std::to_string(ev.t) + " out of sequence, expected " +
                                        std::to_string(want));
    }
    ev.control = parse_bit(tok[1], lineno, "control bit");
    const bool arrives = parse_bit(tok[2], lineno, "arrival bit");
    if (arrives != (tok.size() == 5)) {
      throw TraceParseError(lineno, arrives ? "arrival without id and priority"
                                            : "id and priority given without an arrival");
    }
    if (arrives) {
      Packet p;
      p.id = parse_number<PacketId>(tok[3], lineno, "packet id");
      p.priority = parse_number<Priority>(tok[4], lineno, "priority");
      p.birth_slot = ev.t;
      if (!seen.insert(p.priority).second) {
        throw TraceParseError(lineno, "duplicate priority " + std::to_string(p.priority));
      }
      ev.arrival = p;
    }
    out.push_back(ev);
  }
  if (in.bad()) throw std::runtime_error("read error while parsing trace");
  return out;
}

std::vector<TraceEvent> parse_trace_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace(in);
}

void write_trace(std::ostream& os, std::span<const TraceEvent> trace,
                 std::span<const std::string> comment) {
  for (const std::string& c : comment) os << "# " << c << '\n';
  for (const TraceEvent& ev : trace) {
    os << ev.t << ' ' << (ev.control ? 1 : 0) << ' ' << (ev.arrival ? 1 : 0);
    if (ev.arrival) os << ' ' << ev.arrival->id << ' ' << ev.arrival->priority;
    os << '\n';
  }
}

void write_slot_report(std::ostream& os, const SlotReport& r) {
  os << r.t << " D ";
  if (r.departure) os << *r.departure; else os << '-';
  os << " L ";
  if (r.loss) os << *r.loss; else os << '-';
  os << " G ";
  for (std::size_t g = 0; g < r.inflow.size(); ++g) {
    if (g) os << ',';
    os << r.inflow[g];
  }
  os << '\n';
}

void write_run_summary(std::ostream& os, const RunSummary& s) {
  os << "# summary\n"
     << "# slots " << s.slots << '\n'
     << "# arrivals " << s.arrivals << '\n'
     << "# departures " << s.departures << '\n'
     << "# losses " << s.losses << '\n'
     << "# final_occupancy " << s.final_occupancy << '\n'
     << "# max_inflow " << s.max_inflow << '\n'
     << "# max_spread " << s.max_spread << '\n';
}

}  // namespace sdlpq
