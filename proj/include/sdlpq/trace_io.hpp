#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sdlpq/model.hpp"
#include "sdlpq/pqueue.hpp"

namespace sdlpq {

/// Malformed trace file; line() is 1-based.
class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& reason);
  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

/// One slot per line: `<t> <c> <a> [<id> <priority>]`, id and priority present
/// iff a = 1. Lines starting with `#` are comments and blank lines are
/// ignored. Slots must be contiguous from 1 and priorities unique.
std::vector<TraceEvent> parse_trace(std::istream& in);
std::vector<TraceEvent> parse_trace_text(std::string_view text);

/// Inverse of parse_trace. `comment` lines, if any, are written first with a
/// leading `# `.
void write_trace(std::ostream& os, std::span<const TraceEvent> trace,
                 std::span<const std::string> comment = {});

/// `<t> D <id|-> L <id|-> G <inflow_1,...,inflow_{2m-1}>`.
void write_slot_report(std::ostream& os, const SlotReport& report);

struct RunSummary {
  Slot slots = 0;
  std::int64_t arrivals = 0;
  std::int64_t departures = 0;
  std::int64_t losses = 0;
  int final_occupancy = 0;
  int max_inflow = 0;
  int max_spread = 0;
};

/// Trailing `# summary` block of a simulate run.
void write_run_summary(std::ostream& os, const RunSummary& summary);

}  // namespace sdlpq
