#include "sdlpq/cost.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sdlpq/model.hpp"

namespace sdlpq {

namespace {

void require_m(int m) {
  if (m < 1 || m > kMaxCostM) throw std::invalid_argument("m must be >= 1, got " + std::to_string(m));
}

std::int64_t fibers(std::int64_t m) { return 12 * (m * m - 2 * m + 3); }
std::int64_t merged_switch(std::int64_t m) { return 12 * m * m + 56 * m - 2; }

int ceil_log2(std::int64_t x) {
  int e = 0;
  while ((std::int64_t{1} << e) < x) ++e;
  return e;
}

}  // namespace

CostSheet component_cost(int m) {
  require_m(m);
  CostSheet s;
  s.m = m;
  s.main_switch_size = 32 * std::int64_t{m} - 14;
  s.small_switches[3] += 48;
  for (std::int64_t j = 3; j <= m - 1; ++j) s.small_switches[j + 1] += 24;
  s.small_switches[std::int64_t{m} + 1] += 12;
  s.fiber_count = fibers(m);
  s.combined_switch_size = merged_switch(m);
  s.combined_fiber_count = s.fiber_count;
  return s;
}

CostSheet combined_cost(int m) {
  require_m(m);
  CostSheet s;
  s.m = m;
  s.combined_switch_size = merged_switch(m);
  s.combined_fiber_count = fibers(m);
  s.main_switch_size = s.combined_switch_size;
  s.fiber_count = s.combined_fiber_count;
  return s;
}

CostDerivation derive_cost(int m) {
  const SystemParams params = SystemParams::make(m);
  CostDerivation d;
  CostSheet& s = d.derived;
  s.m = m;
  s.main_switch_size = 16 * std::int64_t{params.group_count} + 2;
  for (int g = 1; g <= params.group_count; ++g) {
    const int delay_lines = ceil_log2(std::int64_t{params.buffer(g)} + 1);
    s.small_switches[delay_lines + 2] += 12;
    s.fiber_count += 12 * delay_lines;
  }
  s.combined_switch_size = s.main_switch_size;
  for (const auto& [side, count] : s.small_switches) s.combined_switch_size += side * count;
  s.combined_fiber_count = s.fiber_count;

  const CostSheet stated = component_cost(m);
  d.small_switches_match = s.small_switches == stated.small_switches;
  d.fibers_match = s.fiber_count == stated.fiber_count;
  d.combined_matches = s.combined_switch_size == stated.combined_switch_size;
  return d;
}

double log2_scaling_ratio(int m) {
  require_m(m);
  // log2(3*2^(m-1) - 2) without overflowing for large m.
  const double lb = (m - 1) + std::log2(3.0 - std::ldexp(2.0, -(m - 1)));
  return lb * lb / static_cast<double>(merged_switch(m));
}

}  // namespace sdlpq
