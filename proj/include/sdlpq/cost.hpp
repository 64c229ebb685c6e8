#pragma once

#include <cstdint>
#include <map>

namespace sdlpq {

/// Hardware bill for the construction with parameter m.
struct CostSheet {
  int m = 0;
  /// Side of the main crossbar, (32m-14).
  std::int64_t main_switch_size = 0;
  /// Switch side -> number of such switches inside the multiplexers.
  std::map<std::int64_t, std::int64_t> small_switches;
  std::int64_t fiber_count = 0;
  /// All switches merged into one crossbar.
  std::int64_t combined_switch_size = 0;
  std::int64_t combined_fiber_count = 0;
};

inline constexpr int kMaxCostM = 1 << 20;

/// Main crossbar, 48 3x3, 24 (j+1)x(j+1) for j = 3..m-1, 12 (m+1)x(m+1), and
/// 12(m^2-2m+3) fibers. For m < 3 the j-range is empty and coinciding sizes
/// are summed. Combined fields are filled too.
CostSheet component_cost(int m);

/// One (12m^2+56m-2)-port crossbar and 12(m^2-2m+3) fibers. The main and
/// combined switch fields both hold the merged size; no small switches.
CostSheet combined_cost(int m);

/// The bill re-derived bottom-up: every group has 12 2-to-1 multiplexers, each
/// needing M = ceil(log2(B_g + 1)) fibers and an (M+2)x(M+2) switch.
struct CostDerivation {
  CostSheet derived;
  bool small_switches_match = false;
  bool fibers_match = false;
  bool combined_matches = false;
};

CostDerivation derive_cost(int m);

/// log2(B)^2 / combined switch size, with B the queue capacity for m.
double log2_scaling_ratio(int m);

}  // namespace sdlpq
