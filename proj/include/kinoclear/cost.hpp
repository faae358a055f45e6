#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace kinoclear {

// Costs on the lattice are fixed-point integers so that sums of edge costs
// compare exactly. One tick is kCostQuantum cost units.
using CostTicks = std::int64_t;

inline constexpr double kCostQuantum = 1e-9;
inline constexpr CostTicks kUnreachable = std::numeric_limits<CostTicks>::max();

inline CostTicks to_ticks(double cost) {
  if (!std::isfinite(cost)) return kUnreachable;
  return static_cast<CostTicks>(std::llround(cost / kCostQuantum));
}

inline double to_cost(CostTicks ticks) {
  if (ticks == kUnreachable) return std::numeric_limits<double>::infinity();
  return static_cast<double>(ticks) * kCostQuantum;
}

inline bool is_finite(CostTicks ticks) { return ticks != kUnreachable; }

// Saturating addition; unreachable absorbs.
inline CostTicks add_cost(CostTicks a, CostTicks b) {
  if (a == kUnreachable || b == kUnreachable) return kUnreachable;
  return a + b;
}

// Exact decimal rendering of a tick count ("null" for unreachable). Used for
// CSV and report output so that files are byte-stable across platforms.
inline std::string format_ticks(CostTicks ticks) {
  if (ticks == kUnreachable) return "null";
  const bool negative = ticks < 0;
  const auto mag = static_cast<std::uint64_t>(negative ? -(ticks + 1) : ticks) + (negative ? 1u : 0u);
  const std::uint64_t whole = mag / 1000000000ull;
  const std::uint64_t frac = mag % 1000000000ull;
  std::string frac_str = std::to_string(frac);
  frac_str.insert(0, 9 - frac_str.size(), '0');
  return (negative ? "-" : "") + std::to_string(whole) + "." + frac_str;
}

}  // namespace kinoclear
