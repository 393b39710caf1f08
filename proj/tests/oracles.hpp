// Test-only reference computations. These re-derive expected values from the
// raw table constants and formulas without calling the library code they check.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

inline constexpr std::array<double, 12> kTable = {62.6, 119.8, 284.3, 564.3, 1048, 2610,
                                                  4450, 7907, 11328, 13664, 17838, 24463};

inline double gamma_qp(int qp) { return 1.0 / (1.0 - 0.015 * (qp - 17)); }

/// Exhaustive search over presets 1..12 for the smallest |ln target - ln v(p)|.
inline int brute_force_nearest(const std::array<double, 12>& table, double target_kpps, int qp) {
  int best = 1;
  double best_d = 1e300;
  for (int p = 1; p <= 12; ++p) {
    const double d = std::fabs(std::log(target_kpps) - std::log(table[p - 1] * gamma_qp(qp)));
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  }
  return best;
}

/// Event-by-event replay of the linear-progress pipeline with explicit
/// per-frame bookkeeping (no deque, no shared state with the library).
struct PipelineReplay {
  std::int64_t buffer;
  std::vector<double> cost;      // by frame
  std::vector<double> progress;  // by frame
  std::int64_t head = 0;
  std::int64_t tail = 0;  // one past the last admitted frame
  double consumed = 0.0;

  double complete_oldest() {
    double c = (1.0 - progress[head]) * cost[head];
    for (std::int64_t f = head + 1; f < tail; ++f) {
      const double inc = 1.0 / static_cast<double>(buffer);
      progress[f] += inc;
      c += inc * cost[f];
    }
    ++head;
    consumed += c;
    return consumed;
  }
};

}  // namespace oracle
