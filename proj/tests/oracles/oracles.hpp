#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "cecbench/cec_core.hpp"

// Independent reference implementations used only by the test suites.
namespace oracles {

// Log-spaced grid of `points` values over [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  std::vector<double> g(points);
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) g[i] = lo * std::exp(step * static_cast<double>(i));
  return g;
}

inline double grid_argmax(const std::vector<double>& grid, const std::function<double(double)>& f) {
  double best_x = grid.front();
  double best = f(best_x);
  for (double x : grid) {
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

// Golden-section refinement around a grid argmax of a unimodal function.
inline double refine_argmax(const std::function<double(double)>& f, double lo, double hi) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  for (int i = 0; i < 200 && (b - a) > 1e-14 * b; ++i) {
    const double x1 = b - r * (b - a);
    const double x2 = a + r * (b - a);
    if (f(x1) < f(x2)) a = x1;
    else b = x2;
  }
  return 0.5 * (a + b);
}

// Two-phase cooperative relaying by exhaustive enumeration: every node fails
// phase 1 with probability p1; a failed node stays undelivered after phase 2
// with probability p12, and no node is rescued when nobody succeeded in phase 1.
inline double occupycow_bruteforce(std::size_t n, double p1, double p12) {
  double fail = 0.0;
  for (std::size_t phase1 = 0; phase1 < (1u << n); ++phase1) {
    double prob1 = 1.0;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool success = (phase1 >> i) & 1u;
      prob1 *= success ? 1.0 - p1 : p1;
      ok += success;
    }
    if (ok == 0) {
      fail += prob1;
      continue;
    }
    for (std::size_t phase2 = 0; phase2 < (1u << n); ++phase2) {
      double prob2 = 1.0;
      bool lost = false;
      bool valid = true;
      for (std::size_t i = 0; i < n; ++i) {
        const bool rescued = (phase2 >> i) & 1u;
        if ((phase1 >> i) & 1u) {
          if (rescued) valid = false;
          continue;
        }
        prob2 *= rescued ? 1.0 - p12 : p12;
        lost = lost || !rescued;
      }
      if (valid && lost) fail += prob1 * prob2;
    }
  }
  return fail;
}

// Best weighted-packing objective over every assignment of K RBs to N tasks
// (or to nobody).
inline double rb_packing_bruteforce(const std::vector<cecbench::cec::TaskProfile>& tasks, std::size_t k_rbs,
                                    double t_p) {
  const std::size_t n = tasks.size();
  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) {
    weight[i] = 1.0 / static_cast<double>(k_rbs) / (t_p / tasks[i].t_cm + t_p / tasks[i].t_cp);
  }
  std::vector<std::size_t> owner(k_rbs, 0);
  double best = 0.0;
  while (true) {
    double total = 0.0;
    for (auto o : owner) total += o == 0 ? 0.0 : weight[o - 1];
    best = std::max(best, total);
    std::size_t j = 0;
    while (j < k_rbs && ++owner[j] > n) owner[j++] = 0;
    if (j == k_rbs) break;
  }
  return best;
}

}  // namespace oracles
