#pragma once

// Brute-force reference computations for the test suites. Nothing here calls
// into the solver paths they are used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace bfbs::oracle {

/// Golden-section search for the minimizer of a convex function on [a, b].
/// `f` may return any floating type; extended precision sharpens the result.
template <class Fn>
double golden_section(const Fn& f, double a, double b, double tol = 1e-13) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  auto fc = f(c), fd = f(d);
  for (int it = 0; it < 400 && (b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double m = 0.5 * (a + b);
  // kinks (e.g. at 0) are often the exact minimizer
  if (a <= 0.0 && 0.0 <= b && f(0.0) <= f(m)) return 0.0;
  return m;
}

/// Grid scan over [lo, hi] followed by golden section around the best node.
template <class Fn>
double grid_golden_minimize(const Fn& f, double lo, double hi, int nodes = 4001) {
  const double step = (hi - lo) / (nodes - 1);
  int best = 0;
  auto fbest = f(lo);
  for (int i = 1; i < nodes; ++i) {
    const auto v = f(lo + i * step);
    if (v < fbest) {
      fbest = v;
      best = i;
    }
  }
  const double a = lo + std::max(0, best - 1) * step;
  const double b = lo + std::min(nodes - 1, best + 1) * step;
  return golden_section(f, a, b);
}

/// Cyclic coordinate descent with golden-section line minimization. Converges
/// for a smooth convex term plus a separable convex term.
inline std::vector<double> coordinate_descent(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
    double half_width, int sweeps = 400) {
  double last_move = half_width;
  for (int s = 0; s < sweeps; ++s) {
    const double w = s < 5 ? half_width : std::max(1e-8, 10.0 * last_move);
    double moved = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      auto line = [&](double t) {
        std::vector<double> y = x;
        y[k] = t;
        return f(y);
      };
      const double nk = grid_golden_minimize(line, x[k] - w, x[k] + w, 201);
      moved = std::max(moved, std::abs(nk - x[k]));
      x[k] = nk;
    }
    last_move = moved;
    if (s > 10 && moved < 1e-13) break;
  }
  return x;
}

/// Central finite difference of f along coordinate k.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x, std::size_t k, double h) {
  const double x0 = x[k];
  x[k] = x0 + h;
  const double fp = f(x);
  x[k] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

}  // namespace bfbs::oracle
