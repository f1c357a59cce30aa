#pragma once

// Backward step for weighted power penalties sum_k alpha_k |v_k|^s / s.
//
// The auxiliary problem
//     min_v ||v - u||_r^p / p + tau (<w, v> + sum_k alpha_k h_k |v_k|^s / s)
// decouples into scalar problems once the factor z = ||v - u||_r^(r-p) is
// known; each scalar problem is solved by the thresholding-like resolvent
// S_{y,t}. The remaining scalar equation for z is solved by a bracketed
// iteration in log z.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "banach_fbs/core.hpp"

namespace bfbs {

struct ScalarProxParams {
  double y = 0.0;  // current coefficient
  double t = 0.0;  // effective penalty weight
  double r = 2.0;
  double s = 1.0;

  void validate() const {
    if (!(t >= 0.0) || !(r > 1.0) || !(s >= 1.0 && s <= r)) {
      throw DomainError("ScalarProxParams: need t >= 0, r > 1, 1 <= s <= r");
    }
  }
};

/// |x - y|^r / r + sigma x + t |x|^s / s
inline double psi_value(double x, const ScalarProxParams& prm, double sigma) {
  return std::pow(std::abs(x - prm.y), prm.r) / prm.r + sigma * x +
         prm.t * std::pow(std::abs(x), prm.s) / prm.s;
}

namespace detail {

// Monotone map v -> sp(v - y, r - 1) + t sp(v, s - 1) - x for s > 1.
struct ResolventEquation {
  const ScalarProxParams& prm;
  double x;

  double operator()(double v) const {
    return signed_power(v - prm.y, prm.r - 1.0) + prm.t * signed_power(v, prm.s - 1.0) - x;
  }
  double derivative(double v) const {
    const double a = std::abs(v - prm.y);
    const double b = std::abs(v);
    double d = prm.r == 2.0 ? 1.0 : (prm.r - 1.0) * std::pow(a, prm.r - 2.0);
    d += prm.s == 2.0 ? prm.t : prm.t * (prm.s - 1.0) * std::pow(b, prm.s - 2.0);
    return d;
  }
};

// Bisection until the bracket is narrower than one, Newton steps afterwards
// whenever they stay inside the bracket.
inline double solve_resolvent_equation(const ScalarProxParams& prm, double x) {
  const ResolventEquation g{prm, x};
  const double v_fit = prm.y + signed_power(x, 1.0 / (prm.r - 1.0));
  const double v_pen = signed_power(x / prm.t, 1.0 / (prm.s - 1.0));
  double lo = std::min({0.0, prm.y, v_fit, v_pen});
  double hi = std::max({0.0, prm.y, v_fit, v_pen});
  double glo = g(lo);
  double ghi = g(hi);
  for (int k = 0; k < 64 && glo > 0.0; ++k) {
    lo -= (hi - lo) + 1.0;
    glo = g(lo);
  }
  for (int k = 0; k < 64 && ghi < 0.0; ++k) {
    hi += (hi - lo) + 1.0;
    ghi = g(hi);
  }
  if (glo > 0.0 || ghi < 0.0) {
    throw SolverError("threshold_scalar: failed to bracket the resolvent root");
  }
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;

  const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  const double tol = std::max(1e-13, 4.0 * std::numeric_limits<double>::epsilon() * scale);
  double v = 0.5 * (lo + hi);
  for (int it = 0; it < 500; ++it) {
    const double gv = g(v);
    if (gv == 0.0) return v;
    if (gv < 0.0) {
      lo = v;
    } else {
      hi = v;
    }
    if (hi - lo <= tol) return 0.5 * (lo + hi);
    if (hi - lo < 1.0) {
      const double d = g.derivative(v);
      const double vn = v - gv / d;
      if (std::isfinite(vn) && vn > lo && vn < hi) {
        const double step = std::abs(vn - v);
        v = vn;
        if (step <= tol) return v;
        continue;
      }
    }
    v = 0.5 * (lo + hi);
  }
  return v;
}

}  // namespace detail

/// S_{y,t}(x): the minimizer of |v - y|^r / r + t |v|^s / s - x v.
inline double threshold_scalar(double x, const ScalarProxParams& prm) {
  prm.validate();
  if (!std::isfinite(x)) throw DomainError("threshold_scalar: non-finite argument");
  const double inv = 1.0 / (prm.r - 1.0);
  if (prm.t == 0.0) return prm.y + signed_power(x, inv);
  if (prm.s == 1.0) {
    // Dead zone: 0 is optimal iff x - sp(-y, r-1) lies in [-t, t].
    const double center = signed_power(-prm.y, prm.r - 1.0);
    if (std::abs(x - center) <= prm.t) return 0.0;
    const double shifted = x > center ? x - prm.t : x + prm.t;
    return prm.y + signed_power(shifted, inv);
  }
  return detail::solve_resolvent_equation(prm, x);
}

struct AuxSolveOptions {
  int max_outer = 200;
  double rel_tol = 1e-11;
};

struct AuxSolveReport {
  Signal v;
  double z = 1.0;
  int z_iterations = 0;
  double residual = 0.0;
};

namespace detail {

inline void apply_componentwise_resolvent(const Signal& u, const DualVector& w, double tau,
                                          std::span<const double> alpha, const Exponents& exps,
                                          double z, Vector& out) {
  out.resize(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const ScalarProxParams prm{u.values[k], z * tau * alpha[k], exps.r, exps.s};
    out[k] = threshold_scalar(-z * tau * w.values[k] / u.weights[k], prm);
  }
}

}  // namespace detail

/// Minimizes ||v - u||_r^p / p + tau (<w, v> + sum_k alpha_k h_k |v_k|^s / s)
/// where h are the cell measures of u.
///
/// The returned z satisfies z = ||v - u||_r^(r-p); z = 1 exactly when r = p.
/// If u itself is optimal (v = u), the coupling degenerates and z = 0.
inline AuxSolveReport solve_aux_sparse(const Signal& u, const DualVector& w, double tau,
                                       std::span<const double> alpha, const Exponents& exps,
                                       const AuxSolveOptions& opts = {}) {
  if (!(tau > 0.0)) throw DomainError("solve_aux_sparse: tau must be positive");
  if (w.size() != u.size() || alpha.size() != u.size()) {
    throw DomainError("solve_aux_sparse: size mismatch");
  }
  for (double a : alpha) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw DomainError("solve_aux_sparse: penalty weights must be finite and non-negative");
    }
  }

  AuxSolveReport rep;
  Vector v;
  if (exps.r == exps.p) {
    detail::apply_componentwise_resolvent(u, w, tau, alpha, exps, 1.0, v);
    rep.v = Signal::with_values(u, std::move(v));
    rep.z = 1.0;
    return rep;
  }

  const double gap = exps.r - exps.p;
  Signal diff = Signal::zeros_like(u);
  // log(phi(z)) - log(z) with phi(z) = ||V(z) - u||^(r-p)
  auto evaluate = [&](double log_z, double& phi) {
    const double z = std::exp(log_z);
    detail::apply_componentwise_resolvent(u, w, tau, alpha, exps, z, v);
    for (std::size_t k = 0; k < u.size(); ++k) diff.values[k] = v[k] - u.values[k];
    phi = std::pow(norm(diff, exps.r), gap);
    ++rep.z_iterations;
    return std::log(phi) - log_z;
  };

  double phi = 0.0;
  double h0 = evaluate(0.0, phi);
  if (phi == 0.0) {
    // u solves the auxiliary problem for every z > 0.
    rep.v = u;
    rep.z = 0.0;
    rep.residual = 0.0;
    return rep;
  }

  double best_z = 1.0;
  double best_res = std::abs(phi - 1.0);
  auto converged = [&](double log_z, double phi_val) {
    const double z = std::exp(log_z);
    const double res = std::abs(phi_val - z) / z;
    if (res < best_res) {
      best_res = res;
      best_z = z;
    }
    return res <= opts.rel_tol;
  };
  if (converged(0.0, phi)) {
    rep.v = Signal::with_values(u, v);
    rep.z = 1.0;
    rep.residual = best_res;
    return rep;
  }

  // phi(z) ~ z^((r-p)/(r-1)) near 0 and sublinear growth at infinity give
  // h > 0 for small z and h < 0 for large z.
  double a = 0.0, ha = h0;
  double b = 0.0, hb = h0;
  double step = 1.0;
  for (int k = 0; k < 200; ++k) {
    if (ha > 0.0 && hb > 0.0) {
      b += step;
      hb = evaluate(b, phi);
      if (converged(b, phi)) {
        rep.v = Signal::with_values(u, v);
        rep.z = std::exp(b);
        rep.residual = best_res;
        return rep;
      }
    } else if (ha < 0.0 && hb < 0.0) {
      a -= step;
      ha = evaluate(a, phi);
      if (converged(a, phi)) {
        rep.v = Signal::with_values(u, v);
        rep.z = std::exp(a);
        rep.residual = best_res;
        return rep;
      }
    } else {
      break;
    }
    step *= 2.0;
  }
  if (!(ha > 0.0 && hb < 0.0)) {
    throw SolverError("solve_aux_sparse: could not bracket the coupling factor");
  }

  // Illinois false position; plain bisection when an endpoint is infinite.
  int side = 0;
  for (int it = 0; it < opts.max_outer; ++it) {
    double c;
    if (std::isfinite(ha) && std::isfinite(hb)) {
      c = b - hb * (b - a) / (hb - ha);
      if (!(c > a && c < b)) c = 0.5 * (a + b);
    } else {
      c = 0.5 * (a + b);
    }
    const double hc = evaluate(c, phi);
    if (converged(c, phi) || hc == 0.0) {
      rep.v = Signal::with_values(u, v);
      rep.z = std::exp(c);
      rep.residual = std::abs(phi - rep.z) / rep.z;
      return rep;
    }
    if (hc > 0.0) {
      a = c;
      ha = hc;
      if (side == 1) hb *= 0.5;
      side = 1;
    } else {
      b = c;
      hb = hc;
      if (side == -1) ha *= 0.5;
      side = -1;
    }
    if (b - a <= 1e-15 * std::max(1.0, std::abs(a))) break;
  }
  throw SolverError("solve_aux_sparse: coupling factor did not converge, best residual " +
                    std::to_string(best_res) + " at z = " + std::to_string(best_z));
}

}  // namespace bfbs
