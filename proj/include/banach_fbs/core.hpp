#pragma once

// Weighted sequence spaces: norms, signed powers and duality maps.
//
// A Signal stores coefficient values together with cell measures, so that
// both plain l^e (all weights 1) and grid-sampled L^e (weights = cell volume)
// share one representation. Dual vectors carry the measure folded into their
// values; the pairing <w, v> is therefore a plain dot product.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bfbs {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vector = std::vector<double>;

struct Signal {
  Vector values;
  double exponent = 2.0;
  Vector weights;

  Signal() = default;
  Signal(Vector v, double e, Vector w)
      : values(std::move(v)), exponent(e), weights(std::move(w)) {
    validate();
  }

  /// Signal with every cell measure equal to `weight`.
  static Signal uniform(Vector v, double e, double weight = 1.0) {
    Vector w(v.size(), weight);
    return Signal(std::move(v), e, std::move(w));
  }

  static Signal zeros_like(const Signal& s) {
    return Signal(Vector(s.size(), 0.0), s.exponent, s.weights);
  }

  /// Same measure and exponent as `s`, new values.
  static Signal with_values(const Signal& s, Vector v) {
    if (v.size() != s.size()) {
      throw DomainError("Signal: value count does not match weights");
    }
    Signal out;
    out.values = std::move(v);
    out.exponent = s.exponent;
    out.weights = s.weights;
    return out;
  }

  std::size_t size() const { return values.size(); }

  void validate() const {
    if (!(exponent > 1.0)) {
      throw DomainError("Signal: exponent must exceed 1");
    }
    if (weights.size() != values.size()) {
      throw DomainError("Signal: weights and values differ in length");
    }
    for (double w : weights) {
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw DomainError("Signal: weights must be positive and finite");
      }
    }
    for (double x : values) {
      if (!std::isfinite(x)) {
        throw DomainError("Signal: non-finite value");
      }
    }
  }
};

struct DualVector {
  Vector values;
  Vector weights;

  std::size_t size() const { return values.size(); }

  static DualVector zeros_like(const Signal& s) {
    return DualVector{Vector(s.size(), 0.0), s.weights};
  }
};

struct Exponents {
  double p = 2.0;
  double r = 2.0;
  double s = 1.0;
  double p_dual = 2.0;
  double delta = 0.1;

  static Exponents make(double p, double r, double s, double delta = 0.1) {
    Exponents e{p, r, s, p / (p - 1.0), delta};
    e.validate();
    return e;
  }

  void validate() const {
    if (!(p > 1.0 && p <= 2.0)) throw DomainError("Exponents: need 1 < p <= 2");
    if (!(r >= p)) throw DomainError("Exponents: need r >= p");
    if (!(s >= 1.0 && s <= r)) throw DomainError("Exponents: need 1 <= s <= r");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("Exponents: need 0 < delta < 1");
    if (std::abs(1.0 / p + 1.0 / p_dual - 1.0) > 1e-12) {
      throw DomainError("Exponents: p_dual inconsistent with p");
    }
  }
};

namespace detail {

// a^e for a >= 0, exact shortcuts for the common exponents
inline double abs_power(double a, double e) {
  if (e == 1.0) return a;
  if (e == 2.0) return a * a;
  if (e == 1.5) return a * std::sqrt(a);
  if (e == 0.5) return std::sqrt(a);
  if (e == 3.0) return a * a * a;
  return std::pow(a, e);
}

}  // namespace detail

/// sign(x) |x|^a, with the conventions 0^a = 0 for a > 0 and sign(x) for a = 0.
inline double signed_power(double x, double a) {
  if (!(a >= 0.0) || !std::isfinite(x)) {
    throw DomainError("signed_power: need a >= 0 and finite x");
  }
  if (x == 0.0) return 0.0;
  if (a == 0.0) return x > 0.0 ? 1.0 : -1.0;
  if (a == 1.0) return x;
  const double m = detail::abs_power(std::abs(x), a);
  return x > 0.0 ? m : -m;
}

namespace detail {

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// (sum_k w_k |v_k|^e)^(1/e), scaled by max |v_k| against overflow. Sequential
// summation keeps the result independent of any partitioning.
inline double weighted_norm(std::span<const double> v, std::span<const double> w, double e) {
  const double m = max_abs(v);
  if (m == 0.0) return 0.0;
  double acc = 0.0;
  if (e == 2.0) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double t = v[k] / m;
      acc += w[k] * t * t;
    }
    return m * std::sqrt(acc);
  }
  if (e == 1.0) {
    for (std::size_t k = 0; k < v.size(); ++k) acc += w[k] * std::abs(v[k]);
    return acc;
  }
  for (std::size_t k = 0; k < v.size(); ++k) {
    acc += w[k] * abs_power(std::abs(v[k]) / m, e);
  }
  return m * std::pow(acc, 1.0 / e);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

}  // namespace detail

inline double norm(const Signal& u, double exponent) {
  if (!(exponent >= 1.0)) throw DomainError("norm: exponent must be >= 1");
  return detail::weighted_norm(u.values, u.weights, exponent);
}

inline double norm(const Signal& u) { return norm(u, u.exponent); }

/// Norm of a dual vector in the dual of weighted l^e, e > 1.
inline double dual_norm(const DualVector& w, double space_exponent) {
  if (!(space_exponent > 1.0)) throw DomainError("dual_norm: exponent must exceed 1");
  const double e_dual = space_exponent / (space_exponent - 1.0);
  Vector density(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) density[k] = w.values[k] / w.weights[k];
  return detail::weighted_norm(density, w.weights, e_dual);
}

inline double pairing(const DualVector& w, const Signal& v) {
  if (w.size() != v.size()) throw DomainError("pairing: size mismatch");
  return detail::dot(w.values, v.values);
}

/// Gradient of ||u||_e^q / q in weighted l^e, with the measure folded into
/// the result. Returns zero at u = 0.
inline DualVector duality_map(const Signal& u, double space_exponent, double power) {
  if (!(space_exponent > 1.0) || !(power > 1.0)) {
    throw DomainError("duality_map: need space_exponent > 1 and power > 1");
  }
  DualVector out = DualVector::zeros_like(u);
  double scale = 1.0;
  if (power != space_exponent) {
    const double nrm = norm(u, space_exponent);
    if (nrm == 0.0) return out;
    scale = std::pow(nrm, power - space_exponent);
  }
  for (std::size_t k = 0; k < u.size(); ++k) {
    out.values[k] = u.weights[k] * signed_power(u.values[k], space_exponent - 1.0) * scale;
  }
  return out;
}

/// Smoothness exponent of weighted l^e: the duality map is (p-1)-Hoelder
/// with p = min(2, e).
inline double smoothness_exponent(double space_exponent) {
  return std::min(2.0, space_exponent);
}

/// Constant c(e, q) with ||j(u) - j(v)||_* <= c ||u - v||^(p-1) on the unit
/// ball, p = min(2, e). Independent of dimension and of the cell measures.
///
/// e >= 2: the Hessian of ||.||^q/q is bounded by (e-1) + |q-e| on the unit
/// ball. e < 2: componentwise |sp(a,e-1) - sp(b,e-1)| <= 2^(2-e)|a-b|^(e-1)
/// plus a term for the norm factor ||u||^(q-e).
inline double holder_unit_constant(double space_exponent, double power) {
  const double e = space_exponent;
  const double q = power;
  if (e >= 2.0) return (e - 1.0) + std::abs(q - e);
  const double base = std::pow(2.0, 2.0 - e);
  const double gamma = q - e;
  if (gamma <= 0.0) return base;
  return base + (gamma >= 1.0 ? gamma * base : 1.0);
}

/// Upper bound M with ||j(u) - j(v)||_* <= M ||u - v||^(p-1) for all
/// ||u||, ||v|| <= radius, where j = duality_map(., e, q) and p = min(2, e).
inline double holder_bound_jr(double space_exponent, double power, double radius) {
  const double p = smoothness_exponent(space_exponent);
  if (!(space_exponent > 1.0)) throw DomainError("holder_bound_jr: exponent must exceed 1");
  if (!(power >= p)) throw DomainError("holder_bound_jr: need power >= min(2, exponent)");
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw DomainError("holder_bound_jr: radius must be finite and non-negative");
  }
  const double c = holder_unit_constant(space_exponent, power);
  if (power == p) return c;
  return c * std::pow(std::max(1.0, radius), power - p);
}

}  // namespace bfbs
