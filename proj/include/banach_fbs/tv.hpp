#pragma once

// Total-variation resolvent via the Fenchel predual.
//
// The backward step
//     min_v ||v - u||_p^p / p + s (<w, v> + alpha TV(v))
// is solved through
//     min_{|z| <= s alpha, z.nu = 0}  ||div z - s w||_{p'}^{p'} / p' + <div z, u>
// by projected gradient with Armijo backtracking, followed by the recovery
// v = u + j_{p'}(div z - s w).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "banach_fbs/core.hpp"

namespace bfbs {

/// Scalar field on a uniform grid (row-major, last axis fastest).
struct GridField {
  std::vector<std::size_t> dims;
  Vector values;
  double spacing = 1.0;
  double exponent = 2.0;

  std::size_t rank() const { return dims.size(); }
  std::size_t size() const { return values.size(); }
  double cell_measure() const { return std::pow(spacing, static_cast<double>(rank())); }

  static std::size_t count(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }

  static GridField zeros(std::vector<std::size_t> dims, double spacing, double exponent) {
    GridField g{std::move(dims), {}, spacing, exponent};
    g.values.assign(count(g.dims), 0.0);
    return g;
  }

  void validate() const {
    if (dims.empty() || dims.size() > 3) throw DomainError("GridField: rank must be 1, 2 or 3");
    if (count(dims) != values.size()) throw DomainError("GridField: dims do not match values");
    if (!(spacing > 0.0)) throw DomainError("GridField: spacing must be positive");
    for (double x : values) {
      if (!std::isfinite(x)) throw DomainError("GridField: non-finite value");
    }
  }

  Signal as_signal() const { return Signal::uniform(values, exponent, cell_measure()); }

  static GridField from_signal(const Signal& s, std::vector<std::size_t> dims, double spacing) {
    GridField g{std::move(dims), s.values, spacing, s.exponent};
    g.validate();
    return g;
  }
};

/// Vector field congruent with a grid; one component array per axis.
/// `bound` is the pointwise magnitude bound when the field is a dual variable.
struct DualField {
  std::vector<Vector> components;
  double bound = std::numeric_limits<double>::infinity();

  static DualField zeros(std::size_t rank, std::size_t n) {
    return DualField{std::vector<Vector>(rank, Vector(n, 0.0)),
                     std::numeric_limits<double>::infinity()};
  }
};

namespace detail {

struct AxisWalk {
  std::size_t stride;
  std::size_t extent;
};

inline std::vector<AxisWalk> axis_walks(const std::vector<std::size_t>& dims) {
  std::vector<AxisWalk> w(dims.size());
  std::size_t stride = 1;
  for (std::size_t a = dims.size(); a-- > 0;) {
    w[a] = AxisWalk{stride, dims[a]};
    stride *= dims[a];
  }
  return w;
}

inline bool at_far_end(std::size_t i, const AxisWalk& w) {
  return (i / w.stride) % w.extent == w.extent - 1;
}

inline double field_dot(const DualField& a, const DualField& b) {
  double acc = 0.0;
  for (std::size_t c = 0; c < a.components.size(); ++c) {
    acc += dot(a.components[c], b.components[c]);
  }
  return acc;
}

}  // namespace detail

/// Forward differences / h, zero across the far boundary (Neumann).
inline DualField grad(const GridField& u) {
  const auto walks = detail::axis_walks(u.dims);
  DualField g = DualField::zeros(u.rank(), u.size());
  const double inv_h = 1.0 / u.spacing;
  for (std::size_t a = 0; a < walks.size(); ++a) {
    const std::size_t st = walks[a].stride;
    const std::size_t block = st * walks[a].extent;
    const double* v = u.values.data();
    double* ga = g.components[a].data();
    for (std::size_t b = 0; b < u.size(); b += block) {
      for (std::size_t i = b; i < b + block - st; ++i) ga[i] = (v[i + st] - v[i]) * inv_h;
    }
  }
  return g;
}

namespace detail {

// out = div z (overwrites out, which must have the grid size)
inline void div_into(const DualField& z, const std::vector<AxisWalk>& walks, double spacing,
                     Vector& out) {
  std::fill(out.begin(), out.end(), 0.0);
  const double inv_h = 1.0 / spacing;
  for (std::size_t a = 0; a < walks.size(); ++a) {
    if (walks[a].extent < 2) continue;
    const double* za = z.components[a].data();
    const std::size_t st = walks[a].stride;
    const std::size_t block = st * walks[a].extent;
    for (std::size_t b = 0; b < out.size(); b += block) {
      // first layer: no inflow from below; last layer: no outflow
      for (std::size_t i = b; i < b + st; ++i) out[i] += za[i] * inv_h;
      for (std::size_t i = b + st; i < b + block - st; ++i) out[i] += (za[i] - za[i - st]) * inv_h;
      for (std::size_t i = b + block - st; i < b + block; ++i) out[i] -= za[i - st] * inv_h;
    }
  }
}

// Zeroes the normal component on the far boundary of every axis.
inline void clear_far_boundary(DualField& z, const std::vector<AxisWalk>& walks) {
  for (std::size_t a = 0; a < walks.size(); ++a) {
    const std::size_t st = walks[a].stride;
    const std::size_t block = st * walks[a].extent;
    Vector& za = z.components[a];
    for (std::size_t b = 0; b < za.size(); b += block) {
      std::fill(za.begin() + static_cast<std::ptrdiff_t>(b + block - st),
                za.begin() + static_cast<std::ptrdiff_t>(b + block), 0.0);
    }
  }
}

inline void project_in_place(DualField& z, double bound, const std::vector<AxisWalk>& walks) {
  const std::size_t n = z.components.empty() ? 0 : z.components.front().size();
  const std::size_t rank = z.components.size();
  for (std::size_t i = 0; i < n; ++i) {
    double m2 = 0.0;
    for (std::size_t c = 0; c < rank; ++c) m2 += z.components[c][i] * z.components[c][i];
    if (m2 > bound * bound) {
      const double scale = bound > 0.0 ? bound / std::sqrt(m2) : 0.0;
      for (std::size_t c = 0; c < rank; ++c) z.components[c][i] *= scale;
    }
  }
  clear_far_boundary(z, walks);
}

}  // namespace detail

/// Negative transpose of grad: <grad u, z> = -<u, div z>.
inline GridField div(const DualField& z, const std::vector<std::size_t>& dims, double spacing,
                     double exponent = 2.0) {
  if (z.components.size() != dims.size()) throw DomainError("div: rank mismatch");
  GridField out = GridField::zeros(dims, spacing, exponent);
  for (const Vector& c : z.components) {
    if (c.size() != out.size()) throw DomainError("div: component size mismatch");
  }
  detail::div_into(z, detail::axis_walks(dims), spacing, out.values);
  return out;
}

/// Isotropic total variation: sum over cells of h^d |grad u|_2.
inline double tv_seminorm(const GridField& u) {
  const DualField g = grad(u);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double m2 = 0.0;
    for (const Vector& c : g.components) m2 += c[i] * c[i];
    acc += std::sqrt(m2);
  }
  return u.cell_measure() * acc;
}

/// Pointwise radial projection onto |z| <= bound, normal components zeroed on
/// the far boundary.
inline DualField project_dual(const DualField& z, double bound,
                              const std::vector<std::size_t>& dims) {
  if (!(bound >= 0.0)) throw DomainError("project_dual: bound must be >= 0");
  DualField out = z;
  out.bound = bound;
  detail::project_in_place(out, bound, detail::axis_walks(dims));
  return out;
}

struct PredualConfig {
  double tol = 1e-8;
  int max_iters = 2000;
  double initial_step = 0.125;  // in units of h^2
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  bool record_trace = false;
};

struct PredualResult {
  DualField z;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double projected_gradient_norm = 0.0;
  std::vector<double> trace;  // objective after each accepted step
};

namespace detail {

// grad of values into g (components already sized)
inline void grad_into(std::span<const double> v, const std::vector<AxisWalk>& walks,
                      double spacing, DualField& g) {
  const double inv_h = 1.0 / spacing;
  for (std::size_t a = 0; a < walks.size(); ++a) {
    const std::size_t st = walks[a].stride;
    const std::size_t block = st * walks[a].extent;
    double* ga = g.components[a].data();
    for (std::size_t b = 0; b < v.size(); b += block) {
      for (std::size_t i = b; i < b + block - st; ++i) ga[i] = (v[i + st] - v[i]) * inv_h;
      std::fill(ga + b + block - st, ga + b + block, 0.0);
    }
  }
}

struct PredualProblem {
  const GridField& u;
  std::span<const double> w_density;
  double s;
  double p_dual;
  std::vector<AxisWalk> walks = axis_walks(u.dims);

  // Predual energy at z; fills div z and j_{p'}(div z - s w).
  double evaluate(const DualField& z, Vector& dz, Vector& jg) const {
    dz.resize(u.size());
    jg.resize(u.size());
    div_into(z, walks, u.spacing, dz);
    double energy = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double g = dz[i] - s * w_density[i];
      energy += phi(g) + dz[i] * u.values[i];
      jg[i] = dual_map(g);
    }
    return energy;
  }

  double phi(double g) const {
    const double a = std::abs(g);
    if (p_dual == 2.0) return 0.5 * a * a;
    if (p_dual == 3.0) return a * a * a / 3.0;
    return std::pow(a, p_dual) / p_dual;
  }

  double dual_map(double g) const {
    if (p_dual == 2.0) return g;
    if (p_dual == 3.0) return g * std::abs(g);
    return signed_power(g, p_dual - 1.0);
  }

  // E(z + dz) - E(z) from div z and div dz, summed cell by cell so that
  // small changes are not lost against the size of E.
  double energy_change(const Vector& div_z, const Vector& div_step) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double d = div_step[i];
      if (d == 0.0) continue;
      const double g = div_z[i] - s * w_density[i];
      const double t = g + d;
      double dphi;
      if (p_dual == 2.0) {
        dphi = d * (g + 0.5 * d);
      } else if (p_dual == 3.0 && (g >= 0.0) == (t >= 0.0)) {
        dphi = (g + t >= 0.0 ? d : -d) * (g * g + g * t + t * t) / 3.0;
      } else if (g != 0.0 && std::abs(d) < 0.5 * std::abs(g)) {
        dphi = phi(g) * std::expm1(p_dual * std::log1p(d / g));
      } else {
        dphi = phi(t) - phi(g);
      }
      acc += dphi + d * u.values[i];
    }
    return acc;
  }

  // -grad(j_{p'}(div z - s w) + u), into g
  void gradient(const Vector& jg, Vector& scratch, DualField& g) const {
    scratch.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) scratch[i] = -(jg[i] + u.values[i]);
    grad_into(scratch, walks, u.spacing, g);
  }
};

// out = P(z - step g)
inline void step_and_project(const DualField& z, const DualField& g, double step, double bound,
                             const std::vector<AxisWalk>& walks, DualField& out) {
  for (std::size_t c = 0; c < z.components.size(); ++c) {
    const Vector& zc = z.components[c];
    const Vector& gc = g.components[c];
    Vector& oc = out.components[c];
    for (std::size_t i = 0; i < zc.size(); ++i) oc[i] = zc[i] - step * gc[i];
  }
  project_in_place(out, bound, walks);
}

inline double projected_gradient_norm(const DualField& z, const DualField& g, double step,
                                      double bound, const std::vector<AxisWalk>& walks,
                                      double cell, DualField& scratch) {
  step_and_project(z, g, step, bound, walks, scratch);
  double acc = 0.0;
  for (std::size_t c = 0; c < z.components.size(); ++c) {
    for (std::size_t i = 0; i < z.components[c].size(); ++i) {
      const double d = (z.components[c][i] - scratch.components[c][i]) / step;
      acc += d * d;
    }
  }
  return std::sqrt(cell * acc);
}

}  // namespace detail

/// Projected gradient with Armijo backtracking on the TV predual energy.
/// `w_density` is w divided by the cell measure. Starts from `warm` if given.
inline PredualResult solve_predual(const GridField& u, std::span<const double> w_density,
                                   double s, double alpha, double p_dual,
                                   const PredualConfig& cfg, const DualField* warm = nullptr) {
  if (!(s > 0.0) || !(alpha >= 0.0)) throw DomainError("solve_predual: need s > 0, alpha >= 0");
  if (!(p_dual >= 2.0)) throw DomainError("solve_predual: need p' >= 2");
  if (w_density.size() != u.size()) throw DomainError("solve_predual: size mismatch");
  const double bound = s * alpha;
  const detail::PredualProblem prob{u, w_density, s, p_dual};
  const auto& walks = prob.walks;
  const double h2 = u.spacing * u.spacing;
  const double base_step = cfg.initial_step * h2;
  const double cell = u.cell_measure();

  PredualResult res;
  res.z = warm != nullptr && warm->components.size() == u.rank()
              ? project_dual(*warm, bound, u.dims)
              : project_dual(DualField::zeros(u.rank(), u.size()), bound, u.dims);
  const DualField blank = DualField::zeros(u.rank(), u.size());
  DualField g = blank, prev_z = blank, prev_g = blank, trial = blank, move = blank;
  Vector dz, jg, div_move(u.size()), scratch;
  double energy = prob.evaluate(res.z, dz, jg);
  double step = base_step;
  prob.gradient(jg, scratch, g);
  for (res.iterations = 0; res.iterations < cfg.max_iters; ++res.iterations) {
    res.projected_gradient_norm =
        detail::projected_gradient_norm(res.z, g, base_step, bound, walks, cell, trial);
    if (res.projected_gradient_norm <= cfg.tol) {
      res.converged = true;
      break;
    }
    if (res.iterations > 0) {
      // Barzilai-Borwein trial step from the last accepted move
      double ss = 0.0, sy = 0.0;
      for (std::size_t c = 0; c < g.components.size(); ++c) {
        for (std::size_t i = 0; i < g.components[c].size(); ++i) {
          const double dzc = res.z.components[c][i] - prev_z.components[c][i];
          ss += dzc * dzc;
          sy += dzc * (g.components[c][i] - prev_g.components[c][i]);
        }
      }
      step = sy > 0.0 ? ss / sy : 2.0 * step;
      step = std::clamp(step, 1e-3 * base_step, 1e6 * base_step);
    }
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      detail::step_and_project(res.z, g, step, bound, walks, trial);
      // Armijo rule along the projection arc
      double moved2 = 0.0;
      for (std::size_t c = 0; c < move.components.size(); ++c) {
        for (std::size_t i = 0; i < move.components[c].size(); ++i) {
          const double d = trial.components[c][i] - res.z.components[c][i];
          move.components[c][i] = d;
          moved2 += d * d;
        }
      }
      detail::div_into(move, walks, u.spacing, div_move);
      const double change = prob.energy_change(dz, div_move);
      if (moved2 > 0.0 && change <= -cfg.sufficient_decrease * moved2 / step) {
        std::swap(prev_z, res.z);
        std::swap(res.z, trial);
        std::swap(prev_g, g);
        prob.evaluate(res.z, dz, jg);
        prob.gradient(jg, scratch, g);
        energy += change;
        accepted = true;
        break;
      }
      step *= cfg.shrink;
    }
    if (!accepted) break;  // no representable decrease left
    if (cfg.record_trace) res.trace.push_back(energy);
  }
  res.z.bound = bound;
  res.objective = prob.evaluate(res.z, dz, jg);
  return res;
}

/// v = u + j_{p'}(div z - s w)
inline GridField recover_primal(const GridField& u, std::span<const double> w_density, double s,
                                const DualField& z, double p_dual) {
  const GridField dz = div(z, u.dims, u.spacing);
  GridField v = u;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double g = dz.values[i] - s * w_density[i];
    v.values[i] += p_dual == 2.0 ? g : signed_power(g, p_dual - 1.0);
  }
  return v;
}

/// ||v - u||_p^p / p + s (<w, v> + alpha TV(v)); w carries the cell measure.
inline double tv_aux_objective(const GridField& v, const GridField& u, const DualVector& w,
                               double s, double alpha, double p) {
  const double cell = u.cell_measure();
  double fit = 0.0;
  double lin = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    fit += cell * std::pow(std::abs(v.values[i] - u.values[i]), p);
    lin += w.values[i] * v.values[i];
  }
  return fit / p + s * (lin + alpha * tv_seminorm(v));
}

struct TvStepResult {
  GridField v;
  PredualResult predual;
  double aux_at_u = 0.0;
  double aux_at_v = 0.0;
};

/// TV resolvent: predual solve plus primal recovery. The aux exponent equals
/// the ambient exponent, p = exps.p, so that p' = exps.p_dual.
inline TvStepResult tv_backward_step(const GridField& u, const DualVector& w, double tau,
                                     double alpha, const Exponents& exps,
                                     const PredualConfig& cfg, const DualField* warm = nullptr) {
  TvStepResult out;
  out.v = u;
  if (tau == 0.0) return out;
  if (!(tau > 0.0)) throw DomainError("tv_backward_step: tau must be >= 0");
  if (w.size() != u.size()) throw DomainError("tv_backward_step: size mismatch");
  const double cell = u.cell_measure();
  Vector w_density(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) w_density[i] = w.values[i] / cell;

  out.aux_at_u = tv_aux_objective(u, u, w, tau, alpha, exps.p);
  PredualConfig local = cfg;
  const DualField* start = warm;
  for (int round = 0; round < 4; ++round) {
    out.predual = solve_predual(u, w_density, tau, alpha, exps.p_dual, local, start);
    GridField v = recover_primal(u, w_density, tau, out.predual.z, exps.p_dual);
    const double aux_v = tv_aux_objective(v, u, w, tau, alpha, exps.p);
    if (aux_v <= out.aux_at_u) {
      out.v = std::move(v);
      out.aux_at_v = aux_v;
      return out;
    }
    // inexact predual: keep iterating from where we stopped, tighter
    local.tol *= 1e-2;
    start = &out.predual.z;
  }
  out.v = u;
  out.aux_at_v = out.aux_at_u;
  return out;
}

}  // namespace bfbs
