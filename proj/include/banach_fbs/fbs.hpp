#pragma once

// Forward-backward splitting in weighted l^r / L^p spaces.
//
// Minimizes F(u) + Phi(u) with F(u) = ||Ku - f||^r / r and Phi either a
// weighted power penalty or alpha TV(u). Each step computes w = F'(u) and
// solves the auxiliary problem
//     min_v ||v - u||^p / p + tau (<w, v> + Phi(v)).
// Step sizes obey tau <= p (1 - delta) / L with L the Hoelder constant of F'
// on the working ball; backtracking enforces the descent estimate
//     (F + Phi)(u_next) <= (F + Phi)(u) - (1 - tau L / p) D(u).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "banach_fbs/core.hpp"
#include "banach_fbs/operators.hpp"
#include "banach_fbs/threshold.hpp"
#include "banach_fbs/tv.hpp"

namespace bfbs {

enum class PenaltyKind { weighted_power, total_variation };

struct ProblemSpec {
  LinearOperator K;
  Signal f;  // f.exponent is the data-space exponent
  Exponents exps;
  Vector alpha;  // one weight per coefficient, or a single entry for TV
  PenaltyKind penalty = PenaltyKind::weighted_power;
  std::vector<std::size_t> grid_dims;  // TV only
  double spacing = 1.0;                // TV only
  PredualConfig predual;               // TV only

  double data_exponent() const { return f.exponent; }

  double alpha_min() const { return *std::min_element(alpha.begin(), alpha.end()); }

  void validate() const {
    exps.validate();
    f.validate();
    if (f.size() != K.range_size()) throw DomainError("ProblemSpec: data size != range size");
    if (alpha.empty()) throw DomainError("ProblemSpec: missing penalty weights");
    for (double a : alpha) {
      if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("ProblemSpec: bad penalty weight");
    }
    if (penalty == PenaltyKind::weighted_power) {
      if (alpha.size() != K.domain_size()) {
        throw DomainError("ProblemSpec: need one penalty weight per coefficient");
      }
    } else {
      if (alpha.size() != 1) throw DomainError("ProblemSpec: TV takes a scalar alpha");
      if (GridField::count(grid_dims) != K.domain_size()) {
        throw DomainError("ProblemSpec: grid dims do not match the operator");
      }
      if (exps.r != exps.p) throw DomainError("ProblemSpec: TV requires r = p");
    }
    if (exps.p > smoothness_exponent(data_exponent())) {
      throw DomainError("ProblemSpec: p exceeds the smoothness of the data space");
    }
  }

  Signal zero_iterate() const {
    return Signal(Vector(K.domain_size(), 0.0), exps.r, K.domain_weights());
  }
};

inline Signal residual(const Signal& u, const ProblemSpec& prob) {
  Signal ku = prob.K.apply(u, prob.data_exponent());
  for (std::size_t i = 0; i < ku.size(); ++i) ku.values[i] -= prob.f.values[i];
  return ku;
}

inline double data_fit(const Signal& u, const ProblemSpec& prob) {
  return std::pow(norm(residual(u, prob)), prob.exps.r) / prob.exps.r;
}

inline double penalty_value(const Signal& u, const ProblemSpec& prob) {
  if (prob.penalty == PenaltyKind::total_variation) {
    const GridField g{prob.grid_dims, u.values, prob.spacing, u.exponent};
    return prob.alpha[0] * tv_seminorm(g);
  }
  double acc = 0.0;
  const double s = prob.exps.s;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double a = std::abs(u.values[k]);
    acc += prob.alpha[k] * u.weights[k] * detail::abs_power(a, s);
  }
  return acc / s;
}

inline double objective(const Signal& u, const ProblemSpec& prob) {
  return data_fit(u, prob) + penalty_value(u, prob);
}

namespace detail {

// (|x + d|^e - |x|^e) / e, accurate when d is small against x
inline double power_change(double x, double d, double e) {
  if (d == 0.0) return 0.0;
  if (e == 2.0) return d * (x + 0.5 * d);
  const double y = x + d;
  if ((e == 1.0 || e == 1.5) && (x > 0.0) == (y > 0.0) && x != 0.0 && y != 0.0) {
    const double diff = x > 0.0 ? d : -d;  // |y| - |x|
    if (e == 1.0) return diff;
    const double a = std::abs(y), b = std::abs(x);
    return diff * (a * a + a * b + b * b) / (a * std::sqrt(a) + b * std::sqrt(b)) / 1.5;
  }
  if (x != 0.0 && std::abs(d) < 0.5 * std::abs(x)) {
    return detail::abs_power(std::abs(x), e) / e * std::expm1(e * std::log1p(d / x));
  }
  return (detail::abs_power(std::abs(x + d), e) - detail::abs_power(std::abs(x), e)) / e;
}

}  // namespace detail

/// Phi(v) - Phi(u), summed term by term.
inline double penalty_change(const Signal& u, const Signal& v, const ProblemSpec& prob) {
  if (prob.penalty == PenaltyKind::total_variation) {
    const GridField gu{prob.grid_dims, u.values, prob.spacing, u.exponent};
    GridField gd = gu;
    for (std::size_t i = 0; i < gd.size(); ++i) gd.values[i] = v.values[i] - u.values[i];
    const DualField a = grad(gu);
    const DualField d = grad(gd);
    double acc = 0.0;
    for (std::size_t i = 0; i < gu.size(); ++i) {
      double mu2 = 0.0, mv2 = 0.0, diff2 = 0.0;  // |grad v|^2 - |grad u|^2
      for (std::size_t c = 0; c < a.components.size(); ++c) {
        const double x = a.components[c][i];
        const double y = d.components[c][i];
        mu2 += x * x;
        mv2 += (x + y) * (x + y);
        diff2 += y * (2.0 * x + y);
      }
      const double den = std::sqrt(mu2) + std::sqrt(mv2);
      if (den > 0.0) acc += diff2 / den;
    }
    return prob.alpha[0] * gu.cell_measure() * acc;
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    acc += prob.alpha[k] * u.weights[k] *
           detail::power_change(u.values[k], v.values[k] - u.values[k], prob.exps.s);
  }
  return acc;
}

/// F(v) - F(u) without forming either value.
inline double data_fit_change(const Signal& u, const Signal& v, const ProblemSpec& prob) {
  const Signal ru = residual(u, prob);
  Vector step(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) step[k] = v.values[k] - u.values[k];
  const Vector kd = prob.K.apply(step);
  const double q = prob.data_exponent();
  const double e = prob.exps.r;
  double su = 0.0, ds = 0.0;  // sum h |r|^q and its change
  for (std::size_t i = 0; i < ru.size(); ++i) {
    const double hw = ru.weights[i];
    su += hw * detail::abs_power(std::abs(ru.values[i]), q);
    ds += hw * q * detail::power_change(ru.values[i], kd[i], q);
  }
  double dF;
  if (e == q) {
    dF = ds / q;
  } else if (su > 0.0 && std::abs(ds) < 0.5 * su) {
    dF = std::pow(su, e / q) / e * std::expm1((e / q) * std::log1p(ds / su));
  } else {
    dF = (std::pow(std::max(su + ds, 0.0), e / q) - std::pow(su, e / q)) / e;
  }
  return dF;
}

/// (F + Phi)(v) - (F + Phi)(u), free of the cancellation in a difference of
/// two objective values.
inline double objective_change(const Signal& u, const Signal& v, const ProblemSpec& prob) {
  return data_fit_change(u, v, prob) + penalty_change(u, v, prob);
}

/// F'(u) = K* j_r(Ku - f)
inline DualVector gradient_F(const Signal& u, const ProblemSpec& prob) {
  const Signal res = residual(u, prob);
  return prob.K.adjoint_apply(duality_map(res, prob.data_exponent(), prob.exps.r));
}

struct BallAndConstant {
  double radius = 0.0;           // bound on ||u||_r over the level set
  double residual_radius = 0.0;  // bound on ||Ku - f|| over the level set
  double holder_constant = 0.0;
};

/// Norm bound over {F + Phi <= (F + Phi)(u0)} and the matching Hoelder
/// constant of F' (chain ||F'||_{p-1} <= ||j_r||_{p-1} ||K||^p).
inline BallAndConstant initial_ball_and_constant(const ProblemSpec& prob, const Signal& u0) {
  const double phi0 = penalty_value(u0, prob);
  if (!std::isfinite(phi0)) throw DomainError("initial_ball_and_constant: Phi(u0) is infinite");
  const double level = data_fit(u0, prob) + phi0;
  const Exponents& e = prob.exps;
  BallAndConstant out;
  const double k_norm = norm_bound_estimate(prob.K, e.r, prob.data_exponent());
  const double f_norm = norm(prob.f);

  // F(u) <= level bounds the residual directly.
  out.residual_radius = std::pow(e.r * level, 1.0 / e.r);
  out.radius = std::numeric_limits<double>::infinity();
  if (prob.penalty == PenaltyKind::weighted_power && prob.alpha_min() > 0.0) {
    // alpha_min ||u||_s^s / s <= Phi(u) <= level, then l^s -> l^r on the weights.
    const double w_min = *std::min_element(u0.weights.begin(), u0.weights.end());
    const double norm_s = std::pow(e.s * level / prob.alpha_min(), 1.0 / e.s);
    out.radius = std::pow(w_min, 1.0 / e.r - 1.0 / e.s) * norm_s;
    out.residual_radius = std::min(out.residual_radius, k_norm * out.radius + f_norm);
  }

  const double pj = smoothness_exponent(prob.data_exponent());
  double c = holder_bound_jr(prob.data_exponent(), e.r, out.residual_radius);
  if (e.p < pj) c *= std::pow(std::max(2.0 * out.residual_radius, 1e-300), pj - e.p);
  out.holder_constant = c * std::pow(k_norm, e.p);
  return out;
}

struct StepPolicy {
  double holder_constant = 1.0;
  double delta = 0.1;
  double tau_floor = 0.0;
  bool backtracking = true;
  double shrink_factor = 0.5;
  int max_shrinks = 30;
  double grow_factor = 1.0;  // < 1: lower the constant after each step accepted without shrinking
};

/// Largest admissible step p (1 - delta) / L.
inline double propose_tau(const StepPolicy& policy, const Exponents& exps) {
  if (!(policy.holder_constant > 0.0)) throw DomainError("propose_tau: constant must be positive");
  const double cap = exps.p * (1.0 - policy.delta) / policy.holder_constant;
  if (policy.tau_floor > cap) throw DomainError("propose_tau: tau_floor exceeds the step cap");
  return cap;
}

/// Policy from the level set of u0; tau_floor = 1e-6 of the initial cap.
inline StepPolicy make_step_policy(const ProblemSpec& prob, const Signal& u0) {
  StepPolicy pol;
  pol.delta = prob.exps.delta;
  pol.holder_constant = initial_ball_and_constant(prob, u0).holder_constant;
  if (!(pol.holder_constant > 0.0)) pol.holder_constant = 1.0;  // f = 0, K = 0 etc.
  pol.tau_floor = 1e-6 * propose_tau(pol, prob.exps);
  return pol;
}

/// D(u) = Phi(u) - Phi(u_next) + <w, u - u_next>
inline double descent_measure_D(const Signal& u, const Signal& u_next, const DualVector& w,
                                const ProblemSpec& prob) {
  double lin = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    lin += w.values[k] * (u.values[k] - u_next.values[k]);
  }
  return lin - penalty_change(u, u_next, prob);
}

inline double distance(const Signal& a, const Signal& b, double exponent) {
  Signal d = Signal::zeros_like(a);
  for (std::size_t k = 0; k < a.size(); ++k) d.values[k] = a.values[k] - b.values[k];
  return norm(d, exponent);
}

/// Per-run state carried between steps (warm starts for the TV predual).
struct StepWorkspace {
  std::optional<DualField> dual;
  double last_D = std::numeric_limits<double>::infinity();
};

struct StepDiagnostics {
  DualVector w;
  double tau = 0.0;
  double D = 0.0;
  double objective_before = 0.0;
  double objective_after = 0.0;
  double step_norm = 0.0;
  int shrinks = 0;
  double z = 1.0;  // coupling factor (weighted power penalty)
  bool dual_feasible = true;
};

struct StepResult {
  Signal u_next;
  StepDiagnostics diag;
};

namespace detail {

inline bool dual_is_feasible(const DualField& z, const std::vector<std::size_t>& dims) {
  const auto walks = axis_walks(dims);
  const std::size_t n = z.components.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    double m2 = 0.0;
    for (const Vector& c : z.components) m2 += c[i] * c[i];
    if (std::sqrt(m2) > z.bound + 1e-12) return false;
  }
  for (std::size_t a = 0; a < walks.size(); ++a) {
    for (std::size_t i = 0; i < n; ++i) {
      if (at_far_end(i, walks[a]) && z.components[a][i] != 0.0) return false;
    }
  }
  return true;
}

inline Signal backward_step(const Signal& u, const DualVector& w, double tau,
                            const ProblemSpec& prob, StepWorkspace& ws, StepDiagnostics& diag) {
  if (prob.penalty == PenaltyKind::weighted_power) {
    AuxSolveReport rep = solve_aux_sparse(u, w, tau, prob.alpha, prob.exps);
    diag.z = rep.z;
    return std::move(rep.v);
  }
  const GridField g{prob.grid_dims, u.values, prob.spacing, u.exponent};
  PredualConfig cfg = prob.predual;
  if (std::isfinite(ws.last_D)) cfg.tol = std::max(prob.predual.tol, 1e-3 * ws.last_D);
  const DualField* warm = ws.dual ? &*ws.dual : nullptr;
  TvStepResult tv = tv_backward_step(g, w, tau, prob.alpha[0], prob.exps, cfg, warm);
  diag.dual_feasible = dual_is_feasible(tv.predual.z, prob.grid_dims);
  ws.dual = std::move(tv.predual.z);
  return Signal::with_values(u, std::move(tv.v.values));
}

}  // namespace detail

/// One forward-backward step with optional backtracking. On a failed descent
/// test the Hoelder constant is raised by 1 / shrink_factor, which shrinks tau
/// by shrink_factor.
inline StepResult fbs_step(const Signal& u, const ProblemSpec& prob, StepPolicy& policy,
                           StepWorkspace& ws) {
  StepResult out;
  StepDiagnostics& diag = out.diag;
  diag.w = gradient_F(u, prob);
  diag.objective_before = objective(u, prob);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int attempt = 0;; ++attempt) {
    diag.tau = propose_tau(policy, prob.exps);
    out.u_next = detail::backward_step(u, diag.w, diag.tau, prob, ws, diag);
    const double dphi = penalty_change(u, out.u_next, prob);
    double lin = 0.0, lin_abs = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double t = diag.w.values[k] * (u.values[k] - out.u_next.values[k]);
      lin += t;
      lin_abs += std::abs(t);
    }
    diag.D = lin - dphi;
    const double change = data_fit_change(u, out.u_next, prob) + dphi;
    diag.objective_after = diag.objective_before + change;
    const double factor = 1.0 - diag.tau * policy.holder_constant / prob.exps.p;
    // rounding level of the two sides of the descent test
    const double slack = 64.0 * eps * (std::abs(change) + std::abs(diag.D)) + 1e-300;
    if (!policy.backtracking || change <= -factor * diag.D + slack) break;
    if (diag.D <= 64.0 * eps * (lin_abs + std::abs(dphi))) {
      // no representable descent left: stay at u
      out.u_next = u;
      diag.D = 0.0;
      diag.objective_after = diag.objective_before;
      break;
    }
    if (attempt >= policy.max_shrinks) {
      throw SolverError("fbs_step: backtracking exhausted; the Hoelder constant is far too small");
    }
    policy.holder_constant /= policy.shrink_factor;
    ++diag.shrinks;
  }
  diag.step_norm = distance(u, out.u_next, prob.exps.r);
  ws.last_D = diag.D;
  if (policy.backtracking && diag.shrinks == 0 && policy.grow_factor < 1.0) {
    policy.holder_constant *= policy.grow_factor;
  }
  return out;
}

inline StepResult fbs_step(const Signal& u, const ProblemSpec& prob, StepPolicy& policy) {
  StepWorkspace ws;
  return fbs_step(u, prob, policy, ws);
}

struct IterationRecord {
  long n = 0;
  double objective = 0.0;  // at u^n
  double D = 0.0;          // D(u^n)
  double tau = 0.0;
  double step_norm = 0.0;  // ||u^n - u^{n+1}||
  double seconds = 0.0;    // cumulative wall time
};

enum class StopStatus { converged_D, max_iters, fixed_point, objective_stalled };

inline const char* to_string(StopStatus s) {
  switch (s) {
    case StopStatus::converged_D: return "converged_D";
    case StopStatus::max_iters: return "max_iters";
    case StopStatus::fixed_point: return "fixed_point";
    case StopStatus::objective_stalled: return "objective_stalled";
  }
  return "unknown";
}

struct SolveHistory {
  std::vector<IterationRecord> records;
  StopStatus status = StopStatus::max_iters;
  double final_objective = 0.0;
  bool dual_feasible_throughout = true;  // TV only

  static constexpr const char* csv_header = "n,objective,D,tau,step_norm,seconds";

  void write_csv(std::ostream& os) const {
    os << csv_header << '\n';
    os.precision(17);
    for (const auto& r : records) {
      os << r.n << ',' << r.objective << ',' << r.D << ',' << r.tau << ',' << r.step_norm << ','
         << r.seconds << '\n';
    }
  }

  void write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_csv(os);
  }

  /// Columns are located by name; a missing column is reported by name.
  static SolveHistory read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw DomainError("history CSV: empty input");
    std::vector<std::string> cols;
    {
      std::istringstream hs(line);
      std::string c;
      while (std::getline(hs, c, ',')) {
        while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.pop_back();
        cols.push_back(c);
      }
    }
    auto find = [&](const char* name, bool required) -> long {
      auto it = std::find(cols.begin(), cols.end(), name);
      if (it == cols.end()) {
        if (required) throw DomainError(std::string("history CSV: missing column '") + name + "'");
        return -1;
      }
      return it - cols.begin();
    };
    const long cn = find("n", true);
    const long cobj = find("objective", true);
    const long cd = find("D", false);
    const long ctau = find("tau", false);
    const long cstep = find("step_norm", false);
    const long csec = find("seconds", false);

    SolveHistory h;
    long lineno = 1;
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty() || line == "\r") continue;
      std::vector<std::string> cells;
      std::istringstream ls(line);
      std::string c;
      while (std::getline(ls, c, ',')) cells.push_back(c);
      if (cells.size() != cols.size()) {
        throw DomainError("history CSV: wrong cell count on line " + std::to_string(lineno));
      }
      auto num = [&](long idx) -> double {
        if (idx < 0) return 0.0;
        try {
          std::size_t pos = 0;
          const double v = std::stod(cells[idx], &pos);
          return v;
        } catch (const std::exception&) {
          throw DomainError("history CSV: bad number in column '" + cols[idx] + "' on line " +
                            std::to_string(lineno));
        }
      };
      IterationRecord r;
      r.n = static_cast<long>(num(cn));
      r.objective = num(cobj);
      r.D = num(cd);
      r.tau = num(ctau);
      r.step_norm = num(cstep);
      r.seconds = num(csec);
      h.records.push_back(r);
    }
    return h;
  }
};

struct StopCriteria {
  long max_iters = 1000;
  double D_tol = -1.0;          // negative: 1e-12 (1 + initial objective)
  double objective_tol = -1.0;  // negative: disabled
  int readjust_every = 100;
};

struct RunResult {
  Signal u;
  SolveHistory history;
  StepPolicy policy;
};

/// Iterates from u0 until D(u^n) <= D_tol, a fixed point, stalled objective,
/// or max_iters. Every performed step is recorded.
inline RunResult fbs_run(const ProblemSpec& prob, StepPolicy policy, const StopCriteria& stop,
                         std::optional<Signal> start = std::nullopt) {
  prob.validate();
  RunResult out;
  out.u = start ? *start : prob.zero_iterate();
  const auto t0 = std::chrono::steady_clock::now();
  StepWorkspace ws;
  const double obj0 = objective(out.u, prob);
  const double d_tol = stop.D_tol >= 0.0 ? stop.D_tol : 1e-12 * (1.0 + std::abs(obj0));
  bool raised = false;
  out.history.status = StopStatus::max_iters;
  out.history.final_objective = obj0;
  for (long n = 0; n < stop.max_iters; ++n) {
    if (stop.readjust_every > 0 && n > 0 && n % stop.readjust_every == 0 && !raised) {
      const double c = initial_ball_and_constant(prob, out.u).holder_constant;
      if (c > 0.0 && c < policy.holder_constant) policy.holder_constant = c;
    }
    const double before = policy.holder_constant;
    StepResult st = fbs_step(out.u, prob, policy, ws);
    if (policy.holder_constant > before) raised = true;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.history.records.push_back(IterationRecord{n, st.diag.objective_before, st.diag.D,
                                                  st.diag.tau, st.diag.step_norm, secs});
    out.history.dual_feasible_throughout &= st.diag.dual_feasible;
    const bool same = st.u_next.values == out.u.values;
    out.u = std::move(st.u_next);
    out.history.final_objective = st.diag.objective_after;
    if (same) {
      out.history.status = StopStatus::fixed_point;
      break;
    }
    if (st.diag.D <= d_tol) {
      out.history.status = StopStatus::converged_D;
      break;
    }
    if (stop.objective_tol >= 0.0 &&
        st.diag.objective_before - st.diag.objective_after <=
            stop.objective_tol * (1.0 + std::abs(st.diag.objective_before))) {
      out.history.status = StopStatus::objective_stalled;
      break;
    }
  }
  out.policy = policy;
  return out;
}

struct BregmanTaylor {
  double R = 0.0;  // Phi(v) - Phi(u*) + <F'(u*), v - u*>
  double T = 0.0;  // F(v) - F(u*) - <F'(u*), v - u*>
};

/// Splits the objective gap at v into its non-smooth and smooth parts.
inline BregmanTaylor distances_RT(const Signal& v, const Signal& u_star, const ProblemSpec& prob) {
  const DualVector w = gradient_F(u_star, prob);
  double lin = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) lin += w.values[k] * (v.values[k] - u_star.values[k]);
  BregmanTaylor bt;
  bt.R = penalty_value(v, prob) - penalty_value(u_star, prob) + lin;
  bt.T = data_fit(v, prob) - data_fit(u_star, prob) - lin;
  return bt;
}

struct RateFit {
  double C = 0.0;      // max_{n > burn_in} r_n n^(p-1)
  double slope = 0.0;  // least-squares slope of log r_n against log n
};

/// r_n = objective_n - reference over records with n > burn_in.
inline RateFit rate_fit(const SolveHistory& history, double reference_objective, long burn_in,
                        double p) {
  std::vector<double> xs, ys;
  RateFit fit;
  for (const auto& rec : history.records) {
    if (rec.n <= burn_in || rec.n <= 0) continue;
    const double rn = rec.objective - reference_objective;
    if (!(rn > 0.0)) {
      throw DomainError("rate_fit: non-positive r_n at n = " + std::to_string(rec.n) +
                        "; the reference objective is not a lower bound");
    }
    const double n = static_cast<double>(rec.n);
    xs.push_back(std::log(n));
    ys.push_back(std::log(rn));
    fit.C = std::max(fit.C, rn * std::pow(n, p - 1.0));
  }
  if (xs.size() < 10) throw DomainError("rate_fit: need more than burn_in + 10 records");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  fit.slope = sxy / sxx;
  return fit;
}

}  // namespace bfbs
