#pragma once

// Experiment harness behind the command-line tool: config files, synthetic
// data, noise, solver orchestration and output files.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "banach_fbs/fbs.hpp"
#include "banach_fbs/grid_io.hpp"

namespace bfbs::cli {

namespace fs = std::filesystem;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` file; `#` starts a comment.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "<config>") {
    Config c;
    c.source_ = source;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string t = trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
      }
      const std::string key = trim(t.substr(0, eq));
      const std::string value = trim(t.substr(eq + 1));
      if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
      if (c.values_.count(key)) {
        throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
      }
      c.values_[key] = value;
    }
    return c;
  }

  static Config load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse(in, path.string());
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::string& source() const { return source_; }

  std::string str(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double num(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(key, it->second);
  }

  long integer(const std::string& key, long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const double v = to_double(key, it->second);
    if (v != std::floor(v)) throw ConfigError(where(key) + " must be an integer");
    return static_cast<long>(v);
  }

  std::vector<double> nums(const std::string& key, std::vector<double> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::string item;
    std::istringstream ss(it->second);
    while (ss >> item) {
      if (item.back() == ',') item.pop_back();
      if (!item.empty()) out.push_back(to_double(key, item));
    }
    if (out.empty()) throw ConfigError(where(key) + " is empty");
    return out;
  }

  /// Rejects keys outside `known`, which catches misspelled settings.
  void expect_only(const std::set<std::string>& known) const {
    for (const auto& [key, value] : values_) {
      if (!known.count(key)) throw ConfigError(source_ + ": unknown key '" + key + "'");
    }
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::string where(const std::string& key) const { return source_ + ": '" + key + "'"; }

  double to_double(const std::string& key, const std::string& text) const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(text, &pos);
      if (pos != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(where(key) + " is not a number: '" + text + "'");
    }
  }

  std::map<std::string, std::string> values_;
  std::string source_;
};

/// Config seed, overridden by BANACH_FBS_SEED when set.
inline std::uint64_t resolve_seed(const Config& c, std::uint64_t fallback = 1) {
  if (const char* env = std::getenv("BANACH_FBS_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(env, &pos);
      if (pos != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(std::string("BANACH_FBS_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  const long s = c.integer("seed", static_cast<long>(fallback));
  if (s < 0) throw ConfigError(c.source() + ": 'seed' must be non-negative");
  return static_cast<std::uint64_t>(s);
}

inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

/// Shortest round-trip text for a double (used in file and directory names).
inline std::string format_number(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

/// Two whitespace-separated columns, no header.
inline void write_table(const fs::path& path, const Vector& x, const Vector& y) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  for (std::size_t i = 0; i < x.size(); ++i) out << x[i] << ' ' << y[i] << '\n';
}

inline std::pair<Vector, Vector> read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::pair<Vector, Vector> t;
  double a, b;
  while (in >> a >> b) {
    t.first.push_back(a);
    t.second.push_back(b);
  }
  return t;
}

inline std::size_t count_nonzero(const Vector& v, double threshold = 1e-12) {
  return static_cast<std::size_t>(
      std::count_if(v.begin(), v.end(), [threshold](double x) { return std::abs(x) > threshold; }));
}

/// Gaussian vector rescaled to the given weighted l^p norm.
inline Vector scaled_noise(const Vector& unit, const Vector& weights, double p, double target) {
  const double n = norm(Signal(unit, p, weights), p);
  Vector out(unit.size());
  for (std::size_t i = 0; i < unit.size(); ++i) out[i] = n > 0.0 ? unit[i] * (target / n) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// sparse-demo

struct SparseDemoConfig {
  std::size_t N = 500;
  std::vector<double> p_values{1.5, 2.0};
  double r = 0.0;  // <= 0: r = p
  double s = 1.0;
  int spikes = 9;
  double amp_min = -10.0;
  double amp_max = 25.0;
  double data_error = 0.005;
  double target_discrepancy = 0.0047;  // <= 0: use `alpha` as given
  std::vector<double> alpha{1e-3};  // one value, or one per p
  double alpha_lo = 1e-8;
  double alpha_hi = 1.0;
  int bisect_iters = 30;
  double bisect_rel_tol = 2e-3;
  long max_iters = 20000;
  double D_tol = -1.0;
  double step_growth = 1.0;
  std::uint64_t seed = 1;
  fs::path output_dir = "sparse-out";

  double r_for(double p) const { return r > 0.0 ? r : p; }

  double alpha_for(std::size_t job) const { return alpha.size() == 1 ? alpha[0] : alpha[job]; }

  static SparseDemoConfig from(const Config& c) {
    c.expect_only({"kind", "N", "p", "r", "s", "spikes", "amp_min", "amp_max", "data_error",
                   "target_discrepancy", "alpha", "alpha_lo", "alpha_hi", "bisect_iters",
                   "bisect_rel_tol", "max_iters", "D_tol", "step_growth", "seed",
                   "output_dir"});
    if (c.str("kind", "sparse-integration") != "sparse-integration") {
      throw ConfigError(c.source() + ": sparse-demo needs kind = sparse-integration");
    }
    SparseDemoConfig d;
    const long n = c.integer("N", 500);
    d.p_values = c.nums("p", d.p_values);
    d.r = c.num("r", d.r);
    d.s = c.num("s", d.s);
    d.spikes = static_cast<int>(c.integer("spikes", d.spikes));
    d.amp_min = c.num("amp_min", d.amp_min);
    d.amp_max = c.num("amp_max", d.amp_max);
    d.data_error = c.num("data_error", d.data_error);
    d.target_discrepancy = c.num("target_discrepancy", d.target_discrepancy);
    d.alpha = c.nums("alpha", d.alpha);
    d.alpha_lo = c.num("alpha_lo", d.alpha_lo);
    d.alpha_hi = c.num("alpha_hi", d.alpha_hi);
    d.bisect_iters = static_cast<int>(c.integer("bisect_iters", d.bisect_iters));
    d.bisect_rel_tol = c.num("bisect_rel_tol", d.bisect_rel_tol);
    d.max_iters = c.integer("max_iters", d.max_iters);
    d.D_tol = c.num("D_tol", d.D_tol);
    d.step_growth = c.num("step_growth", d.step_growth);
    d.seed = resolve_seed(c, d.seed);
    d.output_dir = c.str("output_dir", d.output_dir.string());

    auto fail = [&](const std::string& msg) { throw ConfigError(c.source() + ": " + msg); };
    if (n < 2) fail("N must be at least 2");
    d.N = static_cast<std::size_t>(n);
    if (d.spikes < 0 || static_cast<std::size_t>(d.spikes) > d.N) fail("spikes must lie in [0, N]");
    if (!(d.amp_min <= d.amp_max)) fail("amp_min must not exceed amp_max");
    if (!(d.data_error >= 0.0)) fail("data_error must be non-negative");
    if (d.alpha.size() != 1 && d.alpha.size() != d.p_values.size()) {
      fail("alpha needs one value or one per p");
    }
    for (double a : d.alpha) {
      if (!(a >= 0.0)) fail("alpha must be non-negative");
    }
    if (d.target_discrepancy > 0.0 && !(0.0 < d.alpha_lo && d.alpha_lo < d.alpha_hi)) {
      fail("need 0 < alpha_lo < alpha_hi");
    }
    if (d.bisect_iters < 1) fail("bisect_iters must be positive");
    if (d.max_iters < 0) fail("max_iters must be non-negative");
    if (!(d.step_growth > 0.0 && d.step_growth <= 1.0)) fail("step_growth must lie in (0, 1]");
    for (double p : d.p_values) {
      try {
        Exponents::make(p, d.r_for(p), d.s);
      } catch (const DomainError& e) {
        fail(std::string("invalid exponents: ") + e.what());
      }
    }
    return d;
  }
};

struct SparseInstance {
  LinearOperator K;
  Vector u_true;
  Vector f;           // exact data K u_true
  Vector unit_noise;  // seeded standard normal draw, rescaled per p
};

/// Spike positions are distinct and uniform; amplitudes uniform in
/// [amp_min, amp_max] with |a| >= 1 so every spike is visible.
inline SparseInstance make_sparse_instance(const SparseDemoConfig& cfg) {
  SparseInstance inst{integration_operator(cfg.N), Vector(cfg.N, 0.0), {}, Vector(cfg.N)};
  std::mt19937_64 rng = stream_rng(cfg.seed, 0);
  std::vector<std::size_t> idx(cfg.N);
  for (std::size_t i = 0; i < cfg.N; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  std::uniform_real_distribution<double> amp(cfg.amp_min, cfg.amp_max);
  const bool can_reject = cfg.amp_max >= 1.0 || cfg.amp_min <= -1.0;
  for (int k = 0; k < cfg.spikes; ++k) {
    double a = amp(rng);
    while (can_reject && std::abs(a) < 1.0) a = amp(rng);
    inst.u_true[idx[static_cast<std::size_t>(k)]] = a;
  }
  inst.f = inst.K.apply(inst.u_true);
  std::mt19937_64 nrng = stream_rng(cfg.seed, 1);
  std::normal_distribution<double> gauss;
  for (double& x : inst.unit_noise) x = gauss(nrng);
  return inst;
}

struct SparseJobResult {
  double p = 0.0;
  double alpha = 0.0;
  double discrepancy = 0.0;
  double data_error = 0.0;
  std::size_t nnz = 0;
  Vector f_delta;
  Signal u;
  Vector Ku;
  SolveHistory history;
  std::vector<std::pair<double, double>> alpha_trace;  // (alpha, discrepancy)
};

inline ProblemSpec sparse_problem(const SparseInstance& inst, const Vector& f_delta,
                                  const Exponents& exps, double alpha) {
  Signal f(f_delta, exps.p, inst.K.range_weights());
  return ProblemSpec{inst.K, std::move(f), exps,
                     Vector(inst.K.domain_size(), alpha)};
}

inline double discrepancy_of(const Signal& u, const ProblemSpec& prob) {
  return norm(residual(u, prob));
}

/// One p value. With a target discrepancy, alpha is bisected in log(alpha)
/// (the discrepancy grows with alpha); every trial solves from u = 0 and the
/// trial closest to the target is kept.
inline SparseJobResult run_sparse_job(const SparseInstance& inst, const SparseDemoConfig& cfg,
                                      std::size_t job) {
  const double p = cfg.p_values[job];
  const Exponents exps = Exponents::make(p, cfg.r_for(p), cfg.s);
  SparseJobResult out;
  out.p = p;
  const Vector noise = scaled_noise(inst.unit_noise, inst.K.range_weights(), p, cfg.data_error);
  out.f_delta = inst.f;
  for (std::size_t i = 0; i < noise.size(); ++i) out.f_delta[i] += noise[i];
  out.data_error = norm(Signal(noise, p, inst.K.range_weights()), p);

  StopCriteria stop;
  stop.max_iters = cfg.max_iters;
  stop.D_tol = cfg.D_tol;

  auto solve = [&](double alpha) {
    const ProblemSpec prob = sparse_problem(inst, out.f_delta, exps, alpha);
    StepPolicy policy = make_step_policy(prob, prob.zero_iterate());
    policy.grow_factor = cfg.step_growth;
    RunResult r = fbs_run(prob, policy, stop);
    const double disc = discrepancy_of(r.u, prob);
    return std::make_pair(std::move(r), disc);
  };

  std::optional<RunResult> best;
  if (cfg.target_discrepancy > 0.0) {
    double lo = std::log(cfg.alpha_lo), hi = std::log(cfg.alpha_hi);
    double best_gap = std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg.bisect_iters; ++it) {
      const double a = std::exp(0.5 * (lo + hi));
      auto [run, disc] = solve(a);
      out.alpha_trace.emplace_back(a, disc);
      const double gap = std::abs(disc - cfg.target_discrepancy);
      if (gap < best_gap) {
        best_gap = gap;
        out.alpha = a;
        out.discrepancy = disc;
        best = std::move(run);
      }
      if (gap <= cfg.bisect_rel_tol * cfg.target_discrepancy) break;
      (disc > cfg.target_discrepancy ? hi : lo) = std::log(a);
    }
  } else {
    out.alpha = cfg.alpha_for(job);
    auto [run, disc] = solve(out.alpha);
    out.discrepancy = disc;
    best = std::move(run);
  }
  out.u = std::move(best->u);
  out.Ku = inst.K.apply(out.u.values);
  out.nnz = count_nonzero(out.u.values);
  out.history = std::move(best->history);
  return out;
}

/// Runs `jobs` tasks on at most `workers` threads; the first exception wins.
template <class Task>
void run_parallel(std::size_t jobs, int workers, Task task) {
  const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(jobs, workers));
  if (w == 1) {
    for (std::size_t j = 0; j < jobs; ++j) task(j);
    return;
  }
  std::mutex m;
  std::size_t next = 0;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t j;
        {
          std::lock_guard<std::mutex> lock(m);
          if (next >= jobs || error) return;
          j = next++;
        }
        try {
          task(j);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct SparseDemoReport {
  SparseInstance instance;
  std::vector<SparseJobResult> jobs;
};

inline Vector cell_abscissa(std::size_t n) {
  Vector t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i + 1) / static_cast<double>(n);
  return t;
}

inline void write_summary(const fs::path& path, const std::vector<SparseJobResult>& jobs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "p,discrepancy,nnz,data_error,alpha\n";
  for (const auto& j : jobs) {
    out << j.p << ',' << j.discrepancy << ',' << j.nnz << ',' << j.data_error << ',' << j.alpha
        << '\n';
  }
}

/// Files: u_true.table, f.table, and per p: u_p<p>.table, Ku_p<p>.table,
/// f_delta_p<p>.table, p<p>/history.csv, p<p>/alpha_search.csv; summary.csv.
inline SparseDemoReport cmd_sparse_demo(const SparseDemoConfig& cfg, int jobs = 1,
                                        std::ostream* log = nullptr) {
  SparseDemoReport rep{make_sparse_instance(cfg), {}};
  rep.jobs.resize(cfg.p_values.size());
  run_parallel(cfg.p_values.size(), jobs, [&](std::size_t j) {
    rep.jobs[j] = run_sparse_job(rep.instance, cfg, j);
  });

  fs::create_directories(cfg.output_dir);
  const Vector t = cell_abscissa(cfg.N);
  write_table(cfg.output_dir / "u_true.table", t, rep.instance.u_true);
  write_table(cfg.output_dir / "f.table", t, rep.instance.f);
  for (const auto& j : rep.jobs) {
    const std::string tag = "p" + format_number(j.p);
    write_table(cfg.output_dir / ("u_" + tag + ".table"), t, j.u.values);
    write_table(cfg.output_dir / ("Ku_" + tag + ".table"), t, j.Ku);
    write_table(cfg.output_dir / ("f_delta_" + tag + ".table"), t, j.f_delta);
    fs::create_directories(cfg.output_dir / tag);
    j.history.write_csv((cfg.output_dir / tag / "history.csv").string());
    std::ofstream a(cfg.output_dir / tag / "alpha_search.csv");
    a.precision(17);
    a << "alpha,discrepancy\n";
    for (const auto& [al, d] : j.alpha_trace) a << al << ',' << d << '\n';
    if (log) {
      *log << tag << ": alpha " << j.alpha << ", discrepancy " << j.discrepancy << ", nnz "
           << j.nnz << ", data error " << j.data_error << ", " << j.history.records.size()
           << " iterations (" << to_string(j.history.status) << ")\n";
    }
  }
  write_summary(cfg.output_dir / "summary.csv", rep.jobs);
  return rep;
}

// ---------------------------------------------------------------------------
// tv

struct TvConfig {
  std::string kind = "tv-denoise";
  std::vector<std::size_t> dims{64, 64};
  double p = 1.5;
  double alpha = 0.01;
  double noise_level = 0.1;  // ||f_delta - f||_p / ||f||_p
  std::string kernel = "identity";
  std::size_t kernel_size = 5;
  double kernel_sigma = 1.0;
  std::string kernel_file;
  long max_iters = 100;
  double D_tol = -1.0;
  double predual_tol = 1e-6;
  int predual_max_iters = 2000;
  std::uint64_t seed = 1;
  fs::path output_dir = "tv-out";

  double spacing() const { return 1.0 / static_cast<double>(dims.front()); }

  static TvConfig from(const Config& c) {
    c.expect_only({"kind", "dims", "p", "alpha", "noise_level", "kernel", "kernel_size",
                   "kernel_sigma", "kernel_file", "max_iters", "D_tol", "predual_tol",
                   "predual_max_iters", "seed", "output_dir"});
    TvConfig t;
    auto fail = [&](const std::string& msg) { throw ConfigError(c.source() + ": " + msg); };
    t.kind = c.str("kind", t.kind);
    if (t.kind != "tv-denoise" && t.kind != "tv-deblur") {
      fail("tv needs kind = tv-denoise or tv-deblur");
    }
    t.dims.clear();
    for (double d : c.nums("dims", {64, 64})) {
      if (d < 2 || d != std::floor(d)) fail("dims must be integers >= 2");
      t.dims.push_back(static_cast<std::size_t>(d));
    }
    if (t.dims.size() != 2 && t.dims.size() != 3) fail("dims must have 2 or 3 entries");
    t.p = c.num("p", t.p);
    t.alpha = c.num("alpha", t.alpha);
    t.noise_level = c.num("noise_level", t.noise_level);
    t.kernel = c.str("kernel", t.kind == "tv-deblur" ? "gaussian" : "identity");
    t.kernel_size = static_cast<std::size_t>(c.integer("kernel_size", 5));
    t.kernel_sigma = c.num("kernel_sigma", t.kernel_sigma);
    t.kernel_file = c.str("kernel_file", "");
    t.max_iters = c.integer("max_iters", t.max_iters);
    t.D_tol = c.num("D_tol", t.D_tol);
    t.predual_tol = c.num("predual_tol", t.predual_tol);
    t.predual_max_iters = static_cast<int>(c.integer("predual_max_iters", t.predual_max_iters));
    t.seed = resolve_seed(c, t.seed);
    t.output_dir = c.str("output_dir", t.output_dir.string());

    const double d = static_cast<double>(t.dims.size());
    const double p_max = d / (d - 1.0);
    if (!(t.p > 1.0 && t.p <= p_max)) {
      fail("p must lie in (1, " + format_number(p_max) + "] for " + format_number(d) + "D grids");
    }
    if (!(t.alpha >= 0.0)) fail("alpha must be non-negative");
    if (!(t.noise_level >= 0.0)) fail("noise_level must be non-negative");
    if (t.kernel != "identity" && t.kernel != "gaussian" && t.kernel != "file") {
      fail("kernel must be identity, gaussian or file");
    }
    if (t.kernel == "file" && t.kernel_file.empty()) fail("kernel = file needs kernel_file");
    if (t.kernel == "gaussian" && (t.kernel_size % 2 == 0 || !(t.kernel_sigma > 0.0))) {
      fail("gaussian kernel needs an odd kernel_size and kernel_sigma > 0");
    }
    if (t.max_iters < 0) fail("max_iters must be non-negative");
    if (!(t.predual_tol > 0.0) || t.predual_max_iters < 1) fail("bad predual settings");
    return t;
  }
};

/// Piecewise-constant test object on [0,1]^d: two boxes and a ball.
inline GridField make_phantom(const std::vector<std::size_t>& dims, double exponent) {
  GridField g = GridField::zeros(dims, 1.0 / static_cast<double>(dims.front()), exponent);
  const std::size_t d = dims.size();
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    std::size_t rem = flat;
    std::vector<double> x(d);
    for (std::size_t a = d; a-- > 0;) {
      x[a] = (static_cast<double>(rem % dims[a]) + 0.5) / static_cast<double>(dims[a]);
      rem /= dims[a];
    }
    auto in_box = [&](double lo, double hi) {
      return std::all_of(x.begin(), x.end(), [&](double c) { return c >= lo && c < hi; });
    };
    double r2 = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      const double c = a == 0 ? 0.68 : 0.62;
      r2 += (x[a] - c) * (x[a] - c);
    }
    double v = 0.0;
    if (in_box(0.15, 0.5)) v = 1.0;
    if (r2 < 0.2 * 0.2) v = 0.6;
    if (in_box(0.25, 0.35)) v = -0.5;
    g.values[flat] = v;
  }
  return g;
}

inline Kernel3D tv_kernel(const TvConfig& t) {
  if (t.kernel == "identity") return Kernel3D::identity(t.dims.size());
  if (t.kernel == "gaussian") return Kernel3D::gaussian(t.dims.size(), t.kernel_size, t.kernel_sigma);
  Kernel3D k = Kernel3D::load(t.kernel_file);
  if (k.rank() != t.dims.size()) throw ConfigError("kernel_file rank does not match dims");
  return k;
}

struct TvReport {
  GridField phantom;
  GridField observed;
  GridField result;
  SolveHistory history;
  double tv_observed = 0.0;
  double tv_result = 0.0;
};

/// Files: phantom/observed/result as .hdr + .raw and .pgm (+ .pgm.scale;
/// middle slice for 3D), history.csv, summary.csv.
inline TvReport cmd_tv(const TvConfig& cfg, std::ostream* log = nullptr) {
  TvReport rep;
  const double h = cfg.spacing();
  rep.phantom = make_phantom(cfg.dims, cfg.p);
  const LinearOperator K = convolution_operator(tv_kernel(cfg), cfg.dims, h);
  Vector f = K.apply(rep.phantom.values);
  std::mt19937_64 rng = stream_rng(cfg.seed, 2);
  std::normal_distribution<double> gauss;
  Vector unit(f.size());
  for (double& x : unit) x = gauss(rng);
  const double f_norm = norm(Signal(f, cfg.p, K.range_weights()), cfg.p);
  const Vector noise = scaled_noise(unit, K.range_weights(), cfg.p, cfg.noise_level * f_norm);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] += noise[i];
  rep.observed = GridField{cfg.dims, f, h, cfg.p};

  PredualConfig pd;
  pd.tol = cfg.predual_tol;
  pd.max_iters = cfg.predual_max_iters;
  ProblemSpec prob{K,
                   Signal(f, cfg.p, K.range_weights()),
                   Exponents::make(cfg.p, cfg.p, 1.0),
                   Vector{cfg.alpha},
                   PenaltyKind::total_variation,
                   cfg.dims,
                   h,
                   pd};
  StopCriteria stop;
  stop.max_iters = cfg.max_iters;
  stop.D_tol = cfg.D_tol;
  RunResult run = fbs_run(prob, make_step_policy(prob, prob.zero_iterate()), stop);
  rep.result = GridField{cfg.dims, run.u.values, h, cfg.p};
  rep.history = std::move(run.history);
  rep.tv_observed = tv_seminorm(rep.observed);
  rep.tv_result = tv_seminorm(rep.result);

  fs::create_directories(cfg.output_dir);
  const std::size_t slice = cfg.dims.size() == 3 ? cfg.dims[0] / 2 : 0;
  for (const auto& [name, field] : {std::pair<const char*, const GridField*>{"phantom", &rep.phantom},
                                    {"observed", &rep.observed},
                                    {"result", &rep.result}}) {
    write_grid(cfg.output_dir / name, *field);
    write_pgm_slice(cfg.output_dir / (std::string(name) + ".pgm"), *field, slice);
  }
  rep.history.write_csv((cfg.output_dir / "history.csv").string());
  std::ofstream s(cfg.output_dir / "summary.csv");
  s.precision(17);
  s << "kind,p,alpha,tv_observed,tv_result,objective,iterations,status,dual_feasible\n";
  s << cfg.kind << ',' << cfg.p << ',' << cfg.alpha << ',' << rep.tv_observed << ','
    << rep.tv_result << ',' << rep.history.final_objective << ',' << rep.history.records.size()
    << ',' << to_string(rep.history.status) << ',' << (rep.history.dual_feasible_throughout ? 1 : 0)
    << '\n';
  if (log) {
    *log << cfg.kind << ": " << rep.history.records.size() << " iterations ("
         << to_string(rep.history.status) << "), objective " << rep.history.final_objective
         << ", TV observed " << rep.tv_observed << " -> result " << rep.tv_result << '\n';
  }
  return rep;
}

// ---------------------------------------------------------------------------
// diagnose

/// Rate fit of a recorded history; writes `n r_n C n^(1-p)` rows to `table`.
inline RateFit cmd_diagnose(const fs::path& history_csv, double reference, double p,
                            long burn_in, const fs::path& table) {
  std::ifstream in(history_csv);
  if (!in) throw ConfigError("cannot open history file " + history_csv.string());
  SolveHistory h;
  try {
    h = SolveHistory::read_csv(in);
  } catch (const DomainError& e) {
    throw ConfigError(history_csv.string() + ": " + e.what());
  }
  const RateFit fit = rate_fit(h, reference, burn_in, p);
  std::ofstream out(table);
  if (!out) throw IoError("cannot write " + table.string());
  out.precision(17);
  for (const auto& r : h.records) {
    if (r.n <= burn_in || r.n <= 0) continue;
    const double n = static_cast<double>(r.n);
    out << r.n << ' ' << r.objective - reference << ' ' << fit.C * std::pow(n, 1.0 - p) << '\n';
  }
  return fit;
}

}  // namespace bfbs::cli
