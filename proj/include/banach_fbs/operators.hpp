#pragma once

// Matrix-free linear forward operators.
//
// Operators act on value (density) representations: a Signal's values in the
// domain, values with range-cell measures in the range. The adjoint is the
// plain transpose, which is the correct adjoint for the measure-folded dual
// vectors used throughout (pairing = dot product).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "banach_fbs/core.hpp"

namespace bfbs {

/// Schur-type bounds of the matrix A in the density representation.
///   row:   max_i sum_j |A_ij|                 (L^inf -> L^inf)
///   col:   max_j sum_i |A_ij| h_i / h_j       (L^1 -> L^1)
///   entry: max_ij |A_ij| / h_j                (L^1 -> L^inf)
struct SchurBounds {
  double row = 0.0;
  double col = 0.0;
  double entry = 0.0;
};

class LinearOperator {
 public:
  using Map = std::function<void(std::span<const double>, std::span<double>)>;

  LinearOperator(Vector domain_weights, Vector range_weights, Map apply, Map adjoint,
                 SchurBounds bounds)
      : domain_weights_(std::move(domain_weights)),
        range_weights_(std::move(range_weights)),
        apply_(std::move(apply)),
        adjoint_(std::move(adjoint)),
        bounds_(bounds) {}

  std::size_t domain_size() const { return domain_weights_.size(); }
  std::size_t range_size() const { return range_weights_.size(); }
  const Vector& domain_weights() const { return domain_weights_; }
  const Vector& range_weights() const { return range_weights_; }
  const SchurBounds& bounds() const { return bounds_; }

  Vector apply(std::span<const double> u) const {
    if (u.size() != domain_size()) throw DomainError("LinearOperator::apply: dimension mismatch");
    Vector out(range_size(), 0.0);
    apply_(u, out);
    return out;
  }

  Vector adjoint_apply(std::span<const double> v) const {
    if (v.size() != range_size()) {
      throw DomainError("LinearOperator::adjoint_apply: dimension mismatch");
    }
    Vector out(domain_size(), 0.0);
    adjoint_(v, out);
    return out;
  }

  /// K u as a Signal in the range space with the given exponent.
  Signal apply(const Signal& u, double range_exponent) const {
    return Signal(apply(std::span<const double>(u.values)), range_exponent, range_weights_);
  }

  DualVector adjoint_apply(const DualVector& v) const {
    return DualVector{adjoint_apply(std::span<const double>(v.values)), domain_weights_};
  }

  LinearOperator scaled(double c) const {
    auto a = apply_;
    auto b = adjoint_;
    Map sa = [a, c](std::span<const double> in, std::span<double> out) {
      a(in, out);
      for (double& x : out) x *= c;
    };
    Map sb = [b, c](std::span<const double> in, std::span<double> out) {
      b(in, out);
      for (double& x : out) x *= c;
    };
    const double m = std::abs(c);
    return LinearOperator(domain_weights_, range_weights_, std::move(sa), std::move(sb),
                          SchurBounds{bounds_.row * m, bounds_.col * m, bounds_.entry * m});
  }

 private:
  Vector domain_weights_;
  Vector range_weights_;
  Map apply_;
  Map adjoint_;
  SchurBounds bounds_;
};

inline double total_measure(const Vector& weights) {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

/// Upper bound on ||K||: L^from -> L^to over the operator's cell measures.
///
/// For to >= from, Riesz-Thorin on the triangle (1,1), (inf,inf), (1,inf)
/// applied to |A|. For to < from, the diagonal bound combined with the
/// embedding constant of the finite measure space, whichever side is cheaper.
inline double norm_bound_estimate(const LinearOperator& K, double from_exponent,
                                  double to_exponent) {
  if (!(from_exponent >= 1.0) || !(to_exponent >= 1.0)) {
    throw DomainError("norm_bound_estimate: exponents must be >= 1");
  }
  const SchurBounds& b = K.bounds();
  auto interp = [&b](double x, double y) {
    return std::pow(b.col, y) * std::pow(b.row, 1.0 - x) * std::pow(b.entry, x - y);
  };
  const double x = 1.0 / from_exponent;
  const double y = 1.0 / to_exponent;
  if (y <= x) return interp(x, y);
  const double gap = y - x;
  const double via_range = std::pow(total_measure(K.range_weights()), gap) * interp(x, x);
  const double via_domain = std::pow(total_measure(K.domain_weights()), gap) * interp(y, y);
  return std::min(via_range, via_domain);
}

/// Discretized u -> int_0^t u(s) ds on [0, 1] with N cells of width h = 1/N:
/// (Ku)_i = h sum_{j <= i} u_j, (K* v)_j = h sum_{i >= j} v_i.
inline LinearOperator integration_operator(std::size_t n) {
  if (n < 1) throw DomainError("integration_operator: need N >= 1");
  const double h = 1.0 / static_cast<double>(n);
  LinearOperator::Map fwd = [h](std::span<const double> u, std::span<double> out) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      acc += u[i];
      out[i] = h * acc;
    }
  };
  LinearOperator::Map adj = [h](std::span<const double> v, std::span<double> out) {
    double acc = 0.0;
    for (std::size_t j = v.size(); j-- > 0;) {
      acc += v[j];
      out[j] = h * acc;
    }
  };
  return LinearOperator(Vector(n, h), Vector(n, h), std::move(fwd), std::move(adj),
                        SchurBounds{1.0, 1.0, 1.0});
}

inline LinearOperator identity_operator(std::size_t n, double weight = 1.0) {
  LinearOperator::Map id = [](std::span<const double> u, std::span<double> out) {
    std::copy(u.begin(), u.end(), out.begin());
  };
  return LinearOperator(Vector(n, weight), Vector(n, weight), id, id,
                        SchurBounds{1.0, 1.0, 1.0 / weight});
}

/// Dense row-major matrix adapter with unit cell measures (small tests only).
inline LinearOperator dense_operator(std::size_t rows, std::size_t cols, Vector a) {
  if (a.size() != rows * cols) throw DomainError("dense_operator: size mismatch");
  SchurBounds b;
  for (std::size_t i = 0; i < rows; ++i) {
    double rs = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      rs += std::abs(a[i * cols + j]);
      b.entry = std::max(b.entry, std::abs(a[i * cols + j]));
    }
    b.row = std::max(b.row, rs);
  }
  for (std::size_t j = 0; j < cols; ++j) {
    double cs = 0.0;
    for (std::size_t i = 0; i < rows; ++i) cs += std::abs(a[i * cols + j]);
    b.col = std::max(b.col, cs);
  }
  auto shared = std::make_shared<const Vector>(std::move(a));
  LinearOperator::Map fwd = [shared, rows, cols](std::span<const double> u,
                                                 std::span<double> out) {
    for (std::size_t i = 0; i < rows; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < cols; ++j) acc += (*shared)[i * cols + j] * u[j];
      out[i] = acc;
    }
  };
  LinearOperator::Map adj = [shared, rows, cols](std::span<const double> v,
                                                 std::span<double> out) {
    for (std::size_t j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < rows; ++i) acc += (*shared)[i * cols + j] * v[i];
      out[j] = acc;
    }
  };
  return LinearOperator(Vector(cols, 1.0), Vector(rows, 1.0), std::move(fwd), std::move(adj), b);
}

/// Non-negative point-spread function on a d-dimensional stencil (d <= 3).
/// Taps are stored row-major; normalization * sum(taps) == 1.
struct Kernel3D {
  std::vector<std::size_t> dims;
  Vector taps;
  double normalization = 1.0;

  std::size_t rank() const { return dims.size(); }

  /// Rescales raw non-negative taps to unit mass.
  static Kernel3D normalized(std::vector<std::size_t> dims, Vector raw) {
    Kernel3D k{std::move(dims), std::move(raw), 1.0};
    std::size_t count = 1;
    for (auto n : k.dims) count *= n;
    if (k.dims.empty() || k.dims.size() > 3 || count != k.taps.size()) {
      throw DomainError("Kernel3D: dims do not match the tap count");
    }
    double sum = 0.0;
    for (double t : k.taps) {
      if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("Kernel3D: taps must be >= 0");
      sum += t;
    }
    if (!(sum > 0.0)) throw DomainError("Kernel3D: taps sum to zero");
    for (double& t : k.taps) t /= sum;
    k.normalization = 1.0;
    return k;
  }

  static Kernel3D identity(std::size_t rank) {
    return normalized(std::vector<std::size_t>(rank, 1), Vector{1.0});
  }

  /// Sampled isotropic Gaussian with `size` taps per axis.
  static Kernel3D gaussian(std::size_t rank, std::size_t size, double sigma) {
    if (size % 2 == 0) throw DomainError("Kernel3D::gaussian: size must be odd");
    std::vector<std::size_t> dims(rank, size);
    std::size_t count = 1;
    for (std::size_t i = 0; i < rank; ++i) count *= size;
    Vector taps(count);
    const double c = static_cast<double>(size / 2);
    for (std::size_t idx = 0; idx < count; ++idx) {
      std::size_t rem = idx;
      double r2 = 0.0;
      for (std::size_t a = rank; a-- > 0;) {
        const double x = static_cast<double>(rem % size) - c;
        rem /= size;
        r2 += x * x;
      }
      taps[idx] = std::exp(-0.5 * r2 / (sigma * sigma));
    }
    return normalized(std::move(dims), std::move(taps));
  }

  /// Text format: first line "d n1 ... nd", then whitespace-separated taps.
  static Kernel3D load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("Kernel3D: cannot open " + path);
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::size_t d = 0;
    if (!(hs >> d) || d < 1 || d > 3) throw DomainError("Kernel3D: bad rank in " + path);
    std::vector<std::size_t> dims(d);
    for (auto& n : dims) {
      if (!(hs >> n) || n == 0) throw DomainError("Kernel3D: bad dims in " + path);
    }
    Vector taps;
    double t;
    while (in >> t) taps.push_back(t);
    if (!in.eof()) throw DomainError("Kernel3D: non-numeric tap in " + path);
    return normalized(std::move(dims), std::move(taps));
  }
};

namespace detail {

// Grid shape padded to three axes, row-major (last axis fastest).
struct Shape3 {
  std::array<std::ptrdiff_t, 3> n{1, 1, 1};

  explicit Shape3(std::span<const std::size_t> dims) {
    const std::size_t off = 3 - dims.size();
    for (std::size_t a = 0; a < dims.size(); ++a) {
      n[off + a] = static_cast<std::ptrdiff_t>(dims[a]);
    }
  }
  std::ptrdiff_t size() const { return n[0] * n[1] * n[2]; }
  std::ptrdiff_t index(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) const {
    return (i * n[1] + j) * n[2] + k;
  }
};

// out[x] += sum_o k[o] in[x + sign * (o - c)], zero outside the grid.
inline void stencil_pass(const Shape3& grid, const Shape3& ker, std::span<const double> taps,
                         std::span<const double> in, std::span<double> out, int sign) {
  std::array<std::ptrdiff_t, 3> c{};
  for (int a = 0; a < 3; ++a) c[a] = ker.n[a] / 2;
  std::fill(out.begin(), out.end(), 0.0);
  for (std::ptrdiff_t i = 0; i < grid.n[0]; ++i) {
    for (std::ptrdiff_t j = 0; j < grid.n[1]; ++j) {
      for (std::ptrdiff_t k = 0; k < grid.n[2]; ++k) {
        double acc = 0.0;
        for (std::ptrdiff_t a = 0; a < ker.n[0]; ++a) {
          const std::ptrdiff_t ii = i + sign * (a - c[0]);
          if (ii < 0 || ii >= grid.n[0]) continue;
          for (std::ptrdiff_t b = 0; b < ker.n[1]; ++b) {
            const std::ptrdiff_t jj = j + sign * (b - c[1]);
            if (jj < 0 || jj >= grid.n[1]) continue;
            for (std::ptrdiff_t e = 0; e < ker.n[2]; ++e) {
              const std::ptrdiff_t kk = k + sign * (e - c[2]);
              if (kk < 0 || kk >= grid.n[2]) continue;
              acc += taps[ker.index(a, b, e)] * in[grid.index(ii, jj, kk)];
            }
          }
        }
        out[grid.index(i, j, k)] = acc;
      }
    }
  }
}

}  // namespace detail

/// Zero-padded "same" convolution u -> u * k on a grid with the given dims
/// and cell spacing; the adjoint is correlation with k.
inline LinearOperator convolution_operator(const Kernel3D& kernel,
                                           const std::vector<std::size_t>& dims,
                                           double spacing = 1.0) {
  if (kernel.rank() != dims.size()) {
    throw DomainError("convolution_operator: kernel rank differs from grid rank");
  }
  for (std::size_t a = 0; a < dims.size(); ++a) {
    if (kernel.dims[a] > dims[a]) {
      throw DomainError("convolution_operator: kernel support exceeds the grid");
    }
  }
  const detail::Shape3 grid(dims);
  const detail::Shape3 ker(kernel.dims);
  auto taps = std::make_shared<const Vector>([&] {
    Vector t = kernel.taps;
    for (double& x : t) x *= kernel.normalization;
    return t;
  }());
  LinearOperator::Map fwd = [grid, ker, taps](std::span<const double> u, std::span<double> out) {
    detail::stencil_pass(grid, ker, *taps, u, out, -1);
  };
  LinearOperator::Map adj = [grid, ker, taps](std::span<const double> v, std::span<double> out) {
    detail::stencil_pass(grid, ker, *taps, v, out, +1);
  };

  const auto n = static_cast<std::size_t>(grid.size());
  const double cell = std::pow(spacing, static_cast<double>(dims.size()));
  // Uniform measures: row sums are K 1, weighted column sums are K^T 1.
  const Vector ones(n, 1.0);
  Vector tmp(n);
  SchurBounds b;
  fwd(ones, tmp);
  b.row = *std::max_element(tmp.begin(), tmp.end());
  adj(ones, tmp);
  b.col = *std::max_element(tmp.begin(), tmp.end());
  b.entry = *std::max_element(taps->begin(), taps->end()) / cell;
  return LinearOperator(Vector(n, cell), Vector(n, cell), std::move(fwd), std::move(adj), b);
}

struct AdjointTestReport {
  double max_relative_error = 0.0;
  bool passed = false;
};

/// Randomized check of <K u, v> = <u, K* v>.
inline AdjointTestReport adjoint_test(const LinearOperator& K, int trials, double tol,
                                      std::uint64_t seed = 20240601) {
  if (trials < 1) throw DomainError("adjoint_test: need trials >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  AdjointTestReport rep;
  Vector u(K.domain_size());
  Vector v(K.range_size());
  for (int t = 0; t < trials; ++t) {
    for (double& x : u) x = gauss(rng);
    for (double& x : v) x = gauss(rng);
    const Vector ku = K.apply(std::span<const double>(u));
    const Vector ktv = K.adjoint_apply(std::span<const double>(v));
    const double lhs = detail::dot(ku, v);
    const double rhs = detail::dot(u, ktv);
    const double scale = std::sqrt(detail::dot(ku, ku)) * std::sqrt(detail::dot(v, v)) + 1e-300;
    rep.max_relative_error = std::max(rep.max_relative_error, std::abs(lhs - rhs) / scale);
  }
  rep.passed = rep.max_relative_error <= tol;
  return rep;
}

}  // namespace bfbs
