#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "banach_fbs/core.hpp"

namespace bfbs {
namespace {

Signal random_signal(std::mt19937_64& rng, std::size_t n, double e, bool random_weights) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> wdist(0.1, 2.0);
  Vector v(n), w(n, 1.0);
  for (auto& x : v) x = gauss(rng);
  if (random_weights) {
    for (auto& x : w) x = wdist(rng);
  }
  return Signal(v, e, w);
}

TEST(SignedPower, Examples) {
  EXPECT_EQ(signed_power(0.0, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(signed_power(-4.0, 0.5), -2.0);
  EXPECT_EQ(signed_power(7.3, 1.0), 7.3);
  EXPECT_EQ(signed_power(-3.0, 0.0), -1.0);
  EXPECT_EQ(signed_power(2.5, 0.0), 1.0);
}

TEST(SignedPower, RejectsBadInput) {
  EXPECT_THROW(signed_power(1.0, -0.5), DomainError);
  EXPECT_THROW(signed_power(std::nan(""), 1.0), DomainError);
  EXPECT_THROW(signed_power(INFINITY, 1.0), DomainError);
}

TEST(Norm, Examples) {
  EXPECT_DOUBLE_EQ(norm(Signal({3.0, 4.0}, 2.0, {1.0, 1.0}), 2.0), 5.0);
  EXPECT_EQ(norm(Signal({0.0, 0.0, 0.0}, 1.5, {1.0, 1.0, 1.0}), 1.5), 0.0);
  EXPECT_DOUBLE_EQ(norm(Signal({1, 1, 1, 1}, 2.0, {0.25, 0.25, 0.25, 0.25}), 1.0), 1.0);
}

TEST(SignalInvariants, Rejected) {
  EXPECT_THROW(Signal({1.0}, 1.0, {1.0}), DomainError);
  EXPECT_THROW(Signal({1.0}, 2.0, {0.0}), DomainError);
  EXPECT_THROW(Signal({1.0, 2.0}, 2.0, {1.0}), DomainError);
  EXPECT_THROW(Signal({NAN}, 2.0, {1.0}), DomainError);
}

TEST(DualityMap, Examples) {
  const DualVector z = duality_map(Signal({0.0, 0.0}, 1.5, {1.0, 1.0}), 1.5, 3.0);
  EXPECT_EQ(z.values, (Vector{0.0, 0.0}));

  const Signal u({1.5, -2.0, 0.25}, 2.0, {1.0, 1.0, 1.0});
  EXPECT_EQ(duality_map(u, 2.0, 2.0).values, u.values);

  const DualVector j = duality_map(Signal({4.0, 0.0}, 1.5, {1.0, 1.0}), 1.5, 1.5);
  EXPECT_DOUBLE_EQ(j.values[0], 2.0);
  EXPECT_EQ(j.values[1], 0.0);
}

TEST(DualityMap, PairingDualNormHomogeneityOddness) {
  std::mt19937_64 rng(7);
  const double es[] = {1.3, 1.5, 2.0};
  const double qs[] = {1.3, 1.5, 2.0, 3.0};
  std::uniform_real_distribution<double> lam(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    for (double e : es) {
      for (double q : qs) {
        const Signal u = random_signal(rng, 17, e, trial % 2 == 1);
        const DualVector j = duality_map(u, e, q);
        const double nu = norm(u, e);
        EXPECT_NEAR(pairing(j, u), std::pow(nu, q), 1e-12 * std::pow(nu, q));
        EXPECT_NEAR(dual_norm(j, e), std::pow(nu, q - 1.0), 1e-10 * std::pow(nu, q - 1.0));

        const double l = lam(rng);
        Signal lu = u;
        for (double& x : lu.values) x *= l;
        const DualVector jl = duality_map(lu, e, q);
        const double factor = signed_power(l, q - 1.0);
        for (std::size_t k = 0; k < u.size(); ++k) {
          EXPECT_NEAR(jl.values[k], factor * j.values[k],
                      1e-12 * std::abs(factor * j.values[k]) + 1e-300);
        }

        Signal neg = u;
        for (double& x : neg.values) x = -x;
        const DualVector jn = duality_map(neg, e, q);
        for (std::size_t k = 0; k < u.size(); ++k) EXPECT_EQ(jn.values[k], -j.values[k]);
      }
    }
  }
}

TEST(DualityMap, RejectsPowerAtMostOne) {
  const Signal u({1.0}, 2.0, {1.0});
  EXPECT_THROW(duality_map(u, 2.0, 1.0), DomainError);
  EXPECT_THROW(duality_map(u, 1.0, 2.0), DomainError);
}

// Largest sampled ||j(u) - j(v)||_* / ||u - v||^(p-1) over pairs in the ball.
double sampled_holder_ratio(double e, double q, double radius, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss;
  const double p = std::min(2.0, e);
  double best = 0.0;
  for (int t = 0; t < samples; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(unif(rng) * 6);
    Vector w(n);
    for (auto& x : w) x = 0.2 + 2.0 * unif(rng);
    auto in_ball = [&](double rad) {
      Signal s(Vector(n), e, w);
      for (auto& x : s.values) x = gauss(rng);
      const double nr = norm(s, e);
      for (auto& x : s.values) x *= rad / nr;
      return s;
    };
    Signal u = in_ball(radius * std::pow(unif(rng), 0.25));
    Signal v = in_ball(radius * std::pow(unif(rng), 0.25));
    switch (t % 4) {
      case 1:  // antipodal
        v = u;
        for (auto& x : v.values) x = -x;
        break;
      case 2: {  // close pair
        v = u;
        const double eps = std::pow(10.0, -1.0 - 6.0 * unif(rng));
        for (auto& x : v.values) x += eps * gauss(rng);
        const double nv = norm(v, e);
        if (nv > radius) {
          for (auto& x : v.values) x *= radius / nv;
        }
        break;
      }
      case 3:  // one point near the origin
        for (auto& x : v.values) x *= 1e-4 * unif(rng);
        break;
      default:
        break;
    }
    const DualVector ju = duality_map(u, e, q);
    const DualVector jv = duality_map(v, e, q);
    DualVector d = ju;
    for (std::size_t k = 0; k < n; ++k) d.values[k] -= jv.values[k];
    Signal diff = u;
    for (std::size_t k = 0; k < n; ++k) diff.values[k] -= v.values[k];
    const double den = std::pow(norm(diff, e), p - 1.0);
    if (den > 0.0) best = std::max(best, dual_norm(d, e) / den);
  }
  return best;
}

TEST(HolderBound, Examples) {
  EXPECT_EQ(holder_bound_jr(2.0, 2.0, 1234.0), 1.0);
  EXPECT_THROW(holder_bound_jr(1.5, 1.4, 1.0), DomainError);
  EXPECT_THROW(holder_bound_jr(3.0, 1.8, 1.0), DomainError);
}

TEST(HolderBound, DominatesSampledRatio) {
  struct Case {
    double e, q, radius;
  };
  const Case cases[] = {{1.3, 1.3, 1.0}, {1.3, 1.5, 1.0}, {1.3, 2.0, 2.0}, {1.3, 3.0, 3.0},
                        {1.5, 1.5, 1.0}, {1.5, 2.0, 1.0}, {1.5, 3.0, 2.5}, {2.0, 3.0, 1.0},
                        {2.0, 3.0, 4.0}, {3.0, 2.0, 1.0}, {3.0, 3.0, 2.0}, {1.5, 1.5, 50.0}};
  std::uint64_t seed = 100;
  for (const Case& c : cases) {
    const double sampled = sampled_holder_ratio(c.e, c.q, c.radius, 10000, ++seed);
    const double bound = holder_bound_jr(c.e, c.q, c.radius);
    EXPECT_GE(bound, sampled * (1.0 - 1e-7)) << "e=" << c.e << " q=" << c.q << " R=" << c.radius;
  }
  // identity map: the bound is exact
  EXPECT_NEAR(sampled_holder_ratio(2.0, 2.0, 1.0, 10000, 1), 1.0, 1e-7);
}

TEST(HolderBound, ScalesLikeRadiusPower) {
  // power 3 in l^2: the Lipschitz constant grows like R^(3 - 2)
  const double s1 = sampled_holder_ratio(2.0, 3.0, 1.0, 4000, 5);
  const double s4 = sampled_holder_ratio(2.0, 3.0, 4.0, 4000, 5);
  EXPECT_NEAR(s4 / s1, 4.0, 0.8);
  EXPECT_DOUBLE_EQ(holder_bound_jr(2.0, 3.0, 4.0) / holder_bound_jr(2.0, 3.0, 1.0), 4.0);
}

TEST(Exponents, Validation) {
  EXPECT_NO_THROW(Exponents::make(1.5, 1.5, 1.0));
  EXPECT_THROW(Exponents::make(2.5, 3.0, 1.0), DomainError);
  EXPECT_THROW(Exponents::make(1.5, 1.2, 1.0), DomainError);
  EXPECT_THROW(Exponents::make(1.5, 2.0, 2.5), DomainError);
  EXPECT_THROW(Exponents::make(1.5, 2.0, 1.0, 1.0), DomainError);
  Exponents e = Exponents::make(1.5, 2.0, 1.0);
  e.p_dual = 2.5;
  EXPECT_THROW(e.validate(), DomainError);
}

}  // namespace
}  // namespace bfbs
