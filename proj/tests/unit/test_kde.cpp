#include <circmode/circdist.hpp>
#include <circmode/error.hpp>
#include <circmode/kde.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

using namespace circmode;

namespace {

AngleSample random_sample(std::uint64_t seed, std::size_t n)
{
  RngStream rng(seed, 0);
  return AngleSample(oracle::uniform_sample(rng, n));
}

double integrate(const std::function<double(double)>& f, int points = 20000)
{
  double acc = 0.0;
  for (int i = 0; i < points; ++i)
    acc += f(kTwoPi * (i + 0.5) / points);
  return acc * kTwoPi / points;
}

} // namespace

TEST(KdeDensity, SingleKernelIdentity)
{
  const KdeSpec spec(AngleSample({ kPi }), 0.4);
  for (double x : { 0.2, 2.0, kPi, 5.5 })
    EXPECT_NEAR(kde_density(spec, x), wn_density(x, kPi, 0.16), 1e-15);
}

TEST(KdeDensity, MatchesDirectSeries)
{
  const AngleSample s({ kTwoPi, kPi });
  const KdeSpec spec(s, 0.3);
  const double ref = 0.5 * (oracle::wn_series(kPi / 2, kTwoPi, 0.09) + oracle::wn_series(kPi / 2, kPi, 0.09));
  EXPECT_NEAR(kde_density(spec, kPi / 2), ref, 1e-14);
}

TEST(KdeDensity, IntegratesToOne)
{
  for (double h : { 0.05, 0.3, 2.0 }) {
    const KdeSpec spec(random_sample(1, 30), h);
    EXPECT_NEAR(integrate([&](double x) { return kde_density(spec, x); }), 1.0, 1e-8);
  }
}

TEST(KdeSpec, RejectsBadBandwidth)
{
  EXPECT_THROW(KdeSpec(AngleSample({ 1.0 }), 0.0), InvalidParameter);
  EXPECT_THROW(KdeSpec(AngleSample({ 1.0 }), -1.0), InvalidParameter);
  EXPECT_THROW(KdeSpec(AngleSample({ 1.0 }), INFINITY), InvalidParameter);
}

TEST(KdeLoo, TwoPointCase)
{
  const KdeSpec spec(AngleSample({ 1.0, 2.5 }), 0.6);
  EXPECT_NEAR(kde_loo_density(spec, 0), wn_density(1.0 - 2.5, 0.0, 0.36), 1e-15);
  EXPECT_THROW(kde_loo_density(KdeSpec(AngleSample({ 1.0 }), 0.6), 0), InsufficientSample);
}

TEST(KdeLoo, IdentityAndDirectSum)
{
  const auto s = random_sample(2, 25);
  const KdeSpec spec(s, 0.35);
  const double k0 = wn_density(0.0, 0.0, 0.35 * 0.35);
  for (std::size_t i = 0; i < s.size(); ++i)
    EXPECT_NEAR(25 * kde_density(spec, s[i]), 24 * kde_loo_density(spec, i) + k0, 1e-10);

  const AngleSample five({ 0.3, 1.2, 2.9, 4.0, 6.1 });
  const KdeSpec spec5(five, 0.5);
  double ref = 0.0;
  for (std::size_t j = 0; j < 5; ++j)
    if (j != 3)
      ref += oracle::wn_series(five[3], five[j], 0.25) / 4.0;
  EXPECT_NEAR(kde_loo_density(spec5, 3), ref, 1e-12);
}

TEST(KdeDerivative, SymmetryFiniteDifferenceAndPeriodicity)
{
  const KdeSpec sym(AngleSample({ 1.0, 2.0 }), 0.4);
  EXPECT_NEAR(kde_derivative(sym, 1.5), 0.0, 1e-10);

  const auto s = random_sample(3, 12);
  for (double h : { 0.1, 0.5, 1.5 }) {
    const KdeSpec spec(s, h);
    for (double x : { 0.4, 1.9, 3.3, 5.0 }) {
      const double e = 1e-5;
      const double fd = (kde_density(spec, x + e) - kde_density(spec, x - e)) / (2 * e);
      EXPECT_NEAR(kde_derivative(spec, x), fd, 1e-6 * std::max(1e-3, std::abs(fd)) + 1e-9);
      const double fd2 = (kde_derivative(spec, x + e) - kde_derivative(spec, x - e)) / (2 * e);
      EXPECT_NEAR(kde_derivative(spec, x, 2), fd2, 1e-5 * std::max(1.0, std::abs(fd2)));
    }
    EXPECT_NEAR(integrate([&](double x) { return kde_derivative(spec, x); }), 0.0, 1e-8);
  }
  EXPECT_THROW(kde_derivative(sym, 1.0, 3), InvalidParameter);
}

TEST(CountModes, SingleDatum)
{
  for (double h : { 1e-3, 0.1, 1.0, 9.0 }) {
    const auto m = count_modes(KdeSpec(AngleSample({ 2.0 }), h));
    ASSERT_EQ(m.count, 1u) << h;
    EXPECT_NEAR(m.mode_locations[0].value(), 2.0, 1e-9);
    EXPECT_NEAR(m.antimode_locations[0].value(), 2.0 + kPi, 1e-9);
  }
}

TEST(CountModes, TwoSeparatedKernels)
{
  const auto m = count_modes(KdeSpec(AngleSample({ kPi / 2, 3 * kPi / 2 }), 0.2));
  ASSERT_EQ(m.count, 2u);
  EXPECT_NEAR(m.mode_locations[0].value(), kPi / 2, 1e-9);
  EXPECT_NEAR(m.mode_locations[1].value(), 3 * kPi / 2, 1e-9);
}

TEST(CountModes, MatchesDenseGridOracle)
{
  const std::vector<std::vector<double>> samples{
    { kPi / 2, 3 * kPi / 2 },
    { 1.0, 1.6 },
    { 0.2, 0.9, 1.1, 4.0, 4.3 },
  };
  for (const auto& xs : samples)
    for (int i = 0; i < 25; ++i) {
      const double h = 0.05 * std::pow(60.0, i / 24.0);
      const std::size_t expected = oracle::grid_maxima(oracle::kde_fourier_grid(xs, h, 100000));
      EXPECT_EQ(count_modes(KdeSpec(AngleSample(xs), h)).count, expected) << "h=" << h;
    }
}

TEST(CountModes, UniformToWorkingPrecision)
{
  // Only even harmonics survive for an antipodal pair; f_h has two modes until
  // 2 exp(-2 h^2) drops below the uniform tolerance.
  const AngleSample s({ kPi / 2, 3 * kPi / 2 });
  const double h_flat = std::sqrt(0.5 * std::log(2.0 / kUniformTolerance));
  EXPECT_EQ(count_modes(KdeSpec(s, 0.999 * h_flat)).count, 2u);
  EXPECT_EQ(count_modes(KdeSpec(s, 1.001 * h_flat)).count, 1u);
  EXPECT_EQ(count_modes(KdeSpec(s, kBandwidthCeil)).count, 1u);
}

TEST(CountModes, LocationsInterleaveAndAreCritical)
{
  const auto s = random_sample(4, 40);
  for (double h : { 0.03, 0.1, 0.3 }) {
    const KdeSpec spec(s, h);
    const auto m = count_modes(spec);
    ASSERT_EQ(m.mode_locations.size(), m.count);
    ASSERT_EQ(m.antimode_locations.size(), m.count);
    std::vector<std::pair<double, int>> all;
    for (auto a : m.mode_locations)
      all.emplace_back(a.value(), 1);
    for (auto a : m.antimode_locations)
      all.emplace_back(a.value(), -1);
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i)
      EXPECT_NE(all[i].second, all[(i + 1) % all.size()].second);
    for (auto a : m.mode_locations) {
      const double f = kde_density(spec, a.value());
      EXPECT_LT(std::abs(kde_derivative(spec, a.value())), 1e-10 * std::max(1.0, f / (h * h)));
      EXPECT_LT(kde_derivative(spec, a.value(), 2), 0.0);
    }
  }
}

TEST(CountModes, MonotoneInBandwidth)
{
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = random_sample(100 + seed, 60);
    std::size_t prev = SIZE_MAX;
    for (int i = 0; i < 50; ++i) {
      const double h = 1e-3 * std::pow(1e4, i / 49.0);
      const std::size_t c = count_modes(KdeSpec(s, h)).count;
      EXPECT_LE(c, prev) << "h=" << h;
      prev = c;
    }
    EXPECT_EQ(prev, 1u);
  }
}

TEST(KdeCdf, EndpointsQuadratureAndMonotone)
{
  const auto s = random_sample(5, 15);
  const KdeSpec spec(s, 0.4);
  EXPECT_NEAR(kde_cdf(spec, kTwoPi), 1.0, 1e-10);
  EXPECT_NEAR(kde_cdf(spec, 1e-14), 0.0, 1e-12);
  const double quad = integrate([&](double x) { return kde_density(spec, x * 0.5); }, 40000) * 0.5;
  EXPECT_NEAR(kde_cdf(spec, kPi), quad, 1e-8);
  double prev = 0.0;
  for (int i = 1; i <= 200; ++i) {
    const double v = kde_cdf(spec, kTwoPi * i / 200);
    EXPECT_GE(v, prev - 1e-15);
    prev = v;
  }
}

TEST(KdeResample, VanishingNoiseAndDeterminism)
{
  const AngleSample s({ 0.5, 2.0, 4.0 });
  RngStream rng(1, 2);
  const auto r = kde_resample(KdeSpec(s, 1e-12), 100, rng);
  for (double v : r.values()) {
    const double nearest = std::min({ std::abs(v - 0.5), std::abs(v - 2.0), std::abs(v - 4.0) });
    EXPECT_LT(nearest, 1e-9);
  }
  RngStream a(8, 8);
  RngStream b(8, 8);
  const auto x = kde_resample(KdeSpec(s, 0.3), 20, a);
  const auto y = kde_resample(KdeSpec(s, 0.3), 20, b);
  EXPECT_TRUE(std::equal(x.values().begin(), x.values().end(), y.values().begin()));
  EXPECT_THROW(kde_resample(KdeSpec(s, 0.3), 0, a), InvalidParameter);
}

TEST(KdeResample, DrawsFollowTheEstimate)
{
  const auto s = random_sample(6, 10);
  const KdeSpec spec(s, 0.3);
  RngStream rng(4, 0);
  const auto r = kde_resample(spec, 100000, rng);
  const auto xs = r.sorted();
  double ks = 0.0;
  for (std::size_t j = 0; j < xs.size(); j += 50) {
    const double f = kde_cdf(spec, xs[j]);
    ks = std::max({ ks, std::abs(f - static_cast<double>(j) / xs.size()),
                    std::abs(f - static_cast<double>(j + 1) / xs.size()) });
  }
  EXPECT_LT(ks, 0.01);
}
