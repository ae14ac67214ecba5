#include <circmode/circdist.hpp>
#include <circmode/emtest.hpp>
#include <circmode/error.hpp>
#include <circmode/kde.hpp>
#include <circmode/simlab.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace circmode;

namespace {

std::vector<double> random_angles(std::uint64_t seed, std::size_t n)
{
  RngStream rng(seed, 0);
  return oracle::uniform_sample(rng, n);
}

} // namespace

TEST(ExcessMass, MatchesEnumerationOnSmallSamples)
{
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t n = 1 + seed % 12;
    const auto xs = random_angles(seed, n);
    const AngleSample s(xs);
    for (std::size_t k : { 1u, 2u })
      for (double lambda : { 0.01, 0.1, 0.3, 1.0, 3.0 }) {
        const auto e = empirical_excess_mass(s, k, lambda);
        EXPECT_NEAR(e.value, oracle::excess_mass_bruteforce(xs, k, lambda), 1e-12)
          << "seed " << seed << " k " << k << " lambda " << lambda;
      }
  }
}

TEST(ExcessMass, IntervalsReproduceTheValue)
{
  const auto xs = random_angles(3, 30);
  const AngleSample s(xs);
  for (std::size_t k : { 1u, 2u, 4u })
    for (double lambda : { 0.05, 0.2, 0.8 }) {
      const auto e = empirical_excess_mass(s, k, lambda);
      ASSERT_LE(e.intervals.size(), k);
      double v = 0.0;
      for (const Arc& a : e.intervals) {
        EXPECT_GE(a.length(), 0.0);
        EXPECT_LE(a.length(), kTwoPi);
        v += static_cast<double>(a.points) / 30.0 - lambda * a.length();
      }
      EXPECT_NEAR(v, e.value, 1e-12);
      // pairwise disjoint on the circle
      for (std::size_t i = 0; i < e.intervals.size(); ++i)
        for (std::size_t j = i + 1; j < e.intervals.size(); ++j) {
          const Arc& a = e.intervals[i];
          const Arc& b = e.intervals[j];
          for (double shift : { -kTwoPi, 0.0, kTwoPi })
            EXPECT_TRUE(b.start + shift > a.end || b.end + shift < a.start);
        }
    }
}

TEST(ExcessMass, LimitsAndMonotonicity)
{
  const AngleSample s(random_angles(4, 25));
  EXPECT_NEAR(empirical_excess_mass(s, 1, 1e-12).value, 1.0, 1e-10);
  for (std::size_t k : { 1u, 2u, 3u })
    EXPECT_NEAR(empirical_excess_mass(s, k, 1e9).value, k / 25.0, 1e-12);
  for (std::size_t k : { 1u, 2u, 3u }) {
    double prev = INFINITY;
    for (double lambda = 0.01; lambda < 10; lambda *= 1.3) {
      const double v = empirical_excess_mass(s, k, lambda).value;
      EXPECT_LE(v, prev + 1e-15);
      EXPECT_GE(v, k / 25.0 - 1e-15);
      EXPECT_GE(empirical_excess_mass(s, k + 1, lambda).value, v - 1e-15);
      prev = v;
    }
  }
  EXPECT_THROW(empirical_excess_mass(s, 1, 0.0), InvalidParameter);
  EXPECT_THROW(empirical_excess_mass(s, 0, 1.0), InvalidParameter);
}

TEST(Delta, AntipodalPairAgainstEnumeration)
{
  const std::vector<double> xs{ kPi / 2, 3 * kPi / 2 };
  const auto d = delta_statistic(AngleSample(xs), 1);
  double best = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double lambda = 1e-3 * std::pow(1e6, i / 19999.0);
    best = std::max(best, oracle::excess_mass_bruteforce(xs, 2, lambda) -
                            oracle::excess_mass_bruteforce(xs, 1, lambda));
  }
  EXPECT_NEAR(d.delta, best, 1e-12);
}

TEST(Delta, MatchesDenseLambdaScan)
{
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto xs = random_angles(20 + seed, 9);
    const auto d = delta_statistic(AngleSample(xs), 1);
    double best = 0.0;
    for (int i = 0; i < 4000; ++i) {
      const double lambda = 1e-3 * std::pow(1e6, i / 3999.0);
      best = std::max(best, oracle::excess_mass_bruteforce(xs, 2, lambda) -
                              oracle::excess_mass_bruteforce(xs, 1, lambda));
    }
    EXPECT_GE(d.delta, best - 1e-12);
    const double at_star = oracle::excess_mass_bruteforce(xs, 2, d.lambda_star) -
                           oracle::excess_mass_bruteforce(xs, 1, d.lambda_star);
    EXPECT_NEAR(at_star, d.delta, 1e-12);
  }
}

TEST(Delta, NonNegativeAndInvariant)
{
  RngStream rng(2, 2);
  const auto s = zoo_model("M6").model.sample(200, rng);
  const auto d = delta_statistic(s, 1);
  EXPECT_GE(d.delta, 0.0);
  EXPECT_NEAR(delta_statistic(s.rotated(2.2), 1).delta, d.delta, 1e-10);
  EXPECT_NEAR(delta_statistic(s.reflected(), 1).delta, d.delta, 1e-10);
  EXPECT_EQ(delta_statistic(AngleSample({ 1.0 }), 1).delta, 0.0);
}

TEST(Delta, BimodalSamplesScoreHigher)
{
  // The win rate is close to 0.915, so 100 pairs would sit within two standard
  // errors of the 0.9 threshold; 1000 pairs estimate it to about 0.009.
  int wins = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    RngStream a(31, i);
    RngStream b(31, i);
    const auto bi = zoo_model("M6").model.sample(200, a);
    const auto uni = zoo_model("M1").model.sample(200, b);
    wins += delta_statistic(bi, 1).delta > delta_statistic(uni, 1).delta;
  }
  EXPECT_GE(wins, 900);
}

TEST(ExcessMassTest, ContractAndDeterminism)
{
  RngStream rng(4, 4);
  const auto s = zoo_model("M6").model.sample(80, rng);
  TestOptions o;
  o.B = 15;
  o.seed = 3;
  o.workers = 1;
  const auto a = excess_mass_test(s, o);
  o.workers = 2;
  const auto b = excess_mass_test(s, o);
  EXPECT_EQ(a.replicates, b.replicates);
  EXPECT_GE(a.p_value, 0.0);
  EXPECT_LE(a.p_value, 1.0);
  EXPECT_EQ(a.statistic, "Delta_k+1");
  ASSERT_TRUE(a.lambda_star.has_value());
}

TEST(WatsonU2, ZeroResidualsCenteringAndTranscription)
{
  const std::vector<double> xs{ 0.4, 1.7, 2.2, 3.9, 5.1, 6.0 };
  const AngleSample s(xs);
  for (double h : { 0.2, 0.9 })
    EXPECT_NEAR(watson_u2(s, h), oracle::watson_u2_displayed(xs, h), 1e-12);
  EXPECT_NEAR(watson_u2(s, 0.5, U2Scaling::classical), 36.0 * watson_u2(s, 0.5), 1e-12);

  // With a vanishing bandwidth every residual is 1/(2n), so U^2 vanishes.
  const AngleSample grid({ kTwoPi / 4, kTwoPi / 2, 3 * kTwoPi / 4, kTwoPi - 1e-9 });
  EXPECT_LT(watson_u2(grid, 1e-12), 1e-12);
  EXPECT_THROW(watson_u2(AngleSample({ 1.0 }), 0.3), InsufficientSample);
}

TEST(WatsonU2, RotationAndReflectionInvariant)
{
  const AngleSample s(random_angles(8, 40));
  const double u = watson_u2(s, 0.3);
  EXPECT_NEAR(watson_u2(s.rotated(0.77), 0.3), u, 1e-10);
  EXPECT_NEAR(watson_u2(s.reflected(), 0.3), u, 1e-10);
}

TEST(CurvatureRatios, SymmetryAndFiniteDifference)
{
  const AngleSample two({ 1.0, 1.0 + kPi });
  const auto r = curvature_ratios(two, 0.8, 0.8);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_NEAR(r[0].ratio, r[2].ratio, 1e-8);
  EXPECT_NEAR(r[1].ratio, r[3].ratio, 1e-8);

  const AngleSample s(random_angles(9, 20));
  const double hk = 0.5;
  const double h2 = 0.35;
  const KdeSpec spec(s, h2);
  for (const auto& c : curvature_ratios(s, hk, h2)) {
    EXPECT_GE(c.ratio, 0.0);
    const double x = c.location.value();
    const double e = 1e-4;
    const double fd2 = (kde_density(spec, x + e) - 2 * kde_density(spec, x) + kde_density(spec, x - e)) / (e * e);
    EXPECT_NEAR(kde_derivative(spec, x, 2), fd2, 1e-5 * std::max(1.0, std::abs(fd2)));
  }
}

TEST(CurvatureRatios, VanishingDensityIsAHazard)
{
  EXPECT_THROW(curvature_ratios(AngleSample({ 1.0 }), 0.01, 0.1), DivisionHazard);
}
