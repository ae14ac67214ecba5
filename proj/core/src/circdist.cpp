#include "circmode/circdist.hpp"

#include "circmode/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace circmode {

namespace {

constexpr double kInvSqrtTwoPi = 0.3989422804014327;
constexpr double kInvSqrtTwo = 0.7071067811865476;

void require_sigma2(double sigma2)
{
  if (!std::isfinite(sigma2) || !(sigma2 > 0.0))
    throw InvalidParameter("wrapped normal variance must be finite and positive, got " +
                           std::to_string(sigma2));
}

// Wraps m in [-M, M] leave out terms below ~1e-18 of the leading one.
int spatial_wraps(double sigma)
{
  return static_cast<int>(std::ceil((9.2 * sigma + kPi) / kTwoPi));
}

int fourier_terms(double sigma)
{
  return static_cast<int>(std::ceil(9.2 / sigma)) + 1;
}

// Phi(u) - Phi(l) for l <= u without cancellation in either tail.
double normal_mass(double l, double u)
{
  if (l >= 0.0)
    return 0.5 * (std::erfc(l * kInvSqrtTwo) - std::erfc(u * kInvSqrtTwo));
  if (u <= 0.0)
    return 0.5 * (std::erfc(-u * kInvSqrtTwo) - std::erfc(-l * kInvSqrtTwo));
  return 1.0 - 0.5 * std::erfc(u * kInvSqrtTwo) - 0.5 * std::erfc(-l * kInvSqrtTwo);
}

} // namespace

WnDerivatives wn_derivatives(double x, double mu, double sigma2)
{
  require_sigma2(sigma2);
  const double sigma = std::sqrt(sigma2);
  const double d = angular_difference(x, mu);
  WnDerivatives out{ 0.0, 0.0, 0.0 };

  if (sigma <= kPi) {
    const int wraps = spatial_wraps(sigma);
    const double c = kInvSqrtTwoPi / sigma;
    for (int m = -wraps; m <= wraps; ++m) {
      const double u = d + kTwoPi * m;
      const double t = c * std::exp(-0.5 * u * u / sigma2);
      out.value += t;
      out.first -= u / sigma2 * t;
      out.second += (u * u / sigma2 - 1.0) / sigma2 * t;
    }
    return out;
  }

  const int terms = fourier_terms(sigma);
  double value = 0.0;
  for (int p = 1; p <= terms; ++p) {
    const double w = std::exp(-0.5 * p * p * sigma2);
    value += w * std::cos(p * d);
    out.first -= p * w * std::sin(p * d);
    out.second -= p * p * w * std::cos(p * d);
  }
  out.value = (1.0 + 2.0 * value) / kTwoPi;
  out.first /= kPi;
  out.second /= kPi;
  return out;
}

double wn_density(double x, double mu, double sigma2)
{
  require_sigma2(sigma2);
  const double sigma = std::sqrt(sigma2);
  const double d = angular_difference(x, mu);

  if (sigma <= kPi) {
    const int wraps = spatial_wraps(sigma);
    double sum = 0.0;
    for (int m = -wraps; m <= wraps; ++m) {
      const double u = d + kTwoPi * m;
      sum += std::exp(-0.5 * u * u / sigma2);
    }
    return kInvSqrtTwoPi / sigma * sum;
  }

  const int terms = fourier_terms(sigma);
  double sum = 0.0;
  for (int p = 1; p <= terms; ++p)
    sum += std::exp(-0.5 * p * p * sigma2) * std::cos(p * d);
  return std::max(0.0, (1.0 + 2.0 * sum) / kTwoPi);
}

double wn_cdf_segment(double a, double b, double mu, double sigma2)
{
  require_sigma2(sigma2);
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(mu))
    throw InvalidParameter("wn_cdf_segment needs finite arguments");
  constexpr double slack = 1e-12;
  if (a > b)
    throw InvalidRange("wn_cdf_segment needs a <= b");
  if (a < -slack || b > kTwoPi + slack)
    throw InvalidRange("wn_cdf_segment needs 0 <= a <= b <= 2pi");
  a = std::clamp(a, 0.0, kTwoPi);
  b = std::clamp(b, 0.0, kTwoPi);
  if (a == b)
    return 0.0;

  const double sigma = std::sqrt(sigma2);
  mu = normalize_angle(mu);
  double mass = 0.0;

  if (sigma <= kPi) {
    const double reach = 9.2 * sigma;
    const auto m_lo = static_cast<long>(std::ceil((-reach - (b - mu)) / kTwoPi));
    const auto m_hi = static_cast<long>(std::floor((reach - (a - mu)) / kTwoPi));
    for (long m = m_lo; m <= m_hi; ++m) {
      const double shift = kTwoPi * static_cast<double>(m) - mu;
      mass += normal_mass((a + shift) / sigma, (b + shift) / sigma);
    }
  } else {
    const int terms = fourier_terms(sigma);
    double sum = 0.0;
    for (int p = 1; p <= terms; ++p) {
      const double w = std::exp(-0.5 * p * p * sigma2);
      sum += w * (std::sin(p * (b - mu)) - std::sin(p * (a - mu))) / p;
    }
    mass = (b - a) / kTwoPi + sum / kPi;
  }
  return std::clamp(mass, 0.0, 1.0);
}

// --- models -----------------------------------------------------------------

CircularModel::CircularModel(Variant v)
  : variant_(std::move(v))
{}

CircularModel CircularModel::von_mises(double mu, double kappa)
{
  if (!std::isfinite(mu) || !std::isfinite(kappa) || kappa < 0.0)
    throw InvalidParameter("von Mises needs finite mu and kappa >= 0");
  return CircularModel(VonMises{ normalize_angle(mu), kappa });
}

CircularModel CircularModel::sine_skewed_von_mises(double mu, double kappa, double lambda)
{
  if (!std::isfinite(mu) || !std::isfinite(kappa) || kappa < 0.0)
    throw InvalidParameter("sine-skewed von Mises needs finite mu and kappa >= 0");
  if (!(lambda >= -1.0 && lambda <= 1.0))
    throw InvalidParameter("sine-skewed von Mises needs lambda in [-1, 1]");
  return CircularModel(SineSkewedVonMises{ normalize_angle(mu), kappa, lambda });
}

CircularModel CircularModel::wrapped_normal(double mu, double sigma2)
{
  require_sigma2(sigma2);
  if (!std::isfinite(mu))
    throw InvalidParameter("wrapped normal needs a finite mu");
  return CircularModel(WrappedNormal{ normalize_angle(mu), sigma2 });
}

CircularModel CircularModel::scaled_beta(double a, double b, double lo, double hi)
{
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw InvalidParameter("scaled beta needs a, b > 0");
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi) || hi > lo + kTwoPi)
    throw InvalidParameter("scaled beta needs lo < hi <= lo + 2pi");
  return CircularModel(ScaledBeta{ a, b, lo, hi });
}

CircularModel CircularModel::mixture(std::vector<double> weights,
                                     std::vector<CircularModel> components)
{
  if (weights.empty() || weights.size() != components.size())
    throw InvalidParameter("mixture needs one weight per component");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw InvalidParameter("mixture weights must be nonnegative");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidParameter("mixture weights must sum to 1");
  return CircularModel(Mixture{ std::move(weights), std::move(components) });
}

namespace {

double von_mises_density(double x, double mu, double kappa)
{
  return std::exp(kappa * std::cos(x - mu) - std::log(kTwoPi) - log_bessel_i0(kappa));
}

// Best & Fisher rejection sampler with a wrapped-Cauchy envelope.
double von_mises_draw(double mu, double kappa, RngStream& rng)
{
  if (kappa < 1e-8)
    return normalize_angle(kTwoPi * rng.uniform());
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    const double u3 = rng.uniform();
    const double z = std::cos(kPi * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      const double theta = std::acos(std::clamp(f, -1.0, 1.0));
      return normalize_angle(u3 > 0.5 ? mu + theta : mu - theta);
    }
  }
}

} // namespace

double CircularModel::density(double x) const
{
  return std::visit(
    [x](const auto& m) -> double {
      using T = std::decay_t<decltype(m)>;
      if constexpr (std::is_same_v<T, VonMises>) {
        return von_mises_density(x, m.mu, m.kappa);
      } else if constexpr (std::is_same_v<T, SineSkewedVonMises>) {
        return von_mises_density(x, m.mu, m.kappa) * (1.0 + m.lambda * std::sin(x - m.mu));
      } else if constexpr (std::is_same_v<T, WrappedNormal>) {
        return wn_density(x, m.mu, m.sigma2);
      } else if constexpr (std::is_same_v<T, ScaledBeta>) {
        double t = std::fmod(x - m.lo, kTwoPi);
        if (t < 0.0)
          t += kTwoPi;
        const double width = m.hi - m.lo;
        if (t > width)
          return 0.0;
        const double u = t / width;
        const double log_b = std::lgamma(m.a) + std::lgamma(m.b) - std::lgamma(m.a + m.b);
        if ((u == 0.0 && m.a > 1.0) || (u == 1.0 && m.b > 1.0))
          return 0.0;
        return std::exp((m.a - 1.0) * std::log(u) + (m.b - 1.0) * std::log1p(-u) - log_b) /
               width;
      } else {
        double sum = 0.0;
        for (std::size_t i = 0; i < m.weights.size(); ++i)
          sum += m.weights[i] * m.components[i].density(x);
        return sum;
      }
    },
    variant_);
}

double CircularModel::draw(RngStream& rng) const
{
  return std::visit(
    [&rng](const auto& m) -> double {
      using T = std::decay_t<decltype(m)>;
      if constexpr (std::is_same_v<T, VonMises>) {
        return von_mises_draw(m.mu, m.kappa, rng);
      } else if constexpr (std::is_same_v<T, SineSkewedVonMises>) {
        // Keep theta with probability (1 + lambda sin(theta - mu)) / 2,
        // otherwise reflect it about mu.
        const double theta = von_mises_draw(m.mu, m.kappa, rng);
        const double keep = 0.5 * (1.0 + m.lambda * std::sin(theta - m.mu));
        return rng.uniform() < keep ? theta : normalize_angle(2.0 * m.mu - theta);
      } else if constexpr (std::is_same_v<T, WrappedNormal>) {
        return normalize_angle(m.mu + std::sqrt(m.sigma2) * rng.normal());
      } else if constexpr (std::is_same_v<T, ScaledBeta>) {
        return normalize_angle(m.lo + (m.hi - m.lo) * rng.beta(m.a, m.b));
      } else {
        const double u = rng.uniform();
        double cumulative = 0.0;
        std::size_t pick = m.weights.size() - 1;
        for (std::size_t i = 0; i < m.weights.size(); ++i) {
          cumulative += m.weights[i];
          if (u < cumulative) {
            pick = i;
            break;
          }
        }
        return m.components[pick].draw(rng);
      }
    },
    variant_);
}

AngleSample CircularModel::sample(std::size_t n, RngStream& rng) const
{
  if (n == 0)
    throw InvalidParameter("model_sample needs n >= 1");
  std::vector<double> draws(n);
  for (double& x : draws)
    x = draw(rng);
  return AngleSample(std::move(draws));
}

double model_density(const CircularModel& m, double x)
{
  return m.density(x);
}

AngleSample model_sample(const CircularModel& m, std::size_t n, RngStream& rng)
{
  return m.sample(n, rng);
}

} // namespace circmode
