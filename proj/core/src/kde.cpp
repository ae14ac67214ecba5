#include "circmode/kde.hpp"

#include "circmode/circdist.hpp"
#include "circmode/error.hpp"
#include "kde_engine.hpp"

#include <cmath>
#include <utility>

namespace circmode {

KdeSpec::KdeSpec(AngleSample sample, double h, std::size_t eval_grid_size)
  : sample_(std::move(sample))
  , h_(h)
  , eval_grid_size_(eval_grid_size)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw InvalidParameter("bandwidth must be finite and positive");
  if (eval_grid_size < 16)
    throw InvalidParameter("evaluation grid needs at least 16 points");
}

double kde_density(const KdeSpec& spec, double x)
{
  const double s2 = spec.bandwidth() * spec.bandwidth();
  double sum = 0.0;
  for (double xi : spec.sample().values())
    sum += wn_density(x, xi, s2);
  return sum / static_cast<double>(spec.sample().size());
}

double kde_loo_density(const KdeSpec& spec, std::size_t i)
{
  const auto values = spec.sample().values();
  const std::size_t n = values.size();
  if (n < 2)
    throw InsufficientSample("leave-one-out density needs at least two observations");
  if (i >= n)
    throw InvalidParameter("observation index out of range");
  const double s2 = spec.bandwidth() * spec.bandwidth();
  double sum = 0.0;
  for (std::size_t m = 0; m < n; ++m)
    if (m != i)
      sum += wn_density(values[i], values[m], s2);
  return sum / static_cast<double>(n - 1);
}

double kde_derivative(const KdeSpec& spec, double x, int order)
{
  if (order != 1 && order != 2)
    throw InvalidParameter("derivative order must be 1 or 2");
  const double s2 = spec.bandwidth() * spec.bandwidth();
  double sum = 0.0;
  for (double xi : spec.sample().values()) {
    const WnDerivatives d = wn_derivatives(x, xi, s2);
    sum += order == 1 ? d.first : d.second;
  }
  return sum / static_cast<double>(spec.sample().size());
}

ModeCount count_modes(const KdeSpec& spec)
{
  const auto sorted = spec.sample().sorted();
  detail::TrigMoments moments(sorted);
  return detail::count_modes_sorted(sorted, spec.bandwidth(), moments, true);
}

double kde_cdf(const KdeSpec& spec, double x)
{
  if (!(x > 0.0))
    return 0.0;
  if (x >= kTwoPi)
    return 1.0;
  const double s2 = spec.bandwidth() * spec.bandwidth();
  double sum = 0.0;
  for (double xi : spec.sample().values())
    sum += wn_cdf_segment(0.0, x, xi, s2);
  return sum / static_cast<double>(spec.sample().size());
}

AngleSample kde_resample(const KdeSpec& spec, std::size_t n_out, RngStream& rng)
{
  if (n_out == 0)
    throw InvalidParameter("resample size must be at least 1");
  const auto values = spec.sample().values();
  std::vector<double> out(n_out);
  for (double& v : out) {
    const auto idx = static_cast<std::size_t>(rng.uniform_index(values.size()));
    v = values[idx] + spec.bandwidth() * rng.normal();
  }
  return AngleSample(std::move(out));
}

} // namespace circmode
