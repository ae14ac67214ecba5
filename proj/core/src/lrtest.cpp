#include "circmode/lrtest.hpp"

#include "circmode/error.hpp"
#include "circmode/kde.hpp"
#include "circmode/parallel.hpp"

#include <algorithm>

namespace circmode {

namespace {

constexpr int kTieRetries = 3;

// Draws a tie-free sample; attempt 0 uses `rng` itself, retries use substreams.
template<typename Draw>
AngleSample draw_distinct(const RngStream& rng, Draw&& draw)
{
  for (int attempt = 0; attempt <= kTieRetries; ++attempt) {
    RngStream stream = attempt == 0 ? rng : rng.substream(static_cast<std::uint64_t>(attempt));
    AngleSample s = draw(stream);
    if (!s.has_ties())
      return s;
  }
  throw TieError("resample still has ties after retries");
}

} // namespace

double bootstrap_p_value(double observed, const std::vector<double>& replicates, PValueRule rule)
{
  if (replicates.empty())
    throw InvalidParameter("p-value needs at least one replicate");
  const auto b = static_cast<double>(replicates.size());
  if (rule == PValueRule::strict_greater) {
    const auto above = std::count_if(replicates.begin(), replicates.end(),
                                     [&](double r) { return r > observed; });
    return static_cast<double>(above) / b;
  }
  const auto at_least = std::count_if(replicates.begin(), replicates.end(),
                                      [&](double r) { return r >= observed; });
  return (1.0 + static_cast<double>(at_least)) / (b + 1.0);
}

DkResult dk_statistic_given_hk(const AngleSample& sample, double h_k, bool floor_hit,
                               const BandwidthSearchOptions& options)
{
  const PseudoLikelihoodProfile profile = likelihood_profile(sample, h_k, options);
  DkResult out;
  out.h_k = h_k;
  out.floor_hit = floor_hit;
  out.h_max = profile.h_max;
  out.ell_max = profile.ell_max;
  if (floor_hit) {
    out.h_H0 = profile.h_max;
    out.ell_H0 = profile.ell_max;
    return out;
  }
  out.h_H0 = profile.h_H0;
  out.ell_H0 = profile.ell_H0;
  const double d = 2.0 * (profile.ell_max - profile.ell_H0);
  out.d = d < kDkZeroThreshold ? 0.0 : d;
  return out;
}

DkResult dk_statistic(const AngleSample& sample, std::size_t k, const BandwidthSearchOptions& options)
{
  if (sample.size() < 2)
    throw InsufficientSample("D_k needs at least two observations");
  require_distinct(sample);
  const CriticalBandwidthResult cb = critical_bandwidth(sample, k, options);
  return dk_statistic_given_hk(sample, cb.h_k, cb.floor_hit, options);
}

TestReport run_test(const AngleSample& sample, const TestOptions& options)
{
  if (options.B == 0)
    throw InvalidParameter("B must be at least 1");
  if (options.alpha && !(*options.alpha > 0.0 && *options.alpha < 1.0))
    throw InvalidParameter("alpha must lie in (0, 1)");

  const DkResult observed = dk_statistic(sample, options.k, options.search);
  const std::size_t n = sample.size();
  // Resampling from the sorted view keeps the p-value independent of input order.
  const KdeSpec smoothed(AngleSample(std::vector<double>(sample.sorted().begin(), sample.sorted().end())),
                         observed.h_k);

  TestReport report;
  report.statistic = "D_k";
  report.k = options.k;
  report.n = n;
  report.observed = observed.d;
  report.h_k = observed.h_k;
  report.floor_hit = observed.floor_hit;
  report.h_max = observed.h_max;
  report.h_H0 = observed.h_H0;
  report.B = options.B;
  report.master_seed = options.seed;
  report.tuning = options;
  report.replicates.assign(options.B, 0.0);

  parallel_for(options.B, options.workers, [&](std::size_t b) {
    const RngStream rng(options.seed, b);
    const AngleSample resample =
      draw_distinct(rng, [&](RngStream& s) { return kde_resample(smoothed, n, s); });
    const DkResult r = options.replicate_constraint == ReplicateConstraint::recompute
                         ? dk_statistic(resample, options.k, options.search)
                         : dk_statistic_given_hk(resample, observed.h_k, observed.floor_hit,
                                                 options.search);
    report.replicates[b] = r.d;
  });

  report.p_value = bootstrap_p_value(report.observed, report.replicates, options.p_value_rule);
  report.alpha = options.alpha;
  if (options.alpha)
    report.reject = report.p_value < *options.alpha;
  return report;
}

NullAtoms null_statistic_atoms(const CircularModel& model, std::size_t n, std::size_t M,
                               std::size_t k, std::uint64_t seed, unsigned workers,
                               const BandwidthSearchOptions& options)
{
  if (M == 0)
    throw InvalidParameter("M must be at least 1");
  if (n < 2)
    throw InsufficientSample("null simulation needs n >= 2");
  NullAtoms out;
  out.statistics.assign(M, 0.0);
  parallel_for(M, workers, [&](std::size_t m) {
    const RngStream rng(seed, m);
    const AngleSample s = draw_distinct(rng, [&](RngStream& r) { return model.sample(n, r); });
    out.statistics[m] = dk_statistic(s, k, options).d;
  });
  std::size_t zeros = 0;
  for (double d : out.statistics) {
    if (d == 0.0)
      ++zeros;
    else
      out.nonzero_replicates.push_back(d);
  }
  out.p_zero_hat = static_cast<double>(zeros) / static_cast<double>(M);
  return out;
}

} // namespace circmode
