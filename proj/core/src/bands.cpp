#include "circmode/bands.hpp"

#include "circmode/error.hpp"
#include "kde_engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

namespace circmode {

namespace {

void check_options(const BandwidthSearchOptions& o)
{
  if (!(o.h_floor > 0.0) || !(o.h_ceil > o.h_floor) || !std::isfinite(o.h_ceil))
    throw InvalidParameter("bandwidth search needs 0 < h_floor < h_ceil");
  if (!(o.bracketing_tol_rel > 0.0 && o.bracketing_tol_rel < 1.0))
    throw InvalidParameter("bracketing tolerance must lie in (0, 1)");
  if (!(o.golden_tol_rel > 0.0 && o.golden_tol_rel < 1.0))
    throw InvalidParameter("golden-section tolerance must lie in (0, 1)");
  if (o.profile_grid_points < 2)
    throw InvalidParameter("profile grid needs at least two points");
}

struct Maximum
{
  double h;
  double value;
};

// Golden-section search for a maximum of fn on [lo, hi], in log h.
Maximum golden_max(const std::function<double(double)>& fn, double lo, double hi, double tol_rel)
{
  constexpr double kInvPhi = 0.6180339887498949;
  double a = std::log(lo);
  double b = std::log(hi);
  const double tol = std::log1p(tol_rel);
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = fn(std::exp(c));
  double fd = fn(std::exp(d));
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = fn(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = fn(std::exp(d));
    }
  }
  return fc >= fd ? Maximum{ std::exp(c), fc } : Maximum{ std::exp(d), fd };
}

// Refines the best point of grid[first..] inside its neighbouring cells.
Maximum refine_grid_max(const std::vector<ProfilePoint>& grid, std::size_t first, double lower_bound,
                        const std::function<double(double)>& fn, double tol_rel)
{
  std::size_t best = first;
  for (std::size_t i = first; i < grid.size(); ++i)
    if (grid[i].log_cv > grid[best].log_cv)
      best = i;
  const double lo = best > first ? grid[best - 1].h : std::max(lower_bound, grid[best].h);
  const double hi = best + 1 < grid.size() ? grid[best + 1].h : grid[best].h;
  Maximum out{ grid[best].h, grid[best].log_cv };
  if (hi > lo) {
    const Maximum refined = golden_max(fn, lo, hi, tol_rel);
    if (refined.value > out.value)
      out = refined;
  }
  return out;
}

} // namespace

void require_distinct(const AngleSample& sample)
{
  if (sample.has_ties())
    throw TieError("sample contains repeated observations");
}

double log_cv_pseudo_likelihood(const AngleSample& sample, double h)
{
  if (sample.size() < 2)
    throw InsufficientSample("log L_CV needs at least two observations");
  require_distinct(sample);
  detail::TrigMoments moments(sample.sorted());
  return detail::log_cv_sorted(sample.sorted(), h, moments);
}

CriticalBandwidthResult critical_bandwidth(const AngleSample& sample, std::size_t k,
                                           const BandwidthSearchOptions& options)
{
  check_options(options);
  if (k == 0)
    throw InvalidParameter("k must be at least 1");

  const auto sorted = sample.sorted();
  detail::TrigMoments moments(sorted);
  auto count = [&](double h) { return detail::count_modes_sorted(sorted, h, moments, false).count; };

  CriticalBandwidthResult out;
  out.k = k;
  out.bracketing_tol_rel = options.bracketing_tol_rel;

  if (count(options.h_ceil) > k)
    throw NoBracket("kernel density keeps more than k modes up to the bandwidth ceiling");

  const double h0 = std::clamp(std::pow(static_cast<double>(sample.size()), -0.2), options.h_floor,
                               options.h_ceil);
  double lower = 0.0;
  double upper = 0.0;
  if (count(h0) <= k) {
    upper = h0;
    for (;;) {
      const double h = std::max(upper / 2.0, options.h_floor);
      const std::size_t c = count(h);
      if (c > k) {
        lower = h;
        break;
      }
      upper = h;
      if (h <= options.h_floor) {
        out.h_k = options.h_floor;
        out.modes_at_hk = c;
        out.modes_below = 0;
        out.floor_hit = true;
        return out;
      }
    }
  } else {
    lower = h0;
    for (;;) {
      const double h = std::min(lower * 2.0, options.h_ceil);
      if (count(h) <= k) {
        upper = h;
        break;
      }
      lower = h;
    }
  }

  while (upper / lower > 1.0 + options.bracketing_tol_rel) {
    const double mid = std::sqrt(lower * upper);
    if (count(mid) <= k)
      upper = mid;
    else
      lower = mid;
  }
  out.h_k = upper;
  out.modes_at_hk = count(upper);
  out.modes_below = count(upper * (1.0 - options.bracketing_tol_rel));
  return out;
}

PseudoLikelihoodProfile likelihood_profile(const AngleSample& sample, double h_k,
                                           const BandwidthSearchOptions& options)
{
  check_options(options);
  if (sample.size() < 2)
    throw InsufficientSample("likelihood profile needs at least two observations");
  require_distinct(sample);
  if (!(h_k > 0.0) || !std::isfinite(h_k))
    throw InvalidParameter("critical bandwidth must be finite and positive");

  const auto sorted = sample.sorted();
  detail::TrigMoments moments(sorted);
  const std::function<double(double)> ell = [&](double h) {
    return detail::log_cv_sorted(sorted, h, moments);
  };

  PseudoLikelihoodProfile out;
  out.h_k = h_k;
  const std::size_t m = options.profile_grid_points;
  const double log_lo = std::log(options.h_floor);
  const double log_hi = std::log(options.h_ceil);
  std::vector<double> hs;
  hs.reserve(m + 1);
  for (std::size_t i = 0; i < m; ++i)
    hs.push_back(std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                     static_cast<double>(m - 1)));
  hs.front() = options.h_floor;
  hs.back() = options.h_ceil;
  const double hk_clamped = std::clamp(h_k, options.h_floor, options.h_ceil);
  hs.push_back(hk_clamped);
  std::sort(hs.begin(), hs.end());
  hs.erase(std::unique(hs.begin(), hs.end()), hs.end());

  out.grid.reserve(hs.size());
  for (double h : hs)
    out.grid.push_back({ h, ell(h) });

  const Maximum unconstrained = refine_grid_max(out.grid, 0, options.h_floor, ell, options.golden_tol_rel);
  out.h_max = unconstrained.h;
  out.ell_max = unconstrained.value;

  if (out.h_max >= hk_clamped) {
    out.h_H0 = out.h_max;
    out.ell_H0 = out.ell_max;
    return out;
  }
  const auto first = static_cast<std::size_t>(
    std::lower_bound(out.grid.begin(), out.grid.end(), hk_clamped,
                     [](const ProfilePoint& p, double h) { return p.h < h; }) -
    out.grid.begin());
  const Maximum constrained = refine_grid_max(out.grid, first, hk_clamped, ell, options.golden_tol_rel);
  out.h_H0 = constrained.h;
  out.ell_H0 = constrained.value;
  if (out.ell_H0 > out.ell_max) {
    out.h_max = out.h_H0;
    out.ell_max = out.ell_H0;
  }
  return out;
}

} // namespace circmode
