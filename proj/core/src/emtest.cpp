#include "circmode/emtest.hpp"

#include "circmode/bands.hpp"
#include "circmode/error.hpp"
#include "circmode/kde.hpp"
#include "circmode/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace circmode {

namespace {

// The sample as a circular sequence point_0, gap_0, point_1, gap_1, ...,
// point_{n-1}, gap_{n-1}; gap_{n-1} wraps from the last point to the first.
// A choice of k disjoint arcs is a choice of k disjoint circular runs of
// this sequence, scored by (points)/n - lambda * (gap length).
struct Sequence
{
  std::vector<double> x;   // sorted observations
  std::vector<double> gap; // gap[i] = x[i+1] - x[i], gap[n-1] wraps
  std::size_t n = 0;

  explicit Sequence(const AngleSample& sample)
    : x(sample.sorted().begin(), sample.sorted().end())
    , gap(sample.size())
    , n(sample.size())
  {
    for (std::size_t i = 0; i + 1 < n; ++i)
      gap[i] = x[i + 1] - x[i];
    gap[n - 1] = x[0] + kTwoPi - x[n - 1];
  }

  std::size_t size() const { return 2 * n; }
  // contribution of element e: (count, length)
  bool is_point(std::size_t e) const { return e % 2 == 0; }
  double length(std::size_t e) const { return is_point(e) ? 0.0 : gap[e / 2]; }
};

// A line value(lambda) = count / n - lambda * length.
struct Line
{
  std::size_t count = 0;
  double length = 0.0;

  double at(double lambda, std::size_t n) const
  {
    return static_cast<double>(count) / static_cast<double>(n) - lambda * length;
  }
  friend bool operator==(const Line&, const Line&) = default;
};

struct State
{
  double value = -std::numeric_limits<double>::infinity();
  Line line;
};

struct Segment
{
  std::size_t first; // element indices, inclusive
  std::size_t last;
};

struct DpResult
{
  State best;
  std::vector<Segment> segments;
};

// Best total over at most k disjoint runs of the linear sequence, with
// sign = +1 (maximize) or -1 (minimize the score).
DpResult linear_k_runs(const Sequence& seq, std::size_t k, double lambda, double sign, bool trace)
{
  const std::size_t len = seq.size();
  const double inv_n = 1.0 / static_cast<double>(seq.n);
  std::vector<State> cur(k + 1);
  std::vector<State> best(k + 1);
  best[0].value = 0.0;

  // started[e * (k+1) + j]: cur[j] at e opened a new run; closed[...]: best[j] at e came from cur[j].
  std::vector<char> started;
  std::vector<char> closed;
  if (trace) {
    started.assign(len * (k + 1), 0);
    closed.assign(len * (k + 1), 0);
  }

  for (std::size_t e = 0; e < len; ++e) {
    const bool point = seq.is_point(e);
    const double length = seq.length(e);
    const double v = sign * ((point ? inv_n : 0.0) - lambda * length);
    for (std::size_t j = k; j >= 1; --j) {
      const bool open_new = best[j - 1].value > cur[j].value;
      State s = open_new ? best[j - 1] : cur[j];
      if (s.value == -std::numeric_limits<double>::infinity()) {
        cur[j] = s;
        continue;
      }
      s.value += v;
      s.line.count += point ? 1 : 0;
      s.line.length += length;
      cur[j] = s;
      const bool improve = cur[j].value > best[j].value;
      if (improve)
        best[j] = cur[j];
      if (trace) {
        started[e * (k + 1) + j] = open_new;
        closed[e * (k + 1) + j] = improve;
      }
    }
  }

  DpResult out;
  std::size_t best_j = 0;
  for (std::size_t j = 1; j <= k; ++j)
    if (best[j].value > best[best_j].value)
      best_j = j;
  out.best = best[best_j];

  if (trace && best_j > 0) {
    // Walk back: find where best[j] was last set, then follow the run.
    std::size_t j = best_j;
    std::ptrdiff_t e = static_cast<std::ptrdiff_t>(len) - 1;
    while (j > 0 && e >= 0) {
      while (e >= 0 && !closed[static_cast<std::size_t>(e) * (k + 1) + j])
        --e;
      if (e < 0)
        break;
      const auto last = static_cast<std::size_t>(e);
      while (e > 0 && !started[static_cast<std::size_t>(e) * (k + 1) + j])
        --e;
      out.segments.push_back({ static_cast<std::size_t>(e), last });
      --e;
      --j;
    }
    std::reverse(out.segments.begin(), out.segments.end());
  }
  return out;
}

struct CircularResult
{
  Line line;
  double value = 0.0;
  std::vector<Arc> arcs;
};

Arc arc_from_points(const Sequence& seq, std::size_t first_point, std::size_t count)
{
  // count consecutive points starting at first_point (circularly)
  const std::size_t last_point = (first_point + count - 1) % seq.n;
  double end = seq.x[last_point];
  if (last_point < first_point || (count > 1 && last_point == first_point))
    end += kTwoPi;
  return Arc{ seq.x[first_point], end, count };
}

CircularResult circular_k_runs(const Sequence& seq, std::size_t k, double lambda, bool trace)
{
  const std::size_t n = seq.n;
  const DpResult direct = linear_k_runs(seq, k, lambda, 1.0, trace);
  const DpResult removed = linear_k_runs(seq, k, lambda, -1.0, trace);

  const Line total{ n, kTwoPi };
  const Line complement{ total.count - removed.best.line.count, kTwoPi - removed.best.line.length };
  const double complement_value = complement.at(lambda, n);
  const double direct_value = direct.best.line.at(lambda, n);

  CircularResult out;
  if (direct_value >= complement_value) {
    out.line = direct.best.line;
    out.value = direct_value;
    if (trace) {
      for (const Segment& s : direct.segments) {
        std::size_t first = s.first + (s.first % 2);
        std::size_t last = s.last - (s.last % 2);
        if (first > last)
          continue;
        out.arcs.push_back(arc_from_points(seq, first / 2, (last - first) / 2 + 1));
      }
    }
    return out;
  }

  out.line = complement;
  out.value = complement_value;
  if (trace) {
    if (removed.segments.empty()) {
      out.arcs.push_back(Arc{ seq.x[0], seq.x[0] + kTwoPi, n });
      return out;
    }
    std::vector<char> keep(seq.size(), 1);
    for (const Segment& s : removed.segments)
      for (std::size_t e = s.first; e <= s.last; ++e)
        keep[e] = 0;
    // Start scanning right after a removed element so no kept run is split.
    const std::size_t len = seq.size();
    std::size_t origin = 0;
    while (keep[origin])
      ++origin;
    std::size_t e = 1;
    while (e <= len) {
      const std::size_t idx = (origin + e) % len;
      if (!keep[idx]) {
        ++e;
        continue;
      }
      std::size_t run_first = idx;
      std::size_t points = 0;
      std::size_t first_point = len;
      while (e <= len && keep[(origin + e) % len]) {
        const std::size_t cur = (origin + e) % len;
        if (seq.is_point(cur)) {
          if (first_point == len)
            first_point = cur;
          ++points;
        }
        ++e;
      }
      (void)run_first;
      if (points > 0)
        out.arcs.push_back(arc_from_points(seq, first_point / 2, points));
    }
    std::sort(out.arcs.begin(), out.arcs.end(),
              [](const Arc& a, const Arc& b) { return a.start < b.start; });
  }
  return out;
}

// Upper hull pieces of E_k(lambda) for lambda in (0, inf), found by
// recursive line intersection.
class Envelope
{
public:
  Envelope(const Sequence& seq, std::size_t k)
    : seq_(seq)
    , k_(k)
  {
    const std::size_t n = seq.n;
    std::vector<double> sorted_gaps = seq.gap;
    std::sort(sorted_gaps.begin(), sorted_gaps.end(), std::greater<>());
    double dropped = 0.0;
    for (std::size_t i = 0; i < std::min(k, n); ++i)
      dropped += sorted_gaps[i];
    double covered = 0.0;
    for (double g : seq.gap)
      covered += g;
    covered -= dropped;
    const Line steep{ n, k >= n ? 0.0 : std::max(covered, 0.0) };
    const Line flat{ std::min(k, n), 0.0 };
    lines_.push_back(steep);
    if (!(flat == steep)) {
      lines_.push_back(flat);
      split(steep, flat, 0);
    }
  }

  const std::vector<double>& breakpoints() const { return breakpoints_; }

  double value(double lambda) const
  {
    double best = -std::numeric_limits<double>::infinity();
    for (const Line& l : lines_)
      best = std::max(best, l.at(lambda, seq_.n));
    return best;
  }

private:
  void split(const Line& a, const Line& b, int depth)
  {
    // a has the larger length (steeper), b the smaller.
    const double dl = a.length - b.length;
    if (!(dl > 0.0))
      return;
    const double lambda = (static_cast<double>(a.count) - static_cast<double>(b.count)) /
                          (static_cast<double>(seq_.n) * dl);
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      return;
    const CircularResult r = circular_k_runs(seq_, k_, lambda, false);
    const double here = a.at(lambda, seq_.n);
    const double tol = 1e-12 * std::max(1.0, std::abs(here));
    const double found = r.line.at(lambda, seq_.n);
    if (found <= here + tol || depth > 4000 || r.line == a || r.line == b) {
      breakpoints_.push_back(lambda);
      return;
    }
    lines_.push_back(r.line);
    split(a, r.line, depth + 1);
    split(r.line, b, depth + 1);
  }

  const Sequence& seq_;
  std::size_t k_;
  std::vector<Line> lines_;
  std::vector<double> breakpoints_;
};

void check_sample(const AngleSample& sample, std::size_t k)
{
  if (k == 0)
    throw InvalidParameter("k must be at least 1");
  if (sample.size() == 0)
    throw InsufficientSample("excess mass needs a non-empty sample");
}

} // namespace

ExcessMassValue empirical_excess_mass(const AngleSample& sample, std::size_t k, double lambda)
{
  check_sample(sample, k);
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw InvalidParameter("lambda must be finite and positive");
  const Sequence seq(sample);
  const CircularResult r = circular_k_runs(seq, k, lambda, true);
  ExcessMassValue out;
  out.k = k;
  out.lambda = lambda;
  out.value = r.value;
  out.intervals = r.arcs;
  return out;
}

DeltaStatistic delta_statistic(const AngleSample& sample, std::size_t k)
{
  check_sample(sample, k);
  DeltaStatistic out;
  out.k = k;
  if (k >= sample.size())
    return out;
  const Sequence seq(sample);
  const Envelope lower(seq, k);
  const Envelope upper(seq, k + 1);
  std::vector<double> candidates = lower.breakpoints();
  candidates.insert(candidates.end(), upper.breakpoints().begin(), upper.breakpoints().end());
  std::sort(candidates.begin(), candidates.end());
  for (double lambda : candidates) {
    const double diff = upper.value(lambda) - lower.value(lambda);
    if (diff > out.delta) {
      out.delta = diff;
      out.lambda_star = lambda;
    }
  }
  return out;
}

TestReport excess_mass_test(const AngleSample& sample, const TestOptions& options)
{
  if (options.B == 0)
    throw InvalidParameter("B must be at least 1");
  if (options.alpha && !(*options.alpha > 0.0 && *options.alpha < 1.0))
    throw InvalidParameter("alpha must lie in (0, 1)");
  require_distinct(sample);

  const CriticalBandwidthResult cb = critical_bandwidth(sample, options.k, options.search);
  const DeltaStatistic observed = delta_statistic(sample, options.k);
  const std::size_t n = sample.size();
  const KdeSpec smoothed(
    AngleSample(std::vector<double>(sample.sorted().begin(), sample.sorted().end())), cb.h_k);

  TestReport report;
  report.statistic = "Delta_k+1";
  report.k = options.k;
  report.n = n;
  report.observed = observed.delta;
  report.h_k = cb.h_k;
  report.floor_hit = cb.floor_hit;
  report.lambda_star = observed.lambda_star;
  report.B = options.B;
  report.master_seed = options.seed;
  report.tuning = options;
  report.replicates.assign(options.B, 0.0);

  parallel_for(options.B, options.workers, [&](std::size_t b) {
    RngStream rng(options.seed, b);
    const AngleSample resample = kde_resample(smoothed, n, rng);
    report.replicates[b] = delta_statistic(resample, options.k).delta;
  });

  report.p_value = bootstrap_p_value(report.observed, report.replicates, options.p_value_rule);
  report.alpha = options.alpha;
  if (options.alpha)
    report.reject = report.p_value < *options.alpha;
  return report;
}

double watson_u2(const AngleSample& sample, double h, U2Scaling scaling)
{
  const std::size_t n = sample.size();
  if (n < 2)
    throw InsufficientSample("U^2 needs at least two observations");
  const KdeSpec spec(sample, h);
  const auto sorted = sample.sorted();
  const double nd = static_cast<double>(n);
  std::vector<double> d(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = static_cast<double>(i + 1) / nd - kde_cdf(spec, sorted[i]);
    mean += d[i];
  }
  mean /= nd;
  double ss = 0.0;
  for (double v : d)
    ss += (v - mean) * (v - mean);
  const double average = ss / nd;
  return scaling == U2Scaling::as_displayed ? average / nd : average * nd;
}

std::vector<CurvatureRatio> curvature_ratios(const AngleSample& sample, double h_k, double h2)
{
  const KdeSpec at_hk(sample, h_k);
  const KdeSpec at_h2(sample, h2);
  const ModeCount modes = count_modes(at_hk);
  std::vector<CurvatureRatio> out;
  auto add = [&](Angle x, bool is_mode) {
    const double f = kde_density(at_hk, x.value());
    if (f < 1e-12)
      throw DivisionHazard("density at a critical point is below 1e-12");
    out.push_back({ x, is_mode, std::abs(kde_derivative(at_h2, x.value(), 2)) / (f * f * f) });
  };
  for (Angle x : modes.mode_locations)
    add(x, true);
  for (Angle x : modes.antimode_locations)
    add(x, false);
  std::sort(out.begin(), out.end(),
            [](const CurvatureRatio& a, const CurvatureRatio& b) { return a.location < b.location; });
  return out;
}

} // namespace circmode
