#include "kde_engine.hpp"

#include "circmode/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace circmode::detail {

namespace {

constexpr double kInvSqrtTwoPi = 0.3989422804014327;
constexpr double kLogSqrtTwoPi = 0.9189385332046728;
// Images whose Gaussian weight is below exp(-42) of the nearest one are dropped.
constexpr double kRelativeWindowExponent = 42.0;
constexpr std::size_t kMaxFourierOrder = 20000;
constexpr double kDirectMaxBandwidth = 1.0;

// --- FFTW plan cache --------------------------------------------------------

struct FftwBuffer
{
  void operator()(void* p) const { fftw_free(p); }
};

class PlanCache
{
public:
  static PlanCache& instance()
  {
    static PlanCache cache;
    return cache;
  }

  fftw_plan c2r(std::size_t size)
  {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(size);
    if (it != plans_.end())
      return it->second;
    auto* in = fftw_alloc_complex(size / 2 + 1);
    auto* out = fftw_alloc_real(size);
    fftw_plan plan = fftw_plan_dft_c2r_1d(static_cast<int>(size), in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(size, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

private:
  PlanCache() = default;
  ~PlanCache()
  {
    for (auto& [size, plan] : plans_)
      fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> plans_;
};

int sign_of(double v)
{
  return (v > 0.0) - (v < 0.0);
}

} // namespace

double ScaledDerivs::density() const
{
  return f * std::exp(log_scale);
}
double ScaledDerivs::first() const
{
  return d1 * std::exp(log_scale);
}
double ScaledDerivs::second() const
{
  return d2 * std::exp(log_scale);
}

// --- moments ----------------------------------------------------------------

TrigMoments::TrigMoments(std::span<const double> sorted)
  : step_(sorted.size())
  , power_(sorted.size(), std::complex<double>(1.0, 0.0))
  , coeffs_{ std::complex<double>(1.0, 0.0) }
{
  for (std::size_t i = 0; i < sorted.size(); ++i)
    step_[i] = std::polar(1.0, -sorted[i]);
}

void TrigMoments::ensure(std::size_t order)
{
  if (order <= this->order())
    return;
  const double inv_n = 1.0 / static_cast<double>(step_.size());
  coeffs_.reserve(order + 1);
  for (std::size_t p = this->order() + 1; p <= order; ++p) {
    std::complex<double> sum(0.0, 0.0);
    const bool renormalize = (p % 64) == 0;
    for (std::size_t i = 0; i < step_.size(); ++i) {
      power_[i] *= step_[i];
      if (renormalize)
        power_[i] /= std::abs(power_[i]);
      sum += power_[i];
    }
    coeffs_.push_back(sum * inv_n);
  }
}

std::size_t fourier_order(double h)
{
  return std::max<std::size_t>(
    1, static_cast<std::size_t>(std::ceil(std::sqrt(2.0 * kRelativeWindowExponent) / h)));
}

std::size_t mode_grid_size(double h, std::size_t min_size)
{
  const double needed = std::ceil(10.0 * kTwoPi / h);
  std::size_t size = std::max<std::size_t>(min_size, 16);
  if (needed > static_cast<double>(size))
    size = static_cast<std::size_t>(needed);
  return std::bit_ceil(size);
}

// --- kernel sum -------------------------------------------------------------

KernelSum::KernelSum(std::span<const double> sorted, double h, TrigMoments& moments, Route route)
  : sorted_(sorted)
  , h_(h)
  , moments_(moments)
  , route_(route)
{
  if (route_ == Route::fourier) {
    order_ = fourier_order(h);
    moments_.ensure(order_);
    weights_.resize(order_ + 1);
    for (std::size_t p = 0; p <= order_; ++p) {
      const double pd = static_cast<double>(p);
      weights_[p] = std::exp(-0.5 * pd * pd * h * h);
    }
  }
}

Route KernelSum::choose_grid_route(std::size_t n, double h, std::size_t grid_size)
{
  const std::size_t order = fourier_order(h);
  if (order >= grid_size / 2 || order > kMaxFourierOrder)
    return Route::direct;
  // Wide kernels overlap many images; their direct sum cancels catastrophically
  // in the derivatives, which are exponentially small there.
  if (h > kDirectMaxBandwidth)
    return Route::fourier;
  const double g = static_cast<double>(grid_size);
  const double nd = static_cast<double>(n);
  const double fourier_cost = 6.0 * g * std::log2(g) + nd * static_cast<double>(order);
  const double neighbours = nd * 2.0 * 9.2 * h / kTwoPi + 1.0;
  const double direct_cost = 6.0 * g * neighbours;
  return fourier_cost <= direct_cost ? Route::fourier : Route::direct;
}

ScaledDerivs KernelSum::direct_at(double x) const
{
  const std::size_t n = sorted_.size();
  const double inv_h2 = 1.0 / (h_ * h_);
  const auto idx =
    static_cast<std::size_t>(std::lower_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin());

  auto forward_distance = [&](std::size_t k) {
    const std::size_t pos = idx + k;
    return sorted_[pos % n] + kTwoPi * static_cast<double>(pos / n) - x;
  };
  auto backward_distance = [&](std::size_t k) {
    // position idx - k, k >= 1
    const std::size_t wraps = (k > idx) ? (k - idx + n - 1) / n : 0;
    const std::size_t pos = idx + wraps * n - k;
    return x - (sorted_[pos] - kTwoPi * static_cast<double>(wraps));
  };

  const double u_min = std::min(forward_distance(0), backward_distance(1));
  const double window = std::sqrt(u_min * u_min + 2.0 * kRelativeWindowExponent * h_ * h_);
  const double base = u_min * u_min;

  ScaledDerivs out;
  auto accumulate = [&](double d) {
    // d = x - X (signed offset of the image)
    const double e = std::exp(-0.5 * (d * d - base) * inv_h2);
    out.f += e;
    out.d1 -= d * inv_h2 * e;
    out.d2 += (d * d * inv_h2 - 1.0) * inv_h2 * e;
  };
  for (std::size_t k = 0;; ++k) {
    const double u = forward_distance(k);
    if (u > window)
      break;
    accumulate(-u);
  }
  for (std::size_t k = 1;; ++k) {
    const double u = backward_distance(k);
    if (u > window)
      break;
    accumulate(u);
  }
  const double c = kInvSqrtTwoPi / (h_ * static_cast<double>(n));
  out.f *= c;
  out.d1 *= c;
  out.d2 *= c;
  out.log_scale = -0.5 * base * inv_h2;
  return out;
}

ScaledDerivs KernelSum::fourier_at(double x) const
{
  const std::complex<double> z = std::polar(1.0, x);
  std::complex<double> zp(1.0, 0.0);
  double sum_f = 0.0;
  double sum_d1 = 0.0;
  double sum_d2 = 0.0;
  for (std::size_t p = 1; p <= order_; ++p) {
    zp *= z;
    const std::complex<double> term = weights_[p] * moments_[p] * zp;
    const double pd = static_cast<double>(p);
    sum_f += term.real();
    sum_d1 -= pd * term.imag();
    sum_d2 -= pd * pd * term.real();
  }
  ScaledDerivs out;
  out.f = (1.0 + 2.0 * sum_f) / kTwoPi;
  out.d1 = sum_d1 / kPi;
  out.d2 = sum_d2 / kPi;
  return out;
}

ScaledDerivs KernelSum::at(double x) const
{
  if (route_ == Route::direct)
    return direct_at(x);
  ScaledDerivs r = fourier_at(x);
  if (!(r.f >= kFourierFloor))
    return direct_at(x);
  return r;
}

std::vector<ScaledDerivs> KernelSum::fourier_grid(std::size_t grid_size) const
{
  const std::size_t half = grid_size / 2;
  std::unique_ptr<fftw_complex, FftwBuffer> in(fftw_alloc_complex(half + 1));
  std::unique_ptr<double, FftwBuffer> out(fftw_alloc_real(grid_size));
  fftw_plan plan = PlanCache::instance().c2r(grid_size);

  std::vector<ScaledDerivs> result(grid_size);
  for (int which = 0; which < 3; ++which) {
    fftw_complex* y = in.get();
    for (std::size_t p = 0; p <= half; ++p) {
      y[p][0] = 0.0;
      y[p][1] = 0.0;
    }
    if (which == 0)
      y[0][0] = 1.0 / kTwoPi;
    for (std::size_t p = 1; p <= order_; ++p) {
      const std::complex<double> c = weights_[p] * moments_[p] / kTwoPi;
      const double pd = static_cast<double>(p);
      std::complex<double> v;
      if (which == 0)
        v = c;
      else if (which == 1)
        v = std::complex<double>(0.0, pd) * c;
      else
        v = -pd * pd * c;
      y[p][0] = v.real();
      y[p][1] = v.imag();
    }
    fftw_execute_dft_c2r(plan, in.get(), out.get());
    const double* r = out.get();
    for (std::size_t j = 0; j < grid_size; ++j) {
      if (which == 0)
        result[j].f = r[j];
      else if (which == 1)
        result[j].d1 = r[j];
      else
        result[j].d2 = r[j];
    }
  }

  for (std::size_t j = 0; j < grid_size; ++j)
    if (!(result[j].f >= kFourierFloor))
      result[j] = direct_at(kTwoPi * static_cast<double>(j) / static_cast<double>(grid_size));
  return result;
}

std::vector<ScaledDerivs> KernelSum::grid(std::size_t grid_size) const
{
  if (route_ == Route::fourier && order_ < grid_size / 2)
    return fourier_grid(grid_size);
  std::vector<ScaledDerivs> result(grid_size);
  for (std::size_t j = 0; j < grid_size; ++j)
    result[j] = at(kTwoPi * static_cast<double>(j) / static_cast<double>(grid_size));
  return result;
}

// --- mode counting ----------------------------------------------------------

namespace {

struct CriticalEvent
{
  double lo; // d1 has sign `lo_sign` at lo and the opposite sign at hi
  double hi;
  int lo_sign;
  bool is_max;
};

double refine_root(const KernelSum& ks, double lo, double hi, int lo_sign, bool second)
{
  for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const ScaledDerivs d = ks.at(mid);
    const int s = sign_of(second ? d.d2 : d.d1);
    if (s == 0)
      return mid;
    if (s == lo_sign)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace

bool numerically_uniform(double h, TrigMoments& moments)
{
  // Terms past fourier_order(h) weigh less than exp(-42) together.
  if (2.0 * std::exp(-0.5 * h * h) < kUniformTolerance)
    return true;
  const std::size_t order = fourier_order(h);
  double total = 0.0;
  for (std::size_t p = 1; p <= order; ++p) {
    const double w = std::exp(-0.5 * static_cast<double>(p * p) * h * h);
    if (2.0 * w * static_cast<double>(order - p + 1) + total < kUniformTolerance)
      return true;
    moments.ensure(p);
    total += 2.0 * w * std::abs(moments[p]);
    if (total >= kUniformTolerance)
      return false;
  }
  return true;
}

ModeCount count_modes_sorted(std::span<const double> sorted, double h, TrigMoments& moments,
                             bool locate)
{
  if (numerically_uniform(h, moments)) {
    // The largest harmonic w_p Re(a_p e^{ipx}) peaks at -arg(a_p)/p.
    ModeCount out;
    out.count = 1;
    if (locate) {
      const std::size_t top = std::min<std::size_t>(fourier_order(h), 8);
      moments.ensure(top);
      std::size_t best = 1;
      double best_weight = -1.0;
      for (std::size_t p = 1; p <= top; ++p) {
        const double w = std::abs(moments[p]) * std::exp(-0.5 * static_cast<double>(p * p) * h * h);
        if (w > best_weight) {
          best_weight = w;
          best = p;
        }
      }
      const double peak = -std::arg(moments[best]) / static_cast<double>(best);
      out.mode_locations.emplace_back(normalize_angle(peak));
      out.antimode_locations.emplace_back(normalize_angle(peak + kPi / static_cast<double>(best)));
    }
    return out;
  }

  const std::size_t grid_size = mode_grid_size(h);
  const Route route = KernelSum::choose_grid_route(sorted.size(), h, grid_size);
  const KernelSum ks(sorted, h, moments, route);
  const std::vector<ScaledDerivs> g = ks.grid(grid_size);
  const double step = kTwoPi / static_cast<double>(grid_size);
  auto x_of = [&](std::size_t j) { return step * static_cast<double>(j); };


  std::vector<int> sign(grid_size);
  std::size_t nonzero = 0;
  for (std::size_t j = 0; j < grid_size; ++j) {
    sign[j] = sign_of(g[j].d1);
    nonzero += sign[j] != 0;
  }
  if (nonzero == 0)
    throw DegenerateDensity("kernel density derivative vanishes on the whole circle");
  {
    std::size_t run = 0;
    for (std::size_t j = 0; j < grid_size + 2; ++j) {
      run = sign[j % grid_size] == 0 ? run + 1 : 0;
      if (run >= 3)
        throw DegenerateDensity("kernel density derivative vanishes on an arc");
    }
  }

  std::size_t first = 0;
  while (sign[first] == 0)
    ++first;

  std::vector<CriticalEvent> events;
  std::size_t prev = first;
  for (std::size_t step_count = 1; step_count <= grid_size; ++step_count) {
    const std::size_t j = (first + step_count) % grid_size;
    if (sign[j] == 0)
      continue;
    const double x_prev = x_of(prev);
    double x_next = x_of(j);
    if (x_next <= x_prev)
      x_next += kTwoPi;

    if (sign[j] != sign[prev]) {
      events.push_back({ x_prev, x_next, sign[prev], sign[prev] > 0 });
    } else if (step_count > 0 && (j == (prev + 1) % grid_size)) {
      // Two critical points hidden inside one cell show up as a sign change of f''
      // with f' passing near zero.
      const ScaledDerivs& a = g[prev];
      const ScaledDerivs& b = g[j];
      const bool inflection = sign_of(a.d2) * sign_of(b.d2) < 0;
      const bool near_zero =
        std::abs(a.d1) < step * std::abs(a.d2) || std::abs(b.d1) < step * std::abs(b.d2);
      if (inflection && near_zero) {
        const double r = refine_root(ks, x_prev, x_next, sign_of(a.d2), true);
        const int s_mid = sign_of(ks.at(r).d1);
        if (s_mid != 0 && s_mid != sign[prev]) {
          events.push_back({ x_prev, r, sign[prev], sign[prev] > 0 });
          events.push_back({ r, x_next, s_mid, s_mid > 0 });
        }
      }
    }
    prev = j;
  }

  ModeCount out;
  for (const CriticalEvent& e : events)
    out.count += e.is_max;
  const std::size_t minima = events.size() - out.count;
  if (minima != out.count)
    throw DegenerateDensity("unbalanced mode/antimode count");

  if (locate) {
    std::vector<std::pair<double, bool>> located;
    located.reserve(events.size());
    for (const CriticalEvent& e : events)
      located.emplace_back(normalize_angle(refine_root(ks, e.lo, e.hi, e.lo_sign, false)),
                           e.is_max);
    std::sort(located.begin(), located.end());
    for (const auto& [x, is_max] : located)
      (is_max ? out.mode_locations : out.antimode_locations).emplace_back(x);
  }
  return out;
}

// --- leave-one-out ----------------------------------------------------------

namespace {

double direct_log_loo(std::span<const double> sorted, std::size_t i, double h)
{
  const std::size_t n = sorted.size();
  const double x = sorted[i];
  auto forward_distance = [&](std::size_t k) {
    const std::size_t pos = i + k;
    return sorted[pos % n] + kTwoPi * static_cast<double>(pos / n) - x;
  };
  auto backward_distance = [&](std::size_t k) {
    const std::size_t wraps = (k > i) ? (k - i + n - 1) / n : 0;
    const std::size_t pos = i + wraps * n - k;
    return x - (sorted[pos] - kTwoPi * static_cast<double>(wraps));
  };

  const double u_min = std::min(forward_distance(1), backward_distance(1));
  const double window = std::sqrt(u_min * u_min + 2.0 * kRelativeWindowExponent * h * h);
  const double base = u_min * u_min;
  const double inv_2h2 = 0.5 / (h * h);

  double sum = 0.0;
  for (std::size_t k = 1;; ++k) {
    if (k % n == 0)
      continue;
    const double u = forward_distance(k);
    if (u > window)
      break;
    sum += std::exp(-(u * u - base) * inv_2h2);
  }
  for (std::size_t k = 1;; ++k) {
    if (k % n == 0)
      continue;
    const double u = backward_distance(k);
    if (u > window)
      break;
    sum += std::exp(-(u * u - base) * inv_2h2);
  }
  return -base * inv_2h2 + std::log(sum) - std::log(h) - kLogSqrtTwoPi -
         std::log(static_cast<double>(n - 1));
}

} // namespace

std::vector<double> log_loo_sorted(std::span<const double> sorted, double h, TrigMoments& moments)
{
  const std::size_t n = sorted.size();
  if (n < 2)
    throw InsufficientSample("leave-one-out needs at least two observations");
  if (!(h > 0.0) || !std::isfinite(h))
    throw InvalidParameter("bandwidth must be finite and positive");

  const double nd = static_cast<double>(n);
  const std::size_t order = fourier_order(h);
  const double fourier_cost =
    1.5 * nd * static_cast<double>(order) +
    nd * static_cast<double>(order > moments.order() ? order - moments.order() : 0);
  const double direct_cost = 5.0 * nd * (2.93 * nd * h + 1.0);
  const bool use_fourier = order <= kMaxFourierOrder && fourier_cost < direct_cost;

  std::vector<double> out(n);
  if (!use_fourier) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = direct_log_loo(sorted, i, h);
    return out;
  }

  moments.ensure(order);
  std::vector<std::complex<double>> wa(order + 1);
  double weight_sum = 0.0;
  for (std::size_t p = 1; p <= order; ++p) {
    const double pd = static_cast<double>(p);
    const double w = std::exp(-0.5 * pd * pd * h * h);
    wa[p] = w * moments[p];
    weight_sum += w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> z = std::polar(1.0, sorted[i]);
    std::complex<double> zp(1.0, 0.0);
    double s = 0.0;
    for (std::size_t p = 1; p <= order; ++p) {
      zp *= z;
      s += wa[p].real() * zp.real() - wa[p].imag() * zp.imag();
    }
    const double loo = (1.0 + 2.0 * (nd * s - weight_sum) / (nd - 1.0)) / kTwoPi;
    out[i] = loo >= 1e-5 ? std::log(loo) : direct_log_loo(sorted, i, h);
  }
  return out;
}

double log_cv_sorted(std::span<const double> sorted, double h, TrigMoments& moments)
{
  const std::vector<double> terms = log_loo_sorted(sorted, h, moments);
  double sum = 0.0;
  for (double t : terms)
    sum += t;
  return sum;
}

} // namespace circmode::detail
