#pragma once

// Fast evaluation of the wrapped-normal kernel sum over a sorted sample.
//
// Two routes compute the same quantity:
//  * Fourier: f(x) = (1/2pi) [1 + 2 sum_p exp(-p^2 h^2 / 2) Re(a_p e^{ipx})],
//    a_p = mean_i exp(-i p X_i). Grid values come from one inverse real FFT.
//  * Direct: windowed sum of Gaussian images around x, accumulated relative
//    to the nearest image so nothing underflows.
// The Fourier route carries ~1e-16 absolute noise, so wherever its density
// drops below kFourierFloor the direct route is used instead.

#include "circmode/kde.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace circmode::detail {

inline constexpr double kFourierFloor = 1e-8;

//! Density and first two derivatives, all multiplied by exp(-log_scale).
//! Signs and ratios are exact even when the density itself underflows.
struct ScaledDerivs
{
  double f = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double log_scale = 0.0;

  double density() const;
  double first() const;
  double second() const;
};

//! Trigonometric moments a_p = (1/n) sum_i exp(-i p X_i), grown on demand.
class TrigMoments
{
public:
  explicit TrigMoments(std::span<const double> sorted);

  void ensure(std::size_t order);
  std::size_t order() const { return coeffs_.size() - 1; }
  std::complex<double> operator[](std::size_t p) const { return coeffs_[p]; }

private:
  std::vector<std::complex<double>> step_;  // exp(-i X_i)
  std::vector<std::complex<double>> power_; // exp(-i p X_i) at p = order()
  std::vector<std::complex<double>> coeffs_;
};

//! Number of Fourier terms needed at bandwidth h.
std::size_t fourier_order(double h);

//! Grid size satisfying spacing <= min(h/10, 2pi/2048); a power of two.
std::size_t mode_grid_size(double h, std::size_t min_size = 2048);

enum class Route
{
  fourier,
  direct
};

//! The kernel sum f_h of one sorted sample at one bandwidth.
class KernelSum
{
public:
  KernelSum(std::span<const double> sorted, double h, TrigMoments& moments, Route route);

  //! Picks the cheaper route for evaluating on a grid of size G.
  static Route choose_grid_route(std::size_t n, double h, std::size_t grid_size);

  Route route() const { return route_; }
  double bandwidth() const { return h_; }

  ScaledDerivs at(double x) const;
  ScaledDerivs direct_at(double x) const;

  //! Values at x_j = 2 pi j / G, j = 0..G-1.
  std::vector<ScaledDerivs> grid(std::size_t grid_size) const;

private:
  ScaledDerivs fourier_at(double x) const;
  std::vector<ScaledDerivs> fourier_grid(std::size_t grid_size) const;

  std::span<const double> sorted_;
  double h_;
  TrigMoments& moments_;
  Route route_;
  std::size_t order_ = 0;
  std::vector<double> weights_; // exp(-p^2 h^2 / 2), p = 0..order_
};

//! True when 2 sum_p exp(-p^2 h^2 / 2) |a_p| < kUniformTolerance.
bool numerically_uniform(double h, TrigMoments& moments);

//! Mode counting on a sorted sample; moments are reused across bandwidths.
//! Locations are refined only when `locate` is set.
ModeCount count_modes_sorted(std::span<const double> sorted, double h, TrigMoments& moments,
                             bool locate = true);

//! Leave-one-out log density log f_h^{-i}(X_i) for every i, in sorted order.
std::vector<double> log_loo_sorted(std::span<const double> sorted, double h, TrigMoments& moments);

//! log L_CV(h) = sum_i log f_h^{-i}(X_i).
double log_cv_sorted(std::span<const double> sorted, double h, TrigMoments& moments);

} // namespace circmode::detail
