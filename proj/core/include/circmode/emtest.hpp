#pragma once

#include "circmode/angle.hpp"
#include "circmode/report.hpp"

#include <cstddef>
#include <vector>

namespace circmode {

//! Closed arc [start, end] with end - start in [0, 2pi]; `end` may exceed 2pi.
struct Arc
{
  double start;
  double end;
  std::size_t points; // observations covered
  double length() const { return end - start; }
};

//! E_{n,k}(lambda): best total of P_n(C) - lambda Vol(C) over at most k
//! disjoint arcs.
struct ExcessMassValue
{
  std::size_t k = 0;
  double lambda = 0.0;
  double value = 0.0;
  std::vector<Arc> intervals;
};

struct DeltaStatistic
{
  std::size_t k = 0; // compares k + 1 arcs against k
  double delta = 0.0;
  double lambda_star = 0.0;
};

ExcessMassValue empirical_excess_mass(const AngleSample& sample, std::size_t k, double lambda);

//! Delta_{n,k+1} = max_{lambda>0} [E_{n,k+1}(lambda) - E_{n,k}(lambda)].
//!
//! Both terms are convex and piecewise linear in lambda; their breakpoints
//! are enumerated exactly, so the maximum is taken over a finite set.
DeltaStatistic delta_statistic(const AngleSample& sample, std::size_t k);

//! Excess-mass test with resamples drawn from f_{h_k} directly (no density
//! modification around the critical points), so it is an
//! unmodified-calibration variant of the published excess-mass test.
TestReport excess_mass_test(const AngleSample& sample, const TestOptions& options);

enum class U2Scaling
{
  //! n^{-1} (1/n) sum (D_i - mean D)^2.
  as_displayed,
  //! n (1/n) sum (D_i - mean D)^2, the classical Watson scaling.
  classical
};

//! Watson-type U^2 distance between the empirical CDF and the CDF of f_h.
double watson_u2(const AngleSample& sample, double h, U2Scaling scaling = U2Scaling::as_displayed);

struct CurvatureRatio
{
  Angle location;
  bool is_mode;
  double ratio; // |f''_{h2}(x)| / f_{h_k}(x)^3
};

//! Curvature ratios at the critical points of f_{h_k}, with f'' estimated
//! at a caller-supplied bandwidth h2.
std::vector<CurvatureRatio> curvature_ratios(const AngleSample& sample, double h_k, double h2);

} // namespace circmode
