#pragma once

#include "circmode/angle.hpp"
#include "circmode/rng.hpp"

#include <cstddef>
#include <vector>

namespace circmode {

//! Lower and upper limits for every bandwidth search.
inline constexpr double kBandwidthFloor = 1e-4;
inline constexpr double kBandwidthCeil = 10.0;

//! f_h counts as uniform once every harmonic is below this fraction of the
//! constant term; it then has one nominal mode.
inline constexpr double kUniformTolerance = 1e-13;

//! A sample together with a wrapped-normal bandwidth h (the kernel is WN(0, h^2)).
class KdeSpec
{
public:
  KdeSpec(AngleSample sample, double h, std::size_t eval_grid_size = 2048);

  const AngleSample& sample() const { return sample_; }
  double bandwidth() const { return h_; }
  std::size_t eval_grid_size() const { return eval_grid_size_; }

private:
  AngleSample sample_;
  double h_;
  std::size_t eval_grid_size_;
};

//! Modes (strict local maxima) and antimodes of a circular density.
struct ModeCount
{
  std::size_t count = 0;
  std::vector<Angle> mode_locations;
  std::vector<Angle> antimode_locations;
};

//! f_h(x) = (1/n) sum_i K_h(x - X_i).
double kde_density(const KdeSpec& spec, double x);

//! Leave-one-out density at observation i (input order). Needs n >= 2.
double kde_loo_density(const KdeSpec& spec, std::size_t i);

//! d/dx f_h at x (order 1) or d^2/dx^2 (order 2).
double kde_derivative(const KdeSpec& spec, double x, int order = 1);

//! Number of modes of f_h with refined mode/antimode locations.
//!
//! Sign changes of f_h' are scanned on a grid with spacing at most
//! min(h/10, 2pi/grid) and refined by bisection. A mode-antimode pair that
//! falls inside one grid cell is found from the sign change of f_h'' there.
//! When f_h is uniform to kUniformTolerance the count is 1 and the
//! locations are the grid argmax and argmin. Throws DegenerateDensity if
//! f_h' vanishes over an arc.
ModeCount count_modes(const KdeSpec& spec);

//! Integral of f_h over (0, x].
double kde_cdf(const KdeSpec& spec, double x);

//! n_out draws from f_h: X_I + h Z (mod 2pi), I uniform, Z standard normal.
AngleSample kde_resample(const KdeSpec& spec, std::size_t n_out, RngStream& rng);

} // namespace circmode
