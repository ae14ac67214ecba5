#pragma once

#include "circmode/angle.hpp"
#include "circmode/rng.hpp"

#include <cstddef>
#include <variant>
#include <vector>

namespace circmode {

//! log I0(kappa): power series for kappa <= 15, asymptotic expansion above.
double log_bessel_i0(double kappa);

//! Wrapped normal WN(mu, sigma2) density at x (radians, any real).
//!
//! The wrap series is summed in the spatial domain for sigma <= pi and in its
//! Fourier (theta-function) form above; both are truncated once the omitted
//! terms fall below 1e-16 of the leading one.
double wn_density(double x, double mu, double sigma2);

//! First and second x-derivatives of the WN(mu, sigma2) density.
struct WnDerivatives
{
  double value;
  double first;
  double second;
};
WnDerivatives wn_derivatives(double x, double mu, double sigma2);

//! Probability of [a, b] under WN(mu, sigma2), with 0 <= a <= b <= 2pi.
double wn_cdf_segment(double a, double b, double mu, double sigma2);

struct VonMises
{
  double mu;
  double kappa;
};

struct SineSkewedVonMises
{
  double mu;
  double kappa;
  double lambda;
};

struct WrappedNormal
{
  double mu;
  double sigma2;
};

//! Beta(a, b) mapped affinely onto [lo, hi] (taken mod 2pi).
struct ScaledBeta
{
  double a;
  double b;
  double lo;
  double hi;
};

class CircularModel;

struct Mixture
{
  std::vector<double> weights;
  std::vector<CircularModel> components;
};

//! A sampleable, evaluable circular density.
//!
//! Instances are built through the validating factories and are immutable.
class CircularModel
{
public:
  using Variant =
    std::variant<VonMises, SineSkewedVonMises, WrappedNormal, ScaledBeta, Mixture>;

  static CircularModel von_mises(double mu, double kappa);
  static CircularModel sine_skewed_von_mises(double mu, double kappa, double lambda);
  static CircularModel wrapped_normal(double mu, double sigma2);
  static CircularModel scaled_beta(double a, double b, double lo, double hi);
  static CircularModel mixture(std::vector<double> weights,
                               std::vector<CircularModel> components);

  const Variant& variant() const { return variant_; }

  double density(double x) const;
  double draw(RngStream& rng) const;
  AngleSample sample(std::size_t n, RngStream& rng) const;

private:
  explicit CircularModel(Variant v);
  Variant variant_;
};

double model_density(const CircularModel& m, double x);
AngleSample model_sample(const CircularModel& m, std::size_t n, RngStream& rng);

} // namespace circmode
