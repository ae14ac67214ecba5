#include "circmode/circdist.hpp"
#include "circmode/error.hpp"

#include <cmath>

namespace circmode {

double log_bessel_i0(double kappa)
{
  if (!std::isfinite(kappa) || kappa < 0.0)
    throw InvalidParameter("log_bessel_i0 needs a finite kappa >= 0");

  if (kappa <= 15.0) {
    // sum_m (kappa^2/4)^m / (m!)^2
    const double q = 0.25 * kappa * kappa;
    double term = 1.0;
    double sum = 1.0;
    for (int m = 1; m < 500; ++m) {
      term *= q / (static_cast<double>(m) * m);
      sum += term;
      if (term < 1e-16 * sum)
        break;
    }
    return std::log(sum);
  }

  // I0(x) ~ e^x / sqrt(2 pi x) * sum_j ((2j-1)!!)^2 / (j! (8x)^j)
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j < 60; ++j) {
    const double next = term * (2.0 * j - 1.0) * (2.0 * j - 1.0) / (8.0 * j * kappa);
    if (next > term)
      break;
    term = next;
    sum += term;
    if (term < 1e-17 * sum)
      break;
  }
  return kappa - 0.5 * std::log(kTwoPi * kappa) + std::log(sum);
}

} // namespace circmode
