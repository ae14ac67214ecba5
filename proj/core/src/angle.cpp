#include "circmode/angle.hpp"

#include "circmode/error.hpp"

#include <algorithm>
#include <cmath>

namespace circmode {

double normalize_angle(double radians)
{
  if (!std::isfinite(radians))
    throw InvalidParameter("angle must be finite");
  double v = std::fmod(radians, kTwoPi);
  if (v <= 0.0)
    v += kTwoPi;
  if (v > kTwoPi || v <= 0.0)
    v = kTwoPi;
  return v;
}

double angular_difference(double a, double b)
{
  return std::remainder(a - b, kTwoPi);
}

Angle::Angle(double radians)
  : value_(normalize_angle(radians))
{}

AngleSample::AngleSample(std::vector<double> radians)
  : values_(std::move(radians))
{
  if (values_.empty())
    throw InvalidParameter("an angle sample needs at least one observation");
  for (double& v : values_)
    v = normalize_angle(v);
  sorted_ = values_;
  std::sort(sorted_.begin(), sorted_.end());
}

AngleSample::AngleSample(std::span<const Angle> angles)
  : AngleSample([&] {
      std::vector<double> v;
      v.reserve(angles.size());
      for (Angle a : angles)
        v.push_back(a.value());
      return v;
    }())
{}

bool AngleSample::has_ties() const
{
  return std::adjacent_find(sorted_.begin(), sorted_.end()) != sorted_.end();
}

AngleSample AngleSample::rotated(double delta) const
{
  std::vector<double> v(values_);
  for (double& x : v)
    x += delta;
  return AngleSample(std::move(v));
}

AngleSample AngleSample::reflected() const
{
  std::vector<double> v(values_);
  for (double& x : v)
    x = kTwoPi - x;
  return AngleSample(std::move(v));
}

} // namespace circmode
