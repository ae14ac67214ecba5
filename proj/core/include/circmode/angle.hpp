#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace circmode {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

//! Maps any finite real onto (0, 2pi]; zero maps to 2pi.
double normalize_angle(double radians);

//! Signed representative of an angle difference in [-pi, pi].
double angular_difference(double a, double b);

//! An angle in radians, normalized to (0, 2pi].
class Angle
{
public:
  Angle() = default;
  explicit Angle(double radians);

  double value() const { return value_; }
  explicit operator double() const { return value_; }

  friend bool operator==(Angle, Angle) = default;
  friend auto operator<=>(Angle, Angle) = default;

private:
  double value_ = kTwoPi;
};

//! Non-empty collection of angles on (0, 2pi].
//!
//! Keeps the observations in their input order and also an ascending copy;
//! both views are fixed at construction.
class AngleSample
{
public:
  explicit AngleSample(std::vector<double> radians);
  explicit AngleSample(std::span<const Angle> angles);

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<const double> sorted() const { return sorted_; }
  double operator[](std::size_t i) const { return values_[i]; }

  //! True when two observations are bitwise equal after normalization.
  bool has_ties() const;

  //! Every observation shifted by delta (mod 2pi).
  AngleSample rotated(double delta) const;
  //! Every observation mapped x -> 2pi - x.
  AngleSample reflected() const;

private:
  std::vector<double> values_;
  std::vector<double> sorted_;
};

} // namespace circmode
