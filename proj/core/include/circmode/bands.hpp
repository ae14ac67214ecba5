#pragma once

#include "circmode/angle.hpp"
#include "circmode/kde.hpp"

#include <cstddef>
#include <vector>

namespace circmode {

//! Tuning shared by the critical-bandwidth and pseudo-likelihood searches.
struct BandwidthSearchOptions
{
  double h_floor = kBandwidthFloor;
  double h_ceil = kBandwidthCeil;
  double bracketing_tol_rel = 1e-4;
  std::size_t profile_grid_points = 100;
  double golden_tol_rel = 1e-5;
};

struct CriticalBandwidthResult
{
  std::size_t k = 0;
  double h_k = 0.0;
  std::size_t modes_at_hk = 0;
  //! Mode count at h_k * (1 - bracketing_tol_rel); 0 when floor_hit.
  std::size_t modes_below = 0;
  double bracketing_tol_rel = 1e-4;
  //! f_h has k or fewer modes already at h_floor; h_k is reported as h_floor.
  bool floor_hit = false;
};

struct ProfilePoint
{
  double h;
  double log_cv;
};

//! log L_CV on a bandwidth grid with its unconstrained and h >= h_k maxima.
struct PseudoLikelihoodProfile
{
  std::vector<ProfilePoint> grid;
  double h_k = 0.0;
  double h_max = 0.0;
  double h_H0 = 0.0;
  double ell_max = 0.0;
  double ell_H0 = 0.0;
};

//! Throws TieError if two observations coincide.
void require_distinct(const AngleSample& sample);

//! log L_CV(h) = sum_i log f_h^{-i}(X_i). Needs n >= 2 and no ties.
double log_cv_pseudo_likelihood(const AngleSample& sample, double h);

//! Smallest h at which f_h has k or fewer modes, bracketed to a relative
//! width of bracketing_tol_rel.
//!
//! Throws NoBracket when f_h still has more than k modes at h_ceil (for
//! instance, a sample invariant under rotation by 2pi/m has a multiple of m
//! modes at every bandwidth).
CriticalBandwidthResult critical_bandwidth(const AngleSample& sample, std::size_t k,
                                           const BandwidthSearchOptions& options = {});

//! Maximizes log L_CV over (0, inf) and over [h_k, inf).
PseudoLikelihoodProfile likelihood_profile(const AngleSample& sample, double h_k,
                                           const BandwidthSearchOptions& options = {});

} // namespace circmode
