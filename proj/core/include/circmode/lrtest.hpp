#pragma once

#include "circmode/angle.hpp"
#include "circmode/bands.hpp"
#include "circmode/circdist.hpp"
#include "circmode/report.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace circmode {

//! Values below this are treated as an exact zero of D_k.
inline constexpr double kDkZeroThreshold = 1e-9;

struct DkResult
{
  double d = 0.0;
  double h_k = 0.0;
  double h_max = 0.0;
  double h_H0 = 0.0;
  double ell_max = 0.0;
  double ell_H0 = 0.0;
  bool floor_hit = false;
};

//! D_k = 2 [max_{h>0} log L_CV(h) - max_{h>=h_k} log L_CV(h)].
DkResult dk_statistic(const AngleSample& sample, std::size_t k,
                      const BandwidthSearchOptions& options = {});

//! D_k evaluated with the null region fixed to [h_k, inf).
DkResult dk_statistic_given_hk(const AngleSample& sample, double h_k, bool floor_hit,
                               const BandwidthSearchOptions& options = {});

//! Likelihood-ratio multimodality test calibrated by smoothed bootstrap
//! from f_{h_k}. Replicate b draws from RngStream(seed, b).
TestReport run_test(const AngleSample& sample, const TestOptions& options);

struct NullAtoms
{
  double p_zero_hat = 0.0;
  std::vector<double> statistics;        // all M values, by run index
  std::vector<double> nonzero_replicates; // those > 0, by run index
};

//! Simulates M samples of size n from `model` and tabulates D_k (no bootstrap).
NullAtoms null_statistic_atoms(const CircularModel& model, std::size_t n, std::size_t M,
                               std::size_t k, std::uint64_t seed, unsigned workers = 0,
                               const BandwidthSearchOptions& options = {});

} // namespace circmode
