#pragma once

#include "circmode/bands.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace circmode {

enum class PValueRule
{
  //! (1/B) #{b : T*_b > T}, the rule the method is defined with.
  strict_greater,
  //! (1 + #{b : T*_b >= T}) / (B + 1).
  plus_one
};

//! Which bandwidth constrains the null maximization inside each replicate.
enum class ReplicateConstraint
{
  //! Each resample gets its own critical bandwidth (full pipeline).
  recompute,
  //! Every resample reuses the h_k of the observed sample.
  reuse_observed
};

struct TestOptions
{
  std::size_t k = 1;
  std::size_t B = 500;
  std::uint64_t seed = 0;
  std::optional<double> alpha;
  unsigned workers = 0;
  PValueRule p_value_rule = PValueRule::strict_greater;
  ReplicateConstraint replicate_constraint = ReplicateConstraint::recompute;
  BandwidthSearchOptions search;
};

//! Outcome of a bootstrap-calibrated multimodality test.
struct TestReport
{
  std::string statistic; // "D_k" or "Delta_k+1"
  std::size_t k = 0;
  std::size_t n = 0;
  double observed = 0.0;
  double h_k = 0.0;
  bool floor_hit = false;
  std::optional<double> h_max;
  std::optional<double> h_H0;
  std::optional<double> lambda_star;
  std::size_t B = 0;
  std::vector<double> replicates;
  double p_value = 1.0;
  std::optional<double> alpha;
  std::optional<bool> reject;
  std::uint64_t master_seed = 0;
  TestOptions tuning;
};

//! p-value of `observed` against bootstrap replicates under `rule`.
double bootstrap_p_value(double observed, const std::vector<double>& replicates,
                         PValueRule rule = PValueRule::strict_greater);

} // namespace circmode
