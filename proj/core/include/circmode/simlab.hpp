#pragma once

#include "circmode/circdist.hpp"
#include "circmode/report.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace circmode {

struct ZooModel
{
  std::string id; // "M1" .. "M15"
  CircularModel model;
  std::size_t modes; // number of modes of the true density
};

//! The fifteen simulation models: M1-M5 unimodal, M6-M10 bimodal,
//! M11-M15 trimodal.
const std::vector<ZooModel>& model_zoo();
const ZooModel& zoo_model(std::string_view id);

enum class WhichTest
{
  likelihood,
  excess_mass
};

struct StudyDesign
{
  std::vector<ZooModel> models;
  std::vector<std::size_t> sample_sizes{ 100, 500, 1000 };
  std::vector<double> alphas{ 0.01, 0.05, 0.10 };
  std::size_t M = 1000;
  std::size_t B = 500;
  std::size_t k = 1;
  std::uint64_t seed = 0;
};

struct StudyRow
{
  std::string model_id;
  std::size_t n = 0;
  double alpha = 0.0;
  double proportion = 0.0;
  double mc_standard_error = 0.0;
};

struct RunRecord
{
  std::string model_id;
  std::size_t n = 0;
  std::size_t run = 0;
  double p_value = 0.0;
};

struct StudyResult
{
  std::vector<StudyRow> rows;
  std::vector<RunRecord> runs;
  std::size_t M = 0;
  bool complete = true;
};

struct StudyProgress
{
  std::size_t done;
  std::size_t total;
};

struct StudyOptions
{
  unsigned workers = 0;
  //! Append-only record of finished runs; existing records are reused.
  std::optional<std::filesystem::path> checkpoint;
  //! Stop after this many new runs (emulates an interrupted job).
  std::optional<std::size_t> stop_after;
  std::function<void(const StudyProgress&)> on_progress;
};

//! Seed of the sample drawn for one (model, n, run) cell.
std::uint64_t study_stream_id(std::string_view model_id, std::size_t n, std::size_t run);

//! Runs the selected test on M simulated samples per (model, n) and
//! tabulates rejection proportions p < alpha.
StudyResult run_study(const StudyDesign& design, WhichTest which,
                      const StudyOptions& options = {});

//! Recomputes the proportion rows from per-run p-values.
std::vector<StudyRow> tabulate(const std::vector<RunRecord>& runs,
                               const std::vector<double>& alphas, std::size_t M);

enum class TableLayout
{
  table2, // calibration, k = 1 (with optional baseline columns)
  table3, // power, k = 1 (with optional baseline columns)
  table4, // calibration, k = 2
  table5  // power, k = 2
};

//! Rejection proportions as CSV: model,size then one column per alpha,
//! rounded half-even to three decimals. For table2/table3 a baseline result
//! adds one prefixed column per alpha.
std::string export_table(const StudyResult& result, TableLayout layout,
                         const StudyResult* baseline = nullptr);

//! Parses a table produced by export_table (primary columns only).
StudyResult parse_table(std::string_view csv);

//! Full-precision CSV of the per-run p-values.
std::string export_runs(const StudyResult& result);
std::vector<RunRecord> parse_runs(std::string_view csv);

//! Decimal text of `value` rounded half-even to `digits` places.
std::string format_fixed(double value, int digits);

} // namespace circmode
