#pragma once

#include "circmode/angle.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace circmode {

enum class AngleUnit
{
  radians,
  degrees
};

//! compass: clockwise from north (0 = north, pi/2 = east), used as-is.
//! math: counterclockwise from east, converted to compass as pi/2 - x.
enum class AngleConvention
{
  compass,
  math
};

struct AngleFileSpec
{
  std::filesystem::path path;
  AngleUnit unit = AngleUnit::radians;
  AngleConvention convention = AngleConvention::compass;
  //! Column name, or a 0-based index, for delimited files with a header.
  std::optional<std::string> column;
  //! ',' or '\t'; 0 detects from the first data line.
  char delimiter = 0;
};

struct LoadReport
{
  AngleSample sample;
  std::vector<std::string> warnings;
  std::size_t rejected_rows = 0;
  bool has_ties = false;
};

//! Reads one angle per line, or one column of a delimited file with header.
//! Blank lines and lines starting with '#' are skipped; rows that do not
//! parse are skipped and reported with their line number.
LoadReport load_angles(const AngleFileSpec& spec);

//! One angle per line, radians, shortest round-trip decimal.
std::string export_angles(const AngleSample& sample);

struct SampleSummary
{
  std::size_t n = 0;
  double mean_direction = 0.0; // meaningful only when mean_defined
  double resultant_length = 0.0;
  bool mean_defined = false;
};

SampleSummary summarize(const AngleSample& sample);

} // namespace circmode
