#include "circmode/ingest.hpp"

#include "circmode/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace circmode {

namespace {

std::string_view trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view text, double& out)
{
  text = trim(text);
  if (!text.empty() && text.front() == '+')
    text.remove_prefix(1);
  if (text.empty())
    return false;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), out);
  return r.ec == std::errc() && r.ptr == text.data() + text.size();
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos)
      return out;
    start = pos + 1;
  }
}

struct Line
{
  std::size_t number;
  std::string text;
};

} // namespace

LoadReport load_angles(const AngleFileSpec& spec)
{
  std::ifstream in(spec.path);
  if (!in)
    throw IoError("cannot open " + spec.path.string());

  std::vector<Line> lines;
  std::string text;
  for (std::size_t number = 1; std::getline(in, text); ++number) {
    const std::string_view t = trim(text);
    if (t.empty() || t.front() == '#')
      continue;
    lines.push_back({ number, text });
  }
  if (lines.empty())
    throw IoError("no angles in " + spec.path.string());

  char delimiter = spec.delimiter;
  if (delimiter == 0) {
    if (lines.front().text.find('\t') != std::string::npos)
      delimiter = '\t';
    else if (lines.front().text.find(',') != std::string::npos)
      delimiter = ',';
  }
  if (delimiter != 0 && delimiter != ',' && delimiter != '\t')
    throw InvalidParameter("delimiter must be ',' or tab");

  std::size_t column = 0;
  std::size_t first_data = 0;
  if (delimiter != 0 || spec.column) {
    const char sep = delimiter != 0 ? delimiter : ',';
    const auto header = split(lines.front().text, sep);
    bool numeric_header = true;
    for (std::string_view h : header) {
      double v = 0.0;
      numeric_header = numeric_header && parse_double(h, v);
    }
    first_data = numeric_header ? 0 : 1;
    if (spec.column) {
      bool found = false;
      if (!numeric_header)
        for (std::size_t c = 0; c < header.size(); ++c)
          if (trim(header[c]) == *spec.column) {
            column = c;
            found = true;
          }
      if (!found) {
        const std::string& name = *spec.column;
        const auto r = std::from_chars(name.data(), name.data() + name.size(), column);
        if (r.ec != std::errc() || r.ptr != name.data() + name.size() || column >= header.size())
          throw IoError("column '" + name + "' not found");
      }
    } else if (header.size() != 1) {
      std::string names;
      for (std::string_view h : header)
        names += (names.empty() ? "" : ", ") + std::string(trim(h));
      throw IoError("file has several columns (" + names + "); select one with a column name or index");
    }
    delimiter = sep;
  }

  LoadReport report{ AngleSample(std::vector<double>{ 1.0 }), {}, 0, false };
  std::vector<double> values;
  for (std::size_t i = first_data; i < lines.size(); ++i) {
    const Line& line = lines[i];
    std::string_view field = line.text;
    if (delimiter != 0) {
      const auto fields = split(line.text, delimiter);
      if (column >= fields.size()) {
        report.warnings.push_back("line " + std::to_string(line.number) + ": missing column");
        ++report.rejected_rows;
        continue;
      }
      field = fields[column];
    }
    double v = 0.0;
    if (!parse_double(field, v) || !std::isfinite(v)) {
      report.warnings.push_back("line " + std::to_string(line.number) + ": not a number");
      ++report.rejected_rows;
      continue;
    }
    if (spec.unit == AngleUnit::degrees) {
      if (v < 0.0 || v > 360.0) {
        report.warnings.push_back("line " + std::to_string(line.number) +
                                  ": degrees outside [0, 360]");
        ++report.rejected_rows;
        continue;
      }
      v = v * kPi / 180.0;
    }
    if (spec.convention == AngleConvention::math)
      v = kPi / 2.0 - v;
    values.push_back(normalize_angle(v));
  }
  if (values.empty())
    throw IoError("no usable angles in " + spec.path.string());

  report.sample = AngleSample(std::move(values));
  report.has_ties = report.sample.has_ties();
  if (report.has_ties)
    report.warnings.push_back("sample contains repeated angles; tests require distinct values");
  return report;
}

std::string export_angles(const AngleSample& sample)
{
  std::string out;
  char buf[64];
  for (double v : sample.values()) {
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, r.ptr);
    out += '\n';
  }
  return out;
}

SampleSummary summarize(const AngleSample& sample)
{
  double c = 0.0;
  double s = 0.0;
  for (double v : sample.values()) {
    c += std::cos(v);
    s += std::sin(v);
  }
  SampleSummary out;
  out.n = sample.size();
  out.resultant_length = std::hypot(c, s) / static_cast<double>(out.n);
  out.mean_defined = out.resultant_length >= 1e-12;
  if (out.mean_defined)
    out.mean_direction = normalize_angle(std::atan2(s, c));
  return out;
}

} // namespace circmode
