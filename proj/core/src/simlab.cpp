#include "circmode/simlab.hpp"

#include "circmode/emtest.hpp"
#include "circmode/error.hpp"
#include "circmode/lrtest.hpp"
#include "circmode/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <tuple>

namespace circmode {

namespace {

CircularModel vm(double mu, double kappa)
{
  return CircularModel::von_mises(mu, kappa);
}

CircularModel mix(std::vector<double> w, std::vector<CircularModel> c)
{
  return CircularModel::mixture(std::move(w), std::move(c));
}

std::vector<ZooModel> build_zoo()
{
  constexpr double pi = kPi;
  constexpr double third = 1.0 / 3.0;
  std::vector<ZooModel> z;
  z.push_back({ "M1", vm(pi, 1.0), 1 });
  z.push_back({ "M2", mix({ .2, .6, .2 }, { vm(2 * pi / 3, 3), vm(pi, 1.4), vm(4 * pi / 3, 3) }), 1 });
  z.push_back({ "M3", mix({ .05, .9, .05 }, { vm(2 * pi / 3, 7), vm(pi, 1), vm(4 * pi / 3, 7) }), 1 });
  z.push_back({ "M4", CircularModel::sine_skewed_von_mises(pi, 1.0, -0.9), 1 });
  z.push_back({ "M5", CircularModel::scaled_beta(3.0, 2.0, pi / 2, 3 * pi / 2), 1 });
  z.push_back({ "M6", mix({ .5, .5 }, { vm(pi - 1.25, 1.5), vm(pi + 1.25, 1.5) }), 2 });
  z.push_back({ "M7", mix({ .5, .5 }, { vm(pi - 1, 1.5), vm(pi + 1, 1.5) }), 2 });
  z.push_back({ "M8", mix({ .5, .5 }, { vm(1.5, 4), vm(3, 2) }), 2 });
  z.push_back({ "M9", mix({ .95, .05 }, { vm(pi / 2, 6), vm(3 * pi / 2, 3) }), 2 });
  z.push_back({ "M10", mix({ .9, .1 }, { vm(pi / 2, 6), vm(3 * pi / 2, 3) }), 2 });
  z.push_back({ "M11", mix({ third, third, third }, { vm(pi - 2, 7), vm(pi, 7), vm(pi + 2, 7) }), 3 });
  z.push_back({ "M12", mix({ third, third, third }, { vm(pi - 1, 7), vm(pi, 7), vm(pi + 1, 7) }), 3 });
  z.push_back({ "M13", mix({ .2, .2, .6 }, { vm(pi / 2, 6), vm(pi, 6), vm(7 * pi / 4, 8) }), 3 });
  z.push_back({ "M14", mix({ .1, .25, .65 }, { vm(pi / 2, 6), vm(pi, 6), vm(7 * pi / 4, 8) }), 3 });
  z.push_back({ "M15", mix({ .2, .2, .6 }, { vm(pi / 2, 6), vm(6 * pi / 7, 6), vm(7 * pi / 4, 8) }), 3 });
  return z;
}

std::uint64_t fnv1a(std::string_view s)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string shortest(double v)
{
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string alpha_label(double alpha)
{
  return shortest(std::round(alpha * 100.0 * 1e9) / 1e9) + "%";
}

std::vector<std::string> split(std::string_view line, char sep)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  for (std::string& s : out)
    if (!s.empty() && s.back() == '\r')
      s.pop_back();
  return out;
}

template<typename T>
bool parse_number(std::string_view text, T& out)
{
  const auto r = std::from_chars(text.data(), text.data() + text.size(), out);
  return r.ec == std::errc() && r.ptr == text.data() + text.size();
}

std::vector<std::string> lines_of(std::string_view text)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos)
      end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    out.push_back(std::move(line));
    start = end + 1;
  }
  return out;
}

void validate(const StudyDesign& d)
{
  if (d.M == 0 || d.B == 0)
    throw InvalidParameter("study needs M >= 1 and B >= 1");
  if (d.k == 0)
    throw InvalidParameter("k must be at least 1");
  if (d.models.empty() || d.sample_sizes.empty() || d.alphas.empty())
    throw InvalidParameter("study needs at least one model, sample size and alpha");
  std::set<std::string> ids;
  for (const ZooModel& m : d.models) {
    if (!ids.insert(m.id).second)
      throw InvalidParameter("duplicate model id " + m.id);
    if (m.id.find_first_of(",\n\r") != std::string::npos)
      throw InvalidParameter("model id must not contain separators");
  }
  for (std::size_t n : d.sample_sizes)
    if (n < 2)
      throw InvalidParameter("sample sizes must be at least 2");
  for (double a : d.alphas)
    if (!(a > 0.0 && a < 1.0))
      throw InvalidParameter("alphas must lie in (0, 1)");
}

using CellKey = std::tuple<std::string, std::size_t, std::size_t>;

std::map<CellKey, double> read_checkpoint(const std::filesystem::path& path)
{
  std::map<CellKey, double> done;
  std::ifstream in(path);
  if (!in)
    return done;
  std::stringstream ss;
  ss << in.rdbuf();
  for (const RunRecord& r : parse_runs(ss.str()))
    done[{ r.model_id, r.n, r.run }] = r.p_value;
  return done;
}

std::string run_line(const RunRecord& r)
{
  return r.model_id + "," + std::to_string(r.n) + "," + std::to_string(r.run) + "," +
         shortest(r.p_value) + "\n";
}

} // namespace

const std::vector<ZooModel>& model_zoo()
{
  static const std::vector<ZooModel> zoo = build_zoo();
  return zoo;
}

const ZooModel& zoo_model(std::string_view id)
{
  for (const ZooModel& m : model_zoo())
    if (m.id == id)
      return m;
  throw InvalidParameter("unknown model id " + std::string(id));
}

std::uint64_t study_stream_id(std::string_view model_id, std::size_t n, std::size_t run)
{
  return derive_stream_id({ fnv1a(model_id), n, run });
}

StudyResult run_study(const StudyDesign& design, WhichTest which, const StudyOptions& options)
{
  validate(design);

  struct Cell
  {
    const ZooModel* model;
    std::size_t n;
    std::size_t run;
  };
  std::vector<Cell> cells;
  for (const ZooModel& m : design.models)
    for (std::size_t n : design.sample_sizes)
      for (std::size_t run = 0; run < design.M; ++run)
        cells.push_back({ &m, n, run });

  std::map<CellKey, double> done;
  if (options.checkpoint)
    done = read_checkpoint(*options.checkpoint);

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!done.count({ cells[i].model->id, cells[i].n, cells[i].run }))
      todo.push_back(i);
  if (options.stop_after && *options.stop_after < todo.size())
    todo.resize(*options.stop_after);

  std::ofstream checkpoint;
  if (options.checkpoint) {
    const bool fresh = !std::filesystem::exists(*options.checkpoint) ||
                       std::filesystem::file_size(*options.checkpoint) == 0;
    checkpoint.open(*options.checkpoint, std::ios::app);
    if (!checkpoint)
      throw IoError("cannot open checkpoint file " + options.checkpoint->string());
    if (fresh)
      checkpoint << "model,n,run,p_value\n" << std::flush;
  }

  std::vector<double> p_values(todo.size());
  std::mutex mutex;
  std::size_t finished = cells.size() - todo.size();
  if (options.stop_after)
    finished = 0;
  for (const Cell& cell : cells)
    finished += options.stop_after && done.count({ cell.model->id, cell.n, cell.run }) ? 1 : 0;

  parallel_for(todo.size(), options.workers, [&](std::size_t t) {
    const Cell& cell = cells[todo[t]];
    const std::uint64_t stream = study_stream_id(cell.model->id, cell.n, cell.run);
    double p = 1.0;
    try {
      RngStream rng(design.seed, stream);
      AngleSample sample = cell.model->model.sample(cell.n, rng);
      for (std::uint64_t retry = 1; sample.has_ties() && retry <= 3; ++retry) {
        RngStream sub = rng.substream(retry);
        sample = cell.model->model.sample(cell.n, sub);
      }
      TestOptions to;
      to.k = design.k;
      to.B = design.B;
      to.seed = derive_stream_id({ design.seed, stream });
      to.workers = 1;
      const TestReport report =
        which == WhichTest::likelihood ? run_test(sample, to) : excess_mass_test(sample, to);
      p = report.p_value;
    } catch (const std::exception& e) {
      throw Error("study run " + cell.model->id + " n=" + std::to_string(cell.n) +
                  " run=" + std::to_string(cell.run) + ": " + e.what());
    }
    p_values[t] = p;
    std::lock_guard lock(mutex);
    if (checkpoint.is_open())
      checkpoint << run_line({ cell.model->id, cell.n, cell.run, p }) << std::flush;
    ++finished;
    if (options.on_progress)
      options.on_progress({ finished, cells.size() });
  });

  for (std::size_t t = 0; t < todo.size(); ++t) {
    const Cell& cell = cells[todo[t]];
    done[{ cell.model->id, cell.n, cell.run }] = p_values[t];
  }

  StudyResult result;
  result.M = design.M;
  for (const Cell& cell : cells) {
    const auto it = done.find({ cell.model->id, cell.n, cell.run });
    if (it == done.end()) {
      result.complete = false;
      continue;
    }
    result.runs.push_back({ cell.model->id, cell.n, cell.run, it->second });
  }
  result.rows = tabulate(result.runs, design.alphas, design.M);
  return result;
}

std::vector<StudyRow> tabulate(const std::vector<RunRecord>& runs, const std::vector<double>& alphas,
                               std::size_t /*M*/)
{
  std::vector<std::pair<std::string, std::size_t>> order;
  std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
  for (const RunRecord& r : runs) {
    auto key = std::make_pair(r.model_id, r.n);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted)
      order.push_back(key);
    it->second.push_back(r.p_value);
  }
  std::vector<StudyRow> rows;
  for (const auto& key : order) {
    const std::vector<double>& ps = groups[key];
    const double m = static_cast<double>(ps.size());
    for (double alpha : alphas) {
      const auto rejected = std::count_if(ps.begin(), ps.end(), [&](double p) { return p < alpha; });
      const double prop = static_cast<double>(rejected) / m;
      rows.push_back({ key.first, key.second, alpha, prop, std::sqrt(prop * (1.0 - prop) / m) });
    }
  }
  return rows;
}

std::string format_fixed(double value, int digits)
{
  char buf[128];
  const auto r = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, digits);
  return std::string(buf, r.ptr);
}

std::string export_table(const StudyResult& result, TableLayout layout, const StudyResult* baseline)
{
  const bool with_baseline =
    baseline != nullptr && (layout == TableLayout::table2 || layout == TableLayout::table3);

  std::vector<double> alphas;
  std::vector<std::pair<std::string, std::size_t>> keys;
  std::map<std::tuple<std::string, std::size_t, double>, double> primary;
  std::map<std::tuple<std::string, std::size_t, double>, double> base;
  for (const StudyRow& r : result.rows) {
    if (std::find(alphas.begin(), alphas.end(), r.alpha) == alphas.end())
      alphas.push_back(r.alpha);
    const auto key = std::make_pair(r.model_id, r.n);
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      keys.push_back(key);
    primary[{ r.model_id, r.n, r.alpha }] = r.proportion;
  }
  std::sort(alphas.begin(), alphas.end());
  if (alphas.empty())
    alphas = { 0.01, 0.05, 0.10 };
  if (with_baseline)
    for (const StudyRow& r : baseline->rows)
      base[{ r.model_id, r.n, r.alpha }] = r.proportion;

  std::string out = "model,size";
  for (double a : alphas)
    out += "," + alpha_label(a);
  if (with_baseline)
    for (double a : alphas)
      out += ",em_" + alpha_label(a);
  out += "\n";
  for (const auto& [model, n] : keys) {
    out += model + "," + std::to_string(n);
    for (double a : alphas) {
      const auto it = primary.find({ model, n, a });
      out += "," + (it == primary.end() ? std::string() : format_fixed(it->second, 3));
    }
    if (with_baseline)
      for (double a : alphas) {
        const auto it = base.find({ model, n, a });
        out += "," + (it == base.end() ? std::string() : format_fixed(it->second, 3));
      }
    out += "\n";
  }
  return out;
}

StudyResult parse_table(std::string_view csv)
{
  const std::vector<std::string> lines = lines_of(csv);
  if (lines.empty())
    throw IoError("table is empty");
  const std::vector<std::string> header = split(lines[0], ',');
  if (header.size() < 2 || header[0] != "model" || header[1] != "size")
    throw IoError("table header must start with model,size");
  std::vector<std::pair<std::size_t, double>> columns;
  for (std::size_t c = 2; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h.rfind("em_", 0) == 0)
      continue;
    if (h.empty() || h.back() != '%')
      throw IoError("unexpected column " + h);
    double pct = 0.0;
    if (!parse_number(std::string_view(h).substr(0, h.size() - 1), pct))
      throw IoError("unexpected column " + h);
    columns.emplace_back(c, pct / 100.0);
  }
  StudyResult out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty())
      continue;
    const std::vector<std::string> f = split(lines[i], ',');
    if (f.size() != header.size())
      throw IoError("row " + std::to_string(i + 1) + " has the wrong number of fields");
    std::size_t n = 0;
    if (!parse_number(std::string_view(f[1]), n))
      throw IoError("row " + std::to_string(i + 1) + " has a malformed size");
    for (const auto& [c, alpha] : columns) {
      if (f[c].empty())
        continue;
      double p = 0.0;
      if (!parse_number(std::string_view(f[c]), p))
        throw IoError("row " + std::to_string(i + 1) + " has a malformed proportion");
      out.rows.push_back({ f[0], n, alpha, p, 0.0 });
    }
  }
  return out;
}

std::string export_runs(const StudyResult& result)
{
  std::string out = "model,n,run,p_value\n";
  for (const RunRecord& r : result.runs)
    out += run_line(r);
  return out;
}

std::vector<RunRecord> parse_runs(std::string_view csv)
{
  std::vector<RunRecord> out;
  for (const std::string& line : lines_of(csv)) {
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 4)
      continue;
    RunRecord r;
    r.model_id = f[0];
    if (!parse_number(std::string_view(f[1]), r.n) || !parse_number(std::string_view(f[2]), r.run) ||
        !parse_number(std::string_view(f[3]), r.p_value))
      continue; // header or a partially written line
    out.push_back(std::move(r));
  }
  return out;
}

} // namespace circmode
