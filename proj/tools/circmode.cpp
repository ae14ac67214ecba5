// circmode command-line front end.

#include <circmode/circmode.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

using namespace circmode;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitInputError = 2;
constexpr int kExitFailure = 1;

struct InputOptions
{
  std::string path;
  std::string unit = "radians";
  std::string convention = "compass";
  std::string column;
};

struct Common
{
  InputOptions input;
  std::size_t k = 1;
  std::size_t B = 500;
  std::optional<double> alpha = 0.05;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
  std::string format = "human";
};

std::string num(double v)
{
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, bool announce)
{
  if (flag)
    return *flag;
  if (const char* env = std::getenv("CIRCMODE_SEED")) {
    std::uint64_t v = 0;
    const std::string_view s(env);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      throw InvalidParameter("CIRCMODE_SEED must be an unsigned integer");
    return v;
  }
  std::random_device rd;
  const std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  if (announce)
    std::cerr << "seed: " << v << " (pass --seed " << v << " to reproduce)\n";
  return v;
}

AngleSample load(const InputOptions& in)
{
  if (in.path.empty())
    throw InvalidParameter("--input is required");
  AngleFileSpec spec;
  spec.path = in.path;
  spec.unit = in.unit == "degrees" ? AngleUnit::degrees : AngleUnit::radians;
  spec.convention = in.convention == "math" ? AngleConvention::math : AngleConvention::compass;
  if (!in.column.empty())
    spec.column = in.column;
  LoadReport report = load_angles(spec);
  for (const std::string& w : report.warnings)
    std::cerr << "warning: " << w << "\n";
  return std::move(report.sample);
}

void add_input(CLI::App* cmd, InputOptions& in)
{
  cmd->add_option("--input,-i", in.path, "File with one angle per line, or a delimited file with header")
    ->required();
  cmd->add_option("--unit", in.unit, "Angle unit")->check(CLI::IsMember({ "radians", "degrees" }));
  cmd->add_option("--convention", in.convention, "compass (clockwise from north) or math (counterclockwise from east)")
    ->check(CLI::IsMember({ "compass", "math" }));
  cmd->add_option("--column", in.column, "Column name or 0-based index for delimited files");
}

void add_format(CLI::App* cmd, Common& c, std::initializer_list<std::string> allowed)
{
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember(std::vector<std::string>(allowed)));
}

json report_json(const TestReport& r, const std::string& command)
{
  json j;
  j["schema"] = 1;
  j["command"] = command;
  j["statistic"] = r.statistic;
  j["k"] = r.k;
  j["n"] = r.n;
  j["observed"] = r.observed;
  j["h_k"] = r.h_k;
  j["floor_hit"] = r.floor_hit;
  j["h_max"] = r.h_max ? json(*r.h_max) : json(nullptr);
  j["h_H0"] = r.h_H0 ? json(*r.h_H0) : json(nullptr);
  j["lambda_star"] = r.lambda_star ? json(*r.lambda_star) : json(nullptr);
  j["B"] = r.B;
  j["p_value"] = r.p_value;
  j["alpha"] = r.alpha ? json(*r.alpha) : json(nullptr);
  j["reject"] = r.reject ? json(*r.reject) : json(nullptr);
  j["seed"] = r.master_seed;
  j["replicates"] = r.replicates;
  const auto& t = r.tuning;
  j["tuning"] = {
    { "p_value_rule", t.p_value_rule == PValueRule::strict_greater ? "strict_greater" : "plus_one" },
    { "replicate_constraint", t.replicate_constraint == ReplicateConstraint::recompute ? "recompute" : "reuse_observed" },
    { "h_floor", t.search.h_floor },
    { "h_ceil", t.search.h_ceil },
    { "bracketing_tol_rel", t.search.bracketing_tol_rel },
    { "profile_grid_points", t.search.profile_grid_points },
    { "golden_tol_rel", t.search.golden_tol_rel },
  };
  return j;
}

std::string p_value_text(const TestReport& r)
{
  if (r.p_value == 0.0)
    return "< " + num(1.0 / static_cast<double>(r.B)) + " (1/B)";
  return num(r.p_value);
}

void print_report(const TestReport& r, const std::string& command, const std::string& format)
{
  if (format == "json") {
    std::cout << report_json(r, command).dump(2) << "\n";
    return;
  }
  if (format == "csv") {
    std::cout << "statistic,k,n,observed,h_k,floor_hit,B,p_value,seed\n"
              << r.statistic << "," << r.k << "," << r.n << "," << num(r.observed) << "," << num(r.h_k) << ","
              << (r.floor_hit ? "true" : "false") << "," << r.B << "," << num(r.p_value) << "," << r.master_seed
              << "\n";
    return;
  }
  std::cout << (command == "emtest" ? "Excess-mass test, unmodified calibration" : "Likelihood-ratio multimodality test")
            << " (H0: at most " << r.k << " mode" << (r.k == 1 ? "" : "s") << ")\n";
  std::cout << "  n            " << r.n << "\n";
  std::cout << "  " << (r.statistic == "D_k" ? "D_k          " : "Delta_k+1    ") << num(r.observed) << "\n";
  std::cout << "  h_k          " << num(r.h_k) << (r.floor_hit ? " (floor hit)" : "") << "\n";
  if (r.h_max)
    std::cout << "  h_max        " << num(*r.h_max) << "\n";
  if (r.h_H0)
    std::cout << "  h_H0         " << num(*r.h_H0) << "\n";
  if (r.lambda_star)
    std::cout << "  lambda*      " << num(*r.lambda_star) << "\n";
  std::cout << "  B            " << r.B << "\n";
  std::cout << "  p-value      " << p_value_text(r) << "\n";
  if (r.alpha && r.reject)
    std::cout << "  decision     " << (*r.reject ? "reject" : "do not reject") << " H0 at alpha = " << num(*r.alpha)
              << "\n";
  std::cout << "  seed         " << r.master_seed << "\n";
}

TestOptions test_options(const Common& c, bool announce)
{
  TestOptions o;
  o.k = c.k;
  o.B = c.B;
  o.alpha = c.alpha;
  o.seed = resolve_seed(c.seed, announce);
  o.workers = c.workers;
  return o;
}

std::vector<std::string> split_list(const std::string& s)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty())
      out.push_back(item);
  return out;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Multimodality tests for circular data" };
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", "circmode 0.1.0");

  Common test_c;
  auto* test = app.add_subcommand("test", "Likelihood-ratio test of at most k modes");
  add_input(test, test_c.input);
  test->add_option("--k", test_c.k, "Number of modes under H0")->check(CLI::PositiveNumber);
  test->add_option("--B", test_c.B, "Bootstrap resamples")->check(CLI::PositiveNumber);
  test->add_option("--alpha", test_c.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  test->add_option("--seed", test_c.seed, "Master seed (falls back to CIRCMODE_SEED)");
  test->add_option("--workers", test_c.workers, "Worker threads (0 = all cores)");
  std::string constraint = "recompute";
  test->add_option("--replicate-constraint", constraint, "Null constraint inside replicates")
    ->check(CLI::IsMember({ "recompute", "reuse" }));
  bool plus_one = false;
  test->add_flag("--plus-one", plus_one, "Use (1 + #{D* >= D}) / (B + 1) for the p-value");
  add_format(test, test_c, { "human", "json", "csv" });

  Common em_c;
  auto* em = app.add_subcommand("emtest", "Excess-mass test (unmodified calibration)");
  add_input(em, em_c.input);
  em->add_option("--k", em_c.k, "Number of modes under H0")->check(CLI::PositiveNumber);
  em->add_option("--B", em_c.B, "Bootstrap resamples")->check(CLI::PositiveNumber);
  em->add_option("--alpha", em_c.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  em->add_option("--seed", em_c.seed, "Master seed (falls back to CIRCMODE_SEED)");
  em->add_option("--workers", em_c.workers, "Worker threads (0 = all cores)");
  add_format(em, em_c, { "human", "json", "csv" });

  Common cb_c;
  auto* critbw = app.add_subcommand("critbw", "Critical bandwidth h_k");
  add_input(critbw, cb_c.input);
  critbw->add_option("--k", cb_c.k, "Target number of modes")->check(CLI::PositiveNumber);
  add_format(critbw, cb_c, { "human", "json", "csv" });

  Common curve_c;
  curve_c.format = "csv";
  std::vector<double> curve_h;
  std::size_t curve_grid = 512;
  auto* curve = app.add_subcommand("kde-curve", "Kernel density on a grid, long format (h, x, density)");
  add_input(curve, curve_c.input);
  curve->add_option("--h", curve_h, "Bandwidths (repeat or comma-separate)")
    ->required()
    ->delimiter(',')
    ->check(CLI::PositiveNumber);
  curve->add_option("--grid", curve_grid, "Grid points per bandwidth")->check(CLI::Range(2, 1000000));
  add_format(curve, curve_c, { "csv", "json" });

  Common sim_c;
  sim_c.format = "csv";
  sim_c.B = 500;
  std::string sim_models;
  std::string sim_sizes = "100,500,1000";
  std::string sim_test = "lrt";
  std::string sim_checkpoint;
  std::string sim_runs_out;
  std::string sim_layout = "auto";
  std::size_t sim_M = 1000;
  std::optional<std::size_t> sim_stop_after;
  auto* sim = app.add_subcommand("simulate", "Simulation study over the model zoo");
  sim->add_option("--models", sim_models, "Comma-separated model ids (default: all fifteen)");
  sim->add_option("--sizes", sim_sizes, "Comma-separated sample sizes");
  sim->add_option("--M", sim_M, "Monte Carlo runs per cell")->check(CLI::PositiveNumber);
  sim->add_option("--B", sim_c.B, "Bootstrap resamples")->check(CLI::PositiveNumber);
  sim->add_option("--k", sim_c.k, "Number of modes under H0")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_c.seed, "Master seed (falls back to CIRCMODE_SEED)");
  sim->add_option("--workers", sim_c.workers, "Worker threads (0 = all cores)");
  sim->add_option("--test", sim_test, "lrt or em")->check(CLI::IsMember({ "lrt", "em" }));
  sim->add_option("--checkpoint", sim_checkpoint, "Append-only record of finished runs; resumes from it");
  sim->add_option("--runs-out", sim_runs_out, "Write per-run p-values to this CSV file");
  sim->add_option("--stop-after", sim_stop_after, "Stop after this many new runs");
  sim->add_option("--layout", sim_layout, "Table layout")->check(CLI::IsMember({ "auto", "table2", "table3", "table4", "table5" }));
  add_format(sim, sim_c, { "csv", "json" });

  Common sum_c;
  auto* summ = app.add_subcommand("summarize", "Mean direction and resultant length");
  add_input(summ, sum_c.input);
  add_format(summ, sum_c, { "human", "json" });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (*test) {
      const AngleSample s = load(test_c.input);
      TestOptions o = test_options(test_c, test_c.format == "human");
      o.replicate_constraint =
        constraint == "reuse" ? ReplicateConstraint::reuse_observed : ReplicateConstraint::recompute;
      o.p_value_rule = plus_one ? PValueRule::plus_one : PValueRule::strict_greater;
      print_report(run_test(s, o), "test", test_c.format);
    } else if (*em) {
      const AngleSample s = load(em_c.input);
      print_report(excess_mass_test(s, test_options(em_c, em_c.format == "human")), "emtest", em_c.format);
    } else if (*critbw) {
      const AngleSample s = load(cb_c.input);
      const auto r = critical_bandwidth(s, cb_c.k);
      if (cb_c.format == "json") {
        json j;
        j["schema"] = 1;
        j["command"] = "critbw";
        j["k"] = r.k;
        j["n"] = s.size();
        j["h_k"] = r.h_k;
        j["floor_hit"] = r.floor_hit;
        j["modes_at_hk"] = r.modes_at_hk;
        j["modes_below"] = r.modes_below;
        j["bracketing_tol_rel"] = r.bracketing_tol_rel;
        std::cout << j.dump(2) << "\n";
      } else if (cb_c.format == "csv") {
        std::cout << "k,n,h_k,floor_hit,modes_at_hk,modes_below\n"
                  << r.k << "," << s.size() << "," << num(r.h_k) << "," << (r.floor_hit ? "true" : "false") << ","
                  << r.modes_at_hk << "," << r.modes_below << "\n";
      } else {
        std::cout << "critical bandwidth h_" << r.k << " = " << num(r.h_k);
        if (r.floor_hit)
          std::cout << " (floor hit: at most " << r.k << " modes at every resolvable bandwidth)";
        std::cout << "\n  modes at h_k: " << r.modes_at_hk << ", just below: " << r.modes_below << "\n";
      }
    } else if (*curve) {
      const AngleSample s = load(curve_c.input);
      json rows = json::array();
      if (curve_c.format == "csv")
        std::cout << "h,x,density\n";
      for (double h : curve_h) {
        const KdeSpec spec(s, h);
        for (std::size_t j = 0; j < curve_grid; ++j) {
          const double x = kTwoPi * static_cast<double>(j + 1) / static_cast<double>(curve_grid);
          const double f = kde_density(spec, x);
          if (curve_c.format == "csv")
            std::cout << num(h) << "," << num(x) << "," << num(f) << "\n";
          else
            rows.push_back({ { "h", h }, { "x", x }, { "density", f } });
        }
      }
      if (curve_c.format == "json") {
        json j;
        j["schema"] = 1;
        j["command"] = "kde-curve";
        j["rows"] = rows;
        std::cout << j.dump(2) << "\n";
      }
    } else if (*sim) {
      StudyDesign d;
      const std::vector<std::string> ids = split_list(sim_models);
      if (ids.empty())
        d.models = model_zoo();
      else
        for (const std::string& id : ids)
          d.models.push_back(zoo_model(id));
      d.sample_sizes.clear();
      for (const std::string& item : split_list(sim_sizes)) {
        std::size_t n = 0;
        const auto r = std::from_chars(item.data(), item.data() + item.size(), n);
        if (r.ec != std::errc() || r.ptr != item.data() + item.size())
          throw InvalidParameter("malformed --sizes entry '" + item + "'");
        d.sample_sizes.push_back(n);
      }
      d.M = sim_M;
      d.B = sim_c.B;
      d.k = sim_c.k;
      d.seed = resolve_seed(sim_c.seed, true);
      StudyOptions so;
      so.workers = sim_c.workers;
      if (!sim_checkpoint.empty())
        so.checkpoint = sim_checkpoint;
      so.stop_after = sim_stop_after;
      const StudyResult result = run_study(d, sim_test == "em" ? WhichTest::excess_mass : WhichTest::likelihood, so);
      if (!sim_runs_out.empty()) {
        std::ofstream out(sim_runs_out);
        if (!out)
          throw IoError("cannot write " + sim_runs_out);
        out << export_runs(result);
      }
      if (!result.complete)
        std::cerr << "study incomplete: " << result.runs.size() << " runs recorded\n";
      TableLayout layout = d.k == 1 ? TableLayout::table3 : TableLayout::table5;
      if (sim_layout == "table2")
        layout = TableLayout::table2;
      else if (sim_layout == "table3")
        layout = TableLayout::table3;
      else if (sim_layout == "table4")
        layout = TableLayout::table4;
      else if (sim_layout == "table5")
        layout = TableLayout::table5;
      if (sim_c.format == "json") {
        json j;
        j["schema"] = 1;
        j["command"] = "simulate";
        j["test"] = sim_test;
        j["M"] = d.M;
        j["B"] = d.B;
        j["k"] = d.k;
        j["seed"] = d.seed;
        j["complete"] = result.complete;
        json rows = json::array();
        for (const StudyRow& r : result.rows)
          rows.push_back({ { "model", r.model_id },
                           { "n", r.n },
                           { "alpha", r.alpha },
                           { "proportion", r.proportion },
                           { "mc_standard_error", r.mc_standard_error } });
        j["rows"] = rows;
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << export_table(result, layout);
      }
    } else if (*summ) {
      const AngleSample s = load(sum_c.input);
      const SampleSummary r = summarize(s);
      if (sum_c.format == "json") {
        json j;
        j["schema"] = 1;
        j["command"] = "summarize";
        j["n"] = r.n;
        j["mean_direction"] = r.mean_defined ? json(r.mean_direction) : json(nullptr);
        j["resultant_length"] = r.resultant_length;
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << "n                 " << r.n << "\n";
        std::cout << "mean direction    " << (r.mean_defined ? num(r.mean_direction) : "undefined") << "\n";
        std::cout << "resultant length  " << num(r.resultant_length) << "\n";
      }
    }
  } catch (const TieError& e) {
    std::cerr << "error: " << e.what()
              << "; the test needs distinct observations (repeated angles make the "
                 "cross-validation likelihood unbounded)\n";
    return kExitInputError;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const InsufficientSample& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
