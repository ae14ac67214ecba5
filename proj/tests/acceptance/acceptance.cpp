// Acceptance criteria runner. `circmode_acceptance N` checks criterion N and
// prints one PASS/FAIL/SKIP line; exit status 0 pass, 1 fail, 77 skip.

#include <circmode/circmode.hpp>

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

using namespace circmode;

namespace {

constexpr int kSkip = 77;

struct Outcome
{
  bool pass = false;
  std::string detail;
  bool skipped = false;
};

std::string fmt(const char* spec, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Tie-free random samples: a rotating mix of uniform draws and zoo models.
AngleSample random_sample(std::uint64_t id, std::size_t n)
{
  static const char* kModels[] = { "M1", "M4", "M6", "M8", "M11", "M13" };
  RngStream rng(20240601, id);
  for (;;) {
    AngleSample s = id % 7 == 0 ? AngleSample(oracle::uniform_sample(rng, n))
                                : zoo_model(kModels[id % 6]).model.sample(n, rng);
    if (!s.has_ties())
      return s;
  }
}

double rejection_rate(const std::string& model, std::size_t n, std::size_t M, std::size_t B,
                      std::size_t k, std::uint64_t seed)
{
  StudyDesign d;
  d.models = { zoo_model(model) };
  d.sample_sizes = { n };
  d.alphas = { 0.05 };
  d.M = M;
  d.B = B;
  d.k = k;
  d.seed = seed;
  const StudyResult r = run_study(d, WhichTest::likelihood);
  return r.rows.at(0).proportion;
}

Outcome criterion_1()
{
  const std::size_t sizes[] = { 5, 50, 500 };
  std::size_t ok = 0;
  double worst_gap = 0.0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const std::size_t n = sizes[i % 3];
    const AngleSample s = random_sample(100 + i, n);
    const double uniform = -static_cast<double>(n) * std::log(kTwoPi);
    const double gap = std::abs(log_cv_pseudo_likelihood(s, 1e3) - uniform);
    worst_gap = std::max(worst_gap, gap);
    const bool low = log_cv_pseudo_likelihood(s, 1e-6) < -1e3;
    double best = -INFINITY;
    for (int j = 0; j < 10000; ++j)
      best = std::max(best, log_cv_pseudo_likelihood(s, 1e-6 * std::pow(1e9, j / 9999.0)));
    ok += gap <= 1e-4 && low && std::isfinite(best);
  }
  return { ok == 20, std::to_string(ok) + "/20 samples; worst |l(1e3) + n log 2pi| = " + fmt("%.2e", worst_gap) };
}

Outcome criterion_2()
{
  const std::size_t sizes[] = { 10, 50, 200 };
  std::size_t ok = 0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const AngleSample s = random_sample(200 + i, sizes[i % 3]);
    std::size_t prev = SIZE_MAX;
    bool monotone = true;
    for (int j = 0; j < 50; ++j) {
      const double h = 1e-3 * std::pow(1e4, j / 49.0);
      const std::size_t c = count_modes(KdeSpec(s, h)).count;
      monotone = monotone && c <= prev;
      prev = c;
    }
    ok += monotone && prev == 1;
  }
  return { ok == 50, std::to_string(ok) + "/50 samples nonincreasing and unimodal at h = 10" };
}

Outcome criterion_3()
{
  const std::size_t sizes[] = { 20, 100, 300 };
  std::size_t ok = 0;
  std::size_t floors = 0;
  for (std::uint64_t i = 0; i < 30; ++i) {
    const AngleSample s = random_sample(300 + i, sizes[i % 3]);
    for (std::size_t k : { 1u, 2u }) {
      const auto r = critical_bandwidth(s, k);
      const bool at = count_modes(KdeSpec(s, r.h_k)).count <= k;
      bool below = true;
      if (r.floor_hit)
        ++floors;
      else
        below = count_modes(KdeSpec(s, r.h_k * (1.0 - 1e-4))).count > k;
      ok += at && below;
    }
  }
  return { ok == 60, std::to_string(ok) + "/60 (sample, k) cases; " + std::to_string(floors) + " floor hits" };
}

Outcome criterion_4()
{
  std::size_t checked = 0;
  std::size_t ok = 0;
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    RngStream rng(4, i);
    const std::size_t n = 1 + rng.uniform_index(12);
    std::vector<double> xs = oracle::uniform_sample(rng, n);
    const AngleSample s(xs);
    if (s.has_ties())
      continue;
    for (std::size_t k : { 1u, 2u })
      for (int j = 0; j < 20; ++j) {
        const double lambda = 1e-2 * std::pow(1e4, j / 19.0);
        const double err = std::abs(empirical_excess_mass(s, k, lambda).value -
                                    oracle::excess_mass_bruteforce(xs, k, lambda));
        worst = std::max(worst, err);
        ++checked;
        ok += err <= 1e-12;
      }
  }
  return { ok == checked && checked == 8000,
           std::to_string(ok) + "/" + std::to_string(checked) + " values; max error " + fmt("%.1e", worst) };
}

Outcome criterion_5()
{
  const double m1 = null_statistic_atoms(zoo_model("M1").model, 1000, 200, 1, 51).p_zero_hat;
  const double m5 = null_statistic_atoms(zoo_model("M5").model, 1000, 200, 1, 55).p_zero_hat;
  return { m1 >= 0.28 && m1 <= 0.48 && m5 >= 0.0 && m5 <= 0.09,
           "P(D1 = 0): M1 " + fmt("%.3f", m1) + " (want [0.28, 0.48]), M5 " + fmt("%.3f", m5) +
             " (want [0, 0.09])" };
}

Outcome criterion_6()
{
  const double m1 = rejection_rate("M1", 100, 200, 200, 1, 61);
  const double m5 = rejection_rate("M5", 500, 200, 200, 1, 65);
  return { m1 <= 0.06 && m5 > 0.05,
           "alpha 0.05: M1 n=100 " + fmt("%.3f", m1) + " (want <= 0.06), M5 n=500 " + fmt("%.3f", m5) +
             " (want > 0.05)" };
}

Outcome criterion_7()
{
  const double m6 = rejection_rate("M6", 500, 200, 200, 1, 76);
  const double m9 = rejection_rate("M9", 500, 200, 200, 1, 79);
  return { m6 >= 0.60 && m6 <= 0.84 && m9 >= 0.35,
           "alpha 0.05: M6 n=500 " + fmt("%.3f", m6) + " (want [0.60, 0.84]), M9 n=500 " + fmt("%.3f", m9) +
             " (want >= 0.35)" };
}

Outcome criterion_8()
{
  const double m13 = rejection_rate("M13", 100, 100, 200, 2, 813);
  return { m13 >= 0.58 && m13 <= 0.85, "alpha 0.05, k = 2: M13 n=100 " + fmt("%.3f", m13) + " (want [0.58, 0.85])" };
}

Outcome criterion_9()
{
  const char* env = std::getenv("CIRCMODE_BIRD_DATA");
  const std::filesystem::path dir = env ? env : CIRCMODE_SOURCE_DIR "/data";
  const auto pre_path = dir / "pre_construction.txt";
  const auto post_path = dir / "post_construction.txt";
  if (!std::filesystem::exists(pre_path) || !std::filesystem::exists(post_path))
    return { false, "bird data not found under " + dir.string() + " (see tools/fetch_bird_data.sh)", true };

  const char* unit = std::getenv("CIRCMODE_BIRD_UNIT");
  AngleFileSpec spec;
  spec.unit = unit && std::string(unit) == "radians" ? AngleUnit::radians : AngleUnit::degrees;
  TestOptions o;
  o.k = 1;
  o.B = 1000;
  o.seed = 9;
  spec.path = post_path;
  const double post = run_test(load_angles(spec).sample, o).p_value;
  spec.path = pre_path;
  const double pre = run_test(load_angles(spec).sample, o).p_value;
  return { post < 0.01 && pre > 0.10,
           "p-values: post-construction " + fmt("%.3f", post) + " (want < 0.01), pre-construction " +
             fmt("%.3f", pre) + " (want > 0.10)" };
}

std::string read_file(const std::filesystem::path& p)
{
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::filesystem::path& p)
{
  std::ifstream in(p);
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);)
    lines += !line.empty();
  return lines;
}

Outcome criterion_10()
{
  const auto dir = std::filesystem::temp_directory_path() / "circmode_acceptance_10";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string cli = CIRCMODE_CLI_PATH;
  const std::string base =
    cli + " simulate --models M1,M6 --sizes 50,100 --M 3 --B 20 --seed 10 --workers 2";
  auto run = [&](const std::string& extra, const std::string& out) {
    const std::string cmd = base + " " + extra + " > " + (dir / out).string() + " 2> " + (dir / "stderr").string();
    return std::system(cmd.c_str());
  };
  const auto ck = dir / "checkpoint.csv";
  const int first = run("--checkpoint " + ck.string() + " --stop-after 5", "partial.csv");
  const std::size_t after_stop = count_lines(ck);
  const int second = run("--checkpoint " + ck.string(), "resumed.csv");
  const std::size_t after_resume = count_lines(ck);
  const int fresh = run("", "fresh.csv");
  const bool same = read_file(dir / "resumed.csv") == read_file(dir / "fresh.csv");
  const bool pass = first == 0 && second == 0 && fresh == 0 && after_stop == 1 + 5 && after_resume == 1 + 12 && same;
  std::filesystem::remove_all(dir);
  return { pass, "checkpoint rows after interruption " + std::to_string(after_stop - 1) + "/12, after resume " +
                   std::to_string(after_resume - 1) + "/12; resumed table " +
                   (same ? "matches" : "differs from") + " an uninterrupted run" };
}

Outcome criterion_11()
{
  std::size_t ok = 0;
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const AngleSample s = random_sample(1100 + i, 40 + 10 * (i % 5));
    const double shift = 0.3 + 0.29 * static_cast<double>(i);
    const AngleSample rot = s.rotated(shift);
    const AngleSample ref = s.reflected();
    const double d = dk_statistic(s, 1).d;
    const double delta = delta_statistic(s, 1).delta;
    const double h = critical_bandwidth(s, 1).h_k;
    const double u2 = watson_u2(s, h);
    double err = 0.0;
    for (const AngleSample* t : { &rot, &ref }) {
      err = std::max(err, std::abs(dk_statistic(*t, 1).d - d));
      err = std::max(err, std::abs(delta_statistic(*t, 1).delta - delta));
      err = std::max(err, std::abs(watson_u2(*t, critical_bandwidth(*t, 1).h_k) - u2));
    }
    worst = std::max(worst, err);
    ok += err <= 1e-8;
  }

  std::size_t deterministic = 0;
  for (std::uint64_t i = 0; i < 3; ++i) {
    const AngleSample s = random_sample(1200 + i, 80);
    TestOptions o;
    o.B = 40;
    o.seed = 1234 + i;
    o.workers = 1;
    const TestReport one = run_test(s, o);
    o.workers = 4;
    const TestReport four = run_test(s, o);
    deterministic += one.replicates == four.replicates && one.p_value == four.p_value && one.observed == four.observed;
  }
  return { ok == 20 && deterministic == 3,
           std::to_string(ok) + "/20 samples invariant (max deviation " + fmt("%.1e", worst) + "), " +
             std::to_string(deterministic) + "/3 tests identical across 1 and 4 workers" };
}

const std::map<int, std::pair<const char*, std::function<Outcome()>>>& criteria()
{
  static const std::map<int, std::pair<const char*, std::function<Outcome()>>> all{
    { 1, { "cross-validation likelihood limits", criterion_1 } },
    { 2, { "mode count nonincreasing in h", criterion_2 } },
    { 3, { "critical bandwidth splits the mode count", criterion_3 } },
    { 4, { "excess mass equals exhaustive enumeration", criterion_4 } },
    { 5, { "zero atom of D1 under the null", criterion_5 } },
    { 6, { "calibration, k = 1", criterion_6 } },
    { 7, { "power, k = 1", criterion_7 } },
    { 8, { "power, k = 2", criterion_8 } },
    { 9, { "bird flight directions", criterion_9 } },
    { 10, { "simulation checkpoint and resume", criterion_10 } },
    { 11, { "invariance and worker determinism", criterion_11 } },
  };
  return all;
}

int run_one(int id)
{
  const auto& [name, fn] = criteria().at(id);
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = fn();
  } catch (const std::exception& e) {
    out = { false, std::string("exception: ") + e.what() };
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const char* tag = out.skipped ? "SKIP" : out.pass ? "PASS" : "FAIL";
  std::printf("%s criterion %d (%s): %s [%.1fs]\n", tag, id, name, out.detail.c_str(), secs);
  std::fflush(stdout);
  return out.skipped ? kSkip : out.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <criterion 1-11 | all>\n", argv[0]);
    return 2;
  }
  const std::string arg = argv[1];
  if (arg == "all") {
    int failures = 0;
    for (const auto& [id, entry] : criteria())
      failures += run_one(id) == 1;
    return failures == 0 ? 0 : 1;
  }
  const int id = std::atoi(arg.c_str());
  if (!criteria().contains(id)) {
    std::fprintf(stderr, "unknown criterion '%s'\n", arg.c_str());
    return 2;
  }
  return run_one(id);
}
