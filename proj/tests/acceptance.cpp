// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Benchmark criteria run at desk scale (20 or 10 replications).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "kdr/cli.hpp"
#include "kdr/kdr.hpp"
#include "test_util.hpp"

using namespace kdr;

namespace {

int failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Collected from every KDR benchmark fit for the manifold criterion.
double worst_orthonormality = 0.0;
bool all_monotone = true;
int kdr_cells = 0;

BenchResult bench(Regression r, double p, Method m, int reps) {
  BenchConfig cfg;
  BenchResult res = run_benchmark(r, p, m, reps, cfg);
  if (m == Method::KDR) {
    worst_orthonormality = std::max(worst_orthonormality, res.max_orthonormality_error);
    all_monotone = all_monotone && res.traces_monotone;
    ++kdr_cells;
  }
  std::printf("  %s %s %g: mean %.4f sd %.4f failures %d (%.1f s)\n", to_string(m).c_str(), to_string(r).c_str(), p,
              res.mean, res.sd, res.failures, res.wall_time_s);
  std::fflush(stdout);
  return res;
}

void gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd x = test::gaussian(20, 4, rng);
    const GramMatrix gy = test::random_response_gram(20, 1.0, rng);
    const StiefelPoint b = random_stiefel(4, 2, rng);
    const double c = trial % 2 ? 0.5 : 2.0;
    const Eigen::MatrixXd g = gradient(x, gy, b, c, RegCoeff(0.1));
    Eigen::MatrixXd fd(4, 2);
    const double h = 1e-5;
    for (long i = 0; i < 4; ++i)
      for (long j = 0; j < 2; ++j) {
        Eigen::MatrixXd plus = b.matrix(), minus = b.matrix();
        plus(i, j) += h;
        minus(i, j) -= h;
        fd(i, j) = (test::dense_contrast(x, gy.entries(), plus, c, 0.1) -
                    test::dense_contrast(x, gy.entries(), minus, c, 0.1)) /
                   (2 * h);
      }
    worst = std::max(worst, (g - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(t0);
  report("AC1 gradient vs finite differences", worst <= 1e-5 && secs < 10.0,
         fmt("max relative error %.3g", worst) + fmt(" (<= 1e-5), %.2f s (< 10 s)", secs));
}

void dual_form_check() {
  Rng rng = make_rng(2025);
  std::uniform_int_distribution<long> size(2, 100);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const long n = size(rng);
    const long m = 2 + trial % 5;
    const Eigen::MatrixXd x = test::gaussian(n, m, rng);
    const GramMatrix gy = test::random_response_gram(n, 0.5 + 0.05 * trial, rng);
    const StiefelPoint b = random_stiefel(m, 1 + trial % (m - 1), rng);
    const double eps = 0.01 + 0.01 * trial;
    const double c = 0.25 + 0.1 * trial;
    const double form2 = contrast(x, gy, b, c, RegCoeff(eps)).value;
    const double form1 = contrast_dual_form(x, gy, b, c, RegCoeff(eps));
    worst = std::max(worst, std::abs(form1 - eps * form2) / (1.0 + std::abs(form1)));
  }
  report("AC2 dual-form identity", worst <= 1e-8, fmt("max scaled gap %.3g (<= 1e-8)", worst));
}

void table_a() {
  const auto t0 = std::chrono::steady_clock::now();
  const double k1 = bench(Regression::A, 0.1, Method::KDR, 20).mean;
  const double k4 = bench(Regression::A, 0.4, Method::KDR, 20).mean;
  const double k8 = bench(Regression::A, 0.8, Method::KDR, 20).mean;
  const double sir = bench(Regression::A, 0.1, Method::SIR, 20).mean;
  const double secs = seconds_since(t0);
  const bool ok = k1 <= 0.25 && k4 <= 0.35 && k8 <= 0.60 && sir >= 0.30 && sir <= 0.90 && secs <= 600.0;
  std::ostringstream d;
  d << "KDR " << fmt("%.3f", k1) << " (<= 0.25), " << fmt("%.3f", k4) << " (<= 0.35), " << fmt("%.3f", k8)
    << " (<= 0.60); SIR " << fmt("%.3f", sir) << " in [0.30, 0.90]; " << fmt("%.0f s", secs) << " (<= 600 s)";
  report("AC4 regression A", ok, d.str());
}

void table_b() {
  const double k1 = bench(Regression::B, 0.1, Method::KDR, 20).mean;
  const double k3 = bench(Regression::B, 0.3, Method::KDR, 20).mean;
  report("AC5 regression B", k1 <= 0.15 && k3 <= 0.30,
         "KDR " + fmt("%.3f", k1) + " (<= 0.15), " + fmt("%.3f", k3) + " (<= 0.30)");
}

void table_c() {
  const auto t0 = std::chrono::steady_clock::now();
  const double kdr = bench(Regression::C, 0.0, Method::KDR, 10).mean;
  const double phd = bench(Regression::C, 0.0, Method::PHD, 10).mean;
  const double save = bench(Regression::C, 0.0, Method::SAVE, 10).mean;
  const double secs = seconds_since(t0);
  report("AC6 regression C", kdr <= 0.35 && phd >= 1.0 && save <= 0.55 && secs <= 1800.0,
         "KDR " + fmt("%.3f", kdr) + " (<= 0.35); pHd " + fmt("%.3f", phd) + " (>= 1.0); SAVE " +
             fmt("%.3f", save) + " (<= 0.55); " + fmt("%.0f s", secs) + " (<= 1800 s)");
}

void manifold_check() {
  report("AC3 manifold integrity", kdr_cells > 0 && worst_orthonormality <= 1e-10 && all_monotone,
         fmt("max |BtB - I| %.3g (<= 1e-10) over ", worst_orthonormality) + std::to_string(kdr_cells) +
             " KDR cells; traces monotone within segments: " + (all_monotone ? "yes" : "no"));
}

void probe_check() {
  const BenchConfig cfg;
  int lower = 0;
  for (int t = 0; t < 100; ++t) lower += probe_trial(Regression::A, 0.1, t, cfg).containing_lower() ? 1 : 0;
  report("AC7 true basis has lower contrast", lower >= 95, std::to_string(lower) + "/100 trials (>= 95)");
}

void metric_check() {
  Rng rng = make_rng(2026);
  double worst = 0.0;
  bool in_range = true;
  for (int trial = 0; trial < 100; ++trial) {
    const long m = 2 + trial % 9;
    const long d = 1 + trial % (m - 1);
    const StiefelPoint a = random_stiefel(m, d, rng);
    const StiefelPoint b = random_stiefel(m, d, rng);
    const double ab = projection_distance(a, b);
    in_range = in_range && ab >= 0.0 && ab <= std::sqrt(2.0 * static_cast<double>(d)) + 1e-10;
    worst = std::max(worst, std::abs(ab - projection_distance(b, a)));
    const StiefelPoint ar(a.matrix() * random_orthogonal(d, rng));
    worst = std::max(worst, std::abs(ab - projection_distance(ar, b)));
    const Eigen::MatrixXd u = random_orthogonal(m, rng);
    worst = std::max(worst, std::abs(ab - projection_distance(StiefelPoint(u * a.matrix()), StiefelPoint(u * b.matrix()))));
    const Eigen::MatrixXd diff = a.matrix() * a.matrix().transpose() - b.matrix() * b.matrix().transpose();
    worst = std::max(worst, std::abs(ab - diff.norm()));
  }
  report("AC8 distance metric properties", in_range && worst <= 1e-10,
         fmt("max deviation %.3g (<= 1e-10)", worst) + ", range ok: " + (in_range ? "yes" : "no"));
}

void baseline_check() {
  Rng rng = make_rng(2027);
  Dataset lin;
  lin.x = test::gaussian(2000, 5, rng);
  Eigen::VectorXd beta(5);
  beta << 1.0, -1.0, 2.0, 0.0, 0.5;
  lin.y = lin.x * beta + 0.2 * test::gaussian(2000, 1, rng);
  const double dist = projection_distance(StiefelPoint(Eigen::MatrixXd(beta.normalized())),
                                          fit_sir(lin, 1, SliceSpec{10}).basis);
  Dataset bin;
  bin.x = test::gaussian(300, 4, rng);
  bin.y.resize(300, 1);
  for (long i = 0; i < 300; ++i) bin.y(i, 0) = bin.x(i, 0) - bin.x(i, 2) > 0 ? 1.0 : 0.0;
  const bool warned = fit_sir(bin, 2, SliceSpec{0, SliceStrategy::PerLabel}).rank_warning;
  report("AC9 SIR sanity", dist <= 0.1 && warned,
         fmt("linear model distance %.4f (<= 0.1)", dist) + "; binary d=2 warning: " + (warned ? "yes" : "no"));
}

std::string run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "kdr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return std::to_string(code) + "\n" + out.str();
}

void determinism_check() {
  const std::vector<std::string> args{"bench", "--regression", "A", "--reps", "5", "--seed", "11"};
  const std::string first = run_cli(args);
  const std::string second = run_cli(args);
  report("AC10 bench output byte-identical", first == second && first.rfind("0\n", 0) == 0,
         std::to_string(first.size()) + " bytes, repeat " + (first == second ? "identical" : "differs"));
}

}  // namespace

int main() {
  gradient_check();
  dual_form_check();
  metric_check();
  baseline_check();
  probe_check();
  table_a();
  table_b();
  table_c();
  manifold_check();
  determinism_check();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
