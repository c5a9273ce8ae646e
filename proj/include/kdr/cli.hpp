#pragma once

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kdr/baselines.hpp"
#include "kdr/csv_io.hpp"
#include "kdr/dataset.hpp"
#include "kdr/error.hpp"
#include "kdr/evalbench.hpp"
#include "kdr/stiefel_opt.hpp"
#include "kdr/synth.hpp"

// Command-line front end:
//
//   kdr fit       fit a KDR subspace to a CSV file
//   kdr bench     Monte Carlo benchmark on regressions A, B, C
//   kdr probe     contrast at the true basis versus random bases
//   kdr generate  write a synthetic benchmark sample as CSV

namespace kdr::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,  // bad flags, malformed CSV, unknown method
  kConstantColumn = 3,
  kInvalidDim = 4,
  kBenchAborted = 5,
};

struct FitArgs {
  std::string data;
  std::string response;
  long dim = 0;
  double epsilon = 0.1;
  std::optional<double> scale_x;
  std::optional<double> scale_y;
  std::string continuation = "100:10";
  bool continuation_given = false;
  int iters = 100;
  double target_sd = 5.0;
  std::uint64_t seed = 0;
  int restarts = 0;
  std::string out;
};

struct BenchArgs {
  std::string regression;
  std::string methods = "kdr,sir,save,phd";
  int reps = 100;
  std::uint64_t seed = 1;
  std::vector<double> params;
  std::string slices_grid = "4,5,8,10,20";
  int iters = 100;
  double epsilon = 0.1;
  std::optional<long> n;
  std::string target_sd = "1.0";
  int restarts = 2;
  unsigned threads = 0;
  std::optional<double> scale_x;
  std::optional<double> scale_y;
  bool timing = false;
  std::string out;
};

struct ProbeArgs {
  std::string regression = "A";
  double param = 0.1;
  int trials = 100;
  std::uint64_t seed = 1;
  std::string target_sd = "1.0";
  double epsilon = 0.1;
  std::optional<long> n;
  std::optional<double> scale_x;
  std::optional<double> scale_y;
  std::string out;
};

struct GenerateArgs {
  std::string regression = "A";
  double param = 0.1;
  std::optional<long> n;
  std::uint64_t seed = 0;
  std::string out;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

inline std::optional<Continuation> parse_continuation(const std::string& s) {
  if (s == "none" || s == "off") return std::nullopt;
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw InvalidConfig("--continuation expects start:end or 'none'");
  Continuation c{std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
  c.validate();
  return c;
}

inline std::optional<double> parse_target_sd(const std::string& s) {
  if (s == "none" || s == "off") return std::nullopt;
  const double v = std::stod(s);
  if (!(v > 0.0)) throw InvalidConfig("--target-sd must be > 0 or 'none'");
  return v;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw Error("cannot write '" + p.string() + "'");
  return f;
}

inline std::string optional_field(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

/// Response columns are rescaled to `target_sd` unless constant.
inline Eigen::MatrixXd standardize_response(const Eigen::MatrixXd& y, double target_sd) {
  Eigen::MatrixXd out = y;
  const Eigen::VectorXd sd = column_sd(y);
  for (long j = 0; j < y.cols(); ++j) {
    if (sd(j) > 0.0) out.col(j) = (y.col(j).array() - y.col(j).mean()) * (target_sd / sd(j));
  }
  return out;
}

}  // namespace detail

/// Fits a KDR subspace to a CSV file and writes basis.csv, projected.csv and
/// manifest.txt into the output directory.
inline int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  if (a.dim < 1) {
    err << "error: --dim must be >= 1\n";
    return kInvalidDim;
  }
  Dataset raw;
  try {
    raw = read_csv(a.data, a.response);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  if (raw.samples() < 2) {
    err << "error: need at least two data rows\n";
    return kUsage;
  }
  if (a.dim >= raw.covariates()) {
    err << "error: --dim must be smaller than the number of covariates (" << raw.covariates() << ")\n";
    return kInvalidDim;
  }
  Dataset data;
  try {
    data = standardize(raw, a.target_sd);
  } catch (const ConstantColumn& e) {
    err << "error: " << e.what() << '\n';
    return kConstantColumn;
  }
  data.y = detail::standardize_response(raw.y, a.target_sd);

  KernelConfig k;
  OptimConfig o;
  try {
    // An explicit covariate scale without an explicit schedule means a fixed scale.
    if (a.continuation_given || !a.scale_x) k.continuation = detail::parse_continuation(a.continuation);
    if (a.scale_x) k.scale_x = *a.scale_x;
    k.scale_y = a.scale_y.value_or(k.final_scale_x());
    k.validate();
    o.iterations = a.iters;
    o.seed = a.seed;
    o.restarts = a.restarts;
    o.validate();
    (void)RegCoeff(a.epsilon);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  const FitResult fit = fit_kdr(data, a.dim, k, RegCoeff(a.epsilon), o);
  const StiefelPoint basis = unstandardize_subspace(fit.basis, *data.standardization);

  const std::filesystem::path dir(a.out);
  std::filesystem::create_directories(dir);
  {
    std::vector<std::string> header;
    for (long j = 0; j < a.dim; ++j) header.push_back("b" + std::to_string(j + 1));
    auto f = detail::open_out(dir / "basis.csv");
    write_csv(f, basis.matrix(), header);
  }
  {
    std::vector<std::string> header;
    for (long j = 0; j < a.dim; ++j) header.push_back("z" + std::to_string(j + 1));
    header.push_back("y");
    Eigen::MatrixXd proj(raw.samples(), a.dim + 1);
    proj << raw.x * basis.matrix(), raw.y.col(0);
    auto f = detail::open_out(dir / "projected.csv");
    write_csv(f, proj, header);
  }
  {
    Manifest m;
    m.set("command", std::string("fit"));
    m.set("data", a.data);
    m.set("response", a.response);
    m.set("samples", raw.samples());
    m.set("covariates", raw.covariates());
    m.set("dim", a.dim);
    m.set("epsilon", a.epsilon);
    if (k.continuation) {
      m.set("continuation", format_double(k.continuation->sigma_sq_start) + ":" +
                                format_double(k.continuation->sigma_sq_end));
    } else {
      m.set("continuation", std::string("none"));
      m.set("kernel_scale_x", k.scale_x);
    }
    m.set("kernel_scale_y", k.scale_y);
    m.set("iters", a.iters);
    m.set("target_sd", a.target_sd);
    m.set("seed", std::to_string(a.seed));
    m.set("restarts", a.restarts);
    m.set("line_search", "shrink=" + format_double(o.line_search.shrink) + ";c1=" +
                             format_double(o.line_search.armijo_c1) + ";initial_step=" +
                             format_double(o.line_search.initial_step) + ";growth=" +
                             format_double(o.line_search.growth) +
                             ";max_backtracks=" + std::to_string(o.line_search.max_backtracks));
    m.set("final_objective", fit.final_objective);
    m.set("converged_flag", fit.converged_flag);
    m.set("stalled_iterations", fit.stalled_iterations);
    m.set("best_start", fit.best_start);
    m.set("objective_trace", join_doubles(fit.objective_trace));
    m.set("sigma_sq_trace", join_doubles(fit.sigma_sq_trace));
    auto f = detail::open_out(dir / "manifest.txt");
    m.write(f);
  }
  out << "fit: d=" << a.dim << " objective=" << format_double(fit.final_objective) << " -> " << dir.string()
      << '\n';
  return kOk;
}

inline BenchConfig bench_config(const BenchArgs& a) {
  BenchConfig cfg;
  cfg.base_seed = a.seed;
  cfg.samples = a.n;
  cfg.iterations = a.iters;
  cfg.epsilon = a.epsilon;
  cfg.scale_x = a.scale_x;
  cfg.scale_y = a.scale_y;
  cfg.target_sd = detail::parse_target_sd(a.target_sd);
  cfg.restarts = a.restarts;
  cfg.threads = a.threads;
  cfg.slice_grid.clear();
  for (const auto& s : detail::split_list(a.slices_grid)) cfg.slice_grid.push_back(std::stoi(s));
  return cfg;
}

/// Comparison figures quoted for methods this tool does not run.
inline std::vector<std::string> cited_annotations(Regression r) {
  switch (r) {
    case Regression::A:
      return {"# not run: GCR, published mean norm 0.28 (sigma=0.1), 0.33 (sigma=0.4), 0.45 (sigma=0.8)"};
    case Regression::B:
      return {};
    case Regression::C:
      return {"# not run: SCR and GCR, published mean norms above 1.3"};
  }
  return {};
}

/// Writes one CSV row per (parameter, method) cell.
inline int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  Regression reg;
  std::vector<Method> methods;
  BenchConfig cfg;
  try {
    reg = parse_regression(a.regression);
    for (const auto& m : detail::split_list(a.methods)) methods.push_back(parse_method(m));
    if (methods.empty()) throw InvalidConfig("--methods is empty");
    cfg = bench_config(a);
    if (a.reps < 1) throw InvalidConfig("--reps must be >= 1");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  const std::vector<double> params = a.params.empty() ? benchmark_parameters(reg) : a.params;

  std::ostringstream csv;
  csv << "# kdr bench regression=" << to_string(reg) << " reps=" << a.reps << " seed=" << a.seed
      << " iters=" << a.iters << " epsilon=" << format_double(a.epsilon)
      << " target_sd=" << a.target_sd << " restarts=" << a.restarts << '\n';
  for (const auto& line : cited_annotations(reg)) csv << line << '\n';
  csv << "method,regression,parameter,reps,mean,sd,failures,wall_time_s\n";
  std::vector<std::string> notes;
  for (double p : params) {
    for (Method m : methods) {
      BenchResult r;
      try {
        r = run_benchmark(reg, p, m, a.reps, cfg);
      } catch (const BenchAborted& e) {
        err << "error: " << e.what() << '\n';
        return kBenchAborted;
      }
      csv << to_string(m) << ',' << to_string(reg) << ',' << format_double(p) << ',' << a.reps << ','
          << detail::optional_field(r.mean) << ',' << detail::optional_field(r.sd) << ',' << r.failures << ','
          << (a.timing ? format_double(r.wall_time_s) : std::string()) << '\n';
      if (r.slices > 0) notes.push_back(to_string(m) + "@" + format_double(p) + "=" + std::to_string(r.slices));
      err << to_string(m) << " " << to_string(reg) << " " << format_double(p) << ": mean "
          << detail::optional_field(r.mean) << " (" << r.wall_time_s << " s)\n";
    }
  }
  if (!notes.empty()) {
    csv << "# slices:";
    for (const auto& n : notes) csv << ' ' << n;
    csv << '\n';
  }
  if (a.out.empty()) {
    out << csv.str();
  } else {
    auto f = detail::open_out(a.out);
    f << csv.str();
  }
  return kOk;
}

inline int cmd_probe(const ProbeArgs& a, std::ostream& out, std::ostream& err) {
  Regression reg;
  BenchConfig cfg;
  try {
    reg = parse_regression(a.regression);
    cfg.target_sd = detail::parse_target_sd(a.target_sd);
    if (a.trials < 1) throw InvalidConfig("--trials must be >= 1");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  cfg.base_seed = a.seed;
  cfg.samples = a.n;
  cfg.epsilon = a.epsilon;
  cfg.scale_x = a.scale_x;
  cfg.scale_y = a.scale_y;
  std::ostringstream csv;
  csv << "trial,contrast_true,contrast_random,true_lower\n";
  int lower = 0;
  for (int t = 0; t < a.trials; ++t) {
    const ProbeReport r = probe_trial(reg, a.param, t, cfg);
    lower += r.containing_lower() ? 1 : 0;
    csv << t << ',' << format_double(r.contrast_containing) << ',' << format_double(r.contrast_random) << ','
        << (r.containing_lower() ? 1 : 0) << '\n';
  }
  if (a.out.empty()) {
    out << csv.str();
  } else {
    auto f = detail::open_out(a.out);
    f << csv.str();
  }
  err << "true basis has the lower contrast in " << lower << " of " << a.trials << " trials\n";
  return kOk;
}

inline int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  GenSpec spec;
  try {
    spec.regression = parse_regression(a.regression);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  spec.parameter = a.param;
  spec.samples = a.n;
  spec.seed = a.seed;
  const Dataset d = generate(spec);
  if (a.out.empty()) {
    write_dataset_csv(out, d);
  } else {
    auto f = detail::open_out(a.out);
    write_dataset_csv(f, d);
  }
  return kOk;
}

/// Parses argv and dispatches to a subcommand. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Kernel dimension reduction: subspace fitting and benchmarks"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a d-dimensional KDR subspace to CSV data");
  fit_cmd->add_option("--data", fit.data, "Input CSV")->required();
  fit_cmd->add_option("--response", fit.response, "Response column: header name or 0-based index")->required();
  fit_cmd->add_option("--dim", fit.dim, "Subspace dimension d")->required();
  fit_cmd->add_option("--epsilon", fit.epsilon, "Regularization epsilon")->capture_default_str();
  fit_cmd->add_option("--kernel-scale-x", fit.scale_x, "Fixed covariate kernel scale c (disables continuation)");
  fit_cmd->add_option("--kernel-scale-y", fit.scale_y, "Response kernel scale");
  auto* cont = fit_cmd->add_option("--continuation", fit.continuation, "sigma^2 schedule start:end, or none")
                   ->capture_default_str();
  fit_cmd->add_option("--iters", fit.iters, "Descent iterations")->capture_default_str();
  fit_cmd->add_option("--target-sd", fit.target_sd, "Standard deviation after standardization")
      ->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Seed for random restarts")->capture_default_str();
  fit_cmd->add_option("--restarts", fit.restarts, "Additional random starts")->capture_default_str();
  fit_cmd->add_option("--out", fit.out, "Output directory")->required();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Monte Carlo benchmark on a synthetic regression");
  bench_cmd->add_option("--regression", bench.regression, "A, B or C")->required();
  bench_cmd->add_option("--methods", bench.methods, "Comma list of kdr,sir,save,phd")->capture_default_str();
  bench_cmd->add_option("--reps", bench.reps, "Replications per cell")->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "Base seed; replication r uses seed+r")->capture_default_str();
  bench_cmd->add_option("--params", bench.params, "Noise levels / offsets (default: the table values)")
      ->delimiter(',');
  bench_cmd->add_option("--slices-grid", bench.slices_grid, "Slice counts tried for SIR/SAVE")
      ->capture_default_str();
  bench_cmd->add_option("--iters", bench.iters, "KDR iterations")->capture_default_str();
  bench_cmd->add_option("--epsilon", bench.epsilon, "KDR regularization")->capture_default_str();
  bench_cmd->add_option("--n", bench.n, "Samples per replication");
  bench_cmd->add_option("--target-sd", bench.target_sd, "Covariate SD after standardization, or none")
      ->capture_default_str();
  bench_cmd->add_option("--restarts", bench.restarts, "Additional random KDR starts")->capture_default_str();
  bench_cmd->add_option("--threads", bench.threads, "Worker threads (0: all cores)")->capture_default_str();
  bench_cmd->add_option("--kernel-scale-x", bench.scale_x, "Override the per-regression kernel scale");
  bench_cmd->add_option("--kernel-scale-y", bench.scale_y, "Response kernel scale (default: covariate scale)");
  bench_cmd->add_flag("--timing", bench.timing, "Fill the wall_time_s column");
  bench_cmd->add_option("--out", bench.out, "Output CSV (default: stdout)");

  ProbeArgs probe;
  auto* probe_cmd = app.add_subcommand("probe", "Contrast at the true basis versus random bases");
  probe_cmd->add_option("--regression", probe.regression, "A, B or C")->capture_default_str();
  probe_cmd->add_option("--param", probe.param, "Noise level / offset")->capture_default_str();
  probe_cmd->add_option("--trials", probe.trials, "Number of seeded trials")->capture_default_str();
  probe_cmd->add_option("--seed", probe.seed, "Base seed")->capture_default_str();
  probe_cmd->add_option("--target-sd", probe.target_sd, "Covariate SD after standardization, or none")
      ->capture_default_str();
  probe_cmd->add_option("--epsilon", probe.epsilon, "Regularization")->capture_default_str();
  probe_cmd->add_option("--n", probe.n, "Samples per trial");
  probe_cmd->add_option("--kernel-scale-x", probe.scale_x, "Covariate kernel scale");
  probe_cmd->add_option("--kernel-scale-y", probe.scale_y, "Response kernel scale");
  probe_cmd->add_option("--out", probe.out, "Output CSV (default: stdout)");

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic benchmark sample as CSV");
  gen_cmd->add_option("--regression", gen.regression, "A, B or C")->capture_default_str();
  gen_cmd->add_option("--param", gen.param, "Noise level / offset")->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "Sample size");
  gen_cmd->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  fit.continuation_given = cont->count() > 0;

  try {
    if (*fit_cmd) return cmd_fit(fit, out, err);
    if (*bench_cmd) return cmd_bench(bench, out, err);
    if (*probe_cmd) return cmd_probe(probe, out, err);
    if (*gen_cmd) return cmd_generate(gen, out, err);
  } catch (const InvalidConfig& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace kdr::cli
