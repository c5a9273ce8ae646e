#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "kdr/baselines.hpp"
#include "kdr/dataset.hpp"
#include "kdr/error.hpp"
#include "kdr/objective.hpp"
#include "kdr/stiefel.hpp"
#include "kdr/stiefel_opt.hpp"
#include "kdr/synth.hpp"

namespace kdr {

/// |B₀B₀ᵀ - B̂B̂ᵀ|_F computed as sqrt(2d - 2|B₀ᵀB̂|²_F).
inline double projection_distance(const StiefelPoint& b0, const StiefelPoint& b1) {
  if (b0.ambient_dim() != b1.ambient_dim() || b0.dim() != b1.dim()) {
    throw ShapeError("projection_distance: bases have different shapes");
  }
  const double overlap = (b0.matrix().transpose() * b1.matrix()).squaredNorm();
  return std::sqrt(std::max(0.0, 2.0 * static_cast<double>(b0.dim()) - 2.0 * overlap));
}

enum class Method { KDR, SIR, SAVE, PHD };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::KDR: return "KDR";
    case Method::SIR: return "SIR";
    case Method::SAVE: return "SAVE";
    case Method::PHD: return "pHd";
  }
  return "?";
}

inline Method parse_method(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (s == "kdr") return Method::KDR;
  if (s == "sir") return Method::SIR;
  if (s == "save") return Method::SAVE;
  if (s == "phd") return Method::PHD;
  throw InvalidConfig("unknown method '" + s + "' (expected kdr, sir, save or phd)");
}

/// Kernel scale used for each regression in benchmark mode.
inline double benchmark_scale(Regression r) { return r == Regression::B ? 0.5 : 2.0; }

struct BenchConfig {
  std::uint64_t base_seed = 1;
  std::optional<long> samples;        // per-regression default when empty
  int iterations = 100;
  double epsilon = 0.1;
  std::optional<double> scale_x;      // benchmark_scale(regression) when empty
  std::optional<double> scale_y;      // equals the covariate scale when empty
  std::optional<double> target_sd = 1.0;  // covariates are left unscaled when empty
  std::vector<int> slice_grid{4, 5, 8, 10, 20};
  int restarts = 2;
  unsigned threads = 0;               // 0: hardware concurrency
};

struct BenchResult {
  Method method = Method::KDR;
  Regression regression = Regression::A;
  double parameter = 0.0;
  int replications = 0;
  std::vector<double> distances;  // NaN for failed replications
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();  // NaN when fewer than two successes
  int failures = 0;
  double wall_time_s = 0.0;
  int slices = 0;  // chosen slice count for SIR/SAVE, 0 otherwise
  // KDR fits only.
  double max_orthonormality_error = 0.0;
  bool traces_monotone = true;
};

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index
/// is processed exactly once; callers write results into slot i.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
}

/// Mean and n-1 SD of the finite entries, in index order.
inline std::pair<double, double> finite_mean_sd(const std::vector<double>& v) {
  double sum = 0.0;
  long k = 0;
  for (double x : v) {
    if (std::isfinite(x)) {
      sum += x;
      ++k;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (k == 0) return {nan, nan};
  const double mean = sum / static_cast<double>(k);
  if (k < 2) return {mean, nan};
  double ss = 0.0;
  for (double x : v)
    if (std::isfinite(x)) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(k - 1))};
}

/// A replication's data as fitted: generated, then optionally standardized.
inline Dataset benchmark_sample(Regression regression, double parameter, std::uint64_t seed, const BenchConfig& cfg) {
  GenSpec spec;
  spec.regression = regression;
  spec.parameter = parameter;
  spec.seed = seed;
  spec.samples = cfg.samples;
  Dataset data = generate(spec);
  if (cfg.target_sd) data = standardize(data, *cfg.target_sd);
  return data;
}

inline KernelConfig benchmark_kernel(Regression regression, const BenchConfig& cfg) {
  KernelConfig k;
  k.scale_x = cfg.scale_x.value_or(benchmark_scale(regression));
  k.scale_y = cfg.scale_y.value_or(k.scale_x);
  return k;
}

/// Maps a basis fitted on `data` to the original covariate coordinates.
inline StiefelPoint to_original(const StiefelPoint& fitted, const Dataset& data) {
  return data.standardization ? unstandardize_subspace(fitted, *data.standardization) : fitted;
}

namespace detail {

struct ReplicationOutcome {
  double distance = std::numeric_limits<double>::quiet_NaN();
  double orthonormality_error = 0.0;
  bool monotone = true;
};

inline ReplicationOutcome run_replication(Regression regression, double parameter, Method method, int rep,
                                          int slices, const BenchConfig& cfg) {
  const Dataset data = benchmark_sample(regression, parameter, cfg.base_seed + static_cast<std::uint64_t>(rep), cfg);
  const long d = central_dim(regression);
  ReplicationOutcome out;
  std::optional<StiefelPoint> fitted;
  switch (method) {
    case Method::KDR: {
      OptimConfig ocfg;
      ocfg.iterations = cfg.iterations;
      ocfg.seed = cfg.base_seed + static_cast<std::uint64_t>(rep);
      ocfg.restarts = cfg.restarts;
      const FitResult fit = fit_kdr(data, d, benchmark_kernel(regression, cfg), RegCoeff(cfg.epsilon), ocfg);
      out.orthonormality_error = fit.max_orthonormality_error;
      out.monotone = monotone_within_segments(fit.objective_trace, fit.sigma_sq_trace);
      fitted = fit.basis;
      break;
    }
    case Method::SIR:
      fitted = fit_sir(data, d, SliceSpec{slices, SliceStrategy::EqualCount}).basis;
      break;
    case Method::SAVE:
      fitted = fit_save(data, d, SliceSpec{slices, SliceStrategy::EqualCount}).basis;
      break;
    case Method::PHD:
      fitted = fit_phd(data, d).basis;
      break;
  }
  out.distance = projection_distance(*data.true_basis, to_original(*fitted, data));
  return out;
}

inline BenchResult run_cell(Regression regression, double parameter, Method method, int replications, int slices,
                            const BenchConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<ReplicationOutcome> outcomes(static_cast<std::size_t>(replications));
  parallel_for(outcomes.size(), cfg.threads, [&](std::size_t r) {
    try {
      outcomes[r] = run_replication(regression, parameter, method, static_cast<int>(r), slices, cfg);
    } catch (const std::exception&) {
      outcomes[r] = ReplicationOutcome{};
    }
  });
  BenchResult res;
  res.method = method;
  res.regression = regression;
  res.parameter = parameter;
  res.replications = replications;
  res.slices = slices;
  for (const auto& o : outcomes) {
    res.distances.push_back(o.distance);
    if (!std::isfinite(o.distance)) ++res.failures;
    res.max_orthonormality_error = std::max(res.max_orthonormality_error, o.orthonormality_error);
    res.traces_monotone = res.traces_monotone && o.monotone;
  }
  std::tie(res.mean, res.sd) = finite_mean_sd(res.distances);
  res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace detail

/// Monte Carlo estimate of the subspace error of one method on one
/// benchmark cell. Replication r uses seed base_seed + r. SIR and SAVE are
/// run for every slice count in the grid and the best mean is reported.
/// Failed replications count as NaN; more than 10% failures aborts.
inline BenchResult run_benchmark(Regression regression, double parameter, Method method, int replications,
                                 const BenchConfig& cfg) {
  if (replications < 1) throw InvalidConfig("benchmark: need at least one replication");
  const auto t0 = std::chrono::steady_clock::now();
  BenchResult best;
  if (method == Method::SIR || method == Method::SAVE) {
    if (cfg.slice_grid.empty()) throw InvalidConfig("benchmark: empty slice grid");
    bool have = false;
    for (int slices : cfg.slice_grid) {
      BenchResult r = detail::run_cell(regression, parameter, method, replications, slices, cfg);
      const bool better = std::isfinite(r.mean) && (!have || !std::isfinite(best.mean) || r.mean < best.mean);
      if (!have || better) {
        best = std::move(r);
        have = true;
      }
    }
  } else {
    best = detail::run_cell(regression, parameter, method, replications, 0, cfg);
  }
  best.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (best.failures * 10 > replications) {
    throw BenchAborted("benchmark: " + std::to_string(best.failures) + " of " + std::to_string(replications) +
                       " replications failed for " + to_string(method) + " on regression " + to_string(regression));
  }
  return best;
}

struct ProbeConfig {
  double scale_x = 2.0;
  double scale_y = 2.0;
  double epsilon = 0.1;
};

struct ProbeReport {
  double contrast_containing = 0.0;
  double contrast_random = 0.0;
  [[nodiscard]] bool containing_lower() const { return contrast_containing < contrast_random; }
};

/// Contrast at a basis containing the central subspace versus an arbitrary
/// basis. In population the former can never be larger; on a finite sample
/// this is a statistical tendency only.
inline ProbeReport monotonicity_probe(const Dataset& data, const StiefelPoint& containing, const StiefelPoint& random,
                                      const ProbeConfig& cfg) {
  data.validate();
  const GramMatrix gy = center(gram_rows(data.y, cfg.scale_y));
  const ContrastEvaluator f(data.x, gy, RegCoeff(cfg.epsilon));
  return ProbeReport{f.value(containing.matrix(), cfg.scale_x), f.value(random.matrix(), cfg.scale_x)};
}

/// One seeded probe trial on a benchmark regression: true basis (expressed in
/// fitted coordinates) against a Haar-random basis of the same dimension.
inline ProbeReport probe_trial(Regression regression, double parameter, int trial, const BenchConfig& cfg) {
  const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(trial);
  const Dataset data = benchmark_sample(regression, parameter, seed, cfg);
  StiefelPoint truth = *data.true_basis;
  if (data.standardization) truth = retract(data.standardization->scale.asDiagonal() * truth.matrix());
  Rng rng = make_rng(seed, 0x70726f6265ULL);
  const StiefelPoint random = random_stiefel(truth.ambient_dim(), truth.dim(), rng);
  const KernelConfig k = benchmark_kernel(regression, cfg);
  return monotonicity_probe(data, truth, random, ProbeConfig{k.scale_x, k.scale_y, cfg.epsilon});
}

}  // namespace kdr
