#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kdr/dataset.hpp"
#include "kdr/error.hpp"
#include "kdr/kernel_gram.hpp"
#include "kdr/objective.hpp"
#include "kdr/stiefel.hpp"
#include "kdr/synth.hpp"

namespace kdr {

/// Backtracking Armijo parameters. The first trial displacement along -ξ has
/// Frobenius length min(initial_step, growth * previous accepted length);
/// each rejection multiplies it by `shrink`.
struct LineSearchConfig {
  double shrink = 0.5;
  double growth = 4.0;
  double armijo_c1 = 1e-4;
  double initial_step = 1.0;
  int max_backtracks = 30;
};

struct OptimConfig {
  int iterations = 100;
  LineSearchConfig line_search;
  std::uint64_t seed = 0;
  int restarts = 0;

  void validate() const {
    if (iterations < 1) throw InvalidConfig("optim: iterations must be >= 1");
    const auto& ls = line_search;
    if (!(ls.shrink > 0.0 && ls.shrink < 1.0)) throw InvalidConfig("optim: shrink must lie in (0,1)");
    if (!(ls.armijo_c1 > 0.0 && ls.armijo_c1 < 1.0)) throw InvalidConfig("optim: armijo_c1 must lie in (0,1)");
    if (!(ls.initial_step > 0.0) || !std::isfinite(ls.initial_step)) {
      throw InvalidConfig("optim: initial_step must be > 0");
    }
    if (!(ls.growth >= 1.0)) throw InvalidConfig("optim: growth must be >= 1");
    if (ls.max_backtracks < 0) throw InvalidConfig("optim: max_backtracks must be >= 0");
    if (restarts < 0) throw InvalidConfig("optim: restarts must be >= 0");
  }
};

struct FitResult {
  StiefelPoint basis = StiefelPoint::axes(1, 1);
  std::vector<double> objective_trace;  // value after each iteration, at that iteration's σ²
  std::vector<double> sigma_sq_trace;   // covariate kernel scale used at each iteration
  bool converged_flag = false;          // some line search was exhausted (or the gradient vanished)
  double final_objective = 0.0;         // contrast of `basis` at the final scale
  double max_orthonormality_error = 0.0;  // over every iterate of every start
  int stalled_iterations = 0;
  int best_start = 0;
};

/// True when `trace` never increases inside a run of equal `sigma_sq` values.
inline bool monotone_within_segments(const std::vector<double>& trace, const std::vector<double>& sigma_sq) {
  for (std::size_t t = 1; t < trace.size(); ++t) {
    if (sigma_sq[t] == sigma_sq[t - 1] && trace[t] > trace[t - 1]) return false;
  }
  return true;
}

namespace detail {

struct DescentRun {
  Eigen::MatrixXd basis;
  std::vector<double> objective_trace;
  std::vector<double> sigma_sq_trace;
  bool stalled = false;
  bool last_accepted = true;
  double last_displacement = std::numeric_limits<double>::infinity();
  int stalled_iterations = 0;
  double max_orthonormality_error = 0.0;
  Eigen::MatrixXd best_basis;  // best iterate at the final scale
  double best_value = std::numeric_limits<double>::infinity();
};

inline DescentRun descend(const ContrastEvaluator& f, const StiefelPoint& start, const KernelConfig& kcfg,
                          const OptimConfig& ocfg) {
  const auto& ls = ocfg.line_search;
  const double final_c = kcfg.final_scale_x();
  DescentRun run;
  run.basis = start.matrix();
  run.max_orthonormality_error = orthonormality_error(run.basis);

  auto consider = [&](const Eigen::MatrixXd& b, double value_at_final) {
    if (value_at_final < run.best_value) {
      run.best_value = value_at_final;
      run.best_basis = b;
    }
  };
  if (!kcfg.continuation) consider(run.basis, f.value(run.basis, final_c));

  for (int t = 0; t < ocfg.iterations; ++t) {
    const double c = kcfg.continuation ? kcfg.continuation->at(t, ocfg.iterations) : kcfg.scale_x;
    // Same point, same scale: the search would fail again identically.
    if (t > 0 && run.stalled_iterations > 0 && !run.last_accepted && c == run.sigma_sq_trace.back()) {
      ++run.stalled_iterations;
      run.objective_trace.push_back(run.objective_trace.back());
      run.sigma_sq_trace.push_back(c);
      continue;
    }
    const ObjectiveEval here = f.evaluate(run.basis, c, true);
    const StiefelPoint point(run.basis);
    const Eigen::MatrixXd xi = tangent_project(point, *here.gradient);
    const double slope = xi.squaredNorm();

    double value = here.value;
    bool accepted = false;
    if (slope > 0.0 && std::isfinite(slope)) {
      const double length = std::min(ls.initial_step, ls.growth * run.last_displacement);
      double step = length / std::sqrt(slope);
      for (int k = 0; k <= ls.max_backtracks; ++k, step *= ls.shrink) {
        Eigen::MatrixXd trial;
        try {
          trial = retract(run.basis - step * xi).matrix();
        } catch (const DegenerateStep&) {
          continue;
        }
        const double trial_value = f.value(trial, c);
        if (trial_value <= here.value - ls.armijo_c1 * step * slope) {
          run.basis = std::move(trial);
          run.last_displacement = step * std::sqrt(slope);
          value = trial_value;
          accepted = true;
          break;
        }
      }
    }
    run.last_accepted = accepted;
    if (!accepted) {
      run.stalled = true;
      ++run.stalled_iterations;
    }
    run.max_orthonormality_error = std::max(run.max_orthonormality_error, orthonormality_error(run.basis));
    run.objective_trace.push_back(value);
    run.sigma_sq_trace.push_back(c);
    consider(run.basis, c == final_c ? value : f.value(run.basis, final_c));
  }
  return run;
}

}  // namespace detail

/// Starting points: the first d coordinate axes, then `restarts` Haar-random
/// points seeded from `seed`.
inline std::vector<StiefelPoint> starting_points(long m, long d, const OptimConfig& ocfg) {
  std::vector<StiefelPoint> starts;
  starts.push_back(StiefelPoint::axes(m, d));
  for (int r = 1; r <= ocfg.restarts; ++r) {
    Rng rng = make_rng(ocfg.seed, static_cast<std::uint64_t>(r));
    starts.push_back(random_stiefel(m, d, rng));
  }
  return starts;
}

/// Minimizes the kernel contrast over d-dimensional projections of the
/// (standardized) covariates by Riemannian steepest descent with Armijo
/// backtracking and QR retraction. With a continuation schedule the
/// covariate scale moves linearly between iterations; the answer is the
/// iterate with the lowest contrast at the final scale, across all starts.
inline FitResult fit_kdr(const Dataset& data, long d, const KernelConfig& kcfg, RegCoeff eps,
                         const OptimConfig& ocfg, std::optional<StiefelPoint> initial = std::nullopt) {
  data.validate();
  kcfg.validate();
  ocfg.validate();
  const long m = data.covariates();
  if (d < 1 || d >= m) {
    throw InvalidConfig("fit_kdr: need 1 <= d < m, got d=" + std::to_string(d) + ", m=" + std::to_string(m));
  }
  const GramMatrix gy = center(gram_rows(data.y, kcfg.scale_y));
  const ContrastEvaluator f(data.x, gy, eps);

  std::vector<StiefelPoint> starts;
  if (initial) {
    if (initial->ambient_dim() != m || initial->dim() != d) throw ShapeError("fit_kdr: initial basis has wrong shape");
    starts.push_back(*initial);
  } else {
    starts = starting_points(m, d, ocfg);
  }

  FitResult result;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < starts.size(); ++s) {
    detail::DescentRun run = detail::descend(f, starts[s], kcfg, ocfg);
    result.max_orthonormality_error = std::max(result.max_orthonormality_error, run.max_orthonormality_error);
    result.converged_flag = result.converged_flag || run.stalled;
    if (run.best_value < best) {
      best = run.best_value;
      result.basis = StiefelPoint(run.best_basis);
      result.final_objective = run.best_value;
      result.objective_trace = std::move(run.objective_trace);
      result.sigma_sq_trace = std::move(run.sigma_sq_trace);
      result.stalled_iterations = run.stalled_iterations;
      result.best_start = static_cast<int>(s);
    }
  }
  return result;
}

}  // namespace kdr
