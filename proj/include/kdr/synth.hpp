#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kdr/dataset.hpp"
#include "kdr/error.hpp"
#include "kdr/stiefel.hpp"

namespace kdr {

using Rng = std::mt19937_64;

/// Seeds a generator from a 64-bit seed and a stream index so that distinct
/// (seed, stream) pairs give unrelated sequences.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

enum class Regression { A, B, C };

inline std::string to_string(Regression r) {
  switch (r) {
    case Regression::A: return "A";
    case Regression::B: return "B";
    case Regression::C: return "C";
  }
  return "?";
}

inline Regression parse_regression(std::string const& s) {
  if (s == "A" || s == "a") return Regression::A;
  if (s == "B" || s == "b") return Regression::B;
  if (s == "C" || s == "c") return Regression::C;
  throw InvalidConfig("unknown regression '" + s + "' (expected A, B or C)");
}

/// Default sample size of each benchmark regression.
inline long default_samples(Regression r) { return r == Regression::C ? 500 : 100; }

/// Covariate dimension of each benchmark regression.
inline long ambient_dim(Regression r) { return r == Regression::C ? 10 : 4; }

/// Dimension of the true central subspace.
inline long central_dim(Regression r) { return r == Regression::A ? 2 : 1; }

/// The σ (A, B) or a (C) values of the benchmark tables.
inline std::vector<double> benchmark_parameters(Regression r) {
  switch (r) {
    case Regression::A: return {0.1, 0.4, 0.8};
    case Regression::B: return {0.1, 0.2, 0.3};
    case Regression::C: return {0.0, 0.5, 1.0};
  }
  return {};
}

struct GenSpec {
  Regression regression = Regression::A;
  std::optional<long> samples;  // defaults to default_samples(regression)
  double parameter = 0.1;       // noise σ for A and B, offset a for C
  std::uint64_t seed = 0;
};

/// Regression (A) mean function X₁/(0.5 + (X₂ + 1.5)²) + (1 + X₂)².
inline double regression_a_mean(double x1, double x2) {
  return x1 / (0.5 + (x2 + 1.5) * (x2 + 1.5)) + (1.0 + x2) * (1.0 + x2);
}

/// Regression (B) mean function sin²(πX₂ + 1).
inline double regression_b_mean(double x2) {
  const double s = std::sin(std::numbers::pi * x2 + 1.0);
  return s * s;
}

/// Uniform draw from [0,1]⁴ minus the box {x : x_i <= 0.7 for all i}, by
/// rejection. Adds the number of proposals used to `proposals`.
template <class G>
Eigen::Vector4d draw_outside_box(G& rng, long& proposals) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  constexpr int kMaxProposals = 10000;  // acceptance rate is 1 - 0.7⁴ ≈ 0.76
  for (int attempt = 0; attempt < kMaxProposals; ++attempt) {
    ++proposals;
    Eigen::Vector4d v;
    for (int i = 0; i < 4; ++i) v(i) = unif(rng);
    if (v.maxCoeff() > 0.7) return v;
  }
  throw NumericError("draw_outside_box: rejection sampler exhausted its retries");
}

/// Draws a sample of the chosen benchmark regression with its true basis.
inline Dataset generate(const GenSpec& spec) {
  const long n = spec.samples.value_or(default_samples(spec.regression));
  if (n < 2) throw InvalidConfig("generate: need at least two samples");
  if (!std::isfinite(spec.parameter)) throw InvalidConfig("generate: parameter must be finite");
  if (spec.regression != Regression::C && spec.parameter < 0.0) {
    throw InvalidConfig("generate: noise level must be >= 0");
  }
  Rng rng = make_rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const long m = ambient_dim(spec.regression);
  Dataset d;
  d.x.resize(n, m);
  d.y.resize(n, 1);
  switch (spec.regression) {
    case Regression::A:
      for (long i = 0; i < n; ++i) {
        for (long j = 0; j < m; ++j) d.x(i, j) = normal(rng);
        d.y(i, 0) = regression_a_mean(d.x(i, 0), d.x(i, 1)) + spec.parameter * normal(rng);
      }
      d.true_basis = StiefelPoint::axes(m, 2);
      break;
    case Regression::B: {
      long proposals = 0;
      for (long i = 0; i < n; ++i) {
        d.x.row(i) = draw_outside_box(rng, proposals).transpose();
        d.y(i, 0) = regression_b_mean(d.x(i, 1)) + spec.parameter * normal(rng);
      }
      Eigen::MatrixXd e2 = Eigen::MatrixXd::Zero(m, 1);
      e2(1, 0) = 1.0;
      d.true_basis = StiefelPoint(e2);
      break;
    }
    case Regression::C:
      for (long i = 0; i < n; ++i) {
        for (long j = 0; j < m; ++j) d.x(i, j) = normal(rng);
        const double shift = d.x(i, 0) - spec.parameter;
        d.y(i, 0) = 0.5 * shift * shift * normal(rng);
      }
      d.true_basis = StiefelPoint::axes(m, 1);
      break;
  }
  return d;
}

}  // namespace kdr
