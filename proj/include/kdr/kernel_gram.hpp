#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>

#include "kdr/error.hpp"
#include "kdr/stiefel.hpp"

namespace kdr {

/// Linear σ² annealing from `sigma_sq_start` down to `sigma_sq_end`.
struct Continuation {
  double sigma_sq_start = 100.0;
  double sigma_sq_end = 10.0;

  void validate() const {
    if (!(sigma_sq_end > 0.0) || !(sigma_sq_start >= sigma_sq_end) || !std::isfinite(sigma_sq_start)) {
      throw InvalidConfig("continuation: need sigma_sq_start >= sigma_sq_end > 0");
    }
  }

  /// σ² at iteration t of `iterations`, linear in t, hitting both endpoints.
  [[nodiscard]] double at(int t, int iterations) const {
    if (iterations <= 1) return sigma_sq_end;
    const double frac = static_cast<double>(t) / static_cast<double>(iterations - 1);
    return sigma_sq_start + (sigma_sq_end - sigma_sq_start) * frac;
  }
};

/// Gaussian RBF scales, k(z1, z2) = exp(-|z1 - z2|² / c).
///
/// `scale_x` applies to projected covariates Bᵀx, `scale_y` to the response.
/// When `continuation` is set, the covariate scale follows the annealing
/// schedule and `scale_x` is unused by the optimizer; `scale_y` stays fixed.
struct KernelConfig {
  double scale_x = 2.0;
  double scale_y = 2.0;
  std::optional<Continuation> continuation;

  void validate() const {
    if (!(scale_x > 0.0) || !std::isfinite(scale_x)) throw InvalidConfig("kernel: scale_x must be > 0");
    if (!(scale_y > 0.0) || !std::isfinite(scale_y)) throw InvalidConfig("kernel: scale_y must be > 0");
    if (continuation) continuation->validate();
  }

  /// Covariate scale used for the final answer.
  [[nodiscard]] double final_scale_x() const {
    return continuation ? continuation->sigma_sq_end : scale_x;
  }
};

/// n×n symmetric kernel matrix, optionally double-centered.
class GramMatrix {
 public:
  GramMatrix() = default;
  GramMatrix(Eigen::MatrixXd entries, bool centered) : entries_(std::move(entries)), centered_(centered) {
    if (entries_.rows() != entries_.cols()) throw ShapeError("GramMatrix: not square");
  }

  [[nodiscard]] const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  [[nodiscard]] bool centered() const noexcept { return centered_; }
  [[nodiscard]] long size() const noexcept { return entries_.rows(); }
  double operator()(long i, long j) const { return entries_(i, j); }

 private:
  Eigen::MatrixXd entries_;
  bool centered_ = false;
};

inline void require_positive_scale(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw InvalidConfig("kernel scale must be positive and finite, got " + std::to_string(c));
  }
}

/// exp(-|z1 - z2|² / c)
inline double rbf(Eigen::Ref<const Eigen::VectorXd> z1, Eigen::Ref<const Eigen::VectorXd> z2, double c) {
  require_positive_scale(c);
  if (z1.size() != z2.size()) throw ShapeError("rbf: vectors differ in length");
  return std::exp(-(z1 - z2).squaredNorm() / c);
}

/// Uncentered RBF Gram matrix of the rows of `z` (n×k). Squared distances use
/// |a|² + |b|² - 2aᵀb with negatives clamped to zero; the diagonal is exactly 1.
inline GramMatrix gram_rows(Eigen::Ref<const Eigen::MatrixXd> z, double c) {
  require_positive_scale(c);
  const long n = z.rows();
  const Eigen::VectorXd sq = z.rowwise().squaredNorm();
  Eigen::MatrixXd inner(n, n);
  inner.triangularView<Eigen::Lower>() = z * z.transpose();
  Eigen::MatrixXd k(n, n);
  for (long j = 0; j < n; ++j) {
    k(j, j) = 1.0;
    for (long i = j + 1; i < n; ++i) {
      const double d2 = std::max(0.0, sq(i) + sq(j) - 2.0 * inner(i, j));
      const double v = std::exp(-d2 / c);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return GramMatrix(std::move(k), false);
}

/// K_ij = exp(-|Bᵀ(x_i - x_j)|² / c) for the rows x_i of `x`. `b` is m×d;
/// orthonormality is not checked here so that finite-difference probes may
/// evaluate off the manifold.
inline GramMatrix gram_projected(Eigen::Ref<const Eigen::MatrixXd> x, Eigen::Ref<const Eigen::MatrixXd> b,
                                 double c) {
  if (x.cols() != b.rows()) {
    throw ShapeError("gram_projected: X has " + std::to_string(x.cols()) + " columns but B has " +
                     std::to_string(b.rows()) + " rows");
  }
  if (x.rows() < 2) throw ShapeError("gram_projected: need at least two samples");
  const Eigen::MatrixXd z = x * b;
  return gram_rows(z, c);
}

inline GramMatrix gram_projected(Eigen::Ref<const Eigen::MatrixXd> x, const StiefelPoint& b, double c) {
  return gram_projected(x, b.matrix(), c);
}

/// HKH with H = I - 11ᵀ/n, via the four-term formula
/// K_ij - mean_b K_ib - mean_a K_aj + mean_ab K_ab.
inline GramMatrix center(const GramMatrix& k) {
  const auto& e = k.entries();
  const long n = e.rows();
  if (n == 0) return GramMatrix(e, true);
  // K is symmetric, so row and column means coincide; using one vector keeps
  // the result exactly symmetric.
  const Eigen::VectorXd means = e.rowwise().mean();
  const double total = means.mean();
  Eigen::MatrixXd g(n, n);
  for (long j = 0; j < n; ++j) {
    for (long i = j; i < n; ++i) {
      const double v = e(i, j) - (means(i) + means(j)) + total;
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return GramMatrix(std::move(g), true);
}

}  // namespace kdr
