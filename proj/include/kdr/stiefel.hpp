#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <string>

#include "kdr/error.hpp"

namespace kdr {

/// max_ij |(BᵀB - I)_ij|
inline double orthonormality_error(Eigen::Ref<const Eigen::MatrixXd> b) {
  const Eigen::MatrixXd gram = b.transpose() * b;
  return (gram - Eigen::MatrixXd::Identity(b.cols(), b.cols())).cwiseAbs().maxCoeff();
}

/// An m×d matrix with orthonormal columns, i.e. a point on the Stiefel
/// manifold. It represents the d-dimensional subspace spanned by its columns;
/// BQ for orthogonal Q represents the same subspace.
class StiefelPoint {
 public:
  static constexpr double kTolerance = 1e-10;

  /// Wraps `b`, checking that its columns are orthonormal to `tol`.
  explicit StiefelPoint(Eigen::MatrixXd b, double tol = kTolerance) : b_(std::move(b)) {
    if (b_.cols() < 1 || b_.rows() < b_.cols()) {
      throw ShapeError("StiefelPoint: need m >= d >= 1, got " + std::to_string(b_.rows()) +
                       "x" + std::to_string(b_.cols()));
    }
    if (!(orthonormality_error(b_) <= tol)) {
      throw InvalidConfig("StiefelPoint: columns are not orthonormal");
    }
  }

  /// First d columns of the m×m identity.
  static StiefelPoint axes(long m, long d) {
    return StiefelPoint(Eigen::MatrixXd::Identity(m, d));
  }

  [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return b_; }
  [[nodiscard]] long ambient_dim() const noexcept { return b_.rows(); }
  [[nodiscard]] long dim() const noexcept { return b_.cols(); }

 private:
  Eigen::MatrixXd b_;
};

/// Projects an ambient m×d matrix onto the tangent space at `b` under the
/// Euclidean metric: ξ = G - B sym(BᵀG). The result satisfies Bᵀξ + ξᵀB = 0.
inline Eigen::MatrixXd tangent_project(const StiefelPoint& b, Eigen::Ref<const Eigen::MatrixXd> g) {
  const auto& bm = b.matrix();
  if (g.rows() != bm.rows() || g.cols() != bm.cols()) {
    throw ShapeError("tangent_project: direction shape does not match the base point");
  }
  const Eigen::MatrixXd btg = bm.transpose() * g;
  return g - bm * (0.5 * (btg + btg.transpose()));
}

/// Thin-QR retraction. Returns the Q factor with column signs chosen so that
/// diag(R) > 0, which makes the map well defined and retract(2B) = B.
/// Throws DegenerateStep when `m` is numerically rank deficient.
inline StiefelPoint retract(Eigen::Ref<const Eigen::MatrixXd> m) {
  const long rows = m.rows();
  const long cols = m.cols();
  if (cols < 1 || rows < cols) {
    throw ShapeError("retract: need rows >= cols >= 1");
  }
  if (!m.allFinite()) {
    throw DegenerateStep("retract: non-finite entries");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  const auto r = qr.matrixQR().topLeftCorner(cols, cols);
  const double scale = m.cwiseAbs().maxCoeff();
  for (long j = 0; j < cols; ++j) {
    const double rjj = r(j, j);
    if (!(std::abs(rjj) > 1e-12 * scale * static_cast<double>(rows))) {
      throw DegenerateStep("retract: matrix is rank deficient");
    }
    if (rjj < 0.0) q.col(j) = -q.col(j);
  }
  return StiefelPoint(std::move(q));
}

/// A point drawn from the uniform (Haar) distribution on the Stiefel manifold.
template <class Rng>
StiefelPoint random_stiefel(long m, long d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(m, d);
  for (long j = 0; j < d; ++j)
    for (long i = 0; i < m; ++i) g(i, j) = normal(rng);
  return retract(g);
}

/// Random orthogonal d×d matrix.
template <class Rng>
Eigen::MatrixXd random_orthogonal(long d, Rng& rng) {
  return random_stiefel(d, d, rng).matrix();
}

}  // namespace kdr
