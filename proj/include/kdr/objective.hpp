#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>

#include "kdr/error.hpp"
#include "kdr/kernel_gram.hpp"
#include "kdr/stiefel.hpp"

namespace kdr {

/// Tikhonov coefficient ε in (G_X + nεI)⁻¹.
class RegCoeff {
 public:
  explicit RegCoeff(double epsilon = 0.1) : epsilon_(epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw InvalidConfig("regularization epsilon must be > 0, got " + std::to_string(epsilon));
    }
  }
  [[nodiscard]] double value() const noexcept { return epsilon_; }

 private:
  double epsilon_;
};

struct ObjectiveEval {
  double value = 0.0;
  std::optional<Eigen::MatrixXd> gradient;  // Euclidean ∂value/∂B, m×d
};

/// Evaluates the kernel contrast
///
///     f(B) = Tr[G_Y (G_X^B + nεI)⁻¹],   G_X^B = H K^B H,
///
/// and its Euclidean gradient for a fixed sample (X, G_Y) and ε. The centered
/// response Gram is factored once as G_Y = C Cᵀ (eigenvalues below a relative
/// 1e-14 are dropped), after which each evaluation costs one Cholesky
/// factorization of M = G_X^B + nεI plus triangular solves against C.
///
/// The gradient is
///
///     ∂f/∂B = (2/c) Σ_ij A_ij K_ij (x_i - x_j)(x_i - x_j)ᵀ B
///           = (4/c) Xᵀ (diag(W1) - W) X B,    W = A ∘ K,
///
/// with A = H M⁻¹ G_Y M⁻¹ H = (HP)(HP)ᵀ for P = M⁻¹C.
class ContrastEvaluator {
 public:
  ContrastEvaluator(Eigen::MatrixXd x, const GramMatrix& gy, RegCoeff eps) : x_(std::move(x)), eps_(eps) {
    const long n = x_.rows();
    if (n < 2) throw InvalidConfig("contrast: need at least two samples");
    if (gy.size() != n) {
      throw ShapeError("contrast: G_Y is " + std::to_string(gy.size()) + "x" + std::to_string(gy.size()) +
                       " but X has " + std::to_string(n) + " rows");
    }
    if (!gy.centered()) throw InvalidConfig("contrast: G_Y must be centered");
    if (!gy.entries().allFinite() || !x_.allFinite()) throw NumericError("contrast: non-finite input");
    factor_ = response_factor(gy.entries());
  }

  [[nodiscard]] long samples() const noexcept { return x_.rows(); }
  [[nodiscard]] long ambient_dim() const noexcept { return x_.cols(); }
  [[nodiscard]] const Eigen::MatrixXd& covariates() const noexcept { return x_; }
  [[nodiscard]] double epsilon() const noexcept { return eps_.value(); }
  /// Number of retained columns of C in G_Y = CCᵀ.
  [[nodiscard]] long response_rank() const noexcept { return factor_.cols(); }

  [[nodiscard]] double value(Eigen::Ref<const Eigen::MatrixXd> b, double c) const {
    return evaluate(b, c, false).value;
  }

  [[nodiscard]] ObjectiveEval evaluate(Eigen::Ref<const Eigen::MatrixXd> b, double c, bool with_gradient) const {
    const long n = x_.rows();
    if (b.rows() != x_.cols()) throw ShapeError("contrast: B has the wrong number of rows");
    ObjectiveEval out;
    if (factor_.cols() == 0) {
      // G_Y = 0: constant response, flat objective.
      require_positive_scale(c);
      if (with_gradient) out.gradient = Eigen::MatrixXd::Zero(b.rows(), b.cols());
      return out;
    }
    const Eigen::MatrixXd xb = x_ * b;
    const GramMatrix k = gram_rows(xb, c);
    Eigen::MatrixXd m = center(k).entries();
    m.diagonal().array() += static_cast<double>(n) * eps_.value();
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
      throw NumericError("contrast: Cholesky factorization of G_X + n*eps*I failed");
    }
    const Eigen::MatrixXd p = llt.solve(factor_);
    out.value = std::max(0.0, factor_.cwiseProduct(p).sum());
    if (!with_gradient) return out;

    Eigen::MatrixXd hp = p;
    hp.rowwise() -= p.colwise().mean();
    Eigen::MatrixXd w(n, n);
    w.triangularView<Eigen::Lower>() = hp * hp.transpose();
    const auto& kk = k.entries();
    for (long j = 0; j < n; ++j) {
      for (long i = j; i < n; ++i) {
        const double v = w(i, j) * kk(i, j);
        w(i, j) = v;
        w(j, i) = v;
      }
    }
    // Laplacian of W applied to XB.
    const Eigen::VectorXd deg = w.rowwise().sum();
    const Eigen::MatrixXd lxb = deg.asDiagonal() * xb - w * xb;
    out.gradient = (4.0 / c) * (x_.transpose() * lxb);
    return out;
  }

 private:
  static Eigen::MatrixXd response_factor(const Eigen::MatrixXd& gy) {
    const long n = gy.rows();
    if (gy.cwiseAbs().maxCoeff() == 0.0) return Eigen::MatrixXd(n, 0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gy);
    if (es.info() != Eigen::Success) throw NumericError("contrast: eigendecomposition of G_Y failed");
    const Eigen::VectorXd& lambda = es.eigenvalues();  // ascending
    const double cutoff = 1e-14 * std::max(lambda(n - 1), 0.0) * static_cast<double>(n);
    long keep = 0;
    while (keep < n && lambda(n - 1 - keep) > cutoff) ++keep;
    Eigen::MatrixXd c(n, keep);
    for (long j = 0; j < keep; ++j) {
      c.col(j) = es.eigenvectors().col(n - 1 - j) * std::sqrt(lambda(n - 1 - j));
    }
    return c;
  }

  Eigen::MatrixXd x_;
  RegCoeff eps_;
  Eigen::MatrixXd factor_;
};

/// Tr[G_Y (G_X^B + nεI)⁻¹]. Builds a fresh evaluator; prefer
/// ContrastEvaluator for repeated calls on the same sample.
inline ObjectiveEval contrast(Eigen::Ref<const Eigen::MatrixXd> x, const GramMatrix& gy,
                              Eigen::Ref<const Eigen::MatrixXd> b, double c, RegCoeff eps) {
  return ContrastEvaluator(x, gy, eps).evaluate(b, c, false);
}

inline ObjectiveEval contrast(Eigen::Ref<const Eigen::MatrixXd> x, const GramMatrix& gy, const StiefelPoint& b,
                              double c, RegCoeff eps) {
  return contrast(x, gy, b.matrix(), c, eps);
}

inline Eigen::MatrixXd gradient(Eigen::Ref<const Eigen::MatrixXd> x, const GramMatrix& gy,
                                Eigen::Ref<const Eigen::MatrixXd> b, double c, RegCoeff eps) {
  return *ContrastEvaluator(x, gy, eps).evaluate(b, c, true).gradient;
}

inline Eigen::MatrixXd gradient(Eigen::Ref<const Eigen::MatrixXd> x, const GramMatrix& gy, const StiefelPoint& b,
                                double c, RegCoeff eps) {
  return gradient(x, gy, b.matrix(), c, eps);
}

/// (1/n) Tr[G_Y - G_X^B (G_X^B + nεI)⁻¹ G_Y], the trace of the empirical
/// conditional covariance operator. Equals ε·contrast(...).value; computed
/// along an independent route (dense G_Y, pivoted LU) for cross-checking.
inline double contrast_dual_form(Eigen::Ref<const Eigen::MatrixXd> x, const GramMatrix& gy,
                                 Eigen::Ref<const Eigen::MatrixXd> b, double c, RegCoeff eps) {
  const long n = x.rows();
  if (n < 2) throw InvalidConfig("contrast_dual_form: need at least two samples");
  if (gy.size() != n) throw ShapeError("contrast_dual_form: G_Y size does not match X");
  if (!gy.centered()) throw InvalidConfig("contrast_dual_form: G_Y must be centered");
  const Eigen::MatrixXd gx = center(gram_projected(x, b, c)).entries();
  Eigen::MatrixXd m = gx;
  m.diagonal().array() += static_cast<double>(n) * eps.value();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const Eigen::MatrixXd solved = lu.solve(gy.entries());
  if (!solved.allFinite()) throw NumericError("contrast_dual_form: solve failed");
  return (gy.entries().trace() - (gx * solved).trace()) / static_cast<double>(n);
}

inline double contrast_dual_form(Eigen::Ref<const Eigen::MatrixXd> x, const GramMatrix& gy, const StiefelPoint& b,
                                 double c, RegCoeff eps) {
  return contrast_dual_form(x, gy, b.matrix(), c, eps);
}

}  // namespace kdr
