#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>

#include "kdr/error.hpp"
#include "kdr/stiefel.hpp"

namespace kdr {

/// Per-column affine map between original and standardized covariates:
/// x = mean + scale ∘ x_std.
struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  double target_sd = 5.0;
};

struct Dataset {
  Eigen::MatrixXd x;  // n×m covariates
  Eigen::MatrixXd y;  // n×q responses
  std::optional<Standardization> standardization;
  std::optional<StiefelPoint> true_basis;  // known central subspace, synthetic data only

  [[nodiscard]] long samples() const noexcept { return x.rows(); }
  [[nodiscard]] long covariates() const noexcept { return x.cols(); }
  [[nodiscard]] long responses() const noexcept { return y.cols(); }

  void validate() const {
    if (x.rows() < 2) throw InvalidConfig("dataset: need at least two samples");
    if (y.rows() != x.rows()) throw ShapeError("dataset: X and Y differ in row count");
    if (y.cols() < 1) throw ShapeError("dataset: no response column");
    if (x.cols() < 1) throw ShapeError("dataset: no covariate column");
  }
};

/// Column sample standard deviations (n-1 denominator).
inline Eigen::VectorXd column_sd(Eigen::Ref<const Eigen::MatrixXd> x) {
  const long n = x.rows();
  const Eigen::RowVectorXd mu = x.colwise().mean();
  Eigen::VectorXd sd(x.cols());
  for (long j = 0; j < x.cols(); ++j) {
    sd(j) = std::sqrt((x.col(j).array() - mu(j)).square().sum() / static_cast<double>(n - 1));
  }
  return sd;
}

/// Rescales every covariate column to mean 0 and sample SD `target_sd`.
/// Standardizing twice composes the two maps, so unstandardize_subspace
/// always refers back to the original coordinates.
inline Dataset standardize(const Dataset& data, double target_sd = 5.0) {
  data.validate();
  if (!(target_sd > 0.0) || !std::isfinite(target_sd)) throw InvalidConfig("standardize: target_sd must be > 0");
  const long m = data.x.cols();
  const Eigen::VectorXd mean = data.x.colwise().mean().transpose();
  const Eigen::VectorXd sd = column_sd(data.x);
  for (long j = 0; j < m; ++j) {
    if (!(sd(j) > 0.0) || !std::isfinite(sd(j))) {
      throw ConstantColumn("standardize: covariate column " + std::to_string(j) + " has zero variance", j);
    }
  }
  Dataset out = data;
  const Eigen::VectorXd factor = (target_sd / sd.array()).matrix();
  for (long j = 0; j < m; ++j) {
    out.x.col(j) = (data.x.col(j).array() - mean(j)) * factor(j);
  }
  Standardization s;
  s.target_sd = target_sd;
  s.scale = (sd.array() / target_sd).matrix();
  s.mean = mean;
  if (data.standardization) {
    const auto& prev = *data.standardization;
    s.mean = prev.mean + prev.scale.cwiseProduct(mean);
    s.scale = prev.scale.cwiseProduct(s.scale);
  }
  out.standardization = std::move(s);
  return out;
}

/// Maps a subspace fitted on standardized covariates back to original
/// coordinates: Bᵀx_std = (D⁻¹B)ᵀ(x - mean) with D = diag(scale).
inline StiefelPoint unstandardize_subspace(const StiefelPoint& b_std, const Standardization& s) {
  if (s.scale.size() != b_std.ambient_dim()) {
    throw ShapeError("unstandardize_subspace: standardization has the wrong number of columns");
  }
  const Eigen::MatrixXd mapped = s.scale.cwiseInverse().asDiagonal() * b_std.matrix();
  return retract(mapped);
}

}  // namespace kdr
