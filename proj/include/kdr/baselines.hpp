#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "kdr/dataset.hpp"
#include "kdr/error.hpp"
#include "kdr/stiefel.hpp"

// Inverse-regression estimators of the central subspace: sliced inverse
// regression (SIR), sliced average variance estimation (SAVE) and principal
// Hessian directions (pHd). All three whiten X with the sample covariance,
// build an m×m kernel matrix on the whitened scale, keep the leading
// eigenvectors and map them back to original coordinates.

namespace kdr {

enum class SliceStrategy { EqualCount, PerLabel };

struct SliceSpec {
  int n_slices = 10;  // ignored for PerLabel
  SliceStrategy strategy = SliceStrategy::EqualCount;
};

struct BaselineFit {
  StiefelPoint basis = StiefelPoint::axes(1, 1);
  // Fewer informative eigenvalues than requested directions; trailing
  // columns are arbitrary.
  bool rank_warning = false;
  // Kernel matrix numerically zero; the whole basis is arbitrary.
  bool degenerate = false;
  std::vector<double> eigenvalues;  // kernel spectrum, in selection order
};

/// Partition of sample indices into slices. EqualCount sorts by y (stable)
/// and cuts into parts whose sizes differ by at most one; PerLabel makes one
/// slice per distinct y value.
inline std::vector<std::vector<long>> make_slices(Eigen::Ref<const Eigen::VectorXd> y, const SliceSpec& spec) {
  const long n = y.size();
  std::vector<std::vector<long>> slices;
  if (spec.strategy == SliceStrategy::PerLabel) {
    std::map<double, std::vector<long>> groups;
    for (long i = 0; i < n; ++i) groups[y(i)].push_back(i);
    for (auto& [label, idx] : groups) slices.push_back(std::move(idx));
    return slices;
  }
  if (spec.n_slices < 2) throw InvalidConfig("slices: need at least two slices");
  if (spec.n_slices > n) throw InvalidConfig("slices: more slices than samples");
  std::vector<long> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0L);
  std::stable_sort(order.begin(), order.end(), [&](long a, long b) { return y(a) < y(b); });
  const long h = spec.n_slices;
  const long base = n / h;
  const long extra = n % h;
  long pos = 0;
  for (long s = 0; s < h; ++s) {
    const long size = base + (s < extra ? 1 : 0);
    slices.emplace_back(order.begin() + pos, order.begin() + pos + size);
    pos += size;
  }
  return slices;
}

namespace detail {

struct Whitened {
  Eigen::MatrixXd z;          // n×m, mean zero, identity sample covariance
  Eigen::MatrixXd inv_sqrt;   // Σ^{-1/2}
};

inline Whitened whiten(Eigen::Ref<const Eigen::MatrixXd> x) {
  const long n = x.rows();
  const long m = x.cols();
  if (n <= m) throw InvalidConfig("inverse regression: need more samples than covariates");
  Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd cov = (xc.transpose() * xc) / static_cast<double>(n);
  cov.diagonal().array() += 1e-10 * cov.trace() / static_cast<double>(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0)) {
    throw NumericError("inverse regression: covariance of X is singular");
  }
  const Eigen::VectorXd inv_root = es.eigenvalues().cwiseSqrt().cwiseInverse();
  Whitened w;
  w.inv_sqrt = es.eigenvectors() * inv_root.asDiagonal() * es.eigenvectors().transpose();
  w.z = xc * w.inv_sqrt;
  return w;
}

inline Eigen::VectorXd scalar_response(const Dataset& data, const char* method) {
  data.validate();
  if (data.responses() != 1) {
    throw UnsupportedResponse(std::string(method) + " needs a one-dimensional response");
  }
  return data.y.col(0);
}

inline void check_dim(long d, long m) {
  if (d < 1 || d > m) throw InvalidConfig("inverse regression: need 1 <= d <= m");
}

/// Selects the d leading eigenvectors of the symmetric kernel `k` (by value,
/// or by magnitude when `by_magnitude`), maps them through Σ^{-1/2} and
/// re-orthonormalizes. `rank_cap` bounds the number of informative
/// directions the method can produce.
inline BaselineFit leading_directions(const Eigen::MatrixXd& k, const Eigen::MatrixXd& inv_sqrt, long d,
                                      bool by_magnitude, long rank_cap) {
  const long m = k.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  if (es.info() != Eigen::Success) throw NumericError("inverse regression: eigendecomposition failed");
  const Eigen::VectorXd& lambda = es.eigenvalues();
  std::vector<long> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0L);
  auto key = [&](long i) { return by_magnitude ? std::abs(lambda(i)) : lambda(i); };
  // Ties keep the solver's ascending index order.
  std::stable_sort(order.begin(), order.end(), [&](long a, long b) { return key(a) > key(b); });

  BaselineFit fit;
  const double top = std::abs(key(order[0]));
  fit.degenerate = !(top > 1e-12);
  long informative = 0;
  for (long i : order) {
    fit.eigenvalues.push_back(lambda(i));
    if (std::abs(key(i)) > 1e-8 * top && !fit.degenerate) ++informative;
  }
  informative = std::min(informative, rank_cap);
  fit.rank_warning = fit.degenerate || d > informative;
  if (fit.degenerate) {
    fit.basis = StiefelPoint::axes(m, d);
    return fit;
  }
  Eigen::MatrixXd v(m, d);
  for (long j = 0; j < d; ++j) v.col(j) = es.eigenvectors().col(order[static_cast<std::size_t>(j)]);
  fit.basis = retract(inv_sqrt * v);
  return fit;
}

}  // namespace detail

/// Sliced inverse regression: leading eigenvectors of Σ_h p_h m_h m_hᵀ, with
/// m_h the slice means of the whitened covariates. At most (slices - 1)
/// directions are informative.
inline BaselineFit fit_sir(const Dataset& data, long d, const SliceSpec& slices) {
  const Eigen::VectorXd y = detail::scalar_response(data, "SIR");
  detail::check_dim(d, data.covariates());
  const auto w = detail::whiten(data.x);
  const long m = data.covariates();
  const double n = static_cast<double>(data.samples());
  const auto parts = make_slices(y, slices);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
  for (const auto& idx : parts) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    for (long i : idx) mean += w.z.row(i).transpose();
    mean /= static_cast<double>(idx.size());
    k += (static_cast<double>(idx.size()) / n) * mean * mean.transpose();
  }
  return detail::leading_directions(k, w.inv_sqrt, d, false, static_cast<long>(parts.size()) - 1);
}

/// Sliced average variance estimation: leading eigenvectors of
/// Σ_h p_h (I - V_h)², V_h the within-slice covariance of whitened X.
inline BaselineFit fit_save(const Dataset& data, long d, const SliceSpec& slices) {
  const Eigen::VectorXd y = detail::scalar_response(data, "SAVE");
  detail::check_dim(d, data.covariates());
  const auto w = detail::whiten(data.x);
  const long m = data.covariates();
  const double n = static_cast<double>(data.samples());
  const auto parts = make_slices(y, slices);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
  for (const auto& idx : parts) {
    const double nh = static_cast<double>(idx.size());
    Eigen::MatrixXd zh(static_cast<long>(idx.size()), m);
    for (std::size_t r = 0; r < idx.size(); ++r) zh.row(static_cast<long>(r)) = w.z.row(idx[r]);
    const Eigen::MatrixXd zc = zh.rowwise() - zh.colwise().mean();
    const Eigen::MatrixXd v = (zc.transpose() * zc) / nh;
    const Eigen::MatrixXd gap = eye - v;
    k += (nh / n) * gap * gap;
  }
  return detail::leading_directions(k, w.inv_sqrt, d, false, m);
}

/// Principal Hessian directions (response-based): eigenvectors of
/// (1/n) Σ_i (y_i - ȳ)(z_i z_iᵀ - I) ranked by |eigenvalue|.
inline BaselineFit fit_phd(const Dataset& data, long d) {
  const Eigen::VectorXd y = detail::scalar_response(data, "pHd");
  detail::check_dim(d, data.covariates());
  const auto w = detail::whiten(data.x);
  const long m = data.covariates();
  const long n = data.samples();
  const Eigen::VectorXd r = y.array() - y.mean();
  const Eigen::MatrixXd weighted = w.z.transpose() * r.asDiagonal() * w.z;
  const Eigen::MatrixXd k = (weighted - r.sum() * Eigen::MatrixXd::Identity(m, m)) / static_cast<double>(n);
  return detail::leading_directions(k, w.inv_sqrt, d, true, m);
}

}  // namespace kdr
