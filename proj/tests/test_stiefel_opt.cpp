#include <gtest/gtest.h>

#include "kdr/evalbench.hpp"
#include "kdr/stiefel_opt.hpp"
#include "test_util.hpp"

using namespace kdr;

namespace {

KernelConfig fixed_scale(double c) {
  KernelConfig k;
  k.scale_x = c;
  k.scale_y = c;
  return k;
}

Dataset noise_dataset(long n, long m, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Dataset d;
  d.x = test::gaussian(n, m, rng);
  d.y = test::gaussian(n, 1, rng);
  return d;
}

}  // namespace

TEST(FitKdr, RecoversRegressionASubspace) {
  int good = 0;
  const int runs = 10;
  for (int s = 0; s < runs; ++s) {
    GenSpec spec;
    spec.regression = Regression::A;
    spec.parameter = 0.1;
    spec.seed = 100 + static_cast<std::uint64_t>(s);
    const Dataset data = generate(spec);
    const FitResult fit = fit_kdr(data, 2, fixed_scale(2.0), RegCoeff(0.1), OptimConfig{});
    if (projection_distance(*data.true_basis, fit.basis) <= 0.35) ++good;
    EXPECT_EQ(fit.objective_trace.size(), 100u);
  }
  EXPECT_GE(good, 8);
}

TEST(FitKdr, ConstantResponseLeavesInitialization) {
  Dataset d = noise_dataset(30, 4, 1);
  d.y.setConstant(2.5);
  const FitResult fit = fit_kdr(d, 2, fixed_scale(1.0), RegCoeff(0.1), OptimConfig{});
  for (double v : fit.objective_trace) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(fit.final_objective, 0.0);
  EXPECT_EQ(fit.basis.matrix(), StiefelPoint::axes(4, 2).matrix());
}

TEST(FitKdr, RejectsBadDimensions) {
  const Dataset d = noise_dataset(20, 4, 2);
  EXPECT_THROW(fit_kdr(d, 4, fixed_scale(1.0), RegCoeff(0.1), OptimConfig{}), InvalidConfig);
  EXPECT_THROW(fit_kdr(d, 0, fixed_scale(1.0), RegCoeff(0.1), OptimConfig{}), InvalidConfig);
  Dataset one = d;
  one.x.conservativeResize(1, 4);
  one.y.conservativeResize(1, 1);
  EXPECT_THROW(fit_kdr(one, 1, fixed_scale(1.0), RegCoeff(0.1), OptimConfig{}), InvalidConfig);
  OptimConfig bad;
  bad.iterations = 0;
  EXPECT_THROW(fit_kdr(d, 1, fixed_scale(1.0), RegCoeff(0.1), bad), InvalidConfig);
  bad = OptimConfig{};
  bad.line_search.shrink = 1.0;
  EXPECT_THROW(fit_kdr(d, 1, fixed_scale(1.0), RegCoeff(0.1), bad), InvalidConfig);
}

TEST(FitKdr, PureNoiseDescendsMonotonically) {
  const Dataset d = noise_dataset(60, 4, 3);
  OptimConfig o;
  o.iterations = 40;
  const FitResult fit = fit_kdr(d, 3, fixed_scale(2.0), RegCoeff(0.1), o);
  ASSERT_EQ(fit.objective_trace.size(), 40u);
  EXPECT_TRUE(monotone_within_segments(fit.objective_trace, fit.sigma_sq_trace));
  for (std::size_t t = 1; t < fit.objective_trace.size(); ++t) {
    EXPECT_LE(fit.objective_trace[t], fit.objective_trace[t - 1]);
  }
  EXPECT_LE(fit.max_orthonormality_error, 1e-10);
  EXPECT_LE(orthonormality_error(fit.basis.matrix()), 1e-10);
}

TEST(FitKdr, ContinuationSchedule) {
  GenSpec spec;
  spec.regression = Regression::A;
  spec.seed = 7;
  const Dataset data = standardize(generate(spec), 5.0);
  KernelConfig k;
  k.continuation = Continuation{100.0, 10.0};
  k.scale_y = 10.0;
  OptimConfig o;
  o.iterations = 30;
  const FitResult fit = fit_kdr(data, 2, k, RegCoeff(0.1), o);
  ASSERT_EQ(fit.sigma_sq_trace.size(), 30u);
  EXPECT_EQ(fit.sigma_sq_trace.front(), 100.0);
  EXPECT_EQ(fit.sigma_sq_trace.back(), 10.0);
  for (std::size_t t = 1; t < fit.sigma_sq_trace.size(); ++t) {
    EXPECT_LT(fit.sigma_sq_trace[t], fit.sigma_sq_trace[t - 1]);
  }
  // The reported objective is the returned basis evaluated at the final scale.
  const GramMatrix gy = center(gram_rows(data.y, 10.0));
  const double at_final = contrast(data.x, gy, fit.basis, 10.0, RegCoeff(0.1)).value;
  EXPECT_NEAR(fit.final_objective, at_final, 1e-12 * (1.0 + at_final));
  EXPECT_LE(fit.final_objective, fit.objective_trace.back());
  const StiefelPoint orig = unstandardize_subspace(fit.basis, *data.standardization);
  EXPECT_LE(projection_distance(*data.true_basis, orig), 0.5);
}

TEST(FitKdr, BitReproducible) {
  const Dataset d = noise_dataset(40, 5, 4);
  OptimConfig o;
  o.iterations = 25;
  o.restarts = 2;
  o.seed = 99;
  const FitResult a = fit_kdr(d, 2, fixed_scale(1.0), RegCoeff(0.1), o);
  const FitResult b = fit_kdr(d, 2, fixed_scale(1.0), RegCoeff(0.1), o);
  EXPECT_EQ(a.basis.matrix(), b.basis.matrix());
  EXPECT_EQ(a.objective_trace, b.objective_trace);
  EXPECT_EQ(a.best_start, b.best_start);
}

TEST(FitKdr, RestartsNeverWorseThanSingleStart) {
  GenSpec spec;
  spec.regression = Regression::B;
  spec.seed = 5;
  const Dataset d = standardize(generate(spec), 1.0);
  OptimConfig one;
  OptimConfig three;
  three.restarts = 2;
  three.seed = 17;
  const FitResult a = fit_kdr(d, 1, fixed_scale(0.5), RegCoeff(0.1), one);
  const FitResult b = fit_kdr(d, 1, fixed_scale(0.5), RegCoeff(0.1), three);
  EXPECT_LE(b.final_objective, a.final_objective);
}

TEST(FitKdr, RightRotationOfStartGivesSameTrajectory) {
  GenSpec spec;
  spec.regression = Regression::A;
  spec.seed = 21;
  const Dataset d = generate(spec);
  Rng rng = make_rng(3);
  const StiefelPoint start = random_stiefel(4, 2, rng);
  const StiefelPoint rotated(start.matrix() * random_orthogonal(2, rng));
  OptimConfig o;
  o.iterations = 30;
  const FitResult a = fit_kdr(d, 2, fixed_scale(2.0), RegCoeff(0.1), o, start);
  const FitResult b = fit_kdr(d, 2, fixed_scale(2.0), RegCoeff(0.1), o, rotated);
  ASSERT_EQ(a.objective_trace.size(), b.objective_trace.size());
  for (std::size_t t = 0; t < a.objective_trace.size(); ++t) {
    EXPECT_NEAR(a.objective_trace[t], b.objective_trace[t], 1e-9 * (1.0 + a.objective_trace[t]));
  }
  EXPECT_LE(projection_distance(a.basis, b.basis), 1e-8);
}

TEST(FitKdr, VanishingGradientStallsEveryIteration) {
  Dataset d = noise_dataset(30, 3, 6);
  d.y.setConstant(-1.0);
  OptimConfig o;
  o.iterations = 5;
  const FitResult fit = fit_kdr(d, 1, fixed_scale(1.0), RegCoeff(0.1), o);
  EXPECT_TRUE(fit.converged_flag);
  EXPECT_EQ(fit.stalled_iterations, 5);
  EXPECT_EQ(fit.objective_trace.size(), 5u);
}

TEST(MonotoneWithinSegments, DetectsIncrease) {
  EXPECT_TRUE(monotone_within_segments({3, 2, 2, 1}, {1, 1, 1, 1}));
  EXPECT_FALSE(monotone_within_segments({3, 2, 2.5}, {1, 1, 1}));
  EXPECT_TRUE(monotone_within_segments({3, 2, 2.5}, {1, 1, 0.5}));
}
