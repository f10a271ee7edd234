// Copyright 2026 The Behavioral Score Diffusion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "bsd/theory.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

namespace bsd {
namespace {

Eigen::MatrixXd column(std::vector<double> v) {
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

TEST(HankelTest, SingleWindowAtBoundary) {
  const Eigen::MatrixXd u = Eigen::MatrixXd::Random(7, 1);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(7, 2);
  EXPECT_EQ(build_hankel(u, x, 3, 4).n_windows(), 1);
}

TEST(HankelTest, WindowCount) {
  const Eigen::MatrixXd u = Eigen::MatrixXd::Zero(10, 1);
  EXPECT_EQ(build_hankel(u, u, 2, 3).n_windows(), 6);
}

TEST(HankelTest, FutureBlockIndexing) {
  const Eigen::MatrixXd u =
      column({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  const HankelWindows w = build_hankel(u, u, 2, 3);
  EXPECT_EQ(w.future_inputs.col(0), Eigen::Vector3d(3, 4, 5));
  EXPECT_EQ(w.past_inputs.col(0), Eigen::Vector2d(1, 2));
  EXPECT_EQ(w.future_inputs.col(5), Eigen::Vector3d(8, 9, 10));
}

TEST(HankelTest, TooShortThrows) {
  const Eigen::MatrixXd u = Eigen::MatrixXd::Zero(4, 1);
  EXPECT_THROW(build_hankel(u, u, 2, 3), DimensionError);
}

TEST(HankelTest, WindowCountProperty) {
  RngStream rng(5, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int t_ini = static_cast<int>(rng.uniform() * 6);
    const int horizon = 1 + static_cast<int>(rng.uniform() * 8);
    const int length = t_ini + horizon + static_cast<int>(rng.uniform() * 30);
    const Eigen::MatrixXd u = Eigen::MatrixXd::Zero(length, 2);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(length, 3);
    const HankelWindows w = build_hankel(u, x, t_ini, horizon);
    ASSERT_EQ(w.n_windows(), length - t_ini - horizon + 1);
    ASSERT_EQ(w.future_inputs.rows(), horizon * 2);
    ASSERT_EQ(w.future_states.rows(), horizon * 3);
  }
}

TEST(DeepcTest, TwoColumnSoftmaxMatchesClosedForm) {
  Eigen::MatrixXd cols(1, 2);
  cols << 0.0, 2.0;
  const Eigen::VectorXd q = Eigen::VectorXd::Constant(1, 0.5);
  const double beta = 1.0;
  // distances 0.25 and 2.25: weights proportional to exp(-d / 2)
  const double a0 = std::exp(-0.125);
  const double a1 = std::exp(-1.125);
  const Eigen::VectorXd alpha = hankel_softmax_weights(cols, q, beta);
  EXPECT_NEAR(alpha[0], a0 / (a0 + a1), 1e-15);
  EXPECT_NEAR(alpha[1], a1 / (a0 + a1), 1e-15);
}

TEST(DeepcTest, SoftmaxIsStationaryForEntropicObjective) {
  RngStream rng(9, 1);
  Eigen::MatrixXd cols(3, 5);
  for (Eigen::Index i = 0; i < cols.size(); ++i) cols.data()[i] = rng.normal();
  const Eigen::Vector3d q(0.3, -0.2, 0.5);
  const Eigen::VectorXd alpha = hankel_softmax_weights(cols, q, 0.7);
  EXPECT_LT(entropic_stationarity_residual(cols, q, alpha, 0.7), 1e-12);
  // Perturbed weights are not stationary.
  Eigen::VectorXd off = alpha;
  off[0] += 0.05;
  off /= off.sum();
  EXPECT_GT(entropic_stationarity_residual(cols, q, off, 0.7), 1e-4);
}

TEST(DeepcTest, DefaultCheckPasses) {
  const DeepcReport r = deepc_equivalence_check(DeepcConfig{}, RngStream(1, 2));
  EXPECT_EQ(r.n_windows, 200 - 4 - 10 + 1);
  EXPECT_TRUE(r.persistently_exciting);
  EXPECT_TRUE(r.stationarity_ok);
  EXPECT_EQ(r.nearest_hits, 100);
  EXPECT_LT(r.uniform_gap, 1e-6);
  EXPECT_TRUE(r.reprojection_ok);
  EXPECT_TRUE(r.passed());
}

TEST(DeepcTest, ConstantInputIsNotExciting) {
  Eigen::Matrix2d A;
  A << 1.0, 0.1, 0.0, 1.0;
  const Eigen::Vector2d B(0.0, 0.1);
  DeepcConfig cfg;
  cfg.n_queries = 2;
  // One input channel per step cannot excite a depth-16 Hankel matrix from
  // only 20 samples.
  cfg.length = 20;
  const DeepcReport r = deepc_equivalence_check(A, B, cfg, RngStream(1, 3));
  EXPECT_FALSE(r.persistently_exciting);
}

TEST(NwTest, ConstantTargetIsExact) {
  ConsistencyConfig cfg;
  cfg.noise = 0.0;
  cfg.n_seeds = 3;
  cfg.n_grid = {100, 1000};
  const ConsistencyReport r = nw_consistency_check(
      [](const Eigen::VectorXd&) { return 2.5; }, cfg, RngStream(2, 0));
  for (const ConsistencyRow& row : r.rows) EXPECT_LT(row.mse, 1e-20);
}

TEST(NwTest, LinearTargetOnSymmetricGridHasNoBias) {
  Eigen::MatrixXd z(101, 1);
  Eigen::VectorXd y(101);
  for (int i = 0; i < 101; ++i) {
    z(i, 0) = i / 100.0;
    y[i] = 3.0 * z(i, 0) - 1.0;
  }
  const double est = nw_regress(z, y, Eigen::VectorXd::Constant(1, 0.5), 0.1);
  EXPECT_NEAR(est, 0.5, 1e-12);
}

TEST(NwTest, SinTargetMseShrinks) {
  const ConsistencyReport r =
      nw_consistency_check(sin_target, ConsistencyConfig{}, RngStream(3, 0));
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_GT(r.ratio, 4.0);
  EXPECT_TRUE(r.passed);
  for (const ConsistencyRow& row : r.rows) {
    EXPECT_NEAR(row.mse, row.bias_sq + row.variance, 1e-12 * row.mse);
  }
}

TEST(NwTest, TwoDimensionalCheckRuns) {
  ConsistencyConfig cfg;
  cfg.dim = 2;
  cfg.n_seeds = 5;
  cfg.n_queries = 3;
  cfg.n_grid = {100, 3000};
  const ConsistencyReport r = nw_consistency_check(sin_target, cfg, RngStream(3, 1));
  EXPECT_GT(r.ratio, 1.0);
}

TEST(ScalingTest, QuadraticSlopes) {
  const ScalingReport r = mse_scaling_check(
      [](const Eigen::VectorXd& z) { return z[0] * z[0]; }, ScalingConfig{},
      RngStream(4, 0));
  ASSERT_TRUE(r.bias_slope.has_value());
  EXPECT_GE(*r.bias_slope, 3.3);
  EXPECT_LE(*r.bias_slope, 4.7);
  EXPECT_GE(r.variance_slope, -1.15);
  EXPECT_LE(r.variance_slope, -0.85);
  EXPECT_TRUE(r.passed());
}

TEST(ScalingTest, LinearTargetSkipsBiasSlope) {
  ScalingConfig cfg;
  cfg.n_seeds = 3;
  cfg.n_bias = 2001;
  cfg.n_grid = {100, 400, 3200};
  const ScalingReport r = mse_scaling_check(
      [](const Eigen::VectorXd& z) { return 2.0 * z[0]; }, cfg, RngStream(4, 1));
  EXPECT_FALSE(r.bias_slope.has_value());
  EXPECT_TRUE(r.bias_ok);
}

TEST(ScalingTest, NarrowGridIsConfigError) {
  ScalingConfig cfg;
  cfg.h_grid = {0.05, 0.1, 0.2};
  EXPECT_THROW(mse_scaling_check(
                   [](const Eigen::VectorXd& z) { return z[0] * z[0]; }, cfg,
                   RngStream(4, 2)),
               ConfigError);
}

TEST(ScalingTest, LogLogSlopeOfPowerLaw) {
  const std::vector<double> x = {1, 2, 4, 8};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -1.5));
  EXPECT_NEAR(loglog_slope(x, y), -1.5, 1e-12);
}

}  // namespace
}  // namespace bsd
