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


#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "bsd/rng.h"
#include "bsd/types.h"

namespace bsd {

// Stacked windows of length t_ini + horizon cut from one long trajectory.
// Column j holds the window starting at sample j.
struct HankelWindows {
  Eigen::MatrixXd past_inputs;     // (t_ini * n_u) x n_windows
  Eigen::MatrixXd future_inputs;   // (horizon * n_u) x n_windows
  Eigen::MatrixXd past_states;     // (t_ini * n_x) x n_windows
  Eigen::MatrixXd future_states;   // (horizon * n_x) x n_windows
  int t_ini = 0;
  int horizon = 0;

  int n_windows() const { return static_cast<int>(future_inputs.cols()); }
};

// inputs: L x n_u, states: L x n_x (row t is the state before input t).
HankelWindows build_hankel(const Eigen::MatrixXd& inputs,
                           const Eigen::MatrixXd& states, int t_ini,
                           int horizon);

// Softmax of -|query - column_j|^2 / (2 beta^2) over the columns.
Eigen::VectorXd hankel_softmax_weights(const Eigen::MatrixXd& columns,
                                       const Eigen::VectorXd& query,
                                       double beta);

// Gradient norm, in the log-domain simplex parameterization, of
//   0.5 * sum_j a_j |q - c_j|^2 + beta^2 KL(a || 1/N)
// whose exact minimizer is hankel_softmax_weights.
double entropic_stationarity_residual(const Eigen::MatrixXd& columns,
                                      const Eigen::VectorXd& query,
                                      const Eigen::VectorXd& alpha,
                                      double beta);

// Same residual for |C a - q|^2 + beta^2 KL(a || 1/N).
double projection_objective_residual(const Eigen::MatrixXd& columns,
                                     const Eigen::VectorXd& query,
                                     const Eigen::VectorXd& alpha,
                                     double beta);

struct DeepcConfig {
  double dt = 0.1;
  int length = 200;
  int t_ini = 4;
  int horizon = 10;
  std::vector<double> beta_factors = {1e-4, 1e-3, 1e-2, 1e-1, 1.0,
                                      1e1,  1e2,  1e3};
  int n_queries = 100;
  double stationarity_tol = 1e-6;
  double uniform_tol = 1e-6;
  double reprojection_tol = 1e-10;
};

struct DeepcBetaRow {
  double beta = 0.0;
  double max_stationarity = 0.0;
  double max_projection_residual = 0.0;  // diagnostic only
  double max_reprojection = 0.0;
  double max_uniform_gap = 0.0;
};

struct DeepcReport {
  int n_windows = 0;
  double scale = 0.0;  // median pairwise column distance
  bool persistently_exciting = true;
  int hankel_rank = 0;
  std::vector<DeepcBetaRow> rows;
  int nearest_hits = 0;  // at the smallest beta
  int n_queries = 0;
  double uniform_gap = 0.0;  // at the largest beta
  bool stationarity_ok = false;
  bool nearest_ok = false;
  bool uniform_ok = false;
  bool reprojection_ok = false;

  bool passed() const {
    return stationarity_ok && nearest_ok && uniform_ok && reprojection_ok;
  }
};

// Double integrator x+ = A x + B u driven by a Gaussian input.
DeepcReport deepc_equivalence_check(const Eigen::MatrixXd& A,
                                    const Eigen::MatrixXd& B,
                                    const DeepcConfig& cfg, RngStream rng);
DeepcReport deepc_equivalence_check(const DeepcConfig& cfg, RngStream rng);

// Nadaraya-Watson with a Gaussian kernel on design points (rows of z).
double nw_regress(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& query, double h);

using TargetFn = std::function<double(const Eigen::VectorXd&)>;

enum class Design { kUniform, kStratified, kGrid };

struct ConsistencyConfig {
  int dim = 1;
  double noise = 0.1;
  std::vector<int> n_grid = {100, 10000};
  double bandwidth_scale = 1.0;  // h = scale * N^(-1/(dim + 4))
  int n_seeds = 20;
  int n_queries = 9;  // per axis, equispaced over [0.2, 0.8]
  Design design = Design::kUniform;
  double required_ratio = 4.0;
};

struct ConsistencyRow {
  int n = 0;
  double h = 0.0;
  double mse = 0.0;         // mean over seeds and queries
  double median_mse = 0.0;  // median over seeds of the per-seed mse
  double bias_sq = 0.0;
  double variance = 0.0;
};

struct ConsistencyReport {
  std::vector<ConsistencyRow> rows;
  double mse_slope = 0.0;  // log-log slope of median mse vs N
  double ratio = 0.0;      // median mse at smallest N / at largest N
  bool passed = false;
};

// Default target: prod_k sin(2 pi z_k) on the unit cube.
double sin_target(const Eigen::VectorXd& z);

ConsistencyReport nw_consistency_check(const TargetFn& target,
                                       const ConsistencyConfig& cfg,
                                       RngStream rng);

struct ScalingConfig {
  // Bias regime: noiseless stratified design at n_bias points, estimates
  // averaged over seeds at a central query.
  std::vector<double> h_grid = {0.005, 0.0084, 0.0141, 0.0237,
                                0.0398, 0.0669, 0.1125, 0.189};
  int n_bias = 20000;
  // Variance regime: noisy uniform design at fixed bandwidth.
  std::vector<int> n_grid = {200, 400, 800, 1600, 3200, 6400, 12800};
  double variance_h = 0.05;
  double noise = 0.1;
  int n_seeds = 50;
  int n_queries = 21;  // pooled interior queries over [0.25, 0.75]
  double min_decades = 1.5;
  // Below this the bias is treated as zero and the slope fit is skipped.
  double negligible_bias_sq = 1e-8;
  double bias_slope_target = 4.0;
  double bias_slope_tol = 0.7;
  double variance_slope_target = -1.0;
  double variance_slope_tol = 0.15;
};

struct ScalingReport {
  std::vector<std::pair<double, double>> bias_rows;      // (h, bias^2)
  std::vector<std::pair<int, double>> variance_rows;     // (N, variance)
  std::optional<double> bias_slope;  // empty when the bias vanishes
  double variance_slope = 0.0;
  bool bias_ok = false;
  bool variance_ok = false;

  bool passed() const { return bias_ok && variance_ok; }
};

// One-dimensional check. Throws ConfigError if either grid spans less than
// min_decades.
ScalingReport mse_scaling_check(const TargetFn& target,
                                const ScalingConfig& cfg, RngStream rng);

// Least-squares slope of log(y) on log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

nlohmann::json to_json(const DeepcReport& r);
nlohmann::json to_json(const ConsistencyReport& r);
nlohmann::json to_json(const ScalingReport& r);

}  // namespace bsd
