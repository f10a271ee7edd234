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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bsd/numcore.h"

namespace bsd {
namespace {

double decades(double lo, double hi) { return std::log10(hi / lo); }

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  const double upper = v[n / 2];
  if (n % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + n / 2));
}

// Residual of a simplex objective with per-column partial derivatives g,
// pulled back through alpha = softmax(theta).
double log_domain_residual(const Eigen::VectorXd& alpha,
                           const Eigen::VectorXd& g) {
  double mean = 0.0;
  for (Eigen::Index j = 0; j < alpha.size(); ++j) {
    if (alpha[j] > 0.0) mean += alpha[j] * g[j];
  }
  double worst = 0.0;
  for (Eigen::Index j = 0; j < alpha.size(); ++j) {
    if (alpha[j] > 0.0) {
      worst = std::max(worst, std::abs(alpha[j] * (g[j] - mean)));
    }
  }
  return worst;
}

Eigen::VectorXd kl_gradient(const Eigen::VectorXd& alpha, double beta) {
  const double log_n = std::log(static_cast<double>(alpha.size()));
  Eigen::VectorXd g(alpha.size());
  for (Eigen::Index j = 0; j < alpha.size(); ++j) {
    g[j] = alpha[j] > 0.0
               ? beta * beta * (std::log(alpha[j]) + log_n + 1.0)
               : 0.0;
  }
  return g;
}

Eigen::VectorXd squared_distances(const Eigen::MatrixXd& columns,
                                  const Eigen::VectorXd& query) {
  return (columns.colwise() - query).colwise().squaredNorm().transpose();
}

Eigen::MatrixXd draw_design(int n, int dim, Design design, RngStream& rng) {
  Eigen::MatrixXd z(n, dim);
  if (design != Design::kUniform && dim != 1) {
    throw ConfigError("stratified and grid designs are one-dimensional");
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) {
      switch (design) {
        case Design::kUniform:
          z(i, k) = rng.uniform();
          break;
        case Design::kStratified:
          z(i, k) = (i + rng.uniform()) / n;
          break;
        case Design::kGrid:
          z(i, k) = (i + 0.5) / n;
          break;
      }
    }
  }
  return z;
}

std::vector<Eigen::VectorXd> query_grid(int per_axis, int dim, double lo,
                                        double hi) {
  std::vector<double> axis(per_axis);
  for (int i = 0; i < per_axis; ++i) {
    axis[i] = per_axis == 1 ? 0.5 * (lo + hi)
                            : lo + (hi - lo) * i / (per_axis - 1);
  }
  std::vector<Eigen::VectorXd> out;
  if (dim == 1) {
    for (double a : axis) out.push_back(Eigen::VectorXd::Constant(1, a));
  } else {
    for (double a : axis) {
      for (double b : axis) out.push_back(Eigen::Vector2d(a, b));
    }
  }
  return out;
}

}  // namespace

HankelWindows build_hankel(const Eigen::MatrixXd& inputs,
                           const Eigen::MatrixXd& states, int t_ini,
                           int horizon) {
  if (t_ini < 0 || horizon < 1) {
    throw ParameterError("build_hankel: need t_ini >= 0 and horizon >= 1");
  }
  if (inputs.rows() != states.rows()) {
    throw DimensionError("build_hankel: input and state lengths differ");
  }
  const int length = static_cast<int>(inputs.rows());
  if (length < t_ini + horizon) {
    throw DimensionError("build_hankel: trajectory shorter than one window");
  }
  const int n_u = static_cast<int>(inputs.cols());
  const int n_x = static_cast<int>(states.cols());
  const int n = length - t_ini - horizon + 1;
  HankelWindows w;
  w.t_ini = t_ini;
  w.horizon = horizon;
  w.past_inputs.resize(t_ini * n_u, n);
  w.future_inputs.resize(horizon * n_u, n);
  w.past_states.resize(t_ini * n_x, n);
  w.future_states.resize(horizon * n_x, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < t_ini; ++k) {
      w.past_inputs.col(j).segment(k * n_u, n_u) = inputs.row(j + k).transpose();
      w.past_states.col(j).segment(k * n_x, n_x) = states.row(j + k).transpose();
    }
    for (int k = 0; k < horizon; ++k) {
      const int t = j + t_ini + k;
      w.future_inputs.col(j).segment(k * n_u, n_u) = inputs.row(t).transpose();
      w.future_states.col(j).segment(k * n_x, n_x) = states.row(t).transpose();
    }
  }
  return w;
}

Eigen::VectorXd hankel_softmax_weights(const Eigen::MatrixXd& columns,
                                       const Eigen::VectorXd& query,
                                       double beta) {
  if (!(beta > 0.0)) throw ParameterError("bandwidth must be positive");
  if (columns.rows() != query.size()) {
    throw DimensionError("query length does not match column height");
  }
  const Eigen::VectorXd d = squared_distances(columns, query);
  std::vector<double> logw(d.size());
  for (Eigen::Index j = 0; j < d.size(); ++j) {
    logw[j] = -d[j] / (2.0 * beta * beta);
  }
  const WeightVector w = normalize_log_weights(logw);
  return Eigen::Map<const Eigen::VectorXd>(w.normalized.data(),
                                           static_cast<Eigen::Index>(w.size()));
}

double entropic_stationarity_residual(const Eigen::MatrixXd& columns,
                                      const Eigen::VectorXd& query,
                                      const Eigen::VectorXd& alpha,
                                      double beta) {
  const Eigen::VectorXd g =
      0.5 * squared_distances(columns, query) + kl_gradient(alpha, beta);
  return log_domain_residual(alpha, g);
}

double projection_objective_residual(const Eigen::MatrixXd& columns,
                                     const Eigen::VectorXd& query,
                                     const Eigen::VectorXd& alpha,
                                     double beta) {
  const Eigen::VectorXd residual = columns * alpha - query;
  const Eigen::VectorXd g =
      2.0 * columns.transpose() * residual + kl_gradient(alpha, beta);
  return log_domain_residual(alpha, g);
}

DeepcReport deepc_equivalence_check(const Eigen::MatrixXd& A,
                                    const Eigen::MatrixXd& B,
                                    const DeepcConfig& cfg, RngStream rng) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) {
    throw DimensionError("deepc: A must be square and B conformable");
  }
  if (cfg.beta_factors.empty() || cfg.n_queries < 1) {
    throw ConfigError("deepc: empty beta grid or no queries");
  }
  const Eigen::Index n_x = A.rows();
  const Eigen::Index n_u = B.cols();
  RngStream input_rng = rng.derive(1);
  Eigen::MatrixXd inputs(cfg.length, n_u);
  Eigen::MatrixXd states(cfg.length, n_x);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_x);
  for (int t = 0; t < cfg.length; ++t) {
    for (Eigen::Index k = 0; k < n_u; ++k) inputs(t, k) = input_rng.normal();
    states.row(t) = x.transpose();
    x = A * x + B * inputs.row(t).transpose();
  }
  const HankelWindows w = build_hankel(inputs, states, cfg.t_ini, cfg.horizon);
  const Eigen::MatrixXd& cols = w.future_inputs;
  const int n = w.n_windows();

  DeepcReport report;
  report.n_windows = n;
  report.n_queries = cfg.n_queries;

  // Persistency of excitation of order t_ini + horizon + n_x.
  const int depth = cfg.t_ini + cfg.horizon + static_cast<int>(n_x);
  if (cfg.length - depth + 1 >= depth * n_u) {
    Eigen::MatrixXd deep(depth * n_u, cfg.length - depth + 1);
    for (Eigen::Index j = 0; j < deep.cols(); ++j) {
      for (int k = 0; k < depth; ++k) {
        deep.col(j).segment(k * n_u, n_u) = inputs.row(j + k).transpose();
      }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(deep);
    report.hankel_rank = static_cast<int>(qr.rank());
    report.persistently_exciting = qr.rank() == deep.rows();
  } else {
    report.persistently_exciting = false;
  }

  std::vector<double> pairwise;
  pairwise.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      pairwise.push_back((cols.col(i) - cols.col(j)).norm());
    }
  }
  report.scale = pairwise.empty() ? 1.0 : median(pairwise);

  RngStream query_rng = rng.derive(2);
  std::vector<Eigen::VectorXd> queries;
  for (int q = 0; q < cfg.n_queries; ++q) {
    Eigen::VectorXd y(cols.rows());
    for (Eigen::Index k = 0; k < y.size(); ++k) y[k] = query_rng.normal();
    queries.push_back(std::move(y));
  }

  const auto lsq = cols.completeOrthogonalDecomposition();
  const auto [min_factor, max_factor] =
      std::minmax_element(cfg.beta_factors.begin(), cfg.beta_factors.end());
  report.stationarity_ok = true;
  report.reprojection_ok = true;
  for (double factor : cfg.beta_factors) {
    DeepcBetaRow row;
    row.beta = factor * report.scale;
    int hits = 0;
    for (const Eigen::VectorXd& y : queries) {
      const Eigen::VectorXd alpha = hankel_softmax_weights(cols, y, row.beta);
      row.max_stationarity = std::max(
          row.max_stationarity,
          entropic_stationarity_residual(cols, y, alpha, row.beta));
      row.max_projection_residual = std::max(
          row.max_projection_residual,
          projection_objective_residual(cols, y, alpha, row.beta));
      const Eigen::VectorXd estimate = cols * alpha;
      const Eigen::VectorXd coeffs = lsq.solve(estimate);
      row.max_reprojection =
          std::max(row.max_reprojection, (cols * coeffs - estimate).norm());
      row.max_uniform_gap =
          std::max(row.max_uniform_gap,
                   (alpha.array() - 1.0 / n).abs().maxCoeff());
      Eigen::Index best = 0;
      Eigen::Index nearest = 0;
      alpha.maxCoeff(&best);
      squared_distances(cols, y).minCoeff(&nearest);
      if (best == nearest) ++hits;
    }
    if (row.max_stationarity >= cfg.stationarity_tol) {
      report.stationarity_ok = false;
    }
    if (row.max_reprojection >= cfg.reprojection_tol) {
      report.reprojection_ok = false;
    }
    if (factor == *min_factor) report.nearest_hits = hits;
    if (factor == *max_factor) report.uniform_gap = row.max_uniform_gap;
    report.rows.push_back(row);
  }
  report.nearest_ok = report.nearest_hits == cfg.n_queries;
  report.uniform_ok = report.uniform_gap < cfg.uniform_tol;
  return report;
}

DeepcReport deepc_equivalence_check(const DeepcConfig& cfg, RngStream rng) {
  Eigen::Matrix2d A;
  A << 1.0, cfg.dt, 0.0, 1.0;
  Eigen::Vector2d B(0.0, cfg.dt);
  return deepc_equivalence_check(A, B, cfg, rng);
}

double nw_regress(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& query, double h) {
  if (z.rows() != y.size() || z.cols() != query.size()) {
    throw DimensionError("nw_regress: dimension mismatch");
  }
  if (z.rows() == 0) throw ParameterError("nw_regress: empty design");
  const double inv = 1.0 / (2.0 * h * h);
  Eigen::VectorXd logw(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    logw[i] = -(z.row(i).transpose() - query).squaredNorm() * inv;
  }
  const double top = logw.maxCoeff();
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double w = std::exp(logw[i] - top);
    num += w * y[i];
    den += w;
  }
  return num / den;
}

double sin_target(const Eigen::VectorXd& z) {
  double v = 1.0;
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    v *= std::sin(2.0 * std::numbers::pi * z[k]);
  }
  return v;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ParameterError("loglog_slope: need two or more paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw ParameterError("loglog_slope: values must be positive");
    }
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ConsistencyReport nw_consistency_check(const TargetFn& target,
                                       const ConsistencyConfig& cfg,
                                       RngStream rng) {
  if (cfg.dim != 1 && cfg.dim != 2) {
    throw ConfigError("consistency check supports dim 1 or 2");
  }
  if (cfg.n_grid.size() < 2 || cfg.n_seeds < 1 ||
      !std::is_sorted(cfg.n_grid.begin(), cfg.n_grid.end())) {
    throw ConfigError("consistency check needs an increasing N grid");
  }
  const std::vector<Eigen::VectorXd> queries =
      query_grid(cfg.n_queries, cfg.dim, 0.2, 0.8);
  ConsistencyReport report;
  for (int n : cfg.n_grid) {
    ConsistencyRow row;
    row.n = n;
    row.h = cfg.bandwidth_scale * std::pow(n, -1.0 / (cfg.dim + 4));
    Eigen::MatrixXd est(cfg.n_seeds, queries.size());
    std::vector<double> seed_mse(cfg.n_seeds);
    for (int s = 0; s < cfg.n_seeds; ++s) {
      RngStream srng = rng.derive({static_cast<std::uint64_t>(n),
                                   static_cast<std::uint64_t>(s)});
      const Eigen::MatrixXd z = draw_design(n, cfg.dim, cfg.design, srng);
      Eigen::VectorXd y(n);
      for (int i = 0; i < n; ++i) {
        y[i] = target(z.row(i).transpose()) + cfg.noise * srng.normal();
      }
      double mse = 0.0;
      for (std::size_t q = 0; q < queries.size(); ++q) {
        est(s, q) = nw_regress(z, y, queries[q], row.h);
        const double e = est(s, q) - target(queries[q]);
        mse += e * e / queries.size();
      }
      seed_mse[s] = mse;
      row.mse += mse / cfg.n_seeds;
    }
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const double mean = est.col(q).mean();
      const double bias = mean - target(queries[q]);
      row.bias_sq += bias * bias / queries.size();
      row.variance +=
          (est.col(q).array() - mean).square().mean() / queries.size();
    }
    row.median_mse = median(seed_mse);
    report.rows.push_back(row);
  }
  std::vector<double> ns;
  std::vector<double> mses;
  bool decreasing = true;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    ns.push_back(report.rows[i].n);
    mses.push_back(report.rows[i].median_mse);
    if (i > 0 && mses[i] >= mses[i - 1]) decreasing = false;
  }
  report.ratio = mses.front() / mses.back();
  bool positive = std::all_of(mses.begin(), mses.end(),
                              [](double m) { return m > 0.0; });
  report.mse_slope = positive ? loglog_slope(ns, mses) : 0.0;
  report.passed = decreasing && report.ratio > cfg.required_ratio;
  return report;
}

ScalingReport mse_scaling_check(const TargetFn& target,
                                const ScalingConfig& cfg, RngStream rng) {
  if (cfg.h_grid.size() < 2 || cfg.n_grid.size() < 2 ||
      !std::is_sorted(cfg.h_grid.begin(), cfg.h_grid.end()) ||
      !std::is_sorted(cfg.n_grid.begin(), cfg.n_grid.end())) {
    throw ConfigError("scaling check needs increasing grids");
  }
  if (decades(cfg.h_grid.front(), cfg.h_grid.back()) < cfg.min_decades ||
      decades(cfg.n_grid.front(), cfg.n_grid.back()) < cfg.min_decades) {
    throw ConfigError("scaling grid spans fewer than " +
                      std::to_string(cfg.min_decades) + " decades");
  }
  if (cfg.n_seeds < 2) throw ConfigError("scaling check needs 2+ seeds");
  ScalingReport report;

  const Eigen::VectorXd center = Eigen::VectorXd::Constant(1, 0.5);
  RngStream bias_rng = rng.derive(1);
  std::vector<Eigen::MatrixXd> designs;
  std::vector<Eigen::VectorXd> values;
  for (int s = 0; s < cfg.n_seeds; ++s) {
    RngStream srng = bias_rng.derive(static_cast<std::uint64_t>(s));
    designs.push_back(draw_design(cfg.n_bias, 1, Design::kStratified, srng));
    Eigen::VectorXd y(cfg.n_bias);
    for (int i = 0; i < cfg.n_bias; ++i) {
      y[i] = target(designs.back().row(i).transpose());
    }
    values.push_back(std::move(y));
  }
  std::vector<double> hs;
  std::vector<double> biases;
  for (double h : cfg.h_grid) {
    double mean = 0.0;
    for (int s = 0; s < cfg.n_seeds; ++s) {
      mean += nw_regress(designs[s], values[s], center, h) / cfg.n_seeds;
    }
    const double bias = mean - target(center);
    report.bias_rows.emplace_back(h, bias * bias);
    hs.push_back(h);
    biases.push_back(bias * bias);
  }
  if (*std::max_element(biases.begin(), biases.end()) < cfg.negligible_bias_sq) {
    report.bias_ok = true;
  } else {
    const bool positive = std::all_of(biases.begin(), biases.end(),
                                      [](double b) { return b > 0.0; });
    if (positive) {
      report.bias_slope = loglog_slope(hs, biases);
      report.bias_ok = std::abs(*report.bias_slope - cfg.bias_slope_target) <=
                       cfg.bias_slope_tol;
    }
  }

  const std::vector<Eigen::VectorXd> queries =
      query_grid(cfg.n_queries, 1, 0.25, 0.75);
  RngStream var_rng = rng.derive(2);
  std::vector<double> ns;
  std::vector<double> variances;
  for (int n : cfg.n_grid) {
    Eigen::MatrixXd est(cfg.n_seeds, queries.size());
    for (int s = 0; s < cfg.n_seeds; ++s) {
      RngStream srng = var_rng.derive({static_cast<std::uint64_t>(n),
                                       static_cast<std::uint64_t>(s)});
      const Eigen::MatrixXd z = draw_design(n, 1, Design::kUniform, srng);
      Eigen::VectorXd y(n);
      for (int i = 0; i < n; ++i) {
        y[i] = target(z.row(i).transpose()) + cfg.noise * srng.normal();
      }
      for (std::size_t q = 0; q < queries.size(); ++q) {
        est(s, q) = nw_regress(z, y, queries[q], cfg.variance_h);
      }
    }
    double pooled = 0.0;
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const double mean = est.col(q).mean();
      pooled += (est.col(q).array() - mean).square().sum() /
                (cfg.n_seeds - 1) / queries.size();
    }
    report.variance_rows.emplace_back(n, pooled);
    ns.push_back(n);
    variances.push_back(pooled);
  }
  report.variance_slope = loglog_slope(ns, variances);
  report.variance_ok =
      std::abs(report.variance_slope - cfg.variance_slope_target) <=
      cfg.variance_slope_tol;
  return report;
}

nlohmann::json to_json(const DeepcReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const DeepcBetaRow& row : r.rows) {
    rows.push_back({{"beta", row.beta},
                    {"max_stationarity", row.max_stationarity},
                    {"max_projection_residual", row.max_projection_residual},
                    {"max_reprojection", row.max_reprojection},
                    {"max_uniform_gap", row.max_uniform_gap}});
  }
  return {{"n_windows", r.n_windows},
          {"scale", r.scale},
          {"persistently_exciting", r.persistently_exciting},
          {"hankel_rank", r.hankel_rank},
          {"nearest_hits", r.nearest_hits},
          {"n_queries", r.n_queries},
          {"uniform_gap", r.uniform_gap},
          {"stationarity_ok", r.stationarity_ok},
          {"nearest_ok", r.nearest_ok},
          {"uniform_ok", r.uniform_ok},
          {"reprojection_ok", r.reprojection_ok},
          {"passed", r.passed()},
          {"rows", rows}};
}

nlohmann::json to_json(const ConsistencyReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ConsistencyRow& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"h", row.h},
                    {"mse", row.mse},
                    {"median_mse", row.median_mse},
                    {"bias_sq", row.bias_sq},
                    {"variance", row.variance}});
  }
  return {{"mse_slope", r.mse_slope},
          {"ratio", r.ratio},
          {"passed", r.passed},
          {"rows", rows}};
}

nlohmann::json to_json(const ScalingReport& r) {
  nlohmann::json bias = nlohmann::json::array();
  for (const auto& [h, b] : r.bias_rows) bias.push_back({{"h", h}, {"bias_sq", b}});
  nlohmann::json var = nlohmann::json::array();
  for (const auto& [n, v] : r.variance_rows) {
    var.push_back({{"n", n}, {"variance", v}});
  }
  return {{"bias_slope", r.bias_slope ? nlohmann::json(*r.bias_slope)
                                      : nlohmann::json(nullptr)},
          {"variance_slope", r.variance_slope},
          {"bias_ok", r.bias_ok},
          {"variance_ok", r.variance_ok},
          {"passed", r.passed()},
          {"bias_rows", bias},
          {"variance_rows", var}};
}

}  // namespace bsd
