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

#include "bsd/numcore.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace bsd {

WeightVector normalize_log_weights(std::span<const double> log_weights) {
  if (log_weights.empty()) {
    throw ParameterError("normalize_log_weights: empty input");
  }
  double max_lw = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) {
    if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity()) {
      throw ParameterError("normalize_log_weights: NaN or +inf log-weight");
    }
    max_lw = std::max(max_lw, lw);
  }
  if (!std::isfinite(max_lw)) throw NumericError("degenerate weights");

  WeightVector out;
  out.log_weights.assign(log_weights.begin(), log_weights.end());
  out.normalized.resize(log_weights.size());
  double total = 0.0;
  for (std::size_t j = 0; j < log_weights.size(); ++j) {
    const double e = std::exp(log_weights[j] - max_lw);
    out.normalized[j] = e;
    total += e;
  }
  for (double& w : out.normalized) w /= total;
  return out;
}

WeightVector softmax_select(std::span<const double> values,
                            double temperature) {
  if (!(temperature > 0.0)) {
    throw ParameterError("softmax_select: temperature must be positive");
  }
  std::vector<double> scaled(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!std::isfinite(values[j])) {
      throw ParameterError("softmax_select: non-finite value");
    }
    scaled[j] = values[j] / temperature;
  }
  return normalize_log_weights(scaled);
}

RewardScaling parse_reward_scaling(std::string_view name) {
  if (name == "raw") return RewardScaling::kRaw;
  if (name == "standardize") return RewardScaling::kStandardize;
  throw ParameterError("unknown reward scaling: " + std::string(name));
}

std::string_view to_string(RewardScaling scaling) {
  return scaling == RewardScaling::kRaw ? "raw" : "standardize";
}

WeightVector select_weights(std::span<const double> values, double temperature,
                            RewardScaling scaling) {
  if (scaling == RewardScaling::kRaw || values.empty()) {
    return softmax_select(values, temperature);
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  const double sd = std::sqrt(var);
  std::vector<double> z(values.size(), 0.0);
  if (sd > 0.0) {
    for (std::size_t j = 0; j < values.size(); ++j) {
      z[j] = (values[j] - mean) / sd;
    }
  }
  return softmax_select(z, temperature);
}

double entropy(const WeightVector& w) {
  double h = 0.0;
  for (double p : w.normalized) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

ScheduleShape parse_schedule_shape(std::string_view name) {
  if (name == "linear_log") return ScheduleShape::kLinearLog;
  if (name == "cosine") return ScheduleShape::kCosine;
  throw ParameterError("unknown schedule shape: " + std::string(name));
}

std::string_view to_string(ScheduleShape shape) {
  return shape == ScheduleShape::kLinearLog ? "linear_log" : "cosine";
}

NoiseSchedule make_schedule(int n_steps, double sigma_max, double sigma_min,
                            ScheduleShape shape) {
  if (n_steps < 2) throw ParameterError("make_schedule: n_steps must be >= 2");
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min) ||
      !std::isfinite(sigma_max)) {
    throw ParameterError("make_schedule: need sigma_max > sigma_min > 0");
  }
  const double log_hi = std::log(sigma_max);
  const double log_lo = std::log(sigma_min);
  NoiseSchedule s;
  s.sigmas.resize(n_steps);
  for (int i = 0; i < n_steps; ++i) {
    const double t = static_cast<double>(i) / (n_steps - 1);
    const double frac =
        shape == ScheduleShape::kLinearLog
            ? t
            : 0.5 * (1.0 - std::cos(std::numbers::pi * t));
    s.sigmas[i] = std::exp(log_hi + frac * (log_lo - log_hi));
  }
  s.sigmas.front() = sigma_max;
  s.sigmas.back() = sigma_min;
  // exp/log round-off can break monotonicity by an ulp on near-equal levels.
  for (int i = 1; i < n_steps; ++i) {
    s.sigmas[i] = std::min(s.sigmas[i], s.sigmas[i - 1]);
  }
  return s;
}

}  // namespace bsd
