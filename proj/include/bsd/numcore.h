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

#include <span>
#include <string_view>
#include <vector>

#include "bsd/types.h"

namespace bsd {

// Log-domain scores together with their normalized probabilities.
struct WeightVector {
  std::vector<double> log_weights;
  std::vector<double> normalized;

  std::size_t size() const { return normalized.size(); }
  double operator[](std::size_t i) const { return normalized[i]; }
};

// Max-shifted normalization: exp(l_j - max) / sum. Entries equal to -inf map
// to exactly zero. Throws NumericError("degenerate weights") when no entry is
// finite and ParameterError for an empty input or a +inf/NaN entry.
WeightVector normalize_log_weights(std::span<const double> log_weights);

// normalize_log_weights(values / temperature).
WeightVector softmax_select(std::span<const double> values, double temperature);

// Reward scaling applied before the selection softmax. kStandardize maps a
// batch to (r - mean) / std (all zeros when std == 0), so the temperature is
// measured in batch standard deviations rather than raw reward units.
enum class RewardScaling { kRaw, kStandardize };

RewardScaling parse_reward_scaling(std::string_view name);
std::string_view to_string(RewardScaling scaling);

// softmax_select after applying `scaling` to the values.
WeightVector select_weights(std::span<const double> values, double temperature,
                            RewardScaling scaling);

// Shannon entropy (nats) of a normalized weight vector.
double entropy(const WeightVector& w);

enum class ScheduleShape { kLinearLog, kCosine };

ScheduleShape parse_schedule_shape(std::string_view name);
std::string_view to_string(ScheduleShape shape);

// Noise levels ordered from the noisiest step to the cleanest.
struct NoiseSchedule {
  std::vector<double> sigmas;

  std::size_t n_steps() const { return sigmas.size(); }
  double sigma_max() const { return sigmas.front(); }
  double sigma_min() const { return sigmas.back(); }
};

// linear_log interpolates log(sigma) linearly (geometric decay). cosine
// interpolates log(sigma) along a half-cosine ramp, spending more steps near
// both ends. Endpoints are exact in both shapes.
NoiseSchedule make_schedule(int n_steps, double sigma_max, double sigma_min,
                            ScheduleShape shape = ScheduleShape::kLinearLog);

}  // namespace bsd
