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

#include <optional>
#include <string_view>
#include <vector>

#include "bsd/library.h"
#include "bsd/numcore.h"
#include "bsd/parkenv.h"
#include "bsd/planner_mbd.h"
#include "bsd/rng.h"
#include "bsd/shield.h"

namespace bsd {

enum class BandwidthMode { kFixed, kAdaptive };

BandwidthMode parse_bandwidth_mode(std::string_view name);
std::string_view to_string(BandwidthMode mode);

// Kernel bandwidths and temperatures. An infinite nu_x / nu_g switches the
// corresponding kernel off; eta = 0 switches off the reward tilt.
struct KernelParams {
  double nu_x = 2.0;
  double nu_g = 3.0;
  double eta = 10.0;
  double c = 1.0;
  double gamma = 0.5;
  BandwidthMode mode = BandwidthMode::kFixed;
  double dim_power = 0.5;
};

void validate(const KernelParams& p);

// Diffusion-kernel bandwidth. Adaptive: c * sigma^gamma * d^dim_power.
// Fixed: c * d^dim_power, independent of sigma.
double bandwidth(double sigma, int d, const KernelParams& p);

// Squared goal distance over the channels the reward scores: position and
// lead heading (wrapped).
double goal_distance_sq(std::span<const double> state, const State& goal);

// Squared state distance over all channels, angles wrapped.
double context_distance_sq(std::span<const double> a,
                           std::span<const double> b, const SystemSpec& spec);

// Product of diffusion, context, goal and reward kernels, in log space and
// normalized.
WeightVector kernel_log_weights(const ControlSequence& query,
                                const TrajectoryLibrary& library,
                                const State& x0, const State& goal,
                                double sigma, const KernelParams& p);

struct NwEstimate {
  ControlSequence controls;
  StateTrajectory states;
};

// Weighted average of library controls and states.
NwEstimate nw_estimate(const WeightVector& weights,
                       const TrajectoryLibrary& library);

// K i.i.d. indices with P(j) = weights[j], by inverse CDF.
std::vector<std::size_t> multinomial_draw(const WeightVector& weights,
                                          std::size_t K, RngStream& rng);

enum class SelectionRule { kSoftmax, kArgmax };

// Source of the returned state trajectory: the kernel-weighted average of
// library states at the final step, or the selection mixture of the
// shielded candidate states.
enum class StateEstimate { kKernel, kSelection };

StateEstimate parse_state_estimate(std::string_view name);
std::string_view to_string(StateEstimate e);

struct BsdConfig {
  int n_diffuse = 100;
  int num_candidates = 20000;
  double temperature = 0.1;
  RewardScaling reward_scaling = RewardScaling::kStandardize;
  double sigma_max = 1.0;
  double sigma_min = 0.02;
  ScheduleShape schedule_shape = ScheduleShape::kLinearLog;
  KernelParams kernel;
  SelectionRule selection = SelectionRule::kSoftmax;
  StateEstimate state_estimate = StateEstimate::kKernel;
  double margin = lot::kDefaultMargin;

  NoiseSchedule schedule() const {
    return make_schedule(n_diffuse, sigma_max, sigma_min, schedule_shape);
  }
};

void validate(const BsdConfig& cfg);

// Shielded library records for one planning problem. A retrieved record is
// scored with the planning problem's x0 in row 0, then shielded post hoc.
// Entries are computed on first use and reused across denoising steps.
class CandidateCache {
 public:
  CandidateCache(const TrajectoryLibrary& library, const State& x0,
                 const ParkingScene& scene, double margin);

  const ShieldedTrajectory& shielded(std::size_t j);
  double reward(std::size_t j);

 private:
  struct Entry {
    ShieldedTrajectory shielded;
    double reward = 0.0;
  };
  const Entry& entry(std::size_t j);

  const TrajectoryLibrary& library_;
  State x0_;
  const ParkingScene& scene_;
  double margin_;
  std::vector<std::optional<Entry>> entries_;
};

struct BsdStepResult {
  ControlSequence next;            // Y_{i-1}, re-noised unless last step
  ControlSequence mean;            // reward-softmax mixture of candidates
  StateTrajectory state_estimate;  // same mixture over shielded states
  WeightVector kernel_weights;
  std::vector<std::size_t> drawn;
  double best_reward = 0.0;
};

// One denoising step driven by the library. `next_sigma` is the re-noising
// level; pass std::nullopt on the final step.
BsdStepResult bsd_denoise_step(const ControlSequence& current,
                               const TrajectoryLibrary& library,
                               const State& x0, const ParkingScene& scene,
                               double sigma, std::optional<double> next_sigma,
                               const BsdConfig& cfg, const RngStream& rng,
                               CandidateCache& cache);

// Full reverse diffusion using only the library. Holds a DynamicsPoison guard
// for its whole duration.
PlanResult bsd_plan(const State& x0, const ParkingScene& scene,
                    const TrajectoryLibrary& library, const BsdConfig& cfg,
                    const RngStream& rng);

// Score minimized by nearest-neighbour retrieval.
double nn_score(std::size_t j, const TrajectoryLibrary& library,
                const State& x0, const State& goal, const KernelParams& p);

// Single-shot retrieval of the best-scoring record; no sampling.
PlanResult nn_plan(const State& x0, const ParkingScene& scene,
                   const TrajectoryLibrary& library, const KernelParams& p,
                   double margin = lot::kDefaultMargin);

}  // namespace bsd
