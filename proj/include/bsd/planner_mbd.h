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

#include <vector>

#include "bsd/dynamics.h"
#include "bsd/numcore.h"
#include "bsd/parkenv.h"
#include "bsd/rng.h"
#include "bsd/types.h"
#include "json.hpp"

namespace bsd {

// Output shared by every planner.
struct PlanResult {
  ControlSequence controls;
  StateTrajectory states;  // shielded
  double reward = 0.0;
  int interventions = 0;   // shield reverts on the executed trajectory
  double wall_time_ms = 0.0;
  std::vector<double> reward_trace;  // one entry per denoising step

  bool safe() const { return interventions == 0; }
};

nlohmann::json to_json(const PlanResult& result);

struct MbdConfig {
  int n_diffuse = 100;
  int num_candidates = 20000;
  double temperature = 0.1;
  RewardScaling reward_scaling = RewardScaling::kStandardize;
  double sigma_max = 1.0;
  double sigma_min = 0.02;
  ScheduleShape schedule_shape = ScheduleShape::kLinearLog;
  double candidate_scale = 1.0;
  double margin = lot::kDefaultMargin;
  int threads = 1;

  NoiseSchedule schedule() const {
    return make_schedule(n_diffuse, sigma_max, sigma_min, schedule_shape);
  }
};

void validate(const MbdConfig& cfg);

struct MbdStepResult {
  ControlSequence mean;  // reward-weighted candidate average
  double best_reward = 0.0;
};

// One reward-weighted denoising update. Candidate k draws its noise from
// rng.derive(k), so the result does not depend on evaluation order or on
// cfg.threads.
MbdStepResult mbd_denoise_step(const ControlSequence& current, const State& x0,
                               const ParkingScene& scene,
                               const SystemSpec& spec, const MbdConfig& cfg,
                               double sigma, const RngStream& rng);

PlanResult mbd_plan(const State& x0, const ParkingScene& scene,
                    const SystemSpec& spec, const MbdConfig& cfg,
                    const RngStream& rng);

}  // namespace bsd
