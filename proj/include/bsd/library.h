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

#include <cstdint>
#include <string>
#include <vector>

#include "bsd/dynamics.h"
#include "bsd/types.h"

namespace bsd {

struct TrajectoryRecord {
  ControlSequence controls;  // H x n_u
  StateTrajectory states;    // (H+1) x n_x, shielded
  double reward = 0.0;
  int goal_space_index = -1;  // scene the record was collected in, if known

  auto initial_state() const { return states.row(0); }
  auto terminal_state() const { return states.row(states.rows() - 1); }

  bool operator==(const TrajectoryRecord& o) const {
    return reward == o.reward && goal_space_index == o.goal_space_index &&
           controls == o.controls && states == o.states;
  }
};

struct RewardStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;

  bool operator==(const RewardStats&) const = default;
};

struct Provenance {
  std::string generator;
  std::uint64_t base_seed = 0;

  bool operator==(const Provenance&) const = default;
};

struct TrajectoryLibrary {
  std::vector<TrajectoryRecord> records;
  SystemSpec system;
  RewardStats reward_stats;
  Provenance provenance;

  std::size_t size() const { return records.size(); }
  // (r_j - mean) / (max - min), or 0 when all rewards coincide.
  double normalized_reward(std::size_t j) const;

  bool operator==(const TrajectoryLibrary&) const = default;
};

RewardStats compute_reward_stats(const std::vector<TrajectoryRecord>& records);

// Checks non-emptiness and homogeneous dimensions against `system`.
void validate(const TrajectoryLibrary& library);

}  // namespace bsd
