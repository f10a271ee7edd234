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
#include <string_view>
#include <vector>

#include "bsd/dynamics.h"
#include "bsd/geometry.h"
#include "bsd/rng.h"
#include "bsd/types.h"
#include "json.hpp"

namespace bsd {

// Lot layout. Two facing rows of eight 3 m x 6 m spaces across a 12 m aisle,
// centred in a 32 m square lot whose walls are 1 m thick bands along the
// boundary.
namespace lot {
inline constexpr double kSize = 32.0;
inline constexpr double kWallThickness = 1.0;
inline constexpr int kColumns = 8;
inline constexpr int kRows = 2;
inline constexpr int kSpaces = kColumns * kRows;
inline constexpr double kSpaceWidth = 3.0;
inline constexpr double kSpaceDepth = 6.0;
inline constexpr double kAisleWidth = 12.0;
inline constexpr double kFirstColumnX = 4.0;
inline constexpr double kRow0Y = 4.0;  // lower edge of the bottom row
inline constexpr double kDefaultMargin = 0.1;
}  // namespace lot

using OccupancyMask = std::uint32_t;  // bit i set => space i occupied

struct ParkingSpace {
  Aabb box;
  Vec2 center;
  double heading = 0.0;  // pointing from the aisle into the space
  Vec2 entry;            // midpoint of the aisle-side edge
};

struct ParkingScene {
  Aabb lot;
  std::vector<ParkingSpace> spaces;
  int goal_space_index = 0;
  OccupancyMask occupied = 0;
  int wall_count = 0;
  std::vector<ConvexPolygon> obstacles;  // walls first, then occupied spaces
  State goal_pose;

  // Uniform-grid broad phase over the lot: cell (i, j) lists the obstacles
  // whose bounds touch it.
  static constexpr int kGridCells = 8;
  std::vector<std::vector<int>> grid;
  void index_obstacles();
};

// Bitmask with every space except `goal_space_index` occupied.
OccupancyMask all_but(int goal_space_index);

ParkingScene build_scene(int goal_space_index, OccupancyMask occupied,
                         const SystemSpec& spec);

nlohmann::json to_json(const ParkingScene& scene);

// Body rectangles for a state, tractor first. `inflate` grows each rectangle
// by that distance on every side.
std::vector<Quad> footprints(std::span<const double> state,
                             const SystemSpec& spec, double inflate = 0.0);
std::vector<Quad> footprints(const State& state, const SystemSpec& spec,
                             double inflate = 0.0);

bool hitch_angles_ok(std::span<const double> state, const SystemSpec& spec);

bool is_safe(std::span<const double> state, const ParkingScene& scene,
             const SystemSpec& spec, double margin = lot::kDefaultMargin);
bool is_safe(const State& state, const ParkingScene& scene,
             const SystemSpec& spec, double margin = lot::kDefaultMargin);

// Shaping term of the reward in (0, 1]: exp(-dist / 4 m) * exp(-|dtheta|).
double goal_proximity(std::span<const double> state, const State& goal);

inline constexpr double kRewardScale = 6.0;
inline constexpr double kRunningWeight = 0.3;
inline constexpr double kTerminalWeight = 0.7;

// 6 * (0.3 * mean_{t>=1} g(x_t) + 0.7 * g(x_H)).
double reward(const StateTrajectory& X, const ParkingScene& scene);

// Uniform over the collision-free lot with uniform heading, trailers aligned
// and velocity channels zero. Throws after 10^4 rejected draws.
State sample_initial_state(const ParkingScene& scene, const SystemSpec& spec,
                           RngStream& rng,
                           double margin = lot::kDefaultMargin);

// Distribution of planning problems (goal space and initial state).
enum class GoalMode { kDesignated, kUniform };
enum class HeadingMode { kUniform, kFixed };

struct ScenarioConfig {
  GoalMode goal_mode = GoalMode::kUniform;
  int designated_goal = 3;
  // Initial positions are drawn uniformly from this box (clipped to the lot).
  Aabb start_region{Vec2(0.0, 0.0), Vec2(lot::kSize, lot::kSize)};
  HeadingMode heading_mode = HeadingMode::kUniform;
  double fixed_heading = 0.0;
  double heading_jitter = 0.0;  // half-width of uniform jitter, kFixed only
  double margin = lot::kDefaultMargin;
};

GoalMode parse_goal_mode(std::string_view name);
std::string_view to_string(GoalMode mode);
HeadingMode parse_heading_mode(std::string_view name);
std::string_view to_string(HeadingMode mode);

nlohmann::json to_json(const ScenarioConfig& cfg);

struct PlanningProblem {
  int goal_space_index = 0;
  ParkingScene scene;
  State x0;
};

// Goal drawn from rng.derive(goal), all other spaces occupied, initial state
// by rejection sampling inside the scenario's start region.
PlanningProblem sample_problem(const SystemSpec& spec,
                               const ScenarioConfig& cfg, const RngStream& rng);

}  // namespace bsd
