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

#include "bsd/parkenv.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bsd {

OccupancyMask all_but(int goal_space_index) {
  return ((OccupancyMask{1} << lot::kSpaces) - 1) &
         ~(OccupancyMask{1} << goal_space_index);
}

ParkingScene build_scene(int goal_space_index, OccupancyMask occupied,
                         const SystemSpec& spec) {
  using namespace lot;
  if (goal_space_index < 0 || goal_space_index >= kSpaces) {
    throw ConfigError("goal space index out of range");
  }
  if (occupied >> kSpaces) throw ConfigError("occupancy mask has stray bits");
  if (occupied & (OccupancyMask{1} << goal_space_index)) {
    throw ConfigError("goal space is occupied");
  }

  ParkingScene scene;
  scene.lot = {Vec2(0.0, 0.0), Vec2(kSize, kSize)};
  scene.goal_space_index = goal_space_index;
  scene.occupied = occupied;

  const double row1_y = kRow0Y + kSpaceDepth + kAisleWidth;
  for (int i = 0; i < kSpaces; ++i) {
    const int row = i / kColumns;
    const int col = i % kColumns;
    ParkingSpace sp;
    const double x0 = kFirstColumnX + col * kSpaceWidth;
    const double y0 = row == 0 ? kRow0Y : row1_y;
    sp.box = {Vec2(x0, y0), Vec2(x0 + kSpaceWidth, y0 + kSpaceDepth)};
    sp.center = 0.5 * (sp.box.lo + sp.box.hi);
    sp.heading = row == 0 ? -0.5 * std::numbers::pi : 0.5 * std::numbers::pi;
    sp.entry = Vec2(sp.center.x(), row == 0 ? sp.box.hi.y() : sp.box.lo.y());
    scene.spaces.push_back(sp);
  }

  const double t = kWallThickness;
  for (const Aabb& wall : {Aabb{Vec2(0, 0), Vec2(kSize, t)},
                           Aabb{Vec2(0, kSize - t), Vec2(kSize, kSize)},
                           Aabb{Vec2(0, 0), Vec2(t, kSize)},
                           Aabb{Vec2(kSize - t, 0), Vec2(kSize, kSize)}}) {
    scene.obstacles.push_back(ConvexPolygon::from_box(wall));
  }
  scene.wall_count = 4;
  for (int i = 0; i < kSpaces; ++i) {
    if (occupied & (OccupancyMask{1} << i)) {
      scene.obstacles.push_back(ConvexPolygon::from_box(scene.spaces[i].box));
    }
  }

  scene.index_obstacles();

  const ParkingSpace& goal = scene.spaces[goal_space_index];
  scene.goal_pose = State::Zero(spec.n_x);
  scene.goal_pose[0] = goal.center.x();
  scene.goal_pose[1] = goal.center.y();
  for (int c = 2; c <= 2 + spec.n_trailers(); ++c) {
    scene.goal_pose[c] = goal.heading;
  }
  return scene;
}

namespace {

int grid_cell(double v, double lo, double hi) {
  const int n = ParkingScene::kGridCells;
  const int c = static_cast<int>((v - lo) / (hi - lo) * n);
  return std::clamp(c, 0, n - 1);
}

}  // namespace

void ParkingScene::index_obstacles() {
  grid.assign(kGridCells * kGridCells, {});
  for (int o = 0; o < static_cast<int>(obstacles.size()); ++o) {
    const Aabb& b = obstacles[o].bounds();
    const int x0 = grid_cell(b.lo.x(), lot.lo.x(), lot.hi.x());
    const int x1 = grid_cell(b.hi.x(), lot.lo.x(), lot.hi.x());
    const int y0 = grid_cell(b.lo.y(), lot.lo.y(), lot.hi.y());
    const int y1 = grid_cell(b.hi.y(), lot.lo.y(), lot.hi.y());
    for (int i = x0; i <= x1; ++i) {
      for (int j = y0; j <= y1; ++j) grid[i * kGridCells + j].push_back(o);
    }
  }
}

nlohmann::json to_json(const ParkingScene& scene) {
  std::vector<double> goal(scene.goal_pose.data(),
                           scene.goal_pose.data() + scene.goal_pose.size());
  return {{"lot_size", lot::kSize},
          {"wall_thickness", lot::kWallThickness},
          {"space_width", lot::kSpaceWidth},
          {"space_depth", lot::kSpaceDepth},
          {"aisle_width", lot::kAisleWidth},
          {"goal_space_index", scene.goal_space_index},
          {"occupied", scene.occupied},
          {"goal_pose", goal},
          {"layout", "decided"}};
}

std::vector<Quad> footprints(std::span<const double> x, const SystemSpec& spec,
                             double inflate) {
  std::vector<Quad> out;
  out.reserve(spec.geometry.bodies.size());
  Vec2 origin(x[0], x[1]);
  const double lengths[] = {0.0, spec.hitch_d1, spec.hitch_d2};
  for (std::size_t b = 0; b < spec.geometry.bodies.size(); ++b) {
    const double theta = x[2 + b];
    if (b > 0) {
      origin -= lengths[b] * Vec2(std::cos(theta), std::sin(theta));
    }
    const BodyShape& body = spec.geometry.bodies[b];
    out.push_back(oriented_rect(origin, theta, body.front + inflate,
                                body.rear + inflate, body.width + 2 * inflate));
  }
  return out;
}

std::vector<Quad> footprints(const State& x, const SystemSpec& spec,
                             double inflate) {
  return footprints(as_span(x), spec, inflate);
}

bool hitch_angles_ok(std::span<const double> x, const SystemSpec& spec) {
  for (int k = 0; k < spec.n_trailers(); ++k) {
    if (std::abs(wrap_angle(x[2 + k] - x[3 + k])) > spec.hitch_limit) {
      return false;
    }
  }
  return true;
}

bool is_safe(std::span<const double> x, const ParkingScene& scene,
             const SystemSpec& spec, double margin) {
  if (!hitch_angles_ok(x, spec)) return false;
  Vec2 origin(x[0], x[1]);
  const double lengths[] = {0.0, spec.hitch_d1, spec.hitch_d2};
  for (std::size_t b = 0; b < spec.geometry.bodies.size(); ++b) {
    const double theta = x[2 + b];
    const Vec2 heading(std::cos(theta), std::sin(theta));
    if (b > 0) origin -= lengths[b] * heading;
    const BodyShape& body = spec.geometry.bodies[b];
    const OrientedBox box =
        oriented_box(origin, heading, body.front + margin, body.rear + margin,
                     body.width + 2 * margin);
    const Aabb qb = box.bounds();
    if (!scene.lot.contains(qb)) return false;
    const int x0 = grid_cell(qb.lo.x(), scene.lot.lo.x(), scene.lot.hi.x());
    const int x1 = grid_cell(qb.hi.x(), scene.lot.lo.x(), scene.lot.hi.x());
    const int y0 = grid_cell(qb.lo.y(), scene.lot.lo.y(), scene.lot.hi.y());
    const int y1 = grid_cell(qb.hi.y(), scene.lot.lo.y(), scene.lot.hi.y());
    for (int i = x0; i <= x1; ++i) {
      for (int j = y0; j <= y1; ++j) {
        for (int o : scene.grid[i * ParkingScene::kGridCells + j]) {
          const ConvexPolygon& obs = scene.obstacles[o];
          if (!obs.bounds().overlaps(qb)) continue;
          if (obs.is_box()) {
            if (intersects(box, obs.bounds())) return false;
          } else {
            const Quad q = oriented_rect(origin, theta, body.front + margin,
                                         body.rear + margin,
                                         body.width + 2 * margin);
            if (intersects(q.v, obs.vertices())) return false;
          }
        }
      }
    }
  }
  return true;
}

bool is_safe(const State& x, const ParkingScene& scene, const SystemSpec& spec,
             double margin) {
  return is_safe(as_span(x), scene, spec, margin);
}

double goal_proximity(std::span<const double> x, const State& goal) {
  const double dist = std::hypot(x[0] - goal[0], x[1] - goal[1]);
  const double dtheta = std::abs(wrap_angle(x[2] - goal[2]));
  return std::exp(-dist / 4.0) * std::exp(-dtheta / 1.0);
}

double reward(const StateTrajectory& X, const ParkingScene& scene) {
  const Eigen::Index horizon = X.rows() - 1;
  if (horizon < 1 || X.cols() != scene.goal_pose.size()) {
    throw DimensionError("reward: trajectory dims do not match scene");
  }
  const auto nx = static_cast<std::size_t>(X.cols());
  double running = 0.0;
  for (Eigen::Index t = 1; t <= horizon; ++t) {
    running += goal_proximity({X.row(t).data(), nx}, scene.goal_pose);
  }
  running /= static_cast<double>(horizon);
  const double terminal =
      goal_proximity({X.row(horizon).data(), nx}, scene.goal_pose);
  return kRewardScale * (kRunningWeight * running + kTerminalWeight * terminal);
}

State sample_initial_state(const ParkingScene& scene, const SystemSpec& spec,
                           RngStream& rng, double margin) {
  constexpr int kMaxDraws = 10000;
  State x = State::Zero(spec.n_x);
  for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
    x[0] = scene.lot.lo.x() + rng.uniform() * (scene.lot.hi.x() - scene.lot.lo.x());
    x[1] = scene.lot.lo.y() + rng.uniform() * (scene.lot.hi.y() - scene.lot.lo.y());
    const double heading = wrap_angle(std::numbers::pi * (1.0 - 2.0 * rng.uniform()));
    for (int c = 2; c <= 2 + spec.n_trailers(); ++c) x[c] = heading;
    if (is_safe(x, scene, spec, margin)) return x;
  }
  throw NumericError("no free space");
}

GoalMode parse_goal_mode(std::string_view name) {
  if (name == "designated") return GoalMode::kDesignated;
  if (name == "uniform") return GoalMode::kUniform;
  throw ConfigError("unknown goal mode: " + std::string(name));
}

std::string_view to_string(GoalMode mode) {
  return mode == GoalMode::kDesignated ? "designated" : "uniform";
}

HeadingMode parse_heading_mode(std::string_view name) {
  if (name == "uniform") return HeadingMode::kUniform;
  if (name == "fixed") return HeadingMode::kFixed;
  throw ConfigError("unknown heading mode: " + std::string(name));
}

std::string_view to_string(HeadingMode mode) {
  return mode == HeadingMode::kUniform ? "uniform" : "fixed";
}

nlohmann::json to_json(const ScenarioConfig& c) {
  return {{"goal_mode", std::string(to_string(c.goal_mode))},
          {"designated_goal", c.designated_goal},
          {"start_region",
           {c.start_region.lo.x(), c.start_region.lo.y(), c.start_region.hi.x(),
            c.start_region.hi.y()}},
          {"heading_mode", std::string(to_string(c.heading_mode))},
          {"fixed_heading", c.fixed_heading},
          {"heading_jitter", c.heading_jitter},
          {"margin", c.margin}};
}

PlanningProblem sample_problem(const SystemSpec& spec,
                               const ScenarioConfig& cfg,
                               const RngStream& rng) {
  PlanningProblem p;
  if (cfg.goal_mode == GoalMode::kDesignated) {
    p.goal_space_index = cfg.designated_goal;
  } else {
    RngStream goal_rng = rng.derive(purpose(StreamPurpose::kGoal));
    p.goal_space_index = static_cast<int>(goal_rng.uniform() * lot::kSpaces);
  }
  p.scene = build_scene(p.goal_space_index, all_but(p.goal_space_index), spec);

  RngStream init = rng.derive(purpose(StreamPurpose::kInitialState));
  const Vec2 lo = cfg.start_region.lo.cwiseMax(p.scene.lot.lo);
  const Vec2 hi = cfg.start_region.hi.cwiseMin(p.scene.lot.hi);
  constexpr int kMaxDraws = 10000;
  p.x0 = State::Zero(spec.n_x);
  for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
    p.x0[0] = lo.x() + init.uniform() * (hi.x() - lo.x());
    p.x0[1] = lo.y() + init.uniform() * (hi.y() - lo.y());
    const double u = init.uniform();
    const double heading =
        cfg.heading_mode == HeadingMode::kUniform
            ? std::numbers::pi * (1.0 - 2.0 * u)
            : wrap_angle(cfg.fixed_heading + cfg.heading_jitter * (2.0 * u - 1.0));
    for (int c = 2; c <= 2 + spec.n_trailers(); ++c) p.x0[c] = heading;
    if (is_safe(p.x0, p.scene, spec, cfg.margin)) return p;
  }
  throw NumericError("no free space");
}

}  // namespace bsd
