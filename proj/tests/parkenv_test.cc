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

#include <gtest/gtest.h>

namespace bsd {
namespace {

constexpr double kPi = std::numbers::pi;

State pose(double x, double y, double th, int n_x = 3) {
  State s = State::Zero(n_x);
  s[0] = x;
  s[1] = y;
  for (int c = 2; c < std::min(n_x, 5); ++c) s[c] = th;
  return s;
}

TEST(BuildScene, EmptyLotHasOnlyWalls) {
  const ParkingScene scene = build_scene(0, 0, make_system(SystemId::kBicycle));
  EXPECT_EQ(scene.wall_count, 4);
  EXPECT_EQ(scene.obstacles.size(), 4u);
  EXPECT_EQ(scene.spaces.size(), 16u);
}

TEST(BuildScene, AllOtherSpacesOccupied) {
  const ParkingScene scene =
      build_scene(7, all_but(7), make_system(SystemId::kBicycle));
  EXPECT_EQ(scene.obstacles.size(), 4u + 15u);
  EXPECT_EQ(all_but(7) & (1u << 7), 0u);
}

TEST(BuildScene, GoalPoseAtSpaceCenter) {
  const ParkingScene scene = build_scene(3, 0, make_system(SystemId::kTT2D));
  // Column 3 of the bottom row: x in [13, 16], y in [4, 10].
  EXPECT_DOUBLE_EQ(scene.goal_pose[0], 14.5);
  EXPECT_DOUBLE_EQ(scene.goal_pose[1], 7.0);
  EXPECT_DOUBLE_EQ(scene.goal_pose[2], -kPi / 2);
  EXPECT_DOUBLE_EQ(scene.goal_pose[3], -kPi / 2);
  const ParkingScene top = build_scene(11, 0, make_system(SystemId::kAccTT2D));
  EXPECT_DOUBLE_EQ(top.goal_pose[0], 14.5);
  EXPECT_DOUBLE_EQ(top.goal_pose[1], 25.0);
  EXPECT_DOUBLE_EQ(top.goal_pose[2], kPi / 2);
  EXPECT_EQ(top.goal_pose[4], 0.0);
  EXPECT_EQ(top.goal_pose[5], 0.0);
}

TEST(BuildScene, SpacesDisjointAndInsideLot) {
  const ParkingScene scene = build_scene(0, 0, make_system(SystemId::kBicycle));
  for (std::size_t i = 0; i < scene.spaces.size(); ++i) {
    EXPECT_TRUE(scene.lot.contains(scene.spaces[i].box));
    for (std::size_t j = i + 1; j < scene.spaces.size(); ++j) {
      const Aabb& a = scene.spaces[i].box;
      const Aabb& b = scene.spaces[j].box;
      const double ox = std::min(a.hi.x(), b.hi.x()) - std::max(a.lo.x(), b.lo.x());
      const double oy = std::min(a.hi.y(), b.hi.y()) - std::max(a.lo.y(), b.lo.y());
      EXPECT_FALSE(ox > 0 && oy > 0) << i << " " << j;
    }
  }
}

TEST(BuildScene, Errors) {
  const SystemSpec s = make_system(SystemId::kBicycle);
  EXPECT_THROW(build_scene(2, 1u << 2, s), ConfigError);
  EXPECT_THROW(build_scene(16, 0, s), ConfigError);
  EXPECT_THROW(build_scene(-1, 0, s), ConfigError);
}

TEST(BuildScene, IsPure) {
  const SystemSpec s = make_system(SystemId::kNTrailer);
  EXPECT_EQ(to_json(build_scene(5, all_but(5), s)),
            to_json(build_scene(5, all_but(5), s)));
}

TEST(Footprints, AxisAlignedAtOrigin) {
  const SystemSpec s = make_system(SystemId::kBicycle);
  const std::vector<Quad> f = footprints(pose(0, 0, 0), s);
  ASSERT_EQ(f.size(), 1u);
  const Aabb b = f[0].bounds();
  EXPECT_DOUBLE_EQ(b.lo.x(), -0.8);
  EXPECT_DOUBLE_EQ(b.hi.x(), 3.0);
  EXPECT_DOUBLE_EQ(b.lo.y(), -0.9);
  EXPECT_DOUBLE_EQ(b.hi.y(), 0.9);
}

TEST(Footprints, QuarterTurnRotatesVertices) {
  const SystemSpec s = make_system(SystemId::kBicycle);
  const Quad a = footprints(pose(0, 0, 0), s)[0];
  const Quad b = footprints(pose(0, 0, kPi / 2), s)[0];
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(b.v[k].x(), -a.v[k].y(), 1e-12);
    EXPECT_NEAR(b.v[k].y(), a.v[k].x(), 1e-12);
  }
}

TEST(Footprints, TrailerBehindTractorAtHitchDistance) {
  const SystemSpec s = make_system(SystemId::kTT2D);
  const std::vector<Quad> f = footprints(pose(10, 5, 0, 4), s);
  ASSERT_EQ(f.size(), 2u);
  const Aabb t = f[1].bounds();
  const double axle = 10.0 - s.hitch_d1;
  EXPECT_NEAR(t.lo.x(), axle - s.geometry.bodies[1].rear, 1e-12);
  EXPECT_NEAR(t.hi.x(), axle + s.geometry.bodies[1].front, 1e-12);
  EXPECT_NEAR(0.5 * (t.lo.y() + t.hi.y()), 5.0, 1e-12);
}

TEST(Footprints, RigidTransformEquivariance) {
  const SystemSpec s = make_system(SystemId::kNTrailer);
  RngStream rng(21, 0);
  for (int rep = 0; rep < 100; ++rep) {
    State x(5);
    x << 30 * rng.uniform(), 30 * rng.uniform(), kPi * (2 * rng.uniform() - 1),
        kPi * (2 * rng.uniform() - 1), kPi * (2 * rng.uniform() - 1);
    const double phi = kPi * (2 * rng.uniform() - 1);
    const Vec2 shift(5 * rng.normal(), 5 * rng.normal());
    const Eigen::Rotation2Dd rot(phi);
    State y = x;
    const Vec2 p = rot * Vec2(x[0], x[1]) + shift;
    y[0] = p.x();
    y[1] = p.y();
    for (int c = 2; c < 5; ++c) y[c] = x[c] + phi;
    const std::vector<Quad> fx = footprints(x, s);
    const std::vector<Quad> fy = footprints(y, s);
    for (std::size_t b = 0; b < fx.size(); ++b) {
      for (int k = 0; k < 4; ++k) {
        const Vec2 expected = rot * fx[b].v[k] + shift;
        ASSERT_NEAR((fy[b].v[k] - expected).norm(), 0.0, 1e-9);
      }
    }
  }
}

TEST(IsSafe, LotCenterOfEmptyLot) {
  for (SystemId id : {SystemId::kBicycle, SystemId::kTT2D, SystemId::kNTrailer,
                      SystemId::kAccTT2D}) {
    const SystemSpec s = make_system(id);
    const ParkingScene scene = build_scene(0, 0, s);
    EXPECT_TRUE(is_safe(pose(19, 16, 0, s.n_x), scene, s)) << to_string(id);
  }
}

TEST(IsSafe, CenteredOnOccupiedSpace) {
  const SystemSpec s = make_system(SystemId::kBicycle);
  const ParkingScene scene = build_scene(0, all_but(0), s);
  const Vec2 c = scene.spaces[4].center;
  EXPECT_FALSE(is_safe(pose(c.x(), c.y(), -kPi / 2), scene, s));
  const Vec2 g = scene.spaces[0].center;
  EXPECT_TRUE(is_safe(pose(g.x(), g.y() + 1.0, -kPi / 2), scene, s));
}

TEST(IsSafe, MarginBoundaryAgainstObstacleEdge) {
  const SystemSpec s = make_system(SystemId::kBicycle);
  const ParkingScene scene = build_scene(0, all_but(0), s);
  const double margin = 0.1;
  const double half_width = 0.5 * s.geometry.bodies[0].width;
  // Heading along +x in the aisle; body's lower side faces the top edge
  // (y = 10) of the bottom-row spaces.
  const double edge = scene.spaces[3].box.hi.y();
  const double touching = edge + half_width + margin;
  const double eps = 1e-6;
  EXPECT_FALSE(is_safe(pose(14.5, touching - eps, 0), scene, s, margin));
  EXPECT_TRUE(is_safe(pose(14.5, touching + eps, 0), scene, s, margin));
  // Same against the bottom wall of an empty lot.
  const ParkingScene empty = build_scene(0, 0, s);
  const double wall = lot::kWallThickness + half_width + margin;
  EXPECT_FALSE(is_safe(pose(16, wall - eps, 0), empty, s, margin));
  EXPECT_TRUE(is_safe(pose(16, wall + eps, 0), empty, s, margin));
}

TEST(IsSafe, RotatedBodyAgainstEdge) {
  const SystemSpec s = make_system(SystemId::kBicycle);
  const ParkingScene scene = build_scene(0, 0, s);
  // 45 degrees: the lowest corner is the rear-right one.
  const double th = kPi / 4;
  const double hw = 0.9 + 0.1, rear = 0.8 + 0.1;
  const double drop = rear * std::sin(th) + hw * std::cos(th);
  const double y = lot::kWallThickness + drop;
  EXPECT_FALSE(is_safe(pose(16, y - 1e-6, th), scene, s));
  EXPECT_TRUE(is_safe(pose(16, y + 1e-6, th), scene, s));
}

TEST(IsSafe, HitchLimit) {
  const SystemSpec s = make_system(SystemId::kTT2D);
  const ParkingScene scene = build_scene(0, 0, s);
  State x = pose(19, 16, 0, 4);
  x[3] = 1.1;
  EXPECT_TRUE(is_safe(x, scene, s));
  x[3] = 1.3;
  EXPECT_FALSE(is_safe(x, scene, s));
}

TEST(IsSafe, MonotoneInMargin) {
  const SystemSpec s = make_system(SystemId::kNTrailer);
  const ParkingScene scene = build_scene(2, all_but(2), s);
  RngStream rng(22, 0);
  int checked = 0;
  for (int rep = 0; rep < 3000; ++rep) {
    State x(5);
    const double th = kPi * (2 * rng.uniform() - 1);
    x << 32 * rng.uniform(), 32 * rng.uniform(), th, th + 0.5 * rng.normal(),
        th + 0.5 * rng.normal();
    const double m = 0.5 * rng.uniform();
    if (!is_safe(x, scene, s, m)) continue;
    ++checked;
    ASSERT_TRUE(is_safe(x, scene, s, m * rng.uniform()));
    ASSERT_TRUE(is_safe(x, scene, s, 0.0));
  }
  EXPECT_GT(checked, 50);
}

TEST(Reward, MaximumAtGoal) {
  const SystemSpec s = make_system(SystemId::kTT2D);
  const ParkingScene scene = build_scene(9, all_but(9), s);
  StateTrajectory X(s.horizon + 1, s.n_x);
  for (Eigen::Index t = 0; t < X.rows(); ++t) X.row(t) = scene.goal_pose.transpose();
  EXPECT_DOUBLE_EQ(reward(X, scene), 6.0);
}

TEST(Reward, ClosedFormAtFourMetres) {
  const SystemSpec s = make_system(SystemId::kBicycle);
  const ParkingScene scene = build_scene(9, all_but(9), s);
  StateTrajectory X(s.horizon + 1, s.n_x);
  State x = scene.goal_pose;
  x[0] += 4.0;
  for (Eigen::Index t = 0; t < X.rows(); ++t) X.row(t) = x.transpose();
  EXPECT_NEAR(reward(X, scene), 6.0 * std::exp(-1.0), 1e-12);
}

TEST(Reward, DecreasesWithTerminalDistance) {
  const SystemSpec s = make_system(SystemId::kBicycle);
  const ParkingScene scene = build_scene(1, all_but(1), s);
  StateTrajectory X(s.horizon + 1, s.n_x);
  for (Eigen::Index t = 0; t < X.rows(); ++t) X.row(t) = scene.goal_pose.transpose();
  double prev = reward(X, scene);
  for (double d = 0.5; d < 20.0; d += 0.5) {
    X(s.horizon, 1) = scene.goal_pose[1] + d;
    const double r = reward(X, scene);
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(Reward, RangeProperty) {
  const SystemSpec s = make_system(SystemId::kAccTT2D);
  const ParkingScene scene = build_scene(12, all_but(12), s);
  RngStream rng(23, 0);
  for (int rep = 0; rep < 200; ++rep) {
    StateTrajectory X = draw_gaussian(s.horizon + 1, s.n_x, rng);
    X.col(0) = (X.col(0).array() * 10 + 16).matrix();
    X.col(1) = (X.col(1).array() * 10 + 16).matrix();
    const double r = reward(X, scene);
    ASSERT_GT(r, 0.0);
    ASSERT_LT(r, 6.0);
  }
}

TEST(SampleInitialState, SafeDeterministicAndSpread) {
  const SystemSpec s = make_system(SystemId::kTT2D);
  const ParkingScene scene = build_scene(4, all_but(4), s);
  const RngStream root(31, 0);
  Vec2 lo(1e9, 1e9), hi(-1e9, -1e9);
  for (int i = 0; i < 1000; ++i) {
    RngStream a = root.derive(i), b = root.derive(i);
    const State x = sample_initial_state(scene, s, a);
    ASSERT_EQ(x, sample_initial_state(scene, s, b));
    ASSERT_TRUE(is_safe(x, scene, s));
    ASSERT_EQ(x[2], x[3]);
    lo = lo.cwiseMin(Vec2(x[0], x[1]));
    hi = hi.cwiseMax(Vec2(x[0], x[1]));
  }
  // Free area lies inside the walls.
  const double free_side = lot::kSize - 2 * lot::kWallThickness;
  EXPECT_GE((hi - lo).prod(), 0.5 * free_side * free_side);
}

TEST(SampleProblem, UniformGoalAndDesignatedGoal) {
  const SystemSpec s = make_system(SystemId::kBicycle);
  ScenarioConfig cfg;
  std::vector<int> counts(lot::kSpaces, 0);
  for (int i = 0; i < 320; ++i) {
    const PlanningProblem p = sample_problem(s, cfg, RngStream(5, 0).derive(i));
    ++counts[p.goal_space_index];
    ASSERT_TRUE(is_safe(p.x0, p.scene, s));
    ASSERT_EQ(p.scene.obstacles.size(), 19u);
  }
  for (int c : counts) EXPECT_GT(c, 5);
  cfg.goal_mode = GoalMode::kDesignated;
  cfg.designated_goal = 6;
  EXPECT_EQ(sample_problem(s, cfg, RngStream(5, 0)).goal_space_index, 6);
}

TEST(SampleProblem, StartRegionAndFixedHeading) {
  const SystemSpec s = make_system(SystemId::kBicycle);
  ScenarioConfig cfg;
  cfg.start_region = {Vec2(10, 14), Vec2(20, 18)};
  cfg.heading_mode = HeadingMode::kFixed;
  cfg.fixed_heading = 0.5;
  cfg.heading_jitter = 0.1;
  for (int i = 0; i < 50; ++i) {
    const PlanningProblem p = sample_problem(s, cfg, RngStream(6, 0).derive(i));
    EXPECT_GE(p.x0[0], 10);
    EXPECT_LE(p.x0[0], 20);
    EXPECT_GE(p.x0[1], 14);
    EXPECT_LE(p.x0[1], 18);
    EXPECT_NEAR(p.x0[2], 0.5, 0.1 + 1e-12);
  }
}

TEST(ScenarioNames, RoundTrip) {
  for (GoalMode m : {GoalMode::kDesignated, GoalMode::kUniform}) {
    EXPECT_EQ(parse_goal_mode(to_string(m)), m);
  }
  for (HeadingMode m : {HeadingMode::kUniform, HeadingMode::kFixed}) {
    EXPECT_EQ(parse_heading_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_goal_mode("random"), ConfigError);
}

}  // namespace
}  // namespace bsd
