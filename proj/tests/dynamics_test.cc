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


#include "bsd/dynamics.h"

#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "bsd/rng.h"

namespace bsd {
namespace {

constexpr SystemId kAll[] = {SystemId::kBicycle, SystemId::kTT2D,
                             SystemId::kNTrailer, SystemId::kAccTT2D};

Eigen::VectorXd control(double a, double b) {
  Eigen::VectorXd u(2);
  u << a, b;
  return u;
}

TEST(Dynamics, DimensionsPerSystem) {
  EXPECT_EQ(make_system(SystemId::kBicycle).n_x, 3);
  EXPECT_EQ(make_system(SystemId::kTT2D).n_x, 4);
  EXPECT_EQ(make_system(SystemId::kNTrailer).n_x, 5);
  EXPECT_EQ(make_system(SystemId::kAccTT2D).n_x, 6);
  for (SystemId id : kAll) {
    const SystemSpec s = make_system(id);
    EXPECT_NO_THROW(validate(s));
    EXPECT_EQ(static_cast<int>(s.geometry.bodies.size()), 1 + s.n_trailers());
    EXPECT_EQ(parse_system_id(to_string(id)), id);
  }
  EXPECT_THROW(parse_system_id("Unicycle"), ConfigError);
}

TEST(Dynamics, BicycleZeroVelocityIsFixedPoint) {
  const SystemSpec s = make_system(SystemId::kBicycle);
  State x(3);
  x << 3.0, -2.0, 0.7;
  EXPECT_EQ(step(s, x, control(0.0, 0.4)), x);
}

TEST(Dynamics, BicycleStraightLine) {
  const SystemSpec s = make_system(SystemId::kBicycle);
  const State x = State::Zero(3);
  const State y = step(s, x, control(1.0, 0.0));
  EXPECT_DOUBLE_EQ(y[0], 0.1);
  EXPECT_EQ(y[1], 0.0);
  EXPECT_EQ(y[2], 0.0);
}

TEST(Dynamics, BicycleHeadingMatchesFineIntegrator) {
  const SystemSpec s = make_system(SystemId::kBicycle);
  State x = State::Zero(3);
  for (int t = 0; t < 100; ++t) x = step(s, x, control(1.0, 0.3));
  // Independent fine-step integration of the continuous model, heading
  // unwrapped.
  double th = 0.0;
  const double h = 0.1 / 1000.0;
  for (int t = 0; t < 100 * 1000; ++t) th += h * 1.0 / 2.5 * std::tan(0.3);
  EXPECT_NEAR(x[2], wrap_angle(th), 1e-3);
}

TEST(Dynamics, ControlsAreClamped) {
  const SystemSpec s = make_system(SystemId::kBicycle);
  const State x = State::Zero(3);
  EXPECT_EQ(step(s, x, control(100.0, 5.0)), step(s, x, control(3.0, 0.6)));
  ControlSequence u(2, 2);
  u << 10, -10, -10, 0.1;
  clamp_controls(s, u);
  EXPECT_EQ(u(0, 0), 3.0);
  EXPECT_EQ(u(0, 1), -0.6);
  EXPECT_EQ(u(1, 0), -3.0);
  EXPECT_EQ(u(1, 1), 0.1);
}

TEST(Dynamics, NonFiniteInputIsNumericError) {
  const SystemSpec s = make_system(SystemId::kTT2D);
  State x = State::Zero(4);
  x[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(step(s, x, control(1.0, 0.0)), NumericError);
  EXPECT_THROW(step(s, State::Zero(4), control(INFINITY, 0.0)), NumericError);
  EXPECT_THROW(step(s, State::Zero(3), control(1.0, 0.0)), DimensionError);
}

TEST(Rollout, ZeroControlsKeepBicycleStill) {
  const SystemSpec s = make_system(SystemId::kBicycle);
  State x0(3);
  x0 << 10.0, 12.0, -1.0;
  const StateTrajectory X = rollout(s, x0, ControlSequence::Zero(s.horizon, 2));
  ASSERT_EQ(X.rows(), s.horizon + 1);
  for (Eigen::Index t = 0; t < X.rows(); ++t) {
    EXPECT_EQ(State(X.row(t).transpose()), x0);
  }
}

TEST(Rollout, SingleStep) {
  const SystemSpec s = make_system(SystemId::kNTrailer);
  State x0 = State::Zero(5);
  x0[2] = 0.3;
  ControlSequence u(1, 2);
  u << 2.0, 0.2;
  const StateTrajectory X = rollout(s, x0, u);
  ASSERT_EQ(X.rows(), 2);
  EXPECT_EQ(State(X.row(0).transpose()), x0);
  EXPECT_EQ(State(X.row(1).transpose()), step(s, x0, control(2.0, 0.2)));
}

TEST(Rollout, AlignedTrailersStayAligned) {
  for (SystemId id : {SystemId::kTT2D, SystemId::kNTrailer}) {
    const SystemSpec s = make_system(id);
    ControlSequence u(s.horizon, 2);
    u.col(0).setConstant(2.0);
    u.col(1).setZero();
    const StateTrajectory X = rollout(s, State::Zero(s.n_x), u);
    for (Eigen::Index t = 0; t < X.rows(); ++t) {
      EXPECT_LT(std::abs(X(t, 2) - X(t, 3)), 1e-10);
      if (id == SystemId::kNTrailer) EXPECT_LT(std::abs(X(t, 3) - X(t, 4)), 1e-10);
    }
  }
}

TEST(Rollout, AccTT2DVelocityIntegratesAcceleration) {
  const SystemSpec s = make_system(SystemId::kAccTT2D);
  RngStream rng(3, 0);
  ControlSequence u(s.horizon, 2);
  for (Eigen::Index t = 0; t < u.rows(); ++t) {
    u(t, 0) = 0.5 * (2.0 * rng.uniform() - 1.0);
    u(t, 1) = 0.6 * (2.0 * rng.uniform() - 1.0);
  }
  const StateTrajectory X = rollout(s, State::Zero(6), u);
  for (Eigen::Index t = 0; t < u.rows(); ++t) {
    EXPECT_NEAR(X(t + 1, 4) - X(t, 4), u(t, 0) * s.dt, 1e-12);
    EXPECT_EQ(X(t + 1, 5), u(t, 0));
  }
}

TEST(Rollout, AnglesStayWrappedAndRolloutIsDeterministic) {
  RngStream rng(4, 0);
  for (SystemId id : kAll) {
    const SystemSpec s = make_system(id);
    for (int rep = 0; rep < 50; ++rep) {
      const ControlSequence u = 3.0 * draw_gaussian(s.horizon, 2, rng);
      State x0 = State::Zero(s.n_x);
      for (int c = 2; c <= 2 + s.n_trailers(); ++c) {
        x0[c] = std::numbers::pi * (1.0 - 2.0 * rng.uniform());
      }
      const StateTrajectory X = rollout(s, x0, u);
      ASSERT_EQ(X.rows(), s.horizon + 1);
      ASSERT_EQ(X.cols(), s.n_x);
      ASSERT_EQ(X, rollout(s, x0, u));
      for (Eigen::Index t = 0; t < X.rows(); ++t) {
        for (int c = 0; c < s.n_x; ++c) {
          if (!s.is_angle_channel(c)) continue;
          ASSERT_GT(X(t, c), -std::numbers::pi);
          ASSERT_LE(X(t, c), std::numbers::pi);
        }
      }
    }
  }
}

TEST(WrapAngle, Range) {
  EXPECT_DOUBLE_EQ(wrap_angle(std::numbers::pi), std::numbers::pi);
  EXPECT_DOUBLE_EQ(wrap_angle(-std::numbers::pi), std::numbers::pi);
  EXPECT_NEAR(wrap_angle(3.0 * std::numbers::pi / 2.0), -std::numbers::pi / 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(wrap_angle(0.5), 0.5);
}

TEST(SystemSpecJson, RoundTrip) {
  for (SystemId id : kAll) {
    const SystemSpec s = make_system(id);
    EXPECT_EQ(system_from_json(to_json(s)), s);
  }
}

TEST(DynamicsInstrumentation, CountsAndPoison) {
  const SystemSpec s = make_system(SystemId::kBicycle);
  const std::uint64_t before = thread_dynamics_call_count();
  const std::uint64_t global_before = dynamics_call_count();
  step(s, State::Zero(3), control(1.0, 0.0));
  EXPECT_EQ(thread_dynamics_call_count(), before + 1);
  EXPECT_GE(dynamics_call_count(), global_before + 1);
  {
    DynamicsPoison guard;
    EXPECT_THROW(step(s, State::Zero(3), control(1.0, 0.0)), NumericError);
  }
  EXPECT_NO_THROW(step(s, State::Zero(3), control(1.0, 0.0)));
}

}  // namespace
}  // namespace bsd
