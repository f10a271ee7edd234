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

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bsd/types.h"
#include "json.hpp"

namespace bsd {

enum class SystemId { kBicycle, kTT2D, kNTrailer, kAccTT2D };

std::string_view to_string(SystemId id);
SystemId parse_system_id(std::string_view name);

// One rigid body of the vehicle, posed at its reference point (rear axle for
// the tractor, axle for each trailer). The body extends `front` metres ahead
// of the reference point and `rear` metres behind it.
struct BodyShape {
  double front = 0.0;
  double rear = 0.0;
  double width = 0.0;

  bool operator==(const BodyShape&) const = default;
};

struct VehicleGeometry {
  std::vector<BodyShape> bodies;  // tractor first, then trailers in order

  bool operator==(const VehicleGeometry&) const = default;
};

struct SystemSpec {
  SystemId id = SystemId::kBicycle;
  int n_x = 3;
  int n_u = 2;
  double dt = 0.1;
  int horizon = 50;
  std::vector<double> control_min;
  std::vector<double> control_max;
  double wheelbase = 2.5;
  double hitch_d1 = 3.0;
  double hitch_d2 = 3.0;
  double hitch_limit = 1.2;
  double v_max = 3.0;
  double a_max = 2.0;
  VehicleGeometry geometry;

  int n_trailers() const;
  // Headings and hitch angles are wrapped to (-pi, pi].
  bool is_angle_channel(int channel) const;
  // Index of the velocity channel, or -1 when velocity is a control.
  int velocity_channel() const;

  bool operator==(const SystemSpec&) const = default;
};

// Spec with the default parameters for each benchmark system.
SystemSpec make_system(SystemId id);

void validate(const SystemSpec& spec);

nlohmann::json to_json(const SystemSpec& spec);
SystemSpec system_from_json(const nlohmann::json& j);

double wrap_angle(double a);  // into (-pi, pi]

// Instrumentation for the model-free guarantee. Every call to a dynamics
// entry point bumps a process-wide counter; a thread that holds a
// DynamicsPoison guard gets NumericError instead of a result.
std::uint64_t dynamics_call_count();
// Calls made from the current thread only.
std::uint64_t thread_dynamics_call_count();

class DynamicsPoison {
 public:
  DynamicsPoison();
  ~DynamicsPoison();
  DynamicsPoison(const DynamicsPoison&) = delete;
  DynamicsPoison& operator=(const DynamicsPoison&) = delete;

 private:
  bool previous_;
};

// Explicit Euler step of the kinematic model. Controls are clamped to the
// bounds first; `out` may alias neither input.
void step_into(const SystemSpec& spec, std::span<const double> x,
               std::span<const double> u, std::span<double> out);

State step(const SystemSpec& spec, const State& x, const Eigen::VectorXd& u);

// Clamps every row of `controls` into the control bounds in place.
void clamp_controls(const SystemSpec& spec, ControlSequence& controls);

StateTrajectory rollout(const SystemSpec& spec, const State& x0,
                        const ControlSequence& controls);

}  // namespace bsd
