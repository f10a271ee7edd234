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

#include "bsd/shield.h"

namespace bsd {
namespace {

std::span<const double> row_span(const StateTrajectory& X, Eigen::Index t) {
  return {X.row(t).data(), static_cast<std::size_t>(X.cols())};
}

}  // namespace

ShieldedTrajectory shield_states(const StateTrajectory& X,
                                 const ParkingScene& scene,
                                 const SystemSpec& spec, double margin) {
  if (X.cols() != spec.n_x || X.rows() < 1) {
    throw DimensionError("shield_states: trajectory dims do not match system");
  }
  if (!is_safe(row_span(X, 0), scene, spec, margin)) {
    throw PreconditionError("shield_states: initial state is not safe");
  }
  ShieldedTrajectory out{X, 0};
  for (Eigen::Index t = 1; t < X.rows(); ++t) {
    if (!is_safe(row_span(X, t), scene, spec, margin)) {
      out.states.row(t) = out.states.row(t - 1);
      ++out.interventions;
    }
  }
  return out;
}

int shielded_rollout_into(const SystemSpec& spec, const State& x0,
                          const ControlSequence& controls,
                          const ParkingScene& scene, StateTrajectory& out,
                          double margin) {
  if (x0.size() != spec.n_x || controls.cols() != spec.n_u) {
    throw DimensionError("shielded_rollout: dimension mismatch");
  }
  const auto nx = static_cast<std::size_t>(spec.n_x);
  const auto nu = static_cast<std::size_t>(spec.n_u);
  if (!is_safe(as_span(x0), scene, spec, margin)) {
    throw PreconditionError("shielded_rollout: initial state is not safe");
  }
  out.resize(controls.rows() + 1, spec.n_x);
  out.row(0) = x0.transpose();
  int interventions = 0;
  for (Eigen::Index t = 0; t < controls.rows(); ++t) {
    std::span<double> next{out.row(t + 1).data(), nx};
    step_into(spec, {out.row(t).data(), nx}, {controls.row(t).data(), nu},
              next);
    if (!is_safe(next, scene, spec, margin)) {
      out.row(t + 1) = out.row(t);
      ++interventions;
    }
  }
  return interventions;
}

ShieldedTrajectory shielded_rollout(const SystemSpec& spec, const State& x0,
                                    const ControlSequence& controls,
                                    const ParkingScene& scene, double margin) {
  ShieldedTrajectory out;
  out.interventions =
      shielded_rollout_into(spec, x0, controls, scene, out.states, margin);
  return out;
}

}  // namespace bsd
