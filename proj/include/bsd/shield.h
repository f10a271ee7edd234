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

#include "bsd/dynamics.h"
#include "bsd/parkenv.h"
#include "bsd/types.h"

namespace bsd {

struct ShieldedTrajectory {
  StateTrajectory states;
  int interventions = 0;  // rows replaced by their predecessor
};

// Post-hoc shield: every row that is unsafe is replaced by the previous
// (already shielded) row. Row 0 must be safe.
ShieldedTrajectory shield_states(const StateTrajectory& X,
                                 const ParkingScene& scene,
                                 const SystemSpec& spec,
                                 double margin = lot::kDefaultMargin);

// Interleaved shield: integrates from the last accepted state, so dynamics
// continue from the reverted state. Writes into `out` (resized as needed)
// and returns the number of reverted steps.
int shielded_rollout_into(const SystemSpec& spec, const State& x0,
                          const ControlSequence& controls,
                          const ParkingScene& scene, StateTrajectory& out,
                          double margin = lot::kDefaultMargin);

ShieldedTrajectory shielded_rollout(const SystemSpec& spec, const State& x0,
                                    const ControlSequence& controls,
                                    const ParkingScene& scene,
                                    double margin = lot::kDefaultMargin);

}  // namespace bsd
