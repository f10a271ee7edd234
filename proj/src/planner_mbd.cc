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

#include "bsd/planner_mbd.h"

#include <algorithm>
#include <chrono>

#include "bsd/parallel.h"
#include "bsd/shield.h"

namespace bsd {

nlohmann::json to_json(const PlanResult& r) {
  auto matrix = [](const RowMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      rows.push_back(std::vector<double>(m.row(i).data(),
                                         m.row(i).data() + m.cols()));
    }
    return rows;
  };
  return {{"controls", matrix(r.controls)},
          {"states", matrix(r.states)},
          {"reward", r.reward},
          {"interventions", r.interventions},
          {"safe", r.safe()},
          {"wall_time_ms", r.wall_time_ms},
          {"reward_trace", r.reward_trace}};
}

void validate(const MbdConfig& cfg) {
  if (cfg.num_candidates < 1) throw ParameterError("MBD needs K >= 1");
  if (!(cfg.temperature > 0.0)) throw ParameterError("MBD needs tau > 0");
  if (!(cfg.candidate_scale >= 0.0)) {
    throw ParameterError("MBD candidate_scale must be >= 0");
  }
  if (!(cfg.margin >= 0.0)) throw ParameterError("margin must be >= 0");
  (void)cfg.schedule();
}

MbdStepResult mbd_denoise_step(const ControlSequence& current, const State& x0,
                               const ParkingScene& scene,
                               const SystemSpec& spec, const MbdConfig& cfg,
                               double sigma, const RngStream& rng) {
  const Eigen::Index horizon = current.rows();
  const Eigen::Index width = horizon * spec.n_u;
  const auto K = static_cast<std::size_t>(cfg.num_candidates);
  RowMatrix candidates(static_cast<Eigen::Index>(K), width);
  std::vector<double> rewards(K);
  const double scale = cfg.candidate_scale * sigma;

  parallel_for(K, cfg.threads, [&](std::size_t k) {
    RngStream stream = rng.derive(k);
    Eigen::Map<ControlSequence> cand(
        candidates.row(static_cast<Eigen::Index>(k)).data(), horizon, spec.n_u);
    for (Eigen::Index t = 0; t < horizon; ++t) {
      for (int c = 0; c < spec.n_u; ++c) {
        cand(t, c) = std::clamp(current(t, c) + scale * stream.normal(),
                                spec.control_min[c], spec.control_max[c]);
      }
    }
    StateTrajectory states;
    shielded_rollout_into(spec, x0, cand, scene, states, cfg.margin);
    rewards[k] = reward(states, scene);
  });

  const WeightVector w = select_weights(rewards, cfg.temperature, cfg.reward_scaling);
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(width);
  for (std::size_t k = 0; k < K; ++k) {
    if (w[k] > 0.0) {
      mean += w[k] * candidates.row(static_cast<Eigen::Index>(k));
    }
  }
  MbdStepResult out;
  out.mean = Eigen::Map<ControlSequence>(mean.data(), horizon, spec.n_u);
  out.best_reward = *std::max_element(rewards.begin(), rewards.end());
  return out;
}

PlanResult mbd_plan(const State& x0, const ParkingScene& scene,
                    const SystemSpec& spec, const MbdConfig& cfg,
                    const RngStream& rng) {
  const auto start = std::chrono::steady_clock::now();
  validate(cfg);
  if (!is_safe(x0, scene, spec, cfg.margin)) {
    throw PreconditionError("mbd_plan: initial state is not safe");
  }
  const NoiseSchedule schedule = cfg.schedule();
  RngStream init = rng.derive(purpose(StreamPurpose::kPlannerInit));
  ControlSequence y = draw_gaussian(spec.horizon, spec.n_u, init);

  PlanResult result;
  StateTrajectory states;
  const std::size_t n = schedule.n_steps();
  for (std::size_t s = 0; s < n; ++s) {
    const MbdStepResult step = mbd_denoise_step(
        y, x0, scene, spec, cfg, schedule.sigmas[s],
        rng.derive({purpose(StreamPurpose::kCandidates), s}));
    y = step.mean;
    shielded_rollout_into(spec, x0, y, scene, states, cfg.margin);
    result.reward_trace.push_back(reward(states, scene));
    if (s + 1 < n) {
      RngStream renoise = rng.derive({purpose(StreamPurpose::kRenoise), s});
      y += schedule.sigmas[s + 1] * draw_gaussian(y.rows(), y.cols(), renoise);
    }
  }
  clamp_controls(spec, y);
  result.controls = y;
  result.interventions =
      shielded_rollout_into(spec, x0, y, scene, result.states, cfg.margin);
  result.reward = reward(result.states, scene);
  result.wall_time_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return result;
}

}  // namespace bsd
