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

#include "bsd/planner_bsd.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace bsd {
namespace {

std::span<const double> row_span(const RowMatrix& m, Eigen::Index r) {
  return {m.row(r).data(), static_cast<std::size_t>(m.cols())};
}

void check_library_matches(const TrajectoryLibrary& library, const State& x0) {
  validate(library);
  if (x0.size() != library.system.n_x) {
    throw DimensionError("initial state dimension does not match library");
  }
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

BandwidthMode parse_bandwidth_mode(std::string_view name) {
  if (name == "fixed") return BandwidthMode::kFixed;
  if (name == "adaptive") return BandwidthMode::kAdaptive;
  throw ConfigError("unknown bandwidth mode: " + std::string(name));
}

std::string_view to_string(BandwidthMode mode) {
  return mode == BandwidthMode::kFixed ? "fixed" : "adaptive";
}

void validate(const KernelParams& p) {
  if (!(p.nu_x > 0.0) || !(p.nu_g > 0.0) || !(p.c > 0.0)) {
    throw ParameterError("kernel bandwidths must be positive");
  }
  if (!(p.eta >= 0.0) || !std::isfinite(p.eta)) {
    throw ParameterError("reward temperature eta must be finite and >= 0");
  }
  if (!std::isfinite(p.gamma) || !std::isfinite(p.dim_power)) {
    throw ParameterError("bandwidth exponents must be finite");
  }
}

double bandwidth(double sigma, int d, const KernelParams& p) {
  if (!(sigma > 0.0)) throw ParameterError("bandwidth: sigma must be > 0");
  const double dim_scale = std::pow(static_cast<double>(d), p.dim_power);
  if (p.mode == BandwidthMode::kFixed) return p.c * dim_scale;
  return p.c * std::pow(sigma, p.gamma) * dim_scale;
}

double goal_distance_sq(std::span<const double> x, const State& goal) {
  const double dx = x[0] - goal[0];
  const double dy = x[1] - goal[1];
  const double dth = wrap_angle(x[2] - goal[2]);
  return dx * dx + dy * dy + dth * dth;
}

double context_distance_sq(std::span<const double> a,
                           std::span<const double> b, const SystemSpec& spec) {
  double d2 = 0.0;
  for (int c = 0; c < spec.n_x; ++c) {
    const double diff =
        spec.is_angle_channel(c) ? wrap_angle(a[c] - b[c]) : a[c] - b[c];
    d2 += diff * diff;
  }
  return d2;
}

WeightVector kernel_log_weights(const ControlSequence& query,
                                const TrajectoryLibrary& library,
                                const State& x0, const State& goal,
                                double sigma, const KernelParams& p) {
  check_library_matches(library, x0);
  const SystemSpec& spec = library.system;
  if (query.rows() != spec.horizon || query.cols() != spec.n_u) {
    throw DimensionError("kernel_log_weights: query has wrong shape");
  }
  const double beta =
      bandwidth(sigma, static_cast<int>(query.size()), p);
  const double inv_diff = 1.0 / (2.0 * beta * beta);
  const double inv_ctx = 1.0 / (2.0 * p.nu_x * p.nu_x);
  const double inv_goal = 1.0 / (2.0 * p.nu_g * p.nu_g);
  const std::span<const double> x0s{x0.data(),
                                    static_cast<std::size_t>(x0.size())};

  std::vector<double> logw(library.size());
  for (std::size_t j = 0; j < library.size(); ++j) {
    const TrajectoryRecord& rec = library.records[j];
    const double diff = (query - rec.controls).squaredNorm();
    const double ctx = context_distance_sq(x0s, row_span(rec.states, 0), spec);
    const double g =
        goal_distance_sq(row_span(rec.states, rec.states.rows() - 1), goal);
    logw[j] = -diff * inv_diff - ctx * inv_ctx - g * inv_goal +
              p.eta * library.normalized_reward(j);
  }
  return normalize_log_weights(logw);
}

NwEstimate nw_estimate(const WeightVector& weights,
                       const TrajectoryLibrary& library) {
  if (weights.size() != library.size() || library.size() == 0) {
    throw DimensionError("nw_estimate: weight count does not match library");
  }
  NwEstimate out;
  out.controls = ControlSequence::Zero(library.records[0].controls.rows(),
                                       library.records[0].controls.cols());
  out.states = StateTrajectory::Zero(library.records[0].states.rows(),
                                     library.records[0].states.cols());
  for (std::size_t j = 0; j < library.size(); ++j) {
    if (weights[j] == 0.0) continue;
    out.controls += weights[j] * library.records[j].controls;
    out.states += weights[j] * library.records[j].states;
  }
  return out;
}

std::vector<std::size_t> multinomial_draw(const WeightVector& weights,
                                          std::size_t K, RngStream& rng) {
  if (weights.size() == 0) throw ParameterError("multinomial_draw: no weights");
  std::vector<double> cdf(weights.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    acc += weights[j];
    cdf[j] = acc;
  }
  // Index of the last strictly positive weight; guards round-off at the top.
  std::size_t last = weights.size() - 1;
  while (last > 0 && weights[last] == 0.0) --last;

  std::vector<std::size_t> out(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    out[k] = std::min(static_cast<std::size_t>(it - cdf.begin()), last);
  }
  return out;
}

void validate(const BsdConfig& cfg) {
  if (cfg.num_candidates < 1) throw ParameterError("BSD needs K >= 1");
  if (!(cfg.temperature > 0.0)) throw ParameterError("BSD needs tau > 0");
  if (!(cfg.margin >= 0.0)) throw ParameterError("margin must be >= 0");
  validate(cfg.kernel);
  (void)cfg.schedule();
}

CandidateCache::CandidateCache(const TrajectoryLibrary& library,
                               const State& x0, const ParkingScene& scene,
                               double margin)
    : library_(library),
      x0_(x0),
      scene_(scene),
      margin_(margin),
      entries_(library.size()) {}

const CandidateCache::Entry& CandidateCache::entry(std::size_t j) {
  std::optional<Entry>& slot = entries_.at(j);
  if (!slot) {
    StateTrajectory retrieved = library_.records[j].states;
    retrieved.row(0) = x0_.transpose();
    Entry e;
    e.shielded = shield_states(retrieved, scene_, library_.system, margin_);
    e.reward = bsd::reward(e.shielded.states, scene_);
    slot = std::move(e);
  }
  return *slot;
}

const ShieldedTrajectory& CandidateCache::shielded(std::size_t j) {
  return entry(j).shielded;
}

double CandidateCache::reward(std::size_t j) { return entry(j).reward; }

BsdStepResult bsd_denoise_step(const ControlSequence& current,
                               const TrajectoryLibrary& library,
                               const State& x0, const ParkingScene& scene,
                               double sigma, std::optional<double> next_sigma,
                               const BsdConfig& cfg, const RngStream& rng,
                               CandidateCache& cache) {
  BsdStepResult out;
  out.kernel_weights = kernel_log_weights(current, library, x0,
                                          scene.goal_pose, sigma, cfg.kernel);
  RngStream draw_stream = rng.derive(purpose(StreamPurpose::kMultinomial));
  out.drawn = multinomial_draw(
      out.kernel_weights, static_cast<std::size_t>(cfg.num_candidates),
      draw_stream);

  std::vector<double> rewards(out.drawn.size());
  for (std::size_t k = 0; k < out.drawn.size(); ++k) {
    rewards[k] = cache.reward(out.drawn[k]);
  }
  out.best_reward = *std::max_element(rewards.begin(), rewards.end());

  std::vector<double> selection(rewards.size(), 0.0);
  if (cfg.selection == SelectionRule::kSoftmax) {
    selection = select_weights(rewards, cfg.temperature, cfg.reward_scaling)
                    .normalized;
  } else {
    const auto ties = static_cast<double>(
        std::count(rewards.begin(), rewards.end(), out.best_reward));
    for (std::size_t k = 0; k < rewards.size(); ++k) {
      if (rewards[k] == out.best_reward) selection[k] = 1.0 / ties;
    }
  }

  // Candidates that share a record share its controls and states, so the
  // mixture is accumulated per record.
  std::vector<double> per_record(library.size(), 0.0);
  for (std::size_t k = 0; k < out.drawn.size(); ++k) {
    per_record[out.drawn[k]] += selection[k];
  }
  const SystemSpec& spec = library.system;
  out.mean = ControlSequence::Zero(spec.horizon, spec.n_u);
  out.state_estimate = StateTrajectory::Zero(spec.horizon + 1, spec.n_x);
  for (std::size_t j = 0; j < library.size(); ++j) {
    if (per_record[j] == 0.0) continue;
    out.mean += per_record[j] * library.records[j].controls;
    out.state_estimate += per_record[j] * cache.shielded(j).states;
  }
  out.state_estimate.row(0) = x0.transpose();

  out.next = out.mean;
  if (next_sigma) {
    RngStream renoise = rng.derive(purpose(StreamPurpose::kRenoise));
    out.next += *next_sigma *
                draw_gaussian(out.next.rows(), out.next.cols(), renoise);
  }
  return out;
}

StateEstimate parse_state_estimate(std::string_view name) {
  if (name == "kernel") return StateEstimate::kKernel;
  if (name == "selection") return StateEstimate::kSelection;
  throw ConfigError("unknown state estimate: " + std::string(name));
}

std::string_view to_string(StateEstimate e) {
  return e == StateEstimate::kKernel ? "kernel" : "selection";
}

PlanResult bsd_plan(const State& x0, const ParkingScene& scene,
                    const TrajectoryLibrary& library, const BsdConfig& cfg,
                    const RngStream& rng) {
  const auto start = std::chrono::steady_clock::now();
  DynamicsPoison no_model;
  validate(cfg);
  check_library_matches(library, x0);
  const SystemSpec& spec = library.system;
  if (!is_safe(x0, scene, spec, cfg.margin)) {
    throw PreconditionError("bsd_plan: initial state is not safe");
  }
  const NoiseSchedule schedule = cfg.schedule();
  RngStream init = rng.derive(purpose(StreamPurpose::kPlannerInit));
  ControlSequence y = draw_gaussian(spec.horizon, spec.n_u, init);
  CandidateCache cache(library, x0, scene, cfg.margin);

  PlanResult result;
  const std::size_t n = schedule.n_steps();
  for (std::size_t s = 0; s < n; ++s) {
    const std::optional<double> next_sigma =
        s + 1 < n ? std::optional<double>(schedule.sigmas[s + 1])
                  : std::nullopt;
    BsdStepResult step = bsd_denoise_step(
        y, library, x0, scene, schedule.sigmas[s], next_sigma, cfg,
        rng.derive({purpose(StreamPurpose::kCandidates), s}), cache);
    StateTrajectory estimate;
    if (cfg.state_estimate == StateEstimate::kKernel) {
      estimate = nw_estimate(step.kernel_weights, library).states;
      estimate.row(0) = x0.transpose();
    } else {
      estimate = std::move(step.state_estimate);
    }
    const ShieldedTrajectory shielded =
        shield_states(estimate, scene, spec, cfg.margin);
    result.reward_trace.push_back(reward(shielded.states, scene));
    if (s + 1 == n) {
      result.controls = std::move(step.mean);
      result.states = shielded.states;
      result.interventions = shielded.interventions;
      result.reward = result.reward_trace.back();
    }
    y = std::move(step.next);
  }
  result.wall_time_ms = elapsed_ms(start);
  return result;
}

double nn_score(std::size_t j, const TrajectoryLibrary& library,
                const State& x0, const State& goal, const KernelParams& p) {
  const TrajectoryRecord& rec = library.records[j];
  const std::span<const double> x0s{x0.data(),
                                    static_cast<std::size_t>(x0.size())};
  const double ctx =
      context_distance_sq(x0s, row_span(rec.states, 0), library.system);
  const double g =
      goal_distance_sq(row_span(rec.states, rec.states.rows() - 1), goal);
  return ctx / (p.nu_x * p.nu_x) + g / (p.nu_g * p.nu_g) -
         p.eta * library.normalized_reward(j);
}

PlanResult nn_plan(const State& x0, const ParkingScene& scene,
                   const TrajectoryLibrary& library, const KernelParams& p,
                   double margin) {
  const auto start = std::chrono::steady_clock::now();
  DynamicsPoison no_model;
  validate(p);
  check_library_matches(library, x0);
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < library.size(); ++j) {
    const double score = nn_score(j, library, x0, scene.goal_pose, p);
    if (score < best_score) {
      best_score = score;
      best = j;
    }
  }
  CandidateCache cache(library, x0, scene, margin);
  PlanResult result;
  result.controls = library.records[best].controls;
  result.states = cache.shielded(best).states;
  result.interventions = cache.shielded(best).interventions;
  result.reward = cache.reward(best);
  result.wall_time_ms = elapsed_ms(start);
  return result;
}

}  // namespace bsd
