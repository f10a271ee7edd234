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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "bsd/dynamics.h"
#include "bsd/library.h"
#include "bsd/parkenv.h"
#include "bsd/planner_bsd.h"
#include "bsd/planner_mbd.h"
#include "bsd/rng.h"
#include "json.hpp"

namespace bsd {

enum class Condition { kMbd, kBsdFix, kBsd, kNn };

Condition parse_condition(std::string_view name);
std::string_view to_string(Condition c);
bool uses_library(Condition c);

inline constexpr Condition kAllConditions[] = {
    Condition::kMbd, Condition::kBsdFix, Condition::kBsd, Condition::kNn};

struct TrialRecord {
  SystemId system = SystemId::kBicycle;
  Condition condition = Condition::kMbd;
  int trial = 0;
  std::uint64_t seed = 0;
  // Reward of the planner's returned (shielded) trajectory.
  double reward = 0.0;
  // Returned controls rolled out from the initial state through the true
  // dynamics with the shield. Equal to reward for MBD.
  double executed_reward = 0.0;
  bool safe = false;  // shield never intervened on the returned trajectory
  int interventions = 0;
  std::uint64_t dynamics_calls = 0;  // made by the planner itself
  double plan_time_ms = 0.0;         // wall clock, kept out of the record log
  State initial_state;
  int goal_index = 0;
};

// Deterministic fields only; plan_time_ms lives in the timing log.
nlohmann::json to_json(const TrialRecord& r);
TrialRecord trial_from_json(const nlohmann::json& j);

struct EvalConfig {
  std::vector<SystemId> systems = {SystemId::kBicycle, SystemId::kTT2D,
                                   SystemId::kNTrailer, SystemId::kAccTT2D};
  std::vector<Condition> conditions = {std::begin(kAllConditions),
                                       std::end(kAllConditions)};
  int n_trials = 50;
  std::uint64_t base_seed = 0;
  MbdConfig mbd;
  BsdConfig bsd;  // kernel.mode is overridden per condition
  ScenarioConfig scenario;
  int threads = 1;
};

void validate(const EvalConfig& cfg);

using LibrarySet = std::map<SystemId, TrajectoryLibrary>;

// Planning problem shared by every condition of trial `trial`.
PlanningProblem trial_problem(const SystemSpec& spec, const EvalConfig& cfg,
                              int trial);

// Planner noise stream of one condition in one trial.
RngStream condition_rng(const EvalConfig& cfg, int trial, Condition c);

// Runs one condition on a problem. library may be null for MBD.
PlanResult plan_condition(const SystemSpec& spec, const EvalConfig& cfg,
                          const TrajectoryLibrary* library,
                          const PlanningProblem& problem, Condition c,
                          const RngStream& rng);

// All conditions of one (system, trial) pair.
std::vector<TrialRecord> run_trial(const SystemSpec& spec, const EvalConfig& cfg,
                                   const TrajectoryLibrary* library, int trial);

struct TrialLog {
  std::filesystem::path records;  // JSON lines, one per TrialRecord
  std::filesystem::path timing;   // JSON lines with plan_time_ms
};

TrialLog trial_log_in(const std::filesystem::path& dir);

// Runs every (system, trial) pair. Records are ordered by system, trial and
// condition and appended to the log after each batch. With resume, complete
// pairs already in the log are kept and skipped; partial pairs are rerun.
// Throws ConfigError before any trial when a library is missing.
std::vector<TrialRecord> run_trials(const EvalConfig& cfg,
                                    const LibrarySet& libraries,
                                    const std::optional<TrialLog>& log = {},
                                    bool resume = false);

std::vector<TrialRecord> load_trial_log(const TrialLog& log);

// Percentile bootstrap of the mean.
std::pair<double, double> bootstrap_ci(std::span<const double> samples,
                                       int n_resamples, double level,
                                       RngStream rng);

double quantile_sorted(std::span<const double> sorted, double p);

double pearson(std::span<const double> a, std::span<const double> b);

std::pair<double, double> wilson_interval(int successes, int n,
                                          double z = 1.959963984540054);

struct CellSummary {
  SystemId system = SystemId::kBicycle;
  Condition condition = Condition::kMbd;
  int n = 0;
  double mean = 0.0;
  double std = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double safety_rate = 0.0;
  double safety_lo = 0.0;
  double safety_hi = 0.0;
  double mean_executed_reward = 0.0;
  double mean_time_ms = 0.0;
  std::uint64_t dynamics_calls = 0;
};

struct SummaryTable {
  std::vector<CellSummary> cells;  // ordered by system, condition
  std::map<SystemId, double> pearson_mbd_bsd_fix;

  const CellSummary* find(SystemId s, Condition c) const;
  // mean(condition) / mean(MBD); throws PreconditionError if a cell is missing.
  double ratio(SystemId s, Condition c) const;
  std::vector<SystemId> systems() const;
};

struct SummaryConfig {
  int n_resamples = 10000;
  double level = 0.95;
  std::uint64_t seed = 0;
};

SummaryTable summarize(const std::vector<TrialRecord>& records,
                       const SummaryConfig& cfg = {});

// table1.csv and fig{2..6}_*.csv plus timing.csv.
void export_figures(const std::vector<TrialRecord>& records,
                    const SummaryTable& table,
                    const std::filesystem::path& outdir);

}  // namespace bsd
