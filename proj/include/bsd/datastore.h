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
#include <optional>
#include <string>

#include "bsd/library.h"
#include "bsd/parkenv.h"
#include "bsd/planner_mbd.h"

namespace bsd {

inline constexpr int kLibraryFormatVersion = 1;

struct CollectConfig {
  int n_target = 1000;
  double min_reward = 0.0;
  std::uint64_t base_seed = 0;
  MbdConfig oracle;  // planner used to generate demonstrations
  int threads = 1;   // parallel over attempts
  ScenarioConfig scenario;
};

// Runs the MBD oracle on problems drawn from cfg.scenario and keeps shielded trajectories whose
// reward reaches min_reward. Attempt a draws from its own stream, and accepted
// records are kept in attempt order, so the result is independent of
// cfg.threads.
TrajectoryLibrary collect_library(const SystemSpec& spec,
                                  const CollectConfig& cfg);

// Goal space, scene and initial state of collection attempt `attempt`.
PlanningProblem collection_problem(const SystemSpec& spec,
                                   const ScenarioConfig& scenario,
                                   std::uint64_t base_seed,
                                   std::uint64_t attempt);

// NDJSON library format: one JSON header line followed by one JSON record per
// line. See docs/format.md.
void save_library(const TrajectoryLibrary& library,
                  const std::filesystem::path& path);
std::string serialize_library(const TrajectoryLibrary& library);

// Throws LoadError with the reason on version, dimension, checksum or
// system mismatch.
TrajectoryLibrary load_library(const std::filesystem::path& path,
                               std::optional<SystemId> expected = std::nullopt);
TrajectoryLibrary parse_library(const std::string& bytes,
                                std::optional<SystemId> expected = std::nullopt);

}  // namespace bsd
