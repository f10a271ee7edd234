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
#include <string>
#include <string_view>

#include "bsd/datastore.h"
#include "bsd/eval.h"
#include "bsd/theory.h"
#include "json.hpp"

namespace bsd {

enum class Profile { kSmoke, kPaper };

Profile parse_profile(std::string_view name);
std::string_view to_string(Profile p);

struct TheoryConfig {
  DeepcConfig deepc;
  ConsistencyConfig consistency;
  ScalingConfig scaling;
};

// Everything a run needs, resolved from profile defaults, then the config
// file, then command-line flags.
struct RunConfig {
  Profile profile = Profile::kPaper;
  std::uint64_t seed = 0;
  int threads = 1;
  std::filesystem::path output_dir = "out";
  std::filesystem::path library_dir = "libraries";
  EvalConfig eval;
  SummaryConfig summary;
  CollectConfig datagen;
  TheoryConfig theory;
};

RunConfig profile_defaults(Profile p);

// Applies the keys of `j` on top of `base`. Unknown keys, wrong types and
// invalid values raise ConfigError.
RunConfig apply_config(RunConfig base, const nlohmann::json& j);

RunConfig load_run_config(const std::filesystem::path& path, Profile profile);

// Re-validates cross-field constraints (after flag overrides).
void validate(const RunConfig& cfg);

// Full resolved configuration. Parsing it back with apply_config yields the
// same configuration.
nlohmann::ordered_json to_json(const RunConfig& cfg);

// "paper" or "decided" for every leaf key of to_json().
nlohmann::ordered_json value_sources(const RunConfig& cfg);

// Hex CRC-32 of the canonical JSON dump of to_json(cfg).
std::string config_hash(const RunConfig& cfg);

std::filesystem::path library_path(const RunConfig& cfg, SystemId id);

}  // namespace bsd
