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


#include "bsd/config.h"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

namespace bsd {
namespace {

using nlohmann::json;

TEST(RunConfig, PaperDefaultsMatchStatedValues) {
  const RunConfig c = profile_defaults(Profile::kPaper);
  EXPECT_EQ(c.eval.n_trials, 50);
  EXPECT_EQ(c.eval.systems.size(), 4u);
  EXPECT_EQ(c.eval.conditions.size(), 4u);
  EXPECT_EQ(c.eval.mbd.n_diffuse, 100);
  EXPECT_EQ(c.eval.mbd.num_candidates, 20000);
  EXPECT_EQ(c.eval.bsd.n_diffuse, 100);
  EXPECT_EQ(c.eval.bsd.num_candidates, 20000);
  EXPECT_EQ(c.eval.bsd.kernel.nu_x, 2.0);
  EXPECT_EQ(c.eval.bsd.kernel.nu_g, 3.0);
  EXPECT_EQ(c.eval.bsd.kernel.eta, 10.0);
  EXPECT_EQ(c.eval.bsd.kernel.gamma, 0.5);
  EXPECT_EQ(c.datagen.n_target, 1000);
  EXPECT_EQ(c.summary.n_resamples, 10000);
  EXPECT_GE(c.threads, 1);
}

TEST(RunConfig, SmokeProfileScalesDown) {
  const RunConfig c = profile_defaults(Profile::kSmoke);
  EXPECT_EQ(c.eval.systems.size(), 2u);
  EXPECT_EQ(c.eval.n_trials, 5);
  EXPECT_EQ(c.eval.mbd.num_candidates, 500);
  EXPECT_EQ(c.eval.bsd.num_candidates, 500);
}

TEST(RunConfig, JsonRoundTrip) {
  for (Profile p : {Profile::kSmoke, Profile::kPaper}) {
    RunConfig c = profile_defaults(p);
    c = apply_config(c, json{{"seed", 77}, {"trials", 9}, {"bsd", {{"kernel", {{"eta", 4.5}}}}}});
    const RunConfig back = apply_config(profile_defaults(p), to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_EQ(config_hash(back), config_hash(c));
  }
}

TEST(RunConfig, OverridesPropagate) {
  const RunConfig c = apply_config(profile_defaults(Profile::kPaper),
                                   json{{"seed", 12}, {"threads", 3}, {"margin", 0.2}});
  EXPECT_EQ(c.eval.base_seed, 12u);
  EXPECT_EQ(c.datagen.base_seed, 12u);
  EXPECT_EQ(c.summary.seed, 12u);
  EXPECT_EQ(c.eval.threads, 3);
  EXPECT_EQ(c.eval.bsd.margin, 0.2);
  EXPECT_EQ(c.eval.mbd.margin, 0.2);
  EXPECT_EQ(c.datagen.oracle.margin, 0.2);
}

TEST(RunConfig, UnknownKeysRejected) {
  const RunConfig base = profile_defaults(Profile::kSmoke);
  EXPECT_THROW(apply_config(base, json{{"trails", 5}}), ConfigError);
  EXPECT_THROW(apply_config(base, json{{"mbd", {{"K", 5}}}}), ConfigError);
  EXPECT_THROW(apply_config(base, json{{"bsd", {{"kernel", {{"nu", 1.0}}}}}}), ConfigError);
  EXPECT_THROW(apply_config(base, json{{"theory", {{"deepc", {{"x", 1}}}}}}), ConfigError);
}

TEST(RunConfig, InvalidValuesRejected) {
  const RunConfig base = profile_defaults(Profile::kSmoke);
  EXPECT_THROW(apply_config(base, json{{"trials", "five"}}), ConfigError);
  EXPECT_THROW(apply_config(base, json{{"systems", json::array({"Tricycle"})}}), ConfigError);
  EXPECT_THROW(apply_config(base, json{{"conditions", json::array({"MPC"})}}), ConfigError);
  EXPECT_THROW(apply_config(base, json{{"ci_level", 1.5}}), ConfigError);
  EXPECT_THROW(apply_config(base, json{{"threads", 0}}), ConfigError);
  EXPECT_THROW(apply_config(base, json{{"profile", "paper"}}), ConfigError);
  EXPECT_THROW(apply_config(base, json::array()), ConfigError);
}

TEST(RunConfig, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "bsd_config_test.json";
  std::ofstream(path) << R"({"profile": "smoke", "trials": 2, "systems": ["AccTT2D"]})";
  const RunConfig c = load_run_config(path, Profile::kSmoke);
  EXPECT_EQ(c.eval.n_trials, 2);
  ASSERT_EQ(c.eval.systems.size(), 1u);
  EXPECT_EQ(c.eval.systems[0], SystemId::kAccTT2D);
  std::ofstream(path) << "{not json";
  EXPECT_THROW(load_run_config(path, Profile::kSmoke), ConfigError);
  EXPECT_THROW(load_run_config("/no/such/config.json", Profile::kSmoke), ConfigError);
}

TEST(RunConfig, ValueSourcesTagPaperAndDecided) {
  const RunConfig paper = profile_defaults(Profile::kPaper);
  const auto tags = value_sources(paper);
  EXPECT_EQ(tags["trials"], "paper");
  EXPECT_EQ(tags["bsd"]["kernel"]["eta"], "paper");
  EXPECT_EQ(tags["mbd"]["temperature"], "decided");
  EXPECT_EQ(tags["margin"], "decided");
  const auto smoke = value_sources(profile_defaults(Profile::kSmoke));
  EXPECT_EQ(smoke["trials"], "decided");
  EXPECT_EQ(smoke["bsd"]["kernel"]["eta"], "paper");
}

TEST(RunConfig, HashTracksContent) {
  const RunConfig a = profile_defaults(Profile::kPaper);
  RunConfig b = a;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b = apply_config(a, json{{"seed", 1}});
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 8u);
}

TEST(RunConfig, LibraryPath) {
  RunConfig c = profile_defaults(Profile::kSmoke);
  c.library_dir = "libs";
  EXPECT_EQ(library_path(c, SystemId::kNTrailer), std::filesystem::path("libs/NTrailer.ndjson"));
}

}  // namespace
}  // namespace bsd
