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

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "bsd/parallel.h"

namespace bsd {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "must be an object");
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    std::set<std::string_view> allowed(keys);
    for (const auto& item : j_.items()) {
      if (!allowed.count(item.key())) {
        throw ConfigError("unknown config key: " + path_ +
                          (path_.empty() ? "" : ".") + item.key());
      }
    }
  }

  bool has(std::string_view key) const { return j_.contains(key); }

  Section sub(std::string_view key) const {
    return Section(j_.at(key), name(key));
  }

  const json& raw(std::string_view key) const { return j_.at(key); }

  void read(std::string_view key, int& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(name(key) + " must be an integer");
    out = v.get<int>();
  }

  void read(std::string_view key, std::uint64_t& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw ConfigError(name(key) + " must be a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }

  void read(std::string_view key, double& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(name(key) + " must be a number");
    out = v.get<double>();
  }

  void read(std::string_view key, std::string& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(name(key) + " must be a string");
    out = v.get<std::string>();
  }

  template <typename Enum, typename Parse>
  void read_enum(std::string_view key, Enum& out, Parse parse) const {
    if (!has(key)) return;
    std::string s;
    read(key, s);
    out = parse(s);
  }

 private:
  std::string name(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }
  std::string where() const { return path_.empty() ? "config " : path_ + " "; }

  const json& j_;
  std::string path_;
};

void read_schedule(const Section& s, int& n_diffuse, int& num_candidates,
                   double& temperature, RewardScaling& scaling,
                   double& sigma_max, double& sigma_min, ScheduleShape& shape) {
  s.read("n_diffuse", n_diffuse);
  s.read("num_candidates", num_candidates);
  s.read("temperature", temperature);
  s.read_enum("reward_scaling", scaling, parse_reward_scaling);
  s.read("sigma_max", sigma_max);
  s.read("sigma_min", sigma_min);
  s.read_enum("schedule_shape", shape, parse_schedule_shape);
}

void read_mbd(const Section& s, MbdConfig& m) {
  s.allow({"n_diffuse", "num_candidates", "temperature", "reward_scaling",
           "sigma_max", "sigma_min", "schedule_shape", "candidate_scale"});
  read_schedule(s, m.n_diffuse, m.num_candidates, m.temperature,
                m.reward_scaling, m.sigma_max, m.sigma_min, m.schedule_shape);
  s.read("candidate_scale", m.candidate_scale);
}

ordered_json mbd_json(const MbdConfig& m) {
  ordered_json j;
  j["n_diffuse"] = m.n_diffuse;
  j["num_candidates"] = m.num_candidates;
  j["temperature"] = m.temperature;
  j["reward_scaling"] = std::string(to_string(m.reward_scaling));
  j["sigma_max"] = m.sigma_max;
  j["sigma_min"] = m.sigma_min;
  j["schedule_shape"] = std::string(to_string(m.schedule_shape));
  j["candidate_scale"] = m.candidate_scale;
  return j;
}

SelectionRule parse_selection(std::string_view s) {
  if (s == "softmax") return SelectionRule::kSoftmax;
  if (s == "argmax") return SelectionRule::kArgmax;
  throw ConfigError("unknown selection rule: " + std::string(s));
}

std::string_view to_string(SelectionRule r) {
  return r == SelectionRule::kSoftmax ? "softmax" : "argmax";
}

void read_bsd(const Section& s, BsdConfig& b) {
  s.allow({"n_diffuse", "num_candidates", "temperature", "reward_scaling",
           "sigma_max", "sigma_min", "schedule_shape", "state_estimate",
           "selection", "kernel"});
  read_schedule(s, b.n_diffuse, b.num_candidates, b.temperature,
                b.reward_scaling, b.sigma_max, b.sigma_min, b.schedule_shape);
  s.read_enum("state_estimate", b.state_estimate, parse_state_estimate);
  s.read_enum("selection", b.selection, parse_selection);
  if (s.has("kernel")) {
    const Section k = s.sub("kernel");
    k.allow({"nu_x", "nu_g", "eta", "c", "gamma", "dim_power"});
    k.read("nu_x", b.kernel.nu_x);
    k.read("nu_g", b.kernel.nu_g);
    k.read("eta", b.kernel.eta);
    k.read("c", b.kernel.c);
    k.read("gamma", b.kernel.gamma);
    k.read("dim_power", b.kernel.dim_power);
  }
}

ordered_json bsd_json(const BsdConfig& b) {
  ordered_json j;
  j["n_diffuse"] = b.n_diffuse;
  j["num_candidates"] = b.num_candidates;
  j["temperature"] = b.temperature;
  j["reward_scaling"] = std::string(to_string(b.reward_scaling));
  j["sigma_max"] = b.sigma_max;
  j["sigma_min"] = b.sigma_min;
  j["schedule_shape"] = std::string(to_string(b.schedule_shape));
  j["state_estimate"] = std::string(to_string(b.state_estimate));
  j["selection"] = std::string(to_string(b.selection));
  ordered_json k;
  k["nu_x"] = b.kernel.nu_x;
  k["nu_g"] = b.kernel.nu_g;
  k["eta"] = b.kernel.eta;
  k["c"] = b.kernel.c;
  k["gamma"] = b.kernel.gamma;
  k["dim_power"] = b.kernel.dim_power;
  j["kernel"] = k;
  return j;
}

void read_scenario(const Section& s, ScenarioConfig& sc) {
  s.allow({"goal_mode", "designated_goal", "start_region", "heading_mode",
           "fixed_heading", "heading_jitter"});
  s.read_enum("goal_mode", sc.goal_mode, parse_goal_mode);
  s.read("designated_goal", sc.designated_goal);
  if (s.has("start_region")) {
    const json& r = s.raw("start_region");
    if (!r.is_array() || r.size() != 4 ||
        !std::all_of(r.begin(), r.end(), [](const json& v) { return v.is_number(); })) {
      throw ConfigError("scenario.start_region must be [x_lo, y_lo, x_hi, y_hi]");
    }
    sc.start_region = Aabb{Vec2(r[0].get<double>(), r[1].get<double>()),
                           Vec2(r[2].get<double>(), r[3].get<double>())};
  }
  s.read_enum("heading_mode", sc.heading_mode, parse_heading_mode);
  s.read("fixed_heading", sc.fixed_heading);
  s.read("heading_jitter", sc.heading_jitter);
}

ordered_json scenario_json(const ScenarioConfig& sc) {
  ordered_json j;
  j["goal_mode"] = std::string(to_string(sc.goal_mode));
  j["designated_goal"] = sc.designated_goal;
  j["start_region"] = {sc.start_region.lo.x(), sc.start_region.lo.y(),
                       sc.start_region.hi.x(), sc.start_region.hi.y()};
  j["heading_mode"] = std::string(to_string(sc.heading_mode));
  j["fixed_heading"] = sc.fixed_heading;
  j["heading_jitter"] = sc.heading_jitter;
  return j;
}

void read_theory(const Section& s, TheoryConfig& t) {
  s.allow({"deepc", "consistency", "scaling"});
  if (s.has("deepc")) {
    const Section d = s.sub("deepc");
    d.allow({"dt", "length", "t_ini", "horizon", "n_queries"});
    d.read("dt", t.deepc.dt);
    d.read("length", t.deepc.length);
    d.read("t_ini", t.deepc.t_ini);
    d.read("horizon", t.deepc.horizon);
    d.read("n_queries", t.deepc.n_queries);
  }
  if (s.has("consistency")) {
    const Section c = s.sub("consistency");
    c.allow({"dim", "noise", "n_seeds", "bandwidth_scale"});
    c.read("dim", t.consistency.dim);
    c.read("noise", t.consistency.noise);
    c.read("n_seeds", t.consistency.n_seeds);
    c.read("bandwidth_scale", t.consistency.bandwidth_scale);
  }
  if (s.has("scaling")) {
    const Section c = s.sub("scaling");
    c.allow({"noise", "n_seeds", "n_bias", "variance_h"});
    c.read("noise", t.scaling.noise);
    c.read("n_seeds", t.scaling.n_seeds);
    c.read("n_bias", t.scaling.n_bias);
    c.read("variance_h", t.scaling.variance_h);
  }
}

ordered_json theory_json(const TheoryConfig& t) {
  ordered_json j;
  j["deepc"] = {{"dt", t.deepc.dt},
                {"length", t.deepc.length},
                {"t_ini", t.deepc.t_ini},
                {"horizon", t.deepc.horizon},
                {"n_queries", t.deepc.n_queries}};
  j["consistency"] = {{"dim", t.consistency.dim},
                      {"noise", t.consistency.noise},
                      {"n_seeds", t.consistency.n_seeds},
                      {"bandwidth_scale", t.consistency.bandwidth_scale}};
  j["scaling"] = {{"noise", t.scaling.noise},
                  {"n_seeds", t.scaling.n_seeds},
                  {"n_bias", t.scaling.n_bias},
                  {"variance_h", t.scaling.variance_h}};
  return j;
}

void sync_shared(RunConfig& cfg, double margin) {
  cfg.eval.base_seed = cfg.seed;
  cfg.datagen.base_seed = cfg.seed;
  cfg.summary.seed = cfg.seed;
  cfg.eval.threads = cfg.threads;
  cfg.datagen.threads = cfg.threads;
  cfg.datagen.scenario = cfg.eval.scenario;
  cfg.eval.scenario.margin = margin;
  cfg.datagen.scenario.margin = margin;
  cfg.eval.mbd.margin = margin;
  cfg.eval.bsd.margin = margin;
  cfg.datagen.oracle.margin = margin;
}

// Keys whose paper value is stated, as JSON pointers into to_json().
const std::set<std::string>& paper_keys() {
  static const std::set<std::string> keys = {
      "/systems",
      "/conditions",
      "/trials",
      "/resamples",
      "/ci_level",
      "/mbd/n_diffuse",
      "/mbd/num_candidates",
      "/bsd/n_diffuse",
      "/bsd/num_candidates",
      "/bsd/kernel/nu_x",
      "/bsd/kernel/nu_g",
      "/bsd/kernel/eta",
      "/bsd/kernel/gamma",
      "/bsd/kernel/dim_power",
      "/datagen/n_records",
      "/datagen/min_reward",
  };
  return keys;
}

void tag_leaves(const ordered_json& value, const ordered_json& paper,
                const std::string& pointer, ordered_json& out) {
  if (value.is_object()) {
    out = ordered_json::object();
    for (const auto& item : value.items()) {
      const std::string child = pointer + "/" + item.key();
      const ordered_json& p = paper.contains(item.key()) ? paper.at(item.key())
                                                          : ordered_json();
      tag_leaves(item.value(), p, child, out[item.key()]);
    }
    return;
  }
  out = paper_keys().count(pointer) && value == paper ? "paper" : "decided";
}

}  // namespace

Profile parse_profile(std::string_view name) {
  if (name == "smoke") return Profile::kSmoke;
  if (name == "paper") return Profile::kPaper;
  throw ConfigError("unknown profile: " + std::string(name));
}

std::string_view to_string(Profile p) {
  return p == Profile::kSmoke ? "smoke" : "paper";
}

RunConfig profile_defaults(Profile p) {
  RunConfig cfg;
  cfg.profile = p;
  cfg.threads = default_threads();
  cfg.datagen.n_target = 1000;
  cfg.datagen.min_reward = 0.0;
  cfg.datagen.oracle.num_candidates = 256;
  cfg.datagen.oracle.n_diffuse = 50;
  if (p == Profile::kSmoke) {
    cfg.eval.systems = {SystemId::kBicycle, SystemId::kTT2D};
    cfg.eval.n_trials = 5;
    cfg.eval.mbd.num_candidates = 500;
    cfg.eval.bsd.num_candidates = 500;
    cfg.summary.n_resamples = 1000;
    cfg.datagen.n_target = 100;
    cfg.datagen.oracle.num_candidates = 64;
    cfg.datagen.oracle.n_diffuse = 30;
  }
  sync_shared(cfg, lot::kDefaultMargin);
  return cfg;
}

RunConfig apply_config(RunConfig cfg, const nlohmann::json& j) {
  const Section root(j, "");
  root.allow({"profile", "seed", "threads", "output_dir", "library_dir",
              "systems", "conditions", "trials", "resamples", "ci_level",
              "margin", "scenario", "mbd", "bsd", "datagen", "theory"});
  if (root.has("profile")) {
    std::string p;
    root.read("profile", p);
    if (parse_profile(p) != cfg.profile) {
      throw ConfigError("config profile '" + p +
                        "' differs from the selected profile '" +
                        std::string(to_string(cfg.profile)) + "'");
    }
  }
  root.read("seed", cfg.seed);
  root.read("threads", cfg.threads);
  std::string dir;
  if (root.has("output_dir")) {
    root.read("output_dir", dir);
    cfg.output_dir = dir;
  }
  if (root.has("library_dir")) {
    root.read("library_dir", dir);
    cfg.library_dir = dir;
  }
  auto string_list = [&](std::string_view key) {
    const json& v = root.raw(key);
    if (!v.is_array() || v.empty() ||
        !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); })) {
      throw ConfigError(std::string(key) + " must be a non-empty list of names");
    }
    return v.get<std::vector<std::string>>();
  };
  if (root.has("systems")) {
    cfg.eval.systems.clear();
    for (const std::string& s : string_list("systems")) {
      try {
        cfg.eval.systems.push_back(parse_system_id(s));
      } catch (const std::exception&) {
        throw ConfigError("unknown system: " + s);
      }
    }
  }
  if (root.has("conditions")) {
    cfg.eval.conditions.clear();
    for (const std::string& s : string_list("conditions")) {
      cfg.eval.conditions.push_back(parse_condition(s));
    }
  }
  root.read("trials", cfg.eval.n_trials);
  root.read("resamples", cfg.summary.n_resamples);
  root.read("ci_level", cfg.summary.level);
  double margin = cfg.eval.scenario.margin;
  root.read("margin", margin);
  try {
    if (root.has("scenario")) read_scenario(root.sub("scenario"), cfg.eval.scenario);
    if (root.has("mbd")) read_mbd(root.sub("mbd"), cfg.eval.mbd);
    if (root.has("bsd")) read_bsd(root.sub("bsd"), cfg.eval.bsd);
    if (root.has("datagen")) {
      const Section d = root.sub("datagen");
      d.allow({"n_records", "min_reward", "oracle"});
      d.read("n_records", cfg.datagen.n_target);
      d.read("min_reward", cfg.datagen.min_reward);
      if (d.has("oracle")) read_mbd(d.sub("oracle"), cfg.datagen.oracle);
    }
    if (root.has("theory")) read_theory(root.sub("theory"), cfg.theory);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  sync_shared(cfg, margin);
  validate(cfg);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, Profile profile) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return apply_config(profile_defaults(profile), j);
}

void validate(const RunConfig& cfg) {
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  if (cfg.summary.n_resamples < 1) throw ConfigError("resamples must be >= 1");
  if (!(cfg.summary.level > 0.0 && cfg.summary.level < 1.0)) {
    throw ConfigError("ci_level must lie in (0, 1)");
  }
  if (cfg.datagen.n_target < 1) throw ConfigError("datagen.n_records must be >= 1");
  const ScenarioConfig& sc = cfg.eval.scenario;
  if (sc.designated_goal < 0 || sc.designated_goal >= lot::kSpaces) {
    throw ConfigError("scenario.designated_goal out of range");
  }
  if (!(sc.start_region.lo.x() < sc.start_region.hi.x() &&
        sc.start_region.lo.y() < sc.start_region.hi.y())) {
    throw ConfigError("scenario.start_region is empty");
  }
  if (!(sc.margin >= 0.0)) throw ConfigError("margin must be >= 0");
  try {
    validate(cfg.eval);
    validate(cfg.datagen.oracle);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  ordered_json j;
  j["profile"] = std::string(to_string(cfg.profile));
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["output_dir"] = cfg.output_dir.string();
  j["library_dir"] = cfg.library_dir.string();
  j["systems"] = ordered_json::array();
  for (SystemId s : cfg.eval.systems) j["systems"].push_back(std::string(to_string(s)));
  j["conditions"] = ordered_json::array();
  for (Condition c : cfg.eval.conditions) {
    j["conditions"].push_back(std::string(to_string(c)));
  }
  j["trials"] = cfg.eval.n_trials;
  j["resamples"] = cfg.summary.n_resamples;
  j["ci_level"] = cfg.summary.level;
  j["margin"] = cfg.eval.scenario.margin;
  j["scenario"] = scenario_json(cfg.eval.scenario);
  j["mbd"] = mbd_json(cfg.eval.mbd);
  j["bsd"] = bsd_json(cfg.eval.bsd);
  ordered_json d;
  d["n_records"] = cfg.datagen.n_target;
  d["min_reward"] = cfg.datagen.min_reward;
  d["oracle"] = mbd_json(cfg.datagen.oracle);
  j["datagen"] = d;
  j["theory"] = theory_json(cfg.theory);
  return j;
}

nlohmann::ordered_json value_sources(const RunConfig& cfg) {
  ordered_json out;
  tag_leaves(to_json(cfg), to_json(profile_defaults(Profile::kPaper)), "", out);
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  const uLong crc = crc32(crc32(0L, Z_NULL, 0),
                          reinterpret_cast<const Bytef*>(text.data()),
                          static_cast<uInt>(text.size()));
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

std::filesystem::path library_path(const RunConfig& cfg, SystemId id) {
  return cfg.library_dir / (std::string(to_string(id)) + ".ndjson");
}

}  // namespace bsd
