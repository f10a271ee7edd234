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


#include "cli.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "bsd/config.h"
#include "bsd/datastore.h"
#include "bsd/eval.h"
#include "bsd/theory.h"
#include "bsd/version.h"
#include "json.hpp"

namespace bsd::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Options {
  std::string config;
  std::string profile = "paper";
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string library_dir;
  bool dry_run = false;
  // datagen
  std::vector<std::string> systems;
  std::string library;
  // plan
  std::string system;
  std::string condition;
  int trial = 0;
  // eval
  bool resume = false;
};

RunConfig resolve(const Options& o) {
  const Profile profile = parse_profile(o.profile);
  RunConfig cfg = o.config.empty() ? profile_defaults(profile)
                                   : load_run_config(o.config, profile);
  nlohmann::json flags = nlohmann::json::object();
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    flags["output_dir"] = env;
  }
  if (!o.out.empty()) flags["output_dir"] = o.out;
  if (!o.library_dir.empty()) flags["library_dir"] = o.library_dir;
  if (o.threads) flags["threads"] = *o.threads;
  if (o.seed) flags["seed"] = *o.seed;
  if (!o.systems.empty()) flags["systems"] = o.systems;
  return apply_config(cfg, flags);
}

void write_json(const fs::path& path, const ordered_json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_run_meta(const RunConfig& cfg, const std::string& command) {
  fs::create_directories(cfg.output_dir);
  ordered_json meta;
  meta["command"] = command;
  meta["config_hash"] = config_hash(cfg);
  meta["seed"] = cfg.seed;
  meta["profile"] = std::string(to_string(cfg.profile));
  ordered_json versions;
  versions["bsd"] = std::string(kVersion);
  versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION);
  versions["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  versions["library_format"] = kLibraryFormatVersion;
  versions["compiler"] = __VERSION__;
  meta["versions"] = versions;
  meta["config"] = to_json(cfg);
  meta["value_sources"] = value_sources(cfg);
  write_json(cfg.output_dir / "run_meta.json", meta);
}

void check_writable(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream probe(path, std::ios::binary | std::ios::app);
  if (!probe) throw ConfigError("cannot open for writing: " + path.string());
}

int cmd_datagen(const RunConfig& cfg, const Options& o) {
  if (!o.library.empty() && cfg.eval.systems.size() != 1) {
    throw ConfigError("--library needs exactly one --system");
  }
  std::vector<std::pair<SystemId, fs::path>> jobs;
  for (SystemId s : cfg.eval.systems) {
    jobs.emplace_back(s, o.library.empty() ? library_path(cfg, s)
                                           : fs::path(o.library));
  }
  for (const auto& [s, path] : jobs) check_writable(path);
  write_run_meta(cfg, "datagen");
  for (const auto& [s, path] : jobs) {
    const TrajectoryLibrary lib = collect_library(make_system(s), cfg.datagen);
    save_library(lib, path);
    std::printf("%s: %zu records, reward mean %.4f [%.4f, %.4f] -> %s\n",
                std::string(to_string(s)).c_str(), lib.size(),
                lib.reward_stats.mean, lib.reward_stats.min,
                lib.reward_stats.max, path.string().c_str());
  }
  return kExitOk;
}

LibrarySet load_libraries(const RunConfig& cfg,
                          const std::vector<Condition>& conditions) {
  LibrarySet libs;
  if (std::none_of(conditions.begin(), conditions.end(), uses_library)) {
    return libs;
  }
  for (SystemId s : cfg.eval.systems) {
    const fs::path path = library_path(cfg, s);
    if (!fs::exists(path)) {
      throw ConfigError("missing library for " + std::string(to_string(s)) +
                        ": " + path.string() + " (run datagen first)");
    }
    try {
      libs.emplace(s, load_library(path, s));
    } catch (const LoadError& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  return libs;
}

int cmd_plan(RunConfig cfg, const Options& o) {
  const Condition condition = parse_condition(o.condition);
  const SystemId system = [&] {
    try {
      return parse_system_id(o.system);
    } catch (const std::exception&) {
      throw ConfigError("unknown system: " + o.system);
    }
  }();
  if (o.trial < 0) throw ConfigError("--trial must be >= 0");
  cfg.eval.systems = {system};
  const LibrarySet libs = load_libraries(cfg, {condition});
  write_run_meta(cfg, "plan");
  const SystemSpec spec = make_system(system);
  const PlanningProblem problem = trial_problem(spec, cfg.eval, o.trial);
  auto it = libs.find(system);
  const PlanResult plan = plan_condition(
      spec, cfg.eval, it == libs.end() ? nullptr : &it->second, problem,
      condition, condition_rng(cfg.eval, o.trial, condition));
  nlohmann::json j = to_json(plan);
  j["system"] = std::string(to_string(system));
  j["condition"] = std::string(to_string(condition));
  j["trial"] = o.trial;
  j["goal_index"] = problem.goal_space_index;
  std::cout << j.dump() << '\n';
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const Options& o) {
  const LibrarySet libs = load_libraries(cfg, cfg.eval.conditions);
  write_run_meta(cfg, "eval");
  const std::vector<TrialRecord> records = run_trials(
      cfg.eval, libs, trial_log_in(cfg.output_dir), o.resume);
  const SummaryTable table = summarize(records, cfg.summary);
  export_figures(records, table, cfg.output_dir);
  bool model_free = true;
  std::printf("%-9s %-8s %6s %10s %22s %7s %10s\n", "system", "cond", "n",
              "mean", "95% CI", "safety", "ratio");
  for (const CellSummary& c : table.cells) {
    std::printf("%-9s %-8s %6d %10.4f  [%9.4f, %9.4f] %7.2f %10.4f\n",
                std::string(to_string(c.system)).c_str(),
                std::string(to_string(c.condition)).c_str(), c.n, c.mean,
                c.ci_lo, c.ci_hi, c.safety_rate,
                table.find(c.system, Condition::kMbd)
                    ? table.ratio(c.system, c.condition)
                    : 0.0);
    if (uses_library(c.condition) && c.dynamics_calls != 0) model_free = false;
  }
  if (!model_free) {
    std::fprintf(stderr, "model-free check failed: a data-driven planner "
                         "called the dynamics\n");
    return kExitCheckFailed;
  }
  return kExitOk;
}

void write_theory_csvs(const fs::path& dir, const DeepcReport& deepc,
                       const ConsistencyReport& cons, const ScalingReport& scal) {
  {
    std::ofstream out(dir / "theory_deepc.csv", std::ios::binary);
    out << "beta,max_stationarity,max_projection_residual,max_reprojection,"
           "max_uniform_gap\n";
    for (const DeepcBetaRow& r : deepc.rows) {
      out << r.beta << ',' << r.max_stationarity << ','
          << r.max_projection_residual << ',' << r.max_reprojection << ','
          << r.max_uniform_gap << '\n';
    }
  }
  {
    std::ofstream out(dir / "theory_consistency.csv", std::ios::binary);
    out << "n,h,mse,median_mse,bias_sq,variance\n";
    for (const ConsistencyRow& r : cons.rows) {
      out << r.n << ',' << r.h << ',' << r.mse << ',' << r.median_mse << ','
          << r.bias_sq << ',' << r.variance << '\n';
    }
  }
  {
    std::ofstream out(dir / "theory_scaling.csv", std::ios::binary);
    out << "regime,x,value\n";
    for (const auto& [h, b] : scal.bias_rows) out << "bias_sq_vs_h," << h << ',' << b << '\n';
    for (const auto& [n, v] : scal.variance_rows) {
      out << "variance_vs_n," << n << ',' << v << '\n';
    }
  }
}

int cmd_theory(const RunConfig& cfg) {
  write_run_meta(cfg, "theory");
  const RngStream root(cfg.seed, purpose(StreamPurpose::kTheory));
  const DeepcReport deepc = deepc_equivalence_check(cfg.theory.deepc, root.derive(1));
  const ConsistencyReport cons =
      nw_consistency_check(sin_target, cfg.theory.consistency, root.derive(2));
  const ScalingReport scal = mse_scaling_check(
      [](const Eigen::VectorXd& z) { return z[0] * z[0]; }, cfg.theory.scaling,
      root.derive(3));
  ordered_json report;
  report["deepc"] = to_json(deepc);
  report["consistency"] = to_json(cons);
  report["scaling"] = to_json(scal);
  write_json(cfg.output_dir / "theory_report.json", report);
  write_theory_csvs(cfg.output_dir, deepc, cons, scal);
  if (!deepc.persistently_exciting) {
    std::fprintf(stderr, "warning: input is not persistently exciting (rank %d)\n",
                 deepc.hankel_rank);
  }
  std::printf("deepc equivalence: %s\n", deepc.passed() ? "pass" : "FAIL");
  std::printf("nw consistency: %s (mse ratio %.2f)\n", cons.passed ? "pass" : "FAIL",
              cons.ratio);
  std::printf("mse scaling: %s (bias slope %s, variance slope %.3f)\n",
              scal.passed() ? "pass" : "FAIL",
              scal.bias_slope ? std::to_string(*scal.bias_slope).c_str() : "skipped",
              scal.variance_slope);
  return deepc.passed() && cons.passed && scal.passed() ? kExitOk
                                                        : kExitCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Trajectory planning by kernel score diffusion over a "
               "trajectory library", "bsd"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file");
    sub->add_option("--profile", o.profile, "smoke or paper")
        ->check(CLI::IsMember({"smoke", "paper"}));
    sub->add_option("--threads", o.threads, "worker threads");
    sub->add_option("--seed", o.seed, "base seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--library-dir", o.library_dir, "trajectory library directory");
    sub->add_flag("--dry-run", o.dry_run, "validate the config and exit");
  };
  CLI::App* datagen = app.add_subcommand("datagen", "collect trajectory libraries");
  add_common(datagen);
  datagen->add_option("--system", o.systems, "system(s) to collect");
  datagen->add_option("--library", o.library, "output file (single system)");
  CLI::App* plan = app.add_subcommand("plan", "run one planner on one trial");
  add_common(plan);
  plan->add_option("--system", o.system, "system")->required();
  plan->add_option("--condition", o.condition, "MBD, BSD_fix, BSD or NN")
      ->required();
  plan->add_option("--trial", o.trial, "trial index");
  CLI::App* eval = app.add_subcommand("eval", "run the evaluation protocol");
  add_common(eval);
  eval->add_flag("--resume", o.resume, "keep completed trials from a previous run");
  CLI::App* theory = app.add_subcommand("theory", "run the estimator checks");
  add_common(theory);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const RunConfig cfg = resolve(o);
    if (plan->parsed()) parse_condition(o.condition);
    if (o.dry_run) {
      std::cout << to_json(cfg).dump(2) << '\n';
      return kExitOk;
    }
    if (datagen->parsed()) return cmd_datagen(cfg, o);
    if (plan->parsed()) return cmd_plan(cfg, o);
    if (eval->parsed()) return cmd_eval(cfg, o);
    return cmd_theory(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failed: %s\n", e.what());
    return kExitCheckFailed;
  }
}

}  // namespace bsd::cli
