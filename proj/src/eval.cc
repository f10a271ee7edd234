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


#include "bsd/eval.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <string>

#include "bsd/parallel.h"
#include "bsd/shield.h"

namespace bsd {
namespace {

std::uint64_t condition_stream(Condition c) {
  return 100 + static_cast<std::uint64_t>(c);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

int state_dim(SystemId id) { return make_system(id).n_x; }

// Complete (system, trial) groups are the ones holding every condition.
std::vector<TrialRecord> complete_groups(std::vector<TrialRecord> records,
                                         const EvalConfig& cfg) {
  std::map<std::pair<SystemId, int>, std::vector<TrialRecord>> groups;
  for (TrialRecord& r : records) {
    groups[{r.system, r.trial}].push_back(std::move(r));
  }
  std::vector<TrialRecord> out;
  for (SystemId s : cfg.systems) {
    for (int t = 0; t < cfg.n_trials; ++t) {
      auto it = groups.find({s, t});
      if (it == groups.end()) continue;
      std::vector<TrialRecord> kept;
      for (Condition c : cfg.conditions) {
        for (TrialRecord& r : it->second) {
          if (r.condition == c) {
            kept.push_back(r);
            break;
          }
        }
      }
      if (kept.size() == cfg.conditions.size()) {
        for (TrialRecord& r : kept) out.push_back(std::move(r));
      }
    }
  }
  return out;
}

void write_records(std::ofstream& records, std::ofstream& timing,
                   const std::vector<TrialRecord>& batch) {
  for (const TrialRecord& r : batch) {
    records << to_json(r).dump() << '\n';
    nlohmann::ordered_json t;
    t["system"] = std::string(to_string(r.system));
    t["condition"] = std::string(to_string(r.condition));
    t["trial"] = r.trial;
    t["plan_time_ms"] = r.plan_time_ms;
    timing << t.dump() << '\n';
  }
  records.flush();
  timing.flush();
}

}  // namespace

Condition parse_condition(std::string_view name) {
  if (name == "MBD") return Condition::kMbd;
  if (name == "BSD_fix") return Condition::kBsdFix;
  if (name == "BSD") return Condition::kBsd;
  if (name == "NN") return Condition::kNn;
  throw ConfigError("unknown condition: " + std::string(name));
}

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::kMbd: return "MBD";
    case Condition::kBsdFix: return "BSD_fix";
    case Condition::kBsd: return "BSD";
    case Condition::kNn: return "NN";
  }
  return "?";
}

bool uses_library(Condition c) { return c != Condition::kMbd; }

nlohmann::json to_json(const TrialRecord& r) {
  nlohmann::ordered_json j;
  j["system"] = std::string(to_string(r.system));
  j["condition"] = std::string(to_string(r.condition));
  j["trial"] = r.trial;
  j["seed"] = r.seed;
  j["reward"] = r.reward;
  j["executed_reward"] = r.executed_reward;
  j["safe"] = r.safe;
  j["interventions"] = r.interventions;
  j["dynamics_calls"] = r.dynamics_calls;
  j["goal_index"] = r.goal_index;
  j["initial_state"] =
      std::vector<double>(r.initial_state.data(),
                          r.initial_state.data() + r.initial_state.size());
  return j;
}

TrialRecord trial_from_json(const nlohmann::json& j) {
  TrialRecord r;
  try {
    r.system = parse_system_id(j.at("system").get<std::string>());
    r.condition = parse_condition(j.at("condition").get<std::string>());
    r.trial = j.at("trial").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.reward = j.at("reward").get<double>();
    r.executed_reward = j.at("executed_reward").get<double>();
    r.safe = j.at("safe").get<bool>();
    r.interventions = j.at("interventions").get<int>();
    r.dynamics_calls = j.at("dynamics_calls").get<std::uint64_t>();
    r.goal_index = j.at("goal_index").get<int>();
    const auto x = j.at("initial_state").get<std::vector<double>>();
    r.initial_state = Eigen::Map<const State>(x.data(), static_cast<Eigen::Index>(x.size()));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("bad trial record: ") + e.what());
  }
  return r;
}

void validate(const EvalConfig& cfg) {
  if (cfg.n_trials < 0) throw ConfigError("n_trials must be >= 0");
  if (cfg.systems.empty()) throw ConfigError("no systems requested");
  if (cfg.conditions.empty()) throw ConfigError("no conditions requested");
  if (std::set<SystemId>(cfg.systems.begin(), cfg.systems.end()).size() !=
      cfg.systems.size()) {
    throw ConfigError("duplicate system");
  }
  if (std::set<Condition>(cfg.conditions.begin(), cfg.conditions.end())
          .size() != cfg.conditions.size()) {
    throw ConfigError("duplicate condition");
  }
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  validate(cfg.mbd);
  validate(cfg.bsd);
}

PlanningProblem trial_problem(const SystemSpec& spec, const EvalConfig& cfg,
                              int trial) {
  return sample_problem(
      spec, cfg.scenario,
      RngStream(cfg.base_seed, purpose(StreamPurpose::kScenario))
          .derive(static_cast<std::uint64_t>(trial)));
}

RngStream condition_rng(const EvalConfig& cfg, int trial, Condition c) {
  return RngStream(cfg.base_seed, purpose(StreamPurpose::kPlannerInit))
      .derive({static_cast<std::uint64_t>(trial), condition_stream(c)});
}

PlanResult plan_condition(const SystemSpec& spec, const EvalConfig& cfg,
                          const TrajectoryLibrary* library,
                          const PlanningProblem& problem, Condition c,
                          const RngStream& rng) {
  if (uses_library(c) && library == nullptr) {
    throw ConfigError("condition " + std::string(to_string(c)) +
                      " needs a library");
  }
  switch (c) {
    case Condition::kMbd: {
      MbdConfig mbd = cfg.mbd;
      mbd.threads = 1;
      return mbd_plan(problem.x0, problem.scene, spec, mbd, rng);
    }
    case Condition::kBsdFix:
    case Condition::kBsd: {
      BsdConfig bsd = cfg.bsd;
      bsd.kernel.mode = c == Condition::kBsdFix ? BandwidthMode::kFixed
                                                : BandwidthMode::kAdaptive;
      return bsd_plan(problem.x0, problem.scene, *library, bsd, rng);
    }
    case Condition::kNn:
      return nn_plan(problem.x0, problem.scene, *library, cfg.bsd.kernel,
                     cfg.bsd.margin);
  }
  throw ParameterError("unknown condition");
}

std::vector<TrialRecord> run_trial(const SystemSpec& spec,
                                   const EvalConfig& cfg,
                                   const TrajectoryLibrary* library,
                                   int trial) {
  const PlanningProblem problem = trial_problem(spec, cfg, trial);
  std::vector<TrialRecord> out;
  for (Condition c : cfg.conditions) {
    const std::uint64_t calls_before = thread_dynamics_call_count();
    const PlanResult plan = plan_condition(spec, cfg, library, problem, c,
                                           condition_rng(cfg, trial, c));
    TrialRecord r;
    r.system = spec.id;
    r.condition = c;
    r.trial = trial;
    r.seed = cfg.base_seed;
    r.dynamics_calls = thread_dynamics_call_count() - calls_before;
    r.reward = plan.reward;
    r.interventions = plan.interventions;
    r.safe = plan.safe();
    r.plan_time_ms = plan.wall_time_ms;
    r.initial_state = problem.x0;
    r.goal_index = problem.goal_space_index;
    if (c == Condition::kMbd) {
      r.executed_reward = plan.reward;
    } else {
      const ShieldedTrajectory executed = shielded_rollout(
          spec, problem.x0, plan.controls, problem.scene, cfg.scenario.margin);
      r.executed_reward = reward(executed.states, problem.scene);
    }
    out.push_back(std::move(r));
  }
  return out;
}

TrialLog trial_log_in(const std::filesystem::path& dir) {
  return {dir / "trials.jsonl", dir / "trials_timing.jsonl"};
}

std::vector<TrialRecord> load_trial_log(const TrialLog& log) {
  std::vector<TrialRecord> out;
  std::ifstream in(log.records, std::ios::binary);
  if (!in) return out;
  std::map<std::tuple<SystemId, Condition, int>, double> times;
  std::ifstream tin(log.timing, std::ios::binary);
  std::string line;
  while (tin && std::getline(tin, line)) {
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      times[{parse_system_id(j.at("system").get<std::string>()),
             parse_condition(j.at("condition").get<std::string>()),
             j.at("trial").get<int>()}] = j.at("plan_time_ms").get<double>();
    } catch (const std::exception&) {
      break;  // torn tail from an interrupted run
    }
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      break;
    }
    TrialRecord r = trial_from_json(j);
    auto it = times.find({r.system, r.condition, r.trial});
    if (it != times.end()) r.plan_time_ms = it->second;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TrialRecord> run_trials(const EvalConfig& cfg,
                                    const LibrarySet& libraries,
                                    const std::optional<TrialLog>& log,
                                    bool resume) {
  validate(cfg);
  const bool needs_library =
      std::any_of(cfg.conditions.begin(), cfg.conditions.end(), uses_library);
  std::vector<SystemSpec> specs;
  for (SystemId s : cfg.systems) {
    specs.push_back(make_system(s));
    if (!needs_library) continue;
    auto it = libraries.find(s);
    if (it == libraries.end()) {
      throw ConfigError("missing library for " + std::string(to_string(s)));
    }
    if (!(it->second.system == specs.back())) {
      throw ConfigError("library system does not match " +
                        std::string(to_string(s)));
    }
  }

  std::vector<TrialRecord> records;
  if (log && resume) records = complete_groups(load_trial_log(*log), cfg);
  std::set<std::pair<SystemId, int>> done;
  for (const TrialRecord& r : records) done.insert({r.system, r.trial});

  std::optional<std::ofstream> rec_out;
  std::optional<std::ofstream> time_out;
  if (log) {
    if (!log->records.parent_path().empty()) {
      std::filesystem::create_directories(log->records.parent_path());
    }
    rec_out.emplace(log->records, std::ios::binary | std::ios::trunc);
    time_out.emplace(log->timing, std::ios::binary | std::ios::trunc);
    if (!*rec_out || !*time_out) {
      throw ConfigError("cannot write trial log " + log->records.string());
    }
    write_records(*rec_out, *time_out, records);
  }

  std::vector<std::pair<std::size_t, int>> pending;
  for (std::size_t si = 0; si < cfg.systems.size(); ++si) {
    for (int t = 0; t < cfg.n_trials; ++t) {
      if (!done.count({cfg.systems[si], t})) pending.emplace_back(si, t);
    }
  }
  const std::size_t batch = static_cast<std::size_t>(cfg.threads) * 2;
  for (std::size_t begin = 0; begin < pending.size(); begin += batch) {
    const std::size_t end = std::min(pending.size(), begin + batch);
    std::vector<std::vector<TrialRecord>> results(end - begin);
    parallel_for(end - begin, cfg.threads, [&](std::size_t i) {
      const auto [si, t] = pending[begin + i];
      const SystemSpec& spec = specs[si];
      auto it = libraries.find(spec.id);
      results[i] = run_trial(spec, cfg, it == libraries.end() ? nullptr : &it->second, t);
    });
    for (auto& group : results) {
      if (log) write_records(*rec_out, *time_out, group);
      for (TrialRecord& r : group) records.push_back(std::move(r));
    }
  }

  // Resumed records come first in the log; restore the canonical order.
  std::stable_sort(records.begin(), records.end(),
                   [&](const TrialRecord& a, const TrialRecord& b) {
                     auto sys_index = [&](SystemId s) {
                       return std::find(cfg.systems.begin(), cfg.systems.end(), s) -
                              cfg.systems.begin();
                     };
                     if (a.system != b.system) {
                       return sys_index(a.system) < sys_index(b.system);
                     }
                     return a.trial < b.trial;
                   });
  if (log && resume) {
    rec_out->close();
    time_out->close();
    std::ofstream r2(log->records, std::ios::binary | std::ios::trunc);
    std::ofstream t2(log->timing, std::ios::binary | std::ios::trunc);
    write_records(r2, t2, records);
  }
  return records;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ParameterError("quantile of empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::pair<double, double> bootstrap_ci(std::span<const double> samples,
                                       int n_resamples, double level,
                                       RngStream rng) {
  if (samples.empty()) throw ParameterError("bootstrap of empty sample");
  if (!(level > 0.0 && level < 1.0)) {
    throw ParameterError("confidence level must lie in (0, 1)");
  }
  if (n_resamples < 1) throw ParameterError("n_resamples must be >= 1");
  const std::size_t n = samples.size();
  std::vector<double> means(static_cast<std::size_t>(n_resamples));
  for (double& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = std::min(
          n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
      sum += samples[k];
    }
    m = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double tail = 0.5 * (1.0 - level);
  return {quantile_sorted(means, tail), quantile_sorted(means, 1.0 - tail)};
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ParameterError("pearson needs two equal-length samples of size >= 2");
  }
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw ParameterError("pearson undefined for zero variance");
  }
  return sab / std::sqrt(saa * sbb);
}

std::pair<double, double> wilson_interval(int successes, int n, double z) {
  if (n <= 0 || successes < 0 || successes > n) {
    throw ParameterError("wilson_interval: need 0 <= successes <= n, n > 0");
  }
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

const CellSummary* SummaryTable::find(SystemId s, Condition c) const {
  for (const CellSummary& cell : cells) {
    if (cell.system == s && cell.condition == c) return &cell;
  }
  return nullptr;
}

double SummaryTable::ratio(SystemId s, Condition c) const {
  const CellSummary* base = find(s, Condition::kMbd);
  const CellSummary* cell = find(s, c);
  if (base == nullptr) {
    throw PreconditionError("no MBD cell for " + std::string(to_string(s)));
  }
  if (cell == nullptr) {
    throw PreconditionError("no " + std::string(to_string(c)) + " cell for " +
                            std::string(to_string(s)));
  }
  return cell->mean / base->mean;
}

std::vector<SystemId> SummaryTable::systems() const {
  std::vector<SystemId> out;
  for (const CellSummary& c : cells) {
    if (std::find(out.begin(), out.end(), c.system) == out.end()) {
      out.push_back(c.system);
    }
  }
  return out;
}

SummaryTable summarize(const std::vector<TrialRecord>& records,
                       const SummaryConfig& cfg) {
  std::map<std::pair<SystemId, Condition>, std::vector<const TrialRecord*>>
      cells;
  std::vector<SystemId> order;
  for (const TrialRecord& r : records) {
    cells[{r.system, r.condition}].push_back(&r);
    if (std::find(order.begin(), order.end(), r.system) == order.end()) {
      order.push_back(r.system);
    }
  }
  SummaryTable table;
  for (SystemId s : order) {
    for (Condition c : kAllConditions) {
      auto it = cells.find({s, c});
      if (it == cells.end()) continue;
      std::vector<const TrialRecord*> rs = it->second;
      std::sort(rs.begin(), rs.end(), [](const TrialRecord* a, const TrialRecord* b) {
        return a->trial < b->trial;
      });
      CellSummary cell;
      cell.system = s;
      cell.condition = c;
      cell.n = static_cast<int>(rs.size());
      std::vector<double> rewards;
      int safe = 0;
      for (const TrialRecord* r : rs) {
        rewards.push_back(r->reward);
        safe += r->safe ? 1 : 0;
        cell.mean_executed_reward += r->executed_reward / cell.n;
        cell.mean_time_ms += r->plan_time_ms / cell.n;
        cell.dynamics_calls += r->dynamics_calls;
      }
      cell.mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / cell.n;
      if (cell.n > 1) {
        double ss = 0.0;
        for (double v : rewards) ss += (v - cell.mean) * (v - cell.mean);
        cell.std = std::sqrt(ss / (cell.n - 1));
      }
      std::tie(cell.ci_lo, cell.ci_hi) = bootstrap_ci(
          rewards, cfg.n_resamples, cfg.level,
          RngStream(cfg.seed, purpose(StreamPurpose::kBootstrap))
              .derive({static_cast<std::uint64_t>(s),
                       static_cast<std::uint64_t>(c)}));
      cell.safety_rate = static_cast<double>(safe) / cell.n;
      std::tie(cell.safety_lo, cell.safety_hi) = wilson_interval(safe, cell.n);
      table.cells.push_back(cell);
    }
    auto mbd = cells.find({s, Condition::kMbd});
    auto fix = cells.find({s, Condition::kBsdFix});
    if (mbd != cells.end() && fix != cells.end()) {
      std::map<int, double> by_trial;
      for (const TrialRecord* r : mbd->second) by_trial[r->trial] = r->reward;
      std::vector<double> a;
      std::vector<double> b;
      for (const TrialRecord* r : fix->second) {
        auto m = by_trial.find(r->trial);
        if (m == by_trial.end()) continue;
        a.push_back(m->second);
        b.push_back(r->reward);
      }
      if (a.size() >= 2) {
        try {
          table.pearson_mbd_bsd_fix[s] = pearson(a, b);
        } catch (const ParameterError&) {
          // zero variance: correlation undefined, left out
        }
      }
    }
  }
  return table;
}

void export_figures(const std::vector<TrialRecord>& records,
                    const SummaryTable& table,
                    const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  auto sys = [](SystemId s) { return std::string(to_string(s)); };
  auto cond = [](Condition c) { return std::string(to_string(c)); };
  auto ratio_or_blank = [&](SystemId s, Condition c) -> std::string {
    return table.find(s, Condition::kMbd) ? fmt(table.ratio(s, c)) : "";
  };

  {
    std::ofstream out = open_csv(outdir / "table1.csv");
    out << "system,condition,n,mean,std,ci_lo,ci_hi,safety_rate,safety_lo,"
           "safety_hi,ratio_vs_mbd,mean_executed_reward,dynamics_calls\n";
    for (const CellSummary& c : table.cells) {
      out << sys(c.system) << ',' << cond(c.condition) << ',' << c.n << ','
          << fmt(c.mean) << ',' << fmt(c.std) << ',' << fmt(c.ci_lo) << ','
          << fmt(c.ci_hi) << ',' << fmt(c.safety_rate) << ','
          << fmt(c.safety_lo) << ',' << fmt(c.safety_hi) << ','
          << ratio_or_blank(c.system, c.condition) << ','
          << fmt(c.mean_executed_reward) << ',' << c.dynamics_calls << '\n';
    }
  }
  {
    std::ofstream out = open_csv(outdir / "fig2_means.csv");
    out << "system,state_dim,condition,mean,ci_lo,ci_hi\n";
    for (const CellSummary& c : table.cells) {
      out << sys(c.system) << ',' << state_dim(c.system) << ','
          << cond(c.condition) << ',' << fmt(c.mean) << ',' << fmt(c.ci_lo)
          << ',' << fmt(c.ci_hi) << '\n';
    }
  }
  {
    std::ofstream out = open_csv(outdir / "fig3_ratio_vs_dim.csv");
    out << "system,state_dim,condition,ratio_pct\n";
    for (const CellSummary& c : table.cells) {
      if (c.condition == Condition::kMbd) continue;
      out << sys(c.system) << ',' << state_dim(c.system) << ','
          << cond(c.condition) << ','
          << fmt(100.0 * table.ratio(c.system, c.condition)) << '\n';
    }
  }
  {
    std::ofstream out = open_csv(outdir / "fig4_per_trial.csv");
    out << "system,condition,trial,reward,executed_reward,safe\n";
    for (const CellSummary& c : table.cells) {
      std::vector<const TrialRecord*> rs;
      for (const TrialRecord& r : records) {
        if (r.system == c.system && r.condition == c.condition) rs.push_back(&r);
      }
      std::sort(rs.begin(), rs.end(), [](auto* a, auto* b) { return a->trial < b->trial; });
      for (const TrialRecord* r : rs) {
        out << sys(r->system) << ',' << cond(r->condition) << ',' << r->trial
            << ',' << fmt(r->reward) << ',' << fmt(r->executed_reward) << ','
            << (r->safe ? 1 : 0) << '\n';
      }
    }
  }
  {
    std::ofstream out = open_csv(outdir / "fig5_paired.csv");
    out << "system,trial,mbd_reward,bsd_fix_reward,pearson_r\n";
    for (SystemId s : table.systems()) {
      std::map<int, double> mbd;
      std::map<int, double> fix;
      for (const TrialRecord& r : records) {
        if (r.system != s) continue;
        if (r.condition == Condition::kMbd) mbd[r.trial] = r.reward;
        if (r.condition == Condition::kBsdFix) fix[r.trial] = r.reward;
      }
      auto pr = table.pearson_mbd_bsd_fix.find(s);
      const std::string r_text =
          pr == table.pearson_mbd_bsd_fix.end() ? "" : fmt(pr->second);
      for (const auto& [t, m] : mbd) {
        auto f = fix.find(t);
        if (f == fix.end()) continue;
        out << sys(s) << ',' << t << ',' << fmt(m) << ',' << fmt(f->second)
            << ',' << r_text << '\n';
      }
    }
  }
  {
    std::ofstream out = open_csv(outdir / "fig6_safety_time.csv");
    out << "system,condition,safety_rate,safety_lo,safety_hi\n";
    for (const CellSummary& c : table.cells) {
      out << sys(c.system) << ',' << cond(c.condition) << ','
          << fmt(c.safety_rate) << ',' << fmt(c.safety_lo) << ','
          << fmt(c.safety_hi) << '\n';
    }
  }
  {
    // Wall-clock columns; not reproducible byte for byte.
    std::ofstream out = open_csv(outdir / "timing.csv");
    out << "system,condition,mean_time_ms\n";
    for (const CellSummary& c : table.cells) {
      out << sys(c.system) << ',' << cond(c.condition) << ','
          << fmt(c.mean_time_ms) << '\n';
    }
  }
}

}  // namespace bsd
