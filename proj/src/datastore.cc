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

#include "bsd/datastore.h"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bsd/parallel.h"

namespace bsd {
namespace {

constexpr std::string_view kFormatName = "bsd-trajectory-library";
constexpr std::string_view kChecksumKey = ",\"checksum\":\"";
// ,"checksum":"xxxxxxxx"}
constexpr std::size_t kChecksumSuffixLen = kChecksumKey.size() + 8 + 2;

std::uint32_t crc_of(std::string_view a, std::string_view b) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(a.data()),
              static_cast<uInt>(a.size()));
  crc = crc32(crc, reinterpret_cast<const Bytef*>("\n"), 1);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(b.data()),
              static_cast<uInt>(b.size()));
  return static_cast<std::uint32_t>(crc);
}

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", v);
  return buf;
}

nlohmann::json matrix_json(const RowMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows.push_back(
        std::vector<double>(m.row(i).data(), m.row(i).data() + m.cols()));
  }
  return rows;
}

RowMatrix matrix_from_json(const nlohmann::json& j, Eigen::Index rows,
                           Eigen::Index cols, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw LoadError(std::string("dimension mismatch in ") + what);
  }
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw LoadError(std::string("dimension mismatch in ") + what);
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

}  // namespace

double TrajectoryLibrary::normalized_reward(std::size_t j) const {
  const double range = reward_stats.max - reward_stats.min;
  if (!(range > 0.0)) return 0.0;
  return (records[j].reward - reward_stats.mean) / range;
}

RewardStats compute_reward_stats(const std::vector<TrajectoryRecord>& records) {
  RewardStats s;
  if (records.empty()) return s;
  s.min = s.max = records[0].reward;
  double sum = 0.0;
  for (const TrajectoryRecord& r : records) {
    sum += r.reward;
    s.min = std::min(s.min, r.reward);
    s.max = std::max(s.max, r.reward);
  }
  s.mean = sum / static_cast<double>(records.size());
  return s;
}

void validate(const TrajectoryLibrary& library) {
  if (library.records.empty()) throw ConfigError("trajectory library is empty");
  const SystemSpec& s = library.system;
  for (const TrajectoryRecord& r : library.records) {
    if (r.controls.rows() != s.horizon || r.controls.cols() != s.n_u ||
        r.states.rows() != s.horizon + 1 || r.states.cols() != s.n_x) {
      throw DimensionError("library record dimensions do not match system");
    }
    if (!std::isfinite(r.reward)) {
      throw NumericError("library record has a non-finite reward");
    }
  }
}

PlanningProblem collection_problem(const SystemSpec& spec,
                                   const ScenarioConfig& scenario,
                                   std::uint64_t base_seed,
                                   std::uint64_t attempt) {
  return sample_problem(
      spec, scenario,
      RngStream(base_seed, purpose(StreamPurpose::kDatagen)).derive(attempt));
}

TrajectoryLibrary collect_library(const SystemSpec& spec,
                                  const CollectConfig& cfg) {
  validate(spec);
  validate(cfg.oracle);
  if (cfg.n_target < 1) throw ConfigError("collect_library: n_target < 1");
  MbdConfig oracle = cfg.oracle;
  oracle.threads = 1;

  TrajectoryLibrary lib;
  lib.system = spec;
  lib.provenance = {"mbd-oracle", cfg.base_seed};
  const std::uint64_t max_attempts = 10ull * static_cast<std::uint64_t>(cfg.n_target);
  std::uint64_t next_attempt = 0;
  while (static_cast<int>(lib.records.size()) < cfg.n_target &&
         next_attempt < max_attempts) {
    const std::size_t batch = std::min<std::uint64_t>(
        static_cast<std::uint64_t>(cfg.n_target) - lib.records.size(),
        max_attempts - next_attempt);
    std::vector<std::optional<TrajectoryRecord>> results(batch);
    parallel_for(batch, cfg.threads, [&](std::size_t b) {
      const std::uint64_t attempt = next_attempt + b;
      const PlanningProblem prob =
          collection_problem(spec, cfg.scenario, cfg.base_seed, attempt);
      const ParkingScene& scene = prob.scene;
      const RngStream planner_rng =
          RngStream(cfg.base_seed, purpose(StreamPurpose::kDatagen))
              .derive({attempt, purpose(StreamPurpose::kPlannerInit)});
      PlanResult plan = mbd_plan(prob.x0, scene, spec, oracle, planner_rng);
      if (plan.reward >= cfg.min_reward) {
        results[b] = TrajectoryRecord{std::move(plan.controls),
                                      std::move(plan.states), plan.reward,
                                      prob.goal_space_index};
      }
    });
    for (auto& r : results) {
      if (r && static_cast<int>(lib.records.size()) < cfg.n_target) {
        lib.records.push_back(std::move(*r));
      }
    }
    next_attempt += batch;
  }
  if (static_cast<int>(lib.records.size()) < cfg.n_target) {
    throw NumericError("oracle too weak");
  }
  lib.reward_stats = compute_reward_stats(lib.records);
  return lib;
}

std::string serialize_library(const TrajectoryLibrary& library) {
  validate(library);
  std::string body;
  for (const TrajectoryRecord& r : library.records) {
    nlohmann::ordered_json rec;
    rec["goal"] = r.goal_space_index;
    rec["reward"] = r.reward;
    rec["controls"] = matrix_json(r.controls);
    rec["states"] = matrix_json(r.states);
    body += rec.dump();
    body += '\n';
  }
  const SystemSpec& s = library.system;
  nlohmann::ordered_json header;
  header["format"] = kFormatName;
  header["version"] = kLibraryFormatVersion;
  header["system"] = to_json(s);
  header["n_records"] = library.size();
  header["horizon"] = s.horizon;
  header["n_x"] = s.n_x;
  header["n_u"] = s.n_u;
  header["reward_stats"] = {{"mean", library.reward_stats.mean},
                            {"min", library.reward_stats.min},
                            {"max", library.reward_stats.max}};
  header["provenance"] = {{"generator", library.provenance.generator},
                          {"base_seed", library.provenance.base_seed}};
  std::string head = header.dump();
  const std::uint32_t crc = crc_of(head, body);
  head.pop_back();  // closing brace
  head += kChecksumKey;
  head += hex32(crc);
  head += "\"}";
  return head + "\n" + body;
}

void save_library(const TrajectoryLibrary& library,
                  const std::filesystem::path& path) {
  const std::string bytes = serialize_library(library);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("write failed: " + path.string());
}

TrajectoryLibrary parse_library(const std::string& bytes,
                                std::optional<SystemId> expected) {
  const std::size_t eol = bytes.find('\n');
  if (eol == std::string::npos) throw LoadError("missing header line");
  const std::string_view line(bytes.data(), eol);
  const std::string_view body(bytes.data() + eol + 1, bytes.size() - eol - 1);
  if (line.size() < kChecksumSuffixLen ||
      line.substr(line.size() - kChecksumSuffixLen, kChecksumKey.size()) !=
          kChecksumKey ||
      line.back() != '}') {
    throw LoadError("header has no checksum field");
  }
  const std::string_view stored =
      line.substr(line.size() - 10, 8);  // 8 hex digits before "}
  std::string unsigned_head(line.substr(0, line.size() - kChecksumSuffixLen));
  unsigned_head += '}';
  if (hex32(crc_of(unsigned_head, body)) != stored) {
    throw LoadError("checksum mismatch");
  }

  TrajectoryLibrary lib;
  try {
    const nlohmann::json header = nlohmann::json::parse(line);
    if (header.at("format").get<std::string>() != kFormatName) {
      throw LoadError("not a trajectory library file");
    }
    if (header.at("version").get<int>() != kLibraryFormatVersion) {
      throw LoadError("version mismatch: file has version " +
                      header.at("version").dump());
    }
    try {
      lib.system = system_from_json(header.at("system"));
    } catch (const ConfigError& e) {
      throw LoadError(std::string("dimension mismatch: ") + e.what());
    }
    if (expected && lib.system.id != *expected) {
      throw LoadError("system mismatch: file holds " +
                      std::string(to_string(lib.system.id)) + ", requested " +
                      std::string(to_string(*expected)));
    }
    const SystemSpec& s = lib.system;
    if (header.at("horizon").get<int>() != s.horizon ||
        header.at("n_x").get<int>() != s.n_x ||
        header.at("n_u").get<int>() != s.n_u) {
      throw LoadError("dimension mismatch between header and system");
    }
    const auto n_records = header.at("n_records").get<std::size_t>();
    lib.provenance.generator =
        header.at("provenance").at("generator").get<std::string>();
    lib.provenance.base_seed =
        header.at("provenance").at("base_seed").get<std::uint64_t>();

    std::size_t pos = 0;
    while (pos < body.size()) {
      const std::size_t end = body.find('\n', pos);
      if (end == std::string_view::npos) {
        throw LoadError("record line is not newline-terminated");
      }
      const nlohmann::json rec =
          nlohmann::json::parse(body.substr(pos, end - pos));
      TrajectoryRecord r;
      r.goal_space_index = rec.at("goal").get<int>();
      r.reward = rec.at("reward").get<double>();
      r.controls = matrix_from_json(rec.at("controls"), s.horizon, s.n_u,
                                    "controls");
      r.states = matrix_from_json(rec.at("states"), s.horizon + 1, s.n_x,
                                  "states");
      lib.records.push_back(std::move(r));
      pos = end + 1;
    }
    if (lib.records.size() != n_records) {
      throw LoadError("dimension mismatch: header promises " +
                      std::to_string(n_records) + " records, file has " +
                      std::to_string(lib.records.size()));
    }
    lib.reward_stats = compute_reward_stats(lib.records);
    const RewardStats stated{header.at("reward_stats").at("mean").get<double>(),
                             header.at("reward_stats").at("min").get<double>(),
                             header.at("reward_stats").at("max").get<double>()};
    if (!(stated == lib.reward_stats)) {
      throw LoadError("reward_stats in header disagree with records");
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed library: ") + e.what());
  }
  if (lib.records.empty()) throw LoadError("library has no records");
  return lib;
}

TrajectoryLibrary load_library(const std::filesystem::path& path,
                               std::optional<SystemId> expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open library: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_library(ss.str(), expected);
}

}  // namespace bsd
