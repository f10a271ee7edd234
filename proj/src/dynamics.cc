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

#include "bsd/dynamics.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bsd {
namespace {

std::atomic<std::uint64_t> g_dynamics_calls{0};
thread_local bool t_poisoned = false;
thread_local std::uint64_t t_dynamics_calls = 0;

void check_entry() {
  g_dynamics_calls.fetch_add(1, std::memory_order_relaxed);
  ++t_dynamics_calls;
  if (t_poisoned) {
    throw NumericError("dynamics oracle invoked on a model-free path");
  }
}

}  // namespace

std::string_view to_string(SystemId id) {
  switch (id) {
    case SystemId::kBicycle: return "Bicycle";
    case SystemId::kTT2D: return "TT2D";
    case SystemId::kNTrailer: return "NTrailer";
    case SystemId::kAccTT2D: return "AccTT2D";
  }
  return "?";
}

SystemId parse_system_id(std::string_view name) {
  for (SystemId id : {SystemId::kBicycle, SystemId::kTT2D, SystemId::kNTrailer,
                      SystemId::kAccTT2D}) {
    if (name == to_string(id)) return id;
  }
  throw ConfigError("unknown system: " + std::string(name));
}

int SystemSpec::n_trailers() const {
  switch (id) {
    case SystemId::kBicycle: return 0;
    case SystemId::kNTrailer: return 2;
    default: return 1;
  }
}

bool SystemSpec::is_angle_channel(int channel) const {
  return channel >= 2 && channel <= 2 + n_trailers();
}

int SystemSpec::velocity_channel() const {
  return id == SystemId::kAccTT2D ? 4 : -1;
}

SystemSpec make_system(SystemId id) {
  SystemSpec s;
  s.id = id;
  const BodyShape tractor{3.0, 0.8, 1.8};
  const BodyShape trailer{1.8, 1.0, 1.8};
  switch (id) {
    case SystemId::kBicycle:
      s.n_x = 3;
      break;
    case SystemId::kTT2D:
      s.n_x = 4;
      break;
    case SystemId::kNTrailer:
      s.n_x = 5;
      break;
    case SystemId::kAccTT2D:
      // x, y, theta1, theta2, v, a (last applied acceleration).
      s.n_x = 6;
      break;
  }
  s.n_u = 2;
  if (id == SystemId::kAccTT2D) {
    s.control_min = {-s.a_max, -0.6};
    s.control_max = {s.a_max, 0.6};
  } else {
    s.control_min = {-s.v_max, -0.6};
    s.control_max = {s.v_max, 0.6};
  }
  s.geometry.bodies.push_back(tractor);
  for (int i = 0; i < s.n_trailers(); ++i) s.geometry.bodies.push_back(trailer);
  return s;
}

void validate(const SystemSpec& s) {
  static constexpr int kDims[] = {3, 4, 5, 6};
  if (s.n_x != kDims[static_cast<int>(s.id)] || s.n_u != 2) {
    throw ConfigError("system dimensions do not match system id");
  }
  if (!(s.dt > 0.0) || s.horizon < 1) {
    throw ConfigError("system needs dt > 0 and horizon >= 1");
  }
  if (static_cast<int>(s.control_min.size()) != s.n_u ||
      static_cast<int>(s.control_max.size()) != s.n_u) {
    throw ConfigError("control bounds must have n_u entries");
  }
  for (int c = 0; c < s.n_u; ++c) {
    if (!(s.control_min[c] < s.control_max[c])) {
      throw ConfigError("control bound min must be < max");
    }
  }
  if (static_cast<int>(s.geometry.bodies.size()) != 1 + s.n_trailers()) {
    throw ConfigError("body count does not match system");
  }
  for (const BodyShape& b : s.geometry.bodies) {
    if (!(b.front + b.rear > 0.0) || !(b.width > 0.0)) {
      throw ConfigError("vehicle bodies need positive dimensions");
    }
  }
  if (!(s.wheelbase > 0.0) || !(s.hitch_d1 > 0.0) || !(s.hitch_d2 > 0.0)) {
    throw ConfigError("wheelbase and hitch lengths must be positive");
  }
}

nlohmann::json to_json(const SystemSpec& s) {
  nlohmann::json bodies = nlohmann::json::array();
  for (const BodyShape& b : s.geometry.bodies) {
    bodies.push_back({{"front", b.front}, {"rear", b.rear}, {"width", b.width}});
  }
  return {{"system_id", std::string(to_string(s.id))},
          {"n_x", s.n_x},
          {"n_u", s.n_u},
          {"dt", s.dt},
          {"horizon", s.horizon},
          {"control_min", s.control_min},
          {"control_max", s.control_max},
          {"wheelbase", s.wheelbase},
          {"hitch_d1", s.hitch_d1},
          {"hitch_d2", s.hitch_d2},
          {"hitch_limit", s.hitch_limit},
          {"v_max", s.v_max},
          {"a_max", s.a_max},
          {"bodies", bodies}};
}

SystemSpec system_from_json(const nlohmann::json& j) {
  try {
    SystemSpec s;
    s.id = parse_system_id(j.at("system_id").get<std::string>());
    s.n_x = j.at("n_x").get<int>();
    s.n_u = j.at("n_u").get<int>();
    s.dt = j.at("dt").get<double>();
    s.horizon = j.at("horizon").get<int>();
    s.control_min = j.at("control_min").get<std::vector<double>>();
    s.control_max = j.at("control_max").get<std::vector<double>>();
    s.wheelbase = j.at("wheelbase").get<double>();
    s.hitch_d1 = j.at("hitch_d1").get<double>();
    s.hitch_d2 = j.at("hitch_d2").get<double>();
    s.hitch_limit = j.at("hitch_limit").get<double>();
    s.v_max = j.at("v_max").get<double>();
    s.a_max = j.at("a_max").get<double>();
    for (const auto& b : j.at("bodies")) {
      s.geometry.bodies.push_back({b.at("front").get<double>(),
                                   b.at("rear").get<double>(),
                                   b.at("width").get<double>()});
    }
    validate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed system spec: ") + e.what());
  }
}

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (a > -std::numbers::pi && a <= std::numbers::pi) return a;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

std::uint64_t dynamics_call_count() {
  return g_dynamics_calls.load(std::memory_order_relaxed);
}

std::uint64_t thread_dynamics_call_count() { return t_dynamics_calls; }

DynamicsPoison::DynamicsPoison() : previous_(t_poisoned) { t_poisoned = true; }
DynamicsPoison::~DynamicsPoison() { t_poisoned = previous_; }

void step_into(const SystemSpec& s, std::span<const double> x,
               std::span<const double> u, std::span<double> out) {
  check_entry();
  if (static_cast<int>(x.size()) != s.n_x ||
      static_cast<int>(u.size()) != s.n_u ||
      static_cast<int>(out.size()) != s.n_x) {
    throw DimensionError("step: dimension mismatch");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw NumericError("step: non-finite state");
  }
  for (double v : u) {
    if (!std::isfinite(v)) throw NumericError("step: non-finite control");
  }
  const double u0 = std::clamp(u[0], s.control_min[0], s.control_max[0]);
  const double steer = std::clamp(u[1], s.control_min[1], s.control_max[1]);
  const double dt = s.dt;

  // Longitudinal speed this step: a control, or a state for AccTT2D.
  const double v = s.id == SystemId::kAccTT2D ? x[4] : u0;
  const double th1 = x[2];
  out[0] = x[0] + dt * v * std::cos(th1);
  out[1] = x[1] + dt * v * std::sin(th1);
  out[2] = wrap_angle(th1 + dt * v / s.wheelbase * std::tan(steer));
  if (s.n_trailers() >= 1) {
    const double th2 = x[3];
    out[3] = wrap_angle(th2 + dt * v / s.hitch_d1 * std::sin(th1 - th2));
    if (s.id == SystemId::kNTrailer) {
      const double th3 = x[4];
      const double v1 = v * std::cos(th1 - th2);
      out[4] = wrap_angle(th3 + dt * v1 / s.hitch_d2 * std::sin(th2 - th3));
    }
  }
  if (s.id == SystemId::kAccTT2D) {
    out[4] = std::clamp(x[4] + dt * u0, -s.v_max, s.v_max);
    out[5] = u0;
  }
}

State step(const SystemSpec& s, const State& x, const Eigen::VectorXd& u) {
  State out(s.n_x);
  step_into(s, {x.data(), static_cast<std::size_t>(x.size())},
            {u.data(), static_cast<std::size_t>(u.size())},
            {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

void clamp_controls(const SystemSpec& s, ControlSequence& controls) {
  for (Eigen::Index t = 0; t < controls.rows(); ++t) {
    for (int c = 0; c < s.n_u; ++c) {
      controls(t, c) =
          std::clamp(controls(t, c), s.control_min[c], s.control_max[c]);
    }
  }
}

StateTrajectory rollout(const SystemSpec& s, const State& x0,
                        const ControlSequence& controls) {
  if (x0.size() != s.n_x || controls.cols() != s.n_u) {
    throw DimensionError("rollout: dimension mismatch");
  }
  StateTrajectory traj(controls.rows() + 1, s.n_x);
  traj.row(0) = x0.transpose();
  const auto nx = static_cast<std::size_t>(s.n_x);
  const auto nu = static_cast<std::size_t>(s.n_u);
  for (Eigen::Index t = 0; t < controls.rows(); ++t) {
    step_into(s, {traj.row(t).data(), nx}, {controls.row(t).data(), nu},
              {traj.row(t + 1).data(), nx});
  }
  return traj;
}

}  // namespace bsd
