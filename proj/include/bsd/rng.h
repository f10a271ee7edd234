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
#include <initializer_list>
#include <limits>
#include <random>

#include "bsd/types.h"

namespace bsd {

// Counter-based random stream. The output sequence is a pure function of
// (base_seed, stream_id), so a stream can be re-created anywhere (another
// thread, another process) and yields the same draws.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t base_seed, std::uint64_t stream_id);

  std::uint64_t base_seed() const { return base_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Child stream whose id mixes this stream's id with `sub`. Children with
  // distinct `sub` values are independent of each other and of the parent.
  RngStream derive(std::uint64_t sub) const;
  RngStream derive(std::initializer_list<std::uint64_t> path) const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

  double uniform();  // [0, 1)
  double normal();

 private:
  std::uint64_t base_seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Well-known purposes, mixed into stream ids so that draws for different
// roles never alias.
enum class StreamPurpose : std::uint64_t {
  kScenario = 1,
  kInitialState = 2,
  kPlannerInit = 3,
  kCandidates = 4,
  kRenoise = 5,
  kMultinomial = 6,
  kBootstrap = 7,
  kDatagen = 8,
  kTheory = 9,
  kGoal = 10,
};

inline std::uint64_t purpose(StreamPurpose p) {
  return static_cast<std::uint64_t>(p);
}

std::uint64_t mix64(std::uint64_t x);

// i.i.d. standard normal rows x cols matrix drawn in row-major order.
RowMatrix draw_gaussian(Eigen::Index rows, Eigen::Index cols, RngStream& rng);

}  // namespace bsd
