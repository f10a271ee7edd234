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

#include "bsd/rng.h"

namespace bsd {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

RngStream::RngStream(std::uint64_t base_seed, std::uint64_t stream_id)
    : base_seed_(base_seed),
      stream_id_(stream_id),
      key_(mix64(mix64(base_seed + kGolden) ^ (stream_id * kGolden + 1))) {}

RngStream RngStream::derive(std::uint64_t sub) const {
  return RngStream(base_seed_, mix64(stream_id_ ^ mix64(sub + kGolden)));
}

RngStream RngStream::derive(std::initializer_list<std::uint64_t> path) const {
  RngStream s = *this;
  for (std::uint64_t p : path) s = s.derive(p);
  return s;
}

RngStream::result_type RngStream::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RngStream::normal() { return normal_(*this); }

RowMatrix draw_gaussian(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  RowMatrix out(rows, cols);
  double* p = out.data();
  for (Eigen::Index i = 0; i < out.size(); ++i) p[i] = rng.normal();
  return out;
}

}  // namespace bsd
