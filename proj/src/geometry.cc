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

#include "bsd/geometry.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bsd {
namespace {

Aabb bounds_of(std::span<const Vec2> pts) {
  Aabb b{pts[0], pts[0]};
  for (const Vec2& p : pts.subspan(1)) {
    b.lo = b.lo.cwiseMin(p);
    b.hi = b.hi.cwiseMax(p);
  }
  return b;
}

// True when some edge normal of `a` separates the two vertex sets.
bool has_separating_edge(std::span<const Vec2> a, std::span<const Vec2> b) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 edge = a[(i + 1) % n] - a[i];
    const Vec2 axis(-edge.y(), edge.x());
    double a_min = std::numeric_limits<double>::infinity();
    double a_max = -a_min;
    for (const Vec2& p : a) {
      const double d = axis.dot(p);
      a_min = std::min(a_min, d);
      a_max = std::max(a_max, d);
    }
    double b_min = std::numeric_limits<double>::infinity();
    double b_max = -b_min;
    for (const Vec2& p : b) {
      const double d = axis.dot(p);
      b_min = std::min(b_min, d);
      b_max = std::max(b_max, d);
    }
    if (a_max < b_min || b_max < a_min) return true;
  }
  return false;
}

}  // namespace

Aabb Quad::bounds() const { return bounds_of(v); }

ConvexPolygon::ConvexPolygon(std::vector<Vec2> vertices)
    : vertices_(std::move(vertices)) {
  bounds_ = bounds_of(vertices_);
  if (vertices_.size() == 4) {
    is_box_ = true;
    for (const Vec2& p : vertices_) {
      const bool on_x = p.x() == bounds_.lo.x() || p.x() == bounds_.hi.x();
      const bool on_y = p.y() == bounds_.lo.y() || p.y() == bounds_.hi.y();
      is_box_ = is_box_ && on_x && on_y;
    }
  }
}

ConvexPolygon ConvexPolygon::from_box(const Aabb& box) {
  return ConvexPolygon({box.lo, Vec2(box.hi.x(), box.lo.y()), box.hi,
                        Vec2(box.lo.x(), box.hi.y())});
}

Quad oriented_rect(const Vec2& origin, double theta, double front, double rear,
                   double width) {
  const Vec2 fwd(std::cos(theta), std::sin(theta));
  const Vec2 left(-fwd.y(), fwd.x());
  const double hw = 0.5 * width;
  return Quad{{origin - rear * fwd - hw * left, origin + front * fwd - hw * left,
               origin + front * fwd + hw * left,
               origin - rear * fwd + hw * left}};
}

bool intersects(std::span<const Vec2> a, std::span<const Vec2> b) {
  return !has_separating_edge(a, b) && !has_separating_edge(b, a);
}

OrientedBox oriented_box(const Vec2& origin, double theta, double front,
                         double rear, double width) {
  return oriented_box(origin, Vec2(std::cos(theta), std::sin(theta)), front,
                      rear, width);
}

OrientedBox oriented_box(const Vec2& origin, const Vec2& heading, double front,
                         double rear, double width) {
  OrientedBox b;
  b.axis = heading;
  b.center = origin + 0.5 * (front - rear) * b.axis;
  b.half_length = 0.5 * (front + rear);
  b.half_width = 0.5 * width;
  return b;
}

Aabb OrientedBox::bounds() const {
  const double ax = std::abs(axis.x());
  const double ay = std::abs(axis.y());
  const Vec2 ext(ax * half_length + ay * half_width,
                 ay * half_length + ax * half_width);
  return {center - ext, center + ext};
}

bool intersects(const OrientedBox& a, const Aabb& b) {
  if (!a.bounds().overlaps(b)) return false;
  const Vec2 bc = 0.5 * (b.lo + b.hi);
  const Vec2 bh = 0.5 * (b.hi - b.lo);
  const Vec2 d = bc - a.center;
  const Vec2 left(-a.axis.y(), a.axis.x());
  const double r_fwd =
      std::abs(a.axis.x()) * bh.x() + std::abs(a.axis.y()) * bh.y();
  if (std::abs(a.axis.dot(d)) > a.half_length + r_fwd) return false;
  const double r_left = std::abs(left.x()) * bh.x() + std::abs(left.y()) * bh.y();
  return std::abs(left.dot(d)) <= a.half_width + r_left;
}

}  // namespace bsd
