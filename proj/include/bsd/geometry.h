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

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bsd {

using Vec2 = Eigen::Vector2d;

struct Aabb {
  Vec2 lo;
  Vec2 hi;

  bool overlaps(const Aabb& o) const {
    return lo.x() <= o.hi.x() && o.lo.x() <= hi.x() && lo.y() <= o.hi.y() &&
           o.lo.y() <= hi.y();
  }
  bool contains(const Aabb& o) const {
    return lo.x() <= o.lo.x() && o.hi.x() <= hi.x() && lo.y() <= o.lo.y() &&
           o.hi.y() <= hi.y();
  }
};

// Oriented rectangle, vertices counter-clockwise.
struct Quad {
  std::array<Vec2, 4> v;

  Aabb bounds() const;
  Vec2 center() const { return 0.25 * (v[0] + v[1] + v[2] + v[3]); }
};

// Convex polygon with cached bounds; vertices counter-clockwise.
class ConvexPolygon {
 public:
  ConvexPolygon() = default;
  explicit ConvexPolygon(std::vector<Vec2> vertices);

  static ConvexPolygon from_box(const Aabb& box);

  std::span<const Vec2> vertices() const { return vertices_; }
  const Aabb& bounds() const { return bounds_; }
  // True when the polygon equals its bounding box.
  bool is_box() const { return is_box_; }

 private:
  std::vector<Vec2> vertices_;
  Aabb bounds_{};
  bool is_box_ = false;
};

// Rectangle posed at `origin` with heading `theta`, spanning [-rear, front]
// along the heading and [-width/2, width/2] across it.
Quad oriented_rect(const Vec2& origin, double theta, double front, double rear,
                   double width);

// Separating-axis test for convex polygons. Touching counts as intersecting.
bool intersects(std::span<const Vec2> a, std::span<const Vec2> b);

// Oriented rectangle in centre / half-extent form, for fast box tests.
struct OrientedBox {
  Vec2 center;
  Vec2 axis;  // unit heading
  double half_length = 0.0;
  double half_width = 0.0;

  Aabb bounds() const;
};

OrientedBox oriented_box(const Vec2& origin, double theta, double front,
                         double rear, double width);
// Same, with the unit heading vector already computed.
OrientedBox oriented_box(const Vec2& origin, const Vec2& heading, double front,
                         double rear, double width);

// Same predicate as intersects() for an oriented box against an axis-aligned
// box.
bool intersects(const OrientedBox& a, const Aabb& b);

}  // namespace bsd
