// Copyright 2026 The massdist Authors
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

#ifndef MASSDIST_PLANAR_HPP_
#define MASSDIST_PLANAR_HPP_

#include <cmath>

#include <Eigen/Dense>

namespace massdist {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;

// Planar convention used throughout the library: a positive angle tilts +y
// toward +x, so the three primitives below share one handedness.
//   rotation(w) * r        rotates r by angle w
//   spin_cross(w, r)       velocity of a point at offset r under spin rate w
//   cross2(f, r)           torque of force f acting through lever arm r
// d/dw [rotation(w) * r] at w = 0 equals spin_cross(1, r), and the friction
// torque -s * cross2(vhat, r) opposes the spin that produced vhat.

inline Mat2 rotation(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat2 r;
  r << c, s, -s, c;
  return r;
}

inline double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

inline Vec2 spin_cross(double w, const Vec2& r) {
  return Vec2(w * r.y(), -w * r.x());
}

// Angle wrapped to (-pi, pi].
inline double wrap_angle(double angle) {
  double a = std::fmod(angle + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

}  // namespace massdist

#endif  // MASSDIST_PLANAR_HPP_
