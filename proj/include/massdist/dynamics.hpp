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

#ifndef MASSDIST_DYNAMICS_HPP_
#define MASSDIST_DYNAMICS_HPP_

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "massdist/error.hpp"
#include "massdist/object_model.hpp"
#include "massdist/planar.hpp"

namespace massdist {

// Planar state: pose [x, y, heading] and velocity [vx, vy, spin rate].
// The pose translation tracks the body-frame origin (not the center of
// mass), which keeps states parameter-independent.
struct ObjectState {
  Vec3 pose = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

// External perturbation [fx, fy, torque] applied at one grasp particle.
// particle < 0 means no input this step.
struct WrenchInput {
  int particle = -1;
  Vec3 wrench = Vec3::Zero();
};

struct SimConfig {
  double dt = 0.01;          // s, 100 Hz sensor rate
  double gravity = kDefaultGravity;
  // Particles slower than this contribute no sliding friction. The default
  // sits well below commanded particle speeds but above the O(w^2 dt r)
  // residual speed a discretized pivot particle shows during rotations.
  double velocity_epsilon = 1e-4;  // m/s
};

struct Trajectory {
  SimConfig config;
  std::vector<ObjectState> states;  // length T+1
  std::vector<WrenchInput> inputs;  // length T

  int step_count() const { return static_cast<int>(inputs.size()); }
};

// World-frame particle positions and velocities for one state.
struct WorldKinematics {
  std::vector<Vec2> positions;
  std::vector<Vec2> velocities;
};

inline WorldKinematics world_kinematics(const ParticleModel& model,
                                        const ObjectState& state) {
  WorldKinematics k;
  const int n = model.particle_count();
  k.positions.resize(n);
  k.velocities.resize(n);
  const Mat2 rot = rotation(state.pose(2));
  const Vec2 origin = state.pose.head<2>();
  const Vec2 v_origin = state.velocity.head<2>();
  const double w = state.velocity(2);
  for (int i = 0; i < n; ++i) {
    k.positions[i] = rot * model.positions[i] + origin;
    k.velocities[i] = v_origin + spin_cross(w, k.positions[i] - origin);
  }
  return k;
}

inline Vec2 world_com(const ObjectState& state, const Vec2& com_body) {
  return rotation(state.pose(2)) * com_body + state.pose.head<2>();
}

// Per-particle friction direction columns at one state:
//   column i = [vhat_x, vhat_y, cross2(vhat, p_i - com_world)]
// zeroed for non-contact particles and particles below velocity_epsilon.
// The friction force on particle i is -s_{group(i)} times its column, which
// makes this the shared basis for forward dynamics, wrench synthesis and the
// regression blocks, so those stay identities of each other.
inline Eigen::Matrix3Xd friction_basis(const ParticleModel& model,
                                       const GroupMaps& maps,
                                       const WorldKinematics& kin,
                                       const Vec2& com_world,
                                       const SimConfig& config) {
  const int n = model.particle_count();
  Eigen::Matrix3Xd basis = Eigen::Matrix3Xd::Zero(3, n);
  for (int i = 0; i < n; ++i) {
    if (!maps.contact_group[i]) continue;
    const double speed = kin.velocities[i].norm();
    if (speed <= config.velocity_epsilon) continue;
    const Vec2 vhat = kin.velocities[i] / speed;
    basis(0, i) = vhat.x();
    basis(1, i) = vhat.y();
    basis(2, i) = cross2(vhat, kin.positions[i] - com_world);
  }
  return basis;
}

// Net input contribution [ux, uy, uw + cross2(u_xy, p_grasp - com_world)].
inline Vec3 input_term(const WrenchInput& input, const WorldKinematics& kin,
                       const Vec2& com_world) {
  if (input.particle < 0) return Vec3::Zero();
  Vec3 f = input.wrench;
  f(2) += cross2(input.wrench.head<2>(),
                 kin.positions[input.particle] - com_world);
  return f;
}

namespace detail {

inline Vec3 apply_inverse_mass(double mass, double inertia_cm,
                               const Vec3& force) {
  if (mass <= 0.0)
    throw Error(ErrorCode::kSingularInertia, "non-positive total mass");
  Vec3 a;
  a(0) = force(0) / mass;
  a(1) = force(1) / mass;
  if (inertia_cm > 0.0) {
    a(2) = force(2) / inertia_cm;
  } else if (force(2) == 0.0) {
    a(2) = 0.0;
  } else {
    throw Error(ErrorCode::kSingularInertia,
                "zero rotational inertia under net torque");
  }
  return a;
}

inline Vec3 apply_inverse_mass(const HiddenStates& h, const Vec3& force) {
  return apply_inverse_mass(h.mass, h.inertia_cm, force);
}

}  // namespace detail

// Acceleration [ax, ay, aw] of the object under one wrench input and the
// sliding friction implied by the Hidden States.
inline Vec3 compute_accel(const ParticleModel& model, const GroupMaps& maps,
                          const HiddenStates& h, const ObjectState& state,
                          const WrenchInput& input, const SimConfig& config) {
  if (input.particle >= model.particle_count())
    throw Error(ErrorCode::kInvalidArgument, "grasp particle out of range");
  const WorldKinematics kin = world_kinematics(model, state);
  const Vec2 com_w = world_com(state, h.com);
  const Eigen::Matrix3Xd basis = friction_basis(model, maps, kin, com_w,
                                                config);
  Vec3 force = input_term(input, kin, com_w);
  for (int i = 0; i < model.particle_count(); ++i) {
    if (!maps.contact_group[i]) continue;
    force -= h.s(*maps.contact_group[i]) * basis.col(i);
  }
  return detail::apply_inverse_mass(h, force);
}

// Explicit Euler step: the pose advances with the pre-update velocity.
inline ObjectState step(const ObjectState& state, const Vec3& accel,
                        const SimConfig& config) {
  ObjectState next;
  next.pose = state.pose + state.velocity * config.dt;
  next.velocity = state.velocity + accel * config.dt;
  return next;
}

inline Trajectory simulate(const ParticleModel& model, const GroupMaps& maps,
                           const HiddenStates& h, const ObjectState& initial,
                           const std::vector<WrenchInput>& inputs,
                           const SimConfig& config) {
  if (inputs.empty())
    throw Error(ErrorCode::kInvalidArgument, "no inputs to simulate");
  Trajectory traj;
  traj.config = config;
  traj.inputs = inputs;
  traj.states.reserve(inputs.size() + 1);
  traj.states.push_back(initial);
  for (int t = 0; t < static_cast<int>(inputs.size()); ++t) {
    const Vec3 a = compute_accel(model, maps, h, traj.states.back(),
                                 inputs[t], config);
    ObjectState next = step(traj.states.back(), a, config);
    if (!next.pose.allFinite() || !next.velocity.allFinite())
      throw Error(ErrorCode::kDivergence, "non-finite state at step", t);
    traj.states.push_back(std::move(next));
  }
  return traj;
}

// Kinetic energy of the rigid body, taken at the center of mass:
//   1/2 M |v_com|^2 + 1/2 I_cm w^2.
// With zero input this is non-increasing across a step provided dt is small
// against both the spin period and M * (slowest moving contact speed) / sum(s).
inline double kinetic_energy(const HiddenStates& h, const ObjectState& state) {
  const Vec2 com_offset = rotation(state.pose(2)) * h.com;
  const Vec2 v_com =
      state.velocity.head<2>() + spin_cross(state.velocity(2), com_offset);
  return 0.5 * h.mass * v_com.squaredNorm() +
         0.5 * h.inertia_cm * state.velocity(2) * state.velocity(2);
}

}  // namespace massdist

#endif  // MASSDIST_DYNAMICS_HPP_
