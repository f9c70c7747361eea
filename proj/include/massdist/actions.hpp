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

#ifndef MASSDIST_ACTIONS_HPP_
#define MASSDIST_ACTIONS_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "massdist/dynamics.hpp"
#include "massdist/error.hpp"
#include "massdist/object_model.hpp"
#include "massdist/planar.hpp"
#include "massdist/rng.hpp"

namespace massdist {

inline constexpr double kDefaultSlideSpeed = 0.05;                   // m/s
inline constexpr double kDefaultSlideDuration = 4.0;                 // s
inline constexpr double kDefaultRotateRate = 10.0 * M_PI / 180.0;    // rad/s
inline constexpr double kDefaultRotateDuration = 18.0;               // s

enum class ActionKind { kSlide, kRotate };

// Grasp-and-slide: constant-velocity translation along `direction`.
// Grasp-and-rotate: constant-rate rotation about the grasp particle.
struct ActionSpec {
  ActionKind kind = ActionKind::kSlide;
  int grasp_particle = 0;
  Vec2 direction{1.0, 0.0};   // slide only, unit norm
  double speed = kDefaultSlideSpeed;       // slide only, m/s
  double angular_rate = kDefaultRotateRate;  // rotate only, signed rad/s
  double duration = kDefaultSlideDuration;   // s

  static ActionSpec slide(int particle, const Vec2& direction,
                          double speed = kDefaultSlideSpeed,
                          double duration = kDefaultSlideDuration) {
    ActionSpec a;
    a.kind = ActionKind::kSlide;
    a.grasp_particle = particle;
    a.direction = direction;
    a.speed = speed;
    a.duration = duration;
    return a;
  }

  static ActionSpec rotate(int particle, double rate = kDefaultRotateRate,
                           double duration = kDefaultRotateDuration) {
    ActionSpec a;
    a.kind = ActionKind::kRotate;
    a.grasp_particle = particle;
    a.angular_rate = rate;
    a.duration = duration;
    return a;
  }
};

inline void validate_action(const ActionSpec& action,
                            const ParticleModel& model) {
  if (action.grasp_particle < 0 ||
      action.grasp_particle >= model.particle_count())
    throw Error(ErrorCode::kInvalidArgument, "grasp particle out of range");
  if (!model.graspable[action.grasp_particle])
    throw Error(ErrorCode::kInvalidArgument, "grasp particle not graspable");
  if (action.duration <= 0.0)
    throw Error(ErrorCode::kInvalidArgument, "action duration must be > 0");
  if (action.kind == ActionKind::kSlide) {
    if (std::abs(action.direction.norm() - 1.0) > 1e-12)
      throw Error(ErrorCode::kInvalidArgument,
                  "slide direction must be unit norm");
    if (action.speed <= 0.0)
      throw Error(ErrorCode::kInvalidArgument, "slide speed must be > 0");
  } else if (action.angular_rate == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "rotate rate must be nonzero");
  }
}

// Full action vocabulary: both rotation senses per graspable particle plus
// `slide_directions` evenly spaced slide headings per graspable particle.
inline std::vector<ActionSpec> enumerate_actions(const ParticleModel& model,
                                                 int slide_directions = 4) {
  std::vector<ActionSpec> actions;
  std::vector<int> graspable;
  for (int i = 0; i < model.particle_count(); ++i)
    if (model.graspable[i]) graspable.push_back(i);
  if (graspable.empty())
    throw Error(ErrorCode::kEmptyActionSet, "no graspable particles");
  for (int i : graspable) {
    actions.push_back(ActionSpec::rotate(i, kDefaultRotateRate));
    actions.push_back(ActionSpec::rotate(i, -kDefaultRotateRate));
  }
  for (int i : graspable) {
    for (int d = 0; d < slide_directions; ++d) {
      const double angle = 2.0 * M_PI * d / slide_directions;
      actions.push_back(
          ActionSpec::slide(i, Vec2(std::cos(angle), std::sin(angle))));
    }
  }
  return actions;
}

// Constant-speed trajectory of an action. Poses follow the exact motion
// (slides translate; rotations keep the grasp particle world position fixed
// to machine precision) and stored velocities are the forward differences of
// those poses, so every state pair satisfies the Euler pose update exactly.
// The discrete velocity of a rotation pivot is therefore not exactly zero
// but O(rate^2 * dt * arm), below SimConfig::velocity_epsilon.
inline std::vector<ObjectState> kinematic_trajectory(
    const ActionSpec& action, const ParticleModel& model,
    const Vec3& initial_pose, const SimConfig& config) {
  validate_action(action, model);
  const int steps = std::max(1, static_cast<int>(
      std::lround(action.duration / config.dt)));
  std::vector<ObjectState> states(steps + 1);

  if (action.kind == ActionKind::kSlide) {
    const Vec3 velocity(action.speed * action.direction.x(),
                        action.speed * action.direction.y(), 0.0);
    for (int k = 0; k <= steps; ++k) {
      states[k].pose = initial_pose + velocity * (k * config.dt);
      states[k].velocity = velocity;
    }
    return states;
  }

  const Vec2 grasp_body = model.positions[action.grasp_particle];
  const Vec2 pivot = rotation(initial_pose(2)) * grasp_body +
                     initial_pose.head<2>();
  auto pose_at = [&](int k) {
    const double heading = initial_pose(2) + action.angular_rate * k *
                           config.dt;
    const Vec2 xy = pivot - rotation(heading) * grasp_body;
    return Vec3(xy.x(), xy.y(), heading);
  };
  for (int k = 0; k <= steps; ++k) states[k].pose = pose_at(k);
  for (int k = 0; k <= steps; ++k) {
    const Vec3 next = (k < steps) ? states[k + 1].pose : pose_at(steps + 1);
    states[k].velocity.head<2>() =
        (next.head<2>() - states[k].pose.head<2>()) / config.dt;
    states[k].velocity(2) = action.angular_rate;
  }
  return states;
}

// Solves the dynamics for the wrench a force/torque sensor would have read
// while driving the given states: translational balance yields the force,
// then the rotational balance yields the torque. Accelerations are the exact
// discrete differences (v_{t+1} - v_t) / dt, so feeding the result back
// through simulate() reproduces the trajectory to machine precision.
inline std::vector<WrenchInput> inverse_dynamics_wrench(
    const std::vector<ObjectState>& states, const ParticleModel& model,
    const GroupMaps& maps, const HiddenStates& h, int grasp_particle,
    const SimConfig& config) {
  if (states.size() < 2)
    throw Error(ErrorCode::kInvalidArgument,
                "need at least two states for wrench synthesis");
  if (grasp_particle < 0 || grasp_particle >= model.particle_count())
    throw Error(ErrorCode::kInvalidArgument, "grasp particle out of range");

  std::vector<WrenchInput> inputs(states.size() - 1);
  for (size_t t = 0; t + 1 < states.size(); ++t) {
    const ObjectState& state = states[t];
    const Vec3 accel = (states[t + 1].velocity - state.velocity) / config.dt;
    const WorldKinematics kin = world_kinematics(model, state);
    const Vec2 com_w = world_com(state, h.com);
    const Eigen::Matrix3Xd basis =
        friction_basis(model, maps, kin, com_w, config);
    Vec3 friction = Vec3::Zero();
    for (int i = 0; i < model.particle_count(); ++i)
      if (maps.contact_group[i])
        friction -= h.s(*maps.contact_group[i]) * basis.col(i);

    WrenchInput u;
    u.particle = grasp_particle;
    u.wrench.head<2>() = h.mass * accel.head<2>() - friction.head<2>();
    if (h.inertia_cm <= 0.0 && accel(2) != 0.0)
      throw Error(ErrorCode::kSingularInertia,
                  "rotational acceleration demanded with zero inertia",
                  static_cast<long>(t));
    u.wrench(2) = h.inertia_cm * accel(2) -
                  cross2(u.wrench.head<2>(),
                         kin.positions[grasp_particle] - com_w) -
                  friction(2);
    inputs[t] = u;
  }
  return inputs;
}

// Replaces a noisy wrench series by its structural fit: slides produce
// constant force and torque, rotations produce constant torque and a
// sinusoidal force at the commanded rate (fit linearly as
// offset + a cos(wt) + b sin(wt) since the frequency is known).
inline std::vector<WrenchInput> filter_feedback(
    const std::vector<WrenchInput>& raw, const ActionSpec& action,
    const SimConfig& config) {
  const int n = static_cast<int>(raw.size());
  if (n < 3)
    throw Error(ErrorCode::kInsufficientData,
                "need at least 3 samples to filter feedback", n);
  std::vector<WrenchInput> out = raw;

  auto channel_mean = [&](int c) {
    double sum = 0.0;
    for (const WrenchInput& w : raw) sum += w.wrench(c);
    return sum / n;
  };

  if (action.kind == ActionKind::kSlide || action.angular_rate == 0.0) {
    const Vec3 mean(channel_mean(0), channel_mean(1), channel_mean(2));
    for (WrenchInput& w : out) w.wrench = mean;
    return out;
  }

  Eigen::MatrixXd design(n, 3);
  for (int k = 0; k < n; ++k) {
    const double phase = action.angular_rate * k * config.dt;
    design(k, 0) = 1.0;
    design(k, 1) = std::cos(phase);
    design(k, 2) = std::sin(phase);
  }
  const auto qr = design.colPivHouseholderQr();
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd y(n);
    for (int k = 0; k < n; ++k) y(k) = raw[k].wrench(c);
    const Eigen::Vector3d coef = qr.solve(y);
    const Eigen::VectorXd fit = design * coef;
    for (int k = 0; k < n; ++k) out[k].wrench(c) = fit(k);
  }
  const double torque = channel_mean(2);
  for (WrenchInput& w : out) w.wrench(2) = torque;
  return out;
}

// One step of the velocity-update regression: v_{t+1} = v_t + A s + B where
// A folds the per-particle friction directions through the contact groups
// and B carries the input contribution.
struct RegressionBlock {
  Eigen::MatrixXd A;  // 3 x contact_group_count
  Vec3 B = Vec3::Zero();
};

inline RegressionBlock regression_block(
    const ObjectState& state, const WrenchInput& input,
    const ParticleModel& model, const GroupMaps& maps, double mass,
    double inertia_cm, const Vec2& com_body, const SimConfig& config) {
  const WorldKinematics kin = world_kinematics(model, state);
  const Vec2 com_w = rotation(state.pose(2)) * com_body + state.pose.head<2>();
  const Eigen::Matrix3Xd basis =
      friction_basis(model, maps, kin, com_w, config);

  const int n_s = maps.contact_group_count();
  Eigen::Matrix3Xd folded = Eigen::Matrix3Xd::Zero(3, n_s);
  for (int i = 0; i < model.particle_count(); ++i)
    if (maps.contact_group[i]) folded.col(*maps.contact_group[i]) += basis.col(i);

  RegressionBlock block;
  block.A.resize(3, n_s);
  for (int k = 0; k < n_s; ++k)
    block.A.col(k) =
        -config.dt * detail::apply_inverse_mass(mass, inertia_cm,
                                                Vec3(folded.col(k)));
  block.B = config.dt * detail::apply_inverse_mass(
                            mass, inertia_cm, input_term(input, kin, com_w));
  return block;
}

// Pre-folding force rows (unit particle velocities) of an action, evaluated
// at its mid-trajectory state -- the raw material of the rank analysis.
inline Eigen::Matrix2Xd action_force_rows(const ActionSpec& action,
                                          const ParticleModel& model,
                                          const GroupMaps& maps,
                                          const SimConfig& config) {
  const std::vector<ObjectState> states =
      kinematic_trajectory(action, model, Vec3::Zero(), config);
  const ObjectState& mid = states[states.size() / 2];
  const WorldKinematics kin = world_kinematics(model, mid);
  const Eigen::Matrix3Xd basis =
      friction_basis(model, maps, kin, Vec2::Zero(), config);
  return basis.topRows<2>();
}

// Stacks one group-folded regression block per action, each evaluated at the
// action's mid-trajectory state (constant-speed actions make the block
// time-invariant up to a rigid rotation, so one representative step
// suffices). Row scaling does not matter for the rank test, so the
// rotational channel uses unit inertia.
inline Eigen::MatrixXd build_Q(const std::vector<ActionSpec>& actions,
                               const ParticleModel& model,
                               const GroupMaps& maps, double mass,
                               const Vec2& com_body, const SimConfig& config) {
  if (actions.empty())
    throw Error(ErrorCode::kInvalidArgument, "build_Q needs >= 1 action");
  const int n_s = maps.contact_group_count();
  Eigen::MatrixXd q(3 * static_cast<int>(actions.size()), n_s);
  for (size_t a = 0; a < actions.size(); ++a) {
    const std::vector<ObjectState> states =
        kinematic_trajectory(actions[a], model, Vec3::Zero(), config);
    const RegressionBlock block =
        regression_block(states[states.size() / 2], WrenchInput{}, model,
                         maps, mass, 1.0, com_body, config);
    q.middleRows<3>(3 * static_cast<int>(a)) = block.A;
  }
  return q;
}

// Numerical column rank: singular values above tol * sigma_max count.
inline int rank_Q(const Eigen::MatrixXd& q, double tol = 1e-8) {
  if (q.rows() == 0 || q.cols() == 0) return 0;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(q);
  const double sigma_max = svd.singularValues()(0);
  if (sigma_max <= 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol * sigma_max) ++rank;
  return rank;
}

// Rank-guided action selection: seed with ceil(n_s / 3) rotations, then add
// one action at a time, rotations weighted 4:1 over slides, until the
// stacked Q reaches full column rank.
inline std::vector<ActionSpec> sample_actions(
    const std::vector<ActionSpec>& all, const ParticleModel& model,
    const GroupMaps& maps, double mass, const Vec2& com_body, int n_s,
    std::uint64_t seed, int max_extra, const SimConfig& config,
    double rank_tol = 1e-8) {
  if (all.empty())
    throw Error(ErrorCode::kEmptyActionSet, "no actions to sample from");
  if (n_s == 0) return {};

  std::vector<int> rotates, slides;
  for (size_t i = 0; i < all.size(); ++i)
    (all[i].kind == ActionKind::kRotate ? rotates : slides)
        .push_back(static_cast<int>(i));

  Rng rng(seed);
  auto take_random = [&rng](std::vector<int>* pool) {
    const int at = rng.uniform_int(static_cast<int>(pool->size()));
    const int index = (*pool)[at];
    pool->erase(pool->begin() + at);
    return index;
  };

  std::vector<ActionSpec> chosen;
  const int n_init = (n_s + 2) / 3;
  for (int k = 0; k < n_init && !(rotates.empty() && slides.empty()); ++k)
    chosen.push_back(all[take_random(rotates.empty() ? &slides : &rotates)]);

  int rank = rank_Q(build_Q(chosen, model, maps, mass, com_body, config),
                    rank_tol);
  int extra = 0;
  while (rank < n_s) {
    if (extra >= max_extra || (rotates.empty() && slides.empty()))
      throw Error(ErrorCode::kRankDeficient,
                  "action set cannot reach full column rank; achieved " +
                      std::to_string(rank) + " of " + std::to_string(n_s),
                  rank);
    std::vector<int>* pool =
        (rotates.empty()) ? &slides
        : (slides.empty()) ? &rotates
        : (rng.uniform() < 0.8 ? &rotates : &slides);
    chosen.push_back(all[take_random(pool)]);
    ++extra;
    rank = rank_Q(build_Q(chosen, model, maps, mass, com_body, config),
                  rank_tol);
  }
  return chosen;
}

// Moment of inertia about one particle, observed through a torque sweep.
struct PivotInertiaSample {
  int pivot_particle = -1;
  Vec2 position = Vec2::Zero();  // body frame
  double inertia = 0.0;          // kg m^2
  double residual = 0.0;         // RMS of the linear fit
};

}  // namespace massdist

#endif  // MASSDIST_ACTIONS_HPP_
