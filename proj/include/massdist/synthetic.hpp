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

#ifndef MASSDIST_SYNTHETIC_HPP_
#define MASSDIST_SYNTHETIC_HPP_

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "massdist/actions.hpp"
#include "massdist/dynamics.hpp"
#include "massdist/error.hpp"
#include "massdist/estimation.hpp"
#include "massdist/object_model.hpp"
#include "massdist/rng.hpp"

namespace massdist {

// Additive Gaussian sensor noise, applied per sample.
struct NoiseModel {
  double wrench_force_sigma = 0.0;   // N, per force channel
  double wrench_torque_sigma = 0.0;  // N m
  double pose_xy_sigma = 0.0;        // m, per pose channel
  double pose_angle_sigma = 0.0;     // rad
  double scale_sigma = 0.0;          // kg, weighing error
  std::uint64_t seed = 0;

  static NoiseModel none(std::uint64_t seed = 0) {
    NoiseModel n;
    n.seed = seed;
    return n;
  }

  // Wrist force/torque sensor plus motion capture, bench-scale magnitudes.
  static NoiseModel bench(std::uint64_t seed = 0) {
    NoiseModel n;
    n.wrench_force_sigma = 0.05;
    n.wrench_torque_sigma = 0.005;
    n.pose_xy_sigma = 1e-3;
    n.pose_angle_sigma = 0.2 * M_PI / 180.0;
    n.scale_sigma = 1e-3;
    n.seed = seed;
    return n;
  }
};

// Synthetic stand-in for the robot: executes actions on the ground-truth
// object, synthesizes the wrench a wrist sensor would have read, corrupts
// everything with the noise model, and applies the same structure-aware
// filtering a hardware pipeline would. Every query derives its own random
// stream from (seed, query), so repeated queries return identical data and
// query order never matters.
class SyntheticSource : public ObservationSource {
 public:
  SyntheticSource(const ParticleModel& model, const GroupMaps& maps,
                  const ObjectParams& params, const NoiseModel& noise,
                  const SimConfig& sim)
      : model_(model),
        maps_(maps),
        params_(params),
        noise_(noise),
        sim_(sim),
        truth_(hidden_states_of(model, maps, params, sim.gravity)) {}

  const HiddenStates& truth() const { return truth_; }

  double measure_mass() override {
    Rng rng(derive_seed(noise_.seed, "weigh"));
    return truth_.mass + rng.gaussian(noise_.scale_sigma);
  }

  Trajectory observe(const ActionSpec& action) override {
    const std::vector<ObjectState> states =
        kinematic_trajectory(action, model_, Vec3::Zero(), sim_);
    std::vector<WrenchInput> wrench = inverse_dynamics_wrench(
        states, model_, maps_, truth_, action.grasp_particle, sim_);

    Rng rng(derive_seed(noise_.seed, action_tag(action)));
    for (WrenchInput& w : wrench) {
      w.wrench(0) += rng.gaussian(noise_.wrench_force_sigma);
      w.wrench(1) += rng.gaussian(noise_.wrench_force_sigma);
      w.wrench(2) += rng.gaussian(noise_.wrench_torque_sigma);
    }

    Trajectory traj;
    traj.config = sim_;
    traj.inputs = filter_feedback(wrench, action, sim_);
    traj.states = fit_observed_states(action, states, &rng);
    return traj;
  }

  // Constrained rotation about one particle at a base rate, perturbed by
  // `levels` evenly spaced constant angular accelerations. The span keeps
  // the spin direction fixed so the friction torque stays constant within
  // each window. Torque readings are averaged over the window; angular
  // acceleration comes from a quadratic fit of the observed heading.
  std::vector<TorqueResponse> pivot_sweep(int pivot_particle,
                                          int levels) override {
    if (pivot_particle < 0 || pivot_particle >= model_.particle_count())
      throw Error(ErrorCode::kInvalidArgument, "pivot out of range");
    if (levels < 1)
      throw Error(ErrorCode::kInvalidArgument, "need >= 1 torque level");

    double inertia_pivot = 0.0;
    double friction_torque = 0.0;
    const Vec2 pivot = model_.positions[pivot_particle];
    for (int i = 0; i < model_.particle_count(); ++i) {
      const double r = (model_.positions[i] - pivot).norm();
      inertia_pivot += params_.masses(maps_.mass_group[i]) * r * r;
      if (maps_.contact_group[i])
        friction_torque += truth_.s(*maps_.contact_group[i]) * r;
    }

    std::ostringstream tag;
    tag << "sweep|" << pivot_particle << "|" << levels;
    Rng rng(derive_seed(noise_.seed, tag.str()));

    const int samples = std::max(
        8, static_cast<int>(std::lround(sweep_duration / sim_.dt)));
    const double accel_span = sweep_base_rate / (2.0 * sweep_duration);
    std::vector<TorqueResponse> out;
    for (int l = 0; l < levels; ++l) {
      const double frac =
          (levels == 1) ? 0.0 : (2.0 * l / (levels - 1.0) - 1.0);
      const double accel = frac * accel_span;
      const double torque = inertia_pivot * accel + friction_torque;

      double torque_sum = 0.0;
      for (int k = 0; k < samples; ++k)
        torque_sum += torque + rng.gaussian(noise_.wrench_torque_sigma);

      // Discrete heading under constant angular acceleration, observed with
      // per-sample angle noise, then fit with a quadratic.
      Eigen::MatrixXd design(samples + 1, 3);
      Eigen::VectorXd heading(samples + 1);
      double theta = 0.0;
      double omega = sweep_base_rate;
      for (int k = 0; k <= samples; ++k) {
        const double t = k * sim_.dt;
        design(k, 0) = 1.0;
        design(k, 1) = t;
        design(k, 2) = t * t;
        heading(k) = theta + rng.gaussian(noise_.pose_angle_sigma);
        theta += omega * sim_.dt;
        omega += accel * sim_.dt;
      }
      const Eigen::Vector3d coef =
          design.colPivHouseholderQr().solve(heading);

      TorqueResponse resp;
      resp.torque = torque_sum / samples;
      resp.angular_accel = 2.0 * coef(2);
      out.push_back(resp);
    }
    return out;
  }

  double sweep_base_rate = 0.6;  // rad/s held during torque sweeps
  double sweep_duration = 2.0;   // s per torque level

 private:
  static std::string action_tag(const ActionSpec& a) {
    std::ostringstream tag;
    tag.precision(17);
    if (a.kind == ActionKind::kSlide)
      tag << "slide|" << a.grasp_particle << '|' << a.direction.x() << '|'
          << a.direction.y() << '|' << a.speed << '|' << a.duration;
    else
      tag << "rotate|" << a.grasp_particle << '|' << a.angular_rate << '|'
          << a.duration;
    return tag.str();
  }

  // Projects noisy pose samples back onto the action's motion structure
  // (linear translation or fixed-pivot rotation at the commanded rate) and
  // rebuilds Euler-consistent states from the fit.
  std::vector<ObjectState> fit_observed_states(
      const ActionSpec& action, const std::vector<ObjectState>& states,
      Rng* rng) {
    const bool noiseless =
        noise_.pose_xy_sigma == 0.0 && noise_.pose_angle_sigma == 0.0;
    std::vector<Vec3> poses(states.size());
    for (size_t k = 0; k < states.size(); ++k) {
      poses[k] = states[k].pose;
      if (!noiseless) {
        poses[k](0) += rng->gaussian(noise_.pose_xy_sigma);
        poses[k](1) += rng->gaussian(noise_.pose_xy_sigma);
        poses[k](2) += rng->gaussian(noise_.pose_angle_sigma);
      }
    }
    if (noiseless) return states;

    const int n = static_cast<int>(poses.size());
    std::vector<ObjectState> out(n);
    if (action.kind == ActionKind::kSlide) {
      // Linear fit per translation channel; heading is constant.
      double sum_t = 0.0, sum_tt = 0.0;
      for (int k = 0; k < n; ++k) {
        sum_t += k * sim_.dt;
        sum_tt += (k * sim_.dt) * (k * sim_.dt);
      }
      Vec2 sum_p = Vec2::Zero(), sum_tp = Vec2::Zero();
      double sum_w = 0.0;
      for (int k = 0; k < n; ++k) {
        sum_p += poses[k].head<2>();
        sum_tp += (k * sim_.dt) * poses[k].head<2>();
        sum_w += poses[k](2);
      }
      const double denom = n * sum_tt - sum_t * sum_t;
      const Vec2 vel = (n * sum_tp - sum_t * sum_p) / denom;
      const Vec2 start = (sum_p - vel * sum_t) / n;
      const double heading = sum_w / n;
      for (int k = 0; k < n; ++k) {
        out[k].pose << start + vel * (k * sim_.dt), heading;
        out[k].velocity << vel, 0.0;
      }
      return out;
    }

    // Rotation: the rate is commanded, so the heading offset and the pivot
    // position are linear fits.
    const Vec2 grasp_body = model_.positions[action.grasp_particle];
    double heading0 = 0.0;
    for (int k = 0; k < n; ++k)
      heading0 += poses[k](2) - action.angular_rate * k * sim_.dt;
    heading0 /= n;
    Vec2 pivot = Vec2::Zero();
    for (int k = 0; k < n; ++k) {
      const double heading = heading0 + action.angular_rate * k * sim_.dt;
      pivot += poses[k].head<2>() + rotation(heading) * grasp_body;
    }
    pivot /= n;
    auto pose_at = [&](int k) {
      const double heading = heading0 + action.angular_rate * k * sim_.dt;
      const Vec2 xy = pivot - rotation(heading) * grasp_body;
      return Vec3(xy.x(), xy.y(), heading);
    };
    for (int k = 0; k < n; ++k) out[k].pose = pose_at(k);
    for (int k = 0; k < n; ++k) {
      const Vec3 next = (k + 1 < n) ? out[k + 1].pose : pose_at(n);
      out[k].velocity.head<2>() =
          (next.head<2>() - out[k].pose.head<2>()) / sim_.dt;
      out[k].velocity(2) = action.angular_rate;
    }
    return out;
  }

  ParticleModel model_;
  GroupMaps maps_;
  ObjectParams params_;
  NoiseModel noise_;
  SimConfig sim_;
  HiddenStates truth_;
};

}  // namespace massdist

#endif  // MASSDIST_SYNTHETIC_HPP_
