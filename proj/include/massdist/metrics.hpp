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

#ifndef MASSDIST_METRICS_HPP_
#define MASSDIST_METRICS_HPP_

#include <cmath>

#include <Eigen/Dense>

#include "massdist/dynamics.hpp"
#include "massdist/error.hpp"
#include "massdist/object_model.hpp"

namespace massdist {

// Normalized absolute difference of the mass distribution: per-particle
// absolute error over total true mass. Expanding groups to particles weights
// each group by its particle count.
inline double nad(const Eigen::VectorXd& m_est, const Eigen::VectorXd& m_true,
                  const GroupMaps& maps) {
  if (m_est.size() != m_true.size() ||
      m_est.size() != maps.mass_group_count())
    throw Error(ErrorCode::kInvalidArgument, "mass vector length mismatch");
  double num = 0.0, den = 0.0;
  for (int g : maps.mass_group) {
    num += std::abs(m_est(g) - m_true(g));
    den += m_true(g);
  }
  return num / den;
}

// Mean particle distance between two trajectories at the final step only,
// over world-frame particle positions.
inline double mpd(const Trajectory& traj_sim, const Trajectory& traj_true,
                  const ParticleModel& model) {
  if (traj_sim.states.size() != traj_true.states.size())
    throw Error(ErrorCode::kIncompatibleTrajectories,
                "trajectory lengths differ");
  if (traj_sim.config.dt != traj_true.config.dt)
    throw Error(ErrorCode::kIncompatibleTrajectories,
                "trajectory time steps differ");
  const WorldKinematics sim =
      world_kinematics(model, traj_sim.states.back());
  const WorldKinematics truth =
      world_kinematics(model, traj_true.states.back());
  double sum = 0.0;
  for (int i = 0; i < model.particle_count(); ++i)
    sum += (sim.positions[i] - truth.positions[i]).norm();
  return sum / model.particle_count();
}

}  // namespace massdist

#endif  // MASSDIST_METRICS_HPP_
