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

#ifndef MASSDIST_BASELINES_HPP_
#define MASSDIST_BASELINES_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "massdist/dynamics.hpp"
#include "massdist/error.hpp"
#include "massdist/object_model.hpp"
#include "massdist/planar.hpp"
#include "massdist/rng.hpp"

namespace massdist {

// One-step velocity prediction error over observed trajectories, as a
// function of the full (m, mu) parameter vector. Unlike the friction
// regression, everything here depends on the masses: total mass, center of
// mass, central inertia, lever arms and the friction magnitudes, so the
// gradient chains through all of them.
class JointLoss {
 public:
  JointLoss(const ParticleModel& model, const GroupMaps& maps,
            const std::vector<Trajectory>& trajectories, double gravity)
      : gravity_(gravity) {
    const int n = model.particle_count();
    n_m_ = maps.mass_group_count();
    n_mu_ = maps.friction_group_count();
    const ContactGroupInfo info = contact_group_info(model, maps);
    n_s_ = static_cast<int>(info.sizes.size());
    s_mass_ = info.mass_group;
    s_mu_ = info.friction_group;

    counts_ = Eigen::VectorXd::Zero(n_m_);
    group_pos_sum_.assign(n_m_, Vec2::Zero());
    group_sq_sum_ = Eigen::VectorXd::Zero(n_m_);
    for (int i = 0; i < n; ++i) {
      const int j = maps.mass_group[i];
      counts_(j) += 1.0;
      group_pos_sum_[j] += model.positions[i];
      group_sq_sum_(j) += model.positions[i].squaredNorm();
    }

    for (const Trajectory& traj : trajectories) {
      for (int t = 0; t < traj.step_count(); ++t) {
        Step step;
        step.dt = traj.config.dt;
        const ObjectState& state = traj.states[t];
        step.rot = rotation(state.pose(2));
        step.origin = state.pose.head<2>();
        step.dv = traj.states[t + 1].velocity - state.velocity;
        const WorldKinematics kin = world_kinematics(model, state);
        const WrenchInput& u = traj.inputs[t];
        step.wrench = u.wrench;
        step.grasp_pos = (u.particle >= 0) ? kin.positions[u.particle]
                                           : Vec2::Zero();
        step.has_input = u.particle >= 0;
        for (int i = 0; i < n; ++i) {
          if (!maps.contact_group[i]) continue;
          const double speed = kin.velocities[i].norm();
          if (speed <= traj.config.velocity_epsilon) continue;
          Contactor c;
          c.group = *maps.contact_group[i];
          c.vhat = kin.velocities[i] / speed;
          c.position = kin.positions[i];
          step.contactors.push_back(c);
        }
        steps_.push_back(std::move(step));
      }
    }
  }

  int mass_dim() const { return n_m_; }
  int mu_dim() const { return n_mu_; }

  double eval(const Eigen::VectorXd& m, const Eigen::VectorXd& mu) const {
    return eval_impl(m, mu, nullptr, nullptr);
  }

  double eval_with_grad(const Eigen::VectorXd& m, const Eigen::VectorXd& mu,
                        Eigen::VectorXd* grad_m,
                        Eigen::VectorXd* grad_mu) const {
    return eval_impl(m, mu, grad_m, grad_mu);
  }

 private:
  struct Contactor {
    int group;
    Vec2 vhat;
    Vec2 position;  // world
  };
  struct Step {
    double dt;
    Mat2 rot;
    Vec2 origin;
    Vec3 wrench;
    Vec2 grasp_pos;
    bool has_input;
    Vec3 dv;
    std::vector<Contactor> contactors;
  };

  double eval_impl(const Eigen::VectorXd& m, const Eigen::VectorXd& mu,
                   Eigen::VectorXd* grad_m, Eigen::VectorXd* grad_mu) const {
    if (m.size() != n_m_ || mu.size() != n_mu_)
      throw Error(ErrorCode::kInvalidArgument, "parameter size mismatch");

    const double mass = counts_.dot(m);
    Vec2 com_body = Vec2::Zero();
    for (int j = 0; j < n_m_; ++j) com_body += m(j) * group_pos_sum_[j];
    com_body /= mass;
    const double inertia =
        group_sq_sum_.dot(m) - mass * com_body.squaredNorm();

    Eigen::VectorXd s(n_s_);
    for (int k = 0; k < n_s_; ++k)
      s(k) = mu(s_mu_[k]) * m(s_mass_[k]) * gravity_;

    // Parameter sensitivities of the object-level quantities.
    std::vector<Vec2> dcom(n_m_);       // d com_body / d m_j
    Eigen::VectorXd dinertia(n_m_);     // d inertia / d m_j
    if (grad_m) {
      for (int j = 0; j < n_m_; ++j) {
        dcom[j] = (group_pos_sum_[j] - counts_(j) * com_body) / mass;
        dinertia(j) = group_sq_sum_(j) - 2.0 * com_body.dot(group_pos_sum_[j]) +
                      counts_(j) * com_body.squaredNorm();
      }
      grad_m->setZero(n_m_);
      grad_mu->setZero(n_mu_);
    }

    double loss = 0.0;
    Eigen::MatrixXd colsum(3, n_s_);
    for (const Step& step : steps_) {
      const Vec2 com_w = step.origin + step.rot * com_body;
      Vec3 force = Vec3::Zero();
      if (step.has_input) {
        force = step.wrench;
        force(2) += cross2(step.wrench.head<2>(), step.grasp_pos - com_w);
      }
      colsum.setZero();
      for (const Contactor& c : step.contactors) {
        colsum(0, c.group) += c.vhat.x();
        colsum(1, c.group) += c.vhat.y();
        colsum(2, c.group) += cross2(c.vhat, c.position - com_w);
      }
      for (int k = 0; k < n_s_; ++k) force -= s(k) * colsum.col(k);

      const Vec3 accel(force(0) / mass, force(1) / mass, force(2) / inertia);
      const Vec3 r = step.dt * accel - step.dv;
      loss += r.squaredNorm();
      if (!grad_m) continue;

      // d residual / d theta = dt * d accel / d theta. The torque row's
      // dependence on the center of mass collapses to the net force:
      //   d force_w / d com_w = (force_y, -force_x).
      const Vec2 dfw_dcom(force(1), -force(0));
      const Vec3 weights = 2.0 * step.dt * r;
      for (int j = 0; j < n_m_; ++j) {
        Vec3 dforce = Vec3::Zero();
        for (int k = 0; k < n_s_; ++k)
          if (s_mass_[k] == j)
            dforce -= (mu(s_mu_[k]) * gravity_) * colsum.col(k);
        dforce(2) += dfw_dcom.dot(step.rot * dcom[j]);
        Vec3 daccel;
        daccel(0) = dforce(0) / mass - counts_(j) * force(0) / (mass * mass);
        daccel(1) = dforce(1) / mass - counts_(j) * force(1) / (mass * mass);
        daccel(2) = dforce(2) / inertia -
                    dinertia(j) * force(2) / (inertia * inertia);
        (*grad_m)(j) += weights.dot(daccel);
      }
      for (int l = 0; l < n_mu_; ++l) {
        Vec3 dforce = Vec3::Zero();
        for (int k = 0; k < n_s_; ++k)
          if (s_mu_[k] == l)
            dforce -= (m(s_mass_[k]) * gravity_) * colsum.col(k);
        (*grad_mu)(l) += weights.dot(
            Vec3(dforce(0) / mass, dforce(1) / mass, dforce(2) / inertia));
      }
    }
    return loss;
  }

  double gravity_;
  int n_m_ = 0, n_mu_ = 0, n_s_ = 0;
  std::vector<int> s_mass_, s_mu_;
  Eigen::VectorXd counts_;
  std::vector<Vec2> group_pos_sum_;
  Eigen::VectorXd group_sq_sum_;
  std::vector<Step> steps_;
};

struct SearchConfig {
  double mass_lo = 0.01, mass_hi = 5.0;  // kg per group
  double mu_lo = 0.0, mu_hi = 1.0;
  int iters = 500;
  std::uint64_t seed = 0;
  double gaussian_decay = 0.99;  // sigma multiplier per iteration
  int population = 4;            // samples per weighted-sampling iteration
  double explicit_rate = 0.05;   // base step for explicit-state descent
};

inline void validate_bounds(const SearchConfig& cfg) {
  if (!(cfg.mass_lo > 0.0 && cfg.mass_lo < cfg.mass_hi))
    throw Error(ErrorCode::kInvalidArgument, "invalid mass bounds");
  if (!(cfg.mu_lo >= 0.0 && cfg.mu_lo < cfg.mu_hi))
    throw Error(ErrorCode::kInvalidArgument, "invalid friction bounds");
  if (!(cfg.gaussian_decay > 0.0 && cfg.gaussian_decay <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "decay must be in (0, 1]");
}

struct SearchResult {
  Eigen::VectorXd m;
  Eigen::VectorXd mu;
  double loss = 0.0;
  std::vector<double> trace;  // incumbent loss per iteration
  std::string variant;        // optimizer that produced the result
};

// Uniform sampling of the joint (m, mu) box, keeping the best simulated loss.
inline SearchResult random_search(const JointLoss& loss,
                                  const SearchConfig& cfg) {
  validate_bounds(cfg);
  Rng rng(cfg.seed);
  SearchResult best;
  best.loss = std::numeric_limits<double>::infinity();
  best.variant = "uniform";
  for (int it = 0; it < cfg.iters; ++it) {
    Eigen::VectorXd m(loss.mass_dim()), mu(loss.mu_dim());
    for (int j = 0; j < m.size(); ++j)
      m(j) = rng.uniform(cfg.mass_lo, cfg.mass_hi);
    for (int l = 0; l < mu.size(); ++l)
      mu(l) = rng.uniform(cfg.mu_lo, cfg.mu_hi);
    const double value = loss.eval(m, mu);
    if (value < best.loss) {
      best.loss = value;
      best.m = m;
      best.mu = mu;
    }
    best.trace.push_back(best.loss);
  }
  return best;
}

// Grid initialization followed by Gaussian resampling around the incumbent
// with a decaying deviation, samples clipped to the bounds. The incumbent
// never regresses by construction.
inline SearchResult weighted_sampling_search(const JointLoss& loss,
                                             const SearchConfig& cfg) {
  validate_bounds(cfg);
  Rng rng(cfg.seed);
  const int dim = loss.mass_dim() + loss.mu_dim();
  Eigen::VectorXd lo(dim), hi(dim);
  for (int j = 0; j < loss.mass_dim(); ++j) {
    lo(j) = cfg.mass_lo;
    hi(j) = cfg.mass_hi;
  }
  for (int l = 0; l < loss.mu_dim(); ++l) {
    lo(loss.mass_dim() + l) = cfg.mu_lo;
    hi(loss.mass_dim() + l) = cfg.mu_hi;
  }
  auto split_eval = [&](const Eigen::VectorXd& x) {
    return loss.eval(x.head(loss.mass_dim()), x.tail(loss.mu_dim()));
  };

  SearchResult best;
  best.loss = std::numeric_limits<double>::infinity();
  best.variant = "weighted";
  Eigen::VectorXd incumbent(dim);

  // Grid initialization: ceil(iters / 10) points spread as an even lattice.
  const int grid_budget = (cfg.iters + 9) / 10;
  const int levels = std::max(
      2, static_cast<int>(std::floor(std::pow(grid_budget, 1.0 / dim))));
  std::vector<int> idx(dim, 0);
  while (true) {
    Eigen::VectorXd x(dim);
    for (int d = 0; d < dim; ++d)
      x(d) = lo(d) + (hi(d) - lo(d)) * (idx[d] + 0.5) / levels;
    const double value = split_eval(x);
    if (value < best.loss) {
      best.loss = value;
      incumbent = x;
    }
    int d = 0;
    while (d < dim && ++idx[d] == levels) idx[d++] = 0;
    if (d == dim) break;
  }

  Eigen::VectorXd sigma = hi - lo;
  for (int it = 0; it < cfg.iters; ++it) {
    for (int p = 0; p < cfg.population; ++p) {
      Eigen::VectorXd x(dim);
      for (int d = 0; d < dim; ++d)
        x(d) = std::clamp(incumbent(d) + rng.gaussian(sigma(d)), lo(d),
                          hi(d));
      const double value = split_eval(x);
      if (value < best.loss) {
        best.loss = value;
        incumbent = x;
      }
    }
    sigma *= cfg.gaussian_decay;
    best.trace.push_back(best.loss);
  }
  best.m = incumbent.head(loss.mass_dim());
  best.mu = incumbent.tail(loss.mu_dim());
  return best;
}

namespace detail {

struct DescentState {
  Eigen::VectorXd x;
  Eigen::VectorXd momentum;
  Eigen::VectorXd second_moment;
};

}  // namespace detail

// Gradient descent directly in the joint (m, mu) space with exact analytic
// gradients and projection to the bounds. Runs a plain, a momentum and an
// adaptive per-coordinate variant and reports the best final loss.
inline SearchResult explicit_state_gd(const JointLoss& loss,
                                      const SearchConfig& cfg) {
  validate_bounds(cfg);
  const int n_m = loss.mass_dim();
  const int n_mu = loss.mu_dim();
  const int dim = n_m + n_mu;
  Eigen::VectorXd lo(dim), hi(dim);
  for (int j = 0; j < n_m; ++j) {
    lo(j) = cfg.mass_lo;
    hi(j) = cfg.mass_hi;
  }
  for (int l = 0; l < n_mu; ++l) {
    lo(n_m + l) = cfg.mu_lo;
    hi(n_m + l) = cfg.mu_hi;
  }

  SearchResult best;
  best.loss = std::numeric_limits<double>::infinity();
  const char* names[] = {"plain", "momentum", "adaptive"};
  for (int variant = 0; variant < 3; ++variant) {
    Eigen::VectorXd x = 0.5 * (lo + hi);
    Eigen::VectorXd momentum = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd second = Eigen::VectorXd::Zero(dim);
    std::vector<double> trace;
    double value = 0.0;
    for (int it = 0; it < cfg.iters; ++it) {
      Eigen::VectorXd gm, gmu;
      value = loss.eval_with_grad(x.head(n_m), x.tail(n_mu), &gm, &gmu);
      Eigen::VectorXd g(dim);
      g << gm, gmu;
      if (!std::isfinite(value) || !g.allFinite())
        throw Error(ErrorCode::kDivergence,
                    "non-finite gradient in explicit-state descent", it);
      trace.push_back(value);
      Eigen::VectorXd direction;
      if (variant == 0) {
        direction = g;
      } else if (variant == 1) {
        momentum = 0.9 * momentum + g;
        direction = momentum;
      } else {
        second = 0.9 * second + 0.1 * g.cwiseProduct(g);
        direction =
            g.cwiseQuotient((second.cwiseSqrt().array() + 1e-12).matrix());
      }
      x -= cfg.explicit_rate * direction;
      x = x.cwiseMax(lo).cwiseMin(hi);
    }
    value = loss.eval(x.head(n_m), x.tail(n_mu));
    trace.push_back(value);
    if (value < best.loss) {
      best.loss = value;
      best.m = x.head(n_m);
      best.mu = x.tail(n_mu);
      best.trace = trace;
      best.variant = names[variant];
    }
  }
  return best;
}

}  // namespace massdist

#endif  // MASSDIST_BASELINES_HPP_
