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

#ifndef MASSDIST_ESTIMATION_HPP_
#define MASSDIST_ESTIMATION_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "massdist/actions.hpp"
#include "massdist/dynamics.hpp"
#include "massdist/error.hpp"
#include "massdist/object_model.hpp"
#include "massdist/rng.hpp"

namespace massdist {

// One torque level of a pivot sweep: applied torque and the angular
// acceleration the object responded with.
struct TorqueResponse {
  double torque = 0.0;         // N m
  double angular_accel = 0.0;  // rad/s^2
};

// Where estimation data comes from: a robot on hardware, or the synthetic
// bench here. Repeated queries with identical arguments must return
// identical data.
class ObservationSource {
 public:
  virtual ~ObservationSource() = default;

  // Total mass from a scale, without moving the object.
  virtual double measure_mass() = 0;

  // Executes one action and returns the observed states together with the
  // filtered wrench series the force/torque sensor read.
  virtual Trajectory observe(const ActionSpec& action) = 0;

  // Rotates about one grasp particle while holding it fixed, applying
  // `levels` distinct torque profiles, and reports (torque, angular
  // acceleration) pairs.
  virtual std::vector<TorqueResponse> pivot_sweep(int pivot_particle,
                                                  int levels) = 0;
};

struct EstimatorConfig {
  SimConfig sim;
  double learning_rate = 1.0;   // halved automatically until stable
  int max_iters = 500;
  double convergence_tol = 1e-12;  // on |delta s| per iteration
  double rank_tol = 1e-8;
  int k_inertia = 4;       // pivots for the inertia stage, >= 3
  int torque_levels = 3;   // distinct torques per pivot
  int slide_directions = 4;
  int max_extra_actions = 12;
  std::uint64_t seed = 0;
  std::vector<int> excluded_pivots;  // reserved for held-out evaluation
};

struct PivotFit {
  double inertia = 0.0;
  double intercept = 0.0;  // absorbs the constant friction torque
  double residual = 0.0;   // RMS of the affine fit
};

// Ordinary least squares of angular acceleration against applied torque;
// the inertia about the pivot is the inverse slope and the intercept absorbs
// the (constant) friction torque, so no friction knowledge is needed here.
inline PivotFit fit_pivot_inertia(const std::vector<TorqueResponse>& samples) {
  const int n = static_cast<int>(samples.size());
  if (n < 2)
    throw Error(ErrorCode::kInsufficientExcitation,
                "need at least 2 torque samples", n);
  double max_abs = 0.0;
  for (const TorqueResponse& s : samples)
    max_abs = std::max(max_abs, std::abs(s.torque));
  int distinct = 1;
  for (int i = 1; i < n; ++i) {
    bool is_new = true;
    for (int j = 0; j < i && is_new; ++j)
      if (std::abs(samples[i].torque - samples[j].torque) <=
          1e-12 * std::max(1.0, max_abs))
        is_new = false;
    if (is_new) ++distinct;
  }
  if (distinct < 2)
    throw Error(ErrorCode::kInsufficientExcitation,
                "all samples share one torque level", distinct);

  double mean_u = 0.0, mean_a = 0.0;
  for (const TorqueResponse& s : samples) {
    mean_u += s.torque;
    mean_a += s.angular_accel;
  }
  mean_u /= n;
  mean_a /= n;
  double cov = 0.0, var = 0.0;
  for (const TorqueResponse& s : samples) {
    cov += (s.torque - mean_u) * (s.angular_accel - mean_a);
    var += (s.torque - mean_u) * (s.torque - mean_u);
  }
  const double slope = cov / var;
  if (slope <= 0.0)
    throw Error(ErrorCode::kNonPhysicalInertia,
                "torque response slope is not positive");

  PivotFit fit;
  fit.inertia = 1.0 / slope;
  fit.intercept = mean_a - slope * mean_u;
  double ss = 0.0;
  for (const TorqueResponse& s : samples) {
    const double r = s.angular_accel - (slope * s.torque + fit.intercept);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

struct ComInertiaEstimate {
  Vec2 com = Vec2::Zero();
  double inertia_cm = 0.0;
  double residual = 0.0;  // RMS over the pivot samples
};

namespace detail {

inline double com_inertia_residual(
    const std::vector<PivotInertiaSample>& samples, double mass,
    const Vec2& com, double inertia_cm) {
  double ss = 0.0;
  for (const PivotInertiaSample& s : samples) {
    const double r =
        inertia_cm + mass * (s.position - com).squaredNorm() - s.inertia;
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(samples.size()));
}

}  // namespace detail

// Joint center-of-mass / inertia solve from pivot inertias. Substituting
// alpha = I_cm + M |c|^2 linearizes the parallel-axis relation:
//   I_j - M |p_j|^2 = alpha - 2 M p_j . c
// which is an exact ordinary least squares in (alpha, c); this is also why
// at least 3 non-collinear pivots are required (3 linear unknowns).
inline ComInertiaEstimate solve_com_inertia(
    const std::vector<PivotInertiaSample>& samples, double mass) {
  const int n = static_cast<int>(samples.size());
  if (n < 3)
    throw Error(ErrorCode::kInvalidArgument,
                "need at least 3 pivot samples", n);

  Vec2 mean = Vec2::Zero();
  for (const PivotInertiaSample& s : samples) mean += s.position;
  mean /= n;
  Mat2 scatter = Mat2::Zero();
  for (const PivotInertiaSample& s : samples) {
    const Vec2 d = s.position - mean;
    scatter += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat2> es(scatter);
  if (es.eigenvalues()(0) <= 1e-10 * std::max(1.0, es.eigenvalues()(1)))
    throw Error(ErrorCode::kDegenerateGeometry,
                "pivot positions are collinear; the center of mass is "
                "unidentifiable along the line normal");

  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (int j = 0; j < n; ++j) {
    design(j, 0) = 1.0;
    design(j, 1) = -2.0 * mass * samples[j].position.x();
    design(j, 2) = -2.0 * mass * samples[j].position.y();
    rhs(j) = samples[j].inertia - mass * samples[j].position.squaredNorm();
  }
  const Eigen::Vector3d x = design.colPivHouseholderQr().solve(rhs);

  ComInertiaEstimate est;
  est.com = Vec2(x(1), x(2));
  est.inertia_cm = x(0) - mass * est.com.squaredNorm();
  if (est.inertia_cm <= 0.0)
    throw Error(ErrorCode::kInconsistentSamples,
                "pivot inertias imply a non-positive central inertia");
  est.residual = detail::com_inertia_residual(samples, mass, est.com,
                                              est.inertia_cm);
  return est;
}

// Restricted variant for particle models that are themselves collinear
// (straight bars): every mass sits on the line, so the center of mass
// provably lies on it and the normal component is fixed rather than
// unidentifiable. Two unknowns remain; >= 2 distinct pivots suffice.
inline ComInertiaEstimate solve_com_inertia_on_line(
    const std::vector<PivotInertiaSample>& samples, double mass,
    const Vec2& line_origin, const Vec2& line_dir) {
  const int n = static_cast<int>(samples.size());
  if (n < 2)
    throw Error(ErrorCode::kInvalidArgument,
                "need at least 2 pivot samples", n);
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  double d_min = 0.0, d_max = 0.0;
  for (int j = 0; j < n; ++j) {
    const double d = line_dir.dot(samples[j].position - line_origin);
    design(j, 0) = 1.0;
    design(j, 1) = -2.0 * mass * d;
    rhs(j) = samples[j].inertia - mass * d * d;
    d_min = std::min(d_min, d);
    d_max = std::max(d_max, d);
  }
  if (d_max - d_min <= 1e-12)
    throw Error(ErrorCode::kDegenerateGeometry,
                "all pivots coincide on the particle line");
  const Eigen::Vector2d x = design.colPivHouseholderQr().solve(rhs);

  ComInertiaEstimate est;
  est.com = line_origin + x(1) * line_dir;
  est.inertia_cm = x(0) - mass * x(1) * x(1);
  if (est.inertia_cm <= 0.0)
    throw Error(ErrorCode::kInconsistentSamples,
                "pivot inertias imply a non-positive central inertia");
  est.residual = detail::com_inertia_residual(samples, mass, est.com,
                                              est.inertia_cm);
  return est;
}

// Stacked regression system over all steps of the given trajectories,
// using the (estimated) object-level parameters:
//   rows 3t..3t+2:  A_t s = v_{t+1} - v_t - B_t
struct RegressionSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd y;
};

inline RegressionSystem stack_regression(
    const std::vector<Trajectory>& trajectories, const ParticleModel& model,
    const GroupMaps& maps, double mass, double inertia_cm,
    const Vec2& com_body) {
  const int n_s = maps.contact_group_count();
  int total = 0;
  for (const Trajectory& traj : trajectories) total += traj.step_count();
  RegressionSystem sys;
  sys.A.resize(3 * total, n_s);
  sys.y.resize(3 * total);
  int row = 0;
  for (const Trajectory& traj : trajectories) {
    for (int t = 0; t < traj.step_count(); ++t) {
      const RegressionBlock block =
          regression_block(traj.states[t], traj.inputs[t], model, maps, mass,
                           inertia_cm, com_body, traj.config);
      sys.A.middleRows<3>(row) = block.A;
      sys.y.segment<3>(row) =
          traj.states[t + 1].velocity - traj.states[t].velocity - block.B;
      row += 3;
    }
  }
  return sys;
}

struct FrictionSolve {
  Eigen::VectorXd s;
  double loss = 0.0;
  bool mismatch_warning = false;  // negative component beyond tolerance
};

// Closed-form friction-vector estimate by normal equations. Tiny negative
// components are clamped to zero; a clearly negative component cannot come
// from the model and is flagged instead of silently clamped.
inline FrictionSolve estimate_s_lsq(const RegressionSystem& sys,
                                    double rank_tol = 1e-8) {
  const int n_s = static_cast<int>(sys.A.cols());
  FrictionSolve out;
  if (n_s == 0) {
    out.s.resize(0);
    out.loss = sys.y.squaredNorm();
    return out;
  }
  const int rank = rank_Q(sys.A, rank_tol);
  if (rank < n_s)
    throw Error(ErrorCode::kRankDeficient,
                "regression matrix rank " + std::to_string(rank) + " < " +
                    std::to_string(n_s),
                rank);
  const Eigen::MatrixXd gram = sys.A.transpose() * sys.A;
  const Eigen::VectorXd rhs = sys.A.transpose() * sys.y;
  out.s = gram.llt().solve(rhs);
  const double scale = std::max(1e-12, out.s.cwiseAbs().maxCoeff());
  for (int k = 0; k < n_s; ++k) {
    if (out.s(k) < 0.0) {
      if (out.s(k) >= -1e-6 * scale)
        out.s(k) = 0.0;
      else
        out.mismatch_warning = true;
    }
  }
  out.loss = (sys.A * out.s - sys.y).squaredNorm();
  return out;
}

// Quadratic loss of the friction regression and its exact gradient.
inline std::pair<double, Eigen::VectorXd> loss_and_grad(
    const Eigen::VectorXd& s, const RegressionSystem& sys) {
  const Eigen::VectorXd r = sys.A * s - sys.y;
  return {r.squaredNorm(), 2.0 * sys.A.transpose() * r};
}

struct GradientDescentResult {
  Eigen::VectorXd s;
  std::vector<double> trace;  // loss per iteration, leading with L(s0)
  double rate_used = 0.0;
  int halvings = 0;
  bool converged = false;
};

// Plain gradient descent on the friction loss. The step rate is halved
// until it clears the quadratic stability bound 2 / lambda_max(Hessian),
// which keeps the loss trace monotone.
inline GradientDescentResult estimate_s_gd(const Eigen::VectorXd& initial,
                                           const RegressionSystem& sys,
                                           const EstimatorConfig& config) {
  GradientDescentResult out;
  out.s = initial;
  out.rate_used = config.learning_rate;
  if (sys.A.cols() == 0) {
    out.converged = true;
    out.trace.push_back(sys.y.squaredNorm());
    return out;
  }
  const Eigen::MatrixXd gram = sys.A.transpose() * sys.A;
  const double lambda_max =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram)
          .eigenvalues()
          .maxCoeff();
  if (lambda_max > 0.0) {
    while (out.rate_used >= 1.0 / lambda_max) {  // 2 / lambda_max(2 A^T A)
      out.rate_used *= 0.5;
      out.halvings++;
    }
  }
  for (int it = 0; it < config.max_iters; ++it) {
    const auto [loss, grad] = loss_and_grad(out.s, sys);
    out.trace.push_back(loss);
    const Eigen::VectorXd delta = out.rate_used * grad;
    out.s -= delta;
    if (delta.norm() < config.convergence_tol) {
      out.converged = true;
      break;
    }
  }
  out.trace.push_back(loss_and_grad(out.s, sys).first);
  return out;
}

struct MassRecovery {
  Eigen::VectorXd masses;
  double residual = 0.0;
  double condition = 0.0;
  int clamped = 0;  // active-set iterations that hit the m >= 0 bound
};

// Recovers per-group masses from the Hidden States. Four equations always
// hold (total mass, two first-moment equations about the center of mass,
// central inertia); when contact groups pin down mass ratios through a
// shared friction coefficient, those ratios join the system. Groups beyond
// what the equations can resolve fail loudly.
inline MassRecovery recover_m(const HiddenStates& h,
                              const ParticleModel& model,
                              const GroupMaps& maps,
                              double gravity = kDefaultGravity) {
  (void)gravity;
  const int n_m = maps.mass_group_count();
  const int n = model.particle_count();
  MassRecovery out;
  if (n_m == 1) {
    // Total mass alone determines the single group.
    out.masses = Eigen::VectorXd::Constant(1, h.mass / n);
    out.condition = 1.0;
    return out;
  }

  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_m);
  Eigen::VectorXd mx = Eigen::VectorXd::Zero(n_m);
  Eigen::VectorXd my = Eigen::VectorXd::Zero(n_m);
  Eigen::VectorXd inertia = Eigen::VectorXd::Zero(n_m);
  for (int i = 0; i < n; ++i) {
    const int j = maps.mass_group[i];
    const Vec2 d = model.positions[i] - h.com;
    counts(j) += 1.0;
    mx(j) += d.x();
    my(j) += d.y();
    inertia(j) += d.squaredNorm();
  }
  rows.push_back(counts);
  rhs.push_back(h.mass);
  rows.push_back(mx);
  rhs.push_back(0.0);
  rows.push_back(my);
  rhs.push_back(0.0);
  rows.push_back(inertia);
  rhs.push_back(h.inertia_cm);

  // Ratio constraints: two contact groups sharing a friction group satisfy
  // s_k2 * m_j1 - s_k1 * m_j2 = 0.
  const ContactGroupInfo info = contact_group_info(model, maps);
  const int n_s = maps.contact_group_count();
  for (int k1 = 0; k1 < n_s; ++k1) {
    for (int k2 = k1 + 1; k2 < n_s; ++k2) {
      if (info.friction_group[k1] != info.friction_group[k2]) continue;
      if (info.mass_group[k1] == info.mass_group[k2]) continue;
      if (h.s(k1) <= 0.0 && h.s(k2) <= 0.0) continue;
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n_m);
      row(info.mass_group[k1]) = h.s(k2);
      row(info.mass_group[k2]) = -h.s(k1);
      rows.push_back(row);
      rhs.push_back(0.0);
    }
  }

  // Balance heterogeneous row scales; degenerate all-zero rows (a bar's
  // first moment normal to its axis) carry no information and are dropped.
  std::vector<int> keep;
  for (size_t r = 0; r < rows.size(); ++r)
    if (rows[r].norm() > 1e-300) keep.push_back(static_cast<int>(r));
  Eigen::MatrixXd design(keep.size(), n_m);
  Eigen::VectorXd target(keep.size());
  for (size_t r = 0; r < keep.size(); ++r) {
    const double norm = rows[keep[r]].norm();
    design.row(r) = rows[keep[r]] / norm;
    target(r) = rhs[keep[r]] / norm;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10 * sv(0)) ++rank;
  if (rank < n_m)
    throw Error(ErrorCode::kUnidentifiableMass,
                "mass groups underdetermined; null-space dimension " +
                    std::to_string(n_m - rank),
                n_m - rank);
  out.condition = sv(0) / sv(sv.size() - 1);

  // Non-negative least squares by active-set clamping.
  std::vector<bool> active(n_m, false);
  out.masses = svd.solve(target);
  for (int pass = 0; pass < n_m; ++pass) {
    int worst = -1;
    double worst_value = -1e-12;
    for (int j = 0; j < n_m; ++j) {
      if (!active[j] && out.masses(j) < worst_value) {
        worst_value = out.masses(j);
        worst = j;
      }
    }
    if (worst < 0) break;
    active[worst] = true;
    out.clamped++;
    std::vector<int> free;
    for (int j = 0; j < n_m; ++j)
      if (!active[j]) free.push_back(j);
    out.masses.setZero();
    if (free.empty()) break;
    Eigen::MatrixXd sub(design.rows(), free.size());
    for (size_t c = 0; c < free.size(); ++c) sub.col(c) = design.col(free[c]);
    const Eigen::VectorXd sol =
        sub.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV)
            .solve(target);
    for (size_t c = 0; c < free.size(); ++c) out.masses(free[c]) = sol(c);
  }
  for (int j = 0; j < n_m; ++j) out.masses(j) = std::max(out.masses(j), 0.0);
  out.residual = (design * out.masses - target).norm() /
                 std::sqrt(static_cast<double>(design.rows()));
  return out;
}

// Full multi-stage estimate, produced by run_pipeline.
struct EstimationReport {
  std::string method = "hidden-states";
  double measured_mass = 0.0;
  HiddenStates hidden;                // estimated
  Eigen::VectorXd masses;             // per mass group
  Eigen::VectorXd s_closed_form;      // logged for comparison with the GD run
  std::vector<PivotInertiaSample> pivot_samples;
  std::vector<int> pivots_used;
  std::vector<ActionSpec> actions_used;
  std::vector<double> loss_trace;
  double com_inertia_residual = 0.0;
  double s_loss = 0.0;
  double s_loss_closed_form = 0.0;
  double mass_residual = 0.0;
  double mass_condition = 0.0;
  double rate_used = 0.0;
  int gd_halvings = 0;
  bool gd_converged = false;
  bool s_mismatch_warning = false;
};

namespace detail {

template <typename Fn>
auto stage(const char* label, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(label) + ": " + e.message(),
                e.detail());
  }
}

// Seeded pivot choice for the inertia stage. For planar (non-collinear)
// models the chosen set must span two dimensions, so a degenerate draw gets
// repaired with the particle farthest from the sampled line.
inline std::vector<int> choose_pivots(const ParticleModel& model,
                                      const std::vector<int>& candidates,
                                      int k, std::uint64_t seed) {
  std::vector<int> pool = candidates;
  Rng rng(seed);
  std::vector<int> chosen;
  for (int i = 0; i < k; ++i) {
    const int at = rng.uniform_int(static_cast<int>(pool.size()));
    chosen.push_back(pool[at]);
    pool.erase(pool.begin() + at);
  }
  if (model.is_collinear() || pool.empty()) return chosen;

  auto collinear = [&](const std::vector<int>& pts) {
    Vec2 mean = Vec2::Zero();
    for (int i : pts) mean += model.positions[i];
    mean /= static_cast<double>(pts.size());
    Mat2 scatter = Mat2::Zero();
    for (int i : pts) {
      const Vec2 d = model.positions[i] - mean;
      scatter += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat2> es(scatter);
    return es.eigenvalues()(0) <= 1e-10 * std::max(1.0, es.eigenvalues()(1));
  };
  while (collinear(chosen) && !pool.empty()) {
    Vec2 mean = Vec2::Zero();
    for (int i : chosen) mean += model.positions[i];
    mean /= static_cast<double>(chosen.size());
    Vec2 dir = model.positions[chosen[1]] - model.positions[chosen[0]];
    for (size_t i = 2; i < chosen.size() && dir.norm() < 1e-12; ++i)
      dir = model.positions[chosen[i]] - model.positions[chosen[0]];
    dir.normalize();
    int best = 0;
    double best_dist = -1.0;
    for (size_t i = 0; i < pool.size(); ++i) {
      const Vec2 d = model.positions[pool[i]] - mean;
      const double off = std::abs(cross2(dir, d));
      if (off > best_dist) {
        best_dist = off;
        best = static_cast<int>(i);
      }
    }
    chosen.back() = pool[best];
    pool.erase(pool.begin() + best);
  }
  return chosen;
}

}  // namespace detail

// Multi-stage Hidden-States estimation: weigh the object, fit pivot
// inertias from torque sweeps, solve jointly for the center of mass and
// central inertia, select a full-rank action set, estimate the friction
// vector by gradient descent (closed form logged alongside), and finally
// recover the per-group masses. Object-level parameters are estimated
// without any friction knowledge and stay fixed afterwards.
inline EstimationReport run_pipeline(const ParticleModel& model,
                                     const GroupMaps& maps,
                                     ObservationSource& source,
                                     const EstimatorConfig& config) {
  EstimationReport report;
  report.measured_mass = source.measure_mass();

  std::vector<int> candidates;
  for (int i = 0; i < model.particle_count(); ++i) {
    const bool excluded =
        std::find(config.excluded_pivots.begin(), config.excluded_pivots.end(),
                  i) != config.excluded_pivots.end();
    if (model.graspable[i] && !excluded) candidates.push_back(i);
  }

  // Pivot-inertia stage.
  const int k = std::min<int>(config.k_inertia,
                              static_cast<int>(candidates.size()));
  if (k < 3)
    throw Error(ErrorCode::kInsufficientData,
                "pivot-inertia stage: need at least 3 usable pivots", k);
  report.pivots_used = detail::choose_pivots(
      model, candidates, k, derive_seed(config.seed, "pivots"));
  for (int pivot : report.pivots_used) {
    const std::vector<TorqueResponse> sweep = detail::stage(
        "pivot-inertia stage",
        [&] { return source.pivot_sweep(pivot, config.torque_levels); });
    const PivotFit fit = detail::stage(
        "pivot-inertia stage", [&] { return fit_pivot_inertia(sweep); });
    PivotInertiaSample sample;
    sample.pivot_particle = pivot;
    sample.position = model.positions[pivot];
    sample.inertia = fit.inertia;
    sample.residual = fit.residual;
    report.pivot_samples.push_back(sample);
  }

  // Center-of-mass / inertia stage.
  const ComInertiaEstimate com_est = detail::stage("com-inertia stage", [&] {
    if (model.is_collinear()) {
      Vec2 mean = Vec2::Zero();
      for (const Vec2& p : model.positions) mean += p;
      mean /= model.particle_count();
      Vec2 dir = Vec2::Zero();
      for (const Vec2& p : model.positions)
        if ((p - mean).norm() > dir.norm()) dir = p - mean;
      dir.normalize();
      return solve_com_inertia_on_line(report.pivot_samples,
                                       report.measured_mass, mean, dir);
    }
    return solve_com_inertia(report.pivot_samples, report.measured_mass);
  });
  report.com_inertia_residual = com_est.residual;

  // Friction stage: rank-guided action selection, then gradient descent
  // seeded at zero friction (the closed-form solution is logged).
  const int n_s = maps.contact_group_count();
  std::vector<ActionSpec> all_actions =
      enumerate_actions(model, config.slide_directions);
  std::erase_if(all_actions, [&](const ActionSpec& a) {
    return std::find(candidates.begin(), candidates.end(),
                     a.grasp_particle) == candidates.end();
  });
  report.actions_used = detail::stage("friction stage", [&] {
    return sample_actions(all_actions, model, maps, report.measured_mass,
                          com_est.com, n_s, derive_seed(config.seed, "s2"),
                          config.max_extra_actions, config.sim,
                          config.rank_tol);
  });
  std::vector<Trajectory> observed;
  observed.reserve(report.actions_used.size());
  for (const ActionSpec& action : report.actions_used)
    observed.push_back(detail::stage(
        "friction stage", [&] { return source.observe(action); }));
  const RegressionSystem sys =
      stack_regression(observed, model, maps, report.measured_mass,
                       com_est.inertia_cm, com_est.com);
  const FrictionSolve closed = detail::stage(
      "friction stage", [&] { return estimate_s_lsq(sys, config.rank_tol); });
  report.s_closed_form = closed.s;
  report.s_loss_closed_form = closed.loss;
  report.s_mismatch_warning = closed.mismatch_warning;
  const GradientDescentResult gd =
      estimate_s_gd(Eigen::VectorXd::Zero(n_s), sys, config);
  report.loss_trace = gd.trace;
  report.rate_used = gd.rate_used;
  report.gd_halvings = gd.halvings;
  report.gd_converged = gd.converged;
  report.s_loss = gd.trace.back();

  report.hidden.mass = report.measured_mass;
  report.hidden.inertia_cm = com_est.inertia_cm;
  report.hidden.com = com_est.com;
  report.hidden.s = gd.s.cwiseMax(0.0);

  // Mass recovery.
  const MassRecovery recovery = detail::stage(
      "mass-recovery stage", [&] { return recover_m(report.hidden, model,
                                                    maps); });
  report.masses = recovery.masses;
  report.mass_residual = recovery.residual;
  report.mass_condition = recovery.condition;
  return report;
}

}  // namespace massdist

#endif  // MASSDIST_ESTIMATION_HPP_
