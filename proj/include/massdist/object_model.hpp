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

#ifndef MASSDIST_OBJECT_MODEL_HPP_
#define MASSDIST_OBJECT_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "massdist/error.hpp"
#include "massdist/planar.hpp"

namespace massdist {

inline constexpr double kDefaultGravity = 9.81;  // m/s^2

// Row-major boolean grid used for occupancy, contact and graspable masks.
struct GridMask {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> cells;  // row-major, 0/1

  GridMask() = default;
  GridMask(int r, int c) : rows(r), cols(c), cells(r * c, 0) {}

  bool at(int r, int c) const { return cells[r * cols + c] != 0; }
  void set(int r, int c, bool v) { cells[r * cols + c] = v ? 1 : 0; }
  bool same_shape(const GridMask& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

// Row-major integer grid for group ids; -1 marks unassigned cells.
struct GroupGrid {
  int rows = 0;
  int cols = 0;
  std::vector<int> cells;

  GroupGrid() = default;
  GroupGrid(int r, int c) : rows(r), cols(c), cells(r * c, -1) {}

  int at(int r, int c) const { return cells[r * cols + c]; }
  void set(int r, int c, int v) { cells[r * cols + c] = v; }
};

// Body-frame particle representation of a planar object. Particle positions
// sit at grid cell centers; the first occupied cell (row-major scan order)
// defines the body origin, which makes serialized models
// translation-canonical.
struct ParticleModel {
  std::vector<Vec2> positions;    // body frame, meters
  double spacing = 0.0;           // grid pitch, meters
  std::vector<bool> contact;      // particle touches the support surface
  std::vector<bool> graspable;

  int particle_count() const { return static_cast<int>(positions.size()); }

  std::pair<Vec2, Vec2> bounding_box() const {
    Vec2 lo = positions.front();
    Vec2 hi = positions.front();
    for (const Vec2& p : positions) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    return {lo, hi};
  }

  // True when all particle positions lie on one line (within tol meters).
  bool is_collinear(double tol = 1e-12) const {
    if (positions.size() < 3) return true;
    Vec2 mean = Vec2::Zero();
    for (const Vec2& p : positions) mean += p;
    mean /= static_cast<double>(positions.size());
    Mat2 scatter = Mat2::Zero();
    for (const Vec2& p : positions) {
      const Vec2 d = p - mean;
      scatter += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat2> es(scatter);
    return es.eigenvalues()(0) <= tol * std::max(1.0, es.eigenvalues()(1));
  }
};

// Per-particle parameter grouping. Mass groups cover every particle;
// friction and contact groups exist only for particles touching the table
// (the friction columns of non-contact particles are identically zero).
// Contact groups refine the (mass group, friction group) pairs so each
// carries a single friction-force magnitude.
struct GroupMaps {
  std::vector<int> mass_group;                    // [0, mass_group_count)
  std::vector<std::optional<int>> friction_group;
  std::vector<std::optional<int>> contact_group;

  int mass_group_count() const {
    int n = 0;
    for (int g : mass_group) n = std::max(n, g + 1);
    return n;
  }
  int friction_group_count() const {
    int n = 0;
    for (const auto& g : friction_group)
      if (g) n = std::max(n, *g + 1);
    return n;
  }
  int contact_group_count() const {
    int n = 0;
    for (const auto& g : contact_group)
      if (g) n = std::max(n, *g + 1);
    return n;
  }

  // Particle count per mass group.
  std::vector<int> mass_group_sizes() const {
    std::vector<int> sizes(mass_group_count(), 0);
    for (int g : mass_group) sizes[g]++;
    return sizes;
  }
};

// Per-group physical parameters: mass of one particle in the group (kg) and
// sliding friction coefficient (dimensionless).
struct ObjectParams {
  Eigen::VectorXd masses;  // length mass_group_count
  Eigen::VectorXd mus;     // length friction_group_count
};

// Derived parameters that make the estimation problem linear: total mass,
// moment of inertia about the center of mass, center of mass, and the
// per-contact-group friction force magnitude mu*m*g.
struct HiddenStates {
  double mass = 0.0;        // kg
  double inertia_cm = 0.0;  // kg m^2
  Vec2 com = Vec2::Zero();  // body frame, m
  Eigen::VectorXd s;        // N, length contact_group_count
};

namespace detail {

inline void check_grouping(const ParticleModel& model, const GroupMaps& maps) {
  const int n = model.particle_count();
  if (static_cast<int>(maps.mass_group.size()) != n ||
      static_cast<int>(maps.friction_group.size()) != n ||
      static_cast<int>(maps.contact_group.size()) != n) {
    throw Error(ErrorCode::kInconsistentGrouping,
                "group assignment size differs from particle count");
  }
  const int n_m = maps.mass_group_count();
  const int n_mu = maps.friction_group_count();
  const int n_s = maps.contact_group_count();
  std::vector<int> m_used(n_m, 0), mu_used(n_mu, 0), s_used(n_s, 0);
  for (int i = 0; i < n; ++i) {
    if (maps.mass_group[i] < 0)
      throw Error(ErrorCode::kInconsistentGrouping, "negative mass group id");
    m_used[maps.mass_group[i]]++;
    if (model.contact[i]) {
      if (!maps.friction_group[i] || !maps.contact_group[i])
        throw Error(ErrorCode::kInconsistentGrouping,
                    "contact particle lacks friction/contact group");
      mu_used[*maps.friction_group[i]]++;
      s_used[*maps.contact_group[i]]++;
    } else if (maps.friction_group[i] || maps.contact_group[i]) {
      throw Error(ErrorCode::kInconsistentGrouping,
                  "non-contact particle carries a friction/contact group");
    }
  }
  for (int c : m_used)
    if (c == 0)
      throw Error(ErrorCode::kInconsistentGrouping, "unused mass group id");
  for (int c : mu_used)
    if (c == 0)
      throw Error(ErrorCode::kInconsistentGrouping,
                  "unused friction group id");
  for (int c : s_used)
    if (c == 0)
      throw Error(ErrorCode::kInconsistentGrouping, "unused contact group id");
}

}  // namespace detail

// Builds a particle model from occupancy/contact/graspable grids. One
// particle per occupied cell, positioned at the cell center relative to the
// first occupied cell.
inline ParticleModel build_grid_model(const GridMask& mask, double spacing,
                                      const GridMask& contact,
                                      const GridMask& graspable) {
  if (spacing <= 0.0)
    throw Error(ErrorCode::kInvalidArgument, "spacing must be positive");
  if (!mask.same_shape(contact) || !mask.same_shape(graspable))
    throw Error(ErrorCode::kInvalidArgument,
                "contact/graspable grids must match the occupancy shape");

  ParticleModel model;
  model.spacing = spacing;
  bool have_origin = false;
  Vec2 origin = Vec2::Zero();
  for (int r = 0; r < mask.rows; ++r) {
    for (int c = 0; c < mask.cols; ++c) {
      if (!mask.at(r, c)) continue;
      const Vec2 cell(c * spacing, r * spacing);
      if (!have_origin) {
        origin = cell;
        have_origin = true;
      }
      model.positions.push_back(cell - origin);
      model.contact.push_back(contact.at(r, c));
      model.graspable.push_back(graspable.at(r, c));
    }
  }
  if (model.particle_count() < 2)
    throw Error(ErrorCode::kInvalidShape,
                "occupancy grid must contain at least 2 cells");
  return model;
}

// Assigns contact groups as the dense re-indexing of the distinct
// (mass group, friction group) pairs found among contact particles, so every
// contact group carries a single mu*m*g value by construction.
inline void derive_contact_groups(const ParticleModel& model,
                                  GroupMaps* maps) {
  maps->contact_group.assign(model.particle_count(), std::nullopt);
  std::map<std::pair<int, int>, int> index;
  for (int i = 0; i < model.particle_count(); ++i) {
    if (!model.contact[i]) continue;
    if (!maps->friction_group[i])
      throw Error(ErrorCode::kInconsistentGrouping,
                  "contact particle lacks a friction group");
    const std::pair<int, int> key{maps->mass_group[i],
                                  *maps->friction_group[i]};
    auto [it, inserted] = index.try_emplace(key, index.size());
    maps->contact_group[i] = it->second;
  }
}

// Computes the Hidden States from per-group parameters:
//   mass        sum of per-particle masses
//   com         mass-weighted particle centroid
//   inertia_cm  sum m_i |p_i - com|^2
//   s_k         mu_k * (particle mass of contact group k) * g
// Every contact group must map to exactly one mass group and one friction
// group, otherwise its s entry would not be a single scalar.
inline HiddenStates hidden_states_of(const ParticleModel& model,
                                     const GroupMaps& maps,
                                     const ObjectParams& params,
                                     double gravity = kDefaultGravity) {
  detail::check_grouping(model, maps);
  const int n = model.particle_count();
  if (params.masses.size() != maps.mass_group_count())
    throw Error(ErrorCode::kInvalidArgument, "mass vector length mismatch");
  if (params.mus.size() != maps.friction_group_count())
    throw Error(ErrorCode::kInvalidArgument,
                "friction vector length mismatch");
  for (int j = 0; j < params.masses.size(); ++j)
    if (params.masses(j) <= 0.0)
      throw Error(ErrorCode::kInvalidArgument, "masses must be positive");
  for (int j = 0; j < params.mus.size(); ++j)
    if (params.mus(j) < 0.0)
      throw Error(ErrorCode::kInvalidArgument,
                  "friction coefficients must be non-negative");

  HiddenStates h;
  Vec2 weighted = Vec2::Zero();
  for (int i = 0; i < n; ++i) {
    const double mi = params.masses(maps.mass_group[i]);
    h.mass += mi;
    weighted += mi * model.positions[i];
  }
  h.com = weighted / h.mass;
  for (int i = 0; i < n; ++i) {
    const double mi = params.masses(maps.mass_group[i]);
    h.inertia_cm += mi * (model.positions[i] - h.com).squaredNorm();
  }

  const int n_s = maps.contact_group_count();
  h.s = Eigen::VectorXd::Zero(n_s);
  std::vector<int> s_mass(n_s, -1), s_mu(n_s, -1);
  for (int i = 0; i < n; ++i) {
    if (!maps.contact_group[i]) continue;
    const int k = *maps.contact_group[i];
    if (s_mass[k] < 0) {
      s_mass[k] = maps.mass_group[i];
      s_mu[k] = *maps.friction_group[i];
      h.s(k) = params.mus(s_mu[k]) * params.masses(s_mass[k]) * gravity;
    } else if (s_mass[k] != maps.mass_group[i] ||
               s_mu[k] != *maps.friction_group[i]) {
      throw Error(ErrorCode::kInconsistentGrouping,
                  "contact group spans multiple mass or friction groups",
                  k);
    }
  }
  return h;
}

// Mass group and friction group of each contact group (derived lookup).
struct ContactGroupInfo {
  std::vector<int> mass_group;      // per contact group
  std::vector<int> friction_group;  // per contact group
  std::vector<int> sizes;           // particles per contact group
};

inline ContactGroupInfo contact_group_info(const ParticleModel& model,
                                           const GroupMaps& maps) {
  ContactGroupInfo info;
  const int n_s = maps.contact_group_count();
  info.mass_group.assign(n_s, -1);
  info.friction_group.assign(n_s, -1);
  info.sizes.assign(n_s, 0);
  for (int i = 0; i < model.particle_count(); ++i) {
    if (!maps.contact_group[i]) continue;
    const int k = *maps.contact_group[i];
    info.mass_group[k] = maps.mass_group[i];
    info.friction_group[k] = *maps.friction_group[i];
    info.sizes[k]++;
  }
  return info;
}

}  // namespace massdist

#endif  // MASSDIST_OBJECT_MODEL_HPP_
