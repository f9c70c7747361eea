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

#ifndef MASSDIST_CATALOG_HPP_
#define MASSDIST_CATALOG_HPP_

#include <string>
#include <vector>

#include "massdist/error.hpp"
#include "massdist/object_model.hpp"

namespace massdist {

// A catalog object bundles the particle model with the grid layout it was
// built from, so descriptors and per-cell difference reports can be emitted
// in the original grid frame.
struct CatalogObject {
  std::string name;
  ParticleModel model;
  GroupMaps maps;
  ObjectParams params;
  GridMask occupancy;
  GridMask contact_grid;
  GridMask graspable_grid;
  GroupGrid mass_grid;
  GroupGrid friction_grid;
};

namespace detail {

inline GridMask mask_from_rows(const std::vector<std::string>& rows) {
  GridMask m(static_cast<int>(rows.size()),
             static_cast<int>(rows.front().size()));
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) m.set(r, c, rows[r][c] == 'x');
  return m;
}

inline GroupGrid groups_from_rows(const std::vector<std::string>& rows) {
  GroupGrid g(static_cast<int>(rows.size()),
              static_cast<int>(rows.front().size()));
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c)
      if (rows[r][c] != '.') g.set(r, c, rows[r][c] - '0');
  return g;
}

}  // namespace detail

// Builds the particle model and group maps from the grids of a partially
// filled catalog object (grids and parameters set, the rest empty).
inline void assemble_object(CatalogObject* obj, double spacing) {
  obj->model = build_grid_model(obj->occupancy, spacing, obj->contact_grid,
                                obj->graspable_grid);
  obj->maps = GroupMaps{};
  for (int r = 0; r < obj->occupancy.rows; ++r) {
    for (int c = 0; c < obj->occupancy.cols; ++c) {
      if (!obj->occupancy.at(r, c)) continue;
      obj->maps.mass_group.push_back(obj->mass_grid.at(r, c));
      if (obj->contact_grid.at(r, c))
        obj->maps.friction_group.emplace_back(obj->friction_grid.at(r, c));
      else
        obj->maps.friction_group.emplace_back(std::nullopt);
    }
  }
  derive_contact_groups(obj->model, &obj->maps);
}

namespace detail {

// Assembles a catalog object from grid art. Mass/friction group rows use
// digits per occupied cell; friction rows use '.' for non-contact cells.
inline CatalogObject make_object(const std::string& name, double spacing,
                                 const std::vector<std::string>& occupancy,
                                 const std::vector<std::string>& contact,
                                 const std::vector<std::string>& graspable,
                                 const std::vector<std::string>& mass_groups,
                                 const std::vector<std::string>& mu_groups,
                                 std::vector<double> masses,
                                 std::vector<double> mus) {
  CatalogObject obj;
  obj.name = name;
  obj.occupancy = mask_from_rows(occupancy);
  obj.contact_grid = mask_from_rows(contact);
  obj.graspable_grid = mask_from_rows(graspable);
  obj.mass_grid = groups_from_rows(mass_groups);
  obj.friction_grid = groups_from_rows(mu_groups);
  assemble_object(&obj, spacing);
  obj.params.masses = Eigen::Map<Eigen::VectorXd>(masses.data(),
                                                  masses.size());
  obj.params.mus = Eigen::Map<Eigen::VectorXd>(mus.data(), mus.size());
  return obj;
}

}  // namespace detail

inline std::vector<std::string> catalog_names() {
  return {"I1", "I2", "L1", "L2", "F1", "F2", "hammer", "wrench"};
}

// Deterministic synthetic object set: straight bars, L- and F-shaped block
// assemblies, a hammer and a wrench. Each combines a light and a heavy
// material group; ground-truth values are plausible bench-scale choices for
// 5 cm aluminum/steel blocks.
inline CatalogObject builtin_object(const std::string& name) {
  const double spacing = 0.05;
  if (name == "I1") {
    return detail::make_object(
        name, spacing, {"xxxx"}, {"xxxx"}, {"xxxx"}, {"0011"}, {"0000"},
        {0.35, 1.00}, {0.30});
  }
  if (name == "I2") {
    return detail::make_object(
        name, spacing, {"xxxxx"}, {"xxxxx"}, {"xxxxx"}, {"00011"}, {"00000"},
        {0.30, 0.90}, {0.25});
  }
  if (name == "L1") {
    // Heavy short arm pointing up from the corner.
    return detail::make_object(
        name, spacing,
        {"xxxx", "x...", "x..."}, {"xxxx", "x...", "x..."},
        {"xxxx", "x...", "x..."}, {"0000", "1...", "1..."},
        {"0000", "0...", "0..."}, {0.40, 1.20}, {0.30});
  }
  if (name == "L2") {
    // Heavy long arm; the two arms also slide on different pad materials.
    return detail::make_object(
        name, spacing,
        {"xxxx", "x...", "x..."}, {"xxxx", "x...", "x..."},
        {"xxxx", "x...", "x..."}, {"0000", "1...", "1..."},
        {"0000", "1...", "1..."}, {1.10, 0.45}, {0.20, 0.50});
  }
  if (name == "F1") {
    // Spine with two arms, heavy top bar.
    return detail::make_object(
        name, spacing,
        {"x..", "x..", "xx.", "xxx"}, {"x..", "x..", "xx.", "xxx"},
        {"x..", "x..", "xx.", "xxx"}, {"0..", "0..", "00.", "011"},
        {"0..", "0..", "00.", "000"}, {0.35, 1.30}, {0.35});
  }
  if (name == "F2") {
    // Heavy lower spine; the middle-arm block is relieved and never touches.
    return detail::make_object(
        name, spacing,
        {"x..", "x..", "xx.", "xxx"}, {"x..", "x..", "x..", "xxx"},
        {"x..", "x..", "xx.", "xxx"}, {"1..", "1..", "00.", "000"},
        {"0..", "0..", "0..", "000"}, {0.30, 1.00}, {0.30});
  }
  if (name == "hammer") {
    return detail::make_object(
        name, spacing,
        {".....x", "xxxxxx", ".....x"}, {".....x", "xxxxxx", ".....x"},
        {".....x", "xxxxxx", ".....x"}, {".....1", "000001", ".....1"},
        {".....0", "000000", ".....0"}, {0.25, 1.20}, {0.40});
  }
  if (name == "wrench") {
    // Boxy jaw plus a handle arched off the table mid-span; one jaw block
    // sits where the gripper cannot reach.
    return detail::make_object(
        name, spacing,
        {"xxxxxxx", "xx....."}, {"xxx..xx", "xx....."},
        {"xxxxxxx", "x......"}, {"1100000", "11....."},
        {"000..00", "00....."}, {0.25, 0.60}, {0.30});
  }
  throw Error(ErrorCode::kCatalogUnknown, "no catalog object named " + name);
}

}  // namespace massdist

#endif  // MASSDIST_CATALOG_HPP_
