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

#ifndef MASSDIST_IO_HPP_
#define MASSDIST_IO_HPP_

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "massdist/actions.hpp"
#include "massdist/catalog.hpp"
#include "massdist/dynamics.hpp"
#include "massdist/error.hpp"
#include "massdist/estimation.hpp"

namespace massdist {

using Json = nlohmann::ordered_json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

// Fixed-width down to the last bit; keeps seeded runs byte-reproducible.
inline std::string format_double(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

// ---------------------------------------------------------------------------
// Object descriptor (JSON). Round-trips bit-exactly for files produced by
// save_object.

namespace detail {

inline Json mask_to_json(const GridMask& mask) {
  Json rows = Json::array();
  for (int r = 0; r < mask.rows; ++r) {
    Json row = Json::array();
    for (int c = 0; c < mask.cols; ++c) row.push_back(mask.at(r, c) ? 1 : 0);
    rows.push_back(row);
  }
  return rows;
}

inline Json groups_to_json(const GroupGrid& grid) {
  Json rows = Json::array();
  for (int r = 0; r < grid.rows; ++r) {
    Json row = Json::array();
    for (int c = 0; c < grid.cols; ++c) row.push_back(grid.at(r, c));
    rows.push_back(row);
  }
  return rows;
}

inline GridMask mask_from_json(const Json& rows) {
  GridMask mask(static_cast<int>(rows.size()),
                static_cast<int>(rows.front().size()));
  for (int r = 0; r < mask.rows; ++r)
    for (int c = 0; c < mask.cols; ++c)
      mask.set(r, c, rows[r][c].get<int>() != 0);
  return mask;
}

inline GroupGrid groups_from_json(const Json& rows) {
  GroupGrid grid(static_cast<int>(rows.size()),
                 static_cast<int>(rows.front().size()));
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c) grid.set(r, c, rows[r][c].get<int>());
  return grid;
}

}  // namespace detail

inline Json object_to_json(const CatalogObject& obj) {
  Json j;
  j["name"] = obj.name;
  j["spacing"] = obj.model.spacing;
  j["occupancy"] = detail::mask_to_json(obj.occupancy);
  j["contact"] = detail::mask_to_json(obj.contact_grid);
  j["graspable"] = detail::mask_to_json(obj.graspable_grid);
  j["mass_groups"] = detail::groups_to_json(obj.mass_grid);
  j["friction_groups"] = detail::groups_to_json(obj.friction_grid);
  j["masses"] = std::vector<double>(
      obj.params.masses.data(), obj.params.masses.data() + obj.params.masses.size());
  j["mus"] = std::vector<double>(obj.params.mus.data(),
                                 obj.params.mus.data() + obj.params.mus.size());
  return j;
}

inline CatalogObject object_from_json(const Json& j) {
  CatalogObject obj;
  try {
    obj.name = j.at("name").get<std::string>();
    obj.occupancy = detail::mask_from_json(j.at("occupancy"));
    obj.contact_grid = detail::mask_from_json(j.at("contact"));
    obj.graspable_grid = detail::mask_from_json(j.at("graspable"));
    obj.mass_grid = detail::groups_from_json(j.at("mass_groups"));
    obj.friction_grid = detail::groups_from_json(j.at("friction_groups"));
    const auto masses = j.at("masses").get<std::vector<double>>();
    const auto mus = j.at("mus").get<std::vector<double>>();
    obj.params.masses =
        Eigen::Map<const Eigen::VectorXd>(masses.data(), masses.size());
    obj.params.mus = Eigen::Map<const Eigen::VectorXd>(mus.data(), mus.size());
    assemble_object(&obj, j.at("spacing").get<double>());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kIo,
                std::string("malformed object descriptor: ") + e.what());
  }
  return obj;
}

inline void save_object(const CatalogObject& obj, const std::string& path) {
  write_file(path, object_to_json(obj).dump(2) + "\n");
}

inline CatalogObject load_object(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("bad JSON in ") + path + ": " +
                                    e.what());
  }
  return object_from_json(j);
}

// Resolves an object argument: a path to a descriptor file if one exists,
// otherwise a catalog name.
inline CatalogObject resolve_object(const std::string& name_or_path) {
  if (std::ifstream(name_or_path).good()) return load_object(name_or_path);
  return builtin_object(name_or_path);
}

// ---------------------------------------------------------------------------
// Action lists (JSON).

inline Json action_to_json(const ActionSpec& a) {
  Json j;
  if (a.kind == ActionKind::kSlide) {
    j["kind"] = "slide";
    j["grasp_particle"] = a.grasp_particle;
    j["direction"] = {a.direction.x(), a.direction.y()};
    j["speed"] = a.speed;
  } else {
    j["kind"] = "rotate";
    j["grasp_particle"] = a.grasp_particle;
    j["angular_rate"] = a.angular_rate;
  }
  j["duration"] = a.duration;
  return j;
}

inline ActionSpec action_from_json(const Json& j) {
  ActionSpec a;
  try {
    const std::string kind = j.at("kind").get<std::string>();
    a.grasp_particle = j.at("grasp_particle").get<int>();
    a.duration = j.at("duration").get<double>();
    if (kind == "slide") {
      a.kind = ActionKind::kSlide;
      a.direction =
          Vec2(j.at("direction")[0].get<double>(),
               j.at("direction")[1].get<double>());
      a.speed = j.at("speed").get<double>();
    } else if (kind == "rotate") {
      a.kind = ActionKind::kRotate;
      a.angular_rate = j.at("angular_rate").get<double>();
    } else {
      throw Error(ErrorCode::kIo, "unknown action kind " + kind);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("malformed action: ") + e.what());
  }
  return a;
}

inline std::vector<ActionSpec> load_actions(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("bad JSON in ") + path + ": " +
                                    e.what());
  }
  if (!j.is_array() || j.empty())
    throw Error(ErrorCode::kIo, "action file must be a non-empty list");
  std::vector<ActionSpec> actions;
  for (const Json& item : j) actions.push_back(action_from_json(item));
  return actions;
}

inline void save_actions(const std::vector<ActionSpec>& actions,
                         const std::string& path) {
  Json j = Json::array();
  for (const ActionSpec& a : actions) j.push_back(action_to_json(a));
  write_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Trajectory CSV: t,px,py,pw,vx,vy,vw,grasp_idx,ux,uy,uw. One row per state;
// the final row carries empty input fields.

inline std::string trajectory_to_csv(const Trajectory& traj) {
  std::ostringstream out;
  out << "t,px,py,pw,vx,vy,vw,grasp_idx,ux,uy,uw\n";
  for (size_t k = 0; k < traj.states.size(); ++k) {
    const ObjectState& s = traj.states[k];
    out << format_double(k * traj.config.dt);
    for (int c = 0; c < 3; ++c) out << ',' << format_double(s.pose(c));
    for (int c = 0; c < 3; ++c) out << ',' << format_double(s.velocity(c));
    if (k < traj.inputs.size()) {
      const WrenchInput& u = traj.inputs[k];
      out << ',' << u.particle;
      for (int c = 0; c < 3; ++c) out << ',' << format_double(u.wrench(c));
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
  return out.str();
}

inline void save_trajectory(const Trajectory& traj, const std::string& path) {
  write_file(path, trajectory_to_csv(traj));
}

inline Trajectory trajectory_from_csv(const std::string& text,
                                      const SimConfig& base_config) {
  Trajectory traj;
  traj.config = base_config;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::kIo, "empty trajectory file");
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    while (fields.size() < 11) fields.push_back("");
    ObjectState state;
    times.push_back(std::stod(fields[0]));
    for (int c = 0; c < 3; ++c) state.pose(c) = std::stod(fields[1 + c]);
    for (int c = 0; c < 3; ++c) state.velocity(c) = std::stod(fields[4 + c]);
    traj.states.push_back(state);
    if (!fields[7].empty()) {
      WrenchInput u;
      u.particle = std::stoi(fields[7]);
      for (int c = 0; c < 3; ++c) u.wrench(c) = std::stod(fields[8 + c]);
      traj.inputs.push_back(u);
    }
  }
  if (times.size() >= 2) traj.config.dt = times[1] - times[0];
  if (traj.states.size() != traj.inputs.size() + 1)
    throw Error(ErrorCode::kIo, "trajectory rows/inputs mismatch");
  return traj;
}

// ---------------------------------------------------------------------------
// Run reports (JSON): one schema for the pipeline and the baselines,
// distinguished by the `method` tag.

struct RunReport {
  std::string method;        // "pipeline" | "random" | "weighted" | "explicit"
  std::string object_name;
  std::uint64_t seed = 0;
  std::string noise_preset = "none";
  double measured_mass = 0.0;
  HiddenStates hidden;
  Eigen::VectorXd masses;          // per mass group
  Eigen::VectorXd mus;             // baselines only (joint-space estimate)
  Eigen::VectorXd s_closed_form;   // pipeline only
  std::vector<int> pivots_used;
  std::vector<ActionSpec> actions_used;
  std::vector<double> loss_trace;
  std::vector<double> pivot_residuals;
  double com_inertia_residual = 0.0;
  double s_loss = 0.0;
  double mass_residual = 0.0;
  double mass_condition = 0.0;
  std::string variant;             // optimizer variant for explicit-state
  int iters = 0;
  double learning_rate = 0.0;
  double dt = 0.0;
};

namespace detail {

inline std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd from_std(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

}  // namespace detail

inline Json report_to_json(const RunReport& r) {
  Json j;
  j["method"] = r.method;
  j["object"] = r.object_name;
  j["seed"] = r.seed;
  j["noise"] = r.noise_preset;
  j["measured_mass"] = r.measured_mass;
  j["hidden_states"] = {
      {"mass", r.hidden.mass},
      {"inertia_cm", r.hidden.inertia_cm},
      {"com", {r.hidden.com.x(), r.hidden.com.y()}},
      {"s", detail::to_std(r.hidden.s)},
  };
  j["masses"] = detail::to_std(r.masses);
  j["mus"] = detail::to_std(r.mus);
  j["s_closed_form"] = detail::to_std(r.s_closed_form);
  j["pivots_used"] = r.pivots_used;
  Json actions = Json::array();
  for (const ActionSpec& a : r.actions_used) actions.push_back(action_to_json(a));
  j["actions_used"] = actions;
  j["residuals"] = {
      {"pivot_fits", r.pivot_residuals},
      {"com_inertia", r.com_inertia_residual},
      {"s_loss", r.s_loss},
      {"mass_recovery", r.mass_residual},
      {"mass_condition", r.mass_condition},
  };
  j["loss_trace"] = r.loss_trace;
  j["variant"] = r.variant;
  j["config"] = {
      {"iters", r.iters},
      {"learning_rate", r.learning_rate},
      {"dt", r.dt},
  };
  return j;
}

inline RunReport report_from_json(const Json& j) {
  RunReport r;
  try {
    r.method = j.at("method").get<std::string>();
    r.object_name = j.at("object").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.noise_preset = j.at("noise").get<std::string>();
    r.measured_mass = j.at("measured_mass").get<double>();
    const Json& h = j.at("hidden_states");
    r.hidden.mass = h.at("mass").get<double>();
    r.hidden.inertia_cm = h.at("inertia_cm").get<double>();
    r.hidden.com = Vec2(h.at("com")[0].get<double>(),
                        h.at("com")[1].get<double>());
    r.hidden.s = detail::from_std(h.at("s").get<std::vector<double>>());
    r.masses = detail::from_std(j.at("masses").get<std::vector<double>>());
    r.mus = detail::from_std(j.at("mus").get<std::vector<double>>());
    r.s_closed_form =
        detail::from_std(j.at("s_closed_form").get<std::vector<double>>());
    r.pivots_used = j.at("pivots_used").get<std::vector<int>>();
    for (const Json& a : j.at("actions_used"))
      r.actions_used.push_back(action_from_json(a));
    const Json& res = j.at("residuals");
    r.pivot_residuals = res.at("pivot_fits").get<std::vector<double>>();
    r.com_inertia_residual = res.at("com_inertia").get<double>();
    r.s_loss = res.at("s_loss").get<double>();
    r.mass_residual = res.at("mass_recovery").get<double>();
    r.mass_condition = res.at("mass_condition").get<double>();
    r.loss_trace = j.at("loss_trace").get<std::vector<double>>();
    r.variant = j.at("variant").get<std::string>();
    r.iters = j.at("config").at("iters").get<int>();
    r.learning_rate = j.at("config").at("learning_rate").get<double>();
    r.dt = j.at("config").at("dt").get<double>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("malformed report: ") + e.what());
  }
  return r;
}

inline void save_report(const RunReport& r, const std::string& path) {
  write_file(path, report_to_json(r).dump(2) + "\n");
}

inline RunReport load_report(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("bad JSON in ") + path + ": " +
                                    e.what());
  }
  return report_from_json(j);
}

}  // namespace massdist

#endif  // MASSDIST_IO_HPP_
