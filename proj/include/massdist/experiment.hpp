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

#ifndef MASSDIST_EXPERIMENT_HPP_
#define MASSDIST_EXPERIMENT_HPP_

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "massdist/baselines.hpp"
#include "massdist/catalog.hpp"
#include "massdist/estimation.hpp"
#include "massdist/io.hpp"
#include "massdist/metrics.hpp"
#include "massdist/synthetic.hpp"

namespace massdist {

struct ExperimentResult {
  std::string object;
  std::string method;
  std::uint64_t seed = 0;
  std::optional<double> nad;
  std::optional<double> mpd;
  std::string status = "ok";        // "ok" or an error tag
  double runtime_seconds = 0.0;     // console diagnostics only, never written
};

// Rotate actions about every graspable pivot the report did not touch
// during data collection.
inline std::vector<ActionSpec> held_out_rotations(const CatalogObject& obj,
                                                  const RunReport& report) {
  std::vector<bool> used(obj.model.particle_count(), false);
  for (int p : report.pivots_used) used[p] = true;
  for (const ActionSpec& a : report.actions_used) used[a.grasp_particle] = true;
  std::vector<ActionSpec> out;
  for (int i = 0; i < obj.model.particle_count(); ++i)
    if (obj.model.graspable[i] && !used[i])
      out.push_back(ActionSpec::rotate(i));
  return out;
}

// Mean particle distance on held-out rotations: the true system executes the
// action, and the estimate replays the recorded wrench through the forward
// simulation.
inline double held_out_mpd(const CatalogObject& obj, const RunReport& report,
                           const SimConfig& sim) {
  const std::vector<ActionSpec> actions = held_out_rotations(obj, report);
  if (actions.empty())
    throw Error(ErrorCode::kEvaluation,
                "held-out set is empty: every pivot was used in training");
  const HiddenStates truth =
      hidden_states_of(obj.model, obj.maps, obj.params, sim.gravity);
  double total = 0.0;
  for (const ActionSpec& action : actions) {
    Trajectory traj_true;
    traj_true.config = sim;
    traj_true.states =
        kinematic_trajectory(action, obj.model, Vec3::Zero(), sim);
    traj_true.inputs = inverse_dynamics_wrench(
        traj_true.states, obj.model, obj.maps, truth, action.grasp_particle,
        sim);
    const Trajectory traj_est =
        simulate(obj.model, obj.maps, report.hidden, traj_true.states.front(),
                 traj_true.inputs, sim);
    total += mpd(traj_est, traj_true, obj.model);
  }
  return total / actions.size();
}

// NAD + held-out MPD of a stored report against ground truth.
inline std::pair<double, double> evaluate_report(const CatalogObject& truth,
                                                 const RunReport& report,
                                                 const SimConfig& sim) {
  if (report.masses.size() != truth.params.masses.size())
    throw Error(ErrorCode::kEvaluation,
                "report mass groups do not match the truth object");
  const double nad_value = nad(report.masses, truth.params.masses, truth.maps);
  return {nad_value, held_out_mpd(truth, report, sim)};
}

struct ExperimentConfig {
  EstimatorConfig estimator;
  SearchConfig search;
  NoiseModel noise;                 // per-cell seeds derived internally
  std::string noise_preset = "none";
  std::vector<std::uint64_t> seeds = {1};
};

inline std::vector<std::string> all_methods() {
  return {"pipeline", "random", "weighted", "explicit"};
}

namespace detail {

inline RunReport baseline_report(const CatalogObject& obj,
                                 const std::string& method,
                                 const SearchResult& result,
                                 double gravity) {
  RunReport report;
  report.method = method;
  report.object_name = obj.name;
  ObjectParams est;
  est.masses = result.m;
  est.mus = result.mu;
  report.hidden = hidden_states_of(obj.model, obj.maps, est, gravity);
  report.masses = result.m;
  report.mus = result.mu;
  report.loss_trace = result.trace;
  report.s_loss = result.loss;
  report.variant = result.variant;
  return report;
}

}  // namespace detail

// Runs one (object, method, seed) cell. Baselines train on the trajectories
// the estimation pipeline collected for the same cell, so the comparison is
// head-to-head on identical data; the pipeline's torque sweeps are its own
// privilege as the active method.
class ExperimentCell {
 public:
  ExperimentCell(const CatalogObject& obj, std::uint64_t seed,
                 const ExperimentConfig& config)
      : obj_(obj), config_(config) {
    NoiseModel noise = config.noise;
    noise.seed = derive_seed(seed, "noise|" + obj.name);
    source_.emplace(obj.model, obj.maps, obj.params, noise,
                    config.estimator.sim);

    estimator_ = config.estimator;
    estimator_.seed = derive_seed(seed, "estimator|" + obj.name);
    search_ = config.search;
    search_.seed = derive_seed(seed, "search|" + obj.name);
    seed_ = seed;

    // Reserve one graspable pivot for held-out evaluation when the object
    // is large enough to keep >= 3 pivots for the inertia stage.
    std::vector<int> graspable;
    for (int i = 0; i < obj.model.particle_count(); ++i)
      if (obj.model.graspable[i]) graspable.push_back(i);
    if (graspable.size() >= 4) {
      Rng rng(derive_seed(seed, "holdout|" + obj.name));
      estimator_.excluded_pivots = {
          graspable[rng.uniform_int(static_cast<int>(graspable.size()))]};
    }

    pipeline_.emplace(run_pipeline(obj.model, obj.maps, *source_, estimator_));
  }

  RunReport run(const std::string& method) {
    RunReport report;
    if (method == "pipeline") {
      const EstimationReport& p = *pipeline_;
      report.method = "pipeline";
      report.measured_mass = p.measured_mass;
      report.hidden = p.hidden;
      report.masses = p.masses;
      report.s_closed_form = p.s_closed_form;
      report.pivots_used = p.pivots_used;
      report.actions_used = p.actions_used;
      report.loss_trace = p.loss_trace;
      for (const PivotInertiaSample& s : p.pivot_samples)
        report.pivot_residuals.push_back(s.residual);
      report.com_inertia_residual = p.com_inertia_residual;
      report.s_loss = p.s_loss;
      report.mass_residual = p.mass_residual;
      report.mass_condition = p.mass_condition;
      report.learning_rate = p.rate_used;
    } else {
      const JointLoss& loss = joint_loss();
      SearchResult result;
      if (method == "random") {
        result = random_search(loss, search_);
      } else if (method == "weighted") {
        result = weighted_sampling_search(loss, search_);
      } else if (method == "explicit") {
        result = explicit_state_gd(loss, search_);
      } else {
        throw Error(ErrorCode::kInvalidArgument,
                    "unknown method " + method);
      }
      report = detail::baseline_report(obj_, method, result,
                                       estimator_.sim.gravity);
      report.pivots_used = training_pivots_;
      report.actions_used = training_actions_;
      report.learning_rate = search_.explicit_rate;
    }
    report.object_name = obj_.name;
    report.seed = seed_;
    report.noise_preset = config_.noise_preset;
    report.iters = (method == "pipeline") ? estimator_.max_iters
                                          : search_.iters;
    report.dt = estimator_.sim.dt;
    return report;
  }

  const EstimationReport& pipeline() const { return *pipeline_; }
  const SimConfig& sim() const { return estimator_.sim; }

 private:
  // Training set for the search baselines: the pipeline's sampled actions
  // plus nominal rotations about its sweep pivots.
  const JointLoss& joint_loss() {
    if (!joint_loss_) {
      training_actions_.clear();
      training_pivots_ = pipeline_->pivots_used;
      for (int pivot : pipeline_->pivots_used)
        training_actions_.push_back(ActionSpec::rotate(pivot));
      for (const ActionSpec& a : pipeline_->actions_used)
        training_actions_.push_back(a);
      std::vector<Trajectory> observed;
      for (const ActionSpec& a : training_actions_)
        observed.push_back(source_->observe(a));
      joint_loss_.emplace(obj_.model, obj_.maps, observed,
                          estimator_.sim.gravity);
    }
    return *joint_loss_;
  }

  CatalogObject obj_;
  ExperimentConfig config_;
  std::uint64_t seed_ = 0;
  EstimatorConfig estimator_;
  SearchConfig search_;
  std::optional<SyntheticSource> source_;
  std::optional<EstimationReport> pipeline_;
  std::optional<JointLoss> joint_loss_;
  std::vector<ActionSpec> training_actions_;
  std::vector<int> training_pivots_;
};

// Per-cell absolute mass difference laid out on the object's grid (one CSV
// cell per block, empty where the grid is unoccupied).
inline std::string absdiff_grid_csv(const CatalogObject& obj,
                                    const Eigen::VectorXd& m_est) {
  std::ostringstream out;
  for (int r = 0; r < obj.occupancy.rows; ++r) {
    for (int c = 0; c < obj.occupancy.cols; ++c) {
      if (c > 0) out << ',';
      if (obj.occupancy.at(r, c)) {
        const int g = obj.mass_grid.at(r, c);
        out << format_double(std::abs(m_est(g) - obj.params.masses(g)));
      }
    }
    out << '\n';
  }
  return out.str();
}

inline std::string results_csv(const std::vector<ExperimentResult>& results) {
  std::ostringstream out;
  out << "object,method,seed,nad,mpd,status\n";
  for (const ExperimentResult& r : results) {
    std::string status = r.status;
    for (char& c : status)
      if (c == ',' || c == '\n') c = ';';
    out << r.object << ',' << r.method << ',' << r.seed << ',';
    if (r.nad) out << format_double(*r.nad);
    out << ',';
    if (r.mpd) out << format_double(*r.mpd);
    out << ',' << status << '\n';
  }
  return out.str();
}

// Full sweep: objects x methods x seeds, writing results.csv, per-cell
// reports, truth descriptors and per-block difference grids under out_dir.
// Cell failures are recorded in the results table and the sweep continues.
inline std::vector<ExperimentResult> run_experiment(
    const std::vector<std::string>& objects,
    const std::vector<std::string>& methods, const ExperimentConfig& config,
    const std::string& out_dir) {
  if (objects.empty() || methods.empty())
    throw Error(ErrorCode::kInvalidArgument,
                "need at least one object and one method");
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "reports");
  fs::create_directories(fs::path(out_dir) / "truth");
  fs::create_directories(fs::path(out_dir) / "grids");

  std::vector<ExperimentResult> results;
  for (const std::string& name : objects) {
    const CatalogObject obj = resolve_object(name);
    save_object(obj, (fs::path(out_dir) / "truth" / (obj.name + ".json"))
                         .string());
    for (const std::uint64_t seed : config.seeds) {
      std::optional<ExperimentCell> cell;
      std::string cell_error;
      try {
        cell.emplace(obj, seed, config);
      } catch (const Error& e) {
        cell_error = e.what();
      }
      for (const std::string& method : methods) {
        ExperimentResult result;
        result.object = obj.name;
        result.method = method;
        result.seed = seed;
        const auto start = std::chrono::steady_clock::now();
        try {
          if (!cell)
            throw Error(ErrorCode::kEvaluation,
                        "data collection failed: " + cell_error);
          const RunReport report = cell->run(method);
          const std::string stem =
              obj.name + "_" + method + "_seed" + std::to_string(seed);
          save_report(report,
                      (fs::path(out_dir) / "reports" / (stem + ".json"))
                          .string());
          write_file((fs::path(out_dir) / "grids" / (stem + ".csv")).string(),
                     absdiff_grid_csv(obj, report.masses));
          const auto [nad_value, mpd_value] =
              evaluate_report(obj, report, cell->sim());
          result.nad = nad_value;
          result.mpd = mpd_value;
        } catch (const Error& e) {
          result.status = e.what();
        }
        result.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
        results.push_back(result);
      }
    }
  }
  write_file((fs::path(out_dir) / "results.csv").string(),
             results_csv(results));
  return results;
}

}  // namespace massdist

#endif  // MASSDIST_EXPERIMENT_HPP_
