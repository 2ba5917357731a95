#pragma once

#include <string>

#include "vring/io.hpp"

// Preset experiment drivers. Each driver integrates, writes the CSV/JSON
// artifact set into the output directory and returns the manifest with its
// per-criterion verdicts. Runs are deterministic given (config, seed).

namespace vring {

inline constexpr const char* kCodeVersion = "0.2.0";

RunManifest run_leapfrog_ode(const ExperimentConfig& cfg,
                             const std::string& out_dir);
RunManifest run_regime_comparison(const ExperimentConfig& cfg,
                                  const std::string& out_dir);
RunManifest run_convergence_study(const ExperimentConfig& cfg,
                                  const std::string& out_dir);
RunManifest run_single_ring_blob(const ExperimentConfig& cfg,
                                 const std::string& out_dir);
RunManifest run_leapfrog_blob(const ExperimentConfig& cfg,
                              const std::string& out_dir);
RunManifest run_phase_portrait(const ExperimentConfig& cfg,
                               const std::string& out_dir);

RunManifest run_experiment(const ExperimentConfig& cfg,
                           const std::string& out_dir);

// Recomputes invariants.csv from the trajectory CSVs referenced by a
// manifest; byte-identical to the original run by construction.
void replay_from_manifest(const std::string& manifest_path);

// Recompute an invariants series for a bare trajectory CSV (the
// `invariants` CLI subcommand).
std::vector<InvariantRow> invariants_for_trajectory_csv(
    const std::string& traj_csv, const RingParams& params, SystemKind kind);

struct PeriodDetection {
  bool found = false;
  double period = 0.0;
  double closure_distance = 0.0;  // |hatY_1(T) - hatY_1(0)|
};

// First return of the centered offset hatY_1 to within tol of its start with
// matching velocity direction, searched for t > 0.1.
PeriodDetection detect_period(const Trajectory& traj, double tol = 1e-3);

}  // namespace vring
