#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vring/blob.hpp"
#include "vring/dynamics.hpp"
#include "vring/geometry.hpp"

// Configuration, run manifests and the fixed CSV schemas.
//
// CSV columns are frozen:
//   trajectories.csv  t,blob,z,r
//   diagnostics.csv   t,blob,b_z,b_r,energy,mass_in_ball,m_radial,m_vertical,
//                     mu_radial,R_t,Z_t
//   invariants.csv    t,name,value
// Numbers are written with 17 significant digits and LF newlines, so output
// bytes are stable across runs and worker counts.

namespace vring {

enum class ExperimentKind : std::uint8_t {
  leapfrog_ode,
  regime_comparison,
  convergence_study,
  single_ring_blob,
  leapfrog_blob,
  phase_portrait,
};

const char* experiment_kind_name(ExperimentKind k);
ExperimentKind experiment_kind_from_name(const std::string& name);

struct IntegratorSettings {
  double step = 1e-3;
  double t_end = 0.0;  // 0 = kind-specific default
  int periods = 3;     // leapfrog_ode: how many detected periods to cover
};

struct BlobSettings {
  int particles_per_blob = 600;
  double delta_over_epsilon = 0.5;
  BlobProfile profile = BlobProfile::uniform_patch;
  double density_cap = 0.0;  // 0 = default 8 |gamma|
  double t_end = 0.1;        // rescaled horizon
  int sample_count = 40;     // diagnostics samples over the horizon
};

struct ExperimentConfig {
  std::string name;
  ExperimentKind kind = ExperimentKind::leapfrog_ode;
  RingParams params;
  IntegratorSettings integrator;
  BlobSettings blob;
  std::vector<double> epsilons = {1e-2, 1e-4, 1e-8};  // convergence study
  std::uint64_t seed = 0;
  std::string output_dir;
};

// Parses and validates a config file. Unknown keys are rejected; overrides
// use dotted paths into existing keys, e.g. "integrator.step=1e-4".
ExperimentConfig parse_config(const std::string& path,
                              const std::vector<std::string>& overrides);
ExperimentConfig parse_config_text(const std::string& json_text,
                                   const std::vector<std::string>& overrides);

// Resolved config back to canonical JSON (embedded into the manifest).
std::string config_to_json(const ExperimentConfig& cfg);

struct CriterionResult {
  std::string id;
  std::string description;
  double measured = 0.0;
  double bound = 0.0;
  bool passed = false;
};

struct RunManifest {
  ExperimentConfig config;
  std::string code_version;
  double wall_seconds = 0.0;
  std::vector<CriterionResult> criteria;
  std::map<std::string, double> measurements;
  std::vector<std::string> outputs;  // files written, relative to output_dir

  bool all_passed() const;
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json_file(const std::string& path);

// --- CSV ---------------------------------------------------------------------

struct TrajectoryRow {
  double t;
  int blob;
  double z;
  double r;
};

struct DiagnosticsRow {
  double t = 0.0;
  int blob = 0;
  double b_z = 0.0, b_r = 0.0;
  double energy = 0.0;
  double mass_in_ball = 0.0;
  double m_radial = 0.0, m_vertical = 0.0, mu_radial = 0.0;
  double R_t = 0.0, Z_t = 0.0;
};

struct InvariantRow {
  double t;
  std::string name;
  double value;
};

std::string format_double(double v);  // %.17g

void write_trajectories_csv(const std::string& path,
                            const std::vector<TrajectoryRow>& rows);
std::vector<TrajectoryRow> read_trajectories_csv(const std::string& path);

void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRow>& rows);

void write_invariants_csv(const std::string& path,
                          const std::vector<InvariantRow>& rows);
std::vector<InvariantRow> read_invariants_csv(const std::string& path);

// --- plot spec -----------------------------------------------------------------

struct PlotSeries {
  std::string file;   // CSV file, relative to the output directory
  std::string x, y;   // column names
  std::string label;
  std::string filter;  // e.g. "blob=0", empty = all rows
};

struct PlotPanel {
  std::string title, xlabel, ylabel;
  std::vector<PlotSeries> series;
};

std::string plotspec_to_json(const std::vector<PlotPanel>& panels);

// --- blob checkpoints ------------------------------------------------------------

// JSON-lines: one header record then one record per particle; doubles carry
// 17 significant digits so the round trip is bit-exact.
void write_checkpoint(const std::string& path, const BlobState& state);
BlobState read_checkpoint(const std::string& path);

}  // namespace vring
