#include "vring/vring.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "vring/experiments.hpp"
#include "vring/kernel.hpp"
#include "vring/validate.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

vring_status classify(const std::exception& e) {
  set_error(e.what());
  if (dynamic_cast<const vring::ConfigError*>(&e) ||
      dynamic_cast<const vring::InputError*>(&e)) {
    return VRING_ERR_CONFIG;
  }
  return VRING_ERR_RUNTIME;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct vring_experiment {
  vring::ExperimentConfig config;
  std::string manifest_json;
  bool has_run = false;
  bool all_passed = false;
};

extern "C" {

const char* vring_version(void) { return vring::kCodeVersion; }

const char* vring_last_error(void) { return g_last_error.c_str(); }

void vring_set_workers(int workers) { vring::set_worker_count(workers); }

vring_status vring_experiment_create(const char* config_path,
                                     const char* const* overrides,
                                     size_t n_overrides,
                                     vring_experiment** out) {
  if (!config_path || !out) {
    set_error("null argument");
    return VRING_ERR_CONFIG;
  }
  try {
    std::vector<std::string> ov;
    for (size_t i = 0; i < n_overrides; ++i) ov.emplace_back(overrides[i]);
    auto* exp = new vring_experiment;
    exp->config = vring::parse_config(config_path, ov);
    *out = exp;
    return VRING_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

void vring_experiment_destroy(vring_experiment* exp) { delete exp; }

vring_status vring_experiment_run(vring_experiment* exp, const char* out_dir) {
  if (!exp || !out_dir) {
    set_error("null argument");
    return VRING_ERR_CONFIG;
  }
  try {
    const auto manifest = vring::run_experiment(exp->config, out_dir);
    exp->manifest_json = vring::manifest_to_json(manifest);
    exp->has_run = true;
    exp->all_passed = manifest.all_passed();
    if (!exp->all_passed) {
      set_error("one or more run criteria failed; see the manifest");
      return VRING_ERR_CRITERION;
    }
    return VRING_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

const char* vring_experiment_manifest(const vring_experiment* exp) {
  if (!exp || !exp->has_run) return nullptr;
  return exp->manifest_json.c_str();
}

int vring_experiment_all_passed(const vring_experiment* exp) {
  return exp && exp->has_run && exp->all_passed ? 1 : 0;
}

vring_status vring_validate_kernel(char** report_out) {
  try {
    const auto rep = vring::validate_kernel();
    if (report_out) *report_out = dup_string(rep.table_text());
    if (!rep.all_passed()) {
      set_error("kernel validation checks failed");
      return VRING_ERR_CRITERION;
    }
    return VRING_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

vring_status vring_invariants_from_csv(const char* traj_csv_path,
                                       const char* kind, double gamma,
                                       double epsilon, double z_star,
                                       double r_star,
                                       const char* out_csv_path) {
  if (!traj_csv_path || !kind || !out_csv_path) {
    set_error("null argument");
    return VRING_ERR_CONFIG;
  }
  try {
    vring::RingParams p;
    p.gamma = gamma;
    p.epsilon = epsilon;
    p.z_star = z_star;
    p.r_star = r_star;
    vring::SystemKind sk;
    const std::string k = kind;
    if (k == "YEps") {
      sk = vring::SystemKind::YEps;
    } else if (k == "LimitTilde") {
      sk = vring::SystemKind::LimitTilde;
    } else if (k == "Marchioro") {
      sk = vring::SystemKind::Marchioro;
    } else {
      set_error("kind must be YEps, LimitTilde or Marchioro");
      return VRING_ERR_CONFIG;
    }
    const auto rows =
        vring::invariants_for_trajectory_csv(traj_csv_path, p, sk);
    vring::write_invariants_csv(out_csv_path, rows);
    return VRING_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

vring_status vring_replay(const char* manifest_path) {
  if (!manifest_path) {
    set_error("null argument");
    return VRING_ERR_CONFIG;
  }
  try {
    vring::replay_from_manifest(manifest_path);
    return VRING_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

void vring_string_free(char* s) { std::free(s); }

}  // extern "C"
