// Command-line front end. Links only the extern-C API of libvring.
//
//   vring run --config cfg.json [--set key=value]... --out dir
//   vring validate-kernel
//   vring invariants --traj traj.csv [--kind YEps] [--gamma ..] [--out file]
//   vring replay --manifest dir/manifest.json
//
// Exit status: 0 all criteria passed, 1 criterion failure, 2 config error,
// 3 runtime error.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vring/vring.h"

int main(int argc, char** argv) {
  CLI::App app{"vring: leapfrogging vortex ring laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", traj_csv, manifest_path;
  std::string kind = "YEps", inv_out = "invariants.csv";
  std::vector<std::string> overrides;
  double gamma = 6.283185307179586, epsilon = 0.01, z_star = 0.0, r_star = 1.0;
  int workers = 0;

  auto* run = app.add_subcommand("run", "run an experiment from a config");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--set", overrides, "override, e.g. integrator.step=1e-4");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--workers", workers, "worker threads (0 = default)");

  auto* vk = app.add_subcommand("validate-kernel", "run the kernel oracle suite");

  auto* inv = app.add_subcommand("invariants",
                                 "recompute invariants for a trajectory CSV");
  inv->add_option("--traj", traj_csv, "trajectories.csv")->required();
  inv->add_option("--kind", kind, "YEps | LimitTilde | Marchioro");
  inv->add_option("--gamma", gamma, "circulation");
  inv->add_option("--epsilon", epsilon, "core thickness");
  inv->add_option("--z-star", z_star, "reference z*");
  inv->add_option("--r-star", r_star, "reference r*");
  inv->add_option("--out", inv_out, "output CSV path");

  auto* rp = app.add_subcommand("replay",
                                "recompute invariants.csv from a manifest");
  rp->add_option("--manifest", manifest_path, "manifest.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : VRING_ERR_CONFIG;
  }

  if (run->parsed()) {
    vring_set_workers(workers);
    std::vector<const char*> ov;
    for (const auto& o : overrides) ov.push_back(o.c_str());
    vring_experiment* exp = nullptr;
    vring_status st = vring_experiment_create(config_path.c_str(), ov.data(),
                                              ov.size(), &exp);
    if (st != VRING_OK) {
      std::fprintf(stderr, "error: %s\n", vring_last_error());
      return st;
    }
    st = vring_experiment_run(exp, out_dir.c_str());
    const char* manifest = vring_experiment_manifest(exp);
    if (manifest) std::printf("%s\n", manifest);
    if (st != VRING_OK) std::fprintf(stderr, "error: %s\n", vring_last_error());
    vring_experiment_destroy(exp);
    return st;
  }

  if (vk->parsed()) {
    char* report = nullptr;
    const vring_status st = vring_validate_kernel(&report);
    if (report) {
      std::printf("%s", report);
      vring_string_free(report);
    }
    if (st != VRING_OK && st != VRING_ERR_CRITERION) {
      std::fprintf(stderr, "error: %s\n", vring_last_error());
    }
    return st;
  }

  if (inv->parsed()) {
    const vring_status st = vring_invariants_from_csv(
        traj_csv.c_str(), kind.c_str(), gamma, epsilon, z_star, r_star,
        inv_out.c_str());
    if (st != VRING_OK) std::fprintf(stderr, "error: %s\n", vring_last_error());
    return st;
  }

  if (rp->parsed()) {
    const vring_status st = vring_replay(manifest_path.c_str());
    if (st != VRING_OK) std::fprintf(stderr, "error: %s\n", vring_last_error());
    return st;
  }

  return VRING_ERR_CONFIG;
}
