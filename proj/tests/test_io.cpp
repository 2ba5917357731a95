#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "vring/experiments.hpp"
#include "vring/io.hpp"

using namespace vring;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("vring_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kMinimalConfig = R"({
  "name": "mini",
  "kind": "leapfrog_ode",
  "gamma": 6.283185307179586,
  "epsilon": 0.01,
  "r_star": 1.0,
  "y0": [[0.0, 1.2], [0.0, -1.2]]
})";

}  // namespace

TEST_CASE("config: minimal file parses with defaults") {
  const auto cfg = parse_config_text(kMinimalConfig, {});
  CHECK(cfg.name == "mini");
  CHECK(cfg.kind == ExperimentKind::leapfrog_ode);
  CHECK(cfg.integrator.step == doctest::Approx(1e-3));
  CHECK(cfg.params.y0.size() == 2);
  CHECK(cfg.blob.delta_over_epsilon == doctest::Approx(0.5));
}

TEST_CASE("config: invariant violations and unknown keys are rejected") {
  CHECK_THROWS_AS(
      parse_config_text(R"({"name":"x","kind":"leapfrog_ode","epsilon":1.5,
                           "y0":[[0,1.2],[0,-1.2]]})",
                        {}),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config_text(R"({"name":"x","kind":"leapfrog_ode","bogus":1,
                           "y0":[[0,1.2],[0,-1.2]]})",
                        {}),
      ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"kind":"leapfrog_ode"})", {}),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text("{not json", {}), ConfigError);
}

TEST_CASE("config: overrides change exactly the addressed key") {
  const auto cfg =
      parse_config_text(kMinimalConfig, {"integrator.step=1e-4"});
  CHECK(cfg.integrator.step == doctest::Approx(1e-4));
  const auto base = parse_config_text(kMinimalConfig, {});
  CHECK(cfg.params.gamma == base.params.gamma);
  CHECK(cfg.blob.particles_per_blob == base.blob.particles_per_blob);

  CHECK_THROWS_AS(parse_config_text(kMinimalConfig, {"integrator.bogus=1"}),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text(kMinimalConfig, {"no_equals"}),
                  ConfigError);
}

TEST_CASE("csv: 17-digit round trip") {
  TempDir tmp;
  const std::vector<TrajectoryRow> rows = {
      {0.0, 0, 0.1234567890123456789, -1.0 / 3.0},
      {1e-3, 1, 2.718281828459045, 1e-300}};
  const auto p = tmp.file("t.csv");
  write_trajectories_csv(p, rows);
  const auto back = read_trajectories_csv(p);
  REQUIRE(back.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].t == rows[i].t);
    CHECK(back[i].blob == rows[i].blob);
    CHECK(back[i].z == rows[i].z);
    CHECK(back[i].r == rows[i].r);
  }
  // header-only file round trips too
  write_trajectories_csv(p, {});
  CHECK(read_trajectories_csv(p).empty());
  CHECK(slurp(p) == "t,blob,z,r\n");
}

TEST_CASE("checkpoint: bit-exact round trip") {
  RingParams params;
  params.gamma = 2.0 * 3.14159265358979323846;
  params.epsilon = 0.05;
  params.y0 = {{0.0, 0.6}, {0.0, -0.6}};
  auto st = init_blob_state(BlobProfile::uniform_patch, params, 60,
                            0.5 * params.epsilon, 8.0 * params.gamma);
  st = step(st, 1e-3);

  TempDir tmp;
  const auto p = tmp.file("chk.jsonl");
  write_checkpoint(p, st);
  const auto back = read_checkpoint(p);
  REQUIRE(back.particles.size() == st.particles.size());
  CHECK(back.time == st.time);
  CHECK(back.delta == st.delta);
  for (size_t i = 0; i < st.particles.size(); ++i) {
    CHECK(back.particles[i].pos.z == st.particles[i].pos.z);
    CHECK(back.particles[i].pos.r == st.particles[i].pos.r);
    CHECK(back.particles[i].weight == st.particles[i].weight);
    CHECK(back.particles[i].blob_id == st.particles[i].blob_id);
  }
}

TEST_CASE("leapfrog_ode experiment: outputs, determinism, replay") {
  TempDir tmp;
  auto cfg = parse_config_text(kMinimalConfig, {"integrator.periods=1"});
  const auto m1 = run_leapfrog_ode(cfg, tmp.file("a"));
  CHECK(m1.measurements.count("period") == 1);
  CHECK(m1.measurements.at("period") > 0.1);

  // a second identical run produces byte-identical CSVs
  const auto m2 = run_leapfrog_ode(cfg, tmp.file("b"));
  for (const char* f :
       {"trajectories.csv", "trajectories_limit.csv", "invariants.csv",
        "phase_portrait.csv", "plotspec.json"}) {
    CHECK(slurp(tmp.file("a/") + f) == slurp(tmp.file("b/") + f));
  }

  // replay recomputes invariants.csv byte-identically
  const std::string inv_before = slurp(tmp.file("a/invariants.csv"));
  replay_from_manifest(tmp.file("a/manifest.json"));
  CHECK(slurp(tmp.file("a/invariants.csv")) == inv_before);

  // the four panels of the figure set
  const std::string spec = slurp(tmp.file("a/plotspec.json"));
  CHECK(spec.find("\"panels\"") != std::string::npos);
  size_t count = 0, pos = 0;
  while ((pos = spec.find("\"title\"", pos)) != std::string::npos) {
    ++count;
    pos += 7;
  }
  CHECK(count == 4);
}

TEST_CASE("manifest embeds the resolved config") {
  TempDir tmp;
  auto cfg = parse_config_text(kMinimalConfig, {"integrator.periods=1"});
  const auto m = run_leapfrog_ode(cfg, tmp.file("run"));
  const auto m2 = manifest_from_json_file(tmp.file("run/manifest.json"));
  CHECK(m2.config.name == cfg.name);
  CHECK(m2.config.params.epsilon == cfg.params.epsilon);
  CHECK(m2.config.integrator.step == cfg.integrator.step);
  CHECK(m2.criteria.size() == m.criteria.size());
}

TEST_CASE("invariants subcommand helper matches the run output") {
  TempDir tmp;
  auto cfg = parse_config_text(kMinimalConfig, {"integrator.periods=1"});
  run_leapfrog_ode(cfg, tmp.file("run"));
  const auto rows = invariants_for_trajectory_csv(
      tmp.file("run/trajectories.csv"), cfg.params, SystemKind::YEps);
  CHECK(!rows.empty());
  // recomputed rows appear verbatim inside the run's invariants.csv
  const std::string inv = slurp(tmp.file("run/invariants.csv"));
  const std::string probe = format_double(rows[0].t) + "," + rows[0].name +
                            "," + format_double(rows[0].value) + "\n";
  CHECK(inv.find(probe) != std::string::npos);
}
