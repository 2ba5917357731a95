#include "vring/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vring {

using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << content;
  if (!out) throw InputError("write failed for " + path);
}

json parse_json_or_die(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

void reject_unknown_keys(const json& obj,
                         const std::vector<std::string>& known,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const auto& k : known) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

double require_number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("field '" + key + "' must be a number");
  return j.get<double>();
}

BlobProfile profile_from_name(const std::string& s) {
  if (s == "uniform_patch") return BlobProfile::uniform_patch;
  if (s == "truncated_gaussian") return BlobProfile::truncated_gaussian;
  throw ConfigError("unknown blob profile '" + s + "'");
}

const char* profile_name(BlobProfile p) {
  return p == BlobProfile::uniform_patch ? "uniform_patch"
                                         : "truncated_gaussian";
}

ExperimentConfig config_from_json(const json& root) {
  if (!root.is_object()) throw ConfigError("config root must be an object");
  reject_unknown_keys(root,
                      {"name", "kind", "gamma", "epsilon", "z_star", "r_star",
                       "y0", "gammas", "integrator", "blob", "epsilons",
                       "seed"},
                      "config root");
  ExperimentConfig cfg;
  if (!root.contains("name") || !root["name"].is_string()) {
    throw ConfigError("config requires a string field 'name'");
  }
  cfg.name = root["name"].get<std::string>();
  if (!root.contains("kind")) throw ConfigError("config requires 'kind'");
  cfg.kind = experiment_kind_from_name(root["kind"].get<std::string>());

  if (root.contains("gamma")) cfg.params.gamma = require_number(root["gamma"], "gamma");
  if (root.contains("epsilon")) {
    cfg.params.epsilon = require_number(root["epsilon"], "epsilon");
  }
  if (root.contains("z_star")) cfg.params.z_star = require_number(root["z_star"], "z_star");
  if (root.contains("r_star")) cfg.params.r_star = require_number(root["r_star"], "r_star");
  if (root.contains("y0")) {
    if (!root["y0"].is_array()) throw ConfigError("y0 must be a list of [z,r]");
    for (const auto& e : root["y0"]) {
      if (!e.is_array() || e.size() != 2) {
        throw ConfigError("each y0 entry must be [z, r]");
      }
      cfg.params.y0.push_back({e[0].get<double>(), e[1].get<double>()});
    }
  }
  if (root.contains("gammas")) {
    std::vector<double> gs;
    for (const auto& e : root["gammas"]) gs.push_back(e.get<double>());
    cfg.params.gammas = gs;
  }
  if (root.contains("integrator")) {
    const auto& it = root["integrator"];
    reject_unknown_keys(it, {"step", "t_end", "periods"}, "integrator");
    if (it.contains("step")) cfg.integrator.step = require_number(it["step"], "integrator.step");
    if (it.contains("t_end")) cfg.integrator.t_end = require_number(it["t_end"], "integrator.t_end");
    if (it.contains("periods")) cfg.integrator.periods = it["periods"].get<int>();
  }
  if (root.contains("blob")) {
    const auto& b = root["blob"];
    reject_unknown_keys(b,
                        {"particles_per_blob", "delta_over_epsilon", "profile",
                         "density_cap", "t_end", "sample_count"},
                        "blob");
    if (b.contains("particles_per_blob")) {
      cfg.blob.particles_per_blob = b["particles_per_blob"].get<int>();
    }
    if (b.contains("delta_over_epsilon")) {
      cfg.blob.delta_over_epsilon =
          require_number(b["delta_over_epsilon"], "blob.delta_over_epsilon");
    }
    if (b.contains("profile")) {
      cfg.blob.profile = profile_from_name(b["profile"].get<std::string>());
    }
    if (b.contains("density_cap")) {
      cfg.blob.density_cap = require_number(b["density_cap"], "blob.density_cap");
    }
    if (b.contains("t_end")) cfg.blob.t_end = require_number(b["t_end"], "blob.t_end");
    if (b.contains("sample_count")) cfg.blob.sample_count = b["sample_count"].get<int>();
  }
  if (root.contains("epsilons")) {
    cfg.epsilons.clear();
    for (const auto& e : root["epsilons"]) cfg.epsilons.push_back(e.get<double>());
  }
  if (root.contains("seed")) cfg.seed = root["seed"].get<std::uint64_t>();

  cfg.params.validate();
  if (!(cfg.integrator.step > 0.0)) throw ConfigError("integrator.step must be positive");
  if (cfg.blob.particles_per_blob < 16) {
    throw ConfigError("blob.particles_per_blob must be >= 16");
  }
  if (!(cfg.blob.delta_over_epsilon > 0.0)) {
    throw ConfigError("blob.delta_over_epsilon must be positive");
  }
  if (!(cfg.blob.t_end > 0.0)) throw ConfigError("blob.t_end must be positive");
  if (cfg.blob.sample_count < 3) throw ConfigError("blob.sample_count must be >= 3");
  for (double e : cfg.epsilons) {
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("epsilons must lie in (0,1)");
  }
  return cfg;
}

void apply_override(json& root, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + spec + "' must look like key=value");
  }
  const std::string path = spec.substr(0, eq);
  const std::string value = spec.substr(eq + 1);

  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);

  json* node = &root;
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i])) {
      throw ConfigError("override path '" + path + "' has no key '" +
                        parts[i] + "' in the config");
    }
    node = &(*node)[parts[i]];
  }
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // bare strings are allowed
  }
  (*node)[parts.back()] = parsed;
}

}  // namespace

const char* experiment_kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::leapfrog_ode: return "leapfrog_ode";
    case ExperimentKind::regime_comparison: return "regime_comparison";
    case ExperimentKind::convergence_study: return "convergence_study";
    case ExperimentKind::single_ring_blob: return "single_ring_blob";
    case ExperimentKind::leapfrog_blob: return "leapfrog_blob";
    case ExperimentKind::phase_portrait: return "phase_portrait";
  }
  return "?";
}

ExperimentKind experiment_kind_from_name(const std::string& name) {
  for (int k = 0; k <= static_cast<int>(ExperimentKind::phase_portrait); ++k) {
    const auto kind = static_cast<ExperimentKind>(k);
    if (name == experiment_kind_name(kind)) return kind;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

ExperimentConfig parse_config(const std::string& path,
                              const std::vector<std::string>& overrides) {
  return parse_config_text(slurp(path), overrides);
}

ExperimentConfig parse_config_text(const std::string& json_text,
                                   const std::vector<std::string>& overrides) {
  json root = parse_json_or_die(json_text, "config parse error");
  for (const auto& o : overrides) apply_override(root, o);
  return config_from_json(root);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json root;
  root["name"] = cfg.name;
  root["kind"] = experiment_kind_name(cfg.kind);
  root["gamma"] = cfg.params.gamma;
  root["epsilon"] = cfg.params.epsilon;
  root["z_star"] = cfg.params.z_star;
  root["r_star"] = cfg.params.r_star;
  json y0 = json::array();
  for (const auto& v : cfg.params.y0) y0.push_back({v.z, v.r});
  root["y0"] = y0;
  if (cfg.params.gammas) root["gammas"] = *cfg.params.gammas;
  root["integrator"] = {{"step", cfg.integrator.step},
                        {"t_end", cfg.integrator.t_end},
                        {"periods", cfg.integrator.periods}};
  root["blob"] = {{"particles_per_blob", cfg.blob.particles_per_blob},
                  {"delta_over_epsilon", cfg.blob.delta_over_epsilon},
                  {"profile", profile_name(cfg.blob.profile)},
                  {"density_cap", cfg.blob.density_cap},
                  {"t_end", cfg.blob.t_end},
                  {"sample_count", cfg.blob.sample_count}};
  root["epsilons"] = cfg.epsilons;
  root["seed"] = cfg.seed;
  return root.dump(2);
}

bool RunManifest::all_passed() const {
  for (const auto& c : criteria) {
    if (!c.passed) return false;
  }
  return true;
}

std::string manifest_to_json(const RunManifest& m) {
  json root;
  root["config"] = json::parse(config_to_json(m.config));
  root["code_version"] = m.code_version;
  root["wall_seconds"] = m.wall_seconds;
  json crit = json::array();
  for (const auto& c : m.criteria) {
    crit.push_back({{"id", c.id},
                    {"description", c.description},
                    {"measured", c.measured},
                    {"bound", c.bound},
                    {"passed", c.passed}});
  }
  root["criteria"] = crit;
  root["measurements"] = m.measurements;
  root["outputs"] = m.outputs;
  root["all_passed"] = m.all_passed();
  return root.dump(2);
}

RunManifest manifest_from_json_file(const std::string& path) {
  const json root = parse_json_or_die(slurp(path), "manifest parse error");
  RunManifest m;
  m.config = config_from_json(root.at("config"));
  m.code_version = root.value("code_version", "");
  m.wall_seconds = root.value("wall_seconds", 0.0);
  if (root.contains("criteria")) {
    for (const auto& c : root["criteria"]) {
      m.criteria.push_back({c.at("id").get<std::string>(),
                            c.at("description").get<std::string>(),
                            c.at("measured").get<double>(),
                            c.at("bound").get<double>(),
                            c.at("passed").get<bool>()});
    }
  }
  if (root.contains("measurements")) {
    for (auto it = root["measurements"].begin(); it != root["measurements"].end(); ++it) {
      m.measurements[it.key()] = it.value().get<double>();
    }
  }
  if (root.contains("outputs")) {
    for (const auto& o : root["outputs"]) m.outputs.push_back(o.get<std::string>());
  }
  return m;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trajectories_csv(const std::string& path,
                            const std::vector<TrajectoryRow>& rows) {
  std::string out = "t,blob,z,r\n";
  for (const auto& r : rows) {
    out += format_double(r.t);
    out += ',';
    out += std::to_string(r.blob);
    out += ',';
    out += format_double(r.z);
    out += ',';
    out += format_double(r.r);
    out += '\n';
  }
  spit(path, out);
}

std::vector<TrajectoryRow> read_trajectories_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "t,blob,z,r") {
    throw InputError(path + ": expected header t,blob,z,r");
  }
  std::vector<TrajectoryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TrajectoryRow r;
    if (std::sscanf(line.c_str(), "%lf,%d,%lf,%lf", &r.t, &r.blob, &r.z,
                    &r.r) != 4) {
      throw InputError(path + ": malformed row '" + line + "'");
    }
    rows.push_back(r);
  }
  return rows;
}

void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRow>& rows) {
  std::string out =
      "t,blob,b_z,b_r,energy,mass_in_ball,m_radial,m_vertical,mu_radial,R_t,"
      "Z_t\n";
  for (const auto& r : rows) {
    out += format_double(r.t);
    out += ',' + std::to_string(r.blob);
    for (double v : {r.b_z, r.b_r, r.energy, r.mass_in_ball, r.m_radial,
                     r.m_vertical, r.mu_radial, r.R_t, r.Z_t}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  spit(path, out);
}

void write_invariants_csv(const std::string& path,
                          const std::vector<InvariantRow>& rows) {
  std::string out = "t,name,value\n";
  for (const auto& r : rows) {
    out += format_double(r.t);
    out += ',' + r.name + ',';
    out += format_double(r.value);
    out += '\n';
  }
  spit(path, out);
}

std::vector<InvariantRow> read_invariants_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "t,name,value") {
    throw InputError(path + ": expected header t,name,value");
  }
  std::vector<InvariantRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.rfind(',');
    if (c1 == std::string::npos || c2 == c1) {
      throw InputError(path + ": malformed row '" + line + "'");
    }
    rows.push_back({std::stod(line.substr(0, c1)),
                    line.substr(c1 + 1, c2 - c1 - 1),
                    std::stod(line.substr(c2 + 1))});
  }
  return rows;
}

std::string plotspec_to_json(const std::vector<PlotPanel>& panels) {
  json root;
  json arr = json::array();
  for (const auto& p : panels) {
    json panel = {{"title", p.title}, {"xlabel", p.xlabel}, {"ylabel", p.ylabel}};
    json series = json::array();
    for (const auto& s : p.series) {
      json e = {{"file", s.file}, {"x", s.x}, {"y", s.y}, {"label", s.label}};
      if (!s.filter.empty()) e["filter"] = s.filter;
      series.push_back(e);
    }
    panel["series"] = series;
    arr.push_back(panel);
  }
  root["panels"] = arr;
  return root.dump(2);
}

void write_checkpoint(const std::string& path, const BlobState& state) {
  std::string out;
  json header = {{"record", "header"},
                 {"time", state.time},
                 {"delta", state.delta},
                 {"gamma", state.params.gamma},
                 {"epsilon", state.params.epsilon},
                 {"z_star", state.params.z_star},
                 {"r_star", state.params.r_star},
                 {"y0", json::array()}};
  for (const auto& v : state.params.y0) header["y0"].push_back({v.z, v.r});
  out += header.dump() + "\n";
  for (const auto& p : state.particles) {
    out += "{\"blob\":" + std::to_string(p.blob_id) +
           ",\"z\":" + format_double(p.pos.z) +
           ",\"r\":" + format_double(p.pos.r) +
           ",\"w\":" + format_double(p.weight) + "}\n";
  }
  spit(path, out);
}

BlobState read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty checkpoint");
  const json header = parse_json_or_die(line, "checkpoint header");
  if (header.value("record", "") != "header") {
    throw InputError(path + ": first record must be the header");
  }
  BlobState st;
  st.time = header.at("time").get<double>();
  st.delta = header.at("delta").get<double>();
  st.params.gamma = header.at("gamma").get<double>();
  st.params.epsilon = header.at("epsilon").get<double>();
  st.params.z_star = header.at("z_star").get<double>();
  st.params.r_star = header.at("r_star").get<double>();
  for (const auto& e : header.at("y0")) {
    st.params.y0.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = parse_json_or_die(line, "checkpoint record");
    st.particles.push_back({{rec.at("z").get<double>(), rec.at("r").get<double>()},
                            rec.at("w").get<double>(),
                            rec.at("blob").get<int>()});
  }
  return st;
}

}  // namespace vring
