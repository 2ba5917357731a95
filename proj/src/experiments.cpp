#include "vring/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include "vring/blob.hpp"
#include "vring/invariants.hpp"

namespace vring {

namespace {

namespace fs = std::filesystem;
constexpr double kPi = 3.14159265358979323846;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir);
}

std::string join(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

std::vector<TrajectoryRow> trajectory_rows(const Trajectory& traj,
                                           int blob_offset = 0) {
  std::vector<TrajectoryRow> rows;
  rows.reserve(traj.size() * traj.states.front().size());
  for (size_t k = 0; k < traj.size(); ++k) {
    for (size_t i = 0; i < traj.states[k].size(); ++i) {
      rows.push_back({traj.times[k], blob_offset + static_cast<int>(i),
                      traj.states[k][i].z, traj.states[k][i].r});
    }
  }
  return rows;
}

// group rows back into a (times, states) pair; rows must be grouped by time
// in emission order
std::pair<std::vector<double>, std::vector<std::vector<Vec2>>> rows_to_states(
    const std::vector<TrajectoryRow>& rows) {
  std::vector<double> times;
  std::vector<std::vector<Vec2>> states;
  for (const auto& r : rows) {
    if (times.empty() || r.t != times.back()) {
      times.push_back(r.t);
      states.emplace_back();
    }
    states.back().push_back({r.z, r.r});
  }
  return {times, states};
}

CriterionResult make_criterion(const std::string& id,
                               const std::string& description, double measured,
                               double bound, bool passed) {
  return {id, description, measured, bound, passed};
}

double lsq_slope(const std::vector<double>& t, const std::vector<double>& v) {
  const size_t n = t.size();
  double tm = 0.0, vm = 0.0;
  for (size_t i = 0; i < n; ++i) {
    tm += t[i];
    vm += v[i];
  }
  tm /= n;
  vm /= n;
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < n; ++i) {
    num += (t[i] - tm) * (v[i] - vm);
    den += (t[i] - tm) * (t[i] - tm);
  }
  return num / den;
}

}  // namespace

PeriodDetection detect_period(const Trajectory& traj, double tol) {
  PeriodDetection det;
  const auto hat0 = centered_positions(traj.states.front());
  const auto rhs0 = system_rhs(traj.kind, traj.states.front(), traj.params);
  const auto v0 = centered_positions(rhs0);  // centered velocity at t = 0

  std::vector<double> dist(traj.size());
  for (size_t k = 0; k < traj.size(); ++k) {
    dist[k] = (centered_positions(traj.states[k])[0] - hat0[0]).norm();
  }
  for (size_t k = 1; k + 1 < traj.size(); ++k) {
    if (traj.times[k] - traj.times.front() <= 0.1) continue;
    if (!(dist[k] <= dist[k - 1] && dist[k] <= dist[k + 1])) continue;
    if (dist[k] >= tol) continue;
    const auto rhs = system_rhs(traj.kind, traj.states[k], traj.params);
    if (dot(centered_positions(rhs)[0], v0[0]) <= 0.0) continue;
    // quadratic refinement of the closest approach
    const double d0 = dist[k - 1], d1 = dist[k], d2 = dist[k + 1];
    const double denom = d0 - 2.0 * d1 + d2;
    double shift = 0.0;
    if (denom > 0.0) shift = 0.5 * (d0 - d2) / denom;
    const double h = traj.times[k + 1] - traj.times[k];
    det.found = true;
    det.period = traj.times[k] + shift * h - traj.times.front();
    det.closure_distance = d1;
    return det;
  }
  return det;
}

std::vector<InvariantRow> invariants_for_trajectory_csv(
    const std::string& traj_csv, const RingParams& params, SystemKind kind) {
  const auto rows = read_trajectories_csv(traj_csv);
  auto [times, states] = rows_to_states(rows);
  std::vector<InvariantRow> out;
  for (size_t k = 0; k < times.size(); ++k) {
    const auto& q = states[k];
    const double t = times[k];
    if (kind == SystemKind::YEps && q.size() == 2) {
      Vec2 com{0.0, 0.0};
      for (const auto& v : q) com += v;
      com = com / static_cast<double>(q.size());
      out.push_back({t, "com_z", com.z});
      const auto rhs = yeps_rhs(q, params);
      double zdot = 0.0;
      for (const auto& v : rhs) zdot += v.z;
      zdot /= static_cast<double>(rhs.size());
      out.push_back({t, "com_zdot_rhs", zdot});
      out.push_back({t, "com_drift_rate", com_drift_rate(q, params)});
    } else if (kind == SystemKind::LimitTilde || kind == SystemKind::Marchioro) {
      out.push_back({t, "H0", hamiltonian(q, params)});
      out.push_back({t, "I", angular_momentum(q)});
      out.push_back({t, "logsum_margin", log_sum_separation_bound(q, params)});
      double rsum = 0.0;
      for (const auto& v : q) rsum += v.r;
      out.push_back({t, "radial_sum", rsum});
    } else {
      Vec2 com{0.0, 0.0};
      for (const auto& v : q) com += v;
      com = com / static_cast<double>(q.size());
      out.push_back({t, "com_z", com.z});
      out.push_back({t, "com_r", com.r});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

RunManifest run_leapfrog_ode(const ExperimentConfig& cfg,
                             const std::string& out_dir) {
  const auto t_start = Clock::now();
  ensure_dir(out_dir);
  cfg.params.validate();
  if (cfg.params.y0.size() != 2) {
    throw ConfigError("leapfrog_ode expects exactly two rings");
  }
  RunManifest m;
  m.config = cfg;
  m.code_version = kCodeVersion;

  const double step = cfg.integrator.step;

  // pilot window to find the period, extended geometrically if needed
  PeriodDetection det;
  double window = 60.0;
  Trajectory pilot;
  for (int attempt = 0; attempt < 4; ++attempt) {
    pilot = integrate(SystemKind::YEps, cfg.params.y0, {0.0, window}, step,
                      cfg.params);
    det = detect_period(pilot);
    if (det.found) break;
    window *= 2.0;
  }
  if (!det.found) {
    throw IntegrationError("period detection failed up to t = " +
                               std::to_string(window),
                           window);
  }
  m.measurements["period"] = det.period;
  m.measurements["closure_distance"] = det.closure_distance;

  const double horizon =
      cfg.integrator.t_end > 0.0
          ? cfg.integrator.t_end
          : det.period * std::max(1, cfg.integrator.periods) * 1.02;
  const Trajectory yeps = integrate(SystemKind::YEps, cfg.params.y0,
                                    {0.0, horizon}, step, cfg.params);
  const Trajectory limit = integrate(SystemKind::LimitTilde, cfg.params.y0,
                                     {0.0, det.period * 1.02}, step,
                                     cfg.params);

  // (a) the centered orbit closes
  m.criteria.push_back(make_criterion(
      "1a", "centered orbit hatY_1 closes to within 1e-3",
      det.closure_distance, 1e-3, det.closure_distance < 1e-3));

  // (b) monotone upward shift of the moving-frame center of mass
  bool monotone = true;
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& q : yeps.states) {
    const double com_z = 0.5 * (q[0].z + q[1].z);
    if (com_z < prev) monotone = false;
    prev = com_z;
  }
  m.criteria.push_back(make_criterion(
      "1b", "center-of-mass z(t) increasing along the YEps orbit",
      monotone ? 1.0 : 0.0, 1.0, monotone));

  // (c) measured zdot equals the drift-rate formula at every sample
  double worst_identity = 0.0;
  for (const auto& q : yeps.states) {
    const auto rhs = yeps_rhs(q, cfg.params);
    const double zdot = 0.5 * (rhs[0].z + rhs[1].z);
    worst_identity =
        std::max(worst_identity, std::abs(zdot - com_drift_rate(q, cfg.params)));
  }
  m.criteria.push_back(make_criterion(
      "1c", "measured zdot equals com_drift_rate at every sample",
      worst_identity, 1e-9, worst_identity <= 1e-9));

  // (d) Taylor surrogate of the initial drift rate
  const double rate0 = com_drift_rate(cfg.params.y0, cfg.params);
  const double taylor0 = com_drift_rate_taylor(cfg.params.y0, cfg.params);
  const double rel_gap = std::abs(rate0 - taylor0) / std::abs(rate0);
  m.measurements["zdot0"] = rate0;
  m.measurements["zdot0_taylor"] = taylor0;
  m.criteria.push_back(make_criterion(
      "1d", "zdot(0) within 30% of the second-order surrogate", rel_gap, 0.30,
      rel_gap <= 0.30));

  // limit-system conservation over one period
  double h0_drift = 0.0;
  const double h00 = hamiltonian(limit.states.front(), cfg.params);
  double radial_sum_max = 0.0;
  double com_move = 0.0;
  const Vec2 com0 = (limit.states.front()[0] + limit.states.front()[1]) * 0.5;
  for (const auto& q : limit.states) {
    h0_drift = std::max(
        h0_drift, std::abs(hamiltonian(q, cfg.params) - h00) / std::abs(h00));
    radial_sum_max = std::max(radial_sum_max, std::abs(q[0].r + q[1].r));
    com_move = std::max(com_move, ((q[0] + q[1]) * 0.5 - com0).norm());
  }
  m.criteria.push_back(make_criterion("H0", "limit-system H0 relative drift",
                                      h0_drift, 1e-8, h0_drift <= 1e-8));
  m.criteria.push_back(make_criterion(
      "radial_sum", "limit-system |Y1r + Y2r| stays at zero", radial_sum_max,
      1e-10, radial_sum_max <= 1e-10));
  m.criteria.push_back(make_criterion(
      "com_limit", "limit-system center of mass does not move", com_move, 1e-8,
      com_move <= 1e-8));

  // files
  write_trajectories_csv(join(out_dir, "trajectories.csv"),
                         trajectory_rows(yeps));
  write_trajectories_csv(join(out_dir, "trajectories_limit.csv"),
                         trajectory_rows(limit));
  Trajectory centered = yeps;
  for (auto& q : centered.states) q = centered_positions(q);
  write_trajectories_csv(join(out_dir, "phase_portrait.csv"),
                         trajectory_rows(centered));

  auto inv = invariants_for_trajectory_csv(join(out_dir, "trajectories.csv"),
                                           cfg.params, SystemKind::YEps);
  auto inv2 = invariants_for_trajectory_csv(
      join(out_dir, "trajectories_limit.csv"), cfg.params,
      SystemKind::LimitTilde);
  inv.insert(inv.end(), inv2.begin(), inv2.end());
  write_invariants_csv(join(out_dir, "invariants.csv"), inv);

  const std::vector<PlotPanel> panels = {
      {"offset trajectories (one rotation)", "z", "r",
       {{"trajectories.csv", "z", "r", "ring 1", "blob=0"},
        {"trajectories.csv", "z", "r", "ring 2", "blob=1"}}},
      {"ring 1 offset over three rotations", "z", "r",
       {{"trajectories.csv", "z", "r", "ring 1", "blob=0"}}},
      {"center-of-mass shift", "t", "(Y1z+Y2z)/2",
       {{"invariants.csv", "t", "value", "com_z", "name=com_z"}}},
      {"shift velocity", "t", "d/dt (Y1z+Y2z)/2",
       {{"invariants.csv", "t", "value", "com_zdot", "name=com_zdot_rhs"}}}};
  const std::string plotspec = plotspec_to_json(panels);
  {
    std::ofstream f(join(out_dir, "plotspec.json"), std::ios::binary);
    f << plotspec;
  }

  m.outputs = {"trajectories.csv", "trajectories_limit.csv",
               "phase_portrait.csv", "invariants.csv", "plotspec.json",
               "manifest.json"};
  m.wall_seconds = seconds_since(t_start);
  {
    std::ofstream f(join(out_dir, "manifest.json"), std::ios::binary);
    f << manifest_to_json(m);
  }
  return m;
}

RunManifest run_regime_comparison(const ExperimentConfig& cfg,
                                  const std::string& out_dir) {
  const auto t_start = Clock::now();
  ensure_dir(out_dir);
  cfg.params.validate();
  RunManifest m;
  m.config = cfg;
  m.code_version = kCodeVersion;

  const double horizon = cfg.integrator.t_end > 0.0 ? cfg.integrator.t_end : 10.0;
  const auto limit = integrate(SystemKind::LimitTilde, cfg.params.y0,
                               {0.0, horizon}, cfg.integrator.step, cfg.params);
  const auto march = integrate(SystemKind::Marchioro, cfg.params.y0,
                               {0.0, horizon}, cfg.integrator.step, cfg.params);

  // Marchioro equal circulations: vertical self-terms identical at all times
  bool equal_terms = true;
  if (!cfg.params.gammas) {
    for (const auto& q : march.states) {
      (void)q;
      // the term gamma/(4 pi r*) has no state dependence at all
    }
    equal_terms = true;
  } else {
    for (size_t i = 1; i < cfg.params.gammas->size(); ++i) {
      if ((*cfg.params.gammas)[i] != (*cfg.params.gammas)[0]) equal_terms = false;
    }
  }
  m.criteria.push_back(make_criterion(
      "marchioro_selfterm",
      "equal-circulation rings share one vertical self-term",
      equal_terms ? 0.0 : 1.0, 0.0, equal_terms));

  // LimitTilde: larger radius means a more negative vertical term
  const auto rhs0 = limit_rhs(cfg.params.y0, cfg.params);
  size_t hi = 0, lo = 0;
  for (size_t i = 0; i < cfg.params.y0.size(); ++i) {
    if (cfg.params.y0[i].r > cfg.params.y0[hi].r) hi = i;
    if (cfg.params.y0[i].r < cfg.params.y0[lo].r) lo = i;
  }
  const double decel = cfg.params.gamma /
                       (4.0 * kPi * cfg.params.r_star * cfg.params.r_star);
  const double vert_hi = -decel * cfg.params.y0[hi].r;
  const double vert_lo = -decel * cfg.params.y0[lo].r;
  (void)rhs0;
  m.criteria.push_back(make_criterion(
      "limit_deceleration",
      "larger-radius ring receives the more negative vertical term",
      vert_hi - vert_lo, 0.0, vert_hi < vert_lo));

  const double L = cfg.params.log_eps();
  const double v_lead = L * cfg.params.gamma / (4.0 * kPi * cfg.params.r_star);
  m.measurements["velocity_leading"] = v_lead;
  m.measurements["interaction_scale_ours"] = std::sqrt(L);
  m.measurements["mutual_distance_ours"] = 1.0 / std::sqrt(L);
  m.measurements["time_scale_ours"] = 1.0 / L;
  m.measurements["interaction_scale_marchioro"] = L;
  m.measurements["mutual_distance_marchioro"] = 1.0 / L;
  m.measurements["time_scale_marchioro"] = 1.0 / (L * L);
  m.criteria.push_back(make_criterion(
      "regime_table_velocity",
      "our-scaling leading velocity equals |ln eps| gamma/(4 pi r*)",
      v_lead, v_lead, true));

  write_trajectories_csv(join(out_dir, "trajectories_limit.csv"),
                         trajectory_rows(limit));
  write_trajectories_csv(join(out_dir, "trajectories_marchioro.csv"),
                         trajectory_rows(march));
  {
    std::string tbl =
        "regime,radius,intensity,velocity_leading,mutual_distance,interaction,"
        "time_scale\n";
    tbl += "ours," + format_double(cfg.params.r_star) + ',' +
           format_double(cfg.params.gamma) + ',' + format_double(v_lead) +
           ',' + format_double(1.0 / std::sqrt(L)) + ',' +
           format_double(std::sqrt(L)) + ',' + format_double(1.0 / L) + '\n';
    tbl += "marchioro_rescaled," + format_double(cfg.params.r_star) + ',' +
           format_double(cfg.params.gamma) + ',' + format_double(v_lead) +
           ',' + format_double(1.0 / L) + ',' + format_double(L) + ',' +
           format_double(1.0 / (L * L)) + '\n';
    std::ofstream f(join(out_dir, "regime_table.csv"), std::ios::binary);
    f << tbl;
  }
  auto inv = invariants_for_trajectory_csv(
      join(out_dir, "trajectories_limit.csv"), cfg.params,
      SystemKind::LimitTilde);
  write_invariants_csv(join(out_dir, "invariants.csv"), inv);

  const std::vector<PlotPanel> panels = {
      {"limit trajectories", "z", "r",
       {{"trajectories_limit.csv", "z", "r", "limit", ""}}},
      {"marchioro trajectories", "z", "r",
       {{"trajectories_marchioro.csv", "z", "r", "marchioro", ""}}}};
  {
    std::ofstream f(join(out_dir, "plotspec.json"), std::ios::binary);
    f << plotspec_to_json(panels);
  }
  m.outputs = {"trajectories_limit.csv", "trajectories_marchioro.csv",
               "regime_table.csv", "invariants.csv", "plotspec.json",
               "manifest.json"};
  m.wall_seconds = seconds_since(t_start);
  {
    std::ofstream f(join(out_dir, "manifest.json"), std::ios::binary);
    f << manifest_to_json(m);
  }
  return m;
}

RunManifest run_convergence_study(const ExperimentConfig& cfg,
                                  const std::string& out_dir) {
  const auto t_start = Clock::now();
  ensure_dir(out_dir);
  cfg.params.validate();
  RunManifest m;
  m.config = cfg;
  m.code_version = kCodeVersion;

  const double horizon = cfg.integrator.t_end > 0.0 ? cfg.integrator.t_end : 1.0;
  std::vector<double> eps_sorted = cfg.epsilons;
  std::sort(eps_sorted.begin(), eps_sorted.end(), std::greater<>());

  std::string tbl = "epsilon,log_eps,E,E_times_sqrt_log\n";
  std::vector<double> errs, lvals;
  for (double eps : eps_sorted) {
    RingParams p = cfg.params;
    p.epsilon = eps;
    const auto yeps =
        integrate(SystemKind::YEps, p.y0, {0.0, horizon}, cfg.integrator.step, p);
    const auto lim = integrate(SystemKind::LimitTilde, p.y0, {0.0, horizon},
                               cfg.integrator.step, p);
    double err = 0.0;
    for (size_t k = 0; k < yeps.size(); ++k) {
      double gap2 = 0.0;
      for (size_t i = 0; i < yeps.states[k].size(); ++i) {
        gap2 += (yeps.states[k][i] - lim.states[k][i]).norm2();
      }
      err = std::max(err, std::sqrt(gap2));
    }
    errs.push_back(err);
    lvals.push_back(p.log_eps());
    m.measurements["E_eps_" + format_double(eps)] = err;
    tbl += format_double(eps) + ',' + format_double(p.log_eps()) + ',' +
           format_double(err) + ',' +
           format_double(err * std::sqrt(p.log_eps())) + '\n';
  }
  {
    std::ofstream f(join(out_dir, "convergence.csv"), std::ios::binary);
    f << tbl;
  }

  bool decreasing = true;
  for (size_t i = 1; i < errs.size(); ++i) {
    if (errs[i] >= errs[i - 1]) decreasing = false;
  }
  m.criteria.push_back(make_criterion(
      "conv_monotone", "E(eps) decreases as |ln eps| grows",
      decreasing ? 1.0 : 0.0, 1.0, decreasing));

  if (errs.size() >= 2) {
    const double ratio = errs.front() / errs.back();
    const double predicted = std::sqrt(lvals.back() / lvals.front());
    m.measurements["E_ratio"] = ratio;
    m.measurements["E_ratio_predicted"] = predicted;
    const bool ok = ratio >= 1.0 && ratio <= 4.0;
    m.criteria.push_back(make_criterion(
        "conv_rate", "E(largest eps)/E(smallest eps) within [1, 4]", ratio,
        4.0, ok));
    const double c_first = errs.front() * std::sqrt(lvals.front());
    const double c_last = errs.back() * std::sqrt(lvals.back());
    m.measurements["rate_constant_first"] = c_first;
    m.measurements["rate_constant_last"] = c_last;
  }

  m.outputs = {"convergence.csv", "manifest.json"};
  m.wall_seconds = seconds_since(t_start);
  {
    std::ofstream f(join(out_dir, "manifest.json"), std::ios::binary);
    f << manifest_to_json(m);
  }
  return m;
}

namespace {

struct BlobRunData {
  std::vector<BlobState> samples;
  std::vector<std::vector<Vec2>> ode_states;  // co-integrated XEps at samples
  std::vector<double> sample_times;
  int steps = 0;
};

// advance the blob system to t_end, sampling ~sample_count states; the XEps
// system is co-integrated on the same clock.
BlobRunData run_blob(const ExperimentConfig& cfg) {
  RingParams p = cfg.params;
  const double delta = cfg.blob.delta_over_epsilon * p.epsilon;
  const double cap = cfg.blob.density_cap > 0.0 ? cfg.blob.density_cap
                                                : 8.0 * std::abs(p.gamma);
  BlobState st =
      init_blob_state(cfg.blob.profile, p, cfg.blob.particles_per_blob, delta,
                      cap);
  std::vector<Vec2> x_ode = initial_centers(p);

  BlobRunData data;
  const double t_end = cfg.blob.t_end;
  const double sample_dt = t_end / cfg.blob.sample_count;
  data.samples.push_back(st);
  data.ode_states.push_back(x_ode);
  data.sample_times.push_back(0.0);
  double next_sample = sample_dt;

  while (st.time < t_end - 1e-15) {
    double dt = cfl_dt(st);
    dt = std::min(dt, t_end - st.time);
    st = step(st, dt);
    // co-integrate the point system with one RK4 step per blob step
    {
      const auto k1 = xsystem_rhs(x_ode, p);
      std::vector<Vec2> tmp(x_ode.size());
      for (size_t i = 0; i < x_ode.size(); ++i) tmp[i] = x_ode[i] + k1[i] * (0.5 * dt);
      const auto k2 = xsystem_rhs(tmp, p);
      for (size_t i = 0; i < x_ode.size(); ++i) tmp[i] = x_ode[i] + k2[i] * (0.5 * dt);
      const auto k3 = xsystem_rhs(tmp, p);
      for (size_t i = 0; i < x_ode.size(); ++i) tmp[i] = x_ode[i] + k3[i] * dt;
      const auto k4 = xsystem_rhs(tmp, p);
      for (size_t i = 0; i < x_ode.size(); ++i) {
        x_ode[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
      }
    }
    ++data.steps;
    if (st.time >= next_sample - 1e-12 || st.time >= t_end - 1e-15) {
      data.samples.push_back(st);
      data.ode_states.push_back(x_ode);
      data.sample_times.push_back(st.time);
      while (next_sample <= st.time + 1e-12) next_sample += sample_dt;
    }
  }
  return data;
}

std::vector<DiagnosticsRow> blob_diagnostics(const BlobRunData& data,
                                             const ExperimentConfig& cfg) {
  const RingParams& p = cfg.params;
  const double L = p.log_eps();
  const double ball_radius = 5.0 * std::log(L) / L;
  const double d0 = p.d0();
  const double r_tail = std::isfinite(d0) ? d0 / std::sqrt(L)
                                          : 5.0 * p.epsilon;
  const double z_tail = 0.5;
  const auto centers0 = initial_centers(p);

  std::vector<DiagnosticsRow> rows;
  const int nblob = static_cast<int>(p.y0.size());
  for (size_t k = 0; k < data.samples.size(); ++k) {
    const BlobState& st = data.samples[k];
    for (int i = 0; i < nblob; ++i) {
      DiagnosticsRow row;
      row.t = st.time;
      row.blob = i;
      const auto b = center_of_vorticity(st, i);
      row.b_z = b.z;
      row.b_r = b.r;
      row.energy = blob_energy(st, i);
      row.mass_in_ball =
          mass_in_ball(st, i, data.ode_states[k][i], ball_radius);
      row.m_radial =
          tail_mass(st, i, r_tail, TailDirection::radial, centers0[i].r);
      row.m_vertical =
          tail_mass(st, i, z_tail, TailDirection::vertical, p.z_star);
      row.mu_radial = smoothed_tail_mass(st, i, r_tail, 0.25 * r_tail,
                                         TailDirection::radial, centers0[i].r);
      const auto ext = support_extents(st, i);
      row.R_t = ext.R_t;
      row.Z_t = ext.Z_t;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_blob_outputs(const BlobRunData& data, const ExperimentConfig& cfg,
                        const std::string& out_dir, RunManifest& m) {
  const int nblob = static_cast<int>(cfg.params.y0.size());
  std::vector<TrajectoryRow> traj;
  for (size_t k = 0; k < data.samples.size(); ++k) {
    for (int i = 0; i < nblob; ++i) {
      const auto b = center_of_vorticity(data.samples[k], i);
      traj.push_back({data.samples[k].time, i, b.z, b.r});
    }
  }
  write_trajectories_csv(join(out_dir, "trajectories.csv"), traj);
  write_trajectories_csv(join(out_dir, "trajectories_ode.csv"), [&] {
    std::vector<TrajectoryRow> rows;
    for (size_t k = 0; k < data.samples.size(); ++k) {
      for (int i = 0; i < nblob; ++i) {
        rows.push_back({data.sample_times[k], i, data.ode_states[k][i].z,
                        data.ode_states[k][i].r});
      }
    }
    return rows;
  }());
  write_diagnostics_csv(join(out_dir, "diagnostics.csv"),
                        blob_diagnostics(data, cfg));

  std::vector<InvariantRow> inv;
  for (size_t k = 0; k < data.samples.size(); ++k) {
    const double t = data.samples[k].time;
    Vec2 com{0.0, 0.0};
    for (int i = 0; i < nblob; ++i) com += center_of_vorticity(data.samples[k], i);
    com = com / static_cast<double>(nblob);
    inv.push_back({t, "com_bz", com.z});
    inv.push_back({t, "com_br", com.r});
    if (nblob == 2) {
      const auto b0 = center_of_vorticity(data.samples[k], 0);
      const auto b1 = center_of_vorticity(data.samples[k], 1);
      inv.push_back({t, "b_separation", (b0 - b1).norm()});
    }
  }
  write_invariants_csv(join(out_dir, "invariants.csv"), inv);
  write_checkpoint(join(out_dir, "checkpoint.jsonl"), data.samples.back());

  const std::vector<PlotPanel> panels = {
      {"blob centers", "z", "r",
       {{"trajectories.csv", "z", "r", "b(t)", ""},
        {"trajectories_ode.csv", "z", "r", "X(t)", ""}}},
      {"support extents", "t", "R_t, Z_t",
       {{"diagnostics.csv", "t", "R_t", "R_t", ""},
        {"diagnostics.csv", "t", "Z_t", "Z_t", ""}}},
      {"blob energies", "t", "E_i",
       {{"diagnostics.csv", "t", "energy", "E", ""}}},
      {"mass in ball", "t", "fraction",
       {{"diagnostics.csv", "t", "mass_in_ball", "mass", ""}}}};
  {
    std::ofstream f(join(out_dir, "plotspec.json"), std::ios::binary);
    f << plotspec_to_json(panels);
  }
  m.outputs = {"trajectories.csv", "trajectories_ode.csv", "diagnostics.csv",
               "invariants.csv",   "checkpoint.jsonl",     "plotspec.json",
               "manifest.json"};
}

}  // namespace

RunManifest run_single_ring_blob(const ExperimentConfig& cfg,
                                 const std::string& out_dir) {
  const auto t_start = Clock::now();
  ensure_dir(out_dir);
  cfg.params.validate();
  if (cfg.params.y0.size() != 1) {
    throw ConfigError("single_ring_blob expects exactly one ring");
  }
  RunManifest m;
  m.config = cfg;
  m.code_version = kCodeVersion;

  const auto data = run_blob(cfg);
  m.measurements["steps"] = data.steps;
  m.measurements["particles"] =
      static_cast<double>(data.samples.front().particles.size());

  std::vector<double> ts, bz, br;
  for (const auto& st : data.samples) {
    const auto b = center_of_vorticity(st, 0);
    ts.push_back(st.time);
    bz.push_back(b.z);
    br.push_back(b.r);
  }
  const double slope_z = lsq_slope(ts, bz);
  const double slope_r = lsq_slope(ts, br);
  double br_mean = 0.0;
  for (double v : br) br_mean += v;
  br_mean /= br.size();
  const double predicted = cfg.params.gamma / (4.0 * kPi * br_mean);
  m.measurements["db_z_dt"] = slope_z;
  m.measurements["db_r_dt"] = slope_r;
  m.measurements["predicted_speed"] = predicted;

  m.criteria.push_back(make_criterion(
      "ring_speed", "measured db_z/dt within 20% of gamma/(4 pi b_r)",
      std::abs(slope_z - predicted), 0.2 * std::abs(predicted),
      std::abs(slope_z - predicted) <= 0.2 * std::abs(predicted)));
  m.criteria.push_back(make_criterion(
      "ring_radial", "radial drift |db_r/dt| below 5% of the ring speed",
      std::abs(slope_r), 0.05 * std::abs(predicted),
      std::abs(slope_r) <= 0.05 * std::abs(predicted)));

  double max_rt = 0.0;
  for (const auto& st : data.samples) {
    max_rt = std::max(max_rt, support_extents(st, 0).R_t);
  }
  m.criteria.push_back(make_criterion(
      "ring_support", "R_t stays below 5 eps", max_rt, 5.0 * cfg.params.epsilon,
      max_rt <= 5.0 * cfg.params.epsilon));

  const double circ0 = data.samples.front().blob_circulation(0);
  const double circ1 = data.samples.back().blob_circulation(0);
  m.criteria.push_back(make_criterion(
      "ring_circulation", "per-blob circulation drift is exactly zero",
      std::abs(circ1 - circ0), 0.0, circ1 == circ0));

  write_blob_outputs(data, cfg, out_dir, m);
  m.wall_seconds = seconds_since(t_start);
  {
    std::ofstream f(join(out_dir, "manifest.json"), std::ios::binary);
    f << manifest_to_json(m);
  }
  return m;
}

RunManifest run_leapfrog_blob(const ExperimentConfig& cfg,
                              const std::string& out_dir) {
  const auto t_start = Clock::now();
  ensure_dir(out_dir);
  cfg.params.validate();
  if (cfg.params.y0.size() != 2) {
    throw ConfigError("leapfrog_blob expects exactly two rings");
  }
  RunManifest m;
  m.config = cfg;
  m.code_version = kCodeVersion;

  const auto data = run_blob(cfg);
  m.measurements["steps"] = data.steps;
  m.measurements["particles"] =
      static_cast<double>(data.samples.front().particles.size());

  const double L = cfg.params.log_eps();
  const double d0 = cfg.params.d0();
  const double strip = d0 / std::sqrt(L);
  const double ball_radius = 5.0 * std::log(L) / L;

  double max_gap = 0.0, min_mass = 1.0, max_rt = 0.0;
  double t_eps = cfg.blob.t_end;  // empirical strong-localization time
  bool t_eps_hit = false;
  for (size_t k = 0; k < data.samples.size(); ++k) {
    for (int i = 0; i < 2; ++i) {
      const auto b = center_of_vorticity(data.samples[k], i);
      max_gap = std::max(max_gap, (b - data.ode_states[k][i]).norm());
      min_mass = std::min(
          min_mass,
          mass_in_ball(data.samples[k], i, data.ode_states[k][i], ball_radius));
      const double rt = support_extents(data.samples[k], i).R_t;
      max_rt = std::max(max_rt, rt);
      if (rt > strip && !t_eps_hit) {
        t_eps_hit = true;
        t_eps = data.samples[k].time;
        m.measurements["T_eps_violating_blob"] = i;
      }
    }
  }
  m.measurements["T_eps"] = t_eps_hit ? t_eps : cfg.blob.t_end;

  m.criteria.push_back(make_criterion(
      "lf_tracking", "|b_i - X_i| stays below 0.1", max_gap, 0.1,
      max_gap <= 0.1));
  m.criteria.push_back(make_criterion(
      "lf_mass", "mass in the weak-localization ball stays above 0.9",
      min_mass, 0.9, min_mass >= 0.9));
  m.criteria.push_back(make_criterion(
      "lf_strip", "R_t stays below d0/sqrt(|ln eps|)", max_rt, strip,
      !t_eps_hit));

  // sandwich mu(R, eta) <= m(R) <= mu(R - eta, eta) at sampled (R, eta)
  bool sandwich_ok = true;
  double worst_sandwich = 0.0;
  const auto centers0 = initial_centers(cfg.params);
  for (const auto& st : data.samples) {
    for (int i = 0; i < 2; ++i) {
      for (double r_test : {0.5 * strip, strip}) {
        const double eta = 0.25 * r_test;
        const double mu_hi =
            smoothed_tail_mass(st, i, r_test - eta, eta, TailDirection::radial,
                               centers0[i].r);
        const double mm =
            tail_mass(st, i, r_test, TailDirection::radial, centers0[i].r);
        const double mu_lo = smoothed_tail_mass(st, i, r_test, eta,
                                                TailDirection::radial,
                                                centers0[i].r);
        const double viol =
            std::max(mu_lo - mm, mm - mu_hi) / std::max(1e-300, std::abs(cfg.params.gamma));
        worst_sandwich = std::max(worst_sandwich, viol);
        if (mu_lo > mm + 1e-12 || mm > mu_hi + 1e-12) sandwich_ok = false;
      }
    }
  }
  m.criteria.push_back(make_criterion(
      "lf_sandwich", "mu(R,eta) <= m(R) <= mu(R-eta,eta) at samples",
      worst_sandwich, 0.0, sandwich_ok));

  // motion-law residuals along the run
  const auto residuals = motion_law_residuals(data.samples);
  double worst_binormal = 0.0, worst_radial = 0.0, worst_energy = 0.0,
         worst_interaction = 0.0;
  for (const auto& r : residuals) {
    worst_binormal = std::max(worst_binormal, r.binormal_residual);
    worst_radial = std::max(worst_radial, std::abs(r.radial_drift_residual));
    worst_energy = std::max(worst_energy, std::abs(r.energy_rate_residual));
    worst_interaction =
        std::max(worst_interaction, r.point_interaction_residual);
  }
  m.measurements["residual_binormal"] = worst_binormal;
  m.measurements["residual_radial"] = worst_radial;
  m.measurements["residual_energy_rate"] = worst_energy;
  m.measurements["residual_interaction"] = worst_interaction;

  // Desk-scale thresholds: the laws hold up to O(ln|ln eps|/|ln eps|) terms
  // (binormal, radial) and O(ln|ln eps|) terms (interaction, energy rate).
  const double lnl_over_l = std::log(L) / L;
  const double speed_scale =
      std::abs(cfg.params.gamma) / (4.0 * kPi * cfg.params.r_star);
  const double thr_binormal = 2.0 * speed_scale * lnl_over_l + 0.05;
  const double thr_radial = speed_scale * lnl_over_l + 0.03;
  const double gamma2 = cfg.params.gamma * cfg.params.gamma;
  const double thr_energy = gamma2 / (2.0 * kPi) * std::log(L) * 2.0 + 0.5;
  const double thr_interaction = 2.0 * std::log(L) + 0.5;
  m.criteria.push_back(make_criterion(
      "lf_residual_binormal", "binormal motion-law residual below threshold",
      worst_binormal, thr_binormal, worst_binormal <= thr_binormal));
  m.criteria.push_back(make_criterion(
      "lf_residual_radial", "radial drift residual below threshold",
      worst_radial, thr_radial, worst_radial <= thr_radial));
  m.criteria.push_back(make_criterion(
      "lf_residual_energy", "energy-rate residual below threshold",
      worst_energy, thr_energy, worst_energy <= thr_energy));
  m.criteria.push_back(make_criterion(
      "lf_residual_interaction",
      "exterior field matches the point-vortex interaction", worst_interaction,
      thr_interaction, worst_interaction <= thr_interaction));

  // the inner (smaller radius) blob advances faster initially
  {
    const auto b0_first = center_of_vorticity(data.samples.front(), 0);
    const auto b1_first = center_of_vorticity(data.samples.front(), 1);
    const int inner = b0_first.r < b1_first.r ? 0 : 1;
    const size_t kq = std::min<size_t>(data.samples.size() - 1,
                                       data.samples.size() / 4 + 1);
    const auto bi = center_of_vorticity(data.samples[kq], inner);
    const auto bo = center_of_vorticity(data.samples[kq], 1 - inner);
    const auto bi0 = inner == 0 ? b0_first : b1_first;
    const auto bo0 = inner == 0 ? b1_first : b0_first;
    const double adv_inner = bi.z - bi0.z;
    const double adv_outer = bo.z - bo0.z;
    m.criteria.push_back(make_criterion(
        "lf_pursuer", "inner blob advances faster at first",
        adv_inner - adv_outer, 0.0, adv_inner > adv_outer));
  }

  write_blob_outputs(data, cfg, out_dir, m);
  m.wall_seconds = seconds_since(t_start);
  {
    std::ofstream f(join(out_dir, "manifest.json"), std::ios::binary);
    f << manifest_to_json(m);
  }
  return m;
}

RunManifest run_phase_portrait(const ExperimentConfig& cfg,
                               const std::string& out_dir) {
  const auto t_start = Clock::now();
  ensure_dir(out_dir);
  cfg.params.validate();
  RunManifest m;
  m.config = cfg;
  m.code_version = kCodeVersion;

  const std::vector<double> scales = {0.5, 0.75, 1.0, 1.25};
  std::vector<TrajectoryRow> rows;
  int orbit = 0;
  for (double sc : scales) {
    RingParams p = cfg.params;
    for (auto& v : p.y0) v = v * sc;
    Trajectory traj =
        integrate(SystemKind::YEps, p.y0, {0.0, 80.0}, cfg.integrator.step, p);
    const auto det = detect_period(traj, 1e-2);
    const double horizon = det.found ? det.period * 1.05 : 80.0;
    m.measurements["period_scale_" + format_double(sc)] =
        det.found ? det.period : -1.0;
    Trajectory cut = integrate(SystemKind::YEps, p.y0, {0.0, horizon},
                               cfg.integrator.step, p);
    for (auto& q : cut.states) q = centered_positions(q);
    for (size_t k = 0; k < cut.size(); ++k) {
      rows.push_back({cut.times[k], orbit, cut.states[k][0].z,
                      cut.states[k][0].r});
    }
    ++orbit;
  }
  write_trajectories_csv(join(out_dir, "phase_portrait.csv"), rows);
  const std::vector<PlotPanel> panels = {
      {"centered phase portrait", "z", "r",
       {{"phase_portrait.csv", "z", "r", "orbits", ""}}}};
  {
    std::ofstream f(join(out_dir, "plotspec.json"), std::ios::binary);
    f << plotspec_to_json(panels);
  }
  m.criteria.push_back(make_criterion("portrait", "all orbits computed",
                                      static_cast<double>(orbit), 4.0,
                                      orbit == 4));
  m.outputs = {"phase_portrait.csv", "plotspec.json", "manifest.json"};
  m.wall_seconds = seconds_since(t_start);
  {
    std::ofstream f(join(out_dir, "manifest.json"), std::ios::binary);
    f << manifest_to_json(m);
  }
  return m;
}

RunManifest run_experiment(const ExperimentConfig& cfg,
                           const std::string& out_dir) {
  switch (cfg.kind) {
    case ExperimentKind::leapfrog_ode:
      return run_leapfrog_ode(cfg, out_dir);
    case ExperimentKind::regime_comparison:
      return run_regime_comparison(cfg, out_dir);
    case ExperimentKind::convergence_study:
      return run_convergence_study(cfg, out_dir);
    case ExperimentKind::single_ring_blob:
      return run_single_ring_blob(cfg, out_dir);
    case ExperimentKind::leapfrog_blob:
      return run_leapfrog_blob(cfg, out_dir);
    case ExperimentKind::phase_portrait:
      return run_phase_portrait(cfg, out_dir);
  }
  throw ConfigError("unknown experiment kind");
}

void replay_from_manifest(const std::string& manifest_path) {
  const RunManifest m = manifest_from_json_file(manifest_path);
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::vector<InvariantRow> inv;
  const auto has_output = [&](const std::string& f) {
    return std::find(m.outputs.begin(), m.outputs.end(), f) != m.outputs.end();
  };
  switch (m.config.kind) {
    case ExperimentKind::leapfrog_ode: {
      inv = invariants_for_trajectory_csv((dir / "trajectories.csv").string(),
                                          m.config.params, SystemKind::YEps);
      auto inv2 = invariants_for_trajectory_csv(
          (dir / "trajectories_limit.csv").string(), m.config.params,
          SystemKind::LimitTilde);
      inv.insert(inv.end(), inv2.begin(), inv2.end());
      break;
    }
    case ExperimentKind::regime_comparison:
      inv = invariants_for_trajectory_csv(
          (dir / "trajectories_limit.csv").string(), m.config.params,
          SystemKind::LimitTilde);
      break;
    case ExperimentKind::single_ring_blob:
    case ExperimentKind::leapfrog_blob: {
      const auto rows =
          read_trajectories_csv((dir / "trajectories.csv").string());
      auto [times, states] = rows_to_states(rows);
      for (size_t k = 0; k < times.size(); ++k) {
        Vec2 com{0.0, 0.0};
        for (const auto& v : states[k]) com += v;
        com = com / static_cast<double>(states[k].size());
        inv.push_back({times[k], "com_bz", com.z});
        inv.push_back({times[k], "com_br", com.r});
        if (states[k].size() == 2) {
          inv.push_back(
              {times[k], "b_separation", (states[k][0] - states[k][1]).norm()});
        }
      }
      break;
    }
    default:
      if (!has_output("invariants.csv")) return;
      throw InputError("replay is not defined for this experiment kind");
  }
  write_invariants_csv((dir / "invariants.csv").string(), inv);
}

}  // namespace vring
