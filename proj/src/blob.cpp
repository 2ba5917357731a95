#include "vring/blob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vring {

namespace {
constexpr double kPi = 3.14159265358979323846;

double blob_omega(BlobProfile profile, double rho2, double eps) {
  switch (profile) {
    case BlobProfile::uniform_patch:
      return 1.0;
    case BlobProfile::truncated_gaussian: {
      const double sigma = 0.5 * eps;
      return std::exp(-0.5 * rho2 / (sigma * sigma));
    }
  }
  return 0.0;
}

// W_{R,eta}: smoothstep transition, 1 on [0,R], 0 beyond R+eta.
double cutoff_w(double s, double R, double eta) {
  const double a = std::abs(s);
  if (a <= R) return 1.0;
  if (a >= R + eta) return 0.0;
  const double q = (a - R) / eta;
  return 1.0 - q * q * (3.0 - 2.0 * q);
}

}  // namespace

int BlobState::blob_count() const {
  int n = 0;
  for (const auto& p : particles) n = std::max(n, p.blob_id + 1);
  return n;
}

std::vector<const VortexParticle*> BlobState::blob(int i) const {
  std::vector<const VortexParticle*> out;
  for (const auto& p : particles) {
    if (p.blob_id == i) out.push_back(&p);
  }
  return out;
}

double BlobState::blob_circulation(int i) const {
  double s = 0.0;
  for (const auto& p : particles) {
    if (p.blob_id == i) s += p.weight;
  }
  return s;
}

KernelEvalConfig BlobState::kernel_config() const {
  KernelEvalConfig cfg;
  cfg.delta = delta;
  cfg.method = KernelMethod::elliptic_integral;
  return cfg;
}

std::vector<VortexParticle> init_blob(BlobProfile profile,
                                      const HalfPlanePoint& center,
                                      const RingParams& p,
                                      int particles_per_blob, int blob_id,
                                      double density_cap) {
  if (particles_per_blob < 16) {
    throw ConfigError("particles_per_blob must be at least 16");
  }
  const double eps = p.epsilon;
  if (!(center.r > eps)) {
    throw ConfigError("blob center must satisfy r > eps");
  }
  const int m = static_cast<int>(
      std::ceil(std::sqrt(static_cast<double>(particles_per_blob) / kPi)));
  const double h = eps / m;

  std::vector<VortexParticle> out;
  double total = 0.0;
  for (int i = -m; i <= m; ++i) {
    for (int j = -m; j <= m; ++j) {
      const Vec2 off{i * h, j * h};
      const double rho2 = off.norm2();
      if (rho2 > eps * eps) continue;
      const HalfPlanePoint pos = center + off;
      const double w = pos.r * blob_omega(profile, rho2, eps) * h * h;
      out.push_back({pos, w, blob_id});
      total += w;
    }
  }
  if (out.empty() || total == 0.0) {
    throw ConfigError("blob discretization produced no particles");
  }
  const double scale = p.gamma / total;
  for (auto& q : out) q.weight *= scale;

  // hyp on omega_0: |omega| <= M_0 / eps^2. The implied omega of particle k
  // is w_k / (x_r h^2).
  double max_omega = 0.0;
  for (const auto& q : out) {
    max_omega = std::max(max_omega, std::abs(q.weight) / (q.pos.r * h * h));
  }
  if (max_omega > density_cap / (eps * eps) * (1.0 + 1e-12)) {
    throw ConfigError(
        "profile cannot carry circulation gamma under the density cap: "
        "needs |omega| = " +
        std::to_string(max_omega) + " > M0/eps^2 = " +
        std::to_string(density_cap / (eps * eps)));
  }

  // zero-weight particles carry no support information
  std::erase_if(out, [&](const VortexParticle& q) {
    return std::abs(q.weight) < 1e-16 * std::abs(p.gamma);
  });
  return out;
}

std::vector<HalfPlanePoint> initial_centers(const RingParams& p) {
  return yframe_to_x(p.y0, 0.0, p);
}

BlobState init_blob_state(BlobProfile profile, const RingParams& p,
                          int particles_per_blob, double delta,
                          double density_cap) {
  p.validate();
  if (!(delta > 0.0)) throw ConfigError("blob delta must be positive");
  BlobState st;
  st.params = p;
  st.delta = delta;
  const auto centers = initial_centers(p);
  for (size_t i = 0; i < centers.size(); ++i) {
    auto blob = init_blob(profile, centers[i], p, particles_per_blob,
                          static_cast<int>(i), density_cap);
    st.particles.insert(st.particles.end(), blob.begin(), blob.end());
  }
  return st;
}

Vec2 exterior_field(const BlobState& state, int i, const HalfPlanePoint& x) {
  std::vector<VortexParticle> others;
  others.reserve(state.particles.size());
  for (const auto& p : state.particles) {
    if (p.blob_id != i) others.push_back(p);
  }
  if (others.empty()) return {0.0, 0.0};
  return velocity_from_stream(others, x, state.kernel_config());
}

BlobState step(const BlobState& state, double dt) {
  if (!(dt > 0.0)) throw ConfigError("blob step requires dt > 0");
  const double inv_l = 1.0 / state.params.log_eps();
  const auto cfg = state.kernel_config();
  const size_t n = state.particles.size();

  std::vector<Vec2> v1(n), v2(n);
  velocities_at_particles(state.particles, cfg, v1);

  double max_speed = 0.0;
  for (const auto& v : v1) max_speed = std::max(max_speed, v.norm());

  BlobState mid = state;
  for (size_t k = 0; k < n; ++k) {
    mid.particles[k].pos += v1[k] * (0.5 * dt * inv_l);
    if (!(mid.particles[k].pos.r > 0.0)) {
      throw SimulationError("particle " + std::to_string(k) +
                            " crossed the axis r = 0 at t = " +
                            std::to_string(state.time));
    }
  }
  velocities_at_particles(mid.particles, cfg, v2);

  BlobState out = state;
  for (size_t k = 0; k < n; ++k) {
    out.particles[k].pos += v2[k] * (dt * inv_l);
    if (!(out.particles[k].pos.r > 0.0)) {
      throw SimulationError("particle " + std::to_string(k) +
                            " crossed the axis r = 0 at t = " +
                            std::to_string(state.time));
    }
  }
  out.time = state.time + dt;
  out.last_max_speed = max_speed;
  return out;
}

double cfl_dt(BlobState& state) {
  if (state.last_max_speed <= 0.0) {
    std::vector<Vec2> v(state.particles.size());
    velocities_at_particles(state.particles, state.kernel_config(), v);
    double m = 0.0;
    for (const auto& vi : v) m = std::max(m, vi.norm());
    state.last_max_speed = m;
  }
  if (state.last_max_speed <= 0.0) return 1e-3;
  return std::min(0.25 * state.delta * state.params.log_eps() /
                      state.last_max_speed,
                  1e-3);
}

HalfPlanePoint center_of_vorticity(const BlobState& state, int i) {
  Vec2 acc{0.0, 0.0};
  double w = 0.0;
  for (const auto& p : state.particles) {
    if (p.blob_id != i) continue;
    acc += p.pos * p.weight;
    w += p.weight;
  }
  if (w == 0.0) {
    throw SimulationError("center_of_vorticity of a zero-weight blob");
  }
  return acc / w;
}

double blob_energy(const BlobState& state, int i) {
  std::vector<const VortexParticle*> blob = state.blob(i);
  if (blob.size() < 2) {
    throw SimulationError("blob_energy needs at least two particles");
  }
  const auto cfg = state.kernel_config();
  // - sum_{k != l} G(x_k, x_l) w_k w_l, accumulated over unordered pairs.
  double acc = 0.0;
  for (size_t k = 0; k < blob.size(); ++k) {
    for (size_t l = k + 1; l < blob.size(); ++l) {
      acc += green(blob[k]->pos, blob[l]->pos, cfg) * blob[k]->weight *
             blob[l]->weight;
    }
  }
  return -2.0 * acc;
}

double mass_in_ball(const BlobState& state, int i,
                    const HalfPlanePoint& center, double radius) {
  if (!(radius > 0.0)) throw InputError("mass_in_ball radius must be positive");
  double inside = 0.0, total = 0.0;
  const double r2 = radius * radius;
  for (const auto& p : state.particles) {
    if (p.blob_id != i) continue;
    total += p.weight;
    if ((p.pos - center).norm2() <= r2) inside += p.weight;
  }
  if (total == 0.0) throw SimulationError("mass_in_ball of an empty blob");
  return inside / total;
}

double tail_mass(const BlobState& state, int i, double R, TailDirection dir,
                 double reference) {
  if (!(R >= 0.0)) throw InputError("tail_mass R must be >= 0");
  double acc = 0.0;
  for (const auto& p : state.particles) {
    if (p.blob_id != i) continue;
    const double coord = dir == TailDirection::radial ? p.pos.r : p.pos.z;
    if (std::abs(coord - reference) >= R) acc += p.weight;
  }
  return acc;
}

double smoothed_tail_mass(const BlobState& state, int i, double R, double eta,
                          TailDirection dir, double reference) {
  if (!(R > 0.0) || !(eta > 0.0)) {
    throw InputError("smoothed_tail_mass requires R, eta > 0");
  }
  double acc = 0.0;
  for (const auto& p : state.particles) {
    if (p.blob_id != i) continue;
    const double coord = dir == TailDirection::radial ? p.pos.r : p.pos.z;
    acc += (1.0 - cutoff_w(coord - reference, R, eta)) * p.weight;
  }
  return acc;
}

SupportExtents support_extents(const BlobState& state, int i) {
  const auto centers = initial_centers(state.params);
  if (i < 0 || static_cast<size_t>(i) >= centers.size()) {
    throw InputError("support_extents: no such blob");
  }
  SupportExtents e;
  bool any = false;
  for (const auto& p : state.particles) {
    if (p.blob_id != i) continue;
    any = true;
    e.R_t = std::max(e.R_t, std::abs(p.pos.r - centers[i].r));
    e.Z_t = std::max(e.Z_t, std::abs(p.pos.z - state.params.z_star));
  }
  if (!any) throw SimulationError("support_extents of an empty blob");
  return e;
}

std::vector<MotionLawResidualRow> motion_law_residuals(
    std::span<const BlobState> history) {
  if (history.size() < 3) {
    throw InputError("motion_law_residuals needs at least three states");
  }
  const int nblob = history.front().blob_count();
  const double L = history.front().params.log_eps();
  const double gamma = history.front().params.gamma;

  // b and E at every stored state
  std::vector<std::vector<Vec2>> b(history.size());
  std::vector<std::vector<double>> energy(history.size());
  for (size_t k = 0; k < history.size(); ++k) {
    b[k].resize(nblob);
    energy[k].resize(nblob);
    for (int i = 0; i < nblob; ++i) {
      b[k][i] = center_of_vorticity(history[k], i);
      energy[k][i] = blob_energy(history[k], i);
    }
  }

  std::vector<MotionLawResidualRow> rows;
  for (size_t k = 1; k + 1 < history.size(); ++k) {
    const double dt = history[k + 1].time - history[k - 1].time;
    for (int i = 0; i < nblob; ++i) {
      const Vec2 db = (b[k + 1][i] - b[k - 1][i]) / dt;
      const double de = (energy[k + 1][i] - energy[k - 1][i]) / dt;
      const Vec2 f = exterior_field(history[k], i, b[k][i]);

      MotionLawResidualRow row;
      row.time = history[k].time;
      row.blob = i;
      row.radial_drift_residual = db.r - f.r / L;
      const Vec2 predicted =
          f / L + Vec2{gamma / (4.0 * kPi * b[k][i].r), 0.0};
      row.binormal_residual = (db - predicted).norm();
      row.energy_rate_residual = de - gamma * gamma / (2.0 * kPi) * f.r;

      Vec2 pv{0.0, 0.0};
      for (int j = 0; j < nblob; ++j) {
        if (j == i) continue;
        const Vec2 d = b[k][i] - b[k][j];
        pv += perp(d) * (gamma / (2.0 * kPi) / d.norm2());
      }
      row.point_interaction_residual = (f - pv).norm();
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace vring
