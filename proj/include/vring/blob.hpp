#pragma once

#include <span>
#include <string>
#include <vector>

#include "vring/dynamics.hpp"
#include "vring/geometry.hpp"
#include "vring/kernel.hpp"

// Regularized vortex-blob discretization of the 2D-reduced transport
// equation. Particles carry immutable weights w ~ x_r omega dx; the state
// advances by RK2 (midpoint) under the field (u + F)/|ln eps| in rescaled
// time, where u + F is simply the velocity induced by all particles.

namespace vring {

enum class BlobProfile : std::uint8_t { uniform_patch, truncated_gaussian };
enum class TailDirection : std::uint8_t { radial, vertical };

struct BlobState {
  std::vector<VortexParticle> particles;
  double time = 0.0;  // rescaled time
  RingParams params;
  double delta = 0.0;            // blob regularization length
  double last_max_speed = 0.0;   // max |u+F| from the previous advance, 0 = unknown

  int blob_count() const;
  std::vector<const VortexParticle*> blob(int i) const;
  double blob_circulation(int i) const;
  KernelEvalConfig kernel_config() const;
};

// Particles of one blob on a uniform grid of spacing eps/ceil(sqrt(n/pi))
// inside the disc B(center, eps); weights x_r omega h^2 rescaled so the blob
// circulation equals gamma exactly. Weights below 1e-16 gamma are dropped.
// density_cap = M_0: the implied sup of |omega| must not exceed M_0/eps^2.
std::vector<VortexParticle> init_blob(BlobProfile profile,
                                      const HalfPlanePoint& center,
                                      const RingParams& p,
                                      int particles_per_blob, int blob_id,
                                      double density_cap);

// A full N-blob state from the ring parameters: blob i is centered at
// X_i(0) = X* + Y_{i,0}/sqrt(|ln eps|).
BlobState init_blob_state(BlobProfile profile, const RingParams& p,
                          int particles_per_blob, double delta,
                          double density_cap);

// Velocity at x induced by every blob except i.
Vec2 exterior_field(const BlobState& state, int i, const HalfPlanePoint& x);

// One RK2 (midpoint) advance by dt in rescaled time. Weights are untouched.
// Throws SimulationError if a particle crosses r <= 0.
BlobState step(const BlobState& state, double dt);

// dt = min(0.25 delta |ln eps| / max_speed, 1e-3), from the previous step's
// max unrescaled speed (evaluates the field once when no history exists).
double cfl_dt(BlobState& state);

HalfPlanePoint center_of_vorticity(const BlobState& state, int i);

// E_i = - sum_{k != l} G(x_k, x_l) w_k w_l over blob i (delta-regularized).
double blob_energy(const BlobState& state, int i);

// Fraction of the blob's circulation inside B(center, radius).
double mass_in_ball(const BlobState& state, int i, const HalfPlanePoint& center,
                    double radius);

// Circulation beyond distance R from the reference coordinate, sharp cutoff.
double tail_mass(const BlobState& state, int i, double R, TailDirection dir,
                 double reference);

// Mollified tail with the smoothstep cutoff W_{R,eta}: 1 on [0,R], 0 beyond
// R+eta, |W'|_inf <= 1.5/eta.
double smoothed_tail_mass(const BlobState& state, int i, double R, double eta,
                          TailDirection dir, double reference);

struct SupportExtents {
  double R_t = 0.0;  // max |pos_r - X_{i,0,r}|
  double Z_t = 0.0;  // max |pos_z - z*|
};

SupportExtents support_extents(const BlobState& state, int i);

// Initial blob centers X_{i,0} implied by the parameters.
std::vector<HalfPlanePoint> initial_centers(const RingParams& p);

// Per-time motion-law residuals, central-differenced over a stored history:
//   d b_r/dt  vs  F_r(b)/|ln eps|
//   d b/dt    vs  F(b)/|ln eps| + gamma e_z/(4 pi b_r)
//   d E/dt    vs  (gamma^2/2pi) F_r(b)
//   F_i(b_i)  vs  (gamma/2pi) sum_{j != i} perp(b_i-b_j)/|b_i-b_j|^2
struct MotionLawResidualRow {
  double time = 0.0;
  int blob = 0;
  double radial_drift_residual = 0.0;
  double binormal_residual = 0.0;
  double energy_rate_residual = 0.0;
  double point_interaction_residual = 0.0;
};

std::vector<MotionLawResidualRow> motion_law_residuals(
    std::span<const BlobState> history);

}  // namespace vring
