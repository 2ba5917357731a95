#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vring/geometry.hpp"

// Axisymmetric Biot-Savart kernels on the meridian half-plane.
//
// The stream function of the 2D-reduced problem is
//     Psi(x) = sum_k G(x, y_k) w_k,     w_k ~ y_r * omega(y) dy,
// with the Green kernel
//     G(x,y)  = -(1/2pi) sqrt(x_r y_r) F(|x-y|^2 / (x_r y_r)),
//     F(s)    = int_0^{pi/2} cos(2t) / sqrt(sin^2 t + s/4) dt,
// and the velocity u = (1/x_r) perp(grad Psi).
//
// F has the closed form   F(s) = (2/k - k) K(k) - (2/k) E(k),
// k^2 = 4/(4+s), so two interchangeable backends are provided: an adaptive
// Gauss-Kronrod quadrature of the defining integral (reference) and the
// elliptic form evaluated by the arithmetic-geometric mean (fast path).
//
// Desingularization replaces |x-y|^2 by |x-y|^2 + delta^2 throughout, which
// keeps every algebraic identity between the kernels exact.

namespace vring {

enum class KernelMethod : std::uint8_t {
  adaptive_quadrature,
  elliptic_integral,
};

struct KernelEvalConfig {
  double quad_rel_tol = 1e-10;  // must lie in (0, 1e-4]
  double delta = 0.0;           // desingularization length, >= 0
  KernelMethod method = KernelMethod::elliptic_integral;

  void validate() const;
};

struct VortexParticle {
  HalfPlanePoint pos;
  double weight = 0.0;  // element of int x_r omega dx (circulation units)
  int blob_id = 0;
};

// --- F and its derivative ---------------------------------------------------

// F(s) for s > 0, to relative tolerance cfg.quad_rel_tol.
double f_kernel(double s, const KernelEvalConfig& cfg);

// F'(s). Quadrature backend integrates -1/8 cos(2t)(sin^2 t + s/4)^{-3/2};
// elliptic backend uses F'(s) = (k/8) [2K - (1+k'^2) E / k'^2].
double f_kernel_deriv(double s, const KernelEvalConfig& cfg);

// Limit of F(s) + (1/2) ln s as s -> 0, measured by the quadrature oracle at
// startup of the validation suite; analytically 3 ln 2 - 2.
double f_small_s_constant(double quad_rel_tol = 1e-12);

// --- Green kernel and its split ---------------------------------------------

// G(x,y); symmetric in its arguments. Throws SingularityError on coincident
// points when cfg.delta == 0.
double green(const HalfPlanePoint& x, const HalfPlanePoint& y,
             const KernelEvalConfig& cfg);

// S(x,y) = G(x,y) - (sqrt(x_r y_r)/2pi) ln|x-y|, bounded near the diagonal.
// Evaluated from F(s) + (1/2) ln s, never by differencing G.
double green_remainder(const HalfPlanePoint& x, const HalfPlanePoint& y,
                       const KernelEvalConfig& cfg);

// grad_x G(x,y) (analytic, chain rule through F').
Vec2 green_grad_x(const HalfPlanePoint& x, const HalfPlanePoint& y,
                  const KernelEvalConfig& cfg);

// grad_x S(x,y) = grad_x G minus the analytic gradient of the log term.
Vec2 green_remainder_grad_x(const HalfPlanePoint& x, const HalfPlanePoint& y,
                            const KernelEvalConfig& cfg);

// --- particle sums ------------------------------------------------------------

// Psi(x) = sum_k G(x, y_k) w_k.
double stream_function(std::span<const VortexParticle> particles,
                       const HalfPlanePoint& x, const KernelEvalConfig& cfg);

// psi(x) = sum_k (sqrt(x_r y_r)/2pi) ln|x-y_k| w_k  (log-only kernel).
double psi_singular(std::span<const VortexParticle> particles,
                    const HalfPlanePoint& x, const KernelEvalConfig& cfg);

// u(x) = (1/x_r) (-d_r Psi, d_z Psi) via the analytic gradient of G.
Vec2 velocity_from_stream(std::span<const VortexParticle> particles,
                          const HalfPlanePoint& x, const KernelEvalConfig& cfg);

struct VelocitySplit {
  Vec2 u_K;  // 2D-like spinning part
  Vec2 u_L;  // local-induction part, purely axial: -psi(x)/(2 x_r^2) e_z
  Vec2 u_R;  // smooth remainder
  Vec2 total() const { return u_K + u_L + u_R; }
};

// Three-way decomposition; u_K + u_L + u_R equals velocity_from_stream
// exactly (same pair terms, regrouped).
VelocitySplit velocity_decomposed(std::span<const VortexParticle> particles,
                                  const HalfPlanePoint& x,
                                  const KernelEvalConfig& cfg);

// Independent oracle: the 3D axisymmetric Biot-Savart law evaluated by
// adaptive quadrature in the azimuthal angle,
//   u_z = -(1/4pi) sum_k y_r w_k int_-pi^pi (x_r cos t - y_r) / D^{3/2} dt,
//   u_r =  (1/4pi) sum_k y_r w_k int_-pi^pi (x_z - y_z) cos t / D^{3/2} dt,
//   D   = |x-y|^2 + delta^2 + 2 x_r y_r (1 - cos t).
Vec2 velocity_3d_formula(std::span<const VortexParticle> particles,
                         const HalfPlanePoint& x, const KernelEvalConfig& cfg);

// --- batch evaluation ---------------------------------------------------------

// Velocities at every particle location induced by all particles (the k == l
// pair contributes its regularized value; its u_K part vanishes identically).
// Data-parallel over targets; each target's sum runs in fixed index order, so
// the result is bit-identical for any worker count.
void velocities_at_particles(std::span<const VortexParticle> particles,
                             const KernelEvalConfig& cfg, std::span<Vec2> out);

// As above for arbitrary evaluation points.
void velocities_at_points(std::span<const VortexParticle> particles,
                          std::span<const HalfPlanePoint> points,
                          const KernelEvalConfig& cfg, std::span<Vec2> out);

// Number of worker threads used by the batch evaluators (never changes the
// results, only the wall clock). 0 restores the hardware default.
void set_worker_count(int workers);
int worker_count();

}  // namespace vring
