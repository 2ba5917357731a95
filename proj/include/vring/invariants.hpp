#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vring/dynamics.hpp"
#include "vring/geometry.hpp"

// Conserved quantities and growth bounds of the limit system, the moving-frame
// center-of-mass drift law, the Gronwall comparison envelope, and the
// capped-density rearrangement bound with its brute-force oracle.

namespace vring {

struct InvariantReport {
  std::string name;
  std::vector<double> times;
  std::vector<double> values;
  double drift = 0.0;  // max |v(t) - v(0)| / max(|v(0)|, eps)
  bool bound_satisfied = true;
};

// H_0 = (1/2) sum_{i != j} ln|q_i - q_j| + (1/(4 r*^2)) sum_i q_ir^2.
double hamiltonian(const std::vector<Vec2>& q, const RingParams& p);

// I = (1/2) sum_i |q_i|^2.
double angular_momentum(const std::vector<Vec2>& q);

// Checks I(t) <= I(0) e^{gamma t / (8 pi r*^2)} (1 + 1e-6) along a
// limit-system trajectory.
InvariantReport momentum_bound_check(const Trajectory& traj,
                                     const RingParams& p);

// Margin of the no-collision bound: returns RHS - LHS of
//   sum_{i != j, |q_i-q_j| < 1} |ln|q_i-q_j||
//     <= 2 N sqrt(N) sqrt(I) - 2 H_0 + I / (2 r*^2).
double log_sum_separation_bound(const std::vector<Vec2>& q,
                                const RingParams& p);

// Exact vertical drift rate of the two-ring moving-frame center of mass,
//   sqrt(L) gamma/(8 pi r*) (1/(1 + Y_1r/(r* sqrt L)) + 1/(1 + Y_2r/(r* sqrt L)) - 2).
double com_drift_rate(const std::vector<Vec2>& y, const RingParams& p);

// Second-order surrogate (gamma/8pi)(Y_1r^2 + Y_2r^2)/(r*^3 sqrt L).
double com_drift_rate_taylor(const std::vector<Vec2>& y, const RingParams& p);

// Envelope |y(t) - z(t)| <= (int_0^t g + |y(0)-z(0)|) e^{kappa t} checked at
// every shared sample with 1e-9 slack. g_integral(t) must return int_0^t g.
bool gronwall_envelope(const Trajectory& y_traj, const Trajectory& z_traj,
                       double kappa,
                       const std::function<double(double)>& g_integral);

struct RadialProfile {
  std::function<double(double)> g;  // non-increasing, non-negative on (0, inf)
  double density_cap = 1.0;         // M
  double total_mass = 1.0;          // gamma
  double domain_half_width = 0.0;   // discrete domain [-w, w]^2; 0 = auto 2R
  double radius() const;            // R = sqrt(mass / (pi M))
  double half_width() const;
};

// max over {0 <= f <= M, int f = mass} of int g(|x-y|) f(y) dy
//   = 2 pi M int_0^R s g(s) ds.
double rearrangement_bound(const RadialProfile& prof);

// Discrete maximum on a grid_n x grid_n grid by greedy nearest-cell filling
// (exact for radially non-increasing g). Converges to the bound from below.
double rearrangement_bruteforce(const RadialProfile& prof, int grid_n);

// Value of int g(|x-y|) f(y) dy for an arbitrary admissible discrete density
// given as cell values on the same grid; used by the randomized checks.
double rearrangement_profile_value(const RadialProfile& prof, int grid_n,
                                   const std::vector<double>& cell_density);

// Grid geometry shared by the brute-force maximizer and the random checks:
// the domain is the square [-2R, 2R]^2 split grid_n x grid_n.
double rearrangement_cell_size(const RadialProfile& prof, int grid_n);

}  // namespace vring
