#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vring/geometry.hpp"

// Reduced point-vortex systems for N coaxial rings of circulation gamma,
// core thickness eps, around the reference point X* = (z*, r*):
//
//   XEps        dX_i/dt = gamma/(4 pi X_ir) e_z
//                        + gamma/(2 pi L) sum_{j != i} perp(X_i-X_j)/|X_i-X_j|^2
//   YEps        moving-frame offsets, X_i = X* + gamma t/(4 pi r*) e_z + Y_i/sqrt(L)
//   LimitTilde  the eps-independent limit of YEps
//   Marchioro   per-ring circulations, radius-independent vertical self-term
//
// with L = |ln eps|. Trajectories come from classical fixed-step RK4.

namespace vring {

enum class SystemKind : std::uint8_t {
  XEps,
  YEps,
  LimitTilde,
  Marchioro,
};

const char* system_kind_name(SystemKind k);

struct RingParams {
  double gamma = 2.0 * 3.14159265358979323846;
  double epsilon = 0.01;  // in (0,1), |ln eps| > 1
  double z_star = 0.0;
  double r_star = 1.0;
  std::vector<Vec2> y0;                  // initial offsets Y_{i,0}
  std::optional<std::vector<double>> gammas;  // Marchioro regime only

  double log_eps() const { return std::abs(std::log(epsilon)); }
  double sqrt_log_eps() const { return std::sqrt(log_eps()); }

  // d_0 = (1/4) min_{j != k} |Y_{j,0,r} - Y_{k,0,r}|
  double d0() const;

  // Throws ConfigError when the Theorem hypotheses fail (gamma = 0,
  // eps outside (0,1), |ln eps| <= 1, equal initial radii, r* <= 0).
  void validate() const;
};

std::vector<Vec2> xsystem_rhs(const std::vector<Vec2>& x,
                              const RingParams& p);
std::vector<Vec2> yeps_rhs(const std::vector<Vec2>& y, const RingParams& p);
std::vector<Vec2> limit_rhs(const std::vector<Vec2>& y, const RingParams& p);
std::vector<Vec2> marchioro_rhs(const std::vector<Vec2>& y,
                                const RingParams& p);

std::vector<Vec2> system_rhs(SystemKind kind, const std::vector<Vec2>& state,
                             const RingParams& p);

// Frame maps of eq. X_i = X* + gamma t /(4 pi r*) e_z + Y_i / sqrt(L).
std::vector<Vec2> yframe_to_x(const std::vector<Vec2>& y, double t,
                              const RingParams& p);
std::vector<Vec2> x_to_yframe(const std::vector<Vec2>& x, double t,
                              const RingParams& p);

// Subtract the arithmetic mean: hat Y_i = Y_i - mean(Y).
std::vector<Vec2> centered_positions(const std::vector<Vec2>& y);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<Vec2>> states;
  SystemKind kind = SystemKind::LimitTilde;
  RingParams params;

  size_t size() const { return times.size(); }
  const std::vector<Vec2>& back() const { return states.back(); }
};

constexpr double kCollisionThreshold = 1e-10;

// Fixed-step RK4 from t_span.first to t_span.second; every accepted state is
// recorded, the last partial step is shortened to land on t_end exactly.
// Throws CollisionError when a pairwise distance falls under the threshold
// (the trajectory so far is attached by the caller via last_valid), and
// IntegrationError on non-finite states.
Trajectory integrate(SystemKind kind, const std::vector<Vec2>& y0,
                     std::pair<double, double> t_span, double step,
                     const RingParams& p);

}  // namespace vring
