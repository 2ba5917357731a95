#include "vring/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vring {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_distinct(const std::vector<Vec2>& pts, double t) {
  for (size_t i = 0; i < pts.size(); ++i) {
    for (size_t j = i + 1; j < pts.size(); ++j) {
      if ((pts[i] - pts[j]).norm() < kCollisionThreshold) {
        throw CollisionError("points " + std::to_string(i) + " and " +
                                 std::to_string(j) + " collided",
                             t);
      }
    }
  }
}

// sum_{j != i} perp(q_i - q_j) / |q_i - q_j|^2, the 2D point-vortex part.
Vec2 pair_interaction(const std::vector<Vec2>& q, size_t i) {
  Vec2 acc{0.0, 0.0};
  for (size_t j = 0; j < q.size(); ++j) {
    if (j == i) continue;
    const Vec2 d = q[i] - q[j];
    const double n2 = d.norm2();
    if (n2 < kCollisionThreshold * kCollisionThreshold) {
      throw CollisionError("coincident points in interaction sum", 0.0);
    }
    acc += perp(d) / n2;
  }
  return acc;
}

}  // namespace

const char* system_kind_name(SystemKind k) {
  switch (k) {
    case SystemKind::XEps:
      return "XEps";
    case SystemKind::YEps:
      return "YEps";
    case SystemKind::LimitTilde:
      return "LimitTilde";
    case SystemKind::Marchioro:
      return "Marchioro";
  }
  return "?";
}

double RingParams::d0() const {
  double m = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < y0.size(); ++j) {
    for (size_t k = j + 1; k < y0.size(); ++k) {
      m = std::min(m, std::abs(y0[j].r - y0[k].r));
    }
  }
  return y0.size() > 1 ? 0.25 * m : std::numeric_limits<double>::infinity();
}

void RingParams::validate() const {
  if (gamma == 0.0) throw ConfigError("gamma must be nonzero");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ConfigError("epsilon must lie in (0, 1)");
  }
  if (!(log_eps() > 1.0)) {
    throw ConfigError("|ln eps| must exceed 1 for the sqrt scalings");
  }
  if (!(r_star > 0.0)) throw ConfigError("r_star must be positive");
  for (size_t j = 0; j < y0.size(); ++j) {
    for (size_t k = j + 1; k < y0.size(); ++k) {
      if (y0[j].r == y0[k].r) {
        throw ConfigError("initial offsets must have distinct radial parts");
      }
    }
  }
  if (gammas && gammas->size() != y0.size()) {
    throw ConfigError("gammas must match the number of rings");
  }
}

std::vector<Vec2> xsystem_rhs(const std::vector<Vec2>& x,
                              const RingParams& p) {
  const double L = p.log_eps();
  std::vector<Vec2> rhs(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i].r > 0.0)) {
      throw DomainError("XEps system requires X_ir > 0");
    }
    rhs[i] = Vec2{p.gamma / (4.0 * kPi * x[i].r), 0.0} +
             pair_interaction(x, i) * (p.gamma / (2.0 * kPi * L));
  }
  return rhs;
}

std::vector<Vec2> yeps_rhs(const std::vector<Vec2>& y, const RingParams& p) {
  const double sl = p.sqrt_log_eps();
  std::vector<Vec2> rhs(y.size());
  for (size_t i = 0; i < y.size(); ++i) {
    const double denom = 1.0 + y[i].r / (p.r_star * sl);
    if (!(denom > 0.0)) {
      throw DomainError("moving-frame denominator 1 + Y_r/(r* sqrt|ln eps|) "
                        "must stay positive");
    }
    const double vert =
        sl * p.gamma / (4.0 * kPi * p.r_star) * (1.0 / denom - 1.0);
    rhs[i] =
        pair_interaction(y, i) * (p.gamma / (2.0 * kPi)) + Vec2{vert, 0.0};
  }
  return rhs;
}

std::vector<Vec2> limit_rhs(const std::vector<Vec2>& y, const RingParams& p) {
  std::vector<Vec2> rhs(y.size());
  const double decel = p.gamma / (4.0 * kPi * p.r_star * p.r_star);
  for (size_t i = 0; i < y.size(); ++i) {
    rhs[i] = pair_interaction(y, i) * (p.gamma / (2.0 * kPi)) -
             Vec2{decel * y[i].r, 0.0};
  }
  return rhs;
}

std::vector<Vec2> marchioro_rhs(const std::vector<Vec2>& y,
                                const RingParams& p) {
  std::vector<Vec2> rhs(y.size());
  for (size_t i = 0; i < y.size(); ++i) {
    const double gi = p.gammas ? (*p.gammas)[i] : p.gamma;
    rhs[i] = pair_interaction(y, i) * (gi / (2.0 * kPi)) +
             Vec2{gi / (4.0 * kPi * p.r_star), 0.0};
  }
  return rhs;
}

std::vector<Vec2> system_rhs(SystemKind kind, const std::vector<Vec2>& state,
                             const RingParams& p) {
  switch (kind) {
    case SystemKind::XEps:
      return xsystem_rhs(state, p);
    case SystemKind::YEps:
      return yeps_rhs(state, p);
    case SystemKind::LimitTilde:
      return limit_rhs(state, p);
    case SystemKind::Marchioro:
      return marchioro_rhs(state, p);
  }
  throw ConfigError("unknown system kind");
}

std::vector<Vec2> yframe_to_x(const std::vector<Vec2>& y, double t,
                              const RingParams& p) {
  const Vec2 ref{p.z_star + p.gamma * t / (4.0 * kPi * p.r_star), p.r_star};
  const double inv_sl = 1.0 / p.sqrt_log_eps();
  std::vector<Vec2> x(y.size());
  for (size_t i = 0; i < y.size(); ++i) {
    x[i] = ref + y[i] * inv_sl;
    if (!(x[i].r > 0.0)) {
      throw DomainError("yframe_to_x produced a non-positive radius");
    }
  }
  return x;
}

std::vector<Vec2> x_to_yframe(const std::vector<Vec2>& x, double t,
                              const RingParams& p) {
  const Vec2 ref{p.z_star + p.gamma * t / (4.0 * kPi * p.r_star), p.r_star};
  const double sl = p.sqrt_log_eps();
  std::vector<Vec2> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = (x[i] - ref) * sl;
  return y;
}

std::vector<Vec2> centered_positions(const std::vector<Vec2>& y) {
  Vec2 mean{0.0, 0.0};
  for (const auto& v : y) mean += v;
  if (!y.empty()) mean = mean / static_cast<double>(y.size());
  std::vector<Vec2> out(y.size());
  for (size_t i = 0; i < y.size(); ++i) out[i] = y[i] - mean;
  return out;
}

Trajectory integrate(SystemKind kind, const std::vector<Vec2>& y0,
                     std::pair<double, double> t_span, double step,
                     const RingParams& p) {
  if (!(step > 0.0)) throw ConfigError("integration step must be positive");
  if (!(t_span.second > t_span.first)) {
    throw ConfigError("integration span must be increasing");
  }
  check_distinct(y0, t_span.first);

  Trajectory traj;
  traj.kind = kind;
  traj.params = p;
  traj.times.push_back(t_span.first);
  traj.states.push_back(y0);

  auto state = y0;
  double t = t_span.first;
  const size_t n = y0.size();
  std::vector<Vec2> k1, k2, k3, k4, tmp(n);

  while (t < t_span.second - 1e-15 * std::max(1.0, std::abs(t_span.second))) {
    const double h = std::min(step, t_span.second - t);
    k1 = system_rhs(kind, state, p);
    for (size_t i = 0; i < n; ++i) tmp[i] = state[i] + k1[i] * (0.5 * h);
    k2 = system_rhs(kind, tmp, p);
    for (size_t i = 0; i < n; ++i) tmp[i] = state[i] + k2[i] * (0.5 * h);
    k3 = system_rhs(kind, tmp, p);
    for (size_t i = 0; i < n; ++i) tmp[i] = state[i] + k3[i] * h;
    k4 = system_rhs(kind, tmp, p);
    for (size_t i = 0; i < n; ++i) {
      state[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
      if (!std::isfinite(state[i].z) || !std::isfinite(state[i].r)) {
        throw IntegrationError("state became non-finite", t);
      }
    }
    t += h;
    check_distinct(state, t);
    traj.times.push_back(t);
    traj.states.push_back(state);
  }
  return traj;
}

}  // namespace vring
