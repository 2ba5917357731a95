#include "vring/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace vring {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double hamiltonian(const std::vector<Vec2>& q, const RingParams& p) {
  double log_part = 0.0;
  for (size_t i = 0; i < q.size(); ++i) {
    for (size_t j = 0; j < q.size(); ++j) {
      if (i == j) continue;
      const double d = (q[i] - q[j]).norm();
      if (d < kCollisionThreshold) {
        throw CollisionError("hamiltonian at coincident points", 0.0);
      }
      log_part += std::log(d);
    }
  }
  double radial = 0.0;
  for (const auto& v : q) radial += v.r * v.r;
  return 0.5 * log_part + radial / (4.0 * p.r_star * p.r_star);
}

double angular_momentum(const std::vector<Vec2>& q) {
  double s = 0.0;
  for (const auto& v : q) s += v.norm2();
  return 0.5 * s;
}

InvariantReport momentum_bound_check(const Trajectory& traj,
                                     const RingParams& p) {
  InvariantReport rep;
  rep.name = "angular_momentum_growth";
  rep.times = traj.times;
  rep.values.reserve(traj.size());
  const double i0 = angular_momentum(traj.states.front());
  const double rate = p.gamma / (8.0 * kPi * p.r_star * p.r_star);
  rep.bound_satisfied = true;
  double drift = 0.0;
  for (size_t k = 0; k < traj.size(); ++k) {
    const double it = angular_momentum(traj.states[k]);
    rep.values.push_back(it);
    const double t = traj.times[k] - traj.times.front();
    const double bound = i0 * std::exp(rate * t) * (1.0 + 1e-6);
    if (it > bound) rep.bound_satisfied = false;
    drift = std::max(drift, std::abs(it - i0) / std::max(std::abs(i0), 1e-300));
  }
  rep.drift = drift;
  return rep;
}

double log_sum_separation_bound(const std::vector<Vec2>& q,
                                const RingParams& p) {
  double lhs = 0.0;
  for (size_t i = 0; i < q.size(); ++i) {
    for (size_t j = 0; j < q.size(); ++j) {
      if (i == j) continue;
      const double d = (q[i] - q[j]).norm();
      if (d < 1.0) lhs += std::abs(std::log(d));
    }
  }
  const double n = static_cast<double>(q.size());
  const double i_now = angular_momentum(q);
  const double h0 = hamiltonian(q, p);
  const double rhs = 2.0 * n * std::sqrt(n) * std::sqrt(i_now) - 2.0 * h0 +
                     i_now / (2.0 * p.r_star * p.r_star);
  return rhs - lhs;
}

double com_drift_rate(const std::vector<Vec2>& y, const RingParams& p) {
  if (y.size() != 2) {
    throw InputError("com_drift_rate is defined for exactly two rings");
  }
  const double sl = p.sqrt_log_eps();
  double sum = 0.0;
  for (const auto& v : y) {
    const double denom = 1.0 + v.r / (p.r_star * sl);
    if (!(denom > 0.0)) {
      throw DomainError("com_drift_rate: frame denominator not positive");
    }
    sum += 1.0 / denom;
  }
  return sl * p.gamma / (8.0 * kPi * p.r_star) * (sum - 2.0);
}

double com_drift_rate_taylor(const std::vector<Vec2>& y,
                             const RingParams& p) {
  if (y.size() != 2) {
    throw InputError("com_drift_rate_taylor is defined for exactly two rings");
  }
  const double y2 = y[0].r * y[0].r + y[1].r * y[1].r;
  return p.gamma / (8.0 * kPi) * y2 /
         (p.r_star * p.r_star * p.r_star * p.sqrt_log_eps());
}

bool gronwall_envelope(const Trajectory& y_traj, const Trajectory& z_traj,
                       double kappa,
                       const std::function<double(double)>& g_integral) {
  if (y_traj.size() != z_traj.size()) {
    throw InputError("gronwall_envelope: trajectories must share a time grid");
  }
  for (size_t k = 0; k < y_traj.size(); ++k) {
    if (std::abs(y_traj.times[k] - z_traj.times[k]) > 1e-12) {
      throw InputError("gronwall_envelope: time grids differ");
    }
  }
  if (kappa < 0.0) throw InputError("gronwall_envelope: kappa must be >= 0");

  double gap0 = 0.0;
  for (size_t i = 0; i < y_traj.states.front().size(); ++i) {
    gap0 += (y_traj.states.front()[i] - z_traj.states.front()[i]).norm2();
  }
  gap0 = std::sqrt(gap0);

  const double t0 = y_traj.times.front();
  for (size_t k = 0; k < y_traj.size(); ++k) {
    double gap = 0.0;
    for (size_t i = 0; i < y_traj.states[k].size(); ++i) {
      gap += (y_traj.states[k][i] - z_traj.states[k][i]).norm2();
    }
    gap = std::sqrt(gap);
    const double t = y_traj.times[k] - t0;
    const double envelope = (g_integral(t) + gap0) * std::exp(kappa * t);
    if (gap > envelope + 1e-9) return false;
  }
  return true;
}

double RadialProfile::radius() const {
  return std::sqrt(total_mass / (kPi * density_cap));
}

double RadialProfile::half_width() const {
  return domain_half_width > 0.0 ? domain_half_width : 2.0 * radius();
}

double rearrangement_bound(const RadialProfile& prof) {
  if (!(prof.density_cap > 0.0) || !(prof.total_mass > 0.0)) {
    throw InputError("rearrangement_bound: M and mass must be positive");
  }
  const double R = prof.radius();
  // int_0^R s g(s) ds by midpoint refinement; s g(s) is integrable near 0 by
  // assumption, so the dyadic refinement converges.
  double integral = 0.0;
  const int levels = 24;
  double prev = 0.0;
  for (int lvl = 8; lvl <= levels; ++lvl) {
    const int n = 1 << lvl;
    const double h = R / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double s = (i + 0.5) * h;
      acc += s * prof.g(s);
    }
    integral = acc * h;
    if (lvl > 8 && std::abs(integral - prev) <=
                       1e-12 * std::max(1.0, std::abs(integral))) {
      break;
    }
    prev = integral;
    if (lvl == levels && std::abs(integral - prev) >
                             1e-6 * std::max(1.0, std::abs(integral))) {
      throw EvaluationError("rearrangement_bound quadrature did not settle",
                            std::abs(integral - prev));
    }
  }
  return 2.0 * kPi * prof.density_cap * integral;
}

double rearrangement_cell_size(const RadialProfile& prof, int grid_n) {
  return 2.0 * prof.half_width() / grid_n;
}

namespace {

struct Cell {
  double dist;
  int idx;
  bool operator<(const Cell& o) const {
    return dist != o.dist ? dist < o.dist : idx < o.idx;
  }
};

std::vector<Cell> cells_by_distance(const RadialProfile& prof, int grid_n) {
  const double h = rearrangement_cell_size(prof, grid_n);
  const double half = prof.half_width();
  std::vector<Cell> cells;
  cells.reserve(static_cast<size_t>(grid_n) * grid_n);
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const double cx = -half + (i + 0.5) * h;
      const double cy = -half + (j + 0.5) * h;
      cells.push_back({std::hypot(cx, cy), i * grid_n + j});
    }
  }
  std::sort(cells.begin(), cells.end());
  return cells;
}

}  // namespace

double rearrangement_bruteforce(const RadialProfile& prof, int grid_n) {
  if (grid_n < 32) throw InputError("rearrangement grid must have >= 32 cells");
  const double h = rearrangement_cell_size(prof, grid_n);
  const double cell_area = h * h;
  const double domain_capacity =
      prof.density_cap * cell_area * grid_n * grid_n;
  if (prof.total_mass > domain_capacity) {
    throw InputError("rearrangement mass exceeds the domain capacity");
  }
  const auto cells = cells_by_distance(prof, grid_n);
  double remaining = prof.total_mass;
  double value = 0.0;
  for (const auto& c : cells) {
    if (remaining <= 0.0) break;
    const double take = std::min(remaining, prof.density_cap * cell_area);
    value += prof.g(std::max(c.dist, 1e-300)) * take;
    remaining -= take;
  }
  return value;
}

double rearrangement_profile_value(const RadialProfile& prof, int grid_n,
                                   const std::vector<double>& cell_density) {
  if (cell_density.size() != static_cast<size_t>(grid_n) * grid_n) {
    throw InputError("cell density size must be grid_n^2");
  }
  const double h = rearrangement_cell_size(prof, grid_n);
  const double cell_area = h * h;
  const double half = prof.half_width();
  double value = 0.0;
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const double f = cell_density[static_cast<size_t>(i) * grid_n + j];
      if (f == 0.0) continue;
      const double cx = -half + (i + 0.5) * h;
      const double cy = -half + (j + 0.5) * h;
      value += prof.g(std::max(std::hypot(cx, cy), 1e-300)) * f * cell_area;
    }
  }
  return value;
}

}  // namespace vring
