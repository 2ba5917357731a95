#include <cmath>
#include <vector>

#include "doctest.h"
#include "vring/blob.hpp"

using namespace vring;

namespace {

constexpr double kPi = 3.14159265358979323846;

RingParams one_ring(double eps = 0.05) {
  RingParams p;
  p.gamma = 2.0 * kPi;
  p.epsilon = eps;
  p.r_star = 1.0;
  p.y0 = {{0.0, 0.0}};
  return p;
}

RingParams two_rings(double eps = 0.05) {
  RingParams p = one_ring(eps);
  p.y0 = {{0.0, 0.6}, {0.0, -0.6}};
  return p;
}

}  // namespace

TEST_CASE("init_blob: circulation, support, center of vorticity") {
  RingParams p = one_ring();
  const HalfPlanePoint center{0.0, 1.0};
  const auto blob =
      init_blob(BlobProfile::uniform_patch, center, p, 300, 0, 8.0 * p.gamma);

  double total = 0.0;
  for (const auto& q : blob) {
    total += q.weight;
    CHECK((q.pos - center).norm() <= p.epsilon * (1.0 + 1e-12));
  }
  CHECK(total == doctest::Approx(p.gamma).epsilon(1e-12));

  // radial weighting pushes the center of vorticity to b_r = r0 + eps^2/(4 r0)
  // (closed-form first moment of x_r over the disc)
  Vec2 b{0.0, 0.0};
  for (const auto& q : blob) b += q.pos * q.weight;
  b = b / p.gamma;
  CHECK(b.z == doctest::Approx(0.0).epsilon(1e-12));
  const double predicted = center.r + p.epsilon * p.epsilon / (4.0 * center.r);
  CHECK(std::abs(b.r - predicted) < 0.2 * (predicted - center.r));

  // density-cap violation: cap far below gamma/(pi eps^2 r)
  CHECK_THROWS_AS(
      init_blob(BlobProfile::uniform_patch, center, p, 300, 0, 1e-3),
      ConfigError);
  CHECK_THROWS_AS(
      init_blob(BlobProfile::uniform_patch, center, p, 8, 0, 8.0 * p.gamma),
      ConfigError);
  CHECK_THROWS_AS(init_blob(BlobProfile::uniform_patch, {0.0, 0.01}, p, 300, 0,
                            8.0 * p.gamma),
                  ConfigError);
}

TEST_CASE("init_blob_state: gaussian profile also normalizes exactly") {
  RingParams p = two_rings();
  const auto st = init_blob_state(BlobProfile::truncated_gaussian, p, 200,
                                  0.5 * p.epsilon, 8.0 * p.gamma);
  CHECK(st.blob_count() == 2);
  CHECK(st.blob_circulation(0) == doctest::Approx(p.gamma).epsilon(1e-12));
  CHECK(st.blob_circulation(1) == doctest::Approx(p.gamma).epsilon(1e-12));
}

TEST_CASE("exterior field: empty for one blob, additive for two") {
  RingParams p2 = two_rings();
  const auto st2 = init_blob_state(BlobProfile::uniform_patch, p2, 100,
                                   0.5 * p2.epsilon, 8.0 * p2.gamma);
  const HalfPlanePoint x{0.1, 1.2};
  const Vec2 f1 = exterior_field(st2, 0, x);

  RingParams p1 = one_ring();
  const auto st1 = init_blob_state(BlobProfile::uniform_patch, p1, 100,
                                   0.5 * p1.epsilon, 8.0 * p1.gamma);
  CHECK(exterior_field(st1, 0, x).norm() == 0.0);

  // field of blob 1 on its own plus the exterior field of blob 0 equals the
  // full velocity
  std::vector<VortexParticle> own;
  for (const auto& q : st2.particles) {
    if (q.blob_id == 0) own.push_back(q);
  }
  const Vec2 u_own = velocity_from_stream(own, x, st2.kernel_config());
  const Vec2 u_all =
      velocity_from_stream(st2.particles, x, st2.kernel_config());
  CHECK((u_own + f1 - u_all).norm() <= 1e-12 * std::max(1.0, u_all.norm()));
}

TEST_CASE("step: circulation bit-exact, weights immutable, axis guard") {
  RingParams p = two_rings();
  auto st = init_blob_state(BlobProfile::uniform_patch, p, 80,
                            0.5 * p.epsilon, 8.0 * p.gamma);
  const double c0 = st.blob_circulation(0);
  const double c1 = st.blob_circulation(1);
  const auto w0 = st.particles;

  for (int k = 0; k < 20; ++k) st = step(st, 1e-3);
  CHECK(st.blob_circulation(0) == c0);  // bit-for-bit
  CHECK(st.blob_circulation(1) == c1);
  for (size_t i = 0; i < w0.size(); ++i) {
    CHECK(st.particles[i].weight == w0[i].weight);
    CHECK(st.particles[i].blob_id == w0[i].blob_id);
  }
  CHECK(st.time == doctest::Approx(20e-3));
}

TEST_CASE("step: velocity equals the stream velocity over all particles") {
  RingParams p = two_rings();
  auto st = init_blob_state(BlobProfile::uniform_patch, p, 60,
                            0.5 * p.epsilon, 8.0 * p.gamma);
  std::vector<Vec2> v(st.particles.size());
  velocities_at_particles(st.particles, st.kernel_config(), v);
  double scale = 0.0;
  for (const auto& u : v) scale = std::max(scale, u.norm());
  for (size_t i = 0; i < st.particles.size(); i += 7) {
    const Vec2 u =
        velocity_from_stream(st.particles, st.particles[i].pos,
                             st.kernel_config());
    CHECK((v[i] - u).norm() <= 1e-12 * std::max(1.0, scale));
  }
}

TEST_CASE("single particle moves only axially") {
  RingParams p = one_ring();
  BlobState st;
  st.params = p;
  st.delta = 0.5 * p.epsilon;
  st.particles = {{{0.0, 1.0}, p.gamma, 0}};
  std::vector<Vec2> v(1);
  velocities_at_particles(st.particles, st.kernel_config(), v);
  CHECK(v[0].r == 0.0);
  CHECK(v[0].z != 0.0);  // u_L + u_R self-contribution
}

TEST_CASE("step: second-order Richardson ratio on a two-blob run") {
  RingParams p = two_rings();
  const auto st0 = init_blob_state(BlobProfile::uniform_patch, p, 60,
                                   0.5 * p.epsilon, 8.0 * p.gamma);
  const double T = 8e-3;
  auto run = [&](double dt) {
    auto st = st0;
    const int n = static_cast<int>(std::round(T / dt));
    for (int k = 0; k < n; ++k) st = step(st, dt);
    return st;
  };
  const auto coarse = run(2e-3);
  const auto half = run(1e-3);
  const auto ref = run(1.25e-4);
  double e_coarse = 0.0, e_half = 0.0;
  for (size_t i = 0; i < st0.particles.size(); ++i) {
    e_coarse = std::max(e_coarse,
                        (coarse.particles[i].pos - ref.particles[i].pos).norm());
    e_half = std::max(e_half,
                      (half.particles[i].pos - ref.particles[i].pos).norm());
  }
  const double ratio = e_coarse / e_half;
  CHECK(ratio > 2.5);
  CHECK(ratio < 6.5);
}

TEST_CASE("center of vorticity: weighted mean and equivariance") {
  BlobState st;
  st.params = one_ring();
  st.delta = 1e-3;
  st.particles = {{{0.0, 1.0}, 0.5, 0}, {{0.0, 3.0}, 0.5, 0}};
  const auto b = center_of_vorticity(st, 0);
  CHECK(b.z == 0.0);
  CHECK(b.r == doctest::Approx(2.0));

  BlobState single = st;
  single.particles = {{{0.7, 1.3}, 2.0, 0}};
  const auto bs = center_of_vorticity(single, 0);
  CHECK(bs.z == 0.7);
  CHECK(bs.r == 1.3);

  BlobState shifted = st;
  for (auto& q : shifted.particles) q.pos += Vec2{0.25, 0.5};
  const auto b2 = center_of_vorticity(shifted, 0);
  CHECK(b2.z == doctest::Approx(b.z + 0.25).epsilon(1e-15));
  CHECK(b2.r == doctest::Approx(b.r + 0.5).epsilon(1e-15));
}

TEST_CASE("blob energy: bilinearity, relabeling, initial expansion") {
  RingParams p = one_ring(1e-3);
  auto st = init_blob_state(BlobProfile::uniform_patch, p, 150,
                            0.5 * p.epsilon, 8.0 * p.gamma);
  const double e1 = blob_energy(st, 0);

  // doubling all weights quadruples E
  BlobState doubled = st;
  for (auto& q : doubled.particles) q.weight *= 2.0;
  CHECK(blob_energy(doubled, 0) == doctest::Approx(4.0 * e1).epsilon(1e-12));

  // invariant under relabeling
  BlobState shuffled = st;
  std::swap(shuffled.particles.front(), shuffled.particles.back());
  CHECK(blob_energy(shuffled, 0) == doctest::Approx(e1).epsilon(1e-12));

  // E(0) = (gamma^2/2pi) |ln eps| b_r (1 + O(1/|ln eps|))
  const double b_r = center_of_vorticity(st, 0).r;
  const double leading =
      p.gamma * p.gamma / (2.0 * kPi) * p.log_eps() * b_r;
  CHECK(e1 / leading > 0.8);
  CHECK(e1 / leading < 1.2);
}

TEST_CASE("mass in ball") {
  RingParams p = one_ring();
  auto st = init_blob_state(BlobProfile::uniform_patch, p, 120,
                            0.5 * p.epsilon, 8.0 * p.gamma);
  const auto b = center_of_vorticity(st, 0);
  CHECK(mass_in_ball(st, 0, b, 10.0 * p.epsilon) == doctest::Approx(1.0));
  CHECK(mass_in_ball(st, 0, {b.z + 5.0, b.r}, 1e-6) == 0.0);
  const auto c0 = initial_centers(p)[0];
  CHECK(mass_in_ball(st, 0, c0, p.epsilon * (1.0 + 1e-9)) ==
        doctest::Approx(1.0));
}

TEST_CASE("tail masses: monotonicity and sandwich") {
  RingParams p = one_ring();
  auto st = init_blob_state(BlobProfile::uniform_patch, p, 150,
                            0.5 * p.epsilon, 8.0 * p.gamma);
  for (int k = 0; k < 5; ++k) st = step(st, 5e-4);
  const double r0 = initial_centers(p)[0].r;

  CHECK(tail_mass(st, 0, 10.0, TailDirection::radial, r0) == 0.0);
  CHECK(tail_mass(st, 0, 0.0, TailDirection::radial, r0) ==
        doctest::Approx(p.gamma).epsilon(1e-12));

  double prev = p.gamma + 1.0;
  for (double R : {0.0, 0.2 * p.epsilon, 0.5 * p.epsilon, p.epsilon, 2.0}) {
    const double m = tail_mass(st, 0, R, TailDirection::radial, r0);
    CHECK(m <= prev + 1e-15);
    prev = m;
  }

  // mu(R,eta) <= m(R) <= mu(R-eta,eta), and mu -> m as eta -> 0
  for (double R : {0.3 * p.epsilon, 0.8 * p.epsilon}) {
    for (double eta : {0.25 * R, 0.1 * R}) {
      const double mu_lo =
          smoothed_tail_mass(st, 0, R, eta, TailDirection::radial, r0);
      const double m = tail_mass(st, 0, R, TailDirection::radial, r0);
      const double mu_hi =
          smoothed_tail_mass(st, 0, R - eta, eta, TailDirection::radial, r0);
      CHECK(mu_lo <= m + 1e-12);
      CHECK(m <= mu_hi + 1e-12);
    }
    const double m = tail_mass(st, 0, R, TailDirection::radial, r0);
    const double mu_small =
        smoothed_tail_mass(st, 0, R, 1e-9, TailDirection::radial, r0);
    CHECK(mu_small == doctest::Approx(m).epsilon(1e-9));
  }
}

TEST_CASE("support extents") {
  RingParams p = one_ring();
  auto st = init_blob_state(BlobProfile::uniform_patch, p, 120,
                            0.5 * p.epsilon, 8.0 * p.gamma);
  const auto e = support_extents(st, 0);
  CHECK(e.R_t <= p.epsilon * (1.0 + 1e-12));
  CHECK(e.Z_t <= p.epsilon * (1.0 + 1e-12));

  BlobState single;
  single.params = p;
  single.delta = 1e-3;
  single.particles = {{{0.3, 1.4}, 1.0, 0}};
  const auto es = support_extents(single, 0);
  CHECK(es.R_t == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(es.Z_t == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("mirror symmetry is preserved by the step") {
  // two blobs mirrored in z about z* stay mirrored to O(dt^2) per step
  RingParams p = two_rings();
  BlobState st;
  st.params = p;
  st.delta = 0.5 * p.epsilon;
  // build an explicitly mirror-symmetric pair of blobs about z* = 0:
  // blob 1 is the z-reflection of blob 0 at the same radius
  const auto centers = initial_centers(p);
  const auto proto = init_blob(BlobProfile::uniform_patch,
                               {0.3, centers[0].r}, p, 80, 0, 8.0 * p.gamma);
  for (const auto& q : proto) st.particles.push_back(q);
  for (const auto& q : proto) {
    st.particles.push_back({{-q.pos.z, q.pos.r}, q.weight, 1});
  }
  const size_t n = proto.size();
  auto advanced = st;
  for (int k = 0; k < 10; ++k) advanced = step(advanced, 1e-3);
  double asym = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const auto& a = advanced.particles[i];
    const auto& bq = advanced.particles[n + i];
    asym = std::max(asym, std::abs(a.pos.z + bq.pos.z));
    asym = std::max(asym, std::abs(a.pos.r - bq.pos.r));
  }
  CHECK(asym < 1e-10);
}

TEST_CASE("motion law residuals: symmetric exterior fields") {
  RingParams p = two_rings();
  auto st = init_blob_state(BlobProfile::uniform_patch, p, 70,
                            0.5 * p.epsilon, 8.0 * p.gamma);
  std::vector<BlobState> history = {st};
  for (int k = 0; k < 4; ++k) {
    st = step(st, 1e-3);
    history.push_back(st);
  }
  const auto rows = motion_law_residuals(history);
  CHECK(rows.size() == (history.size() - 2) * 2);
  // the exterior field sites see each other almost as point vortices at this
  // separation; the residual stays below the ln|ln eps| scale
  for (const auto& r : rows) {
    CHECK(r.point_interaction_residual < 2.0 * std::log(p.log_eps()) + 0.5);
  }
  CHECK_THROWS_AS(
      motion_law_residuals(std::span<const BlobState>(history.data(), 2)),
      InputError);
}

TEST_CASE("cfl_dt: bounded by 1e-3 and by the smoothing length") {
  RingParams p = two_rings();
  auto st = init_blob_state(BlobProfile::uniform_patch, p, 60,
                            0.5 * p.epsilon, 8.0 * p.gamma);
  const double dt = cfl_dt(st);
  CHECK(dt <= 1e-3);
  CHECK(dt > 0.0);
  CHECK(dt <= 0.25 * st.delta * p.log_eps() / st.last_max_speed + 1e-18);
}
