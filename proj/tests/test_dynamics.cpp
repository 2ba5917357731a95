#include <cmath>
#include <vector>

#include "doctest.h"
#include "vring/dynamics.hpp"

using namespace vring;

namespace {

constexpr double kPi = 3.14159265358979323846;

RingParams caption_params() {
  // the two-ring configuration of the numerical experiment
  RingParams p;
  p.gamma = 2.0 * kPi;
  p.epsilon = 0.01;
  p.z_star = 0.0;
  p.r_star = 1.0;
  p.y0 = {{0.0, 1.2}, {0.0, -1.2}};
  return p;
}

}  // namespace

TEST_CASE("params: hypothesis checks") {
  RingParams p = caption_params();
  CHECK_NOTHROW(p.validate());
  CHECK(p.d0() == doctest::Approx(0.6));

  p.y0 = {{0.0, 1.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = caption_params();
  p.epsilon = 1.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = caption_params();
  p.epsilon = 0.9;  // |ln eps| < 1
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = caption_params();
  p.gamma = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("xsystem_rhs: hand-derived values") {
  RingParams p;
  p.gamma = 4.0 * kPi;
  p.epsilon = 0.01;
  p.y0 = {{0.0, 0.0}};
  // N=1: empty interaction, gamma/(4 pi X_r) = 1
  const auto rhs1 = xsystem_rhs({{0.0, 1.0}}, p);
  CHECK(rhs1[0].z == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rhs1[0].r == 0.0);

  // N=2, gamma=2pi, |ln eps| = 4: interaction magnitude 1/4, self terms
  // 1/3 and 1
  RingParams q;
  q.gamma = 2.0 * kPi;
  q.epsilon = std::exp(-4.0);
  q.y0 = {{0.0, 1.5}, {0.0, 0.5}};
  const auto rhs = xsystem_rhs({{0.0, 1.5}, {0.0, 0.5}}, q);
  CHECK(rhs[0].z == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
  CHECK(rhs[0].r == doctest::Approx(0.0));
  CHECK(rhs[1].z == doctest::Approx(5.0 / 4.0).epsilon(1e-14));
  CHECK(rhs[1].r == doctest::Approx(0.0));
  // radial parts of the pair cancel
  CHECK(rhs[0].r + rhs[1].r == 0.0);
}

TEST_CASE("yeps_rhs: hand-derived values and frame consistency") {
  RingParams p;
  p.gamma = 2.0 * kPi;
  p.epsilon = std::exp(-4.0);  // sqrt|ln eps| = 2
  p.r_star = 1.0;
  p.y0 = {{0.0, 1.0}, {0.0, -1.0}};

  SUBCASE("single ring at the frame origin is at rest") {
    RingParams q = p;
    q.y0 = {{0.0, 0.0}};
    const auto rhs = yeps_rhs({{0.0, 0.0}}, q);
    CHECK(rhs[0].z == 0.0);
    CHECK(rhs[0].r == 0.0);
  }

  SUBCASE("two-ring values from the moving-frame law") {
    const auto rhs = yeps_rhs(p.y0, p);
    // interaction: (-1/2, 0) and (1/2, 0)
    // vertical: 2 * (1/2) * (1/(1+1/2) - 1) = -1/3 and 2*(1/2)*(1/(1-1/2)-1) = 1
    CHECK(rhs[0].z == doctest::Approx(-0.5 - 1.0 / 3.0).epsilon(1e-14));
    CHECK(rhs[0].r == doctest::Approx(0.0));
    CHECK(rhs[1].z == doctest::Approx(0.5 + 1.0).epsilon(1e-14));
    CHECK(rhs[1].r == doctest::Approx(0.0));
  }

  SUBCASE("frame map chain rule") {
    // dX of the X system equals the mapped dY plus the uniform translation
    const double t = 0.7;
    const auto y = std::vector<Vec2>{{0.2, 0.9}, {-0.1, -1.1}};
    const auto x = yframe_to_x(y, t, p);
    const auto dx = xsystem_rhs(x, p);
    const auto dy = yeps_rhs(y, p);
    const double sl = p.sqrt_log_eps();
    const double drift = p.gamma / (4.0 * kPi * p.r_star);
    for (size_t i = 0; i < y.size(); ++i) {
      CHECK(dx[i].z ==
            doctest::Approx(drift + dy[i].z / sl).epsilon(1e-12));
      CHECK(dx[i].r == doctest::Approx(dy[i].r / sl).epsilon(1e-12));
    }
  }
}

TEST_CASE("limit_rhs: hand-derived values and conservation structure") {
  RingParams p = caption_params();
  const std::vector<Vec2> y = {{0.0, 1.0}, {0.0, -1.0}};
  const auto rhs = limit_rhs(y, p);
  // interaction (-1/2, 0); deceleration -(1/2) Y_r e_z
  CHECK(rhs[0].z == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(rhs[0].r == doctest::Approx(0.0));
  CHECK(rhs[1].z == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rhs[1].r == doctest::Approx(0.0));

  // radial components sum to zero for any configuration
  const std::vector<Vec2> q = {{0.3, 1.4}, {-0.2, 0.3}, {0.1, -0.8}};
  const auto rq = limit_rhs(q, p);
  double rsum = 0.0;
  for (const auto& v : rq) rsum += v.r;
  CHECK(std::abs(rsum) < 1e-15);

  // with Y_1r + Y_2r = 0 the full rhs sums to zero
  const auto rs = limit_rhs({{0.4, 0.7}, {-0.9, -0.7}}, p);
  CHECK(std::abs(rs[0].z + rs[1].z) < 1e-15);
  CHECK(std::abs(rs[0].r + rs[1].r) < 1e-15);
}

TEST_CASE("marchioro_rhs: constant vertical self-term") {
  RingParams p;
  p.gamma = 4.0 * kPi;
  p.epsilon = 0.01;
  p.r_star = 1.0;
  p.y0 = {{0.0, 0.0}};
  const auto rhs1 = marchioro_rhs({{0.0, 5.0}}, p);
  CHECK(rhs1[0].z == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rhs1[0].r == 0.0);

  // same symmetric data as the limit system, gamma = 2pi: vertical parts are
  // +1/2 for both rings instead of -+1/2
  RingParams q = caption_params();
  const auto rhs = marchioro_rhs({{0.0, 1.0}, {0.0, -1.0}}, q);
  CHECK(rhs[0].z == doctest::Approx(-0.5 + 0.5).epsilon(1e-14));
  CHECK(rhs[1].z == doctest::Approx(0.5 + 0.5).epsilon(1e-14));

  // equal circulations: identical self-term regardless of radius
  const auto ra = marchioro_rhs({{0.0, 2.0}, {0.0, -7.0}}, q);
  (void)ra;  // the term is state-independent by the formula; spot-check:
  const auto r1 = marchioro_rhs({{0.0, 0.2}, {0.0, -0.1}}, q);
  const auto r2 = marchioro_rhs({{0.0, 9.0}, {0.0, -12.0}}, q);
  const double self1 = r1[0].z - (q.gamma / (2.0 * kPi)) *
                                     perp(Vec2{0.0, 0.3})
                                         .z /
                                     Vec2{0.0, 0.3}.norm2();
  const double self2 = r2[0].z - (q.gamma / (2.0 * kPi)) *
                                     perp(Vec2{0.0, 21.0})
                                         .z /
                                     Vec2{0.0, 21.0}.norm2();
  CHECK(self1 == doctest::Approx(self2).epsilon(1e-12));
}

TEST_CASE("frame maps: round trip and uniform drift") {
  RingParams p = caption_params();
  const std::vector<Vec2> y = {{0.11, 0.95}, {-0.2, -1.15}};
  const double t = 1.3;
  const auto x = yframe_to_x(y, t, p);
  const auto y2 = x_to_yframe(x, t, p);
  for (size_t i = 0; i < y.size(); ++i) {
    CHECK(std::abs(y[i].z - y2[i].z) < 1e-14);
    CHECK(std::abs(y[i].r - y2[i].r) < 1e-14);
  }

  // t=0 recovers the distance regime
  const auto x0 = yframe_to_x(p.y0, 0.0, p);
  const double sl = p.sqrt_log_eps();
  CHECK(x0[0].z == doctest::Approx(p.z_star + p.y0[0].z / sl));
  CHECK(x0[0].r == doctest::Approx(p.r_star + p.y0[0].r / sl));

  // gamma = 2pi, r* = 1, t = 1, Y = 0: X = X* + (1/2, 0)
  RingParams q = caption_params();
  const auto xt = yframe_to_x({{0.0, 0.0}}, 1.0, q);
  CHECK(xt[0].z == doctest::Approx(q.z_star + 0.5).epsilon(1e-14));
  CHECK(xt[0].r == doctest::Approx(q.r_star).epsilon(1e-14));

  // mapping below the axis is refused
  RingParams s = caption_params();
  CHECK_THROWS_AS(yframe_to_x({{0.0, -10.0}}, 0.0, s), DomainError);
}

TEST_CASE("centered_positions") {
  const std::vector<Vec2> a = {{0.0, 1.2}, {0.0, -1.2}};
  const auto ca = centered_positions(a);
  CHECK(ca[0].z == 0.0);
  CHECK(ca[0].r == 1.2);
  const std::vector<Vec2> b = {{1.0, 1.0}, {1.0, -1.0}};
  const auto cb = centered_positions(b);
  CHECK(cb[0].z == 0.0);
  CHECK(cb[0].r == 1.0);
  CHECK(cb[1].z == 0.0);
  CHECK(cb[1].r == -1.0);
  // N=2: centered points are opposite
  const std::vector<Vec2> c = {{0.3, 0.8}, {-0.5, 0.1}};
  const auto cc = centered_positions(c);
  CHECK(cc[0].z == doctest::Approx(-cc[1].z));
  CHECK(cc[0].r == doctest::Approx(-cc[1].r));
}

TEST_CASE("integrate: exact translation for a single ring") {
  RingParams p;
  p.gamma = 4.0 * kPi;
  p.epsilon = 0.01;
  p.y0 = {{0.0, 0.0}};
  const std::vector<Vec2> x0 = {{0.0, 1.0}};
  const auto traj = integrate(SystemKind::XEps, x0, {0.0, 1.0}, 1e-3, p);
  const auto& last = traj.back();
  CHECK(std::abs(last[0].z - 1.0) < 1e-12);
  CHECK(std::abs(last[0].r - 1.0) < 1e-12);
}

TEST_CASE("integrate: fourth-order step-halving on the two-ring orbit") {
  RingParams p = caption_params();
  const double T = 2.0;
  const auto coarse =
      integrate(SystemKind::LimitTilde, p.y0, {0.0, T}, 4e-3, p);
  const auto half = integrate(SystemKind::LimitTilde, p.y0, {0.0, T}, 2e-3, p);
  const auto ref = integrate(SystemKind::LimitTilde, p.y0, {0.0, T}, 2.5e-4, p);
  const auto err = [&](const Trajectory& t) {
    double e = 0.0;
    for (size_t i = 0; i < t.back().size(); ++i) {
      e = std::max(e, (t.back()[i] - ref.back()[i]).norm());
    }
    return e;
  };
  const double ratio = err(coarse) / err(half);
  CHECK(ratio > 8.0);
  CHECK(ratio < 32.0);
}

TEST_CASE("integrate: time reversal returns to the start") {
  RingParams p = caption_params();
  const auto fwd = integrate(SystemKind::YEps, p.y0, {0.0, 1.0}, 1e-3, p);
  // integrate the reversed field by flipping gamma (the rhs is linear in it)
  RingParams back = p;
  back.gamma = -p.gamma;
  const auto bwd = integrate(SystemKind::YEps, fwd.back(), {0.0, 1.0}, 1e-3, back);
  for (size_t i = 0; i < p.y0.size(); ++i) {
    CHECK((bwd.back()[i] - p.y0[i]).norm() < 1e-9);
  }
}

TEST_CASE("integrate: collision detection is deterministic") {
  RingParams p;
  p.gamma = 2.0 * kPi;
  p.epsilon = 0.01;
  p.y0 = {{0.0, 1e-11}, {0.0, -1e-11}};
  // initial points already below the collision threshold
  CHECK_THROWS_AS(
      integrate(SystemKind::LimitTilde, p.y0, {0.0, 1.0}, 1e-3, p),
      CollisionError);
}

TEST_CASE("YEps converges to the limit system as eps -> 0") {
  RingParams base = caption_params();
  double prev_err = std::numeric_limits<double>::infinity();
  std::vector<double> errs;
  for (double eps : {1e-2, 1e-4, 1e-8}) {
    RingParams p = base;
    p.epsilon = eps;
    const auto a = integrate(SystemKind::YEps, p.y0, {0.0, 1.0}, 1e-3, p);
    const auto b = integrate(SystemKind::LimitTilde, p.y0, {0.0, 1.0}, 1e-3, p);
    double err = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
      for (size_t i = 0; i < a.states[k].size(); ++i) {
        err = std::max(err, (a.states[k][i] - b.states[k][i]).norm());
      }
    }
    CHECK(err < prev_err);
    prev_err = err;
    errs.push_back(err);
  }
  // rate consistent with C/sqrt(|ln eps|): the ratio across eps = 1e-2 and
  // 1e-8 is sqrt(ln 1e-8 / ln 1e-2) = 2 within a factor of 2
  const double ratio = errs.front() / errs.back();
  CHECK(ratio > 1.0);
  CHECK(ratio < 4.0);
}
