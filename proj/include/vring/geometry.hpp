#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

// Conventions fixed once for the whole library:
//   coordinate order (z, r), basis e_z = (1,0), e_r = (0,1),
//   perp(a) = (-a_r, a_z).
// Every formula in kernel/, dynamics/ and blob/ is written against these.

namespace vring {

struct Vec2 {
  double z = 0.0;
  double r = 0.0;

  Vec2() = default;
  Vec2(double z_, double r_) : z(z_), r(r_) {}

  Vec2 operator+(const Vec2& o) const { return {z + o.z, r + o.r}; }
  Vec2 operator-(const Vec2& o) const { return {z - o.z, r - o.r}; }
  Vec2 operator*(double a) const { return {z * a, r * a}; }
  Vec2 operator/(double a) const { return {z / a, r / a}; }
  Vec2& operator+=(const Vec2& o) {
    z += o.z;
    r += o.r;
    return *this;
  }
  Vec2& operator-=(const Vec2& o) {
    z -= o.z;
    r -= o.r;
    return *this;
  }
  double norm2() const { return z * z + r * r; }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec2 operator*(double a, const Vec2& v) { return v * a; }
inline double dot(const Vec2& a, const Vec2& b) { return a.z * b.z + a.r * b.r; }

// perp(a) = (-a_r, a_z); perp(e_r) = -e_z, perp(e_z) = e_r.
inline Vec2 perp(const Vec2& a) { return {-a.r, a.z}; }

// A point of the meridian half-plane {r > 0}. Same layout as Vec2; the
// distinct name marks quantities that must stay off the axis.
using HalfPlanePoint = Vec2;

// ---------------------------------------------------------------------------
// Error taxonomy. The C API maps these onto status codes.

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& m) : std::runtime_error(m) {}
};

struct SingularityError : std::runtime_error {
  explicit SingularityError(const std::string& m) : std::runtime_error(m) {}
};

struct EvaluationError : std::runtime_error {
  double achieved_tol;
  EvaluationError(const std::string& m, double tol)
      : std::runtime_error(m), achieved_tol(tol) {}
};

struct CollisionError : std::runtime_error {
  double time;
  explicit CollisionError(const std::string& m, double t)
      : std::runtime_error(m), time(t) {}
};

struct IntegrationError : std::runtime_error {
  double time;
  explicit IntegrationError(const std::string& m, double t)
      : std::runtime_error(m), time(t) {}
};

struct SimulationError : std::runtime_error {
  explicit SimulationError(const std::string& m) : std::runtime_error(m) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct InputError : std::runtime_error {
  explicit InputError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace vring
