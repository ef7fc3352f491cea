#pragma once

#include <cmath>
#include <vector>

namespace afsi {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double& operator[](int i) { return i == 0 ? x : y; }
  double operator[](int i) const { return i == 0 ? x : y; }

  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
inline Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return a *= s; }
inline Vec2 operator*(Vec2 a, double s) { return a *= s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
/// Rotate by -90 degrees: the right-hand normal of a direction vector.
inline Vec2 right_normal(const Vec2& a) { return {a.y, -a.x}; }

/// Per-node 2D field (displacements, forces, normals, adjoint displacements).
using VecField = std::vector<Vec2>;

/// Flatten [x0, y0, x1, y1, ...].
std::vector<double> flatten(const VecField& f);
VecField unflatten(const std::vector<double>& v);

double dot(const VecField& a, const VecField& b);
double norm(const VecField& a);

}  // namespace afsi
