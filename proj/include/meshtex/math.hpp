// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace meshtex {

inline constexpr double pi = 3.14159265358979323846;

struct Vec2 {
  double x = 0, y = 0;

  double& operator[](int i) { return (&x)[i]; }
  double operator[](int i) const { return (&x)[i]; }
};

struct Vec3 {
  double x = 0, y = 0, z = 0;

  double& operator[](int i) { return (&x)[i]; }
  double operator[](int i) const { return (&x)[i]; }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
inline Vec2 operator*(double s, Vec2 a) { return a * s; }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double length(Vec2 a) { return std::sqrt(dot(a, a)); }

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
inline Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
inline Vec3 operator*(double s, Vec3 a) { return a * s; }
inline Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
inline Vec3& operator+=(Vec3& a, Vec3 b) { a = a + b; return a; }
inline Vec3& operator-=(Vec3& a, Vec3 b) { a = a - b; return a; }
inline Vec3& operator*=(Vec3& a, double s) { a = a * s; return a; }
inline bool operator==(Vec3 a, Vec3 b) { return a.x == b.x && a.y == b.y && a.z == b.z; }
inline bool operator!=(Vec3 a, Vec3 b) { return !(a == b); }

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length_squared(Vec3 a) { return dot(a, a); }
inline double length(Vec3 a) { return std::sqrt(dot(a, a)); }
inline double distance(Vec3 a, Vec3 b) { return length(a - b); }
inline double distance_squared(Vec3 a, Vec3 b) { return length_squared(a - b); }

inline Vec3 normalize(Vec3 a) {
  auto len = length(a);
  return len > 0 ? a / len : a;
}

inline Vec3 min(Vec3 a, Vec3 b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 max(Vec3 a, Vec3 b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}
inline Vec2 min(Vec2 a, Vec2 b) { return {std::min(a.x, b.x), std::min(a.y, b.y)}; }
inline Vec2 max(Vec2 a, Vec2 b) { return {std::max(a.x, b.x), std::max(a.y, b.y)}; }

inline double clamp(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

inline double radians(double deg) { return deg * pi / 180.0; }
inline double degrees(double rad) { return rad * 180.0 / pi; }

// Axis-aligned bounding box.
struct Box3 {
  Vec3 lo = {+std::numeric_limits<double>::max(), +std::numeric_limits<double>::max(),
             +std::numeric_limits<double>::max()};
  Vec3 hi = {-std::numeric_limits<double>::max(), -std::numeric_limits<double>::max(),
             -std::numeric_limits<double>::max()};

  bool empty() const { return lo.x > hi.x; }
  Vec3 center() const { return (lo + hi) * 0.5; }
  Vec3 extent() const { return hi - lo; }
  double diagonal() const { return empty() ? 0.0 : length(hi - lo); }
};

inline void expand(Box3& box, Vec3 p) {
  box.lo = min(box.lo, p);
  box.hi = max(box.hi, p);
}
inline void expand(Box3& box, const Box3& other) {
  box.lo = min(box.lo, other.lo);
  box.hi = max(box.hi, other.hi);
}
inline bool contains(const Box3& box, Vec3 p) {
  return p.x >= box.lo.x && p.x <= box.hi.x && p.y >= box.lo.y && p.y <= box.hi.y &&
         p.z >= box.lo.z && p.z <= box.hi.z;
}

// Squared distance from a point to a box (0 inside).
inline double distance_squared(const Box3& box, Vec3 p) {
  auto dx = std::max({box.lo.x - p.x, 0.0, p.x - box.hi.x});
  auto dy = std::max({box.lo.y - p.y, 0.0, p.y - box.hi.y});
  auto dz = std::max({box.lo.z - p.z, 0.0, p.z - box.hi.z});
  return dx * dx + dy * dy + dz * dz;
}

// Closest point on triangle (a,b,c) to p. Ericson, Real-Time Collision Detection.
inline Vec3 closest_point_triangle(Vec3 p, Vec3 a, Vec3 b, Vec3 c) {
  auto ab = b - a, ac = c - a, ap = p - a;
  auto d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0 && d2 <= 0) return a;

  auto bp = p - b;
  auto d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0 && d4 <= d3) return b;

  auto vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    auto v = d1 / (d1 - d3);
    return a + v * ab;
  }

  auto cp = p - c;
  auto d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0 && d5 <= d6) return c;

  auto vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    auto w = d2 / (d2 - d6);
    return a + w * ac;
  }

  auto va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    auto w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  auto denom = 1.0 / (va + vb + vc);
  auto v = vb * denom, w = vc * denom;
  return a + v * ab + w * ac;
}

// Barycentric coordinates of p projected onto triangle (a,b,c) in 2D.
inline std::array<double, 3> barycentric_2d(Vec2 p, Vec2 a, Vec2 b, Vec2 c) {
  auto area = cross(b - a, c - a);
  if (area == 0) return {-1, -1, -1};
  auto w0 = cross(b - p, c - p) / area;
  auto w1 = cross(c - p, a - p) / area;
  auto w2 = 1.0 - w0 - w1;
  return {w0, w1, w2};
}

}  // namespace meshtex
