// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "meshtex/error.hpp"
#include "meshtex/math.hpp"
#include "meshtex/mesh.hpp"

namespace meshtex {

struct Ray {
  Vec3 origin = {};
  Vec3 direction = {0, 0, 1};
  double t_min = 0;
  double t_max = std::numeric_limits<double>::infinity();
};

struct RayHit {
  int face = -1;
  double t = 0;
  double u = 0, v = 0, w = 0;  // barycentric weights of the hit triangle
  Vec3 point = {};
};

// Shear frame for watertight ray/triangle tests: the ray maps to +z and every
// triangle for one ray is sheared by the same constants, so shared edges
// cannot open cracks. Edge-function signs are accepted inclusively.
struct RayFrame {
  int kx = 0, ky = 1, kz = 2;
  double sx = 0, sy = 0, sz = 0;
};

inline RayFrame make_ray_frame(const Vec3& direction) {
  auto frame = RayFrame{};
  auto ax = std::abs(direction.x), ay = std::abs(direction.y), az = std::abs(direction.z);
  frame.kz = ax > ay ? (ax > az ? 0 : 2) : (ay > az ? 1 : 2);
  frame.kx = (frame.kz + 1) % 3;
  frame.ky = (frame.kx + 1) % 3;
  if (direction[frame.kz] < 0) std::swap(frame.kx, frame.ky);
  frame.sx = direction[frame.kx] / direction[frame.kz];
  frame.sy = direction[frame.ky] / direction[frame.kz];
  frame.sz = 1.0 / direction[frame.kz];
  return frame;
}

inline std::optional<RayHit> intersect_triangle(const RayFrame& frame, const Ray& ray,
                                                const Vec3& va, const Vec3& vb, const Vec3& vc) {
  auto a = va - ray.origin;
  auto b = vb - ray.origin;
  auto c = vc - ray.origin;
  auto ax = a[frame.kx] - frame.sx * a[frame.kz];
  auto ay = a[frame.ky] - frame.sy * a[frame.kz];
  auto bx = b[frame.kx] - frame.sx * b[frame.kz];
  auto by = b[frame.ky] - frame.sy * b[frame.kz];
  auto cx = c[frame.kx] - frame.sx * c[frame.kz];
  auto cy = c[frame.ky] - frame.sy * c[frame.kz];

  auto u = cx * by - cy * bx;
  auto v = ax * cy - ay * cx;
  auto w = bx * ay - by * ax;
  if ((u < 0 || v < 0 || w < 0) && (u > 0 || v > 0 || w > 0)) return std::nullopt;

  auto det = u + v + w;
  if (det == 0) return std::nullopt;

  auto az = frame.sz * a[frame.kz];
  auto bz = frame.sz * b[frame.kz];
  auto cz = frame.sz * c[frame.kz];
  auto t = (u * az + v * bz + w * cz) / det;
  if (!(t >= ray.t_min && t <= ray.t_max)) return std::nullopt;

  auto hit = RayHit{};
  hit.t = t;
  hit.u = u / det;
  hit.v = v / det;
  hit.w = w / det;
  hit.point = ray.origin + ray.direction * t;
  return hit;
}

struct BvhNode {
  Box3 box = {};
  int left = -1;    // internal: child node indices
  int right = -1;
  int start = 0;    // leaf: range into Bvh::face_order
  int count = 0;    // 0 for internal nodes
};

/// Median-split BVH over mesh faces. Build order is deterministic: faces are
/// sorted by centroid along the longest node axis with the face index as
/// tie-break, and split at the midpoint. Leaves hold at most 8 faces.
struct Bvh {
  std::vector<BvhNode> nodes;
  std::vector<int> face_order;

  static constexpr int leaf_size = 8;
};

namespace detail {

// Padding absorbs slab-test rounding so traversal never culls a true hit;
// queries stay conservative and results stay identical to brute force.
inline Box3 padded(const Box3& box) {
  auto m = 0.0;
  for (auto axis = 0; axis < 3; axis++) {
    m = std::max({m, std::abs(box.lo[axis]), std::abs(box.hi[axis])});
  }
  auto pad = 1e-12 * (1.0 + m);
  return {box.lo - Vec3{pad, pad, pad}, box.hi + Vec3{pad, pad, pad}};
}

inline int build_bvh_node(Bvh& bvh, const TriMesh& mesh, std::vector<Vec3>& centroids, int start,
                          int count) {
  auto node = BvhNode{};
  for (auto i = start; i < start + count; i++) {
    auto& f = mesh.faces[bvh.face_order[i]];
    for (auto c = 0; c < 3; c++) expand(node.box, mesh.vertices[f[c]]);
  }
  node.box = padded(node.box);
  auto index = int(bvh.nodes.size());
  bvh.nodes.push_back(node);

  if (count <= Bvh::leaf_size) {
    bvh.nodes[index].start = start;
    bvh.nodes[index].count = count;
    return index;
  }

  auto extent = node.box.extent();
  auto axis = extent.x >= extent.y ? (extent.x >= extent.z ? 0 : 2)
                                   : (extent.y >= extent.z ? 1 : 2);
  auto begin = bvh.face_order.begin() + start;
  std::sort(begin, begin + count, [&](int fa, int fb) {
    auto ca = centroids[fa][axis], cb = centroids[fb][axis];
    return ca != cb ? ca < cb : fa < fb;
  });
  auto half = count / 2;
  auto left = build_bvh_node(bvh, mesh, centroids, start, half);
  auto right = build_bvh_node(bvh, mesh, centroids, start + half, count - half);
  bvh.nodes[index].left = left;
  bvh.nodes[index].right = right;
  return index;
}

// Slab test over [t_min, t_max]; boundary-inclusive. Zero direction
// components are handled by explicit containment so no NaNs arise.
inline bool hit_box(const Box3& box, const Ray& ray, const Vec3& inv_dir, double t_max) {
  auto t0 = ray.t_min;
  auto t1 = t_max;
  for (auto axis = 0; axis < 3; axis++) {
    if (ray.direction[axis] == 0) {
      if (ray.origin[axis] < box.lo[axis] || ray.origin[axis] > box.hi[axis]) return false;
      continue;
    }
    auto near = (box.lo[axis] - ray.origin[axis]) * inv_dir[axis];
    auto far = (box.hi[axis] - ray.origin[axis]) * inv_dir[axis];
    if (near > far) std::swap(near, far);
    t0 = std::max(t0, near);
    t1 = std::min(t1, far);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace detail

inline Bvh build_bvh(const TriMesh& mesh) {
  check(!mesh.faces.empty(), errc::empty_mesh, "cannot build bvh over empty mesh");
  auto bvh = Bvh{};
  bvh.face_order.resize(mesh.faces.size());
  for (auto i = 0; i < mesh.face_count(); i++) bvh.face_order[i] = i;
  auto centroids = std::vector<Vec3>(mesh.faces.size());
  for (auto i = 0; i < mesh.face_count(); i++) centroids[i] = face_centroid(mesh, i);
  detail::build_bvh_node(bvh, mesh, centroids, 0, int(mesh.faces.size()));
  return bvh;
}

/// First hit along the ray. Ties in t resolve to the lowest face index, which
/// makes the result identical to a brute-force scan over all faces.
inline std::optional<RayHit> ray_intersect(const Bvh& bvh, const TriMesh& mesh, const Ray& ray) {
  auto frame = make_ray_frame(ray.direction);
  auto inv_dir = Vec3{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
  auto best = std::optional<RayHit>{};
  int stack[64];
  auto top = 0;
  stack[top++] = 0;
  while (top > 0) {
    auto& node = bvh.nodes[stack[--top]];
    auto limit = best ? best->t : ray.t_max;
    if (!detail::hit_box(node.box, ray, inv_dir, limit)) continue;
    if (node.count > 0) {
      for (auto i = node.start; i < node.start + node.count; i++) {
        auto face = bvh.face_order[i];
        auto& f = mesh.faces[face];
        auto hit = intersect_triangle(frame, ray, mesh.vertices[f[0]], mesh.vertices[f[1]],
                                      mesh.vertices[f[2]]);
        if (!hit) continue;
        hit->face = face;
        if (!best || hit->t < best->t || (hit->t == best->t && face < best->face)) {
          best = hit;
        }
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

struct NearestPoint {
  int face = -1;
  Vec3 point = {};
  double distance_squared = std::numeric_limits<double>::infinity();
};

/// Closest point on the mesh surface. Nodes prune only when strictly farther
/// than the current best, and ties resolve to the lowest face index, so the
/// result is identical to brute force.
inline NearestPoint nearest_point(const Bvh& bvh, const TriMesh& mesh, const Vec3& query) {
  auto best = NearestPoint{};
  int stack[64];
  auto top = 0;
  stack[top++] = 0;
  while (top > 0) {
    auto& node = bvh.nodes[stack[--top]];
    if (distance_squared(node.box, query) > best.distance_squared) continue;
    if (node.count > 0) {
      for (auto i = node.start; i < node.start + node.count; i++) {
        auto face = bvh.face_order[i];
        auto& f = mesh.faces[face];
        auto point = closest_point_triangle(query, mesh.vertices[f[0]], mesh.vertices[f[1]],
                                            mesh.vertices[f[2]]);
        auto d2 = distance_squared(point, query);
        if (d2 < best.distance_squared ||
            (d2 == best.distance_squared && face < best.face)) {
          best = {face, point, d2};
        }
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

struct CrossingCount {
  int count = 0;
  // False when some hit grazed an edge/vertex (tiny barycentric) or started
  // at the surface, so the parity cannot be trusted.
  bool clean = true;
};

/// Number of surface crossings along a ray, for inside/outside parity tests.
inline CrossingCount count_crossings(const Bvh& bvh, const TriMesh& mesh, const Vec3& origin,
                                     const Vec3& direction) {
  auto ray = Ray{origin, direction, 0.0, std::numeric_limits<double>::infinity()};
  auto frame = make_ray_frame(direction);
  auto inv_dir = Vec3{1.0 / direction.x, 1.0 / direction.y, 1.0 / direction.z};
  auto result = CrossingCount{};
  constexpr auto graze_eps = 1e-10;
  int stack[64];
  auto top = 0;
  stack[top++] = 0;
  while (top > 0) {
    auto& node = bvh.nodes[stack[--top]];
    if (!detail::hit_box(node.box, ray, inv_dir, ray.t_max)) continue;
    if (node.count > 0) {
      for (auto i = node.start; i < node.start + node.count; i++) {
        auto& f = mesh.faces[bvh.face_order[i]];
        auto hit = intersect_triangle(frame, ray, mesh.vertices[f[0]], mesh.vertices[f[1]],
                                      mesh.vertices[f[2]]);
        if (!hit) continue;
        result.count++;
        if (std::min({hit->u, hit->v, hit->w}) < graze_eps || hit->t < graze_eps) {
          result.clean = false;
        }
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return result;
}

}  // namespace meshtex
