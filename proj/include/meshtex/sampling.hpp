// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "meshtex/error.hpp"
#include "meshtex/math.hpp"
#include "meshtex/mesh.hpp"
#include "meshtex/rng.hpp"

namespace meshtex {

struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;  // unit length, one per position

  int size() const { return int(positions.size()); }
};

struct SharpEdge {
  int a = 0, b = 0;           // vertex indices, a < b
  double dihedral_deg = 0;    // 180 for boundary edges
};

struct SharpEdgeSet {
  std::vector<SharpEdge> edges;
  double threshold_deg = 0;
};

namespace detail {

// Prefix-sum table for picking an entry with probability proportional to its
// weight. Draws map through upper_bound so equal seeds give equal picks.
struct WeightTable {
  std::vector<double> cumulative;
  double total = 0;

  explicit WeightTable(const std::vector<double>& weights) {
    cumulative.reserve(weights.size());
    for (auto w : weights) {
      total += w;
      cumulative.push_back(total);
    }
  }
  int pick(double unit) const {
    auto target = unit * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    auto index = int(it - cumulative.begin());
    return std::min(index, int(cumulative.size()) - 1);
  }
};

}  // namespace detail

/// Area-proportional surface sampling. Each sample draws an independent RNG
/// stream keyed by its index, so results do not depend on evaluation order.
inline PointCloud sample_uniform(const TriMesh& mesh, int count, uint64_t seed) {
  check(!mesh.faces.empty(), errc::empty_mesh, "cannot sample empty mesh");
  check(count >= 1, errc::invalid_argument, "sample count must be >= 1");
  auto areas = std::vector<double>(mesh.faces.size());
  for (auto face = 0; face < mesh.face_count(); face++) areas[face] = face_area(mesh, face);
  auto table = detail::WeightTable(areas);
  check(table.total >= 1e-12, errc::zero_area, "mesh surface area is zero");

  auto cloud = PointCloud{};
  cloud.positions.resize(count);
  cloud.normals.resize(count);
  for (auto i = 0; i < count; i++) {
    auto face = table.pick(hash_unit(seed, uint64_t(i), 0));
    auto r1 = hash_unit(seed, uint64_t(i), 1);
    auto r2 = hash_unit(seed, uint64_t(i), 2);
    auto& f = mesh.faces[face];
    // sqrt trick: uniform density over the triangle.
    auto su = std::sqrt(r1);
    auto u = 1.0 - su;
    auto v = su * (1.0 - r2);
    auto w = su * r2;
    cloud.positions[i] = mesh.vertices[f[0]] * u + mesh.vertices[f[1]] * v +
                         mesh.vertices[f[2]] * w;
    cloud.normals[i] = face_normal(mesh, face);
  }
  return cloud;
}

/// All interior edges whose dihedral angle meets the threshold, plus every
/// boundary edge (recorded with a 180 degree angle). Edges shared by three or
/// more faces are treated as sharp junctions.
inline SharpEdgeSet detect_sharp_edges(const TriMesh& mesh, double dihedral_threshold_deg) {
  check(dihedral_threshold_deg > 0 && dihedral_threshold_deg < 180, errc::invalid_argument,
        "dihedral threshold must lie in (0, 180)");
  auto set = SharpEdgeSet{};
  set.threshold_deg = dihedral_threshold_deg;
  for (auto& [key, faces] : edge_face_map(mesh)) {
    if (faces.size() == 2) {
      auto n0 = face_normal(mesh, faces[0]);
      auto n1 = face_normal(mesh, faces[1]);
      auto angle = degrees(std::acos(clamp(dot(n0, n1), -1.0, 1.0)));
      if (angle >= dihedral_threshold_deg) {
        set.edges.push_back({key.first, key.second, angle});
      }
    } else {
      set.edges.push_back({key.first, key.second, 180.0});
    }
  }
  return set;
}

/// Length-uniform sampling along sharp edges; the normal at a sample is the
/// renormalized sum of the adjacent face normals (for an interior edge point
/// every incident face subtends the same angle, so the plain sum is already
/// the angle-weighted pseudo-normal). Falls back to uniform surface sampling
/// when the mesh has no sharp edges.
inline PointCloud sample_importance(const TriMesh& mesh, int count, uint64_t seed,
                                    double dihedral_threshold_deg = 30.0,
                                    bool* used_uniform_fallback = nullptr) {
  check(count >= 1, errc::invalid_argument, "sample count must be >= 1");
  auto sharp = detect_sharp_edges(mesh, dihedral_threshold_deg);
  if (sharp.edges.empty()) {
    if (used_uniform_fallback) *used_uniform_fallback = true;
    return sample_uniform(mesh, count, seed);
  }
  if (used_uniform_fallback) *used_uniform_fallback = false;

  auto adjacency = edge_face_map(mesh);
  auto lengths = std::vector<double>(sharp.edges.size());
  auto edge_normals = std::vector<Vec3>(sharp.edges.size());
  for (auto i = 0; i < int(sharp.edges.size()); i++) {
    auto& edge = sharp.edges[i];
    lengths[i] = distance(mesh.vertices[edge.a], mesh.vertices[edge.b]);
    auto sum = Vec3{};
    for (auto face : adjacency.at({edge.a, edge.b})) sum += face_normal(mesh, face);
    auto n = normalize(sum);
    edge_normals[i] = length(n) == 0 ? face_normal(mesh, adjacency.at({edge.a, edge.b})[0]) : n;
  }
  auto table = detail::WeightTable(lengths);
  check(table.total >= 1e-12, errc::zero_area, "sharp edges have zero total length");

  auto cloud = PointCloud{};
  cloud.positions.resize(count);
  cloud.normals.resize(count);
  for (auto i = 0; i < count; i++) {
    auto pick = table.pick(hash_unit(seed, uint64_t(i), 0));
    auto t = hash_unit(seed, uint64_t(i), 1);
    auto& edge = sharp.edges[pick];
    cloud.positions[i] = mesh.vertices[edge.a] * (1.0 - t) + mesh.vertices[edge.b] * t;
    cloud.normals[i] = edge_normals[pick];
  }
  return cloud;
}

/// Greedy farthest-point subsampling with an explicit start index. Distances
/// are squared Euclidean; ties resolve to the lowest index, which keeps the
/// result identical to a brute-force greedy scan.
inline std::vector<int> farthest_point_sampling_from(const std::vector<Vec3>& points, int target,
                                                     int start) {
  check(!points.empty(), errc::invalid_argument, "empty point set");
  check(target <= int(points.size()), errc::target_exceeds_input,
        "fps target exceeds point count");
  check(start >= 0 && start < int(points.size()), errc::invalid_argument,
        "fps start index out of range");
  auto selected = std::vector<int>{};
  if (target <= 0) return selected;
  selected.reserve(target);
  selected.push_back(start);
  auto min_d2 = std::vector<double>(points.size(), std::numeric_limits<double>::infinity());
  for (auto round = 1; round < target; round++) {
    auto last = points[selected.back()];
    auto best = -1;
    auto best_d2 = -1.0;
    for (auto i = 0; i < int(points.size()); i++) {
      min_d2[i] = std::min(min_d2[i], distance_squared(points[i], last));
      if (min_d2[i] > best_d2) {
        best_d2 = min_d2[i];
        best = i;
      }
    }
    selected.push_back(best);
  }
  return selected;
}

/// Start index derived from the seed: mix of (seed, 0, 0) modulo the size.
inline int farthest_point_start(uint64_t seed, int point_count) {
  return int(hash_rng(seed, 0, 0) % uint64_t(point_count));
}

inline std::vector<int> farthest_point_sampling(const std::vector<Vec3>& points, int target,
                                                uint64_t seed) {
  check(!points.empty(), errc::invalid_argument, "empty point set");
  return farthest_point_sampling_from(points, target, farthest_point_start(seed, int(points.size())));
}

struct PointQuerySet {
  std::vector<Vec3> uniform_query;
  std::vector<Vec3> importance_query;
  std::vector<Vec3> combined;  // uniform_query then importance_query
};

/// FPS-subsample each cloud separately and concatenate uniform-first.
inline PointQuerySet build_point_query(const PointCloud& uniform, const PointCloud& importance,
                                       int uniform_target, int importance_target, uint64_t seed) {
  auto set = PointQuerySet{};
  if (uniform_target > 0) {
    for (auto index : farthest_point_sampling(uniform.positions, uniform_target, seed)) {
      set.uniform_query.push_back(uniform.positions[index]);
    }
  }
  if (importance_target > 0) {
    for (auto index : farthest_point_sampling(importance.positions, importance_target, seed)) {
      set.importance_query.push_back(importance.positions[index]);
    }
  }
  set.combined = set.uniform_query;
  set.combined.insert(set.combined.end(), set.importance_query.begin(),
                      set.importance_query.end());
  return set;
}

/// ASCII PLY export with per-point normals. Doubles keep 17 significant
/// digits so identical clouds produce identical bytes.
inline void save_point_cloud_ply(const PointCloud& cloud, const std::string& path) {
  auto file = std::ofstream(path);
  check(file.good(), errc::io_error, "cannot open " + path + " for writing");
  auto fmt = [](double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return std::string(buffer);
  };
  file << "ply\nformat ascii 1.0\nelement vertex " << cloud.positions.size()
       << "\nproperty double x\nproperty double y\nproperty double z\nproperty double nx\n"
          "property double ny\nproperty double nz\nend_header\n";
  for (auto i = 0; i < cloud.size(); i++) {
    auto& p = cloud.positions[i];
    auto& n = cloud.normals[i];
    file << fmt(p.x) << " " << fmt(p.y) << " " << fmt(p.z) << " " << fmt(n.x) << " " << fmt(n.y)
         << " " << fmt(n.z) << "\n";
  }
  check(file.good(), errc::io_error, "write failed: " + path);
}

}  // namespace meshtex
