// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "meshtex/error.hpp"
#include "meshtex/math.hpp"

namespace meshtex {

/// Indexed triangle mesh. Normals are per vertex, UVs are per face corner;
/// both are optional (empty when absent).
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Vec3> normals;               // per vertex, unit length
  std::vector<std::array<Vec2, 3>> uvs;    // per corner, in [0,1]^2

  bool has_normals() const { return !normals.empty(); }
  bool has_uvs() const { return !uvs.empty(); }
  int vertex_count() const { return int(vertices.size()); }
  int face_count() const { return int(faces.size()); }
};

inline Vec3 face_normal(const TriMesh& mesh, int face) {
  auto& f = mesh.faces[face];
  return normalize(cross(mesh.vertices[f[1]] - mesh.vertices[f[0]],
                         mesh.vertices[f[2]] - mesh.vertices[f[0]]));
}

inline double face_area(const TriMesh& mesh, int face) {
  auto& f = mesh.faces[face];
  return 0.5 * length(cross(mesh.vertices[f[1]] - mesh.vertices[f[0]],
                            mesh.vertices[f[2]] - mesh.vertices[f[0]]));
}

inline Vec3 face_centroid(const TriMesh& mesh, int face) {
  auto& f = mesh.faces[face];
  return (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0;
}

inline Box3 bounds(const TriMesh& mesh) {
  auto box = Box3{};
  for (auto& v : mesh.vertices) expand(box, v);
  return box;
}

inline double surface_area(const TriMesh& mesh) {
  auto total = 0.0;
  for (auto i = 0; i < mesh.face_count(); i++) total += face_area(mesh, i);
  return total;
}

// Signed volume by the divergence theorem. Positive when faces wind
// counter-clockwise seen from outside.
inline double signed_volume(const TriMesh& mesh) {
  auto total = 0.0;
  for (auto& f : mesh.faces) {
    auto a = mesh.vertices[f[0]], b = mesh.vertices[f[1]], c = mesh.vertices[f[2]];
    total += dot(a, cross(b, c)) / 6.0;
  }
  return total;
}

// Undirected edge key with canonical vertex order.
inline std::pair<int, int> edge_key(int a, int b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

/// Map from undirected edge to the faces sharing it.
inline std::map<std::pair<int, int>, std::vector<int>> edge_face_map(const TriMesh& mesh) {
  auto map = std::map<std::pair<int, int>, std::vector<int>>{};
  for (auto face = 0; face < mesh.face_count(); face++) {
    auto& f = mesh.faces[face];
    for (auto c = 0; c < 3; c++) {
      map[edge_key(f[c], f[(c + 1) % 3])].push_back(face);
    }
  }
  return map;
}

/// Every edge shared by exactly two faces.
inline bool is_watertight(const TriMesh& mesh) {
  if (mesh.faces.empty()) return false;
  for (auto& [edge, faces] : edge_face_map(mesh)) {
    if (faces.size() != 2) return false;
  }
  return true;
}

/// Every edge shared by at most two faces.
inline bool is_edge_manifold(const TriMesh& mesh) {
  for (auto& [edge, faces] : edge_face_map(mesh)) {
    if (faces.size() > 2) return false;
  }
  return true;
}

/// Area-weighted per-vertex normals.
inline std::vector<Vec3> compute_vertex_normals(const TriMesh& mesh) {
  auto normals = std::vector<Vec3>(mesh.vertices.size(), Vec3{});
  for (auto face = 0; face < mesh.face_count(); face++) {
    auto& f = mesh.faces[face];
    auto n = cross(mesh.vertices[f[1]] - mesh.vertices[f[0]],
                   mesh.vertices[f[2]] - mesh.vertices[f[0]]);
    for (auto c = 0; c < 3; c++) normals[f[c]] += n;
  }
  for (auto& n : normals) n = normalize(n);
  return normals;
}

/// Check the structural invariants: indices in range, unit normals, UVs in [0,1].
inline void validate(const TriMesh& mesh) {
  for (auto& f : mesh.faces) {
    for (auto c = 0; c < 3; c++) {
      check(f[c] >= 0 && f[c] < mesh.vertex_count(), errc::parse_error,
            "face index out of range");
    }
  }
  if (mesh.has_normals()) {
    check(mesh.normals.size() == mesh.vertices.size(), errc::invalid_argument,
          "normal count != vertex count");
    for (auto& n : mesh.normals) {
      check(std::abs(length(n) - 1.0) <= 1e-6, errc::invalid_argument,
            "normal not unit length");
    }
  }
  if (mesh.has_uvs()) {
    check(mesh.uvs.size() == mesh.faces.size(), errc::invalid_argument,
          "uv count != face count");
    for (auto& fuv : mesh.uvs) {
      for (auto& uv : fuv) {
        check(uv.x >= 0 && uv.x <= 1 && uv.y >= 0 && uv.y <= 1, errc::invalid_argument,
              "uv outside [0,1]^2");
      }
    }
  }
}

/// Uniformly scale and translate so the bounding box is centered at the origin
/// with longest side 1.9 (fits [-0.95, 0.95]^3, leaving a margin for gridding).
inline TriMesh normalize_to_unit_cube(const TriMesh& mesh) {
  check(!mesh.vertices.empty(), errc::empty_mesh, "cannot normalize an empty mesh");
  auto box = bounds(mesh);
  check(box.diagonal() >= 1e-12, errc::degenerate_extent,
        "bounding box diagonal below 1e-12");
  auto ext = box.extent();
  auto longest = std::max({ext.x, ext.y, ext.z});
  auto scale = 1.9 / longest;
  auto center = box.center();
  auto out = mesh;
  for (auto& v : out.vertices) v = (v - center) * scale;
  return out;
}

}  // namespace meshtex
