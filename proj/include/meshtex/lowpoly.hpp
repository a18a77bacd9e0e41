// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <vector>

#include "meshtex/error.hpp"
#include "meshtex/kdtree.hpp"
#include "meshtex/math.hpp"
#include "meshtex/mesh.hpp"
#include "meshtex/texture.hpp"
#include "meshtex/uv_atlas.hpp"

namespace meshtex {

namespace detail {

// Plane quadric of a face: x' K x measures squared distance to the plane.
inline Eigen::Matrix4d face_quadric(const TriMesh& mesh, int face) {
  auto n = face_normal(mesh, face);
  auto d = -dot(n, mesh.vertices[mesh.faces[face][0]]);
  auto p = Eigen::Vector4d(n.x, n.y, n.z, d);
  return p * p.transpose();
}

struct CollapseCandidate {
  double error = 0;
  int a = 0, b = 0;             // vertex indices, a < b
  uint32_t version_a = 0, version_b = 0;
  Vec3 position = {};

  bool operator>(const CollapseCandidate& other) const {
    if (error != other.error) return error > other.error;
    if (a != other.a) return a > other.a;
    return b > other.b;
  }
};

// Optimal collapse position: minimize x' Q x subject to w = 1. Singular
// systems (flat regions, det below 1e-12) fall back to the edge midpoint.
inline std::pair<Vec3, double> quadric_minimizer(const Eigen::Matrix4d& q, const Vec3& va,
                                                 const Vec3& vb) {
  auto a = q.topLeftCorner<3, 3>();
  auto b = q.topRightCorner<3, 1>();
  auto position = Vec3{};
  if (std::abs(a.determinant()) >= 1e-12) {
    Eigen::Vector3d x = a.ldlt().solve(-b);
    position = {x[0], x[1], x[2]};
  } else {
    position = (va + vb) * 0.5;
  }
  auto h = Eigen::Vector4d(position.x, position.y, position.z, 1.0);
  auto error = std::max(0.0, double(h.transpose() * q * h));
  return {position, error};
}

}  // namespace detail

/// Quadric-error-metric decimation (iterative minimum-cost edge collapse).
/// Vertex quadrics accumulate through collapses, candidate entries invalidate
/// lazily via per-vertex version stamps, the link condition guards
/// manifoldness, and any collapse that flips a surviving face normal is
/// rejected. Stops at target_faces or raises TargetUnreachable with the
/// achieved count when no legal collapse remains.
inline TriMesh qem_decimate(const TriMesh& mesh, int target_faces) {
  check(target_faces >= 2, errc::invalid_argument, "target must be >= 2 faces");
  check(!mesh.faces.empty(), errc::empty_mesh, "cannot decimate empty mesh");
  check(is_edge_manifold(mesh), errc::non_manifold_input,
        "decimation requires an edge-manifold mesh");

  auto positions = mesh.vertices;
  auto faces = mesh.faces;
  auto face_alive = std::vector<uint8_t>(faces.size(), 1);
  auto vertex_alive = std::vector<uint8_t>(positions.size(), 1);
  auto version = std::vector<uint32_t>(positions.size(), 0);
  auto quadrics = std::vector<Eigen::Matrix4d>(positions.size(), Eigen::Matrix4d::Zero());
  auto vertex_faces = std::vector<std::vector<int>>(positions.size());
  auto live_faces = int(faces.size());

  for (auto f = 0; f < int(faces.size()); f++) {
    auto k = detail::face_quadric(mesh, f);
    for (auto c = 0; c < 3; c++) {
      quadrics[faces[f][c]] += k;
      vertex_faces[faces[f][c]].push_back(f);
    }
  }

  auto queue = std::priority_queue<detail::CollapseCandidate,
                                   std::vector<detail::CollapseCandidate>,
                                   std::greater<detail::CollapseCandidate>>{};
  auto push_candidate = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    auto [position, error] =
        detail::quadric_minimizer(quadrics[a] + quadrics[b], positions[a], positions[b]);
    queue.push({error, a, b, version[a], version[b], position});
  };
  {
    auto seen = std::set<std::pair<int, int>>{};
    for (auto f = 0; f < int(faces.size()); f++) {
      for (auto c = 0; c < 3; c++) {
        auto key = edge_key(faces[f][c], faces[f][(c + 1) % 3]);
        if (seen.insert(key).second) push_candidate(key.first, key.second);
      }
    }
  }

  auto neighbor_vertices = [&](int v) {
    auto out = std::set<int>{};
    for (auto f : vertex_faces[v]) {
      if (!face_alive[f]) continue;
      for (auto c = 0; c < 3; c++) {
        if (faces[f][c] != v) out.insert(faces[f][c]);
      }
    }
    return out;
  };

  while (live_faces > target_faces && !queue.empty()) {
    auto candidate = queue.top();
    queue.pop();
    auto a = candidate.a, b = candidate.b;
    if (!vertex_alive[a] || !vertex_alive[b]) continue;
    if (version[a] != candidate.version_a || version[b] != candidate.version_b) continue;

    // shared faces = faces dying with this collapse
    auto dying = std::vector<int>{};
    for (auto f : vertex_faces[a]) {
      if (!face_alive[f]) continue;
      auto& face = faces[f];
      if (face[0] == b || face[1] == b || face[2] == b) dying.push_back(f);
    }
    if (dying.empty()) continue;  // stale entry: edge no longer exists
    if (live_faces - int(dying.size()) < target_faces) continue;

    // Link condition: common neighbors must be exactly the vertices opposite
    // the shared faces, otherwise the collapse pinches the surface.
    auto opposite = std::set<int>{};
    for (auto f : dying) {
      for (auto c = 0; c < 3; c++) {
        if (faces[f][c] != a && faces[f][c] != b) opposite.insert(faces[f][c]);
      }
    }
    auto neighbors_a = neighbor_vertices(a);
    auto neighbors_b = neighbor_vertices(b);
    auto common = std::vector<int>{};
    std::set_intersection(neighbors_a.begin(), neighbors_a.end(), neighbors_b.begin(),
                          neighbors_b.end(), std::back_inserter(common));
    if (common.size() != opposite.size()) continue;

    // Normal-flip rejection over every surviving incident face.
    auto flips = false;
    auto surviving = std::vector<int>{};
    for (auto v : {a, b}) {
      for (auto f : vertex_faces[v]) {
        if (!face_alive[f]) continue;
        if (std::find(dying.begin(), dying.end(), f) != dying.end()) continue;
        surviving.push_back(f);
        auto corners = std::array<Vec3, 3>{};
        auto moved = corners;
        for (auto c = 0; c < 3; c++) {
          corners[c] = positions[faces[f][c]];
          moved[c] = (faces[f][c] == a || faces[f][c] == b) ? candidate.position : corners[c];
        }
        auto before = cross(corners[1] - corners[0], corners[2] - corners[0]);
        auto after = cross(moved[1] - moved[0], moved[2] - moved[0]);
        if (dot(before, after) < 0) {
          flips = true;
          break;
        }
      }
      if (flips) break;
    }
    if (flips) continue;

    // Execute: b folds into a.
    positions[a] = candidate.position;
    quadrics[a] += quadrics[b];
    vertex_alive[b] = 0;
    version[a]++;
    version[b]++;
    for (auto f : dying) {
      face_alive[f] = 0;
      live_faces--;
    }
    for (auto f : vertex_faces[b]) {
      if (!face_alive[f]) continue;
      for (auto c = 0; c < 3; c++) {
        if (faces[f][c] == b) faces[f][c] = a;
      }
      vertex_faces[a].push_back(f);
    }
    vertex_faces[b].clear();
    for (auto n : neighbor_vertices(a)) push_candidate(a, n);
  }

  check(live_faces <= target_faces, errc::target_unreachable,
        "no legal collapse remains at " + std::to_string(live_faces) + " faces (target " +
            std::to_string(target_faces) + ")");

  // Compact to a fresh mesh, preserving ascending index order.
  auto out = TriMesh{};
  auto remap = std::vector<int>(positions.size(), -1);
  for (auto f = 0; f < int(faces.size()); f++) {
    if (!face_alive[f]) continue;
    auto mapped = std::array<int, 3>{};
    for (auto c = 0; c < 3; c++) {
      auto v = faces[f][c];
      if (remap[v] < 0) {
        remap[v] = out.vertex_count();
        out.vertices.push_back(positions[v]);
      }
      mapped[c] = remap[v];
    }
    out.faces.push_back(mapped);
  }
  return out;
}

inline KdTree::Result kd_nearest(const KdTree& tree, const Vec3& query) {
  return tree.nearest(query);
}

/// Color each low-poly vertex from its nearest dense-mesh vertex. Dense
/// vertex colors come from the covered texture; vertices whose charts are too
/// small to catch a texel inherit neighbor colors by propagation first.
inline VertexColors transfer_texture(const TriMesh& dense, const UvAtlas& atlas,
                                     const TextureMap& texture, const TriMesh& low) {
  auto dense_colors = texture_to_vertex_colors(dense, atlas, texture);
  detail::propagate_vertex_colors(dense, dense_colors);
  auto textured_sum = Vec3{};
  auto textured_count = 0;
  for (auto v = 0; v < dense.vertex_count(); v++) {
    if (dense_colors.textured[v]) {
      textured_sum += dense_colors.rgb[v];
      textured_count++;
    }
  }
  check(textured_count > 0, errc::no_seed_texels, "dense texture colored no vertex");
  auto fallback = textured_sum / double(textured_count);
  for (auto v = 0; v < dense.vertex_count(); v++) {
    if (!dense_colors.textured[v]) {
      dense_colors.rgb[v] = fallback;
      dense_colors.textured[v] = 1;
    }
  }

  auto tree = KdTree(dense.vertices);
  auto colors = VertexColors{};
  colors.rgb.resize(low.vertices.size());
  colors.textured.assign(low.vertices.size(), 1);
  for (auto v = 0; v < low.vertex_count(); v++) {
    colors.rgb[v] = dense_colors.rgb[tree.nearest(low.vertices[v]).index];
  }
  return colors;
}

/// Rasterize vertex colors into the low-poly mesh's UV atlas; every valid
/// texel is a barycentric blend of its face's corners. Meshes without UVs
/// must be charted first (make_per_face_chart_uvs).
inline TextureMap rebake_lowpoly(const TriMesh& low, const VertexColors& colors, int size) {
  check(low.has_uvs(), errc::missing_uvs, "rebake needs uvs; apply a chart fallback first");
  check(int(colors.rgb.size()) == low.vertex_count(), errc::shape_mismatch,
        "vertex color count mismatch");
  auto atlas = rasterize_uv_atlas(low, size, size);
  auto texture = TextureMap(size, size);
  for (auto y = 0; y < size; y++) {
    for (auto x = 0; x < size; x++) {
      auto& texel = atlas.at(x, y);
      if (!texel.occupied()) continue;
      auto& face = low.faces[texel.face];
      auto index = texture.index(x, y);
      texture.rgb[index] = colors.rgb[face[0]] * texel.bary.x +
                           colors.rgb[face[1]] * texel.bary.y +
                           colors.rgb[face[2]] * texel.bary.z;
      texture.covered[index] = 1;
    }
  }
  return texture;
}

}  // namespace meshtex
