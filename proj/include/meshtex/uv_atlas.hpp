// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <vector>

#include "meshtex/error.hpp"
#include "meshtex/math.hpp"
#include "meshtex/mesh.hpp"

namespace meshtex {

struct AtlasTexel {
  int face = -1;  // -1 while the texel maps to no face
  Vec3 bary = {};
  Vec3 position = {};
  Vec3 normal = {0, 0, 1};
  bool occupied() const { return face >= 0; }
};

struct UvAtlas {
  int width = 0;
  int height = 0;
  std::vector<AtlasTexel> texels;

  const AtlasTexel& at(int x, int y) const { return texels[size_t(y) * width + x]; }
  AtlasTexel& at(int x, int y) { return texels[size_t(y) * width + x]; }
  int occupied_count() const {
    auto n = 0;
    for (auto& texel : texels) n += texel.occupied() ? 1 : 0;
    return n;
  }
};

/// UV coordinate of a texel center.
inline Vec2 texel_center(int x, int y, int width, int height) {
  return {(x + 0.5) / width, (y + 0.5) / height};
}

/// Map every texel center to the face whose UV triangle contains it.
/// Overlapping charts resolve to the lowest face index. Texel positions and
/// normals are barycentric interpolations (face normal when the mesh carries
/// no vertex normals).
inline UvAtlas rasterize_uv_atlas(const TriMesh& mesh, int width, int height) {
  check(mesh.has_uvs(), errc::missing_uvs, "uv atlas requires per-corner uvs");
  check(width > 0 && height > 0, errc::invalid_argument, "atlas dimensions must be positive");
  auto atlas = UvAtlas{};
  atlas.width = width;
  atlas.height = height;
  atlas.texels.resize(size_t(width) * height);

  constexpr auto edge_eps = 1e-12;  // inclusive boundary so chart seams stay covered
  for (auto face = 0; face < mesh.face_count(); face++) {
    auto& uv = mesh.uvs[face];
    auto lo = min(min(uv[0], uv[1]), uv[2]);
    auto hi = max(max(uv[0], uv[1]), uv[2]);
    auto x0 = std::max(0, int(std::floor(lo.x * width - 0.5)));
    auto x1 = std::min(width - 1, int(std::ceil(hi.x * width - 0.5)));
    auto y0 = std::max(0, int(std::floor(lo.y * height - 0.5)));
    auto y1 = std::min(height - 1, int(std::ceil(hi.y * height - 0.5)));
    auto& f = mesh.faces[face];
    for (auto y = y0; y <= y1; y++) {
      for (auto x = x0; x <= x1; x++) {
        auto& texel = atlas.at(x, y);
        if (texel.occupied()) continue;  // earlier (lower) face wins
        auto center = texel_center(x, y, width, height);
        auto bary = barycentric_2d(center, uv[0], uv[1], uv[2]);
        if (bary[0] < -edge_eps || bary[1] < -edge_eps || bary[2] < -edge_eps) continue;
        texel.face = face;
        texel.bary = {bary[0], bary[1], bary[2]};
        texel.position = mesh.vertices[f[0]] * bary[0] + mesh.vertices[f[1]] * bary[1] +
                         mesh.vertices[f[2]] * bary[2];
        if (mesh.has_normals()) {
          texel.normal = normalize(mesh.normals[f[0]] * bary[0] + mesh.normals[f[1]] * bary[1] +
                                   mesh.normals[f[2]] * bary[2]);
        } else {
          texel.normal = face_normal(mesh, face);
        }
      }
    }
  }
  return atlas;
}

/// Assign each face its own triangular chart in a square grid, insetting each
/// cell so neighboring charts never share texels. A fallback for meshes that
/// arrive without UVs.
inline std::vector<std::array<Vec2, 3>> make_per_face_chart_uvs(const TriMesh& mesh) {
  check(!mesh.faces.empty(), errc::empty_mesh, "no faces to chart");
  auto cells = int(std::ceil(std::sqrt(double(mesh.face_count()))));
  auto side = 1.0 / cells;
  auto margin = 0.1 * side;
  auto uvs = std::vector<std::array<Vec2, 3>>(mesh.faces.size());
  for (auto face = 0; face < mesh.face_count(); face++) {
    auto cx = (face % cells) * side;
    auto cy = (face / cells) * side;
    uvs[face] = {Vec2{cx + margin, cy + margin}, Vec2{cx + side - margin, cy + margin},
                 Vec2{cx + margin, cy + side - margin}};
  }
  return uvs;
}

}  // namespace meshtex
