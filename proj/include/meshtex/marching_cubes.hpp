// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <unordered_map>
#include <vector>

#include "meshtex/error.hpp"
#include "meshtex/marching_cubes_tables.hpp"
#include "meshtex/math.hpp"
#include "meshtex/mesh.hpp"
#include "meshtex/sdf.hpp"

namespace meshtex {

namespace detail {

inline constexpr std::array<std::array<int, 3>, 8> mc_corner_offsets = {{
    {0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {0, 0, 1},
    {0, 1, 0}, {1, 1, 0}, {1, 1, 1}, {0, 1, 1},
}};

// A lattice edge is identified by its axis and lower endpoint; dims fit in
// 20 bits per axis.
inline uint64_t mc_edge_key(int axis, int i, int j, int k) {
  return (uint64_t(axis) << 60) | (uint64_t(i) << 40) | (uint64_t(j) << 20) | uint64_t(k);
}

}  // namespace detail

/// Classic 256-case marching cubes with linear interpolation along crossed
/// edges. Vertices are welded through a global edge map, interpolation always
/// runs from the lower lattice endpoint, and triangle winding leaves normals
/// pointing toward positive values. Cells where a lattice value equals the
/// isolevel can emit coincident edge vertices; those are merged afterwards
/// and collapsed triangles dropped. Ambiguous faces use the table's fixed
/// resolution (no asymptotic decider), the standard classic-table behavior.
inline TriMesh marching_cubes(const SdfGrid& grid, double iso = 0.0) {
  validate(grid);
  auto [nx, ny, nz] = grid.dims;
  check(nx < (1 << 20) && ny < (1 << 20) && nz < (1 << 20), errc::invalid_argument,
        "grid dims exceed edge-key capacity");

  auto mesh = TriMesh{};
  auto edge_vertex = std::unordered_map<uint64_t, int>{};

  auto vertex_on_edge = [&](std::array<int, 3> lo_corner, int axis) {
    auto hi_corner = lo_corner;
    hi_corner[axis]++;
    auto key = detail::mc_edge_key(axis, lo_corner[0], lo_corner[1], lo_corner[2]);
    auto found = edge_vertex.find(key);
    if (found != edge_vertex.end()) return found->second;
    auto v0 = grid.at(lo_corner[0], lo_corner[1], lo_corner[2]);
    auto v1 = grid.at(hi_corner[0], hi_corner[1], hi_corner[2]);
    auto t = (iso - v0) / (v1 - v0);  // corners straddle iso, so v0 != v1
    auto position = grid.position(lo_corner[0], lo_corner[1], lo_corner[2]);
    position[axis] += t * grid.spacing;
    auto index = mesh.vertex_count();
    mesh.vertices.push_back(position);
    edge_vertex.emplace(key, index);
    return index;
  };

  for (auto k = 0; k < nz - 1; k++) {
    for (auto j = 0; j < ny - 1; j++) {
      for (auto i = 0; i < nx - 1; i++) {
        auto case_index = 0;
        for (auto c = 0; c < 8; c++) {
          auto& off = detail::mc_corner_offsets[c];
          if (grid.at(i + off[0], j + off[1], k + off[2]) < iso) case_index |= 1 << c;
        }
        auto mask = detail::mc_edge_mask(case_index);
        if (mask == 0) continue;

        int on_edge[12];
        for (auto e = 0; e < 12; e++) {
          if (!(mask & (1 << e))) continue;
          auto& ca = detail::mc_corner_offsets[detail::mc_edge_corners[e][0]];
          auto& cb = detail::mc_corner_offsets[detail::mc_edge_corners[e][1]];
          auto axis = ca[0] != cb[0] ? 0 : (ca[1] != cb[1] ? 1 : 2);
          auto lo_corner = std::array<int, 3>{i + std::min(ca[0], cb[0]),
                                              j + std::min(ca[1], cb[1]),
                                              k + std::min(ca[2], cb[2])};
          on_edge[e] = vertex_on_edge(lo_corner, axis);
        }

        auto& row = detail::mc_triangle_table[case_index];
        for (auto t = 0; row[t] != -1; t += 3) {
          mesh.faces.push_back({on_edge[row[t]], on_edge[row[t + 1]], on_edge[row[t + 2]]});
        }
      }
    }
  }
  check(!mesh.faces.empty(), errc::empty_surface, "isolevel is not crossed anywhere");

  // Merge bit-identical positions (iso hitting a lattice value exactly) and
  // drop triangles that collapse under the merge.
  auto canonical = std::unordered_map<std::string, int>{};
  auto remap = std::vector<int>(mesh.vertices.size());
  auto kept_vertices = std::vector<Vec3>{};
  for (auto v = 0; v < mesh.vertex_count(); v++) {
    char bytes[sizeof(double) * 3];
    std::memcpy(bytes, &mesh.vertices[v], sizeof(bytes));
    auto [it, inserted] = canonical.emplace(std::string(bytes, sizeof(bytes)), 0);
    if (inserted) {
      it->second = int(kept_vertices.size());
      kept_vertices.push_back(mesh.vertices[v]);
    }
    remap[v] = it->second;
  }
  auto kept_faces = std::vector<std::array<int, 3>>{};
  for (auto& face : mesh.faces) {
    auto a = remap[face[0]], b = remap[face[1]], c = remap[face[2]];
    if (a != b && b != c && c != a) kept_faces.push_back({a, b, c});
  }
  check(!kept_faces.empty(), errc::empty_surface, "all extracted triangles are degenerate");
  mesh.vertices = std::move(kept_vertices);
  mesh.faces = std::move(kept_faces);
  return mesh;
}

}  // namespace meshtex
