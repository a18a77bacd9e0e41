// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>

#include "meshtex/mesh.hpp"

namespace meshtex {

/// Two triangles spanning [-half,half]^2 in the xy plane at z=0, with UVs
/// covering the full [0,1]^2 square. Normal +z.
inline TriMesh make_quad(double half = 0.5) {
  auto mesh = TriMesh{};
  mesh.vertices = {{-half, -half, 0}, {half, -half, 0}, {half, half, 0}, {-half, half, 0}};
  mesh.faces = {{0, 1, 2}, {0, 2, 3}};
  mesh.uvs = {{Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}}, {Vec2{0, 0}, Vec2{1, 1}, Vec2{0, 1}}};
  return mesh;
}

/// Axis-aligned box with 12 triangles, outward winding.
inline TriMesh make_box(Vec3 lo, Vec3 hi) {
  auto mesh = TriMesh{};
  mesh.vertices = {{lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {hi.x, hi.y, lo.z},
                   {lo.x, hi.y, lo.z}, {lo.x, lo.y, hi.z}, {hi.x, lo.y, hi.z},
                   {hi.x, hi.y, hi.z}, {lo.x, hi.y, hi.z}};
  mesh.faces = {{0, 2, 1}, {0, 3, 2},   // z = lo
                {4, 5, 6}, {4, 6, 7},   // z = hi
                {0, 1, 5}, {0, 5, 4},   // y = lo
                {2, 3, 7}, {2, 7, 6},   // y = hi
                {1, 2, 6}, {1, 6, 5},   // x = hi
                {3, 0, 4}, {3, 4, 7}};  // x = lo
  return mesh;
}

inline TriMesh make_unit_cube() { return make_box({-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}); }

inline TriMesh make_tetrahedron(double scale = 1.0) {
  auto mesh = TriMesh{};
  mesh.vertices = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  for (auto& v : mesh.vertices) v *= scale;
  mesh.faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  return mesh;
}

/// Regular grid of nx*ny cells in the xy plane (2 triangles each) at z=0,
/// spanning [0,nx]x[0,ny].
inline TriMesh make_plane_grid(int nx, int ny, double cell = 1.0) {
  auto mesh = TriMesh{};
  for (auto j = 0; j <= ny; j++) {
    for (auto i = 0; i <= nx; i++) {
      mesh.vertices.push_back({i * cell, j * cell, 0});
    }
  }
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (auto j = 0; j < ny; j++) {
    for (auto i = 0; i < nx; i++) {
      mesh.faces.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      mesh.faces.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  return mesh;
}

/// Icosphere: subdivided icosahedron projected onto the sphere.
/// Face count is 20 * 4^subdivisions.
inline TriMesh make_icosphere(int subdivisions, double radius = 1.0) {
  auto mesh = TriMesh{};
  auto t = (1.0 + std::sqrt(5.0)) / 2.0;
  mesh.vertices = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                   {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                   {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : mesh.vertices) v = normalize(v);
  mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (auto level = 0; level < subdivisions; level++) {
    auto midpoints = std::map<std::pair<int, int>, int>{};
    auto midpoint = [&](int a, int b) {
      auto key = edge_key(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      auto id = mesh.vertex_count();
      mesh.vertices.push_back(normalize(mesh.vertices[a] + mesh.vertices[b]));
      midpoints.emplace(key, id);
      return id;
    };
    auto faces = std::vector<std::array<int, 3>>{};
    faces.reserve(mesh.faces.size() * 4);
    for (auto& f : mesh.faces) {
      auto ab = midpoint(f[0], f[1]);
      auto bc = midpoint(f[1], f[2]);
      auto ca = midpoint(f[2], f[0]);
      faces.push_back({f[0], ab, ca});
      faces.push_back({f[1], bc, ab});
      faces.push_back({f[2], ca, bc});
      faces.push_back({ab, bc, ca});
    }
    mesh.faces = std::move(faces);
  }

  for (auto& v : mesh.vertices) v *= radius;
  return mesh;
}

}  // namespace meshtex
