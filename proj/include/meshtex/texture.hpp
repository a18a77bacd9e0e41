// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "meshtex/bvh.hpp"
#include "meshtex/error.hpp"
#include "meshtex/image.hpp"
#include "meshtex/math.hpp"
#include "meshtex/mesh.hpp"
#include "meshtex/parallel.hpp"
#include "meshtex/uv_atlas.hpp"
#include "meshtex/view.hpp"

namespace meshtex {

struct ViewImage {
  Viewpoint view;
  Image image;  // rgb in [0,1], all views share one resolution
};

struct TextureMap {
  int width = 0;
  int height = 0;
  std::vector<Vec3> rgb;          // per texel, [0,1]
  std::vector<uint8_t> covered;   // per texel

  TextureMap() = default;
  TextureMap(int w, int h) : width(w), height(h) {
    rgb.assign(size_t(w) * h, Vec3{});
    covered.assign(size_t(w) * h, 0);
  }
  size_t index(int x, int y) const { return size_t(y) * width + x; }
  int covered_count() const {
    auto n = 0;
    for (auto c : covered) n += c ? 1 : 0;
    return n;
  }
};

struct VertexColors {
  std::vector<Vec3> rgb;          // per vertex
  std::vector<uint8_t> textured;  // per vertex
};

inline Image to_image(const TextureMap& texture) {
  auto image = Image(texture.width, texture.height, 3);
  for (auto i = size_t{0}; i < texture.rgb.size(); i++) {
    for (auto c = 0; c < 3; c++) image.pixels[i * 3 + c] = texture.rgb[i][c];
  }
  return image;
}

inline Image coverage_mask(const TextureMap& texture) {
  auto image = Image(texture.width, texture.height, 1);
  for (auto i = size_t{0}; i < texture.covered.size(); i++) {
    image.pixels[i] = texture.covered[i] ? 1.0 : 0.0;
  }
  return image;
}

namespace detail {

// Canonical view order for the fused sum: geometry key first, then the
// original position for identical viewpoints. Baking the same view list in
// any order therefore accumulates in the same sequence and reproduces the
// texture bit for bit.
inline std::vector<int> canonical_view_order(const std::vector<ViewImage>& views) {
  auto order = std::vector<int>(views.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    auto& va = views[a].view;
    auto& vb = views[b].view;
    auto ka = std::array<double, 4>{va.azimuth_deg, va.elevation_deg, va.distance,
                                    va.half_width};
    auto kb = std::array<double, 4>{vb.azimuth_deg, vb.elevation_deg, vb.distance,
                                    vb.half_width};
    return ka != kb ? ka < kb : a < b;
  });
  return order;
}

}  // namespace detail

/// Fuse view images into the UV atlas. A view contributes to a texel when the
/// texel passes the same visibility test as uv_cover; contributions are
/// weighted by cos(theta)^weight_exponent and normalized. Texels no view
/// reaches stay uncovered.
inline TextureMap bake(const UvAtlas& atlas, const TriMesh& mesh, const Bvh& bvh,
                       const std::vector<ViewImage>& views, double cos_threshold = 0.2,
                       double weight_exponent = 4.0, int thread_count = 1) {
  check(!views.empty(), errc::invalid_argument, "no views to bake");
  for (auto& view : views) {
    check(view.image.channels == 3, errc::invalid_argument, "view images must be rgb");
    check(view.image.width == views[0].image.width &&
              view.image.height == views[0].image.height,
          errc::shape_mismatch, "view images must share one resolution");
    validate(view.view);
  }
  auto order = detail::canonical_view_order(views);
  auto frames = std::vector<CameraFrame>(views.size());
  for (auto i = size_t{0}; i < views.size(); i++) frames[i] = camera_frame(views[i].view);

  auto texture = TextureMap(atlas.width, atlas.height);
  constexpr auto surface_offset = 1e-4;
  detail::parallel_for(int64_t(atlas.texels.size()), thread_count, [&](int64_t index) {
    auto& texel = atlas.texels[size_t(index)];
    if (!texel.occupied()) return;
    auto sum = Vec3{};
    auto weight_sum = 0.0;
    for (auto view_id : order) {
      auto& entry = views[view_id];
      auto& frame = frames[view_id];
      auto to_camera = frame.forward * -1.0;
      auto cos_theta = dot(texel.normal, to_camera);
      if (cos_theta < cos_threshold) continue;
      auto plane = project_ortho(frame, entry.view, texel.position);
      if (std::abs(plane.x) > 1 || std::abs(plane.y) > 1) continue;
      auto ray = Ray{texel.position + texel.normal * surface_offset, to_camera, 0.0,
                     std::numeric_limits<double>::infinity()};
      if (ray_intersect(bvh, mesh, ray)) continue;
      auto px = (plane.x + 1.0) * 0.5 * entry.image.width;
      auto py = (1.0 - (plane.y + 1.0) * 0.5) * entry.image.height;  // +up is row 0
      auto color = Vec3{sample_bilinear(entry.image, px, py, 0),
                        sample_bilinear(entry.image, px, py, 1),
                        sample_bilinear(entry.image, px, py, 2)};
      auto weight = std::pow(cos_theta, weight_exponent);
      sum += color * weight;
      weight_sum += weight;
    }
    if (weight_sum > 0) {
      texture.rgb[size_t(index)] = sum / weight_sum;
      texture.covered[size_t(index)] = 1;
    }
  });
  return texture;
}

/// Pull covered texels back onto vertices: a texel votes for a vertex when it
/// belongs to an incident face and its center lies within one texel of the
/// vertex's UV corner in that chart. Votes average unweighted.
inline VertexColors texture_to_vertex_colors(const TriMesh& mesh, const UvAtlas& atlas,
                                             const TextureMap& texture) {
  check(mesh.has_uvs(), errc::missing_uvs, "vertex colors require uvs");
  check(atlas.width == texture.width && atlas.height == texture.height, errc::shape_mismatch,
        "atlas and texture sizes differ");
  auto colors = VertexColors{};
  colors.rgb.assign(mesh.vertices.size(), Vec3{});
  colors.textured.assign(mesh.vertices.size(), 0);

  // texels grouped by face, then scanned per corner
  auto face_texels = std::vector<std::vector<int>>(mesh.faces.size());
  for (auto y = 0; y < atlas.height; y++) {
    for (auto x = 0; x < atlas.width; x++) {
      auto& texel = atlas.at(x, y);
      if (texel.occupied()) face_texels[texel.face].push_back(y * atlas.width + x);
    }
  }

  auto sums = std::vector<Vec3>(mesh.vertices.size(), Vec3{});
  auto counts = std::vector<int>(mesh.vertices.size(), 0);
  for (auto face = 0; face < mesh.face_count(); face++) {
    for (auto corner = 0; corner < 3; corner++) {
      auto vertex = mesh.faces[face][corner];
      auto corner_uv = mesh.uvs[face][corner];
      // distance measured in texel units
      auto cx = corner_uv.x * atlas.width;
      auto cy = corner_uv.y * atlas.height;
      for (auto texel_index : face_texels[face]) {
        if (!texture.covered[size_t(texel_index)]) continue;
        auto tx = (texel_index % atlas.width) + 0.5;
        auto ty = (texel_index / atlas.width) + 0.5;
        auto dx = tx - cx;
        auto dy = ty - cy;
        if (dx * dx + dy * dy > 1.0) continue;
        sums[vertex] += texture.rgb[size_t(texel_index)];
        counts[vertex]++;
      }
    }
  }
  for (auto v = 0; v < mesh.vertex_count(); v++) {
    if (counts[v] > 0) {
      colors.rgb[v] = sums[v] / double(counts[v]);
      colors.textured[v] = 1;
    }
  }
  return colors;
}

namespace detail {

// Breadth-first color diffusion over the vertex graph. Each wave assigns
// every untextured vertex adjacent to the previous wave's textured set the
// inverse-distance-weighted average of those neighbors; waves are synchronous
// so the result does not depend on vertex iteration order.
inline void propagate_vertex_colors(const TriMesh& mesh, VertexColors& colors) {
  auto adjacency = std::vector<std::vector<int>>(mesh.vertices.size());
  for (auto& face : mesh.faces) {
    for (auto c = 0; c < 3; c++) {
      auto a = face[c], b = face[(c + 1) % 3];
      adjacency[a].push_back(b);
      adjacency[b].push_back(a);
    }
  }
  for (auto& list : adjacency) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  constexpr auto distance_floor = 1e-8;
  while (true) {
    auto next_rgb = std::vector<std::pair<int, Vec3>>{};
    for (auto v = 0; v < mesh.vertex_count(); v++) {
      if (colors.textured[v]) continue;
      auto sum = Vec3{};
      auto weight_sum = 0.0;
      for (auto n : adjacency[v]) {
        if (!colors.textured[n]) continue;
        auto w = 1.0 / std::max(distance(mesh.vertices[v], mesh.vertices[n]), distance_floor);
        sum += colors.rgb[n] * w;
        weight_sum += w;
      }
      if (weight_sum > 0) next_rgb.emplace_back(v, sum / weight_sum);
    }
    if (next_rgb.empty()) break;
    for (auto& [v, rgb] : next_rgb) {
      colors.rgb[v] = rgb;
      colors.textured[v] = 1;
    }
  }
}

}  // namespace detail

/// Fill uncovered texels from vertex colors: covered texels project to
/// vertices, texturedness spreads breadth-first across mesh edges, and each
/// uncovered texel blends its face's three vertex colors with inverse
/// 3D-distance weights. Vertices in components no covered texel reaches --
/// texture islands -- fall back to the mesh-wide average of textured
/// vertices. Covered texels pass through untouched.
inline TextureMap inpaint(const TriMesh& mesh, const UvAtlas& atlas, const TextureMap& texture) {
  check(texture.covered_count() > 0, errc::no_seed_texels, "no covered texels to inpaint from");
  auto colors = texture_to_vertex_colors(mesh, atlas, texture);
  detail::propagate_vertex_colors(mesh, colors);

  auto textured_count = 0;
  auto textured_sum = Vec3{};
  for (auto v = 0; v < mesh.vertex_count(); v++) {
    if (colors.textured[v]) {
      textured_sum += colors.rgb[v];
      textured_count++;
    }
  }
  // Seed texels exist but may round to no vertex votes (degenerate charts);
  // fall back to the covered-texel average so islands still get a color.
  auto fallback = Vec3{};
  if (textured_count > 0) {
    fallback = textured_sum / double(textured_count);
  } else {
    auto covered_sum = Vec3{};
    auto covered_count = 0;
    for (auto i = size_t{0}; i < texture.rgb.size(); i++) {
      if (texture.covered[i]) {
        covered_sum += texture.rgb[i];
        covered_count++;
      }
    }
    fallback = covered_sum / double(covered_count);
  }

  constexpr auto distance_floor = 1e-8;
  auto out = texture;
  for (auto y = 0; y < atlas.height; y++) {
    for (auto x = 0; x < atlas.width; x++) {
      auto index = out.index(x, y);
      auto& texel = atlas.at(x, y);
      if (!texel.occupied() || out.covered[index]) continue;
      auto& face = mesh.faces[texel.face];
      auto sum = Vec3{};
      auto weight_sum = 0.0;
      for (auto c = 0; c < 3; c++) {
        auto vertex = face[c];
        if (!colors.textured[vertex]) continue;
        auto w = 1.0 / std::max(distance(texel.position, mesh.vertices[vertex]), distance_floor);
        sum += colors.rgb[vertex] * w;
        weight_sum += w;
      }
      out.rgb[index] = weight_sum > 0 ? sum / weight_sum : fallback;
      out.covered[index] = 1;
    }
  }
  return out;
}

}  // namespace meshtex
