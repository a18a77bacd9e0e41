// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "meshtex/bvh.hpp"
#include "meshtex/error.hpp"
#include "meshtex/math.hpp"
#include "meshtex/mesh.hpp"
#include "meshtex/parallel.hpp"
#include "meshtex/uv_atlas.hpp"

namespace meshtex {

/// Orthographic camera on a sphere around the origin, +z up convention.
struct Viewpoint {
  double azimuth_deg = 0;
  double elevation_deg = 0;
  double distance = 2.0;
  double half_width = 1.5;  // orthographic frame half-extent
};

inline void validate(const Viewpoint& view) {
  check(view.elevation_deg >= -90 && view.elevation_deg <= 90, errc::invalid_argument,
        "elevation must lie in [-90, 90]");
  check(view.distance > 0, errc::invalid_argument, "distance must be positive");
  check(view.half_width > 0, errc::invalid_argument, "half width must be positive");
}

/// Derived orthonormal camera frame. Looking straight down a pole makes the
/// world-up degenerate; +x replaces it there.
struct CameraFrame {
  Vec3 center = {};
  Vec3 forward = {};  // unit, points at the origin
  Vec3 right = {};
  Vec3 up = {};
};

inline CameraFrame camera_frame(const Viewpoint& view) {
  validate(view);
  auto az = radians(view.azimuth_deg);
  auto el = radians(view.elevation_deg);
  auto frame = CameraFrame{};
  frame.center = Vec3{std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)} *
                 view.distance;
  frame.forward = normalize(frame.center * -1.0);
  auto world_up = Vec3{0, 0, 1};
  if (std::abs(dot(frame.forward, world_up)) > 0.999) world_up = Vec3{1, 0, 0};
  frame.right = normalize(cross(frame.forward, world_up));
  frame.up = cross(frame.right, frame.forward);
  return frame;
}

/// Orthographic image-plane coordinates of a world point, in units of
/// half_width: (0,0) center, [-1,1] spans the frame.
inline Vec2 project_ortho(const CameraFrame& frame, const Viewpoint& view, const Vec3& point) {
  auto rel = point - frame.center;
  return {dot(rel, frame.right) / view.half_width, dot(rel, frame.up) / view.half_width};
}

struct TexelCoverage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> bits;  // one per texel, restricted to valid texels

  bool get(int x, int y) const { return bits[size_t(y) * width + x] != 0; }
  int count() const {
    auto n = 0;
    for (auto b : bits) n += b ? 1 : 0;
    return n;
  }
};

/// Texels a view covers: valid, facing the camera at cosine >= threshold,
/// inside the orthographic frame, and unoccluded along the (parallel) ray
/// toward the camera, cast from 1e-4 above the surface.
inline TexelCoverage uv_cover(const Viewpoint& view, const TriMesh& mesh, const Bvh& bvh,
                              const UvAtlas& atlas, double cos_threshold = 0.2) {
  auto frame = camera_frame(view);
  auto to_camera = frame.forward * -1.0;
  auto coverage = TexelCoverage{};
  coverage.width = atlas.width;
  coverage.height = atlas.height;
  coverage.bits.assign(size_t(atlas.width) * atlas.height, 0);
  constexpr auto surface_offset = 1e-4;
  for (auto index = size_t{0}; index < atlas.texels.size(); index++) {
    auto& texel = atlas.texels[index];
    if (!texel.occupied()) continue;
    if (dot(texel.normal, to_camera) < cos_threshold) continue;
    auto plane = project_ortho(frame, view, texel.position);
    if (std::abs(plane.x) > 1 || std::abs(plane.y) > 1) continue;
    auto ray = Ray{texel.position + texel.normal * surface_offset, to_camera, 0.0,
                   std::numeric_limits<double>::infinity()};
    if (ray_intersect(bvh, mesh, ray)) continue;
    coverage.bits[index] = 1;
  }
  return coverage;
}

/// Newly covered texel count of `view` relative to the union of `selected`.
inline int coverage_gain(const Viewpoint& view, const std::vector<Viewpoint>& selected,
                         const TriMesh& mesh, const Bvh& bvh, const UvAtlas& atlas,
                         double cos_threshold = 0.2) {
  auto cover = uv_cover(view, mesh, bvh, atlas, cos_threshold);
  auto covered_by_selected = std::vector<uint8_t>(cover.bits.size(), 0);
  for (auto& s : selected) {
    auto sc = uv_cover(s, mesh, bvh, atlas, cos_threshold);
    for (auto i = size_t{0}; i < sc.bits.size(); i++) {
      covered_by_selected[i] |= sc.bits[i];
    }
  }
  auto gain = 0;
  for (auto i = size_t{0}; i < cover.bits.size(); i++) {
    gain += (cover.bits[i] && !covered_by_selected[i]) ? 1 : 0;
  }
  return gain;
}

struct ViewSet {
  std::vector<Viewpoint> selected;          // fixed views first, then greedy picks
  std::vector<Viewpoint> candidates;        // candidates not selected
  std::vector<int> gains;                   // newly covered texels per greedy pick
  std::vector<int> chosen;                  // original candidate index per pick
  int covered_total = 0;                    // union size after the last pick
  int valid_total = 0;                      // occupied atlas texels
};

/// Evenly spaced equatorial views; with n = 4 these are the four orthogonal
/// base views (azimuth 0/90/180/270 at elevation 0).
inline std::vector<Viewpoint> fixed_base_views(int n, double distance = 2.0,
                                               double half_width = 1.5) {
  auto views = std::vector<Viewpoint>{};
  for (auto i = 0; i < n; i++) {
    views.push_back({360.0 * i / n, 0.0, distance, half_width});
  }
  return views;
}

/// Default candidate pool: 44 views, an 8-azimuth ring at five elevations
/// plus both poles and two extra equatorial views on the half-step azimuths.
inline std::vector<Viewpoint> default_candidate_views(double distance = 2.0,
                                                      double half_width = 1.5) {
  auto views = std::vector<Viewpoint>{};
  for (auto elevation : {-45.0, -20.0, 0.0, 20.0, 45.0}) {
    for (auto i = 0; i < 8; i++) {
      views.push_back({45.0 * i, elevation, distance, half_width});
    }
  }
  views.push_back({0.0, 90.0, distance, half_width});
  views.push_back({0.0, -90.0, distance, half_width});
  views.push_back({22.5, 0.0, distance, half_width});
  views.push_back({202.5, 0.0, distance, half_width});
  return views;
}

/// Greedy set-cover view selection. The selected set starts from n_fixed
/// equatorial base views; each iteration moves the candidate with the highest
/// coverage gain into the set (first maximum wins on ties, so the outcome
/// matches a per-iteration exhaustive argmax with the same tie rule).
/// Candidate covers are evaluated once and in parallel; the greedy loop then
/// works on cached bitsets.
inline ViewSet greedy_select(const std::vector<Viewpoint>& candidates, const TriMesh& mesh,
                             const Bvh& bvh, const UvAtlas& atlas, int n_fixed = 4,
                             int n_max = 12, double cos_threshold = 0.2, int thread_count = 1) {
  check(n_fixed >= 0 && n_fixed <= n_max, errc::invalid_argument,
        "need 0 <= n_fixed <= n_max");
  check(int(candidates.size()) >= n_max - n_fixed, errc::insufficient_candidates,
        "candidate pool smaller than n_max - n_fixed");

  auto set = ViewSet{};
  set.selected = fixed_base_views(n_fixed);
  set.valid_total = atlas.occupied_count();

  auto texel_count = size_t(atlas.width) * atlas.height;
  auto covered = std::vector<uint8_t>(texel_count, 0);
  for (auto& view : set.selected) {
    auto cover = uv_cover(view, mesh, bvh, atlas, cos_threshold);
    for (auto i = size_t{0}; i < texel_count; i++) covered[i] |= cover.bits[i];
  }

  auto candidate_cover = std::vector<TexelCoverage>(candidates.size());
  detail::parallel_for(int64_t(candidates.size()), thread_count, [&](int64_t i) {
    candidate_cover[size_t(i)] = uv_cover(candidates[size_t(i)], mesh, bvh, atlas, cos_threshold);
  });

  auto remaining = std::vector<int>(candidates.size());
  for (auto i = 0; i < int(candidates.size()); i++) remaining[i] = i;

  for (auto round = n_fixed; round < n_max; round++) {
    auto best_slot = -1;
    auto best_gain = -1;
    for (auto slot = 0; slot < int(remaining.size()); slot++) {
      auto& bits = candidate_cover[remaining[slot]].bits;
      auto gain = 0;
      for (auto i = size_t{0}; i < texel_count; i++) {
        gain += (bits[i] && !covered[i]) ? 1 : 0;
      }
      if (gain > best_gain) {  // strict: first maximum wins
        best_gain = gain;
        best_slot = slot;
      }
    }
    auto candidate_index = remaining[best_slot];
    set.selected.push_back(candidates[candidate_index]);
    set.gains.push_back(best_gain);
    set.chosen.push_back(candidate_index);
    auto& bits = candidate_cover[candidate_index].bits;
    for (auto i = size_t{0}; i < texel_count; i++) covered[i] |= bits[i];
    remaining.erase(remaining.begin() + best_slot);
  }

  for (auto index : remaining) set.candidates.push_back(candidates[index]);
  for (auto i = size_t{0}; i < texel_count; i++) set.covered_total += covered[i] ? 1 : 0;
  return set;
}

}  // namespace meshtex
