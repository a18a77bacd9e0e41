// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "meshtex/bvh.hpp"
#include "meshtex/error.hpp"
#include "meshtex/math.hpp"
#include "meshtex/mesh.hpp"
#include "meshtex/parallel.hpp"
#include "meshtex/rng.hpp"
#include "meshtex/sampling.hpp"

namespace meshtex {

namespace detail {

// Fallback directions with irrational-ish slopes: rays along them cannot run
// inside axis-aligned faces, so a grazing +x ray gets three clean revotes.
inline std::array<Vec3, 3> parity_vote_directions() {
  return {normalize(Vec3{0.8191725133, 0.4084258713, 0.4023538960}),
          normalize(Vec3{-0.3916334612, 0.9021341040, 0.1822436758}),
          normalize(Vec3{0.2979762684, -0.4443414905, 0.8448117854})};
}

inline bool parity_inside(const Bvh& bvh, const TriMesh& mesh, const Vec3& point) {
  auto primary = count_crossings(bvh, mesh, point, Vec3{1, 0, 0});
  if (primary.clean) return primary.count % 2 == 1;
  auto votes = 0;
  for (auto& direction : parity_vote_directions()) {
    votes += count_crossings(bvh, mesh, point, direction).count % 2;
  }
  return votes >= 2;
}

}  // namespace detail

/// Signed distance to a watertight mesh: magnitude from the closest surface
/// point, sign from ray-crossing parity (+x ray, with a three-direction
/// majority vote when the primary ray grazes an edge or vertex).
class MeshSdf {
 public:
  explicit MeshSdf(const TriMesh& mesh)
      : mesh_(&mesh), bvh_(build_bvh(mesh)), watertight_(is_watertight(mesh)) {}
  MeshSdf(const TriMesh& mesh, Bvh bvh)
      : mesh_(&mesh), bvh_(std::move(bvh)), watertight_(is_watertight(mesh)) {}

  bool watertight() const { return watertight_; }
  const Bvh& bvh() const { return bvh_; }
  const TriMesh& mesh() const { return *mesh_; }

  double unsigned_distance(const Vec3& point) const {
    return std::sqrt(nearest_point(bvh_, *mesh_, point).distance_squared);
  }

  bool inside(const Vec3& point) const {
    check(watertight_, errc::not_watertight, "inside/outside is undefined for an open mesh");
    return detail::parity_inside(bvh_, *mesh_, point);
  }

  double operator()(const Vec3& point) const {
    auto magnitude = unsigned_distance(point);
    return inside(point) ? -magnitude : magnitude;
  }

 private:
  const TriMesh* mesh_;
  Bvh bvh_;
  bool watertight_;
};

/// Free-function form; `watertight` is the caller's cached is_watertight(mesh).
inline double signed_distance(const Bvh& bvh, const TriMesh& mesh, const Vec3& point,
                              bool watertight) {
  check(watertight, errc::not_watertight, "sign is undefined for an open mesh");
  auto magnitude = std::sqrt(nearest_point(bvh, mesh, point).distance_squared);
  return detail::parity_inside(bvh, mesh, point) ? -magnitude : magnitude;
}

struct SdfGrid {
  std::array<int, 3> dims = {0, 0, 0};
  Vec3 origin = {};
  double spacing = 0;
  std::vector<double> values;  // x-fastest: index = (k*Ny + j)*Nx + i

  size_t index(int i, int j, int k) const {
    return (size_t(k) * dims[1] + size_t(j)) * dims[0] + size_t(i);
  }
  double at(int i, int j, int k) const { return values[index(i, j, k)]; }
  double& at(int i, int j, int k) { return values[index(i, j, k)]; }
  Vec3 position(int i, int j, int k) const {
    return origin + Vec3{i * spacing, j * spacing, k * spacing};
  }
  size_t value_count() const { return size_t(dims[0]) * dims[1] * dims[2]; }
};

inline void validate(const SdfGrid& grid) {
  check(grid.dims[0] >= 2 && grid.dims[1] >= 2 && grid.dims[2] >= 2, errc::invalid_argument,
        "grid dims must be >= 2 per axis");
  check(grid.spacing > 0, errc::invalid_argument, "grid spacing must be positive");
  check(grid.values.size() == grid.value_count(), errc::shape_mismatch,
        "grid value count does not match dims");
  for (auto value : grid.values) {
    check(std::isfinite(value), errc::invalid_argument, "grid contains non-finite value");
  }
}

/// Sample signed distance on an inclusive lattice over `domain`. The single
/// grid spacing requires (extent / (dim - 1)) to agree across axes.
inline SdfGrid sample_sdf_grid(const TriMesh& mesh, std::array<int, 3> dims,
                               const Box3& domain = {{-1, -1, -1}, {1, 1, 1}},
                               int thread_count = 1) {
  check(dims[0] >= 2 && dims[1] >= 2 && dims[2] >= 2, errc::invalid_argument,
        "grid dims must be >= 2 per axis");
  auto extent = domain.extent();
  auto spacing = extent.x / (dims[0] - 1);
  for (auto axis = 1; axis < 3; axis++) {
    auto other = extent[axis] / (dims[axis] - 1);
    check(std::abs(other - spacing) <= 1e-12 * std::max(1.0, std::abs(spacing)),
          errc::invalid_argument, "domain/dims imply unequal spacing across axes");
  }

  auto sdf = MeshSdf(mesh);
  check(sdf.watertight(), errc::not_watertight, "sdf grid requires a watertight mesh");

  auto grid = SdfGrid{};
  grid.dims = dims;
  grid.origin = domain.lo;
  grid.spacing = spacing;
  grid.values.resize(grid.value_count());
  detail::parallel_for(int64_t(grid.value_count()), thread_count, [&](int64_t index) {
    auto i = int(index % dims[0]);
    auto j = int((index / dims[0]) % dims[1]);
    auto k = int(index / (int64_t(dims[0]) * dims[1]));
    grid.values[size_t(index)] = sdf(grid.position(i, j, k));
  });
  return grid;
}

/// Flat binary layout: 3 little-endian u32 dims, 3 f64 origin, 1 f64 spacing,
/// then f32 values in x-fastest order.
inline void save_sdf_grid(const SdfGrid& grid, const std::string& path) {
  validate(grid);
  auto file = std::ofstream(path, std::ios::binary);
  check(file.good(), errc::io_error, "cannot open " + path + " for writing");
  auto write_raw = [&](const void* data, size_t size) {
    file.write(static_cast<const char*>(data), std::streamsize(size));
  };
  for (auto axis = 0; axis < 3; axis++) {
    auto dim = uint32_t(grid.dims[axis]);
    write_raw(&dim, sizeof(dim));
  }
  for (auto axis = 0; axis < 3; axis++) {
    auto coord = grid.origin[axis];
    write_raw(&coord, sizeof(coord));
  }
  write_raw(&grid.spacing, sizeof(grid.spacing));
  for (auto value : grid.values) {
    auto v = float(value);
    write_raw(&v, sizeof(v));
  }
  check(file.good(), errc::io_error, "write failed: " + path);
}

inline SdfGrid load_sdf_grid(const std::string& path) {
  auto file = std::ifstream(path, std::ios::binary);
  check(file.good(), errc::file_not_found, path);
  auto read_raw = [&](void* data, size_t size) {
    file.read(static_cast<char*>(data), std::streamsize(size));
    check(bool(file), errc::parse_error, path + ": truncated grid file");
  };
  auto grid = SdfGrid{};
  for (auto axis = 0; axis < 3; axis++) {
    auto dim = uint32_t{0};
    read_raw(&dim, sizeof(dim));
    grid.dims[axis] = int(dim);
  }
  check(grid.dims[0] >= 2 && grid.dims[1] >= 2 && grid.dims[2] >= 2, errc::parse_error,
        path + ": grid dims must be >= 2 per axis");
  for (auto axis = 0; axis < 3; axis++) {
    auto coord = 0.0;
    read_raw(&coord, sizeof(coord));
    grid.origin[axis] = coord;
  }
  read_raw(&grid.spacing, sizeof(grid.spacing));
  grid.values.resize(grid.value_count());
  for (auto& value : grid.values) {
    auto v = 0.0f;
    read_raw(&v, sizeof(v));
    value = double(v);
  }
  validate(grid);
  return grid;
}

/// Monte-Carlo IoU of two inside/outside classifiers over a shared box.
/// Sample i is keyed by its index, so the estimate is independent of
/// evaluation order and thread count.
template <class InsideA, class InsideB>
double classifier_iou(InsideA&& inside_a, InsideB&& inside_b, const Box3& box,
                      int64_t sample_count, uint64_t seed) {
  check(sample_count >= 1, errc::invalid_argument, "sample count must be >= 1");
  auto extent = box.extent();
  auto both = int64_t{0};
  auto either = int64_t{0};
  for (auto i = int64_t{0}; i < sample_count; i++) {
    auto point = box.lo + Vec3{extent.x * hash_unit(seed, uint64_t(i), 0),
                               extent.y * hash_unit(seed, uint64_t(i), 1),
                               extent.z * hash_unit(seed, uint64_t(i), 2)};
    auto a = inside_a(point);
    auto b = inside_b(point);
    both += (a && b) ? 1 : 0;
    either += (a || b) ? 1 : 0;
  }
  check(either > 0, errc::no_occupied_samples, "no sample fell inside either shape");
  return double(both) / double(either);
}

/// V-IoU: volume IoU by rejection sampling over the union of both bounds.
inline double volume_iou(const TriMesh& mesh_a, const TriMesh& mesh_b, int64_t sample_count,
                         uint64_t seed) {
  auto sdf_a = MeshSdf(mesh_a);
  auto sdf_b = MeshSdf(mesh_b);
  check(sdf_a.watertight() && sdf_b.watertight(), errc::not_watertight,
        "volume iou requires watertight meshes");
  auto box = bounds(mesh_a);
  expand(box, bounds(mesh_b));
  return classifier_iou([&](const Vec3& p) { return sdf_a.inside(p); },
                        [&](const Vec3& p) { return sdf_b.inside(p); }, box, sample_count, seed);
}

/// Default S-IoU band: 2% of the combined bounding-box diagonal.
inline double default_surface_band(const TriMesh& mesh_a, const TriMesh& mesh_b) {
  auto box = bounds(mesh_a);
  expand(box, bounds(mesh_b));
  return 0.02 * box.diagonal();
}

/// S-IoU: sample each surface, jitter along the normal within the band, and
/// compare "within band of A" / "within band of B" indicator sets.
inline double surface_iou(const TriMesh& mesh_a, const TriMesh& mesh_b, double band,
                          int64_t sample_count, uint64_t seed) {
  check(band > 0, errc::invalid_argument, "band must be positive");
  check(sample_count >= 1, errc::invalid_argument, "sample count must be >= 1");
  auto bvh_a = build_bvh(mesh_a);
  auto bvh_b = build_bvh(mesh_b);
  auto near_surface = [&](const Bvh& bvh, const TriMesh& mesh, const Vec3& p) {
    return nearest_point(bvh, mesh, p).distance_squared <= band * band;
  };

  auto both = int64_t{0};
  auto either = int64_t{0};
  auto accumulate = [&](const TriMesh& source, uint64_t cloud_seed) {
    auto cloud = sample_uniform(source, int(sample_count), cloud_seed);
    for (auto i = 0; i < cloud.size(); i++) {
      // draw 3 is free: sample_uniform consumed draws 0..2 of this index.
      auto offset = band * (2.0 * hash_unit(cloud_seed, uint64_t(i), 3) - 1.0);
      auto point = cloud.positions[i] + cloud.normals[i] * offset;
      auto a = near_surface(bvh_a, mesh_a, point);
      auto b = near_surface(bvh_b, mesh_b, point);
      both += (a && b) ? 1 : 0;
      either += (a || b) ? 1 : 0;
    }
  };
  accumulate(mesh_a, seed);
  accumulate(mesh_b, seed + 1);
  check(either > 0, errc::no_occupied_samples, "no sample fell near either surface");
  return double(both) / double(either);
}

}  // namespace meshtex
