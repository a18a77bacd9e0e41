// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <optional>

#include <meshtex/bvh.hpp>
#include <meshtex/primitives.hpp>

#include "test_utils.hpp"

using namespace meshtex;

namespace {

// Reference intersector: test every face, keep the lexicographically smallest
// (t, face). Mirrors the tie rule the tree promises.
std::optional<RayHit> brute_force_ray(const TriMesh& mesh, const Ray& ray) {
  auto frame = make_ray_frame(ray.direction);
  auto best = std::optional<RayHit>{};
  for (auto face = 0; face < mesh.face_count(); face++) {
    auto& f = mesh.faces[face];
    auto hit = intersect_triangle(frame, ray, mesh.vertices[f[0]], mesh.vertices[f[1]],
                                  mesh.vertices[f[2]]);
    if (!hit) continue;
    hit->face = face;
    if (!best || hit->t < best->t || (hit->t == best->t && hit->face < best->face)) best = hit;
  }
  return best;
}

std::optional<RayHit> hit_one(const TriMesh& mesh, const Ray& ray) {
  auto frame = make_ray_frame(ray.direction);
  auto& f = mesh.faces[0];
  return intersect_triangle(frame, ray, mesh.vertices[f[0]], mesh.vertices[f[1]],
                            mesh.vertices[f[2]]);
}

NearestPoint brute_force_nearest(const TriMesh& mesh, const Vec3& point) {
  auto best = NearestPoint{};
  best.distance_squared = std::numeric_limits<double>::infinity();
  for (auto face = 0; face < mesh.face_count(); face++) {
    auto& f = mesh.faces[face];
    auto q = closest_point_triangle(point, mesh.vertices[f[0]], mesh.vertices[f[1]],
                                    mesh.vertices[f[2]]);
    auto d2 = distance_squared(point, q);
    if (d2 < best.distance_squared) {
      best = {face, q, d2};
    }
  }
  return best;
}

Vec3 random_direction(uint64_t seed, uint64_t index) {
  auto v = Vec3{hash_unit(seed, index, 10) * 2 - 1, hash_unit(seed, index, 11) * 2 - 1,
                hash_unit(seed, index, 12) * 2 - 1};
  return length(v) > 1e-6 ? normalize(v) : Vec3{1, 0, 0};
}

}  // namespace

TEST_CASE("single-triangle intersections", "[bvh]") {
  auto mesh = TriMesh{};
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  mesh.faces = {{0, 1, 2}};

  auto hit = hit_one(mesh, Ray{{0.25, 0.25, 1}, {0, 0, -1}});
  REQUIRE(hit);
  CHECK(hit->t == Catch::Approx(1.0));
  CHECK(hit->u + hit->v + hit->w == Catch::Approx(1.0).margin(1e-12));

  // boundary hits are inclusive: directly above a vertex and above an edge
  CHECK(hit_one(mesh, Ray{{0, 0, 1}, {0, 0, -1}}));
  CHECK(hit_one(mesh, Ray{{0.5, 0, 1}, {0, 0, -1}}));
  // clearly outside
  CHECK(!hit_one(mesh, Ray{{1, 1, 1}, {0, 0, -1}}));
  // parallel ray cannot hit
  CHECK(!hit_one(mesh, Ray{{-1, 0.2, 0.5}, {1, 0, 0}}));
  // triangles are double-sided: a ray from below also hits
  CHECK(hit_one(mesh, Ray{{0.25, 0.25, -1}, {0, 0, 1}}));
}

TEST_CASE("ray window limits hits", "[bvh]") {
  auto mesh = TriMesh{};
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  mesh.faces = {{0, 1, 2}};
  CHECK(!hit_one(mesh, Ray{{0.2, 0.2, 1}, {0, 0, -1}, 0.0, 0.5}));
  CHECK(hit_one(mesh, Ray{{0.2, 0.2, 1}, {0, 0, -1}, 0.0, 1.0}));
  CHECK(!hit_one(mesh, Ray{{0.2, 0.2, 1}, {0, 0, -1}, 1.5, 9.0}));
}

TEST_CASE("tree traversal equals brute force on rays", "[bvh]") {
  auto mesh = make_icosphere(3, 0.8);
  auto bvh = build_bvh(mesh);
  auto hits = 0;
  for (auto i = 0; i < 2000; i++) {
    auto origin = testutil::random_points(1, 900 + i)[0] * 2.0;
    auto ray = Ray{origin, random_direction(901, uint64_t(i))};
    auto fast = ray_intersect(bvh, mesh, ray);
    auto slow = brute_force_ray(mesh, ray);
    REQUIRE(bool(fast) == bool(slow));
    if (fast) {
      hits++;
      CHECK(fast->face == slow->face);
      CHECK(fast->t == slow->t);  // identical arithmetic, exact match expected
    }
  }
  CHECK(hits > 100);  // the sphere is actually in the way of many rays
}

TEST_CASE("tree traversal equals brute force on nearest points", "[bvh]") {
  auto mesh = make_icosphere(2, 0.6);
  auto bvh = build_bvh(mesh);
  for (auto i = 0; i < 2000; i++) {
    auto point = testutil::random_points(1, 1200 + i)[0] * 1.5;
    auto fast = nearest_point(bvh, mesh, point);
    auto slow = brute_force_nearest(mesh, point);
    CHECK(fast.face == slow.face);
    CHECK(fast.distance_squared == slow.distance_squared);
  }
}

TEST_CASE("axis-aligned geometry survives box slab tests", "[bvh]") {
  // a cube's faces lie exactly on node boundaries; padding keeps them hittable
  auto cube = make_unit_cube();
  auto bvh = build_bvh(cube);
  for (auto i = 0; i < 200; i++) {
    auto target = testutil::random_points(1, 77 + i, {-0.45, -0.45, -0.45},
                                          {0.45, 0.45, 0.45})[0];
    auto ray = Ray{{target.x, target.y, 3.0}, {0, 0, -1}};
    auto hit = ray_intersect(bvh, cube, ray);
    REQUIRE(hit);
    CHECK(hit->point.z == Catch::Approx(0.5).margin(1e-9));
  }
}

TEST_CASE("crossing parity separates inside from outside", "[bvh]") {
  auto cube = make_unit_cube();
  auto bvh = build_bvh(cube);
  auto inside = count_crossings(bvh, cube, Vec3{0.1, 0.05, -0.2}, Vec3{1, 0, 0});
  CHECK(inside.clean);
  CHECK(inside.count % 2 == 1);
  auto outside = count_crossings(bvh, cube, Vec3{2, 0.05, 0}, Vec3{1, 0, 0});
  CHECK(outside.clean);
  CHECK(outside.count % 2 == 0);
  // a ray brushing an edge is flagged instead of silently miscounted
  auto grazing = count_crossings(bvh, cube, Vec3{-2, 0.5, 0.5}, Vec3{1, 0, 0});
  CHECK(!grazing.clean);
}

TEST_CASE("tree layout is deterministic", "[bvh]") {
  auto mesh = make_icosphere(2, 1.0);
  auto a = build_bvh(mesh);
  auto b = build_bvh(mesh);
  CHECK(a.face_order == b.face_order);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (auto i = size_t{0}; i < a.nodes.size(); i++) {
    CHECK(a.nodes[i].start == b.nodes[i].start);
    CHECK(a.nodes[i].count == b.nodes[i].count);
  }
}
