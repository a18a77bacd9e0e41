// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>

#include <meshtex/primitives.hpp>
#include <meshtex/sampling.hpp>

#include "test_utils.hpp"

using namespace meshtex;
using testutil::error_code_of;

namespace {

// Independent greedy scan that recomputes all distances from scratch each
// round instead of keeping a running minimum.
std::vector<int> fps_reference(const std::vector<Vec3>& points, int target, int start) {
  auto selected = std::vector<int>{start};
  while (int(selected.size()) < target) {
    auto best = -1;
    auto best_d2 = -1.0;
    for (auto i = 0; i < int(points.size()); i++) {
      auto d2 = std::numeric_limits<double>::infinity();
      for (auto s : selected) d2 = std::min(d2, distance_squared(points[i], points[s]));
      if (d2 > best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    selected.push_back(best);
  }
  return selected;
}

double distance_to_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  auto ab = b - a;
  auto t = clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
  return distance(p, a + ab * t);
}

}  // namespace

TEST_CASE("uniform samples lie on the surface with unit normals", "[sampling]") {
  auto cube = make_unit_cube();
  auto cloud = sample_uniform(cube, 3000, 42);
  REQUIRE(cloud.size() == 3000);
  for (auto i = 0; i < cloud.size(); i++) {
    auto p = cloud.positions[i];
    auto outermost = std::max({std::abs(p.x), std::abs(p.y), std::abs(p.z)});
    CHECK(outermost == Catch::Approx(0.5).margin(1e-12));  // on a cube face
    CHECK(length(cloud.normals[i]) == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("uniform sampling is seed-deterministic", "[sampling]") {
  auto sphere = make_icosphere(2, 1.0);
  auto a = sample_uniform(sphere, 500, 7);
  auto b = sample_uniform(sphere, 500, 7);
  auto c = sample_uniform(sphere, 500, 8);
  REQUIRE(a.size() == b.size());
  for (auto i = 0; i < a.size(); i++) {
    CHECK(a.positions[i].x == b.positions[i].x);
    CHECK(a.positions[i].y == b.positions[i].y);
    CHECK(a.positions[i].z == b.positions[i].z);
  }
  auto same = 0;
  for (auto i = 0; i < a.size(); i++) {
    if (a.positions[i].x == c.positions[i].x) same++;
  }
  CHECK(same < a.size() / 10);
}

TEST_CASE("per-face sample counts follow face area", "[sampling]") {
  // two triangles with area ratio 1:4
  auto mesh = TriMesh{};
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 0, 1}, {7, 0, 1}, {5, 2, 1}};
  mesh.faces = {{0, 1, 2}, {3, 4, 5}};
  auto cloud = sample_uniform(mesh, 10000, 3);
  auto near_second = 0;
  for (auto& p : cloud.positions) near_second += p.z > 0.5 ? 1 : 0;
  CHECK(double(near_second) / 10000 == Catch::Approx(0.8).margin(0.02));
}

TEST_CASE("cube face occupancy passes a chi-squared uniformity check", "[sampling]") {
  auto cube = make_unit_cube();
  auto n = 24000;
  auto cloud = sample_uniform(cube, n, 99);
  // bucket by dominant axis and sign: 6 equal-area faces
  auto counts = std::array<int, 6>{};
  for (auto& p : cloud.positions) {
    auto axis = 0;
    if (std::abs(p.y) >= std::abs(p.x) && std::abs(p.y) >= std::abs(p.z)) axis = 1;
    if (std::abs(p.z) >= std::abs(p.x) && std::abs(p.z) >= std::abs(p.y)) axis = 2;
    counts[size_t(axis * 2 + (p[axis] > 0 ? 1 : 0))]++;
  }
  auto expected = n / 6.0;
  auto chi2 = 0.0;
  for (auto count : counts) chi2 += (count - expected) * (count - expected) / expected;
  CHECK(chi2 < 15.086);  // df=5 critical value at p=0.01
}

TEST_CASE("sharp edge detection on a cube finds the twelve edges", "[sampling]") {
  auto set = detect_sharp_edges(make_unit_cube(), 30.0);
  REQUIRE(set.edges.size() == 12);
  for (auto& edge : set.edges) CHECK(edge.dihedral_deg == Catch::Approx(90.0));
}

TEST_CASE("boundary edges always count as sharp", "[sampling]") {
  auto set = detect_sharp_edges(make_quad(), 30.0);
  REQUIRE(set.edges.size() == 4);  // the diagonal is flat, the rim is boundary
  for (auto& edge : set.edges) CHECK(edge.dihedral_deg == 180.0);
}

TEST_CASE("threshold domain is validated", "[sampling]") {
  CHECK(error_code_of([] { detect_sharp_edges(make_unit_cube(), 0.0); }) ==
        errc::invalid_argument);
  CHECK(error_code_of([] { detect_sharp_edges(make_unit_cube(), 180.0); }) ==
        errc::invalid_argument);
}

TEST_CASE("importance samples stick to sharp edges", "[sampling]") {
  auto cube = make_unit_cube();
  auto sharp = detect_sharp_edges(cube, 30.0);
  auto cloud = sample_importance(cube, 1200, 5);
  for (auto i = 0; i < cloud.size(); i++) {
    auto closest = std::numeric_limits<double>::infinity();
    for (auto& edge : sharp.edges) {
      closest = std::min(closest, distance_to_segment(cloud.positions[i],
                                                      cube.vertices[edge.a],
                                                      cube.vertices[edge.b]));
    }
    REQUIRE(closest < 1e-9);
  }
}

TEST_CASE("importance normals bisect the adjacent faces", "[sampling]") {
  auto cube = make_unit_cube();
  auto cloud = sample_importance(cube, 400, 12);
  auto diagonal = 1.0 / std::sqrt(2.0);
  for (auto i = 0; i < cloud.size(); i++) {
    auto n = cloud.normals[i];
    // cube edge normals average two axis directions
    auto sorted = std::array<double, 3>{std::abs(n.x), std::abs(n.y), std::abs(n.z)};
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted[0] == Catch::Approx(0.0).margin(1e-12));
    CHECK(sorted[1] == Catch::Approx(diagonal).margin(1e-12));
    CHECK(sorted[2] == Catch::Approx(diagonal).margin(1e-12));
  }
}

TEST_CASE("meshes without sharp edges fall back to uniform sampling", "[sampling]") {
  auto sphere = make_icosphere(2, 1.0);
  auto fallback = false;
  auto cloud = sample_importance(sphere, 300, 21, 30.0, &fallback);
  CHECK(fallback);
  auto uniform = sample_uniform(sphere, 300, 21);
  for (auto i = 0; i < cloud.size(); i++) {
    CHECK(cloud.positions[i].x == uniform.positions[i].x);
    CHECK(cloud.positions[i].z == uniform.positions[i].z);
  }
}

TEST_CASE("farthest-point selection matches the reference scan", "[sampling]") {
  for (auto round = 0; round < 20; round++) {
    auto n = 40 + int(hash_rng(500, uint64_t(round), 0) % 160);
    auto target = 1 + int(hash_rng(500, uint64_t(round), 1) % uint64_t(n));
    auto points = testutil::random_points(n, 600 + uint64_t(round));
    auto start = farthest_point_start(uint64_t(round), n);
    auto fast = farthest_point_sampling_from(points, target, start);
    auto slow = fps_reference(points, target, start);
    REQUIRE(fast == slow);
  }
}

TEST_CASE("farthest-point selection on a line breaks ties low", "[sampling]") {
  auto points = std::vector<Vec3>{};
  for (auto i = 0; i < 10; i++) points.push_back({double(i), 0, 0});
  auto picks = farthest_point_sampling_from(points, 3, 0);
  CHECK(picks == std::vector<int>{0, 9, 4});  // 4 and 5 tie at distance 4; lower wins
}

TEST_CASE("farthest-point prefixes are stable", "[sampling]") {
  auto points = testutil::random_points(300, 8080);
  auto ten = farthest_point_sampling_from(points, 10, 5);
  auto fifty = farthest_point_sampling_from(points, 50, 5);
  CHECK(std::equal(ten.begin(), ten.end(), fifty.begin()));
}

TEST_CASE("farthest-point target cannot exceed the input", "[sampling]") {
  auto points = testutil::random_points(5, 1);
  CHECK(error_code_of([&] { farthest_point_sampling(points, 6, 0); }) ==
        errc::target_exceeds_input);
}

TEST_CASE("query sets concatenate uniform before importance", "[sampling]") {
  auto cube = make_unit_cube();
  auto uniform = sample_uniform(cube, 200, 1);
  auto importance = sample_importance(cube, 200, 2);
  auto set = build_point_query(uniform, importance, 16, 8, 3);
  REQUIRE(int(set.combined.size()) == 24);
  CHECK(testutil::near_vec(set.combined[0], set.uniform_query[0]));
  CHECK(testutil::near_vec(set.combined[16], set.importance_query[0]));
  // uniform queries sit on faces; importance queries are edge points
  for (auto& q : set.importance_query) {
    auto sorted = std::array<double, 3>{std::abs(q.x), std::abs(q.y), std::abs(q.z)};
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted[1] == Catch::Approx(0.5).margin(1e-12));
    CHECK(sorted[2] == Catch::Approx(0.5).margin(1e-12));
  }
}

TEST_CASE("point cloud export writes stable bytes", "[sampling]") {
  auto dir = testutil::TempDir("cloud_ply");
  auto cloud = sample_uniform(make_unit_cube(), 50, 4);
  auto a = dir.file("a.ply");
  auto b = dir.file("b.ply");
  save_point_cloud_ply(cloud, a);
  save_point_cloud_ply(cloud, b);
  CHECK(testutil::read_bytes(a) == testutil::read_bytes(b));
  CHECK(testutil::read_bytes(a).find("property double nx") != std::string::npos);
}
