// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "meshtex/bvh.hpp"
#include "meshtex/primitives.hpp"
#include "meshtex/texture.hpp"
#include "meshtex/uv_atlas.hpp"
#include "meshtex/view.hpp"
#include "test_utils.hpp"

using namespace meshtex;
using testutil::error_code_of;

namespace {

Image constant_image(int width, int height, Vec3 color) {
  auto image = Image(width, height, 3);
  for (auto y = 0; y < height; y++) {
    for (auto x = 0; x < width; x++) {
      for (auto c = 0; c < 3; c++) image.at(x, y, c) = color[c];
    }
  }
  return image;
}

Image checker_image(int size, int block) {
  auto image = Image(size, size, 3);
  for (auto y = 0; y < size; y++) {
    for (auto x = 0; x < size; x++) {
      auto value = ((x / block + y / block) % 2 == 0) ? 1.0 : 0.0;
      for (auto c = 0; c < 3; c++) image.at(x, y, c) = value;
    }
  }
  return image;
}

bool textures_identical(const TextureMap& a, const TextureMap& b) {
  if (a.width != b.width || a.height != b.height) return false;
  if (a.covered != b.covered) return false;
  for (auto i = size_t{0}; i < a.rgb.size(); i++) {
    if (a.rgb[i].x != b.rgb[i].x || a.rgb[i].y != b.rgb[i].y || a.rgb[i].z != b.rgb[i].z) {
      return false;
    }
  }
  return true;
}

TriMesh charted(TriMesh mesh) {
  mesh.uvs = make_per_face_chart_uvs(mesh);
  return mesh;
}

// Quad in the z=0 plane whose uv square maps to world as
// (u, v) -> (0.5 * (1 - 2v), 0.5 * (1 - 2u), 0). Under a straight-down view
// with half_width 0.5, texel centers of a size-matched atlas project exactly
// onto pixel centers of the view image.
TriMesh make_aligned_quad() {
  auto mesh = TriMesh{};
  mesh.vertices = {{0.5, 0.5, 0}, {0.5, -0.5, 0}, {-0.5, -0.5, 0}, {-0.5, 0.5, 0}};
  mesh.faces = {{0, 2, 1}, {0, 3, 2}};
  mesh.uvs = {{Vec2{0, 0}, Vec2{1, 1}, Vec2{1, 0}}, {Vec2{0, 0}, Vec2{0, 1}, Vec2{1, 1}}};
  return mesh;
}

}  // namespace

TEST_CASE("baking is invariant to the listed view order", "[texture]") {
  auto sphere = charted(make_icosphere(1));
  auto bvh = build_bvh(sphere);
  auto atlas = rasterize_uv_atlas(sphere, 64, 64);
  auto views = std::vector<ViewImage>{
      {{0, 20, 2.0, 1.5}, constant_image(32, 32, {1, 0, 0})},
      {{90, -20, 2.0, 1.5}, constant_image(32, 32, {0, 1, 0})},
      {{180, 45, 2.0, 1.5}, constant_image(32, 32, {0, 0, 1})}};
  auto reversed = std::vector<ViewImage>{views[2], views[1], views[0]};
  auto rotated = std::vector<ViewImage>{views[1], views[2], views[0]};

  auto a = bake(atlas, sphere, bvh, views);
  auto b = bake(atlas, sphere, bvh, reversed);
  auto c = bake(atlas, sphere, bvh, rotated);
  CHECK(a.covered_count() > 0);
  CHECK(textures_identical(a, b));
  CHECK(textures_identical(a, c));
}

TEST_CASE("baking is invariant across thread counts", "[texture]") {
  auto sphere = charted(make_icosphere(1));
  auto bvh = build_bvh(sphere);
  auto atlas = rasterize_uv_atlas(sphere, 64, 64);
  auto views = std::vector<ViewImage>{
      {{0, 0, 2.0, 1.5}, constant_image(32, 32, {0.8, 0.2, 0.1})},
      {{180, 30, 2.0, 1.5}, constant_image(32, 32, {0.1, 0.7, 0.3})}};
  auto serial = bake(atlas, sphere, bvh, views, 0.2, 4.0, 1);
  auto parallel = bake(atlas, sphere, bvh, views, 0.2, 4.0, 4);
  CHECK(textures_identical(serial, parallel));
}

TEST_CASE("an aligned straight-down view reproduces its image", "[texture]") {
  auto quad = make_aligned_quad();
  auto bvh = build_bvh(quad);
  auto atlas = rasterize_uv_atlas(quad, 64, 64);
  REQUIRE(atlas.occupied_count() == 64 * 64);

  auto checker = checker_image(64, 8);
  auto baked = bake(atlas, quad, bvh, {{Viewpoint{0, 90, 2.0, 0.5}, checker}});
  REQUIRE(baked.covered_count() == 64 * 64);

  auto max_diff = 0.0;
  for (auto y = 0; y < 64; y++) {
    for (auto x = 0; x < 64; x++) {
      for (auto c = 0; c < 3; c++) {
        max_diff = std::max(max_diff, std::abs(baked.rgb[baked.index(x, y)][c] - checker.at(x, y, c)));
      }
    }
  }
  CHECK(max_diff < 1e-9);
  CHECK(psnr(to_image(baked), checker) > 60.0);
}

TEST_CASE("views below the cosine threshold contribute nothing", "[texture]") {
  auto quad = make_quad();
  auto bvh = build_bvh(quad);
  auto atlas = rasterize_uv_atlas(quad, 16, 16);
  // Normal +z: a camera underneath sees the back face, a grazing camera
  // fails the threshold.
  auto below = bake(atlas, quad, bvh, {{Viewpoint{0, -90, 2.0, 1.5}, constant_image(16, 16, {1, 1, 1})}});
  CHECK(below.covered_count() == 0);
  auto grazing = bake(atlas, quad, bvh, {{Viewpoint{0, 0, 2.0, 1.5}, constant_image(16, 16, {1, 1, 1})}});
  CHECK(grazing.covered_count() == 0);
}

TEST_CASE("bake validates its view list", "[texture]") {
  auto quad = make_quad();
  auto bvh = build_bvh(quad);
  auto atlas = rasterize_uv_atlas(quad, 8, 8);
  CHECK(error_code_of([&] { bake(atlas, quad, bvh, {}); }) == errc::invalid_argument);
  auto gray = Image(8, 8, 1);
  CHECK(error_code_of([&] {
          bake(atlas, quad, bvh, {{Viewpoint{0, 90, 2.0, 1.5}, gray}});
        }) == errc::invalid_argument);
  auto views = std::vector<ViewImage>{
      {Viewpoint{0, 90, 2.0, 1.5}, constant_image(8, 8, {1, 0, 0})},
      {Viewpoint{0, 45, 2.0, 1.5}, constant_image(16, 16, {1, 0, 0})}};
  CHECK(error_code_of([&] { bake(atlas, quad, bvh, views); }) == errc::shape_mismatch);
  CHECK(error_code_of([&] {
          bake(atlas, quad, bvh, {{Viewpoint{0, 100, 2.0, 1.5}, constant_image(8, 8, {1, 0, 0})}});
        }) == errc::invalid_argument);
}

TEST_CASE("occluded texels stay uncovered and inherit the island fallback", "[texture]") {
  // Two parallel quads; the upper one shadows the lower from a straight-down
  // view, so the lower quad forms a texture island for inpainting. The upper
  // quad is oversized and nudged sideways so no shadow ray can graze its
  // border or its interior diagonal exactly.
  auto mesh = make_quad();
  auto upper = make_quad(1.0);
  for (auto& v : upper.vertices) v += Vec3{0.013, 0.007, 0.5};
  auto base_vertices = int(mesh.vertices.size());
  for (auto& v : upper.vertices) mesh.vertices.push_back(v);
  for (auto& f : upper.faces) {
    mesh.faces.push_back({f[0] + base_vertices, f[1] + base_vertices, f[2] + base_vertices});
  }
  mesh.uvs = make_per_face_chart_uvs(mesh);
  auto bvh = build_bvh(mesh);
  auto atlas = rasterize_uv_atlas(mesh, 64, 64);

  auto red = Vec3{1, 0, 0};
  auto baked = bake(atlas, mesh, bvh, {{Viewpoint{0, 90, 2.0, 1.5}, constant_image(32, 32, red)}});
  for (auto i = size_t{0}; i < atlas.texels.size(); i++) {
    auto& texel = atlas.texels[i];
    if (!texel.occupied()) continue;
    if (texel.face < 2) {
      CHECK(!baked.covered[i]);  // lower quad: ray to the camera hits the upper
    } else {
      CHECK(baked.covered[i]);
      CHECK(baked.rgb[i].x == Catch::Approx(1.0).margin(1e-12));
    }
  }

  auto filled = inpaint(mesh, atlas, baked);
  for (auto i = size_t{0}; i < atlas.texels.size(); i++) {
    if (!atlas.texels[i].occupied()) continue;
    CHECK(filled.covered[i]);
    // The lower quad shares no vertices with the textured component, so its
    // texels take the mesh-wide average of textured vertices: pure red.
    CHECK(std::abs(filled.rgb[i].x - red.x) < 1e-9);
    CHECK(std::abs(filled.rgb[i].y - red.y) < 1e-9);
    CHECK(std::abs(filled.rgb[i].z - red.z) < 1e-9);
  }
}

TEST_CASE("texel votes land on the matching uv corners", "[texture]") {
  auto quad = make_quad();
  auto atlas = rasterize_uv_atlas(quad, 4, 4);
  auto texture = TextureMap(4, 4);
  for (auto y = 0; y < 4; y++) {
    for (auto x = 0; x < 4; x++) {
      texture.rgb[texture.index(x, y)] = {x / 4.0, y / 4.0, 0.25};
      texture.covered[texture.index(x, y)] = 1;
    }
  }
  auto colors = texture_to_vertex_colors(quad, atlas, texture);
  REQUIRE(colors.rgb.size() == 4);
  // Each corner is within one texel of exactly one texel center, so the
  // vertex color equals that texel's color with no averaging.
  for (auto v = 0; v < 4; v++) CHECK(colors.textured[v]);
  CHECK(testutil::near_vec(colors.rgb[0], texture.rgb[texture.index(0, 0)]));
  CHECK(testutil::near_vec(colors.rgb[1], texture.rgb[texture.index(3, 0)]));
  CHECK(testutil::near_vec(colors.rgb[2], texture.rgb[texture.index(3, 3)]));
  CHECK(testutil::near_vec(colors.rgb[3], texture.rgb[texture.index(0, 3)]));

  SECTION("uncovered texels cast no votes") {
    auto sparse = TextureMap(4, 4);
    sparse.rgb[sparse.index(0, 0)] = {0.5, 0.5, 0.5};
    sparse.covered[sparse.index(0, 0)] = 1;
    auto partial = texture_to_vertex_colors(quad, atlas, sparse);
    CHECK(partial.textured[0]);
    CHECK(!partial.textured[1]);
    CHECK(!partial.textured[2]);
    CHECK(!partial.textured[3]);
  }
  SECTION("shape and uv preconditions") {
    auto small = TextureMap(2, 2);
    CHECK(error_code_of([&] { texture_to_vertex_colors(quad, atlas, small); }) ==
          errc::shape_mismatch);
    auto bare = quad;
    bare.uvs.clear();
    CHECK(error_code_of([&] { texture_to_vertex_colors(bare, atlas, texture); }) ==
          errc::missing_uvs);
  }
}

TEST_CASE("inpainting passes covered texels through untouched", "[texture]") {
  auto quad = make_quad();
  auto atlas = rasterize_uv_atlas(quad, 16, 16);
  auto texture = TextureMap(16, 16);
  for (auto y = 0; y < 16; y++) {
    for (auto x = 0; x < 16; x++) {
      texture.rgb[texture.index(x, y)] = {x / 16.0, y / 16.0, (x + y) / 32.0};
      texture.covered[texture.index(x, y)] = 1;
    }
  }
  auto filled = inpaint(quad, atlas, texture);
  CHECK(textures_identical(filled, texture));
}

TEST_CASE("inpainting spreads a constant seed color everywhere", "[texture]") {
  auto sphere = charted(make_icosphere(1));
  auto atlas = rasterize_uv_atlas(sphere, 64, 64);
  auto color = Vec3{0.25, 0.5, 0.75};
  auto texture = TextureMap(64, 64);
  // Seed only the charts of the first quarter of the faces.
  for (auto y = 0; y < 64; y++) {
    for (auto x = 0; x < 64; x++) {
      auto& texel = atlas.at(x, y);
      if (!texel.occupied() || texel.face >= sphere.face_count() / 4) continue;
      texture.rgb[texture.index(x, y)] = color;
      texture.covered[texture.index(x, y)] = 1;
    }
  }
  REQUIRE(texture.covered_count() > 0);
  auto filled = inpaint(sphere, atlas, texture);
  for (auto y = 0; y < 64; y++) {
    for (auto x = 0; x < 64; x++) {
      if (!atlas.at(x, y).occupied()) continue;
      auto index = filled.index(x, y);
      REQUIRE(filled.covered[index]);
      CHECK(std::abs(filled.rgb[index].x - color.x) < 1e-12);
      CHECK(std::abs(filled.rgb[index].y - color.y) < 1e-12);
      CHECK(std::abs(filled.rgb[index].z - color.z) < 1e-12);
    }
  }
}

TEST_CASE("inpainting needs at least one covered texel", "[texture]") {
  auto quad = make_quad();
  auto atlas = rasterize_uv_atlas(quad, 8, 8);
  auto empty = TextureMap(8, 8);
  CHECK(error_code_of([&] { inpaint(quad, atlas, empty); }) == errc::no_seed_texels);
}

TEST_CASE("texture map conversions preserve layout", "[texture]") {
  auto texture = TextureMap(2, 2);
  texture.rgb[0] = {0.1, 0.2, 0.3};
  texture.rgb[3] = {1, 1, 1};
  texture.covered[0] = 1;
  texture.covered[3] = 1;
  auto image = to_image(texture);
  CHECK(image.channels == 3);
  CHECK(image.at(0, 0, 1) == 0.2);
  CHECK(image.at(1, 1, 2) == 1.0);
  auto mask = coverage_mask(texture);
  CHECK(mask.channels == 1);
  CHECK(mask.at(0, 0, 0) == 1.0);
  CHECK(mask.at(1, 0, 0) == 0.0);
  CHECK(mask.at(1, 1, 0) == 1.0);
  CHECK(texture.covered_count() == 2);
}
