// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command line driver. Every subcommand prints a JSON run report on stdout
// that includes the fully resolved parameter set and wall-clock timings;
// --report writes the same document minus the timings block, so a rerun with
// the same seed produces byte-identical files.
//
// Exit codes: 0 success, 2 invalid arguments (message names the offending
// flag), 1 runtime failure (missing files, bad data, unreachable targets).

#include <meshtex/meshtex.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

using namespace meshtex;
using json = nlohmann::ordered_json;

namespace {

// Bad flag values discovered after CLI11 parsing; mapped to exit code 2.
struct flag_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_flag(bool ok, const std::string& message) {
  if (!ok) throw flag_error(message);
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  double seconds() const {
    auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(now - start).count();
  }
};

void write_text(const std::string& path, const std::string& content) {
  auto file = std::ofstream(path, std::ios::binary);
  check(file.good(), errc::io_error, "cannot open " + path + " for writing");
  file << content;
  check(file.good(), errc::io_error, "write failed: " + path);
}

// Stdout gets the report with timings; the optional --report file gets the
// deterministic version without them.
void emit_report(json report, const std::string& report_path, json timings) {
  if (!report_path.empty()) write_text(report_path, report.dump(2) + "\n");
  report["timings"] = std::move(timings);
  std::cout << report.dump(2) << "\n";
}

bool has_suffix(const std::string& text, const std::string& suffix) {
  if (text.size() < suffix.size()) return false;
  auto tail = text.substr(text.size() - suffix.size());
  for (auto& c : tail) c = char(std::tolower(static_cast<unsigned char>(c)));
  return tail == suffix;
}

std::string default_mask_path(const std::string& texture_path) {
  return texture_path.substr(0, texture_path.size() - 4) + "_mask.png";
}

json view_to_json(const Viewpoint& view) {
  return json{{"azimuth", view.azimuth_deg},
              {"elevation", view.elevation_deg},
              {"distance", view.distance},
              {"half_width", view.half_width}};
}

Viewpoint view_from_json(const json& entry, const std::string& path) {
  check(entry.is_object() && entry.contains("azimuth") && entry.contains("elevation"),
        errc::parse_error, path + ": view entries need azimuth and elevation");
  auto view = Viewpoint{};
  view.azimuth_deg = entry.at("azimuth").get<double>();
  view.elevation_deg = entry.at("elevation").get<double>();
  view.distance = entry.value("distance", 2.0);
  view.half_width = entry.value("half_width", 1.5);
  return view;
}

// Accepts either a bare array of views or an object with a "views" key (the
// shape select-views writes).
std::vector<Viewpoint> load_views_file(const std::string& path) {
  auto file = std::ifstream(path);
  check(file.good(), errc::file_not_found, path);
  auto doc = json{};
  try {
    doc = json::parse(file);
  } catch (const std::exception& parse) {
    raise(errc::parse_error, path + ": " + parse.what());
  }
  auto list = doc.is_array() ? doc : doc.value("views", json::array());
  check(list.is_array() && !list.empty(), errc::parse_error, path + ": no views found");
  auto views = std::vector<Viewpoint>{};
  for (auto& entry : list) views.push_back(view_from_json(entry, path));
  return views;
}

std::string view_image_path(const std::string& directory, int index) {
  char name[32];
  std::snprintf(name, sizeof(name), "view_%03d.png", index);
  return (std::filesystem::path(directory) / name).string();
}

Image load_rgb_image(const std::string& path) {
  auto image = load_png(path);
  if (image.channels == 3) return image;
  auto rgb = Image(image.width, image.height, 3);
  for (auto i = 0; i < image.width * image.height; i++) {
    for (auto c = 0; c < 3; c++) rgb.pixels[size_t(i) * 3 + c] = image.pixels[size_t(i)];
  }
  return rgb;
}

struct PreparedMesh {
  TriMesh mesh;
  bool generated_charts = false;
};

// Meshes without UV coordinates get the deterministic per-face chart layout,
// so select-views, bake, inpaint, and lowpoly all agree on the same atlas for
// the same mesh file.
PreparedMesh load_prepared_mesh(const std::string& path, bool normalize) {
  auto prepared = PreparedMesh{load_mesh(path)};
  if (normalize) prepared.mesh = normalize_to_unit_cube(prepared.mesh);
  if (!prepared.mesh.has_uvs()) {
    prepared.mesh.uvs = make_per_face_chart_uvs(prepared.mesh);
    prepared.generated_charts = true;
  }
  return prepared;
}

PointCloud concat_clouds(const PointCloud& a, const PointCloud& b) {
  auto out = a;
  out.positions.insert(out.positions.end(), b.positions.begin(), b.positions.end());
  out.normals.insert(out.normals.end(), b.normals.begin(), b.normals.end());
  return out;
}

PointCloud select_points(const PointCloud& cloud, const std::vector<int>& indices) {
  auto out = PointCloud{};
  for (auto index : indices) {
    out.positions.push_back(cloud.positions[size_t(index)]);
    out.normals.push_back(cloud.normals[size_t(index)]);
  }
  return out;
}

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

// ---------------------------------------------------------------- sample --

struct SampleOptions {
  std::string mesh;
  std::string out;
  std::string report;
  int uniform = 8000;
  int importance = 8000;
  int fps = 0;
  double dihedral = 30.0;
  uint64_t seed = 0;
  bool normalize = false;
};

int run_sample(const SampleOptions& options) {
  require_flag(options.uniform >= 0, "--uniform must be >= 0");
  require_flag(options.importance >= 0, "--importance must be >= 0");
  require_flag(options.fps >= 0, "--fps must be >= 0");
  require_flag(options.uniform + options.importance > 0,
               "--uniform and --importance cannot both be zero");
  require_flag(options.dihedral > 0 && options.dihedral < 180,
               "--dihedral must lie in (0, 180)");
  require_flag(has_suffix(options.out, ".ply"), "--out must be a .ply path");

  // Split the FPS budget between the two clouds, uniform side rounding up;
  // a missing cloud hands its share to the other.
  auto fps_uniform = 0, fps_importance = 0;
  if (options.fps > 0) {
    if (options.uniform > 0 && options.importance > 0) {
      fps_importance = options.fps / 2;
      fps_uniform = options.fps - fps_importance;
    } else if (options.uniform > 0) {
      fps_uniform = options.fps;
    } else {
      fps_importance = options.fps;
    }
    require_flag(fps_uniform <= options.uniform && fps_importance <= options.importance,
                 "--fps exceeds the available samples per cloud");
  }

  auto total = Timer{};
  auto mesh = load_mesh(options.mesh);
  if (options.normalize) mesh = normalize_to_unit_cube(mesh);

  auto uniform = PointCloud{};
  if (options.uniform > 0) uniform = sample_uniform(mesh, options.uniform, options.seed);
  auto importance = PointCloud{};
  auto uniform_fallback = false;
  if (options.importance > 0) {
    importance = sample_importance(mesh, options.importance, options.seed + 1,
                                   options.dihedral, &uniform_fallback);
  }

  auto output = PointCloud{};
  if (options.fps > 0) {
    if (fps_uniform > 0) {
      output = select_points(uniform,
                             farthest_point_sampling(uniform.positions, fps_uniform, options.seed));
    }
    if (fps_importance > 0) {
      output = concat_clouds(
          output, select_points(importance, farthest_point_sampling(importance.positions,
                                                                    fps_importance, options.seed)));
    }
  } else {
    output = concat_clouds(uniform, importance);
  }
  save_point_cloud_ply(output, options.out);

  auto report = json{
      {"command", "sample"},
      {"parameters",
       {{"mesh", options.mesh},
        {"uniform", options.uniform},
        {"importance", options.importance},
        {"fps", options.fps},
        {"dihedral", options.dihedral},
        {"seed", options.seed},
        {"normalize", options.normalize},
        {"out", options.out}}},
      {"metrics",
       {{"uniform_count", uniform.size()},
        {"importance_count", importance.size()},
        {"importance_uniform_fallback", uniform_fallback},
        {"fps_uniform", fps_uniform},
        {"fps_importance", fps_importance},
        {"output_count", output.size()}}},
      {"outputs", {{"point_cloud", options.out}}}};
  emit_report(report, options.report, {{"total_s", total.seconds()}});
  return 0;
}

// -------------------------------------------------------------- sdf-grid --

struct SdfGridOptions {
  std::string mesh;
  std::string out;
  std::string report;
  int dims = 64;
  std::vector<double> domain = {-1.0, 1.0};
  int threads = 0;
  bool normalize = true;
};

int run_sdf_grid(const SdfGridOptions& options) {
  require_flag(options.dims >= 2, "--dims must be >= 2");
  require_flag(options.domain.size() == 2 && options.domain[0] < options.domain[1],
               "--domain needs two values lo < hi");
  require_flag(options.threads >= 0, "--threads must be >= 0");

  auto total = Timer{};
  auto mesh = load_mesh(options.mesh);
  if (options.normalize) mesh = normalize_to_unit_cube(mesh);
  auto lo = options.domain[0], hi = options.domain[1];
  auto domain = Box3{{lo, lo, lo}, {hi, hi, hi}};
  auto grid = sample_sdf_grid(mesh, {options.dims, options.dims, options.dims}, domain,
                              options.threads);
  save_sdf_grid(grid, options.out);

  auto inside = int64_t{0};
  auto lowest = grid.values[0], highest = grid.values[0];
  for (auto value : grid.values) {
    inside += value < 0 ? 1 : 0;
    lowest = std::min(lowest, value);
    highest = std::max(highest, value);
  }
  auto report = json{
      {"command", "sdf-grid"},
      {"parameters",
       {{"mesh", options.mesh},
        {"dims", options.dims},
        {"domain", options.domain},
        {"normalize", options.normalize},
        {"threads", options.threads},
        {"out", options.out}}},
      {"metrics",
       {{"spacing", grid.spacing},
        {"origin", vec3_json(grid.origin)},
        {"value_min", lowest},
        {"value_max", highest},
        {"inside_fraction", double(inside) / double(grid.values.size())}}},
      {"outputs", {{"grid", options.out}}}};
  emit_report(report, options.report, {{"total_s", total.seconds()}});
  return 0;
}

// --------------------------------------------------------------- extract --

struct ExtractOptions {
  std::string grid;
  std::string out;
  std::string report;
  double iso = 0.0;
};

int run_extract(const ExtractOptions& options) {
  require_flag(has_suffix(options.out, ".obj"), "--out must be a .obj path");

  auto total = Timer{};
  auto grid = load_sdf_grid(options.grid);
  auto mesh = marching_cubes(grid, options.iso);
  save_obj(mesh, options.out);

  auto report = json{
      {"command", "extract"},
      {"parameters", {{"grid", options.grid}, {"iso", options.iso}, {"out", options.out}}},
      {"metrics",
       {{"vertices", mesh.vertex_count()},
        {"faces", mesh.face_count()},
        {"watertight", is_watertight(mesh)},
        {"signed_volume", signed_volume(mesh)}}},
      {"outputs", {{"mesh", options.out}}}};
  emit_report(report, options.report, {{"total_s", total.seconds()}});
  return 0;
}

// ------------------------------------------------------------------- iou --

struct IouOptions {
  std::string a;
  std::string b;
  std::string report;
  std::string mode = "volume";
  int64_t samples = 200000;
  uint64_t seed = 0;
  double band = 0.0;  // 0 = derive from the combined bounding box
};

int run_iou(const IouOptions& options) {
  require_flag(options.samples >= 1, "--samples must be >= 1");
  require_flag(options.band >= 0, "--band must be >= 0");

  auto total = Timer{};
  auto mesh_a = load_mesh(options.a);
  auto mesh_b = load_mesh(options.b);
  auto value = 0.0;
  auto band_used = 0.0;
  if (options.mode == "volume") {
    value = volume_iou(mesh_a, mesh_b, options.samples, options.seed);
  } else {
    band_used = options.band > 0 ? options.band : default_surface_band(mesh_a, mesh_b);
    value = surface_iou(mesh_a, mesh_b, band_used, options.samples, options.seed);
  }

  auto metrics = json{{"iou", value}};
  if (options.mode == "surface") metrics["band_used"] = band_used;
  auto report = json{{"command", "iou"},
                     {"parameters",
                      {{"a", options.a},
                       {"b", options.b},
                       {"mode", options.mode},
                       {"samples", options.samples},
                       {"seed", options.seed},
                       {"band", options.band}}},
                     {"metrics", metrics},
                     {"outputs", json::object()}};
  emit_report(report, options.report, {{"total_s", total.seconds()}});
  return 0;
}

// ---------------------------------------------------------- select-views --

struct SelectViewsOptions {
  std::string mesh;
  std::string out;
  std::string report;
  std::string candidates;
  int atlas = 512;
  int nmax = 12;
  int nfixed = 4;
  double cos_threshold = 0.2;
  int threads = 0;
  bool normalize = false;
};

void validate_select_flags(const SelectViewsOptions& options) {
  require_flag(options.atlas >= 1, "--atlas must be >= 1");
  require_flag(options.nmax >= 1, "--nmax must be >= 1");
  require_flag(options.nfixed >= 0, "--nfixed must be >= 0");
  require_flag(options.nfixed <= options.nmax,
               "--nfixed (" + std::to_string(options.nfixed) + ") must not exceed --nmax (" +
                   std::to_string(options.nmax) + ")");
  require_flag(options.cos_threshold >= 0 && options.cos_threshold < 1,
               "--cos-threshold must lie in [0, 1)");
  require_flag(options.threads >= 0, "--threads must be >= 0");
}

json selection_json(const ViewSet& set) {
  auto views = json::array();
  for (auto& view : set.selected) views.push_back(view_to_json(view));
  auto valid = std::max(set.valid_total, 1);
  return json{{"views", views},
              {"gains", set.gains},
              {"chosen", set.chosen},
              {"covered", set.covered_total},
              {"valid", set.valid_total},
              {"coverage", double(set.covered_total) / double(valid)}};
}

int run_select_views(const SelectViewsOptions& options) {
  validate_select_flags(options);

  auto total = Timer{};
  auto prepared = load_prepared_mesh(options.mesh, options.normalize);
  auto candidates = options.candidates.empty() ? default_candidate_views()
                                               : load_views_file(options.candidates);
  auto bvh = build_bvh(prepared.mesh);
  auto atlas = rasterize_uv_atlas(prepared.mesh, options.atlas, options.atlas);
  auto set = greedy_select(candidates, prepared.mesh, bvh, atlas, options.nfixed, options.nmax,
                           options.cos_threshold, options.threads);
  auto selection = selection_json(set);
  write_text(options.out, selection.dump(2) + "\n");

  auto report = json{{"command", "select-views"},
                     {"parameters",
                      {{"mesh", options.mesh},
                       {"atlas", options.atlas},
                       {"nmax", options.nmax},
                       {"nfixed", options.nfixed},
                       {"cos_threshold", options.cos_threshold},
                       {"candidates", options.candidates},
                       {"normalize", options.normalize},
                       {"threads", options.threads},
                       {"out", options.out}}},
                     {"metrics",
                      {{"generated_charts", prepared.generated_charts},
                       {"candidate_count", int(candidates.size())},
                       {"gains", set.gains},
                       {"chosen", set.chosen},
                       {"covered", set.covered_total},
                       {"valid", set.valid_total},
                       {"coverage", selection["coverage"]}}},
                     {"outputs", {{"views", options.out}}}};
  emit_report(report, options.report, {{"total_s", total.seconds()}});
  return 0;
}

// ------------------------------------------------------------------ bake --

struct BakeOptions {
  std::string mesh;
  std::string views;
  std::string images;
  std::string out;
  std::string out_mask;
  std::string report;
  int size = 1024;
  double cos_threshold = 0.2;
  double exponent = 4.0;
  int threads = 0;
};

std::vector<ViewImage> load_view_images(const std::vector<Viewpoint>& views,
                                        const std::string& directory) {
  auto entries = std::vector<ViewImage>{};
  for (auto i = 0; i < int(views.size()); i++) {
    entries.push_back({views[i], load_rgb_image(view_image_path(directory, i))});
  }
  return entries;
}

int run_bake(const BakeOptions& options) {
  require_flag(options.size >= 1, "--size must be >= 1");
  require_flag(options.cos_threshold >= 0 && options.cos_threshold < 1,
               "--cos-threshold must lie in [0, 1)");
  require_flag(options.exponent >= 0, "--exponent must be >= 0");
  require_flag(options.threads >= 0, "--threads must be >= 0");
  require_flag(has_suffix(options.out, ".png"), "--out must be a .png path");
  auto mask_path = options.out_mask.empty() ? default_mask_path(options.out) : options.out_mask;

  auto total = Timer{};
  auto prepared = load_prepared_mesh(options.mesh, false);
  auto views = load_views_file(options.views);
  auto entries = load_view_images(views, options.images);
  auto bvh = build_bvh(prepared.mesh);
  auto atlas = rasterize_uv_atlas(prepared.mesh, options.size, options.size);
  auto texture = bake(atlas, prepared.mesh, bvh, entries, options.cos_threshold,
                      options.exponent, options.threads);
  save_png(to_image(texture), options.out);
  save_png(coverage_mask(texture), mask_path);

  auto valid = atlas.occupied_count();
  auto report = json{{"command", "bake"},
                     {"parameters",
                      {{"mesh", options.mesh},
                       {"views", options.views},
                       {"images", options.images},
                       {"size", options.size},
                       {"cos_threshold", options.cos_threshold},
                       {"exponent", options.exponent},
                       {"threads", options.threads},
                       {"out", options.out},
                       {"out_mask", mask_path}}},
                     {"metrics",
                      {{"generated_charts", prepared.generated_charts},
                       {"view_count", int(views.size())},
                       {"covered", texture.covered_count()},
                       {"valid", valid},
                       {"coverage", double(texture.covered_count()) / std::max(valid, 1)}}},
                     {"outputs", {{"texture", options.out}, {"mask", mask_path}}}};
  emit_report(report, options.report, {{"total_s", total.seconds()}});
  return 0;
}

// --------------------------------------------------------------- inpaint --

struct InpaintOptions {
  std::string mesh;
  std::string texture;
  std::string mask;
  std::string out;
  std::string out_mask;
  std::string report;
};

TextureMap texture_from_files(const std::string& texture_path, const std::string& mask_path) {
  auto image = load_rgb_image(texture_path);
  auto texture = TextureMap(image.width, image.height);
  for (auto i = size_t{0}; i < texture.rgb.size(); i++) {
    texture.rgb[i] = {image.pixels[i * 3], image.pixels[i * 3 + 1], image.pixels[i * 3 + 2]};
  }
  if (!mask_path.empty()) {
    auto mask = load_png(mask_path);
    check(mask.channels == 1, errc::invalid_argument, "mask must be a single-channel png");
    check(mask.width == image.width && mask.height == image.height, errc::shape_mismatch,
          "mask and texture sizes differ");
    for (auto i = size_t{0}; i < texture.covered.size(); i++) {
      texture.covered[i] = mask.pixels[i] > 0.5 ? 1 : 0;
    }
  }
  return texture;
}

int run_inpaint(const InpaintOptions& options) {
  require_flag(has_suffix(options.out, ".png"), "--out must be a .png path");
  auto mask_out = options.out_mask.empty() ? default_mask_path(options.out) : options.out_mask;

  auto total = Timer{};
  auto prepared = load_prepared_mesh(options.mesh, false);
  auto texture = texture_from_files(options.texture, options.mask);
  auto atlas = rasterize_uv_atlas(prepared.mesh, texture.width, texture.height);
  auto seeded = texture.covered_count();
  auto filled = inpaint(prepared.mesh, atlas, texture);
  save_png(to_image(filled), options.out);
  save_png(coverage_mask(filled), mask_out);

  auto report = json{{"command", "inpaint"},
                     {"parameters",
                      {{"mesh", options.mesh},
                       {"texture", options.texture},
                       {"mask", options.mask},
                       {"out", options.out},
                       {"out_mask", mask_out}}},
                     {"metrics",
                      {{"generated_charts", prepared.generated_charts},
                       {"seed_texels", seeded},
                       {"filled_texels", filled.covered_count() - seeded},
                       {"covered", filled.covered_count()},
                       {"valid", atlas.occupied_count()}}},
                     {"outputs", {{"texture", options.out}, {"mask", mask_out}}}};
  emit_report(report, options.report, {{"total_s", total.seconds()}});
  return 0;
}

// --------------------------------------------------------------- lowpoly --

struct LowpolyOptions {
  std::string mesh;
  std::string texture;
  std::string mask;
  std::string out;
  std::string out_texture;
  std::string out_mask;
  std::string report;
  int target_faces = 500;
  int size = 512;
};

int run_lowpoly(const LowpolyOptions& options) {
  require_flag(options.target_faces >= 2, "--target-faces must be >= 2");
  require_flag(options.size >= 1, "--size must be >= 1");
  require_flag(has_suffix(options.out, ".obj"), "--out must be a .obj path");
  require_flag(has_suffix(options.out_texture, ".png"), "--out-texture must be a .png path");
  auto mask_out =
      options.out_mask.empty() ? default_mask_path(options.out_texture) : options.out_mask;

  auto total = Timer{};
  auto prepared = load_prepared_mesh(options.mesh, false);
  auto texture = texture_from_files(options.texture, options.mask);
  auto atlas = rasterize_uv_atlas(prepared.mesh, texture.width, texture.height);
  if (options.mask.empty()) {
    // No mask: trust every valid texel (the inpaint output is fully covered).
    for (auto i = size_t{0}; i < texture.covered.size(); i++) {
      texture.covered[i] = atlas.texels[i].occupied() ? 1 : 0;
    }
  }

  auto low = qem_decimate(prepared.mesh, options.target_faces);
  auto colors = transfer_texture(prepared.mesh, atlas, texture, low);
  low.uvs = make_per_face_chart_uvs(low);
  auto rebaked = rebake_lowpoly(low, colors, options.size);
  save_obj(low, options.out);
  save_png(to_image(rebaked), options.out_texture);
  save_png(coverage_mask(rebaked), mask_out);

  auto report = json{{"command", "lowpoly"},
                     {"parameters",
                      {{"mesh", options.mesh},
                       {"texture", options.texture},
                       {"mask", options.mask},
                       {"target_faces", options.target_faces},
                       {"size", options.size},
                       {"out", options.out},
                       {"out_texture", options.out_texture},
                       {"out_mask", mask_out}}},
                     {"metrics",
                      {{"input_faces", prepared.mesh.face_count()},
                       {"output_faces", low.face_count()},
                       {"output_vertices", low.vertex_count()},
                       {"edge_manifold", is_edge_manifold(low)}}},
                     {"outputs",
                      {{"mesh", options.out},
                       {"texture", options.out_texture},
                       {"mask", mask_out}}}};
  emit_report(report, options.report, {{"total_s", total.seconds()}});
  return 0;
}

// ------------------------------------------------------------- flow-demo --

struct FlowDemoOptions {
  std::string report;
  int steps = 500;
  double lr = 0.05;
  uint64_t seed = 1;
  int hidden = 16;
  int batch = 256;
  int euler_steps = 8;
  int eval_samples = 4096;
};

int run_flow_demo(const FlowDemoOptions& options) {
  require_flag(options.steps >= 1, "--steps must be >= 1");
  require_flag(options.lr > 0, "--lr must be positive");
  require_flag(options.hidden >= 1, "--hidden must be >= 1");
  require_flag(options.batch >= 2, "--batch must be >= 2");
  require_flag(options.euler_steps >= 1, "--euler-steps must be >= 1");
  require_flag(options.eval_samples >= 2, "--eval-samples must be >= 2");

  auto total = Timer{};
  // Toy task: transport a standard 2D gaussian to the same gaussian shifted
  // to (3, 0). The straight-path velocity target is the constant (3, 0).
  auto shift = Eigen::RowVector2d(3.0, 0.0);
  auto rng = Rng(options.seed);
  auto x0 = Eigen::MatrixXd(options.batch, 2);
  for (auto i = 0; i < options.batch; i++) {
    for (auto j = 0; j < 2; j++) x0(i, j) = rng.next_gaussian();
  }
  auto x1 = (x0.rowwise() + shift).eval();
  auto t = Eigen::VectorXd(options.batch);
  for (auto i = 0; i < options.batch; i++) t[i] = rng.next_double();
  auto batch = flow_path(x0, x1, t);

  auto model = make_tiny_mlp(2, 0, options.hidden, options.seed + 1);
  auto losses = std::vector<double>{};
  for (auto step = 0; step < options.steps; step++) {
    auto [next, loss] = mlp_train_step(model, batch, options.lr);
    model = next;
    losses.push_back(loss);
  }
  auto final_loss = flow_loss(model, batch);

  auto eval = Eigen::MatrixXd(options.eval_samples, 2);
  for (auto i = 0; i < options.eval_samples; i++) {
    for (auto j = 0; j < 2; j++) eval(i, j) = rng.next_gaussian();
  }
  auto condition = Eigen::MatrixXd(options.eval_samples, 0);
  auto endpoints = euler_sample(model, eval, condition, options.euler_steps);
  auto mean = endpoints.colwise().mean().eval();
  auto centered = (endpoints.rowwise() - mean).eval();
  auto stddev = (centered.array().square().colwise().sum() / (options.eval_samples - 1))
                    .sqrt()
                    .eval();

  // Thin the loss curve to every tenth step plus the last.
  auto curve = json::array();
  for (auto step = 0; step < int(losses.size()); step += 10) {
    curve.push_back(json{{"step", step}, {"loss", losses[size_t(step)]}});
  }
  curve.push_back(json{{"step", int(losses.size())}, {"loss", final_loss}});

  auto report = json{{"command", "flow-demo"},
                     {"parameters",
                      {{"steps", options.steps},
                       {"lr", options.lr},
                       {"seed", options.seed},
                       {"hidden", options.hidden},
                       {"batch", options.batch},
                       {"euler_steps", options.euler_steps},
                       {"eval_samples", options.eval_samples}}},
                     {"metrics",
                      {{"initial_loss", losses.front()},
                       {"final_loss", final_loss},
                       {"loss_ratio", final_loss / losses.front()},
                       {"endpoint_mean", {mean[0], mean[1]}},
                       {"endpoint_std", {stddev[0], stddev[1]}},
                       {"loss_curve", curve}}},
                     {"outputs", json::object()}};
  emit_report(report, options.report, {{"total_s", total.seconds()}});
  return 0;
}

// ------------------------------------------------------------ attn-check --

struct AttnCheckOptions {
  std::string report;
  int tokens = 5;
  int ref_keys = 7;
  int mv_keys = 6;
  int dim = 8;
  uint64_t seed = 3;
  double lambda_ref = 0.7;
  double lambda_mv = 0.4;
};

int run_attn_check(const AttnCheckOptions& options) {
  require_flag(options.tokens >= 1, "--tokens must be >= 1");
  require_flag(options.ref_keys >= 1, "--ref-keys must be >= 1");
  require_flag(options.mv_keys >= 1, "--mv-keys must be >= 1");
  require_flag(options.dim >= 1, "--dim must be >= 1");

  auto total = Timer{};
  auto rng = Rng(options.seed);
  auto random_matrix = [&](int rows, int cols) {
    auto m = Eigen::MatrixXd(rows, cols);
    for (auto i = 0; i < rows; i++) {
      for (auto j = 0; j < cols; j++) m(i, j) = rng.next_gaussian();
    }
    return m;
  };
  auto z = random_matrix(options.tokens, options.dim);
  auto k_ref = random_matrix(options.ref_keys, options.dim);
  auto v_ref = random_matrix(options.ref_keys, options.dim);
  auto k_mv = random_matrix(options.mv_keys, options.dim);
  auto v_mv = random_matrix(options.mv_keys, options.dim);

  // Disabled cross-attention must leave the tokens bitwise untouched.
  auto identity = multi_task_attention(z, z, k_ref, v_ref, z, k_mv, v_mv, 0.0, 0.0);
  auto identity_exact = (identity.array() == z.array()).all();

  // Attention rows are convex weights: against all-ones values the output is
  // exactly the row sums of the softmax.
  auto ones = Eigen::MatrixXd::Ones(options.ref_keys, 1).eval();
  auto row_sums = sdpa(z, k_ref, ones);
  auto row_sum_error = (row_sums.array() - 1.0).abs().maxCoeff();

  // The fused update is linear in both gate weights.
  auto ref_only = (multi_task_attention(z, z, k_ref, v_ref, z, k_mv, v_mv, 1.0, 0.0) - z).eval();
  auto mv_only = (multi_task_attention(z, z, k_ref, v_ref, z, k_mv, v_mv, 0.0, 1.0) - z).eval();
  auto combined = multi_task_attention(z, z, k_ref, v_ref, z, k_mv, v_mv, options.lambda_ref,
                                       options.lambda_mv);
  auto expected = (z + options.lambda_ref * ref_only + options.lambda_mv * mv_only).eval();
  auto linearity_error = (combined - expected).array().abs().maxCoeff();

  auto identity_pass = identity_exact;
  auto row_sum_pass = row_sum_error <= 1e-9;
  auto linearity_pass = linearity_error <= 1e-12;
  auto all_pass = identity_pass && row_sum_pass && linearity_pass;

  auto checks = json::array();
  checks.push_back(json{{"name", "zero_gates_identity"},
                        {"pass", identity_pass},
                        {"max_error", identity_exact ? 0.0 : (identity - z).array().abs().maxCoeff()}});
  checks.push_back(
      json{{"name", "softmax_rows_sum_to_one"}, {"pass", row_sum_pass}, {"max_error", row_sum_error}});
  checks.push_back(json{
      {"name", "gate_linearity"}, {"pass", linearity_pass}, {"max_error", linearity_error}});

  auto report = json{{"command", "attn-check"},
                     {"parameters",
                      {{"tokens", options.tokens},
                       {"ref_keys", options.ref_keys},
                       {"mv_keys", options.mv_keys},
                       {"dim", options.dim},
                       {"seed", options.seed},
                       {"lambda_ref", options.lambda_ref},
                       {"lambda_mv", options.lambda_mv}}},
                     {"metrics", {{"checks", checks}, {"all_pass", all_pass}}},
                     {"outputs", json::object()}};
  emit_report(report, options.report, {{"total_s", total.seconds()}});
  return all_pass ? 0 : 1;
}

// -------------------------------------------------------------- pipeline --

struct PipelineOptions {
  std::string mesh;
  std::string images;
  std::string out_dir;
  std::string report;
  std::string candidates;
  int atlas = 512;
  int size = 1024;
  int nmax = 12;
  int nfixed = 4;
  double cos_threshold = 0.2;
  double exponent = 4.0;
  int threads = 0;
  bool normalize = false;
};

// Chains select-views, bake, and inpaint over one mesh. The image directory
// holds one view_%03d.png per pool entry, fixed base views first and then the
// candidate list in order; the stage picks the files of the selected views.
int run_pipeline(const PipelineOptions& options) {
  auto select = SelectViewsOptions{};
  select.atlas = options.atlas;
  select.nmax = options.nmax;
  select.nfixed = options.nfixed;
  select.cos_threshold = options.cos_threshold;
  select.threads = options.threads;
  validate_select_flags(select);
  require_flag(options.size >= 1, "--size must be >= 1");
  require_flag(options.exponent >= 0, "--exponent must be >= 0");

  auto total = Timer{};
  std::filesystem::create_directories(options.out_dir);
  auto out_path = [&](const char* name) {
    return (std::filesystem::path(options.out_dir) / name).string();
  };

  auto prepared = load_prepared_mesh(options.mesh, options.normalize);
  auto candidates = options.candidates.empty() ? default_candidate_views()
                                               : load_views_file(options.candidates);
  auto bvh = build_bvh(prepared.mesh);
  auto atlas = rasterize_uv_atlas(prepared.mesh, options.atlas, options.atlas);

  auto select_timer = Timer{};
  auto set = greedy_select(candidates, prepared.mesh, bvh, atlas, options.nfixed, options.nmax,
                           options.cos_threshold, options.threads);
  auto views_path = out_path("views.json");
  write_text(views_path, selection_json(set).dump(2) + "\n");
  auto select_s = select_timer.seconds();

  // Pool index of each selected view: fixed views lead the pool.
  auto entries = std::vector<ViewImage>{};
  for (auto i = 0; i < int(set.selected.size()); i++) {
    auto pool_index = i < options.nfixed ? i : options.nfixed + set.chosen[size_t(i - options.nfixed)];
    entries.push_back(
        {set.selected[size_t(i)], load_rgb_image(view_image_path(options.images, pool_index))});
  }

  auto bake_timer = Timer{};
  auto bake_atlas = options.size == options.atlas
                        ? atlas
                        : rasterize_uv_atlas(prepared.mesh, options.size, options.size);
  auto texture = bake(bake_atlas, prepared.mesh, bvh, entries, options.cos_threshold,
                      options.exponent, options.threads);
  auto texture_path = out_path("texture.png");
  auto mask_path = out_path("texture_mask.png");
  save_png(to_image(texture), texture_path);
  save_png(coverage_mask(texture), mask_path);
  auto bake_s = bake_timer.seconds();

  auto inpaint_timer = Timer{};
  auto filled = inpaint(prepared.mesh, bake_atlas, texture);
  auto filled_path = out_path("texture_filled.png");
  auto filled_mask_path = out_path("texture_filled_mask.png");
  save_png(to_image(filled), filled_path);
  save_png(coverage_mask(filled), filled_mask_path);
  auto inpaint_s = inpaint_timer.seconds();

  auto valid = bake_atlas.occupied_count();
  auto report = json{{"command", "pipeline"},
                     {"parameters",
                      {{"mesh", options.mesh},
                       {"images", options.images},
                       {"out_dir", options.out_dir},
                       {"atlas", options.atlas},
                       {"size", options.size},
                       {"nmax", options.nmax},
                       {"nfixed", options.nfixed},
                       {"cos_threshold", options.cos_threshold},
                       {"exponent", options.exponent},
                       {"candidates", options.candidates},
                       {"normalize", options.normalize},
                       {"threads", options.threads}}},
                     {"metrics",
                      {{"generated_charts", prepared.generated_charts},
                       {"gains", set.gains},
                       {"chosen", set.chosen},
                       {"selection_covered", set.covered_total},
                       {"selection_valid", set.valid_total},
                       {"baked_covered", texture.covered_count()},
                       {"filled_covered", filled.covered_count()},
                       {"valid", valid}}},
                     {"outputs",
                      {{"views", views_path},
                       {"texture", texture_path},
                       {"texture_mask", mask_path},
                       {"texture_filled", filled_path},
                       {"texture_filled_mask", filled_mask_path}}}};
  emit_report(report, options.report,
              {{"select_s", select_s},
               {"bake_s", bake_s},
               {"inpaint_s", inpaint_s},
               {"total_s", total.seconds()}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"meshtex: mesh sampling, sdf extraction, view-driven texturing"};
  app.require_subcommand(1);

  auto sample = SampleOptions{};
  auto* sample_cmd = app.add_subcommand("sample", "sample surface and sharp-edge point clouds");
  sample_cmd->add_option("--mesh", sample.mesh, "input mesh (.obj/.ply)")->required();
  sample_cmd->add_option("--uniform", sample.uniform, "uniform surface sample count");
  sample_cmd->add_option("--importance", sample.importance, "sharp-edge sample count");
  sample_cmd->add_option("--fps", sample.fps, "farthest-point subsample total (0 keeps all)");
  sample_cmd->add_option("--dihedral", sample.dihedral, "sharp-edge dihedral threshold, degrees");
  sample_cmd->add_option("--seed", sample.seed, "rng seed");
  sample_cmd->add_flag("--normalize", sample.normalize, "rescale the mesh into the unit cube");
  sample_cmd->add_option("--out", sample.out, "output point cloud (.ply)")->required();
  sample_cmd->add_option("--report", sample.report, "write the run report (no timings)");

  auto sdf = SdfGridOptions{};
  auto* sdf_cmd = app.add_subcommand("sdf-grid", "sample a signed-distance lattice");
  sdf_cmd->add_option("--mesh", sdf.mesh, "input mesh, must be watertight")->required();
  sdf_cmd->add_option("--dims", sdf.dims, "lattice points per axis");
  sdf_cmd->add_option("--domain", sdf.domain, "sampling interval, lo hi")->expected(2);
  sdf_cmd->add_option("--threads", sdf.threads, "worker threads (0 = auto)");
  sdf_cmd->add_flag("--normalize,!--no-normalize", sdf.normalize,
                    "rescale the mesh into the unit cube first (default on)");
  sdf_cmd->add_option("--out", sdf.out, "output grid file")->required();
  sdf_cmd->add_option("--report", sdf.report, "write the run report (no timings)");

  auto extract = ExtractOptions{};
  auto* extract_cmd = app.add_subcommand("extract", "isosurface a signed-distance lattice");
  extract_cmd->add_option("--grid", extract.grid, "input grid file")->required();
  extract_cmd->add_option("--iso", extract.iso, "iso level");
  extract_cmd->add_option("--out", extract.out, "output mesh (.obj)")->required();
  extract_cmd->add_option("--report", extract.report, "write the run report (no timings)");

  auto iou = IouOptions{};
  auto* iou_cmd = app.add_subcommand("iou", "sampled volume or surface overlap of two meshes");
  iou_cmd->add_option("--a", iou.a, "first mesh")->required();
  iou_cmd->add_option("--b", iou.b, "second mesh")->required();
  iou_cmd->add_option("--mode", iou.mode, "volume or surface")
      ->check(CLI::IsMember({"volume", "surface"}));
  iou_cmd->add_option("--samples", iou.samples, "monte carlo sample count");
  iou_cmd->add_option("--seed", iou.seed, "rng seed");
  iou_cmd->add_option("--band", iou.band, "surface band width (0 derives it from the bounds)");
  iou_cmd->add_option("--report", iou.report, "write the run report (no timings)");

  auto select = SelectViewsOptions{};
  auto* select_cmd = app.add_subcommand("select-views", "greedy coverage view selection");
  select_cmd->add_option("--mesh", select.mesh, "input mesh")->required();
  select_cmd->add_option("--atlas", select.atlas, "atlas resolution for coverage counting");
  select_cmd->add_option("--nmax", select.nmax, "total views to select");
  select_cmd->add_option("--nfixed", select.nfixed, "fixed equatorial base views");
  select_cmd->add_option("--cos-threshold", select.cos_threshold, "facing cosine cutoff");
  select_cmd->add_option("--candidates", select.candidates, "candidate views json (default pool)");
  select_cmd->add_option("--threads", select.threads, "worker threads (0 = auto)");
  select_cmd->add_flag("--normalize", select.normalize, "rescale the mesh into the unit cube");
  select_cmd->add_option("--out", select.out, "output views json")->required();
  select_cmd->add_option("--report", select.report, "write the run report (no timings)");

  auto bake_options = BakeOptions{};
  auto* bake_cmd = app.add_subcommand("bake", "fuse view images into a uv texture");
  bake_cmd->add_option("--mesh", bake_options.mesh, "input mesh")->required();
  bake_cmd->add_option("--views", bake_options.views, "views json from select-views")->required();
  bake_cmd->add_option("--images", bake_options.images, "directory of view_%03d.png images")
      ->required();
  bake_cmd->add_option("--size", bake_options.size, "texture resolution");
  bake_cmd->add_option("--cos-threshold", bake_options.cos_threshold, "facing cosine cutoff");
  bake_cmd->add_option("--exponent", bake_options.exponent, "cosine weight exponent");
  bake_cmd->add_option("--threads", bake_options.threads, "worker threads (0 = auto)");
  bake_cmd->add_option("--out", bake_options.out, "output texture (.png)")->required();
  bake_cmd->add_option("--out-mask", bake_options.out_mask,
                       "coverage mask path (default: <out>_mask.png)");
  bake_cmd->add_option("--report", bake_options.report, "write the run report (no timings)");

  auto inpaint_options = InpaintOptions{};
  auto* inpaint_cmd = app.add_subcommand("inpaint", "fill uncovered texels from vertex colors");
  inpaint_cmd->add_option("--mesh", inpaint_options.mesh, "input mesh")->required();
  inpaint_cmd->add_option("--texture", inpaint_options.texture, "baked texture (.png)")->required();
  inpaint_cmd->add_option("--mask", inpaint_options.mask, "coverage mask from bake")->required();
  inpaint_cmd->add_option("--out", inpaint_options.out, "output texture (.png)")->required();
  inpaint_cmd->add_option("--out-mask", inpaint_options.out_mask,
                          "output coverage mask (default: <out>_mask.png)");
  inpaint_cmd->add_option("--report", inpaint_options.report, "write the run report (no timings)");

  auto lowpoly_options = LowpolyOptions{};
  auto* lowpoly_cmd = app.add_subcommand("lowpoly", "decimate and re-texture a dense mesh");
  lowpoly_cmd->add_option("--mesh", lowpoly_options.mesh, "dense input mesh")->required();
  lowpoly_cmd->add_option("--texture", lowpoly_options.texture, "dense texture (.png)")->required();
  lowpoly_cmd->add_option("--mask", lowpoly_options.mask,
                          "texture coverage mask (default: all valid texels)");
  lowpoly_cmd->add_option("--target-faces", lowpoly_options.target_faces, "face budget")
      ->required();
  lowpoly_cmd->add_option("--size", lowpoly_options.size, "output texture resolution");
  lowpoly_cmd->add_option("--out", lowpoly_options.out, "output mesh (.obj)")->required();
  lowpoly_cmd->add_option("--out-texture", lowpoly_options.out_texture, "output texture (.png)")
      ->required();
  lowpoly_cmd->add_option("--out-mask", lowpoly_options.out_mask,
                          "output coverage mask (default: <out-texture>_mask.png)");
  lowpoly_cmd->add_option("--report", lowpoly_options.report, "write the run report (no timings)");

  auto flow = FlowDemoOptions{};
  auto* flow_cmd = app.add_subcommand("flow-demo", "train a toy velocity field and integrate it");
  flow_cmd->add_option("--steps", flow.steps, "gradient steps");
  flow_cmd->add_option("--lr", flow.lr, "learning rate");
  flow_cmd->add_option("--seed", flow.seed, "rng seed");
  flow_cmd->add_option("--hidden", flow.hidden, "hidden width");
  flow_cmd->add_option("--batch", flow.batch, "training batch size");
  flow_cmd->add_option("--euler-steps", flow.euler_steps, "integration steps");
  flow_cmd->add_option("--eval-samples", flow.eval_samples, "evaluation sample count");
  flow_cmd->add_option("--report", flow.report, "write the run report (no timings)");

  auto attn = AttnCheckOptions{};
  auto* attn_cmd = app.add_subcommand("attn-check", "verify fused attention invariants");
  attn_cmd->add_option("--tokens", attn.tokens, "token count");
  attn_cmd->add_option("--ref-keys", attn.ref_keys, "reference key count");
  attn_cmd->add_option("--mv-keys", attn.mv_keys, "multiview key count");
  attn_cmd->add_option("--dim", attn.dim, "feature width");
  attn_cmd->add_option("--seed", attn.seed, "rng seed");
  attn_cmd->add_option("--lambda-ref", attn.lambda_ref, "reference gate weight");
  attn_cmd->add_option("--lambda-mv", attn.lambda_mv, "multiview gate weight");
  attn_cmd->add_option("--report", attn.report, "write the run report (no timings)");

  auto pipeline = PipelineOptions{};
  auto* pipeline_cmd =
      app.add_subcommand("pipeline", "select views, bake, and inpaint in one pass");
  pipeline_cmd->add_option("--mesh", pipeline.mesh, "input mesh")->required();
  pipeline_cmd->add_option("--images", pipeline.images,
                           "directory of view_%03d.png images, pool order")
      ->required();
  pipeline_cmd->add_option("--out-dir", pipeline.out_dir, "output directory")->required();
  pipeline_cmd->add_option("--atlas", pipeline.atlas, "selection atlas resolution");
  pipeline_cmd->add_option("--size", pipeline.size, "texture resolution");
  pipeline_cmd->add_option("--nmax", pipeline.nmax, "total views to select");
  pipeline_cmd->add_option("--nfixed", pipeline.nfixed, "fixed equatorial base views");
  pipeline_cmd->add_option("--cos-threshold", pipeline.cos_threshold, "facing cosine cutoff");
  pipeline_cmd->add_option("--exponent", pipeline.exponent, "cosine weight exponent");
  pipeline_cmd->add_option("--candidates", pipeline.candidates,
                           "candidate views json (default pool)");
  pipeline_cmd->add_option("--threads", pipeline.threads, "worker threads (0 = auto)");
  pipeline_cmd->add_flag("--normalize", pipeline.normalize, "rescale the mesh into the unit cube");
  pipeline_cmd->add_option("--report", pipeline.report, "write the run report (no timings)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    auto code = app.exit(e);
    return code == 0 ? 0 : 2;  // help and version keep exit 0
  }

  try {
    if (sample_cmd->parsed()) return run_sample(sample);
    if (sdf_cmd->parsed()) return run_sdf_grid(sdf);
    if (extract_cmd->parsed()) return run_extract(extract);
    if (iou_cmd->parsed()) return run_iou(iou);
    if (select_cmd->parsed()) return run_select_views(select);
    if (bake_cmd->parsed()) return run_bake(bake_options);
    if (inpaint_cmd->parsed()) return run_inpaint(inpaint_options);
    if (lowpoly_cmd->parsed()) return run_lowpoly(lowpoly_options);
    if (flow_cmd->parsed()) return run_flow_demo(flow);
    if (attn_cmd->parsed()) return run_attn_check(attn);
    if (pipeline_cmd->parsed()) return run_pipeline(pipeline);
  } catch (const flag_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
