// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "meshtex/error.hpp"
#include "meshtex/mesh.hpp"

namespace meshtex {

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& path, int line, const std::string& what) {
  raise(errc::parse_error, path + ":" + std::to_string(line) + ": " + what);
}

inline std::string read_file(const std::string& path) {
  namespace fs = std::filesystem;
  auto ec = std::error_code{};
  if (!fs::exists(path, ec) || fs::is_directory(path, ec)) {
    raise(errc::file_not_found, path);
  }
  auto file = std::ifstream(path, std::ios::binary);
  check(file.good(), errc::file_not_found, path);
  auto stream = std::ostringstream{};
  stream << file.rdbuf();
  return stream.str();
}

// Resolves an OBJ 1-based (or negative, relative) index against a list size.
inline int resolve_obj_index(int raw, int count, const std::string& path, int line) {
  auto index = raw > 0 ? raw - 1 : count + raw;
  if (raw == 0 || index < 0 || index >= count) {
    parse_fail(path, line, "index " + std::to_string(raw) + " out of range (count " +
                               std::to_string(count) + ")");
  }
  return index;
}

struct ObjCorner {
  int v = -1, vt = -1, vn = -1;
};

inline ObjCorner parse_obj_corner(const std::string& token, int nv, int nvt, int nvn,
                                  const std::string& path, int line) {
  auto corner = ObjCorner{};
  int raw[3] = {0, 0, 0};
  bool present[3] = {false, false, false};
  auto slot = 0;
  auto pos = size_t{0};
  while (pos <= token.size() && slot < 3) {
    auto next = token.find('/', pos);
    auto part = token.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    if (!part.empty()) {
      auto end = (char*)nullptr;
      raw[slot] = int(std::strtol(part.c_str(), &end, 10));
      if (end == part.c_str() || *end != '\0') {
        parse_fail(path, line, "malformed face corner '" + token + "'");
      }
      present[slot] = true;
    }
    if (next == std::string::npos) break;
    pos = next + 1;
    slot++;
  }
  if (!present[0]) parse_fail(path, line, "face corner missing vertex index");
  corner.v = resolve_obj_index(raw[0], nv, path, line);
  if (present[1]) corner.vt = resolve_obj_index(raw[1], nvt, path, line);
  if (present[2]) corner.vn = resolve_obj_index(raw[2], nvn, path, line);
  return corner;
}

inline TriMesh load_obj(const std::string& path) {
  auto text = read_file(path);
  auto mesh = TriMesh{};
  auto texcoords = std::vector<Vec2>{};
  auto obj_normals = std::vector<Vec3>{};
  auto corner_uvs = std::vector<std::array<int, 3>>{};   // vt index per corner, -1 if absent
  auto corner_vns = std::vector<std::array<int, 3>>{};

  auto stream = std::istringstream(text);
  auto line_text = std::string{};
  auto line = 0;
  while (std::getline(stream, line_text)) {
    line++;
    if (!line_text.empty() && line_text.back() == '\r') line_text.pop_back();
    auto ls = std::istringstream(line_text);
    auto tag = std::string{};
    if (!(ls >> tag) || tag.empty() || tag[0] == '#') continue;

    if (tag == "v") {
      auto v = Vec3{};
      if (!(ls >> v.x >> v.y >> v.z)) parse_fail(path, line, "malformed vertex record");
      mesh.vertices.push_back(v);
    } else if (tag == "vt") {
      auto uv = Vec2{};
      if (!(ls >> uv.x >> uv.y)) parse_fail(path, line, "malformed texcoord record");
      texcoords.push_back(uv);
    } else if (tag == "vn") {
      auto n = Vec3{};
      if (!(ls >> n.x >> n.y >> n.z)) parse_fail(path, line, "malformed normal record");
      obj_normals.push_back(n);
    } else if (tag == "f") {
      auto corners = std::vector<ObjCorner>{};
      auto token = std::string{};
      while (ls >> token) {
        corners.push_back(parse_obj_corner(token, mesh.vertex_count(), int(texcoords.size()),
                                           int(obj_normals.size()), path, line));
      }
      if (corners.size() < 3) parse_fail(path, line, "face with fewer than 3 vertices");
      // Fan triangulation: (c0, c_i, c_{i+1}).
      for (auto i = 1; i + 1 < int(corners.size()); i++) {
        mesh.faces.push_back({corners[0].v, corners[i].v, corners[i + 1].v});
        corner_uvs.push_back({corners[0].vt, corners[i].vt, corners[i + 1].vt});
        corner_vns.push_back({corners[0].vn, corners[i].vn, corners[i + 1].vn});
      }
    }
    // Other records (o, g, s, usemtl, mtllib, ...) are ignored.
  }

  check(!mesh.faces.empty(), errc::empty_mesh, path + ": no faces");

  // Attach UVs only when every corner carries one.
  auto all_uvs = true;
  for (auto& fuv : corner_uvs) {
    for (auto c = 0; c < 3; c++) all_uvs = all_uvs && fuv[c] >= 0;
  }
  if (all_uvs) {
    mesh.uvs.reserve(corner_uvs.size());
    for (auto& fuv : corner_uvs) {
      mesh.uvs.push_back({texcoords[fuv[0]], texcoords[fuv[1]], texcoords[fuv[2]]});
    }
  }

  // Per-vertex normals from vn references, first reference wins.
  if (!obj_normals.empty()) {
    auto normals = std::vector<Vec3>(mesh.vertices.size(), Vec3{});
    auto seen = std::vector<char>(mesh.vertices.size(), 0);
    auto any = false;
    for (auto face = 0; face < mesh.face_count(); face++) {
      for (auto c = 0; c < 3; c++) {
        auto vn = corner_vns[face][c];
        auto v = mesh.faces[face][c];
        if (vn >= 0 && !seen[v]) {
          normals[v] = normalize(obj_normals[vn]);
          seen[v] = 1;
          any = true;
        }
      }
    }
    if (any) {
      for (auto v = 0; v < mesh.vertex_count(); v++) {
        if (!seen[v]) normals[v] = Vec3{0, 0, 1};
      }
      mesh.normals = std::move(normals);
    }
  }
  return mesh;
}

// --- PLY ---

struct PlyProperty {
  std::string name;
  std::string type;        // scalar type, or list item type
  std::string count_type;  // set for list properties
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  size_t count = 0;
  std::vector<PlyProperty> properties;
};

inline int ply_type_size(const std::string& type, const std::string& path, int line) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
  if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
  if (type == "int" || type == "uint" || type == "int32" || type == "uint32" ||
      type == "float" || type == "float32") return 4;
  if (type == "double" || type == "float64") return 8;
  parse_fail(path, line, "unsupported ply type '" + type + "'");
}

inline double ply_read_binary(const char*& cursor, const char* end, const std::string& type,
                              const std::string& path) {
  auto size = ply_type_size(type, path, 0);
  if (cursor + size > end) raise(errc::parse_error, path + ": truncated binary ply data");
  auto value = 0.0;
  auto read_as = [&](auto tag) {
    using T = decltype(tag);
    T raw;
    std::memcpy(&raw, cursor, sizeof(T));
    value = double(raw);
  };
  if (type == "char" || type == "int8") read_as(int8_t{});
  else if (type == "uchar" || type == "uint8") read_as(uint8_t{});
  else if (type == "short" || type == "int16") read_as(int16_t{});
  else if (type == "ushort" || type == "uint16") read_as(uint16_t{});
  else if (type == "int" || type == "int32") read_as(int32_t{});
  else if (type == "uint" || type == "uint32") read_as(uint32_t{});
  else if (type == "float" || type == "float32") read_as(float{});
  else read_as(double{});
  cursor += size;
  return value;
}

inline TriMesh load_ply(const std::string& path) {
  auto text = read_file(path);
  auto header_end = text.find("end_header");
  if (header_end == std::string::npos) raise(errc::parse_error, path + ":1: missing end_header");
  auto body_start = text.find('\n', header_end);
  if (body_start == std::string::npos) raise(errc::parse_error, path + ": truncated header");
  body_start++;

  auto elements = std::vector<PlyElement>{};
  auto binary = false;
  auto header = std::istringstream(text.substr(0, body_start));
  auto line_text = std::string{};
  auto line = 0;
  std::getline(header, line_text);
  line++;
  if (line_text.rfind("ply", 0) != 0) parse_fail(path, 1, "not a ply file");
  while (std::getline(header, line_text)) {
    line++;
    if (!line_text.empty() && line_text.back() == '\r') line_text.pop_back();
    auto ls = std::istringstream(line_text);
    auto tag = std::string{};
    ls >> tag;
    if (tag == "comment" || tag == "obj_info" || tag.empty()) continue;
    if (tag == "end_header") break;
    if (tag == "format") {
      auto format = std::string{};
      ls >> format;
      if (format == "ascii") binary = false;
      else if (format == "binary_little_endian") binary = true;
      else parse_fail(path, line, "unsupported ply format '" + format + "'");
    } else if (tag == "element") {
      auto element = PlyElement{};
      if (!(ls >> element.name >> element.count)) parse_fail(path, line, "malformed element");
      elements.push_back(element);
    } else if (tag == "property") {
      if (elements.empty()) parse_fail(path, line, "property before element");
      auto prop = PlyProperty{};
      auto first = std::string{};
      ls >> first;
      if (first == "list") {
        prop.is_list = true;
        if (!(ls >> prop.count_type >> prop.type >> prop.name)) {
          parse_fail(path, line, "malformed list property");
        }
      } else {
        prop.type = first;
        if (!(ls >> prop.name)) parse_fail(path, line, "malformed property");
      }
      ply_type_size(prop.type, path, line);
      elements.back().properties.push_back(prop);
    } else {
      parse_fail(path, line, "unknown header record '" + tag + "'");
    }
  }

  auto mesh = TriMesh{};
  auto normals = std::vector<Vec3>{};
  auto has_normals = false;

  auto ascii = std::istringstream(text.substr(body_start));
  const char* cursor = text.data() + body_start;
  const char* end = text.data() + text.size();
  auto ascii_line = line;

  auto next_ascii = [&]() {
    auto value = 0.0;
    if (!(ascii >> value)) raise(errc::parse_error, path + ": truncated ascii ply data");
    return value;
  };

  for (auto& element : elements) {
    auto is_vertex = element.name == "vertex";
    auto is_face = element.name == "face";
    for (auto row = size_t{0}; row < element.count; row++) {
      ascii_line++;
      auto position = Vec3{};
      auto normal = Vec3{};
      auto row_normals = false;
      for (auto& prop : element.properties) {
        if (prop.is_list) {
          auto count =
              binary ? ply_read_binary(cursor, end, prop.count_type, path) : next_ascii();
          auto items = std::vector<double>{};
          items.reserve(size_t(count));
          for (auto i = 0; i < int(count); i++) {
            items.push_back(binary ? ply_read_binary(cursor, end, prop.type, path)
                                   : next_ascii());
          }
          if (is_face && (prop.name == "vertex_indices" || prop.name == "vertex_index")) {
            if (items.size() < 3) parse_fail(path, ascii_line, "face with fewer than 3 vertices");
            for (auto& item : items) {
              if (item < 0 || item >= double(mesh.vertex_count())) {
                parse_fail(path, ascii_line, "face index out of range");
              }
            }
            for (auto i = 1; i + 1 < int(items.size()); i++) {
              mesh.faces.push_back({int(items[0]), int(items[i]), int(items[i + 1])});
            }
          }
        } else {
          auto value = binary ? ply_read_binary(cursor, end, prop.type, path) : next_ascii();
          if (is_vertex) {
            if (prop.name == "x") position.x = value;
            else if (prop.name == "y") position.y = value;
            else if (prop.name == "z") position.z = value;
            else if (prop.name == "nx") { normal.x = value; row_normals = true; }
            else if (prop.name == "ny") { normal.y = value; row_normals = true; }
            else if (prop.name == "nz") { normal.z = value; row_normals = true; }
          }
        }
      }
      if (is_vertex) {
        mesh.vertices.push_back(position);
        if (row_normals) has_normals = true;
        normals.push_back(normalize(normal));
      }
    }
  }

  check(!mesh.faces.empty(), errc::empty_mesh, path + ": no faces");
  if (has_normals && normals.size() == mesh.vertices.size()) {
    mesh.normals = std::move(normals);
    for (auto& n : mesh.normals) {
      if (length(n) == 0) n = Vec3{0, 0, 1};
    }
  }
  return mesh;
}

inline std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace detail

/// Load a triangle mesh from an OBJ or PLY file (by extension). Polygons are
/// fan-triangulated. Throws file_not_found, parse_error or empty_mesh.
inline TriMesh load_mesh(const std::string& path) {
  auto dot = path.find_last_of('.');
  auto ext = dot == std::string::npos ? std::string{} : path.substr(dot + 1);
  for (auto& ch : ext) ch = char(std::tolower(ch));
  if (ext == "obj") return detail::load_obj(path);
  if (ext == "ply") return detail::load_ply(path);
  raise(errc::invalid_argument, path + ": unsupported extension '" + ext + "'");
}

/// Write an ASCII OBJ. Doubles are printed with 17 significant digits so a
/// load/save/load cycle reproduces vertex data bit-for-bit.
inline void save_obj(const TriMesh& mesh, const std::string& path) {
  auto file = std::ofstream(path);
  check(file.good(), errc::io_error, "cannot open " + path + " for writing");
  auto out = std::string{};
  for (auto& v : mesh.vertices) {
    out += "v " + detail::format_double(v.x) + " " + detail::format_double(v.y) + " " +
           detail::format_double(v.z) + "\n";
  }
  for (auto& n : mesh.normals) {
    out += "vn " + detail::format_double(n.x) + " " + detail::format_double(n.y) + " " +
           detail::format_double(n.z) + "\n";
  }
  for (auto& fuv : mesh.uvs) {
    for (auto& uv : fuv) {
      out += "vt " + detail::format_double(uv.x) + " " + detail::format_double(uv.y) + "\n";
    }
  }
  auto has_uv = mesh.has_uvs();
  auto has_n = mesh.has_normals();
  for (auto face = 0; face < mesh.face_count(); face++) {
    auto& f = mesh.faces[face];
    out += "f";
    for (auto c = 0; c < 3; c++) {
      auto v = std::to_string(f[c] + 1);
      if (has_uv && has_n) {
        out += " " + v + "/" + std::to_string(face * 3 + c + 1) + "/" + v;
      } else if (has_uv) {
        out += " " + v + "/" + std::to_string(face * 3 + c + 1);
      } else if (has_n) {
        out += " " + v + "//" + v;
      } else {
        out += " " + v;
      }
    }
    out += "\n";
  }
  file << out;
  check(file.good(), errc::io_error, "write failed: " + path);
}

}  // namespace meshtex
