// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace meshtex {

enum class errc {
  file_not_found,
  parse_error,
  empty_mesh,
  degenerate_extent,
  missing_uvs,
  zero_area,
  target_exceeds_input,
  not_watertight,
  empty_surface,
  no_occupied_samples,
  insufficient_candidates,
  non_manifold_input,
  target_unreachable,
  no_seed_texels,
  shape_mismatch,
  non_positive_variance,
  t_out_of_range,
  invalid_argument,
  io_error,
};

inline const char* to_string(errc code) {
  switch (code) {
    case errc::file_not_found: return "file_not_found";
    case errc::parse_error: return "parse_error";
    case errc::empty_mesh: return "empty_mesh";
    case errc::degenerate_extent: return "degenerate_extent";
    case errc::missing_uvs: return "missing_uvs";
    case errc::zero_area: return "zero_area";
    case errc::target_exceeds_input: return "target_exceeds_input";
    case errc::not_watertight: return "not_watertight";
    case errc::empty_surface: return "empty_surface";
    case errc::no_occupied_samples: return "no_occupied_samples";
    case errc::insufficient_candidates: return "insufficient_candidates";
    case errc::non_manifold_input: return "non_manifold_input";
    case errc::target_unreachable: return "target_unreachable";
    case errc::no_seed_texels: return "no_seed_texels";
    case errc::shape_mismatch: return "shape_mismatch";
    case errc::non_positive_variance: return "non_positive_variance";
    case errc::t_out_of_range: return "t_out_of_range";
    case errc::invalid_argument: return "invalid_argument";
    case errc::io_error: return "io_error";
  }
  return "unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
  throw error(code, message);
}

inline void check(bool condition, errc code, const std::string& message) {
  if (!condition) raise(code, message);
}

}  // namespace meshtex
