#pragma once

#include "svbrdf/io.hpp"
#include "svbrdf/renderer.hpp"

namespace svbrdf::io {

// Scene sidecar: one key=value per line. Keys: camera_pos, light_pos,
// light_intensity, falloff, fov, and optionally ambient_pos together with
// ambient_intensity. Numbers are written in shortest round-trip form.

inline std::string scene_to_text(const SceneSample& s) {
  std::string t;
  t += "camera_pos=" + format_vec3(s.camera_pos) + "\n";
  t += "light_pos=" + format_vec3(s.light_pos) + "\n";
  t += "light_intensity=" + format_vec3(s.light_intensity) + "\n";
  t += "falloff=" + format_double(s.falloff_exponent) + "\n";
  t += "fov=" + format_double(s.fov_deg) + "\n";
  if (s.ambient) {
    t += "ambient_pos=" + format_vec3(s.ambient->pos) + "\n";
    t += "ambient_intensity=" + format_vec3(s.ambient->intensity) + "\n";
  }
  return t;
}

inline SceneSample scene_from_key_values(const KeyValues& kv) {
  static const char* const known[] = {"camera_pos", "light_pos", "light_intensity", "falloff",
                                      "fov", "ambient_pos", "ambient_intensity"};
  for (const auto& [k, v] : kv)
    if (std::find(std::begin(known), std::end(known), k) == std::end(known))
      fail(ErrorKind::usage, "scene: unknown key '" + k + "'");
  SceneSample s;
  s.camera_pos = parse_vec3(need(kv, "camera_pos"), "camera_pos");
  s.light_pos = parse_vec3(need(kv, "light_pos"), "light_pos");
  s.light_intensity = parse_vec3(need(kv, "light_intensity"), "light_intensity");
  if (kv.count("falloff")) s.falloff_exponent = parse_double(kv.at("falloff"), "falloff");
  if (kv.count("fov")) s.fov_deg = parse_double(kv.at("fov"), "fov");
  const bool has_pos = kv.count("ambient_pos") > 0;
  const bool has_int = kv.count("ambient_intensity") > 0;
  if (has_pos != has_int) fail(ErrorKind::usage, "scene: ambient_pos and ambient_intensity go together");
  if (has_pos)
    s.ambient = AmbientLight{parse_vec3(kv.at("ambient_pos"), "ambient_pos"),
                             parse_vec3(kv.at("ambient_intensity"), "ambient_intensity")};
  validate_scene(s);
  return s;
}

inline SceneSample read_scene(const fs::path& path) {
  return scene_from_key_values(read_key_values(path));
}

inline void write_scene(const fs::path& path, const SceneSample& s) {
  write_text(path, scene_to_text(s));
}

}  // namespace svbrdf::io
