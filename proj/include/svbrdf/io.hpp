#pragma once

#include <png.h>

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "svbrdf/common.hpp"
#include "svbrdf/image.hpp"
#include "svbrdf/material.hpp"

namespace svbrdf::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Flat key=value text. Blank lines and lines starting with '#' are ignored.

using KeyValues = std::map<std::string, std::string>;

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline KeyValues parse_key_values(const std::string& text, const std::string& origin = "<text>") {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::usage, origin + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) fail(ErrorKind::usage, origin + ":" + std::to_string(lineno) + ": empty key");
    if (kv.count(key)) fail(ErrorKind::usage, origin + ": duplicate key '" + key + "'");
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

inline KeyValues read_key_values(const fs::path& path) {
  return parse_key_values(read_text(path), path.string());
}

/// Shortest representation that round-trips exactly.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_vec3(const Vec3& v) {
  return format_double(v.x) + " " + format_double(v.y) + " " + format_double(v.z);
}

inline double parse_double(const std::string& s, const std::string& key) {
  double v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    fail(ErrorKind::usage, "key '" + key + "': not a number: '" + s + "'");
  return v;
}

inline long long parse_int(const std::string& s, const std::string& key) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(ErrorKind::usage, "key '" + key + "': not an integer: '" + s + "'");
  return v;
}

inline bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  fail(ErrorKind::usage, "key '" + key + "': not a boolean: '" + s + "'");
}

/// Accepts "x y z" or "x,y,z".
inline Vec3 parse_vec3(std::string s, const std::string& key) {
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::string a, b, c, extra;
  if (!(in >> a >> b >> c) || (in >> extra))
    fail(ErrorKind::usage, "key '" + key + "': expected three numbers");
  return {parse_double(a, key), parse_double(b, key), parse_double(c, key)};
}

inline const std::string& need(const KeyValues& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) fail(ErrorKind::usage, "missing key '" + key + "'");
  return it->second;
}

// ---------------------------------------------------------------------------
// Portable Float Map. Little-endian, scanlines stored bottom to top.

inline void write_pfm(const fs::path& path, const Image& img) {
  require(img.channels() == 1 || img.channels() == 3, "pfm: need 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << (img.channels() == 3 ? "PF" : "Pf") << "\n"
      << img.width() << " " << img.height() << "\n-1.0\n";
  std::vector<unsigned char> row(size_t(img.width()) * img.channels() * 4);
  for (int y = img.height() - 1; y >= 0; --y) {
    size_t o = 0;
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) {
        const uint32_t bits = std::bit_cast<uint32_t>(float(img.at(x, y, c)));
        for (int b = 0; b < 4; ++b) row[o++] = (unsigned char)(bits >> (8 * b));
      }
    out.write(reinterpret_cast<const char*>(row.data()), std::streamsize(row.size()));
  }
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

inline Image read_pfm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0;
  double scale = 0;
  in >> magic >> w >> h >> scale;
  if (!in || (magic != "PF" && magic != "Pf") || w <= 0 || h <= 0 || scale == 0)
    fail(ErrorKind::io, "malformed pfm header: " + path.string());
  in.get();  // single whitespace before raster
  const int channels = magic == "PF" ? 3 : 1;
  const bool little = scale < 0;
  Image img(w, h, channels);
  std::vector<unsigned char> row(size_t(w) * channels * 4);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), std::streamsize(row.size()));
    if (!in) fail(ErrorKind::io, "truncated pfm: " + path.string());
    size_t o = 0;
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c) {
        uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) {
          const uint32_t byte = row[o + (little ? b : 3 - b)];
          bits |= byte << (8 * b);
        }
        o += 4;
        img.at(x, y, c) = double(std::bit_cast<float>(bits));
      }
  }
  return img;
}

// ---------------------------------------------------------------------------
// 8-bit PNG through libpng's simplified API.

inline unsigned char to_byte(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return (unsigned char)std::floor(c * 255.0 + 0.5);
}

inline void write_png(const fs::path& path, const Image& img) {
  require(img.channels() == 1 || img.channels() == 3, "png: need 1 or 3 channels");
  std::vector<unsigned char> buf(img.size());
  for (size_t i = 0; i < buf.size(); ++i) buf[i] = to_byte(img.data()[i]);
  png_image pi;
  std::memset(&pi, 0, sizeof pi);
  pi.version = PNG_IMAGE_VERSION;
  pi.width = png_uint_32(img.width());
  pi.height = png_uint_32(img.height());
  pi.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&pi, path.string().c_str(), 0, buf.data(), 0, nullptr)) {
    const std::string msg = pi.message;
    png_image_free(&pi);
    fail(ErrorKind::io, "cannot write png " + path.string() + ": " + msg);
  }
}

/// Reads any PNG as 3-channel values in [0, 1] (gamma-encoded as stored).
inline LdrImage read_png(const fs::path& path) {
  png_image pi;
  std::memset(&pi, 0, sizeof pi);
  pi.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&pi, path.string().c_str()))
    fail(ErrorKind::io, "cannot read png " + path.string() + ": " + pi.message);
  pi.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(pi));
  if (!png_image_finish_read(&pi, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = pi.message;
    png_image_free(&pi);
    fail(ErrorKind::io, "cannot decode png " + path.string() + ": " + msg);
  }
  LdrImage img(int(pi.width), int(pi.height), 3);
  for (size_t i = 0; i < buf.size(); ++i) img.data()[i] = buf[i] / 255.0;
  return img;
}

// ---------------------------------------------------------------------------
// Map bundle: normal.pfm, diffuse.pfm, specular.pfm, roughness.pfm and a
// material.txt manifest holding width= and height=.

inline void write_bundle(const fs::path& dir, const SvbrdfMaps& maps) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create " + dir.string());
  write_pfm(dir / "normal.pfm", maps.normal);
  write_pfm(dir / "diffuse.pfm", maps.diffuse);
  write_pfm(dir / "specular.pfm", maps.specular);
  write_pfm(dir / "roughness.pfm", maps.roughness);
  write_text(dir / "material.txt", "width=" + std::to_string(maps.width) +
                                       "\nheight=" + std::to_string(maps.height) + "\n");
}

/// Loads a bundle. Values are stored as 32-bit floats, so normals are
/// renormalized and albedo/roughness clamped back into range on load.
inline SvbrdfMaps read_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorKind::io, "not a material bundle: " + dir.string());
  const KeyValues kv = read_key_values(dir / "material.txt");
  SvbrdfMaps m;
  m.width = int(parse_int(need(kv, "width"), "width"));
  m.height = int(parse_int(need(kv, "height"), "height"));
  m.normal = read_pfm(dir / "normal.pfm");
  m.diffuse = read_pfm(dir / "diffuse.pfm");
  m.specular = read_pfm(dir / "specular.pfm");
  m.roughness = read_pfm(dir / "roughness.pfm");
  const auto fits = [&](const Image& img, int ch) {
    return img.width() == m.width && img.height() == m.height && img.channels() == ch;
  };
  if (!fits(m.normal, 3) || !fits(m.diffuse, 3) || !fits(m.specular, 3) || !fits(m.roughness, 1))
    fail(ErrorKind::io, "bundle maps disagree with manifest: " + dir.string());
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      TexelParams t = m.texel(x, y);
      if (t.normal.z > 0) t.normal = normalize(t.normal);
      for (int c = 0; c < 3; ++c) {
        t.diffuse[c] = std::clamp(t.diffuse[c], 0.0, 1.0);
        t.specular[c] = std::clamp(t.specular[c], 0.0, 1.0);
      }
      t.roughness = std::clamp(t.roughness, kRoughnessMin, 1.0);
      m.set_texel(x, y, t);
    }
  return m;
}

/// Every subdirectory holding a material.txt, in lexicographic order.
inline std::vector<fs::path> list_bundles(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorKind::io, "not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::exists(e.path() / "material.txt")) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace svbrdf::io
