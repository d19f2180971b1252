#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "honeydirac/error.hpp"
#include "honeydirac/fft.hpp"
#include "honeydirac/grid.hpp"

#ifndef HONEYDIRAC_VERSION
#define HONEYDIRAC_VERSION "0.0.0"
#endif

namespace honeydirac {

namespace fs = std::filesystem;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) fail(ErrorCode::io_error, "cannot write " + path.string());
    row_strings(header);
  }

  template <class... Ts>
  void row(const Ts&... vals) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(vals), first = false), ...);
    out_ << '\n';
  }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  static std::string cell(const char* s) { return cell(std::string(s)); }

  std::ofstream out_;
};

inline void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline nlohmann::ordered_json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot read " + path.string());
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::io_error, path.string() + ": " + e.what());
  }
}

// Flat little-endian complex64 fields, component after component, row-major
// with the x2 index fastest; the sidecar <path>.json carries the layout.
struct Snapshot {
  std::vector<std::string> components;
  std::vector<ComplexField> fields;
  double L1 = 0.0, L2 = 0.0, t = 0.0, eps = 0.0;
};

inline void write_snapshot(const fs::path& path, const Snapshot& s) {
  static_assert(std::endian::native == std::endian::little, "snapshot writer assumes a little-endian host");
  require(!s.fields.empty() && s.fields.size() == s.components.size(), ErrorCode::invalid_parameter,
          "snapshot needs one name per field");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
  for (const auto& f : s.fields) {
    require(f.nx() == s.fields[0].nx() && f.ny() == s.fields[0].ny(), ErrorCode::invalid_parameter,
            "snapshot fields must share a shape");
    std::vector<std::complex<float>> buf(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) buf[k] = std::complex<float>(float(f[k].real()), float(f[k].imag()));
    out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size() * sizeof(buf[0])));
  }
  nlohmann::ordered_json side{{"format", "complex64-le"},
                              {"layout", "row-major, x2 fastest"},
                              {"shape", {s.fields[0].nx(), s.fields[0].ny()}},
                              {"box", {s.L1, s.L2}},
                              {"time", s.t},
                              {"epsilon", s.eps},
                              {"components", s.components}};
  write_json(fs::path(path.string() + ".json"), side);
}

inline Snapshot read_snapshot(const fs::path& path) {
  const auto side = read_json(fs::path(path.string() + ".json"));
  Snapshot s;
  const std::size_t nx = side.at("shape")[0], ny = side.at("shape")[1];
  s.L1 = side.at("box")[0];
  s.L2 = side.at("box")[1];
  s.t = side.at("time");
  s.eps = side.value("epsilon", 0.0);
  s.components = side.at("components").get<std::vector<std::string>>();
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot read " + path.string());
  for (std::size_t c = 0; c < s.components.size(); ++c) {
    std::vector<std::complex<float>> buf(nx * ny);
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * sizeof(buf[0])));
    if (!in) fail(ErrorCode::io_error, path.string() + ": truncated snapshot");
    ComplexField f(nx, ny);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = cplx(buf[k].real(), buf[k].imag());
    s.fields.push_back(std::move(f));
  }
  return s;
}

inline void write_manifest(const fs::path& dir, const nlohmann::ordered_json& config, const std::string& hash,
                           const std::string& command, const std::vector<std::string>& files) {
  nlohmann::ordered_json m{{"tool", "honeydirac"},
                           {"version", HONEYDIRAC_VERSION},
                           {"command", command},
                           {"config_hash", hash},
                           {"config", config},
                           {"files", files}};
  write_json(dir / "manifest.json", m);
}

}  // namespace honeydirac
