#pragma once

// Little-endian binary file helpers shared by the model, calibration and
// folded-artifact formats.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "ffnfold/error.hpp"

namespace ffnfold::binio {

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) {
      throw Error(ErrKind::Io, "io-error", "cannot open for writing: " + path);
    }
    path_ = path;
  }

  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void magic(const char (&m)[9]) { bytes(m, 8); }
  void u32(std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    bytes(b, 4);
  }
  void f32(float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    u32(u);
  }
  void f64(double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    u32(static_cast<std::uint32_t>(u));
    u32(static_cast<std::uint32_t>(u >> 32));
  }
  void f32_array(const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) f32(static_cast<float>(p[i]));
  }
  void f64_array(const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) f64(p[i]);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }

  void close() {
    out_.close();
    if (!out_) throw Error(ErrKind::Io, "io-error", "write failed: " + path_);
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) {
      throw Error(ErrKind::Io, "io-error", "cannot open for reading: " + path);
    }
  }

  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n)) {
      throw Error(ErrKind::Io, "truncated", "unexpected end of file");
    }
  }
  void expect_magic(const char (&m)[9]) {
    char got[8];
    bytes(got, 8);
    if (std::memcmp(got, m, 8) != 0) {
      throw Error(ErrKind::Io, "bad-magic",
                  "expected magic " + std::string(m, 8));
    }
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
  }
  float f32() {
    std::uint32_t u = u32();
    float v;
    std::memcpy(&v, &u, 4);
    return v;
  }
  double f64() {
    std::uint64_t u = u32();
    u |= static_cast<std::uint64_t>(u32()) << 32;
    double v;
    std::memcpy(&v, &u, 8);
    return v;
  }
  void f32_array(double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<double>(f32());
  }
  void f64_array(double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) p[i] = f64();
  }
  std::string str() {
    std::uint32_t n = u32();
    if (n > (1u << 24)) {
      throw Error(ErrKind::Io, "truncated", "implausible string length");
    }
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  bool at_eof() {
    in_.peek();
    return in_.eof();
  }

 private:
  std::ifstream in_;
};

}  // namespace ffnfold::binio
