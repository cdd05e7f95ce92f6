#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "protox/core/error.hpp"
#include "protox/core/json.hpp"
#include "protox/core/rng.hpp"

namespace protox {

// Shared container layout for all binary artifacts:
//   magic[4], u32 version, u32 header length, JSON header bytes, raw blobs.
// All integers little-endian. Readers report the byte offset on truncation.

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path) : path_(path.string()) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot open for writing: " + path_);
  }

  void magic(const char m[4], std::uint32_t version) {
    out_.write(m, 4);
    u32(version);
  }

  void u32(std::uint32_t v) { raw(&v, sizeof(v)); }
  void u64(std::uint64_t v) { raw(&v, sizeof(v)); }

  void header(const Json& j) {
    const std::string s = j.dump();
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }

  template <typename T>
  void blob(const T* data, std::size_t count) {
    raw(data, count * sizeof(T));
  }

  void raw(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out_) throw IoError("write failed: " + path_);
  }

  void close() {
    out_.close();
    if (!out_) throw IoError("close failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path) : path_(path.string()) {
    in_.open(path, std::ios::binary);
    if (!in_) throw IoError("cannot open for reading: " + path_);
  }

  // Checks magic and returns the file's version; `expect_version` mismatches
  // are format errors naming both versions.
  std::uint32_t magic(const char m[4], std::uint32_t expect_version) {
    char got[4];
    raw(got, 4);
    if (std::memcmp(got, m, 4) != 0)
      throw FormatError(path_ + ": bad magic, expected '" + std::string(m, 4) + "'");
    const std::uint32_t v = u32();
    if (v != expect_version)
      throw FormatError(path_ + ": file version " + std::to_string(v) +
                        " does not match supported version " + std::to_string(expect_version));
    return v;
  }

  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof(v));
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, sizeof(v));
    return v;
  }

  Json header() {
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    raw(s.data(), n);
    try {
      return Json::parse(s);
    } catch (const Json::parse_error& e) {
      throw FormatError(path_ + ": header is not valid JSON (" + e.what() + ")");
    }
  }

  template <typename T>
  void blob(T* data, std::size_t count) {
    raw(data, count * sizeof(T));
  }

  void raw(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw FormatError(path_ + ": truncated at byte offset " + std::to_string(offset_ + in_.gcount()) +
                        " (wanted " + std::to_string(n) + " more bytes)");
    }
    offset_ += static_cast<std::uint64_t>(n);
  }

  bool at_eof() {
    in_.peek();
    return in_.eof();
  }

  std::uint64_t offset() const { return offset_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::uint64_t offset_ = 0;
};

inline std::uint64_t hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for hashing: " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace protox
