#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "spt/features.hpp"

namespace spt {

inline constexpr const char* kToolName = "spt";
inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a over a whole file, hex-encoded. Used as the input digest in run
// manifests (an integrity fingerprint, not a cryptographic hash).
inline std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input for digest: " + path.string());
  std::uint64_t h = kFnv64Offset;
  char buffer[1 << 14];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buffer[i]);
      h *= kFnv64Prime;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

// Stable hash of a canonicalized (key-sorted, compact) JSON document.
inline std::string fingerprint_json(const nlohmann::json& j) {
  const std::string canonical = j.dump();
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical)));
  return hex;
}

inline void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << j.dump(2) << '\n';
}

inline void write_text_file(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << text;
}

}  // namespace spt
