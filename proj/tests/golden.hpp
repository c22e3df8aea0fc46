#pragma once

// Golden files pin wire encodings. Each file holds `name hex` lines. Set
// DETAPS_UPDATE_GOLDEN=1 to rewrite them from the current implementation.

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <doctest.h>

#include "detaps/bytes.hpp"

namespace golden {

inline std::string path_for(const std::string& file) {
  return std::string(DETAPS_GOLDEN_DIR) + "/" + file;
}

inline std::map<std::string, std::string> load(const std::string& file) {
  std::map<std::string, std::string> out;
  std::ifstream in(path_for(file));
  std::string name, hex;
  while (in >> name >> hex) out[name] = hex;
  return out;
}

inline bool updating() {
  const char* v = std::getenv("DETAPS_UPDATE_GOLDEN");
  return v != nullptr && std::string(v) == "1";
}

inline void check(const std::string& file, const std::string& name, detaps::ByteView data) {
  const auto hex = detaps::to_hex(data);
  auto entries = load(file);
  if (updating()) {
    entries[name] = hex;
    std::ofstream out(path_for(file));
    for (const auto& [k, v] : entries) out << k << ' ' << v << '\n';
    return;
  }
  auto it = entries.find(name);
  REQUIRE_MESSAGE(it != entries.end(), "missing golden entry " << file << ":" << name);
  CHECK_MESSAGE(it->second == hex, "golden mismatch for " << file << ":" << name);
}

}  // namespace golden
