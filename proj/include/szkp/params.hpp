#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include "szkp/bigint.hpp"

#ifndef SZKP_DEFAULT_DATA_DIR
#define SZKP_DEFAULT_DATA_DIR "data"
#endif

namespace szkp {

struct ParamError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Directory holding curve, memory-technology and component files.
/// SZKP_DATA_DIR overrides the compiled-in location.
inline std::filesystem::path data_dir() {
  if (const char* env = std::getenv("SZKP_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return SZKP_DEFAULT_DATA_DIR;
}

/// Text key-value file: one `key = value` per line, `#` starts a comment.
class KeyValueFile {
 public:
  static KeyValueFile load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParamError("cannot open parameter file " + path.string());
    KeyValueFile kv;
    kv.source_ = path.string();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ParamError(kv.source_ + ":" + std::to_string(lineno) + ": expected key = value");
      }
      kv.values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
  }

  bool has(const std::string& key) const { return values_.contains(key); }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ParamError(source_ + ": missing key '" + key + "'");
    return it->second;
  }

  std::vector<u64> hex(const std::string& key) const { return bigint::parse_hex(str(key)); }

  double number(const std::string& key) const {
    const auto& s = str(key);
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParamError(source_ + ": key '" + key + "' is not a number: " + s);
    }
  }

  const std::map<std::string, std::string>& entries() const { return values_; }
  const std::string& source() const { return source_; }

 private:
  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
  std::string source_;
};

}  // namespace szkp
