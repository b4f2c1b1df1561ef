#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "szkp/perfmodel.hpp"

namespace szkp {

/// Share of scalars in {0, 1}; split evenly between zeros and ones, the rest
/// are full-width residual scalars.
inline constexpr double kDefaultZeroOneFraction = 0.95;

inline SparseCounts sparse_counts(std::size_t n, double zero_one_fraction) {
  if (zero_one_fraction < 0.0 || zero_one_fraction > 1.0) {
    throw std::invalid_argument("zero/one scalar fraction must lie in [0, 1]");
  }
  auto zo = static_cast<std::size_t>(std::llround(static_cast<double>(n) * zero_one_fraction));
  return {zo / 2, n - zo};
}

inline WorkloadProfile make_workload(const std::string& name, unsigned log_n,
                                     double zero_one_fraction = kDefaultZeroOneFraction) {
  WorkloadProfile w;
  w.name = name;
  w.log_n = log_n;
  SparseCounts c = sparse_counts(w.size(), zero_one_fraction);
  w.g1 = {c, c, c};
  w.g2 = c;
  return w;
}

struct WorkloadEntry {
  std::string name;
  std::size_t constraints;
  unsigned log_n;
};

/// Built-in circuits with their constraint counts, padded to a power of two.
inline const std::vector<WorkloadEntry>& workload_table() {
  static const std::vector<WorkloadEntry> t{
      {"AES", 16383, 14},        {"SHA2", 32767, 15},        {"RSA", 131071, 17},
      {"RSASigVer", 131071, 17}, {"MerkleTree", 131071, 17}, {"Auction", 1048575, 20},
  };
  return t;
}

inline std::vector<WorkloadProfile> builtin_workloads(double zero_one_fraction = kDefaultZeroOneFraction) {
  std::vector<WorkloadProfile> v;
  for (const auto& e : workload_table()) v.push_back(make_workload(e.name, e.log_n, zero_one_fraction));
  return v;
}

inline WorkloadProfile find_workload(const std::string& name, double zero_one_fraction = kDefaultZeroOneFraction) {
  for (const auto& e : workload_table()) {
    if (e.name == name) return make_workload(e.name, e.log_n, zero_one_fraction);
  }
  throw std::invalid_argument("unknown workload '" + name + "'");
}

}  // namespace szkp
