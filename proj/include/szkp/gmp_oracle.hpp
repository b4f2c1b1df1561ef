#pragma once

// Reference modular arithmetic backed by GMP, an independent route for
// checking the Montgomery paths. Users of this header link gmpxx.

#include <gmpxx.h>

#include <span>
#include <vector>

#include "szkp/bigint.hpp"

namespace szkp::oracle {

inline mpz_class to_mpz(std::span<const u64> limbs) {
  mpz_class z;
  if (limbs.empty()) return z;
  mpz_import(z.get_mpz_t(), limbs.size(), -1, sizeof(u64), 0, 0, limbs.data());
  return z;
}

inline std::vector<u64> from_mpz(const mpz_class& z) {
  std::vector<u64> out((mpz_sizeinbase(z.get_mpz_t(), 2) + 63) / 64 + 1, 0);
  std::size_t count = 0;
  mpz_export(out.data(), &count, -1, sizeof(u64), 0, 0, z.get_mpz_t());
  out.resize(std::max<std::size_t>(count, 1));
  return out;
}

inline mpz_class mod_mul(const mpz_class& a, const mpz_class& b, const mpz_class& p) {
  mpz_class r = (a * b) % p;
  return r;
}

inline mpz_class mod_inv(const mpz_class& a, const mpz_class& p) {
  mpz_class r;
  mpz_invert(r.get_mpz_t(), a.get_mpz_t(), p.get_mpz_t());
  return r;
}

inline mpz_class mod_pow(const mpz_class& b, const mpz_class& e, const mpz_class& p) {
  mpz_class r;
  mpz_powm(r.get_mpz_t(), b.get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
  return r;
}

}  // namespace szkp::oracle
