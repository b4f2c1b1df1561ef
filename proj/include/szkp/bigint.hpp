#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace szkp {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

template <std::size_t L>
using Limbs = std::array<u64, L>;

namespace bigint {

// Limb helpers over little-endian 64-bit words. All routines treat the span
// length as the operand width.

inline u64 add_into(std::span<u64> a, std::span<const u64> b) {
  u64 carry = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    u128 t = static_cast<u128>(a[i]) + (i < b.size() ? b[i] : 0) + carry;
    a[i] = static_cast<u64>(t);
    carry = static_cast<u64>(t >> 64);
  }
  return carry;
}

inline u64 sub_into(std::span<u64> a, std::span<const u64> b) {
  u64 borrow = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    u64 bi = i < b.size() ? b[i] : 0;
    u128 t = static_cast<u128>(a[i]) - bi - borrow;
    a[i] = static_cast<u64>(t);
    borrow = static_cast<u64>(t >> 127);
  }
  return borrow;
}

// Three-way compare of equal-or-different width values.
inline int cmp(std::span<const u64> a, std::span<const u64> b) {
  std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = n; i-- > 0;) {
    u64 x = i < a.size() ? a[i] : 0;
    u64 y = i < b.size() ? b[i] : 0;
    if (x != y) return x < y ? -1 : 1;
  }
  return 0;
}

inline bool is_zero(std::span<const u64> a) {
  return std::all_of(a.begin(), a.end(), [](u64 w) { return w == 0; });
}

inline std::size_t bit_length(std::span<const u64> a) {
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != 0) return 64 * i + (64 - static_cast<std::size_t>(__builtin_clzll(a[i])));
  }
  return 0;
}

inline bool test_bit(std::span<const u64> a, std::size_t bit) {
  std::size_t w = bit / 64;
  return w < a.size() && ((a[w] >> (bit % 64)) & 1u);
}

inline void shr1(std::span<u64> a) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] >>= 1;
    if (i + 1 < a.size()) a[i] |= a[i + 1] << 63;
  }
}

// Multiplies by a single word in place, returning the carry-out word.
inline u64 mul_word(std::span<u64> a, u64 m) {
  u64 carry = 0;
  for (auto& w : a) {
    u128 t = static_cast<u128>(w) * m + carry;
    w = static_cast<u64>(t);
    carry = static_cast<u64>(t >> 64);
  }
  return carry;
}

// Divides in place by a single word, returning the remainder.
inline u64 div_word(std::span<u64> a, u64 d) {
  u128 rem = 0;
  for (std::size_t i = a.size(); i-- > 0;) {
    u128 cur = (rem << 64) | a[i];
    a[i] = static_cast<u64>(cur / d);
    rem = cur % d;
  }
  return static_cast<u64>(rem);
}

inline std::vector<u64> parse_hex(std::string_view s) {
  if (s.starts_with("0x") || s.starts_with("0X")) s.remove_prefix(2);
  if (s.empty()) throw std::invalid_argument("empty hex literal");
  std::vector<u64> out((s.size() + 15) / 16, 0);
  std::size_t nibble = 0;
  for (std::size_t i = s.size(); i-- > 0; ++nibble) {
    char c = s[i];
    u64 v;
    if (c >= '0' && c <= '9') v = static_cast<u64>(c - '0');
    else if (c >= 'a' && c <= 'f') v = static_cast<u64>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') v = static_cast<u64>(c - 'A' + 10);
    else throw std::invalid_argument("bad hex digit in '" + std::string(s) + "'");
    out[nibble / 16] |= v << (4 * (nibble % 16));
  }
  while (out.size() > 1 && out.back() == 0) out.pop_back();
  return out;
}

inline std::string to_hex(std::span<const u64> a) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  std::size_t bits = bit_length(a);
  if (bits == 0) return "0x0";
  for (std::size_t nib = (bits + 3) / 4; nib-- > 0;) {
    s.push_back(digits[(a[nib / 16] >> (4 * (nib % 16))) & 0xF]);
  }
  return "0x" + s;
}

inline std::string to_decimal(std::span<const u64> a) {
  std::vector<u64> t(a.begin(), a.end());
  if (is_zero(t)) return "0";
  std::string s;
  while (!is_zero(t)) s.push_back(static_cast<char>('0' + div_word(t, 10)));
  std::reverse(s.begin(), s.end());
  return s;
}

template <std::size_t L>
Limbs<L> to_fixed(std::span<const u64> v) {
  if (bit_length(v) > 64 * L) throw std::out_of_range("value wider than limb capacity");
  Limbs<L> out{};
  std::copy_n(v.begin(), std::min(v.size(), L), out.begin());
  return out;
}

}  // namespace bigint

/// Unsigned multi-precision integer used for MSM scalars. The width is
/// dynamic so one type serves the toy, 254-bit and 753-bit curves.
class Scalar {
 public:
  Scalar() = default;
  explicit Scalar(u64 v) : limbs_{v} { trim(); }
  explicit Scalar(std::vector<u64> limbs) : limbs_(std::move(limbs)) { trim(); }
  template <std::size_t L>
  explicit Scalar(const Limbs<L>& limbs) : limbs_(limbs.begin(), limbs.end()) { trim(); }

  static Scalar from_hex(std::string_view s) { return Scalar(bigint::parse_hex(s)); }

  std::span<const u64> limbs() const { return limbs_; }
  std::size_t bit_length() const { return bigint::bit_length(limbs_); }
  bool is_zero() const { return limbs_.empty(); }
  bool bit(std::size_t i) const { return bigint::test_bit(limbs_, i); }
  bool is_one() const { return limbs_.size() == 1 && limbs_[0] == 1; }

  /// Bits [offset, offset + width) as an integer; width <= 32.
  std::uint32_t bits(std::size_t offset, unsigned width) const {
    std::uint32_t v = 0;
    for (unsigned i = 0; i < width; ++i) {
      if (bit(offset + i)) v |= 1u << i;
    }
    return v;
  }

  std::string hex() const { return bigint::to_hex(limbs_); }
  std::string decimal() const { return bigint::to_decimal(limbs_); }

  friend bool operator==(const Scalar& a, const Scalar& b) { return a.limbs_ == b.limbs_; }
  friend auto operator<=>(const Scalar& a, const Scalar& b) {
    return bigint::cmp(a.limbs_, b.limbs_) <=> 0;
  }

 private:
  void trim() {
    while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
  }
  std::vector<u64> limbs_;
};

}  // namespace szkp
