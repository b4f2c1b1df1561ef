#pragma once

#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "szkp/bigint.hpp"

namespace szkp {

struct ContextMismatch : std::logic_error {
  using std::logic_error::logic_error;
};

struct DivisionByZero : std::domain_error {
  using std::domain_error::domain_error;
};

template <std::size_t L>
class Fp;

/// Modulus and Montgomery constants for a prime field with L 64-bit limbs.
/// Immutable after construction; share it through the returned shared_ptr.
template <std::size_t L>
class FieldCtx {
 public:
  static constexpr std::size_t kLimbs = L;

  static std::shared_ptr<const FieldCtx> create(std::span<const u64> modulus, std::string label,
                                                bool check_prime = true) {
    auto ctx = std::shared_ptr<FieldCtx>(new FieldCtx(modulus, std::move(label)));
    if (check_prime && !ctx->probably_prime(64)) {
      throw std::invalid_argument("field modulus " + bigint::to_hex(modulus) + " is not prime");
    }
    return ctx;
  }

  const Limbs<L>& modulus() const { return p_; }
  const Limbs<L>& r_mod_p() const { return r_; }
  const Limbs<L>& r2_mod_p() const { return r2_; }
  u64 inv() const { return inv_; }
  const std::string& label() const { return label_; }
  std::size_t bits() const { return bigint::bit_length(p_); }

  /// p - 1 as a limb vector, handy for exponent arithmetic.
  std::vector<u64> modulus_minus(u64 k) const {
    std::vector<u64> v(p_.begin(), p_.end());
    u64 kk[1] = {k};
    bigint::sub_into(v, kk);
    return v;
  }

  // Montgomery product a * b * R^-1 mod p (CIOS). Inputs and output are reduced.
  void mont_mul(const Limbs<L>& a, const Limbs<L>& b, Limbs<L>& out) const {
    u64 t[L + 2] = {};
    for (std::size_t i = 0; i < L; ++i) {
      u64 carry = 0;
      for (std::size_t j = 0; j < L; ++j) {
        u128 s = static_cast<u128>(a[j]) * b[i] + t[j] + carry;
        t[j] = static_cast<u64>(s);
        carry = static_cast<u64>(s >> 64);
      }
      u128 s = static_cast<u128>(t[L]) + carry;
      t[L] = static_cast<u64>(s);
      t[L + 1] = static_cast<u64>(s >> 64);

      u64 m = t[0] * inv_;
      s = static_cast<u128>(m) * p_[0] + t[0];
      carry = static_cast<u64>(s >> 64);
      for (std::size_t j = 1; j < L; ++j) {
        s = static_cast<u128>(m) * p_[j] + t[j] + carry;
        t[j - 1] = static_cast<u64>(s);
        carry = static_cast<u64>(s >> 64);
      }
      s = static_cast<u128>(t[L]) + carry;
      t[L - 1] = static_cast<u64>(s);
      t[L] = t[L + 1] + static_cast<u64>(s >> 64);
    }
    for (std::size_t j = 0; j < L; ++j) out[j] = t[j];
    if (t[L] != 0 || bigint::cmp(out, p_) >= 0) bigint::sub_into(out, p_);
  }

 private:
  FieldCtx(std::span<const u64> modulus, std::string label) : label_(std::move(label)) {
    p_ = bigint::to_fixed<L>(modulus);
    if ((p_[0] & 1u) == 0 || bigint::cmp(p_, std::array<u64, 1>{2}) <= 0) {
      throw std::invalid_argument("field modulus must be an odd prime > 2");
    }
    // -p^-1 mod 2^64 by Newton iteration.
    u64 x = 1;
    for (int i = 0; i < 7; ++i) x *= 2 - p_[0] * x;
    inv_ = ~x + 1;

    Limbs<L> acc{};
    acc[0] = 1;
    for (std::size_t i = 0; i < 64 * L; ++i) double_mod(acc);
    r_ = acc;
    for (std::size_t i = 0; i < 64 * L; ++i) double_mod(acc);
    r2_ = acc;
  }

  void double_mod(Limbs<L>& a) const {
    u64 carry = bigint::add_into(a, a);
    if (carry || bigint::cmp(a, p_) >= 0) bigint::sub_into(a, p_);
  }

  bool probably_prime(int rounds) const;

  Limbs<L> p_{};
  Limbs<L> r_{};
  Limbs<L> r2_{};
  u64 inv_ = 0;
  std::string label_;
};

/// Prime-field element stored in Montgomery form (value * R mod p).
template <std::size_t L>
class Fp {
 public:
  using Ctx = FieldCtx<L>;

  Fp() = default;

  static Fp zero(const Ctx& ctx) { return Fp(&ctx, Limbs<L>{}); }
  static Fp one(const Ctx& ctx) { return Fp(&ctx, ctx.r_mod_p()); }

  static Fp from_u64(const Ctx& ctx, u64 v) {
    Limbs<L> c{};
    c[0] = v;
    // Only a single-limb modulus can be smaller than a u64.
    if (bigint::cmp(c, ctx.modulus()) >= 0) c[0] = v % ctx.modulus()[0];
    return from_canonical(ctx, c);
  }

  /// Canonical (non-Montgomery) value; must already be reduced.
  static Fp from_canonical(const Ctx& ctx, std::span<const u64> value) {
    Limbs<L> c = bigint::to_fixed<L>(value);
    if (bigint::cmp(c, ctx.modulus()) >= 0) {
      throw std::out_of_range("field value not reduced: " + bigint::to_hex(value));
    }
    Fp out(&ctx, Limbs<L>{});
    ctx.mont_mul(c, ctx.r2_mod_p(), out.v_);
    return out;
  }

  static Fp from_hex(const Ctx& ctx, std::string_view hex) {
    return from_canonical(ctx, bigint::parse_hex(hex));
  }

  /// Raw Montgomery residue; must be < p.
  static Fp from_montgomery(const Ctx& ctx, const Limbs<L>& mont) {
    if (bigint::cmp(mont, ctx.modulus()) >= 0) throw std::out_of_range("Montgomery residue not reduced");
    return Fp(&ctx, mont);
  }

  template <class Rng>
  static Fp random(const Ctx& ctx, Rng& rng) {
    const auto& p = ctx.modulus();
    std::size_t bits = ctx.bits();
    Limbs<L> c{};
    do {
      for (std::size_t i = 0; i < L; ++i) c[i] = rng();
      std::size_t top = (bits - 1) / 64;
      for (std::size_t i = top + 1; i < L; ++i) c[i] = 0;
      std::size_t rem = bits - 64 * top;
      if (rem < 64) c[top] &= (u64{1} << rem) - 1;
    } while (bigint::cmp(c, p) >= 0);
    return Fp(&ctx, c);  // uniform in Montgomery domain is uniform in value domain
  }

  const Ctx* ctx() const { return ctx_; }
  const Limbs<L>& montgomery() const { return v_; }

  Limbs<L> to_canonical() const {
    Limbs<L> one{};
    one[0] = 1;
    Limbs<L> out{};
    ctx_->mont_mul(v_, one, out);
    return out;
  }

  Scalar to_scalar() const { return Scalar(to_canonical()); }
  std::string hex() const {
    auto c = to_canonical();
    return bigint::to_hex(c);
  }

  bool is_zero() const { return bigint::is_zero(v_); }

  Fp zero_like() const { return Fp(ctx_, Limbs<L>{}); }
  Fp one_like() const { return Fp(ctx_, ctx_->r_mod_p()); }

  friend Fp operator+(const Fp& a, const Fp& b) {
    check(a, b);
    Fp out = a;
    u64 carry = bigint::add_into(out.v_, b.v_);
    if (carry || bigint::cmp(out.v_, a.ctx_->modulus()) >= 0) bigint::sub_into(out.v_, a.ctx_->modulus());
    return out;
  }

  friend Fp operator-(const Fp& a, const Fp& b) {
    check(a, b);
    Fp out = a;
    if (bigint::sub_into(out.v_, b.v_)) bigint::add_into(out.v_, a.ctx_->modulus());
    return out;
  }

  Fp operator-() const {
    if (is_zero()) return *this;
    Fp out(ctx_, ctx_->modulus());
    bigint::sub_into(out.v_, v_);
    return out;
  }

  friend Fp operator*(const Fp& a, const Fp& b) {
    check(a, b);
    Fp out(a.ctx_, Limbs<L>{});
    a.ctx_->mont_mul(a.v_, b.v_, out.v_);
    return out;
  }

  Fp& operator+=(const Fp& o) { return *this = *this + o; }
  Fp& operator-=(const Fp& o) { return *this = *this - o; }
  Fp& operator*=(const Fp& o) { return *this = *this * o; }

  Fp square() const { return *this * *this; }
  Fp dbl() const { return *this + *this; }

  /// Square-and-multiply, most significant bit first.
  Fp pow(std::span<const u64> exp) const {
    Fp acc = one_like();
    for (std::size_t i = bigint::bit_length(exp); i-- > 0;) {
      acc = acc.square();
      if (bigint::test_bit(exp, i)) acc *= *this;
    }
    return acc;
  }
  Fp pow(u64 e) const {
    u64 w[1] = {e};
    return pow(std::span<const u64>(w));
  }

  /// Fermat inverse a^(p-2).
  Fp inv() const {
    if (is_zero()) throw DivisionByZero("inverse of zero in field " + ctx_->label());
    return pow(ctx_->modulus_minus(2));
  }

  friend bool operator==(const Fp& a, const Fp& b) { return a.ctx_ == b.ctx_ && a.v_ == b.v_; }

 private:
  Fp(const Ctx* ctx, const Limbs<L>& v) : ctx_(ctx), v_(v) {}

  static void check(const Fp& a, const Fp& b) {
    if (a.ctx_ != b.ctx_ || a.ctx_ == nullptr) {
      throw ContextMismatch("field elements belong to different contexts");
    }
  }

  const Ctx* ctx_ = nullptr;
  Limbs<L> v_{};
};

template <std::size_t L>
Fp<L> mont_mul(const Fp<L>& a, const Fp<L>& b) {
  return a * b;
}

template <std::size_t L>
bool FieldCtx<L>::probably_prime(int rounds) const {
  // Small moduli: trial division is exact and cheap.
  if (bigint::bit_length(p_) <= 32) {
    u64 n = p_[0];
    for (u64 d = 3; d * d <= n; d += 2) {
      if (n % d == 0) return false;
    }
    return true;
  }
  auto pm1 = modulus_minus(1);
  std::vector<u64> d = pm1;
  std::size_t s = 0;
  while (!bigint::test_bit(d, 0)) {
    bigint::shr1(d);
    ++s;
  }
  std::mt19937_64 rng(0x5eed5eedULL);
  const Fp<L> one = Fp<L>::one(*this);
  const Fp<L> minus_one = -one;
  for (int round = 0; round < rounds; ++round) {
    Fp<L> a = Fp<L>::random(*this, rng);
    if (a.is_zero() || a == one || a == minus_one) continue;
    Fp<L> x = a.pow(d);
    if (x == one || x == minus_one) continue;
    bool witness = true;
    for (std::size_t r = 1; r < s; ++r) {
      x = x.square();
      if (x == minus_one) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

/// Quadratic extension Fp[u]/(u^2 - beta).
template <std::size_t L>
class Fp2Ctx {
 public:
  Fp2Ctx(std::shared_ptr<const FieldCtx<L>> base, Fp<L> beta) : base_(std::move(base)), beta_(beta) {
    if (beta_.ctx() != base_.get()) throw ContextMismatch("non-residue from a different field");
    // beta must be a non-residue for the tower to be a field.
    auto e = base_->modulus_minus(1);
    bigint::shr1(e);
    if (beta_.is_zero() || beta_.pow(e) == Fp<L>::one(*base_)) {
      throw std::invalid_argument("extension constant is a quadratic residue");
    }
  }

  const FieldCtx<L>& base() const { return *base_; }
  const std::shared_ptr<const FieldCtx<L>>& base_ptr() const { return base_; }
  const Fp<L>& beta() const { return beta_; }

 private:
  std::shared_ptr<const FieldCtx<L>> base_;
  Fp<L> beta_;
};

template <std::size_t L>
class Fp2 {
 public:
  using Ctx = Fp2Ctx<L>;

  Fp2() = default;
  Fp2(const Ctx& ctx, Fp<L> c0, Fp<L> c1) : ctx_(&ctx), c0_(c0), c1_(c1) {
    if (c0_.ctx() != &ctx.base() || c1_.ctx() != &ctx.base()) {
      throw ContextMismatch("extension coefficients belong to a different base field");
    }
  }

  static Fp2 zero(const Ctx& ctx) { return Fp2(ctx, Fp<L>::zero(ctx.base()), Fp<L>::zero(ctx.base())); }
  static Fp2 one(const Ctx& ctx) { return Fp2(ctx, Fp<L>::one(ctx.base()), Fp<L>::zero(ctx.base())); }

  template <class Rng>
  static Fp2 random(const Ctx& ctx, Rng& rng) {
    return Fp2(ctx, Fp<L>::random(ctx.base(), rng), Fp<L>::random(ctx.base(), rng));
  }

  const Ctx* ctx() const { return ctx_; }
  const Fp<L>& c0() const { return c0_; }
  const Fp<L>& c1() const { return c1_; }

  bool is_zero() const { return c0_.is_zero() && c1_.is_zero(); }
  Fp2 zero_like() const { return Fp2(ctx_, c0_.zero_like(), c0_.zero_like()); }
  Fp2 one_like() const { return Fp2(ctx_, c0_.one_like(), c0_.zero_like()); }

  friend Fp2 operator+(const Fp2& a, const Fp2& b) {
    check(a, b);
    return Fp2(a.ctx_, a.c0_ + b.c0_, a.c1_ + b.c1_);
  }
  friend Fp2 operator-(const Fp2& a, const Fp2& b) {
    check(a, b);
    return Fp2(a.ctx_, a.c0_ - b.c0_, a.c1_ - b.c1_);
  }
  Fp2 operator-() const { return Fp2(ctx_, -c0_, -c1_); }

  // (a0 + a1 u)(b0 + b1 u) = (a0 b0 + beta a1 b1) + (a0 b1 + a1 b0) u
  friend Fp2 operator*(const Fp2& a, const Fp2& b) {
    check(a, b);
    Fp<L> v0 = a.c0_ * b.c0_;
    Fp<L> v1 = a.c1_ * b.c1_;
    Fp<L> cross = (a.c0_ + a.c1_) * (b.c0_ + b.c1_) - v0 - v1;
    return Fp2(a.ctx_, v0 + a.ctx_->beta() * v1, cross);
  }

  Fp2 operator*(const Fp<L>& k) const { return Fp2(ctx_, c0_ * k, c1_ * k); }

  Fp2& operator+=(const Fp2& o) { return *this = *this + o; }
  Fp2& operator-=(const Fp2& o) { return *this = *this - o; }
  Fp2& operator*=(const Fp2& o) { return *this = *this * o; }

  Fp2 square() const { return *this * *this; }
  Fp2 dbl() const { return *this + *this; }

  Fp2 inv() const {
    if (is_zero()) throw DivisionByZero("inverse of zero in quadratic extension");
    Fp<L> norm = c0_.square() - ctx_->beta() * c1_.square();
    Fp<L> ni = norm.inv();
    return Fp2(ctx_, c0_ * ni, -(c1_ * ni));
  }

  friend bool operator==(const Fp2& a, const Fp2& b) {
    return a.ctx_ == b.ctx_ && a.c0_ == b.c0_ && a.c1_ == b.c1_;
  }

  std::string hex() const { return "(" + c0_.hex() + ", " + c1_.hex() + ")"; }

 private:
  Fp2(const Ctx* ctx, Fp<L> c0, Fp<L> c1) : ctx_(ctx), c0_(c0), c1_(c1) {}

  static void check(const Fp2& a, const Fp2& b) {
    if (a.ctx_ != b.ctx_ || a.ctx_ == nullptr) {
      throw ContextMismatch("extension elements belong to different contexts");
    }
  }

  const Ctx* ctx_ = nullptr;
  Fp<L> c0_;
  Fp<L> c1_;
};

template <std::size_t L>
Fp2<L> fp2_mul(const Fp2<L>& a, const Fp2<L>& b) {
  return a * b;
}

}  // namespace szkp
