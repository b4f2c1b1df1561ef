#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "szkp/field.hpp"
#include "szkp/params.hpp"

namespace szkp {

namespace fault {
/// Test hook: when set, padd stops routing P == Q to the doubling formula.
/// Used by the negative control of the CLI self-check.
inline std::atomic<bool> padd_skip_doubling_branch{false};
}  // namespace fault

/// Short Weierstrass curve y^2 = x^3 + a x + b over a field F (Fp or Fp2).
template <class F>
struct CurveCtx {
  std::string name;
  F a;
  F b;
};

/// Homogeneous projective point (x, y) = (X/Z, Y/Z). The identity has Z = 0.
template <class F>
class Point {
 public:
  using Field = F;

  Point() = default;

  static Point identity(const CurveCtx<F>& curve) {
    return Point(&curve, curve.b.zero_like(), curve.b.one_like(), curve.b.zero_like());
  }

  static Point from_affine(const CurveCtx<F>& curve, const F& x, const F& y) {
    Point p(&curve, x, y, x.one_like());
    if (!p.is_on_curve()) throw std::invalid_argument("point is not on curve " + curve.name);
    return p;
  }

  static Point from_projective_unchecked(const CurveCtx<F>& curve, const F& x, const F& y, const F& z) {
    return Point(&curve, x, y, z);
  }

  const CurveCtx<F>* curve() const { return curve_; }
  const F& x() const { return x_; }
  const F& y() const { return y_; }
  const F& z() const { return z_; }

  bool is_identity() const { return z_.is_zero(); }

  /// Y^2 Z = X^3 + a X Z^2 + b Z^3
  bool is_on_curve() const {
    if (is_identity()) return true;
    F zz = z_.square();
    F lhs = y_.square() * z_;
    F rhs = x_.square() * x_ + curve_->a * x_ * zz + curve_->b * zz * z_;
    return lhs == rhs;
  }

  std::optional<std::pair<F, F>> to_affine() const {
    if (is_identity()) return std::nullopt;
    F zi = z_.inv();
    return std::make_pair(x_ * zi, y_ * zi);
  }

  Point neg() const {
    if (is_identity()) return *this;
    return Point(curve_, x_, -y_, z_);
  }

  friend bool operator==(const Point& p, const Point& q) {
    if (p.is_identity() || q.is_identity()) return p.is_identity() && q.is_identity();
    return p.x_ * q.z_ == q.x_ * p.z_ && p.y_ * q.z_ == q.y_ * p.z_;
  }

 private:
  Point(const CurveCtx<F>* curve, F x, F y, F z) : curve_(curve), x_(std::move(x)), y_(std::move(y)), z_(std::move(z)) {}

  template <class G>
  friend Point<G> pdbl(const Point<G>& p);
  template <class G>
  friend Point<G> padd(const Point<G>& p, const Point<G>& q);

  const CurveCtx<F>* curve_ = nullptr;
  F x_;
  F y_;
  F z_;
};

/// Point doubling (dbl-2007-bl, general a).
template <class F>
Point<F> pdbl(const Point<F>& p) {
  if (p.is_identity() || p.y_.is_zero()) return Point<F>::identity(*p.curve_);
  const F& x1 = p.x_;
  const F& y1 = p.y_;
  const F& z1 = p.z_;
  F xx = x1.square();
  F w = p.curve_->a * z1.square() + xx.dbl() + xx;
  F s = (y1 * z1).dbl();
  F ss = s.square();
  F sss = s * ss;
  F r = y1 * s;
  F rr = r.square();
  F b = (x1 + r).square() - xx - rr;
  F h = w.square() - b.dbl();
  return Point<F>(p.curve_, h * s, w * (b - h) - rr.dbl(), sss);
}

/// Point addition (add-1998-cmo-2) with explicit case analysis for the
/// identity, P == Q and P == -Q.
template <class F>
Point<F> padd(const Point<F>& p, const Point<F>& q) {
  if (p.curve_ != q.curve_) throw ContextMismatch("points on different curves");
  if (p.is_identity()) return q;
  if (q.is_identity()) return p;
  F y1z2 = p.y_ * q.z_;
  F x1z2 = p.x_ * q.z_;
  F z1z2 = p.z_ * q.z_;
  F u = q.y_ * p.z_ - y1z2;
  F v = q.x_ * p.z_ - x1z2;
  if (v.is_zero()) {
    if (!u.is_zero()) return Point<F>::identity(*p.curve_);
    if (!fault::padd_skip_doubling_branch.load(std::memory_order_relaxed)) return pdbl(p);
  }
  F uu = u.square();
  F vv = v.square();
  F vvv = v * vv;
  F r = vv * x1z2;
  F a = uu * z1z2 - vvv - r.dbl();
  Point<F> out(p.curve_, v * a, u * (r - a) - vvv * y1z2, vvv * z1z2);
  if (out.z_.is_zero()) return Point<F>::identity(*p.curve_);
  return out;
}

/// Double-and-add, most significant bit first. Reference path only.
template <class F>
Point<F> scalar_mul(const Scalar& k, const Point<F>& p) {
  Point<F> acc = Point<F>::identity(*p.curve());
  for (std::size_t i = k.bit_length(); i-- > 0;) {
    acc = pdbl(acc);
    if (k.bit(i)) acc = padd(acc, p);
  }
  return acc;
}

template <class F>
Point<F> scalar_mul(u64 k, const Point<F>& p) {
  return scalar_mul(Scalar(k), p);
}

// G2 spellings of the same group law.
template <std::size_t L>
Point<Fp2<L>> padd2(const Point<Fp2<L>>& p, const Point<Fp2<L>>& q) {
  return padd(p, q);
}
template <std::size_t L>
Point<Fp2<L>> pdbl2(const Point<Fp2<L>>& p) {
  return pdbl(p);
}
template <std::size_t L>
Point<Fp2<L>> scalar_mul2(const Scalar& k, const Point<Fp2<L>>& p) {
  return scalar_mul(k, p);
}

/// Everything needed to work with one curve family: base field, scalar
/// field, quadratic extension, G1/G2 and generators. Loaded from a
/// curve-parameter file; not copyable because points refer back into it.
template <std::size_t L>
struct CurveSuite {
  using G1 = Point<Fp<L>>;
  using G2 = Point<Fp2<L>>;

  std::string name;
  std::string label;
  std::shared_ptr<const FieldCtx<L>> fq;
  std::shared_ptr<const FieldCtx<L>> fr;
  std::unique_ptr<Fp2Ctx<L>> fq2;
  CurveCtx<Fp<L>> g1;
  CurveCtx<Fp2<L>> g2;
  G1 g1_generator;
  G2 g2_generator;
  Scalar g1_order;
  Scalar g2_order;
  Fp<L> fr_generator;

  CurveSuite() = default;
  CurveSuite(const CurveSuite&) = delete;
  CurveSuite& operator=(const CurveSuite&) = delete;

  /// Bit width of scalars for MSMs over G1.
  unsigned scalar_bits() const { return static_cast<unsigned>(g1_order.bit_length()); }
  unsigned g2_scalar_bits() const { return static_cast<unsigned>(g2_order.bit_length()); }
  unsigned base_bits() const { return static_cast<unsigned>(fq->bits()); }
};

template <std::size_t L>
std::unique_ptr<CurveSuite<L>> load_curve(const std::filesystem::path& path) {
  auto kv = KeyValueFile::load(path);
  auto suite = std::make_unique<CurveSuite<L>>();
  suite->name = kv.str("name");
  suite->label = kv.str("label");
  suite->fq = FieldCtx<L>::create(kv.hex("p"), suite->name + "/fq");
  suite->fr = FieldCtx<L>::create(kv.hex("fr"), suite->name + "/fr");
  const auto& fq = *suite->fq;
  auto fq_el = [&](const char* key) { return Fp<L>::from_canonical(fq, kv.hex(key)); };
  suite->fq2 = std::make_unique<Fp2Ctx<L>>(suite->fq, fq_el("beta"));
  const auto& fq2 = *suite->fq2;
  auto fq2_el = [&](const std::string& key) {
    return Fp2<L>(fq2, fq_el((key + "_c0").c_str()), fq_el((key + "_c1").c_str()));
  };
  suite->g1 = CurveCtx<Fp<L>>{suite->name + "/G1", fq_el("a"), fq_el("b")};
  suite->g2 = CurveCtx<Fp2<L>>{suite->name + "/G2", fq2_el("g2_a"), fq2_el("g2_b")};
  suite->g1_generator = Point<Fp<L>>::from_affine(suite->g1, fq_el("g1_x"), fq_el("g1_y"));
  suite->g2_generator = Point<Fp2<L>>::from_affine(suite->g2, fq2_el("g2_x"), fq2_el("g2_y"));
  suite->g1_order = Scalar(kv.hex("r"));
  suite->g2_order = Scalar(kv.hex("r2"));
  suite->fr_generator = Fp<L>::from_canonical(*suite->fr, kv.hex("fr_generator"));
  return suite;
}

/// Pseudo-random points in the subgroup generated by `base`: a random walk
/// over a small table of random multiples. Cheap enough for 2^14+ point sets.
template <class F, class Rng>
std::vector<Point<F>> random_points(const Point<F>& base, std::size_t n, Rng& rng) {
  std::vector<Point<F>> table;
  for (int i = 0; i < 16; ++i) table.push_back(scalar_mul(Scalar(rng() | 1u), base));
  std::vector<Point<F>> out;
  out.reserve(n);
  Point<F> cur = table[0];
  for (std::size_t i = 0; i < n; ++i) {
    cur = padd(cur, table[rng() % table.size()]);
    out.push_back(cur);
  }
  return out;
}

/// Uniform scalar below `bound` (rejection sampling on the bit length).
template <class Rng>
Scalar random_scalar(const Scalar& bound, Rng& rng) {
  std::size_t bits = bound.bit_length();
  std::size_t words = (bits + 63) / 64;
  for (;;) {
    std::vector<u64> w(words);
    for (auto& x : w) x = rng();
    if (bits % 64 != 0) w.back() &= (u64{1} << (bits % 64)) - 1;
    Scalar s(std::move(w));
    if (s < bound) return s;
  }
}

}  // namespace szkp
