#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "szkp/field.hpp"

namespace szkp {

enum class Direction { forward, inverse };

struct InvalidWitness : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Largest transform the constant-geometry core handles directly.
inline constexpr unsigned kNttCoreLog = 10;

/// Evaluation domain of size N = 2^n: roots of unity plus the coset
/// generator g used by the quotient computation.
template <std::size_t L>
class NttDomain {
 public:
  using F = Fp<L>;

  /// omega = gen^((p-1)/N), g = gen. `gen` should generate the full
  /// multiplicative group.
  static NttDomain from_generator(const F& gen, unsigned log_n) {
    const auto& ctx = *gen.ctx();
    auto e = ctx.modulus_minus(1);
    for (unsigned i = 0; i < log_n; ++i) {
      if (e[0] & 1u) throw std::invalid_argument("2^" + std::to_string(log_n) + " does not divide p - 1 in " + ctx.label());
      bigint::shr1(e);
    }
    return NttDomain(gen.pow(e), gen, log_n);
  }

  /// Explicit root and coset generator (used for the textbook p = 17 cases).
  static NttDomain with_root(const F& omega, const F& g, unsigned log_n) { return NttDomain(omega, g, log_n); }

  std::size_t size() const { return std::size_t{1} << log_n_; }
  unsigned log_size() const { return log_n_; }
  const F& omega() const { return omega_; }
  const F& omega_inv() const { return omega_inv_; }
  const F& n_inv() const { return n_inv_; }
  const F& g() const { return g_; }
  const F& g_inv() const { return g_inv_; }
  /// (g^N - 1)^-1: the vanishing polynomial is this constant on the coset.
  const F& vanishing_inv() const { return vanishing_inv_; }
  const FieldCtx<L>& field() const { return *omega_.ctx(); }

  /// Domain of size 2^log_m with root omega^(N / 2^log_m).
  NttDomain sub(unsigned log_m) const {
    if (log_m > log_n_) throw std::invalid_argument("subdomain larger than domain");
    F w = omega_;
    for (unsigned i = log_m; i < log_n_; ++i) w = w.square();
    return NttDomain(w, g_, log_m);
  }

  const F& root(Direction dir) const { return dir == Direction::forward ? omega_ : omega_inv_; }

 private:
  NttDomain(const F& omega, const F& g, unsigned log_n) : log_n_(log_n), omega_(omega), g_(g) {
    F one = F::one(field());
    F half = omega_;
    for (unsigned i = 1; i < log_n; ++i) half = half.square();
    if (log_n > 0 && !(half == -one)) throw std::invalid_argument("omega is not a primitive 2^n-th root of unity");
    if (log_n == 0 && !(omega_ == one)) throw std::invalid_argument("omega for N = 1 must be 1");
    omega_inv_ = omega_.inv();
    n_inv_ = F::from_u64(field(), size()).inv();
    g_inv_ = g_.inv();
    F gn = g_.pow(static_cast<u64>(size()));
    if (gn == one) throw std::invalid_argument("coset generator is an N-th root of unity");
    vanishing_inv_ = (gn - one).inv();
  }

  unsigned log_n_ = 0;
  F omega_, omega_inv_, n_inv_, g_, g_inv_, vanishing_inv_;
};

/// Read/write indices of one butterfly in a constant-geometry stage.
struct CgAccess {
  std::size_t read_a, read_b, write_lo, write_hi;
  friend bool operator==(const CgAccess&, const CgAccess&) = default;
};

/// Butterfly k of every stage reads x[k], x[k + N/2] and writes y[2k], y[2k+1].
/// There is deliberately no stage argument.
inline CgAccess cg_access(std::size_t n, std::size_t k) { return {k, k + n / 2, 2 * k, 2 * k + 1}; }

/// Optional per-stage record of the addresses touched by ntt_cg.
using CgTrace = std::vector<std::vector<CgAccess>>;

inline std::size_t bit_reverse(std::size_t v, unsigned bits) {
  std::size_t r = 0;
  for (unsigned i = 0; i < bits; ++i, v >>= 1) r = (r << 1) | (v & 1u);
  return r;
}

/// Pease constant-geometry transform with ping/pong buffers (2N words).
/// Output is in natural order.
template <std::size_t L>
std::vector<Fp<L>> ntt_cg(std::span<const Fp<L>> x, Direction dir, const NttDomain<L>& dom, CgTrace* trace = nullptr) {
  const std::size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("NTT length must be a power of two");
  if (n != dom.size()) throw std::invalid_argument("NTT length does not match domain");
  if (dom.log_size() > kNttCoreLog) throw std::invalid_argument("length exceeds the NTT core; use four_step");
  const unsigned logn = dom.log_size();

  std::vector<Fp<L>> tw(n / 2 + 1);
  if (n > 1) {
    tw[0] = Fp<L>::one(dom.field());
    for (std::size_t i = 1; i < n / 2; ++i) tw[i] = tw[i - 1] * dom.root(dir);
  }

  std::vector<Fp<L>> ping(x.begin(), x.end());
  std::vector<Fp<L>> pong(n);
  if (trace) trace->assign(logn, {});
  for (unsigned s = 0; s < logn; ++s) {
    for (std::size_t k = 0; k < n / 2; ++k) {
      CgAccess acc = cg_access(n, k);
      const Fp<L>& a = ping[acc.read_a];
      const Fp<L>& b = ping[acc.read_b];
      pong[acc.write_lo] = a + b;
      pong[acc.write_hi] = (a - b) * tw[(k >> s) << s];
      if (trace) (*trace)[s].push_back(acc);
    }
    ping.swap(pong);
  }

  std::vector<Fp<L>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[bit_reverse(i, logn)] = ping[i];
  if (dir == Direction::inverse) {
    for (auto& v : out) v = v * dom.n_inv();
  }
  return out;
}

enum class OperandKind { inter_step_twiddle, generator, inverse_generator };

/// Operand matrix regenerated from its first column instead of being
/// prefetched: element (i, j) = col0[i]^j, produced by repeated
/// multiplication along each row.
template <std::size_t L>
class OperandStream {
 public:
  class Row {
   public:
    Row(const Fp<L>& step) : step_(step), cur_(step.one_like()) {}
    Fp<L> next() {
      Fp<L> v = cur_;
      cur_ = cur_ * step_;
      return v;
    }

   private:
    Fp<L> step_;
    Fp<L> cur_;
  };

  OperandStream(OperandKind kind, std::vector<Fp<L>> col0, std::size_t cols)
      : kind_(kind), col0_(std::move(col0)), cols_(cols) {}

  /// col0[i] = base^i where base is omega^+-1, g or g^-1 depending on kind.
  static OperandStream make(const NttDomain<L>& dom, OperandKind kind, Direction dir, std::size_t rows,
                            std::size_t cols) {
    Fp<L> base = kind == OperandKind::inter_step_twiddle ? dom.root(dir)
                 : kind == OperandKind::generator        ? dom.g()
                                                         : dom.g_inv();
    std::vector<Fp<L>> col0(rows);
    if (rows > 0) col0[0] = base.one_like();
    for (std::size_t i = 1; i < rows; ++i) col0[i] = col0[i - 1] * base;
    return OperandStream(kind, std::move(col0), cols);
  }

  OperandKind kind() const { return kind_; }
  std::size_t rows() const { return col0_.size(); }
  std::size_t cols() const { return cols_; }
  Row row(std::size_t i) const { return Row(col0_.at(i)); }
  Fp<L> at(std::size_t i, std::size_t j) const { return col0_.at(i).pow(static_cast<u64>(j)); }

 private:
  OperandKind kind_;
  std::vector<Fp<L>> col0_;
  std::size_t cols_;
};

namespace detail {

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  unsigned workers = std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
  if (n < 64 || workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
}

}  // namespace detail

/// Four-step transform: N1 column transforms, inter-step twiddles,
/// N2 row transforms. Input and output in natural order.
template <std::size_t L>
std::vector<Fp<L>> four_step(std::span<const Fp<L>> x, Direction dir, const NttDomain<L>& dom) {
  const std::size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("four-step length must be a power of two");
  if (n != dom.size()) throw std::invalid_argument("four-step length does not match domain");
  const unsigned logn = dom.log_size();
  const unsigned log1 = (logn + 1) / 2;
  const unsigned log2 = logn / 2;
  if (log1 > kNttCoreLog) throw std::invalid_argument("length exceeds four-step capacity");
  const std::size_t n1 = std::size_t{1} << log1;
  const std::size_t n2 = std::size_t{1} << log2;
  auto col_dom = dom.sub(log1);
  auto row_dom = dom.sub(log2);
  auto twiddles = OperandStream<L>::make(dom, OperandKind::inter_step_twiddle, dir, n1, n2);

  // m[k1 * n2 + c] after the column step
  std::vector<Fp<L>> m(n);
  detail::parallel_for(n2, [&](std::size_t c) {
    std::vector<Fp<L>> col(n1);
    for (std::size_t r = 0; r < n1; ++r) col[r] = x[n2 * r + c];
    auto y = ntt_cg<L>(col, dir, col_dom);
    for (std::size_t k1 = 0; k1 < n1; ++k1) m[k1 * n2 + c] = y[k1];
  });

  std::vector<Fp<L>> out(n);
  detail::parallel_for(n1, [&](std::size_t k1) {
    std::vector<Fp<L>> row(n2);
    auto tw = twiddles.row(k1);
    for (std::size_t c = 0; c < n2; ++c) row[c] = m[k1 * n2 + c] * tw.next();
    auto y = ntt_cg<L>(row, dir, row_dom);
    for (std::size_t k2 = 0; k2 < n2; ++k2) out[k1 + n1 * k2] = y[k2];
  });
  return out;
}

/// ntt_cg when the core can take it whole, four-step otherwise.
template <std::size_t L>
std::vector<Fp<L>> transform(std::span<const Fp<L>> x, Direction dir, const NttDomain<L>& dom) {
  if (dom.log_size() <= kNttCoreLog) return ntt_cg<L>(x, dir, dom);
  return four_step<L>(x, dir, dom);
}

/// Quotient coefficients h with A(x)B(x) - C(x) = h(x)(x^N - 1), from the
/// evaluations of A, B, C on the N-th roots of unity.
template <std::size_t L>
std::vector<Fp<L>> poly_pipeline(std::span<const Fp<L>> a, std::span<const Fp<L>> b, std::span<const Fp<L>> c,
                                 const NttDomain<L>& dom) {
  const std::size_t n = dom.size();
  if (a.size() != n || b.size() != n || c.size() != n) throw std::invalid_argument("evaluation vectors must have length N");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(a[i] * b[i] == c[i])) throw InvalidWitness("A*B != C at grid point " + std::to_string(i));
  }
  // The coset vector X is row 1 of the generator stream: g^j.
  auto xs = OperandStream<L>::make(dom, OperandKind::generator, Direction::forward, 2, n);
  auto xs_inv = OperandStream<L>::make(dom, OperandKind::inverse_generator, Direction::forward, 2, n);

  auto to_coset = [&](std::span<const Fp<L>> evals) {
    auto coeffs = transform<L>(evals, Direction::inverse, dom);
    auto g = xs.row(1);
    for (auto& v : coeffs) v = v * g.next();
    return transform<L>(coeffs, Direction::forward, dom);
  };
  auto ca = to_coset(a);
  auto cb = to_coset(b);
  auto cc = to_coset(c);
  std::vector<Fp<L>> hq(n);
  for (std::size_t i = 0; i < n; ++i) hq[i] = (ca[i] * cb[i] - cc[i]) * dom.vanishing_inv();
  auto h = transform<L>(hq, Direction::inverse, dom);
  auto gi = xs_inv.row(1);
  for (auto& v : h) v = v * gi.next();
  return h;
}

}  // namespace szkp
