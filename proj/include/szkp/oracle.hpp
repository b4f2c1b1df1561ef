#pragma once

// Reference evaluators for transforms, quotients and the curve group law.
// Nothing here goes through the NTT, MSM or projective code paths.

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "szkp/curve.hpp"

namespace szkp::oracle {

template <std::size_t L>
std::vector<Fp<L>> dft(std::span<const Fp<L>> x, const Fp<L>& omega) {
  const std::size_t n = x.size();
  std::vector<Fp<L>> out(n, omega.zero_like());
  Fp<L> wk = omega.one_like();
  for (std::size_t k = 0; k < n; ++k) {
    Fp<L> w = omega.one_like();
    for (std::size_t j = 0; j < n; ++j) {
      out[k] = out[k] + x[j] * w;
      w = w * wk;
    }
    wk = wk * omega;
  }
  return out;
}

template <std::size_t L>
std::vector<Fp<L>> cyclic_convolution(std::span<const Fp<L>> a, std::span<const Fp<L>> b) {
  const std::size_t n = a.size();
  std::vector<Fp<L>> out(n, a[0].zero_like());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[(i + j) % n] = out[(i + j) % n] + a[i] * b[j];
  }
  return out;
}

template <std::size_t L>
Fp<L> horner(std::span<const Fp<L>> coeffs, const Fp<L>& x) {
  Fp<L> acc = x.zero_like();
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
  return acc;
}

/// Value at x (off the grid) of the degree < N polynomial taking `evals`
/// on the N-th roots of unity:
///   P(x) = (x^N - 1) / N * sum_j evals[j] * w^j / (x - w^j)
template <std::size_t L>
Fp<L> barycentric(std::span<const Fp<L>> evals, const Fp<L>& omega, const Fp<L>& x) {
  const std::size_t n = evals.size();
  std::vector<Fp<L>> denom(n);
  std::vector<Fp<L>> wj(n);
  Fp<L> w = x.one_like();
  for (std::size_t j = 0; j < n; ++j) {
    wj[j] = w;
    denom[j] = x - w;
    w = w * omega;
  }
  // batch inversion
  std::vector<Fp<L>> prefix(n);
  Fp<L> acc = x.one_like();
  for (std::size_t j = 0; j < n; ++j) {
    prefix[j] = acc;
    acc = acc * denom[j];
  }
  Fp<L> inv = acc.inv();
  Fp<L> sum = x.zero_like();
  for (std::size_t j = n; j-- > 0;) {
    Fp<L> dinv = inv * prefix[j];
    inv = inv * denom[j];
    sum = sum + evals[j] * wj[j] * dinv;
  }
  Fp<L> xn = x.pow(static_cast<u64>(n));
  return (xn - x.one_like()) * Fp<L>::from_u64(*x.ctx(), n).inv() * sum;
}

/// Checks A(x)B(x) - C(x) == h(x)(x^N - 1) at `samples` random points.
template <std::size_t L, class Rng>
bool quotient_identity_holds(std::span<const Fp<L>> a, std::span<const Fp<L>> b, std::span<const Fp<L>> c,
                             std::span<const Fp<L>> h, const Fp<L>& omega, int samples, Rng& rng) {
  const std::size_t n = a.size();
  for (int s = 0; s < samples; ++s) {
    Fp<L> x = Fp<L>::random(*omega.ctx(), rng);
    Fp<L> xn = x.pow(static_cast<u64>(n));
    if (xn == x.one_like()) continue;  // on the grid, skip
    Fp<L> lhs = barycentric(a, omega, x) * barycentric(b, omega, x) - barycentric(c, omega, x);
    Fp<L> rhs = horner(h, x) * (xn - x.one_like());
    if (!(lhs == rhs)) return false;
  }
  return true;
}

/// Affine chord-and-tangent addition on y^2 = x^3 + a x + b; nullopt is O.
template <class F>
std::optional<std::pair<F, F>> affine_add(const CurveCtx<F>& curve, const std::optional<std::pair<F, F>>& p,
                                          const std::optional<std::pair<F, F>>& q) {
  if (!p) return q;
  if (!q) return p;
  const auto& [x1, y1] = *p;
  const auto& [x2, y2] = *q;
  F lambda;
  if (x1 == x2) {
    if ((y1 + y2).is_zero()) return std::nullopt;
    F three = x1.one_like() + x1.one_like() + x1.one_like();
    lambda = (three * x1 * x1 + curve.a) * y1.dbl().inv();
  } else {
    lambda = (y2 - y1) * (x2 - x1).inv();
  }
  F x3 = lambda * lambda - x1 - x2;
  F y3 = lambda * (x1 - x3) - y1;
  return std::make_pair(x3, y3);
}

}  // namespace szkp::oracle
