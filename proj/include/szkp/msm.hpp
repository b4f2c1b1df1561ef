#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "szkp/curve.hpp"
#include "szkp/ntt.hpp"

namespace szkp {

/// Dense MSM core configuration (PEs, window bits, points per window batch, PADD II).
struct MsmDesign {
  unsigned k_m = 1;
  unsigned w = 5;
  unsigned ppw = 1024;
  unsigned ii = 1;

  unsigned buckets() const { return (1u << w) - 1; }
  friend bool operator==(const MsmDesign&, const MsmDesign&) = default;
  friend auto operator<=>(const MsmDesign&, const MsmDesign&) = default;
};

/// Counts group operations performed by the reduction routines.
struct OpCounter {
  std::uint64_t adds = 0;
  std::uint64_t doublings = 0;
};

inline unsigned window_count(unsigned lambda, unsigned w) { return (lambda + w - 1) / w; }

/// Base-2^W digits of k, least significant first, ceil(lambda / W) of them.
inline std::vector<std::uint32_t> split_windows(const Scalar& k, unsigned w, unsigned lambda) {
  if (w < 1 || w > 32) throw std::invalid_argument("window width must be in [1, 32]");
  if (k.bit_length() > lambda) throw std::invalid_argument("scalar wider than lambda");
  std::vector<std::uint32_t> d(window_count(lambda, w));
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = k.bits(i * w, w);
  return d;
}

namespace detail {

template <class F>
Point<F> counted_add(const Point<F>& a, const Point<F>& b, OpCounter* c) {
  if (c) ++c->adds;
  return padd(a, b);
}

inline void check_lengths(std::size_t s, std::size_t p) {
  if (s != p) throw std::invalid_argument("scalar and point counts differ (" + std::to_string(s) + " vs " + std::to_string(p) + ")");
}

}  // namespace detail

/// sum_i k_i P_i by double-and-add per term. Ground truth for the other paths.
template <class F>
Point<F> naive_msm(const CurveCtx<F>& curve, std::span<const Scalar> scalars, std::span<const Point<F>> points) {
  detail::check_lengths(scalars.size(), points.size());
  Point<F> acc = Point<F>::identity(curve);
  for (std::size_t i = 0; i < scalars.size(); ++i) acc = padd(acc, scalar_mul(scalars[i], points[i]));
  return acc;
}

/// Buckets 1..2^W-1 (stored at index digit-1) for one window.
template <class F>
std::vector<Point<F>> accumulate_window(const CurveCtx<F>& curve, std::span<const Scalar> scalars,
                                        std::span<const Point<F>> points, unsigned w, unsigned window) {
  detail::check_lengths(scalars.size(), points.size());
  std::vector<Point<F>> buckets((std::size_t{1} << w) - 1, Point<F>::identity(curve));
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    std::uint32_t d = scalars[i].bits(static_cast<std::size_t>(window) * w, w);
    if (d != 0) buckets[d - 1] = padd(buckets[d - 1], points[i]);
  }
  return buckets;
}

/// sum_i i * B_i with a running sum and a total running sum, walking the
/// buckets from the top. Always 2 (2^W - 1) additions.
template <class F>
Point<F> bucket_reduce(const CurveCtx<F>& curve, std::span<const Point<F>> buckets, OpCounter* counter = nullptr) {
  Point<F> running = Point<F>::identity(curve);
  Point<F> total = Point<F>::identity(curve);
  for (std::size_t i = buckets.size(); i-- > 0;) {
    running = detail::counted_add(running, buckets[i], counter);
    total = detail::counted_add(total, running, counter);
  }
  return total;
}

/// Horner over window sums, MSB window first: acc = 2^W acc + S_i.
template <class F>
Point<F> window_reduce(const CurveCtx<F>& curve, std::span<const Point<F>> sums, unsigned w,
                       OpCounter* counter = nullptr) {
  Point<F> acc = Point<F>::identity(curve);
  for (std::size_t i = sums.size(); i-- > 0;) {
    if (i + 1 < sums.size()) {
      for (unsigned d = 0; d < w; ++d) {
        acc = pdbl(acc);
        if (counter) ++counter->doublings;
      }
    }
    acc = detail::counted_add(acc, sums[i], counter);
  }
  return acc;
}

inline unsigned max_scalar_bits(std::span<const Scalar> scalars) {
  std::size_t b = 1;
  for (const auto& s : scalars) b = std::max(b, s.bit_length());
  return static_cast<unsigned>(b);
}

/// Pippenger bucket method. lambda = 0 takes the widest scalar.
template <class F>
Point<F> pippenger_msm(const CurveCtx<F>& curve, std::span<const Scalar> scalars, std::span<const Point<F>> points,
                       unsigned w, unsigned lambda = 0) {
  detail::check_lengths(scalars.size(), points.size());
  if (w < 1 || w > 20) throw std::invalid_argument("window width must be in [1, 20]");
  if (lambda == 0) lambda = max_scalar_bits(scalars);
  const unsigned nw = window_count(lambda, w);
  std::vector<Point<F>> sums(nw);
  detail::parallel_for(nw, [&](std::size_t win) {
    auto buckets = accumulate_window(curve, scalars, points, w, static_cast<unsigned>(win));
    sums[win] = bucket_reduce<F>(curve, buckets);
  });
  return window_reduce<F>(curve, sums, w);
}

/// Pairwise reduction: each level adds neighbours, an odd last element is
/// carried up unchanged.
template <class F>
Point<F> tree_sum(const CurveCtx<F>& curve, std::vector<Point<F>> level, OpCounter* counter = nullptr,
                  std::vector<std::size_t>* adds_per_level = nullptr) {
  if (level.empty()) return Point<F>::identity(curve);
  while (level.size() > 1) {
    std::vector<Point<F>> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) next.push_back(detail::counted_add(level[i], level[i + 1], counter));
    if (adds_per_level) adds_per_level->push_back(level.size() / 2);
    if (level.size() % 2) next.push_back(level.back());
    level.swap(next);
  }
  return level[0];
}

/// Shape of a sparse MSM after filtering.
struct SparseProfile {
  std::size_t ones = 0;
  std::size_t residual = 0;
  std::size_t dropped = 0;  // zero scalars and points at infinity
};

template <class F>
SparseProfile sparse_profile(std::span<const Scalar> scalars, std::span<const Point<F>> points) {
  detail::check_lengths(scalars.size(), points.size());
  SparseProfile p;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    if (scalars[i].is_zero() || points[i].is_identity()) ++p.dropped;
    else if (scalars[i].is_one()) ++p.ones;
    else ++p.residual;
  }
  return p;
}

/// Drops zero scalars and identity points, tree-sums the scalar-1 points and
/// runs Pippenger on what is left.
template <class F>
Point<F> sparse_msm(const CurveCtx<F>& curve, std::span<const Scalar> scalars, std::span<const Point<F>> points,
                    unsigned w = 5, unsigned lambda = 0) {
  detail::check_lengths(scalars.size(), points.size());
  std::vector<Point<F>> ones;
  std::vector<Scalar> rs;
  std::vector<Point<F>> rp;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    if (scalars[i].is_zero() || points[i].is_identity()) continue;
    if (scalars[i].is_one()) {
      ones.push_back(points[i]);
    } else {
      rs.push_back(scalars[i]);
      rp.push_back(points[i]);
    }
  }
  Point<F> sum = tree_sum(curve, std::move(ones));
  if (!rs.empty()) sum = padd(sum, pippenger_msm<F>(curve, rs, rp, w, lambda));
  return sum;
}

}  // namespace szkp
