#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "szkp/msm.hpp"

namespace szkp {

enum class Policy { rr, max_r, lq };

inline std::string policy_name(Policy p, unsigned r) {
  switch (p) {
    case Policy::rr: return "RR";
    case Policy::max_r: return "Max-" + std::to_string(r);
    case Policy::lq: return "LQ";
  }
  return "?";
}

struct PeConfig {
  unsigned w = 5;
  unsigned depth = 64;  // addresses per bucket queue
  unsigned t_add = 30;
  unsigned ii = 1;
  Policy policy = Policy::lq;
  unsigned r = 8;  // Max-r span

  unsigned buckets() const { return (1u << w) - 1; }

  void validate() const {
    if (w < 1 || w > 16) throw std::invalid_argument("PE window width must be in [1, 16]");
    if (depth == 0) throw std::invalid_argument("bucket queue depth must be at least 1");
    if (t_add == 0 || ii == 0) throw std::invalid_argument("t_add and II must be positive");
    if (policy == Policy::max_r && (r < 2 || r > buckets())) {
      throw std::invalid_argument("Max-r needs 2 <= r <= 2^W - 1 (r=" + std::to_string(r) + ")");
    }
  }
};

struct PeStats {
  std::uint64_t cycles = 0;
  std::uint64_t issues = 0;
  std::uint64_t bubbles = 0;
  std::uint64_t fetch_stalls = 0;
  std::uint64_t digits = 0;

  double utilization() const { return cycles == 0 ? 0.0 : static_cast<double>(issues) / static_cast<double>(cycles); }
};

namespace detail {

/// Buckets grouped by queue depth, restricted to those with no add in
/// flight. Lets LQ find the deepest eligible queue without a full scan.
class DepthIndex {
 public:
  DepthIndex(unsigned buckets, unsigned depth)
      : words_((buckets + 63) / 64), sets_(static_cast<std::size_t>(depth + 1) * words_, 0), level_(buckets, 0) {}

  void place(unsigned b, unsigned level) {
    if (level_[b] != 0) clear_bit(level_[b], b);
    level_[b] = level;
    if (level != 0) set_bit(level, b);
  }

  /// Deepest level first, lowest bucket index within a level; -1 if none.
  int deepest(unsigned max_level) const {
    for (unsigned lv = max_level; lv >= 1; --lv) {
      const u64* row = &sets_[static_cast<std::size_t>(lv) * words_];
      for (std::size_t i = 0; i < words_; ++i) {
        if (row[i] != 0) return static_cast<int>(i * 64 + static_cast<std::size_t>(std::countr_zero(row[i])));
      }
    }
    return -1;
  }

 private:
  void set_bit(unsigned lv, unsigned b) { sets_[lv * words_ + b / 64] |= u64{1} << (b % 64); }
  void clear_bit(unsigned lv, unsigned b) { sets_[lv * words_ + b / 64] &= ~(u64{1} << (b % 64)); }

  std::size_t words_;
  std::vector<u64> sets_;
  std::vector<unsigned> level_;
};

struct NoFunctional {
  void issue(unsigned, std::uint32_t) {}
  void retire(unsigned) {}
};

template <class F>
struct CarriedBuckets {
  std::vector<Point<F>>& acc;
  std::span<const Point<F>> points;
  std::vector<Point<F>> in_flight;

  void issue(unsigned b, std::uint32_t addr) { in_flight[b] = padd(acc[b], points[addr]); }
  void retire(unsigned b) { acc[b] = in_flight[b]; }
};

template <class Hook>
PeStats run_pe(std::span<const std::uint32_t> digits, const PeConfig& cfg, Hook& hook) {
  cfg.validate();
  const unsigned nb = cfg.buckets();
  const unsigned depth = cfg.depth;
  std::vector<std::uint32_t> qbuf(static_cast<std::size_t>(nb) * depth);
  std::vector<unsigned> head(nb, 0), size(nb, 0);
  std::vector<char> busy(nb, 0);
  std::vector<int> wheel(cfg.t_add, -1);
  DepthIndex ready(nb, depth);

  auto refresh = [&](unsigned b) { ready.place(b, busy[b] ? 0 : size[b]); };
  auto eligible = [&](unsigned b) { return !busy[b] && size[b] > 0; };

  PeStats st;
  st.digits = digits.size();
  std::uint64_t nonzero = 0;
  for (auto d : digits) {
    if (d > nb) throw std::invalid_argument("digit out of range for window width");
    nonzero += d != 0;
  }

  std::size_t pos = 0;
  unsigned pointer = 0;
  unsigned in_flight = 0;
  std::uint64_t c = 0;
  while (pos < digits.size() || st.issues < nonzero || in_flight > 0) {
    // fetch: up to two digits, in order, all or nothing
    if (pos < digits.size()) {
      std::size_t take = std::min<std::size_t>(2, digits.size() - pos);
      // a pair aimed at one bucket could never fit a depth-1 queue
      if (take == 2 && depth < 2 && digits[pos] != 0 && digits[pos] == digits[pos + 1]) take = 1;
      bool fits = true;
      for (std::size_t k = 0; k < take; ++k) {
        std::uint32_t d = digits[pos + k];
        if (d == 0) continue;
        unsigned need = 1;
        if (k == 1 && digits[pos] == d) need = 2;
        if (size[d - 1] + need > depth) fits = false;
      }
      if (fits) {
        for (std::size_t k = 0; k < take; ++k) {
          std::uint32_t d = digits[pos + k];
          if (d == 0) continue;
          unsigned b = d - 1;
          qbuf[static_cast<std::size_t>(b) * depth + (head[b] + size[b]) % depth] = static_cast<std::uint32_t>(pos + k);
          ++size[b];
          refresh(b);
        }
        pos += take;
      } else {
        ++st.fetch_stalls;
      }
    }

    // dispatch
    if (c % cfg.ii == 0) {
      int pick = -1;
      switch (cfg.policy) {
        case Policy::rr:
          if (eligible(pointer)) pick = static_cast<int>(pointer);
          pointer = (pointer + 1) % nb;
          break;
        case Policy::max_r: {
          unsigned best = 0;
          for (unsigned k = 0; k < cfg.r; ++k) {
            unsigned b = (pointer + k) % nb;
            if (eligible(b) && size[b] > best) {
              best = size[b];
              pick = static_cast<int>(b);
            }
          }
          pointer = (pointer + cfg.r) % nb;
          break;
        }
        case Policy::lq:
          pick = ready.deepest(depth);
          break;
      }
      if (pick >= 0) {
        unsigned b = static_cast<unsigned>(pick);
        std::uint32_t addr = qbuf[static_cast<std::size_t>(b) * depth + head[b]];
        head[b] = (head[b] + 1) % depth;
        --size[b];
        busy[b] = 1;
        refresh(b);
        hook.issue(b, addr);
        wheel[(c + cfg.t_add - 1) % cfg.t_add] = pick;
        ++in_flight;
        ++st.issues;
      } else {
        ++st.bubbles;
      }
    }

    // retire the add that completes at the end of this cycle
    int& slot = wheel[c % cfg.t_add];
    if (slot >= 0) {
      unsigned b = static_cast<unsigned>(slot);
      hook.retire(b);
      busy[b] = 0;
      refresh(b);
      --in_flight;
      slot = -1;
    }
    ++c;
  }
  st.cycles = c;
  return st;
}

}  // namespace detail

/// One PE over one digit stream (timing only).
inline PeStats simulate_pe(std::span<const std::uint32_t> digits, const PeConfig& cfg) {
  detail::NoFunctional hook;
  return detail::run_pe(digits, cfg, hook);
}

/// Same schedule, but points travel with their addresses and are added into
/// `buckets` (index digit-1) as the adds retire.
template <class F>
PeStats simulate_pe(std::span<const std::uint32_t> digits, const PeConfig& cfg, std::span<const Point<F>> points,
                    std::vector<Point<F>>& buckets) {
  if (points.size() != digits.size()) throw std::invalid_argument("one point per digit required");
  if (buckets.size() != cfg.buckets()) throw std::invalid_argument("bucket vector has wrong size");
  detail::CarriedBuckets<F> hook{buckets, points, std::vector<Point<F>>(buckets.size())};
  return detail::run_pe(digits, cfg, hook);
}

inline u64 splitmix64(u64 x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// digit(window, point index) for a dense MSM.
using DigitSource = std::function<std::uint32_t(unsigned, std::size_t)>;

/// Uniform W-bit digits, a pure function of (seed, window, index).
inline DigitSource uniform_digits(u64 seed, unsigned w) {
  return [seed, w](unsigned window, std::size_t i) {
    u64 h = splitmix64(seed ^ splitmix64((static_cast<u64>(window) << 40) ^ i));
    return static_cast<std::uint32_t>(h & ((u64{1} << w) - 1));
  };
}

/// Uniform digit stream of length n, for single-PE studies.
inline std::vector<std::uint32_t> uniform_digit_stream(u64 seed, unsigned w, std::size_t n) {
  auto src = uniform_digits(seed, w);
  std::vector<std::uint32_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = src(0, i);
  return out;
}

/// Reference accelerator knob sets.
struct DesignSets {
  std::vector<unsigned> k_m{1, 2, 4, 8, 16};
  std::vector<unsigned> w{5, 6, 7, 8};
  std::vector<unsigned> ppw{1024, 2048, 4096, 8192, 16384};
  std::vector<unsigned> ii{1, 2, 3, 4};
  std::vector<unsigned> k_n{1, 2, 4, 8};
  std::vector<unsigned> u{1, 2, 4, 8, 16, 32};
};

inline bool in_design_space(const MsmDesign& d) {
  DesignSets s;
  auto has = [](const std::vector<unsigned>& v, unsigned x) { return std::find(v.begin(), v.end(), x) != v.end(); };
  return has(s.k_m, d.k_m) && has(s.w, d.w) && has(s.ppw, d.ppw) && has(s.ii, d.ii);
}

/// Bank PE i reads in round j.
inline unsigned bank_for(unsigned pe, unsigned round, unsigned k_m) { return (pe + round) % k_m; }

/// Blocking reduction schedules, stepped one operation at a time.
/// Bucket reduction: each of the 2(2^W - 1) adds of the running-sum loop
/// waits for the previous result before it can issue.
inline u64 step_bucket_reduction(unsigned w, unsigned t_add) {
  u64 cycle = 0;
  u64 ready = 0;  // cycle at which the last result is written back
  for (unsigned i = (1u << w) - 1; i >= 1; --i) {
    for (int op = 0; op < 2; ++op) {  // running += B_i, total += running
      cycle = std::max(cycle, ready);
      ready = cycle + t_add;
      cycle += 1;
    }
  }
  return ready;
}

/// Window reduction: per window, K_M W doublings on the shared accumulator
/// followed by one add.
inline u64 step_window_reduction(unsigned k_m, unsigned w, unsigned lambda, unsigned t_dbl, unsigned t_add) {
  u64 ready = 0;
  for (unsigned win = 0; win < window_count(lambda, w); ++win) {
    for (unsigned d = 0; d < k_m * w; ++d) ready += t_dbl;
    ready += t_add;
  }
  return ready;
}

struct DenseMsmTiming {
  u64 accumulate = 0;
  u64 bucket_reduction = 0;
  u64 window_reduction = 0;
  u64 rounds = 0;
  u64 batches = 0;
  u64 issues = 0;
  u64 pe_cycles = 0;  // sum over PEs and rounds, for utilization
  std::vector<u64> batch_cycles;  // accumulate time per point batch

  u64 total() const { return accumulate + bucket_reduction + window_reduction; }
};

namespace detail {

template <class RoundFn>
DenseMsmTiming dense_schedule(std::size_t n, unsigned lambda, const PeConfig& base, const MsmDesign& d,
                              bool allow_outside, RoundFn&& run_pe_round) {
  if (!allow_outside && !in_design_space(d)) throw std::invalid_argument("MSM design outside the reference design space");
  if (d.k_m == 0 || d.ppw == 0) throw std::invalid_argument("K_M and PPW must be positive");
  PeConfig cfg = base;
  cfg.w = d.w;
  cfg.ii = d.ii;
  cfg.validate();
  const unsigned nw = window_count(lambda, d.w);
  const unsigned passes = (nw + d.k_m - 1) / d.k_m;
  const std::size_t batch = static_cast<std::size_t>(d.k_m) * d.ppw;
  DenseMsmTiming t;
  t.batches = (n + batch - 1) / batch;
  t.batch_cycles.reserve(t.batches);
  for (u64 b = 0; b < t.batches; ++b) {
    std::size_t start = b * batch;
    const u64 before = t.accumulate;
    for (unsigned q = 0; q < passes; ++q) {
      for (unsigned j = 0; j < d.k_m; ++j) {
        u64 round = 0;
        for (unsigned i = 0; i < d.k_m; ++i) {
          unsigned win = q * d.k_m + i;
          if (win >= nw) continue;
          std::size_t lo = std::min(n, start + static_cast<std::size_t>(bank_for(i, j, d.k_m)) * d.ppw);
          std::size_t hi = std::min(n, lo + d.ppw);
          if (lo == hi) continue;
          PeStats s = run_pe_round(cfg, win, lo, hi);
          round = std::max(round, s.cycles);
          t.issues += s.issues;
          t.pe_cycles += s.cycles;
        }
        t.accumulate += round;
        ++t.rounds;
      }
    }
    t.batch_cycles.push_back(t.accumulate - before);
  }
  t.bucket_reduction = passes * step_bucket_reduction(d.w, cfg.t_add);
  t.window_reduction = step_window_reduction(d.k_m, d.w, lambda, cfg.t_add, cfg.t_add);
  return t;
}

}  // namespace detail

/// Banked multi-PE dense MSM: batches of K_M * PPW points, K_M windows per
/// pass, K_M rounds per pass with PE i on bank (i + j) % K_M and a barrier
/// after every round. Reductions follow the accumulation.
inline DenseMsmTiming simulate_dense_msm(std::size_t n, unsigned lambda, const PeConfig& base, const MsmDesign& d,
                                         const DigitSource& digits, bool allow_outside = false) {
  std::vector<std::uint32_t> buf;
  return detail::dense_schedule(n, lambda, base, d, allow_outside,
                                [&](const PeConfig& cfg, unsigned win, std::size_t lo, std::size_t hi) {
                                  buf.resize(hi - lo);
                                  for (std::size_t k = lo; k < hi; ++k) buf[k - lo] = digits(win, k);
                                  return simulate_pe(buf, cfg);
                                });
}

template <class F>
struct DenseMsmRun {
  Point<F> result;
  std::vector<std::vector<Point<F>>> window_buckets;
  DenseMsmTiming timing;
};

/// Dense MSM with real points carried through every simulated PADD.
template <class F>
DenseMsmRun<F> simulate_dense_msm_functional(const CurveCtx<F>& curve, std::span<const Scalar> scalars,
                                             std::span<const Point<F>> points, unsigned lambda, const PeConfig& base,
                                             const MsmDesign& d, bool allow_outside = false) {
  detail::check_lengths(scalars.size(), points.size());
  const unsigned nw = window_count(lambda, d.w);
  DenseMsmRun<F> run;
  run.window_buckets.assign(nw, std::vector<Point<F>>((std::size_t{1} << d.w) - 1, Point<F>::identity(curve)));
  std::vector<std::uint32_t> buf;
  run.timing = detail::dense_schedule(scalars.size(), lambda, base, d, allow_outside,
                                      [&](const PeConfig& cfg, unsigned win, std::size_t lo, std::size_t hi) {
                                        buf.resize(hi - lo);
                                        for (std::size_t k = lo; k < hi; ++k) {
                                          buf[k - lo] = scalars[k].bits(static_cast<std::size_t>(win) * d.w, d.w);
                                        }
                                        return simulate_pe<F>(buf, cfg, points.subspan(lo, hi - lo),
                                                              run.window_buckets[win]);
                                      });
  std::vector<Point<F>> sums;
  for (const auto& b : run.window_buckets) sums.push_back(bucket_reduce<F>(curve, b));
  run.result = window_reduce<F>(curve, sums, d.w);
  return run;
}

struct SparseMsmTiming {
  u64 tree = 0;
  u64 tree_issues = 0;
  DenseMsmTiming residual;
  u64 total() const { return tree + residual.total(); }
};

/// Tree-sum level time: floor(m/2) adds over K_M PADDs at one issue per II,
/// then a full drain.
inline u64 sparse_tree_cycles(std::size_t ones, unsigned k_m, unsigned ii, unsigned t_add, u64* issues = nullptr) {
  u64 cycles = 0;
  std::size_t m = ones;
  while (m > 1) {
    std::size_t adds = m / 2;
    u64 slots = (adds + k_m - 1) / k_m;
    cycles += (slots - 1) * ii + t_add;
    if (issues) *issues += adds;
    m = adds + (m % 2);
  }
  return cycles;
}

inline SparseMsmTiming simulate_sparse_msm(std::size_t ones, std::size_t residual, unsigned lambda, const PeConfig& base,
                                          const MsmDesign& d, const DigitSource& digits, bool allow_outside = false) {
  SparseMsmTiming t;
  t.tree = sparse_tree_cycles(ones, d.k_m, d.ii, base.t_add, &t.tree_issues);
  if (residual > 0) t.residual = simulate_dense_msm(residual, lambda, base, d, digits, allow_outside);
  return t;
}

}  // namespace szkp
