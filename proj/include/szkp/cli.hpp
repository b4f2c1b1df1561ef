#pragma once

// Command implementations behind the szkp tool. Each command takes a parsed
// RunConfig, writes its CSV to the configured sink and a human summary to
// `log`, and returns the process exit status.

#include <CLI11.hpp>

#include <array>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "szkp/dse.hpp"
#include "szkp/gmp_oracle.hpp"
#include "szkp/ntt.hpp"
#include "szkp/oracle.hpp"
#include "szkp/presets.hpp"
#include "szkp/simcore.hpp"
#include "szkp/workload.hpp"

namespace szkp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;
inline constexpr int kExitUsage = 2;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string command;
  std::string curve = "bn-254";
  std::string workload;  // empty: command default
  std::optional<std::size_t> n;
  u64 seed = 1;
  MsmDesign design{4, 8, 4096, 1};
  NttDesign ntt{4, 16};
  MsmDesign sparse_g1{1, 5, 1024, 4};
  MsmDesign sparse_g2{1, 5, 1024, 4};
  Topology topology = Topology::separate_g1;
  std::string mem_tech = "unconstrained";
  std::string node = "22nm";
  std::string out;  // empty: CSV to stdout
  bool verify = false;
  double zero_one_fraction = kDefaultZeroOneFraction;
  // check
  int samples = 1000;
  bool inject_fault = false;
  // util-sweep
  std::vector<std::string> policies{"RR", "Max-2", "Max-4", "Max-8", "LQ"};
  unsigned w_min = 5, w_max = 8;
  unsigned seeds = 3;
  unsigned t_add = 30;
  unsigned ii = 1;
  // prove
  bool zero_witness = false;
  // dse / bandwidth
  std::string space_file;
  std::vector<std::string> techs;  // empty: all standard
  bool topology_study = false;
  bool ii_study = false;
  std::vector<double> budgets;
};

// ---- flag parsing

inline std::vector<unsigned> parse_uint_list(const std::string& s, std::size_t expect, const char* what) {
  std::vector<unsigned> v;
  std::stringstream in(s);
  for (std::string t; std::getline(in, t, ',');) {
    try {
      std::size_t used = 0;
      unsigned long x = std::stoul(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      v.push_back(static_cast<unsigned>(x));
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + ": '" + t + "' is not an unsigned integer");
    }
  }
  if (v.size() != expect) throw UsageError(std::string(what) + " expects " + std::to_string(expect) + " comma-separated values");
  return v;
}

inline MsmDesign parse_msm_design(const std::string& s) {
  auto v = parse_uint_list(s, 4, "MSM design k_m,w,ppw,ii");
  return {v[0], v[1], v[2], v[3]};
}

inline NttDesign parse_ntt_design(const std::string& s) {
  auto v = parse_uint_list(s, 2, "NTT design k_n,u");
  return {v[0], v[1]};
}

inline unsigned exact_log2(std::size_t n) {
  if (n < 2 || !std::has_single_bit(n)) {
    throw UsageError("N = " + std::to_string(n) + " is not a power of two >= 2; only radix-2 lengths are supported");
  }
  return static_cast<unsigned>(std::countr_zero(n));
}

struct PolicySpec {
  Policy policy;
  unsigned r;
};

inline PolicySpec parse_policy(const std::string& s) {
  if (s == "RR") return {Policy::rr, 0};
  if (s == "LQ") return {Policy::lq, 0};
  if (s.starts_with("Max-")) return {Policy::max_r, parse_uint_list(s.substr(4), 1, "Max-r span")[0]};
  throw UsageError("unknown policy '" + s + "' (expected RR, LQ or Max-<r>)");
}

inline std::vector<MemoryTech> select_techs(const std::vector<std::string>& names) {
  if (names.empty()) return standard_memory_techs();
  std::vector<MemoryTech> v;
  for (const auto& n : names) {
    if (n == "none") continue;
    v.push_back(find_memory_tech(n));
  }
  return v;
}

inline unsigned model_bits(const std::string& curve) { return curve == "mnt-753" ? 753 : 254; }

inline ChipDesign chip_from(const RunConfig& c) {
  ChipDesign chip;
  chip.dense = c.design;
  chip.ntt = c.ntt;
  chip.sparse_g1 = c.sparse_g1;
  chip.sparse_g2 = c.sparse_g2;
  chip.topology = c.topology;
  chip.bits = model_bits(c.curve);
  if (chip.topology == Topology::shared_g1) chip.sparse_g1 = chip.dense;
  chip.validate();
  return chip;
}

inline WorkloadProfile workload_from(const RunConfig& c, const std::string& fallback) {
  if (c.n) return make_workload("custom", exact_log2(*c.n), c.zero_one_fraction);
  return find_workload(c.workload.empty() ? fallback : c.workload, c.zero_one_fraction);
}

/// Writes the CSV to --out when given, else to `out`.
inline void emit_csv(const RunConfig& c, const CsvTable& t, std::ostream& out) {
  if (c.out.empty()) {
    out << t.str();
  } else {
    t.save(c.out);
  }
}

// ---- check

struct SuiteResult {
  explicit SuiteResult(std::string n) : name(std::move(n)) {}

  std::string name;
  std::size_t passed = 0;
  std::size_t total = 0;
  std::vector<std::string> failures;

  void record(bool ok, const std::function<std::string()>& describe) {
    ++total;
    if (ok) {
      ++passed;
    } else if (failures.size() < 5) {
      failures.push_back(describe());
    }
  }
};

namespace detail {

template <class F>
using Affine = std::optional<std::pair<F, F>>;

template <class F>
std::string show(const Point<F>& p) {
  auto a = p.to_affine();
  if (!a) return "O";
  return "(" + a->first.hex() + ", " + a->second.hex() + ")";
}

template <class F>
std::string show(const Affine<F>& a) {
  if (!a) return "O";
  return "(" + a->first.hex() + ", " + a->second.hex() + ")";
}

template <std::size_t L>
void check_field(SuiteResult& s, const FieldCtx<L>& ctx, bool exhaustive, int samples, std::mt19937_64& rng) {
  const mpz_class p = oracle::to_mpz(ctx.modulus());
  auto one_case = [&](const Fp<L>& a, const Fp<L>& b) {
    mpz_class za = oracle::to_mpz(a.to_canonical()), zb = oracle::to_mpz(b.to_canonical());
    bool ok = oracle::to_mpz((a * b).to_canonical()) == oracle::mod_mul(za, zb, p) &&
              oracle::to_mpz((a + b).to_canonical()) == mpz_class((za + zb) % p) &&
              oracle::to_mpz((a - b).to_canonical()) == mpz_class(((za - zb) % p + p) % p);
    if (ok && !a.is_zero()) ok = oracle::to_mpz(a.inv().to_canonical()) == oracle::mod_inv(za, p);
    s.record(ok, [&] { return ctx.label() + ": a=" + a.hex() + " b=" + b.hex(); });
  };
  if (exhaustive) {
    const u64 m = ctx.modulus()[0];
    for (u64 x = 0; x < m; ++x) {
      for (u64 y = 0; y < m; ++y) one_case(Fp<L>::from_u64(ctx, x), Fp<L>::from_u64(ctx, y));
    }
    return;
  }
  for (int i = 0; i < samples; ++i) one_case(Fp<L>::random(ctx, rng), Fp<L>::random(ctx, rng));
}

template <std::size_t L>
void check_fp2(SuiteResult& s, const Fp2Ctx<L>& ctx, int samples, std::mt19937_64& rng) {
  const mpz_class p = oracle::to_mpz(ctx.base().modulus());
  const mpz_class beta = oracle::to_mpz(ctx.beta().to_canonical());
  auto z = [](const Fp<L>& x) { return oracle::to_mpz(x.to_canonical()); };
  for (int i = 0; i < samples; ++i) {
    auto a = Fp2<L>::random(ctx, rng);
    auto b = Fp2<L>::random(ctx, rng);
    auto c = a * b;
    mpz_class c0 = (z(a.c0()) * z(b.c0()) + beta * z(a.c1()) * z(b.c1())) % p;
    mpz_class c1 = (z(a.c0()) * z(b.c1()) + z(a.c1()) * z(b.c0())) % p;
    bool ok = z(c.c0()) == c0 && z(c.c1()) == c1;
    if (ok && !a.is_zero()) ok = a * a.inv() == a.one_like();
    s.record(ok, [&] { return "Fp2: a=" + a.hex() + " b=" + b.hex(); });
  }
}

/// Every affine point of a curve over a prime field small enough to scan.
template <std::size_t L>
std::vector<Point<Fp<L>>> enumerate_points(const CurveCtx<Fp<L>>& curve, const FieldCtx<L>& fq) {
  std::vector<Point<Fp<L>>> pts{Point<Fp<L>>::identity(curve)};
  const u64 m = fq.modulus()[0];
  for (u64 x = 0; x < m; ++x) {
    for (u64 y = 0; y < m; ++y) {
      auto fx = Fp<L>::from_u64(fq, x), fy = Fp<L>::from_u64(fq, y);
      if (fy.square() == fx.square() * fx + curve.a * fx + curve.b) pts.push_back(Point<Fp<L>>::from_affine(curve, fx, fy));
    }
  }
  return pts;
}

template <class F>
void check_group_pair(SuiteResult& s, const CurveCtx<F>& curve, const Point<F>& p, const Point<F>& q) {
  auto got = padd(p, q).to_affine();
  auto want = oracle::affine_add(curve, p.to_affine(), q.to_affine());
  s.record(got == want, [&] {
    return curve.name + ": P=" + show(p) + " Q=" + show(q) + " got " + show<F>(got) + " want " + show<F>(want);
  });
}

template <class F, class Rng>
void check_group_random(SuiteResult& s, const CurveCtx<F>& curve, const Point<F>& gen, int samples, Rng& rng) {
  auto pts = random_points(gen, static_cast<std::size_t>(samples), rng);
  for (int i = 0; i < samples; ++i) {
    const auto& p = pts[static_cast<std::size_t>(i)];
    switch (i % 4) {
      case 0: check_group_pair(s, curve, p, pts[rng() % pts.size()]); break;
      case 1: check_group_pair(s, curve, p, p); break;
      case 2: check_group_pair(s, curve, p, p.neg()); break;
      default: check_group_pair(s, curve, p, Point<F>::identity(curve)); break;
    }
  }
}

template <class F>
void check_msm_case(SuiteResult& s, const CurveCtx<F>& curve, std::span<const Scalar> k, std::span<const Point<F>> pts,
                    unsigned lambda, unsigned w, bool with_sim) {
  auto want = naive_msm<F>(curve, k, pts);
  bool ok = pippenger_msm<F>(curve, k, pts, w, lambda) == want && sparse_msm<F>(curve, k, pts, 5, lambda) == want;
  if (ok && with_sim) {
    PeConfig base;
    MsmDesign d{2, w < 5 ? 5 : w, 1024, 1};
    base.w = d.w;
    ok = simulate_dense_msm_functional<F>(curve, k, pts, lambda, base, d, true).result == want;
  }
  s.record(ok, [&] {
    std::string m = curve.name + ": n=" + std::to_string(k.size()) + " W=" + std::to_string(w) + " scalars";
    for (std::size_t i = 0; i < std::min<std::size_t>(k.size(), 4); ++i) m += " " + k[i].hex();
    return m + (k.size() > 4 ? " ..." : "");
  });
}

template <std::size_t L>
std::vector<Fp<L>> random_vec(const FieldCtx<L>& f, std::size_t n, std::mt19937_64& rng) {
  std::vector<Fp<L>> v;
  v.reserve(n);
  for (std::size_t i = 0; i < n; ++i) v.push_back(Fp<L>::random(f, rng));
  return v;
}

template <std::size_t L>
void check_ntt(SuiteResult& s, const Fp<L>& gen, unsigned max_log, std::mt19937_64& rng) {
  const auto& f = *gen.ctx();
  for (unsigned lg : {2u, 4u, 6u, 8u, 10u}) {
    if (lg > max_log) break;
    if (gen.pow(u64{1} << lg) == gen.one_like()) continue;  // domain needs a coset
    auto dom = NttDomain<L>::from_generator(gen, lg);
    auto x = random_vec(f, dom.size(), rng);
    auto want = oracle::dft<L>(x, dom.omega());
    bool ok = ntt_cg<L>(x, Direction::forward, dom) == want && four_step<L>(x, Direction::forward, dom) == want &&
              ntt_cg<L>(want, Direction::inverse, dom) == x && four_step<L>(want, Direction::inverse, dom) == x;
    if (ok && lg <= 6) {
      auto y = random_vec(f, dom.size(), rng);
      auto fx = ntt_cg<L>(x, Direction::forward, dom), fy = ntt_cg<L>(y, Direction::forward, dom);
      for (std::size_t i = 0; i < fx.size(); ++i) fx[i] = fx[i] * fy[i];
      ok = ntt_cg<L>(fx, Direction::inverse, dom) == oracle::cyclic_convolution<L>(x, y);
    }
    s.record(ok, [&] { return f.label() + ": N=" + std::to_string(dom.size()); });
  }
}

template <std::size_t L>
void check_poly(SuiteResult& s, const Fp<L>& gen, unsigned max_log, std::mt19937_64& rng) {
  const auto& f = *gen.ctx();
  for (unsigned lg = 4; lg <= std::min(max_log, 10u); ++lg) {
    if (gen.pow(u64{1} << lg) == gen.one_like()) continue;  // no coset of this size
    auto dom = NttDomain<L>::from_generator(gen, lg);
    auto a = random_vec(f, dom.size(), rng), b = random_vec(f, dom.size(), rng);
    std::vector<Fp<L>> c(dom.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] * b[i];
    auto h = poly_pipeline<L>(a, b, c, dom);
    bool ok = oracle::quotient_identity_holds<L>(a, b, c, h, dom.omega(), 20, rng);
    s.record(ok, [&] { return f.label() + ": N=" + std::to_string(dom.size()); });
  }
}

/// Largest k with 2^k | p - 1.
template <std::size_t L>
unsigned two_adicity(const FieldCtx<L>& f) {
  auto e = f.modulus_minus(1);
  unsigned k = 0;
  while (!bigint::is_zero(e) && !(e[0] & 1u)) {
    bigint::shr1(e);
    ++k;
  }
  return k;
}

template <std::size_t L>
std::vector<SuiteResult> run_suites(const CurveSuite<L>& c, bool toy, int samples, u64 seed) {
  std::mt19937_64 rng(seed);
  std::vector<SuiteResult> out;

  SuiteResult field{"field"};
  check_field(field, *c.fq, toy, samples, rng);
  check_field(field, *c.fr, toy, samples, rng);
  check_fp2(field, *c.fq2, toy ? 289 : samples, rng);
  out.push_back(std::move(field));

  SuiteResult curve{"curve"};
  if (toy) {
    auto group = enumerate_points(c.g1, *c.fq);
    for (const auto& p : group) {
      for (const auto& q : group) check_group_pair(curve, c.g1, p, q);
    }
  } else {
    check_group_random(curve, c.g1, c.g1_generator, samples, rng);
  }
  check_group_random(curve, c.g2, c.g2_generator, toy ? 300 : std::max(samples / 4, 8), rng);
  out.push_back(std::move(curve));

  SuiteResult msm{"msm"};
  const unsigned lambda = c.scalar_bits();
  if (toy) {
    auto group = enumerate_points(c.g1, *c.fq);
    const u64 order = c.g1_order.limbs()[0];
    for (const auto& p0 : group) {
      for (const auto& p1 : group) {
        std::vector<Point<Fp<L>>> pts{p0, p1};
        for (u64 a = 0; a < order; ++a) {
          for (u64 b = 0; b < order; ++b) {
            std::vector<Scalar> k{Scalar(a), Scalar(b)};
            check_msm_case<Fp<L>>(msm, c.g1, k, pts, lambda, 1 + static_cast<unsigned>((a + b) % 5), (a * order + b) % 37 == 0);
          }
        }
      }
    }
  } else {
    const int cases = std::max(samples / 10, 4);
    auto pool = random_points(c.g1_generator, 256, rng);
    for (int i = 0; i < cases; ++i) {
      std::size_t n = 1 + rng() % (i % 4 == 0 ? 256 : 32);
      std::vector<Point<Fp<L>>> pts;
      std::vector<Scalar> k;
      for (std::size_t j = 0; j < n; ++j) {
        pts.push_back(pool[rng() % pool.size()]);
        u64 kind = rng() % 4;
        k.push_back(kind == 0 ? Scalar(rng() % 2) : random_scalar(c.g1_order, rng));
      }
      check_msm_case<Fp<L>>(msm, c.g1, k, pts, lambda, 5 + static_cast<unsigned>(i % 4), i % 5 == 0);
    }
  }
  out.push_back(std::move(msm));

  SuiteResult ntt{"ntt"};
  SuiteResult poly{"poly"};
  unsigned adic = two_adicity(*c.fr);
  check_ntt(ntt, c.fr_generator, adic, rng);
  check_poly(poly, c.fr_generator, adic, rng);
  if (adic < 10) {
    const auto& tf = toy_ntt_field();
    check_ntt(ntt, tf.generator, two_adicity(*tf.field), rng);
    check_poly(poly, tf.generator, two_adicity(*tf.field), rng);
  }
  out.push_back(std::move(ntt));
  out.push_back(std::move(poly));
  return out;
}

}  // namespace detail

inline int cmd_check(const RunConfig& c, std::ostream& log) {
  std::vector<SuiteResult> suites;
  fault::padd_skip_doubling_branch = c.inject_fault;
  try {
    if (c.curve == "toy") {
      suites = detail::run_suites(toy_curve(), true, c.samples, c.seed);
    } else if (c.curve == "bn-254") {
      suites = detail::run_suites(bn254(), false, c.samples, c.seed);
    } else {
      suites = detail::run_suites(mnt4753(), false, c.samples, c.seed);
    }
  } catch (...) {
    fault::padd_skip_doubling_branch = false;
    throw;
  }
  fault::padd_skip_doubling_branch = false;
  std::size_t bad = 0;
  for (const auto& s : suites) {
    log << "  " << std::left << std::setw(6) << s.name << ' ' << s.passed << '/' << s.total
        << (s.passed == s.total ? " pass" : " FAIL") << '\n';
    for (const auto& f : s.failures) log << "    mismatch " << f << '\n';
    bad += s.total - s.passed;
  }
  log << "check " << c.curve << ": " << (bad == 0 ? "all suites passed" : std::to_string(bad) + " mismatches") << '\n';
  return bad == 0 ? kExitOk : kExitMismatch;
}

// ---- util-sweep

inline CsvTable util_sweep_csv(const RunConfig& c, std::ostream& log) {
  struct Job {
    PolicySpec p;
    std::string label;
    unsigned w;
    u64 seed;
  };
  std::vector<Job> jobs;
  if (c.w_min > c.w_max) throw UsageError("--w-min exceeds --w-max");
  if (c.seeds == 0) throw UsageError("--seeds must be at least 1");
  const std::size_t n = c.n.value_or(std::size_t{1} << 16);
  for (const auto& name : c.policies) {
    PolicySpec p = parse_policy(name);
    for (unsigned w = c.w_min; w <= c.w_max; ++w) {
      for (unsigned s = 0; s < c.seeds; ++s) jobs.push_back({p, name, w, c.seed + s});
    }
  }
  std::vector<PeStats> stats(jobs.size());
  szkp::detail::parallel_for(jobs.size(), [&](std::size_t i) {
    const Job& j = jobs[i];
    PeConfig cfg;
    cfg.w = j.w;
    cfg.policy = j.p.policy;
    if (j.p.policy == Policy::max_r) cfg.r = j.p.r;
    cfg.t_add = c.t_add;
    cfg.ii = c.ii;
    stats[i] = simulate_pe(uniform_digit_stream(j.seed, j.w, n), cfg);
  });
  CsvTable t;
  t.kind = "util-sweep";
  t.columns = {"policy", "W", "r", "t_add", "II", "n", "seed", "cycles", "issues", "utilization"};
  std::map<std::pair<std::string, unsigned>, double> mean;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& j = jobs[i];
    t.add_row({j.label, std::to_string(j.w), std::to_string(j.p.r), std::to_string(c.t_add), std::to_string(c.ii),
               std::to_string(n), std::to_string(j.seed), std::to_string(stats[i].cycles), std::to_string(stats[i].issues),
               csv_num(stats[i].utilization())});
    mean[{j.label, j.w}] += stats[i].utilization() / c.seeds;
  }
  for (const auto& name : c.policies) {
    for (unsigned w = c.w_min; w <= c.w_max; ++w) {
      log << "  " << std::left << std::setw(6) << name << " W=" << w << "  mean utilization " << std::fixed
          << std::setprecision(4) << mean[{name, w}] << '\n';
    }
  }
  log.unsetf(std::ios::floatfield);
  return t;
}

// ---- prove

namespace detail {

/// n scalars with exactly the profile's ones and residual counts, the rest
/// zero, in a seeded random order.
template <class Rng>
std::vector<Scalar> sparse_scalars(std::size_t n, const SparseCounts& counts, const Scalar& order, Rng& rng) {
  std::vector<Scalar> k;
  k.reserve(n);
  for (std::size_t i = 0; i < counts.residual; ++i) {
    Scalar s;
    do s = random_scalar(order, rng);
    while (s.is_zero() || s.is_one());
    k.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < counts.ones; ++i) k.emplace_back(u64{1});
  while (k.size() < n) k.emplace_back();
  for (std::size_t i = n; i-- > 1;) std::swap(k[i], k[rng() % (i + 1)]);
  return k;
}

template <class F>
Point<F> sum_points(const CurveCtx<F>& curve, std::initializer_list<Point<F>> ps) {
  Point<F> acc = Point<F>::identity(curve);
  for (const auto& p : ps) acc = padd(acc, p);
  return acc;
}

/// `poly_gen` generates the multiplicative group of the field the
/// polynomial side runs in; normally the curve's scalar field.
template <std::size_t L>
int prove_functional(const RunConfig& cfg, const CurveSuite<L>& c, const Fp<L>& poly_gen, const WorkloadProfile& w,
                     std::ostream& log) {
  using G1 = typename CurveSuite<L>::G1;
  using G2 = typename CurveSuite<L>::G2;
  const std::size_t n = w.size();
  const auto& fr = *poly_gen.ctx();
  if (w.log_n > two_adicity(fr) || poly_gen.pow(static_cast<u64>(n)) == poly_gen.one_like()) {
    throw UsageError("N = 2^" + std::to_string(w.log_n) + " has no evaluation domain with a coset in " + fr.label());
  }
  std::mt19937_64 rng(cfg.seed);
  auto dom = NttDomain<L>::from_generator(poly_gen, w.log_n);

  // Witness evaluations on the grid with C = A o B.
  std::vector<Fp<L>> a(n, Fp<L>::zero(fr)), b = a, cc = a;
  if (!cfg.zero_witness) {
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = Fp<L>::random(fr, rng);
      b[i] = Fp<L>::random(fr, rng);
      cc[i] = a[i] * b[i];
    }
  }
  auto h = poly_pipeline<L>(a, b, cc, dom);
  std::vector<Scalar> hs;
  hs.reserve(n);
  for (const auto& v : h) hs.push_back(v.to_scalar());

  // Proving-key stand-ins, stored in bit-reversed order.
  auto key = [&](auto gen) {
    auto pts = random_points(gen, n, rng);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = bit_reverse(i, w.log_n);
      if (i < j) std::swap(pts[i], pts[j]);
    }
    return pts;
  };
  auto dense_pts = key(c.g1_generator);
  std::array<std::vector<G1>, 3> sp_pts{key(c.g1_generator), key(c.g1_generator), key(c.g1_generator)};
  auto g2_pts = key(c.g2_generator);
  std::array<std::vector<Scalar>, 3> sp_k;
  for (std::size_t i = 0; i < 3; ++i) {
    sp_k[i] = cfg.zero_witness ? std::vector<Scalar>(n) : sparse_scalars(n, w.g1[i], c.g1_order, rng);
  }
  auto g2_k = cfg.zero_witness ? std::vector<Scalar>(n) : sparse_scalars(n, w.g2, c.g2_order, rng);

  const unsigned lambda = c.scalar_bits();
  G1 dense = pippenger_msm<Fp<L>>(c.g1, hs, dense_pts, cfg.design.w, static_cast<unsigned>(fr.bits()));
  std::array<G1, 3> sp;
  for (std::size_t i = 0; i < 3; ++i) sp[i] = sparse_msm<Fp<L>>(c.g1, sp_k[i], sp_pts[i], 5, lambda);
  G2 spg2 = sparse_msm<Fp2<L>>(c.g2, g2_k, g2_pts, 5, c.g2_scalar_bits());

  G1 proof_g1 = sum_points(c.g1, {dense, sp[0], sp[1], sp[2]});
  log << "proof.G1 = " << show(proof_g1) << '\n';
  log << "proof.G2 = " << show(spg2) << '\n';

  if (!cfg.verify) return kExitOk;
  int bad = 0;
  auto report = [&](const char* what, bool ok) {
    log << "  verify " << std::left << std::setw(10) << what << (ok ? " ok" : " MISMATCH") << '\n';
    bad += !ok;
  };
  report("quotient", oracle::quotient_identity_holds<L>(a, b, cc, h, dom.omega(), 20, rng));
  auto dense_ref = std::async(std::launch::async, [&] { return naive_msm<Fp<L>>(c.g1, hs, dense_pts); });
  std::array<std::future<G1>, 3> sp_ref;
  for (std::size_t i = 0; i < 3; ++i) {
    sp_ref[i] = std::async(std::launch::async, [&, i] { return naive_msm<Fp<L>>(c.g1, sp_k[i], sp_pts[i]); });
  }
  auto g2_ref = std::async(std::launch::async, [&] { return naive_msm<Fp2<L>>(c.g2, g2_k, g2_pts); });
  report("dense", dense_ref.get() == dense);
  for (std::size_t i = 0; i < 3; ++i) report(("sparseG1." + std::to_string(i)).c_str(), sp_ref[i].get() == sp[i]);
  report("sparseG2", g2_ref.get() == spg2);
  return bad == 0 ? kExitOk : kExitMismatch;
}

}  // namespace detail

inline CsvTable breakdown_csv(const std::string& workload, const ChipDesign& chip, const ProofBreakdown& b,
                              const PerfModel& m, const Scaling& s) {
  CsvTable t;
  t.kind = "breakdown";
  t.columns = {"workload", "design", "poly", "dense", "spG1", "spG2", "total", "area", "power"};
  auto ms = [&](double sec) { return csv_num(sec * 1e3 / s.delay); };
  t.add_row({workload, chip.key(), ms(b.poly), ms(b.dense), ms(b.sp_g1), ms(b.sp_g2), ms(b.total),
             csv_num(m.chip_area(chip) / s.area), csv_num(m.chip_power(chip) / s.power)});
  return t;
}

inline int cmd_prove(const RunConfig& c, std::ostream& out, std::ostream& log) {
  auto w = workload_from(c, "AES");
  ChipDesign chip = chip_from(c);
  PerfModel model;
  auto mem = find_memory_tech(c.mem_tech);
  auto b = model.full_proof(chip, w, mem);
  Scaling s = model.catalog().scaling(c.node);
  log << "workload " << w.name << " N=2^" << w.log_n << " on " << c.curve << '\n';
  int rc = kExitOk;
  if (c.curve == "toy") {
    // F17 has no room for a coset domain, so the polynomial side of the toy
    // curve runs in the 30-bit toy NTT field.
    rc = detail::prove_functional(c, toy_curve(), toy_ntt_field().generator, w, log);
  } else if (c.curve == "bn-254") {
    rc = detail::prove_functional(c, bn254(), bn254().fr_generator, w, log);
  } else {
    rc = detail::prove_functional(c, mnt4753(), mnt4753().fr_generator, w, log);
  }
  auto t = breakdown_csv(w.name, chip, b, model, s);
  log << "model (" << c.node << ", " << mem.name << "): poly " << t.rows[0][2] << " ms, dense " << t.rows[0][3]
      << " ms, spG1 " << t.rows[0][4] << " ms, spG2 " << t.rows[0][5] << " ms, total " << t.rows[0][6] << " ms\n";
  emit_csv(c, t, out);
  return rc;
}

// ---- dse and bandwidth

inline int cmd_dse(const RunConfig& c, std::ostream& out, std::ostream& log) {
  DesignSpace space = c.space_file.empty() ? (c.topology_study ? DesignSpace::topology_study() : DesignSpace{})
                                           : DesignSpace::load(c.space_file);
  auto w = workload_from(c, "AES");
  PerfModel model;
  auto r = run_dse(space, w, select_techs(c.techs), model);
  emit_csv(c, dse_csv(r), out);
  log << "dse " << w.name << ": " << r.points.size() << " designs, " << r.frontier.size()
      << " on the frontier (verified against the dominance oracle)\n";
  // At most ~24 frontier rows, evenly spaced; the CSV has all of them.
  const std::size_t stride = std::max<std::size_t>(1, (r.frontier.size() + 23) / 24);
  for (std::size_t i = 0; i < r.frontier.size(); ++i) {
    if (i % stride != 0 && i + 1 != r.frontier.size()) continue;
    const auto& p = r.points[r.frontier[i]];
    log << "  " << std::fixed << std::setprecision(2) << std::setw(9) << p.area << " mm2  " << std::setprecision(4)
        << std::setw(10) << p.runtime() * 1e3 << " ms  " << p.chip.key() << '\n';
  }
  for (double budget : c.budgets) {
    const DesignPoint* best = nullptr;
    for (std::size_t f : r.frontier) {
      if (r.points[f].area <= budget) best = &r.points[f];
    }
    log << "  budget " << std::setprecision(1) << budget << " mm2: "
        << (best ? best->chip.key() + " at " + csv_num(best->runtime() * 1e3) + " ms" : std::string("no design fits"))
        << '\n';
  }
  if (space.topologies.size() == 2) {
    auto tc = compare_topologies(r);
    log << "  topology: max lower-half gap " << std::setprecision(3) << tc.max_gap_lower_half
        << ", top decile separate-only " << (tc.top_decile_separate_only ? "yes" : "no") << '\n';
  }
  if (c.ii_study) {
    auto st = ii_study(space, w, model);
    for (const auto& p : st.picks) {
      log << "  " << p.label << ' ' << p.point.chip.key() << ' ' << csv_num(p.point.area) << " mm2 "
          << csv_num(p.point.runtime() * 1e3) << " ms; fully pipelined within area: "
          << (p.full_pipelined_runtime ? csv_num(*p.full_pipelined_runtime * 1e3) + " ms" : std::string("none")) << '\n';
    }
  }
  log.unsetf(std::ios::floatfield);
  return kExitOk;
}

inline int cmd_bandwidth(const RunConfig& c, std::ostream& out, std::ostream& log) {
  ChipDesign chip = chip_from(c);
  PerfModel model;
  std::vector<WorkloadProfile> ws;
  if (c.n || (!c.workload.empty() && c.workload != "all")) {
    ws.push_back(workload_from(c, "AES"));
  } else {
    ws = builtin_workloads(c.zero_one_fraction);
  }
  auto techs = select_techs(c.techs);
  CsvTable t;
  t.kind = "bandwidth";
  t.columns = {"workload", "design", "tech", "bandwidth_gbps", "runtime_ms", "normalized"};
  for (const auto& w : ws) {
    auto sweep = model.bandwidth_sweep(chip, w, techs);
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      double bw = i == 0 ? std::numeric_limits<double>::infinity() : techs[i - 1].bandwidth;
      t.add_row({w.name, chip.key(), sweep[i].tech, i == 0 ? "inf" : csv_num(bw / 1e9), csv_num(sweep[i].seconds * 1e3),
                 csv_num(sweep[i].normalized)});
      log << "  " << std::left << std::setw(11) << w.name << std::setw(14) << sweep[i].tech << ' '
          << csv_num(sweep[i].normalized) << '\n';
    }
  }
  emit_csv(c, t, out);
  return kExitOk;
}

// ---- entry point

/// Parses argv and runs the chosen command. CSV goes to `out` unless --out
/// names a file; summaries go to `log`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& log) {
  CLI::App app{"szkp: zkSNARK prover accelerator model and reference kernels", "szkp"};
  app.require_subcommand(1);
  RunConfig c;
  std::string design, ntt, sp_g1, sp_g2, topology = "separate-G1";
  const std::vector<std::string> curves{"bn-254", "mnt-753", "toy"};

  auto common = [&](CLI::App* s) {
    s->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
    s->add_option("--out", c.out, "CSV output file (default: stdout)");
  };
  auto curve_opt = [&](CLI::App* s) {
    s->add_option("--curve", c.curve, "curve preset")->check(CLI::IsMember(curves))->capture_default_str();
  };
  auto workload_opts = [&](CLI::App* s) {
    s->add_option("--workload", c.workload, "built-in workload (AES, SHA2, RSA, RSASigVer, MerkleTree, Auction)");
    s->add_option("--n", c.n, "problem size N (power of two), overrides --workload");
    s->add_option("--zero-one", c.zero_one_fraction, "share of sparse scalars in {0,1}")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
  };
  auto chip_opts = [&](CLI::App* s) {
    s->add_option("--design", design, "dense MSM core k_m,w,ppw,ii (default 4,8,4096,1)");
    s->add_option("--ntt", ntt, "NTT core k_n,u (default 4,16)");
    s->add_option("--sparse-g1", sp_g1, "sparse G1 core k_m,w,ppw,ii (default 1,5,1024,4)");
    s->add_option("--sparse-g2", sp_g2, "sparse G2 core k_m,w,ppw,ii (default 1,5,1024,4)");
    s->add_option("--topology", topology, "separate-G1 or shared-G1")->capture_default_str();
  };

  auto* check = app.add_subcommand("check", "run the oracle suites (field, curve, msm, ntt, poly)");
  common(check);
  curve_opt(check);
  check->add_option("--samples", c.samples, "random cases per suite")->check(CLI::PositiveNumber)->capture_default_str();
  check->add_flag("--inject-fault", c.inject_fault, "test hook: break the padd doubling branch")->group("");

  auto* sweep = app.add_subcommand("util-sweep", "PADD utilization per scheduling policy and window size");
  common(sweep);
  sweep->add_option("--policies", c.policies, "policies (RR, LQ, Max-<r>)")->delimiter(',');
  sweep->add_option("--w-min", c.w_min)->capture_default_str();
  sweep->add_option("--w-max", c.w_max)->capture_default_str();
  sweep->add_option("--seeds", c.seeds, "seeds per point, starting at --seed")->capture_default_str();
  sweep->add_option("--n", c.n, "digits per run (default 65536)");
  sweep->add_option("--t-add", c.t_add)->capture_default_str();
  sweep->add_option("--ii", c.ii)->capture_default_str();

  auto* prove = app.add_subcommand("prove", "run the proof dataflow on a synthetic witness and model its latency");
  common(prove);
  curve_opt(prove);
  workload_opts(prove);
  chip_opts(prove);
  prove->add_option("--mem-tech", c.mem_tech, "memory technology for the model")->capture_default_str();
  prove->add_option("--node", c.node, "report latency/area/power at 22nm, 12nm or 7nm")->capture_default_str();
  prove->add_flag("--verify", c.verify, "cross-check every kernel against naive oracles");
  prove->add_flag("--zero-witness", c.zero_witness, "use an all-zero witness");

  auto* dse = app.add_subcommand("dse", "exhaustive design space exploration with Pareto frontier");
  common(dse);
  workload_opts(dse);
  dse->add_option("--space", c.space_file, "design-space file overriding the default knob sets");
  dse->add_option("--techs", c.techs, "memory technologies for normalized columns ('none' for none)")->delimiter(',');
  dse->add_flag("--topology-study", c.topology_study, "let the sparse G2 core grow with K_M");
  dse->add_flag("--ii-study", c.ii_study, "compare sparse cores at II=1 against II in 1..4");
  dse->add_option("--budget", c.budgets, "report the fastest frontier design within this area (mm2)");

  auto* bw = app.add_subcommand("bandwidth", "normalized runtime of one chip per memory technology");
  common(bw);
  curve_opt(bw);
  workload_opts(bw);
  chip_opts(bw);
  bw->add_option("--techs", c.techs, "memory technologies")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    int rc = app.exit(e, o, e2);
    out << o.str();
    log << e2.str();
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!design.empty()) c.design = parse_msm_design(design);
    if (!ntt.empty()) c.ntt = parse_ntt_design(ntt);
    if (!sp_g1.empty()) c.sparse_g1 = parse_msm_design(sp_g1);
    if (!sp_g2.empty()) c.sparse_g2 = parse_msm_design(sp_g2);
    c.topology = parse_topology(topology);
    c.command = app.get_subcommands().front()->get_name();
    if (c.command == "check") return cmd_check(c, log);
    if (c.command == "util-sweep") {
      emit_csv(c, util_sweep_csv(c, log), out);
      return kExitOk;
    }
    if (c.command == "prove") return cmd_prove(c, out, log);
    if (c.command == "dse") return cmd_dse(c, out, log);
    return cmd_bandwidth(c, out, log);
  } catch (const InvalidWitness& e) {
    log << "error: invalid witness: " << e.what() << '\n';
    return kExitMismatch;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace szkp::cli
