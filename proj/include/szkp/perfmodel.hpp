#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "szkp/params.hpp"
#include "szkp/simcore.hpp"

namespace szkp {

enum class Group { g1, g2 };
enum class Topology { separate_g1, shared_g1 };

inline std::string topology_name(Topology t) { return t == Topology::shared_g1 ? "shared-G1" : "separate-G1"; }

inline Topology parse_topology(const std::string& s) {
  if (s == "shared-G1" || s == "shared") return Topology::shared_g1;
  if (s == "separate-G1" || s == "separate") return Topology::separate_g1;
  throw std::invalid_argument("unknown topology '" + s + "' (expected shared-G1 or separate-G1)");
}

/// NTT core: K_N PEs with U butterflies each.
struct NttDesign {
  unsigned k_n = 1;
  unsigned u = 1;
  friend bool operator==(const NttDesign&, const NttDesign&) = default;
  friend auto operator<=>(const NttDesign&, const NttDesign&) = default;
};

inline bool in_design_space(const NttDesign& d) {
  DesignSets s;
  return std::ranges::find(s.k_n, d.k_n) != s.k_n.end() && std::ranges::find(s.u, d.u) != s.u.end();
}

inline std::string to_string(const MsmDesign& d) {
  return "(" + std::to_string(d.k_m) + "," + std::to_string(d.w) + "," + std::to_string(d.ppw) + "," +
         std::to_string(d.ii) + ")";
}
inline std::string to_string(const NttDesign& d) {
  return "(" + std::to_string(d.k_n) + "," + std::to_string(d.u) + ")";
}

/// Scale factors from 22 nm to a target node; results are divided by them.
struct Scaling {
  double area = 1.0;
  double delay = 1.0;
  double power = 1.0;
};

struct PaddSpec {
  double area = 0;
  double power = 0;
  unsigned cycles = 0;
  unsigned modmuls = 0;
  bool estimated = false;  // derived from the modmul ratio, not a synthesized figure
};

/// Component areas, powers and latencies plus the model's calibration
/// constants, read from components.params.
class ComponentCatalog {
 public:
  static ComponentCatalog load(const std::filesystem::path& path) {
    ComponentCatalog c;
    c.kv_ = KeyValueFile::load(path);
    c.ntt_stage_fill = static_cast<unsigned>(c.kv_.number("ntt.stage_fill"));
    c.ntt_buffer_words = static_cast<unsigned>(c.kv_.number("ntt.buffer_words"));
    c.queue_depth = static_cast<unsigned>(c.kv_.number("msm.queue_depth"));
    c.clock_hz = c.kv_.number("clock_hz");
    return c;
  }

  static const ComponentCatalog& standard() {
    static const ComponentCatalog c = load(data_dir() / "components.params");
    return c;
  }

  PaddSpec padd(Group g, unsigned bits, unsigned ii) const {
    const std::string base = std::string(g == Group::g1 ? "g1." : "g2.") + std::to_string(bits);
    const std::string key = base + ".ii" + std::to_string(ii);
    if (!kv_.has(base + ".cycles") || !kv_.has(key + ".modmul")) {
      throw ParamError("unknown component: PADD " + key);
    }
    PaddSpec p;
    p.cycles = static_cast<unsigned>(kv_.number(base + ".cycles"));
    p.modmuls = static_cast<unsigned>(kv_.number(key + ".modmul"));
    if (kv_.has(key + ".area")) {
      p.area = kv_.number(key + ".area");
      p.power = kv_.number(key + ".power");
      return p;
    }
    // Only II=4 is synthesized for some units; other IIs scale with modmul count.
    const std::string ref = base + ".ii4";
    if (!kv_.has(ref + ".area")) throw ParamError("unknown component: PADD " + key);
    double ratio = static_cast<double>(p.modmuls) / kv_.number(ref + ".modmul");
    p.area = kv_.number(ref + ".area") * ratio;
    p.power = kv_.number(ref + ".power") * ratio;
    p.estimated = true;
    return p;
  }

  double butterfly_area(unsigned bits) const { return kv_.number("butterfly." + std::to_string(bits) + ".area"); }
  double butterfly_power(unsigned bits) const { return kv_.number("butterfly." + std::to_string(bits) + ".power"); }
  double modmul_area(unsigned bits) const { return kv_.number("modmul." + std::to_string(bits) + ".area"); }
  double modmul_power(unsigned bits) const { return kv_.number("modmul." + std::to_string(bits) + ".power"); }

  /// node is "22nm", "12nm" or "7nm".
  Scaling scaling(const std::string& node) const {
    if (node == "22nm") return {};
    const std::string k = "scale." + node;
    if (!kv_.has(k + ".area")) throw ParamError("unknown technology node '" + node + "'");
    return {kv_.number(k + ".area"), kv_.number(k + ".delay"), kv_.number(k + ".power")};
  }

  double sram_mm2_per_bit(unsigned bits) const { return kv_.number("sram." + std::to_string(bits) + ".mm2_per_bit"); }

  unsigned ntt_stage_fill = 0;
  unsigned ntt_buffer_words = 0;
  unsigned queue_depth = 64;
  double clock_hz = 3e8;

 private:
  KeyValueFile kv_;
};

struct MemoryTech {
  std::string name = "unconstrained";
  double bandwidth = std::numeric_limits<double>::infinity();  // bytes/s
  double power = 0;

  bool unconstrained() const { return std::isinf(bandwidth); }
  double seconds(double bytes) const { return unconstrained() ? 0.0 : bytes / bandwidth; }
};

inline MemoryTech unconstrained_memory() { return {}; }

inline std::vector<MemoryTech> load_memory_techs(const std::filesystem::path& path) {
  auto kv = KeyValueFile::load(path);
  std::istringstream names(kv.str("techs"));
  std::vector<MemoryTech> out;
  for (std::string n; names >> n;) {
    MemoryTech m{n, kv.number(n + ".bandwidth"), kv.number(n + ".power")};
    if (!(m.bandwidth > 0)) throw ParamError(path.string() + ": bandwidth of " + n + " must be positive");
    out.push_back(m);
  }
  return out;
}

inline const std::vector<MemoryTech>& standard_memory_techs() {
  static const std::vector<MemoryTech> v = load_memory_techs(data_dir() / "memtech.params");
  return v;
}

inline MemoryTech find_memory_tech(const std::string& name) {
  if (name == "unconstrained" || name == "ideal") return unconstrained_memory();
  for (const auto& m : standard_memory_techs()) {
    if (m.name == name) return m;
  }
  throw std::invalid_argument("unknown memory technology '" + name + "'");
}

struct SparseCounts {
  std::size_t ones = 0;
  std::size_t residual = 0;
};

struct WorkloadProfile {
  std::string name;
  unsigned log_n = 14;
  std::array<SparseCounts, 3> g1{};
  SparseCounts g2{};

  std::size_t size() const { return std::size_t{1} << log_n; }
};

struct ChipDesign {
  MsmDesign dense{4, 8, 4096, 1};
  MsmDesign sparse_g1{1, 5, 1024, 4};  // ignored under shared-G1
  MsmDesign sparse_g2{1, 5, 1024, 4};
  NttDesign ntt{4, 16};
  Topology topology = Topology::separate_g1;
  unsigned bits = 254;

  /// The core that runs the sparse G1 MSMs.
  const MsmDesign& g1_sparse_core() const { return topology == Topology::shared_g1 ? dense : sparse_g1; }

  void validate() const {
    if (bits != 254 && bits != 753) throw std::invalid_argument("bit width must be 254 or 753");
    for (const MsmDesign* d : {&dense, &g1_sparse_core(), &sparse_g2}) {
      if (!in_design_space(*d)) throw std::invalid_argument("MSM design " + to_string(*d) + " outside the reference design space");
    }
    if (!in_design_space(ntt)) throw std::invalid_argument("NTT design " + to_string(ntt) + " outside the reference design space");
  }

  std::string key() const {
    std::string s = to_string(dense) + " ntt" + to_string(ntt) + " " + topology_name(topology);
    if (topology == Topology::separate_g1) s += " spg1" + to_string(sparse_g1);
    return s + " spg2" + to_string(sparse_g2) + " " + std::to_string(bits) + "b";
  }
};

inline std::size_t point_bytes(unsigned bits, Group g) {
  std::size_t b = (3 * static_cast<std::size_t>(bits) + 7) / 8;
  return g == Group::g2 ? 2 * b : b;
}
inline std::size_t scalar_bytes(unsigned lambda) { return (lambda + 7) / 8; }

/// Cycles of one constant-geometry transform of length len on U butterflies:
/// log2(len) stages, each issuing len/2 butterflies U at a time and then
/// draining the pipeline before the next stage reads its results.
inline u64 ntt_core_cycles(std::size_t len, unsigned u, unsigned stage_fill) {
  if (len < 2) return 0;
  u64 stages = static_cast<u64>(std::countr_zero(len));
  u64 per_stage = (len / 2 + u - 1) / u + stage_fill;
  return stages * per_stage;
}

/// Compute cycles and off-chip bytes of one four-step phase.
struct PolyPhase {
  u64 cycles = 0;
  double bytes = 0;
};

/// Column phase then row phase of one four-step (I)NTT of size 2^log_n.
/// Each phase streams the whole vector in and back out.
inline std::array<PolyPhase, 2> four_step_phases(unsigned log_n, const NttDesign& d, unsigned bits, unsigned stage_fill) {
  const unsigned l1 = (log_n + 1) / 2;
  const unsigned l2 = log_n - l1;
  const u64 n1 = u64{1} << l1;
  const u64 n2 = u64{1} << l2;
  const double bytes = 2.0 * static_cast<double>(u64{1} << log_n) * static_cast<double>(scalar_bytes(bits));
  auto batches = [&](u64 count) { return (count + d.k_n - 1) / d.k_n; };
  return {PolyPhase{batches(n2) * ntt_core_cycles(n1, d.u, stage_fill), bytes},
          PolyPhase{batches(n1) * ntt_core_cycles(n2, d.u, stage_fill), bytes}};
}

inline constexpr unsigned kPolyTransforms = 7;

/// Closed-form stand-in for simulate_dense_msm. Per-round PE time comes from
/// short calibration runs of the cycle simulator, cached per
/// (active PEs, digits, W, II, t_add, depth, policy); reductions are exact.
class DenseSurrogate {
 public:
  explicit DenseSurrogate(u64 seed = 1) : seed_(seed) {}

  DenseSurrogate(const DenseSurrogate& o) : seed_(o.seed_) {
    std::lock_guard lock(o.mu_);
    cache_ = o.cache_;
  }

  u64 round_cycles(unsigned active, std::size_t len, const PeConfig& cfg) const {
    if (active == 0 || len == 0) return 0;
    Key k{active, len, cfg.w, cfg.ii, cfg.t_add, cfg.depth, static_cast<unsigned>(cfg.policy), cfg.r};
    {
      std::lock_guard lock(mu_);
      if (auto it = cache_.find(k); it != cache_.end()) return it->second;
    }
    const std::size_t samples = std::clamp<std::size_t>((std::size_t{1} << 17) / (active * len), 2, 64);
    u64 sum = 0;
    for (std::size_t s = 0; s < samples; ++s) {
      u64 worst = 0;
      for (unsigned pe = 0; pe < active; ++pe) {
        u64 stream_seed = splitmix64(seed_ ^ splitmix64((s << 20) ^ (u64{pe} << 8) ^ cfg.w));
        auto digits = uniform_digit_stream(stream_seed, cfg.w, len);
        worst = std::max(worst, simulate_pe(digits, cfg).cycles);
      }
      sum += worst;
    }
    u64 v = (sum + samples / 2) / samples;
    std::lock_guard lock(mu_);
    cache_.emplace(k, v);
    return v;
  }

  /// Same schedule as simulate_dense_msm, with round times looked up.
  DenseMsmTiming estimate(std::size_t n, unsigned lambda, const PeConfig& base, const MsmDesign& d) const {
    PeConfig cfg = base;
    cfg.w = d.w;
    cfg.ii = d.ii;
    cfg.validate();
    const unsigned nw = window_count(lambda, d.w);
    const unsigned passes = (nw + d.k_m - 1) / d.k_m;
    const std::size_t batch = static_cast<std::size_t>(d.k_m) * d.ppw;
    DenseMsmTiming t;
    t.batches = (n + batch - 1) / batch;
    auto batch_time = [&](std::size_t points, u64& rounds, u64& issues) {
      u64 c = 0;
      for (unsigned q = 0; q < passes; ++q) {
        for (unsigned j = 0; j < d.k_m; ++j) {
          unsigned active = 0;
          std::size_t len = 0;
          for (unsigned i = 0; i < d.k_m; ++i) {
            if (q * d.k_m + i >= nw) continue;
            std::size_t lo = std::min(points, static_cast<std::size_t>(bank_for(i, j, d.k_m)) * d.ppw);
            std::size_t l = std::min(points, lo + d.ppw) - lo;
            if (l == 0) continue;
            ++active;
            len = std::max(len, l);
            issues += l;  // digits; zero digits are subtracted below
          }
          c += round_cycles(active, len, cfg);
          ++rounds;
        }
      }
      return c;
    };
    const std::size_t full = n / batch;
    const std::size_t rest = n % batch;
    u64 digits = 0;
    if (full > 0) {
      u64 r = 0, is = 0;
      u64 c = batch_time(batch, r, is);
      t.batch_cycles.assign(full, c);
      t.accumulate += c * full;
      t.rounds += r * full;
      digits += is * full;
    }
    if (rest > 0) {
      u64 r = 0;
      u64 c = batch_time(rest, r, digits);
      t.batch_cycles.push_back(c);
      t.accumulate += c;
      t.rounds += r;
    }
    t.issues = digits - digits / (u64{1} << d.w);  // expected nonzero digits
    t.bucket_reduction = passes * step_bucket_reduction(d.w, cfg.t_add);
    t.window_reduction = step_window_reduction(d.k_m, d.w, lambda, cfg.t_add, cfg.t_add);
    return t;
  }

 private:
  using Key = std::tuple<unsigned, std::size_t, unsigned, unsigned, unsigned, unsigned, unsigned, unsigned>;
  u64 seed_;
  mutable std::mutex mu_;
  mutable std::map<Key, u64> cache_;
};

enum class DenseEngine { surrogate, simulate };

/// Latencies in seconds at the 22 nm clock.
struct ProofBreakdown {
  double poly = 0;
  double dense = 0;
  double sp_g1 = 0;  // the three sparse G1 MSMs, serialized
  double sp_g2 = 0;
  double total = 0;
  double assembly = 0;  // final proof additions, reported beside total
};

struct AreaBreakdown {
  double dense = 0;
  double sparse_g1 = 0;
  double sparse_g2 = 0;
  double ntt = 0;
  double total() const { return dense + sparse_g1 + sparse_g2 + ntt; }
};

struct BandwidthPoint {
  std::string tech;
  double seconds = 0;
  double normalized = 1.0;
};

/// Analytic full-chip model. Thread-safe; the surrogate cache is shared.
class PerfModel {
 public:
  explicit PerfModel(const ComponentCatalog& catalog = ComponentCatalog::standard(),
                     DenseEngine engine = DenseEngine::surrogate, u64 seed = 1)
      : cat_(&catalog), engine_(engine), seed_(seed), surrogate_(seed) {}

  const ComponentCatalog& catalog() const { return *cat_; }
  double clock_hz() const { return cat_->clock_hz; }

  PeConfig pe_config(Group g, unsigned bits) const {
    PeConfig c;
    c.depth = cat_->queue_depth;
    c.t_add = padd_cycles(g, bits);
    c.policy = Policy::lq;
    return c;
  }

  unsigned padd_cycles(Group g, unsigned bits) const { return cat_->padd(g, bits, 1).cycles; }

  // ---- polynomial computation

  u64 poly_cycles(unsigned log_n, const NttDesign& d) const {
    auto ph = four_step_phases(log_n, d, 254, cat_->ntt_stage_fill);
    return kPolyTransforms * (ph[0].cycles + ph[1].cycles);
  }

  double poly_seconds(unsigned log_n, const NttDesign& d, unsigned bits, const MemoryTech& bw) const {
    if (log_n < 1 || log_n > 2 * kNttCoreLog) {
      throw std::invalid_argument("polynomial size 2^" + std::to_string(log_n) + " outside the supported range");
    }
    double t = 0;
    for (const auto& ph : four_step_phases(log_n, d, bits, cat_->ntt_stage_fill)) {
      t += std::max(static_cast<double>(ph.cycles) / clock_hz(), bw.seconds(ph.bytes));
    }
    return kPolyTransforms * t;
  }

  // ---- MSMs

  DenseMsmTiming dense_timing(std::size_t n, unsigned lambda, const MsmDesign& d, Group g, unsigned bits) const {
    PeConfig base = pe_config(g, bits);
    if (engine_ == DenseEngine::simulate) return simulate_dense_msm(n, lambda, base, d, uniform_digits(seed_, d.w));
    return surrogate_.estimate(n, lambda, base, d);
  }

  /// Each batch's point and scalar fetch overlaps that batch's accumulation.
  double dense_seconds(std::size_t n, unsigned lambda, const MsmDesign& d, Group g, unsigned bits,
                       const MemoryTech& bw) const {
    if (n == 0) return 0;
    DenseMsmTiming t = dense_timing(n, lambda, d, g, bits);
    const std::size_t batch = static_cast<std::size_t>(d.k_m) * d.ppw;
    const double per_point = static_cast<double>(point_bytes(bits, g) + scalar_bytes(lambda));
    double s = 0;
    for (std::size_t b = 0; b < t.batch_cycles.size(); ++b) {
      std::size_t pts = std::min(batch, n - b * batch);
      s += std::max(static_cast<double>(t.batch_cycles[b]) / clock_hz(), bw.seconds(per_point * static_cast<double>(pts)));
    }
    return s + static_cast<double>(t.bucket_reduction + t.window_reduction) / clock_hz();
  }

  u64 sparse_cycles(const SparseCounts& c, unsigned lambda, const MsmDesign& d, Group g, unsigned bits) const {
    u64 cyc = sparse_tree_cycles(c.ones, d.k_m, d.ii, padd_cycles(g, bits));
    if (c.residual > 0) cyc += dense_timing(c.residual, lambda, d, g, bits).total();
    return cyc;
  }

  /// All n scalars are streamed; only points with nonzero scalars are fetched.
  double sparse_seconds(const SparseCounts& c, std::size_t n, unsigned lambda, const MsmDesign& d, Group g,
                        unsigned bits, const MemoryTech& bw) const {
    double bytes = static_cast<double>(n) * static_cast<double>(scalar_bytes(lambda)) +
                   static_cast<double>(c.ones + c.residual) * static_cast<double>(point_bytes(bits, g));
    return std::max(static_cast<double>(sparse_cycles(c, lambda, d, g, bits)) / clock_hz(), bw.seconds(bytes));
  }

  // ---- full proof

  ProofBreakdown full_proof(const ChipDesign& chip, const WorkloadProfile& w, const MemoryTech& bw) const {
    chip.validate();
    const unsigned lambda = chip.bits;
    ProofBreakdown r;
    r.poly = poly_seconds(w.log_n, chip.ntt, chip.bits, bw);
    r.dense = dense_seconds(w.size(), lambda, chip.dense, Group::g1, chip.bits, bw);
    for (const auto& c : w.g1) r.sp_g1 += sparse_seconds(c, w.size(), lambda, chip.g1_sparse_core(), Group::g1, chip.bits, bw);
    r.sp_g2 = sparse_seconds(w.g2, w.size(), lambda, chip.sparse_g2, Group::g2, chip.bits, bw);
    r.total = compose(chip.topology, r);
    r.assembly = static_cast<double>(kAssemblyG1Adds * padd_cycles(Group::g1, chip.bits) +
                                     kAssemblyG2Adds * padd_cycles(Group::g2, chip.bits)) /
                 clock_hz();
    return r;
  }

  static double compose(Topology t, const ProofBreakdown& r) {
    if (t == Topology::shared_g1) return std::max(r.poly + r.dense + r.sp_g1, r.sp_g2);
    return std::max({r.poly + r.dense, r.sp_g1, r.sp_g2});
  }

  /// First entry is the unconstrained reference (1.0).
  std::vector<BandwidthPoint> bandwidth_sweep(const ChipDesign& chip, const WorkloadProfile& w,
                                              const std::vector<MemoryTech>& techs) const {
    const double ideal = full_proof(chip, w, unconstrained_memory()).total;
    std::vector<BandwidthPoint> out{{"unconstrained", ideal, 1.0}};
    for (const auto& m : techs) {
      double s = full_proof(chip, w, m).total;
      out.push_back({m.name, s, s / ideal});
    }
    return out;
  }

  // ---- area and power (22 nm)

  /// Buffered bits of an MSM core: double-buffered point/scalar batch,
  /// per-window bucket sums for every window, bucket address queues.
  static double msm_sram_bits(const MsmDesign& d, Group g, unsigned bits, unsigned lambda, unsigned depth) {
    const double pbits = 3.0 * bits * (g == Group::g2 ? 2 : 1);
    const double batch = 2.0 * d.k_m * d.ppw * (pbits + lambda);
    const double buckets = static_cast<double>(window_count(lambda, d.w)) * d.buckets() * pbits;
    const double queues = static_cast<double>(d.k_m) * d.buckets() * depth * std::bit_width(d.ppw - 1u);
    return batch + buckets + queues;
  }

  double msm_area(const MsmDesign& d, Group g, unsigned bits) const {
    return d.k_m * cat_->padd(g, bits, d.ii).area +
           msm_sram_bits(d, g, bits, bits, cat_->queue_depth) * cat_->sram_mm2_per_bit(bits);
  }

  double ntt_area(const NttDesign& d, unsigned bits) const {
    return d.k_n * d.u * cat_->butterfly_area(bits) +
           static_cast<double>(d.k_n) * cat_->ntt_buffer_words * bits * cat_->sram_mm2_per_bit(bits);
  }

  AreaBreakdown area(const ChipDesign& chip) const {
    AreaBreakdown a;
    a.dense = msm_area(chip.dense, Group::g1, chip.bits);
    if (chip.topology == Topology::separate_g1) a.sparse_g1 = msm_area(chip.sparse_g1, Group::g1, chip.bits);
    a.sparse_g2 = msm_area(chip.sparse_g2, Group::g2, chip.bits);
    a.ntt = ntt_area(chip.ntt, chip.bits);
    return a;
  }

  double chip_area(const ChipDesign& chip) const { return area(chip).total(); }

  /// Peak power with every unit busy; memory power added for HBM stacks.
  double chip_power(const ChipDesign& chip, const MemoryTech& mem = unconstrained_memory()) const {
    double p = chip.dense.k_m * cat_->padd(Group::g1, chip.bits, chip.dense.ii).power;
    if (chip.topology == Topology::separate_g1) {
      p += chip.sparse_g1.k_m * cat_->padd(Group::g1, chip.bits, chip.sparse_g1.ii).power;
    }
    p += chip.sparse_g2.k_m * cat_->padd(Group::g2, chip.bits, chip.sparse_g2.ii).power;
    p += chip.ntt.k_n * chip.ntt.u * cat_->butterfly_power(chip.bits);
    return p + mem.power;
  }

  static constexpr unsigned kAssemblyG1Adds = 5;
  static constexpr unsigned kAssemblyG2Adds = 2;

 private:
  const ComponentCatalog* cat_;
  DenseEngine engine_;
  u64 seed_;
  DenseSurrogate surrogate_;
};

}  // namespace szkp
