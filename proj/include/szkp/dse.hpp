#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "szkp/csv.hpp"
#include "szkp/perfmodel.hpp"

namespace szkp {

/// Knob value sets. Defaults are the reference knob sets plus the sparse-core sub-space.
struct DesignSpace {
  std::vector<unsigned> k_m{1, 2, 4, 8, 16};
  std::vector<unsigned> w{5, 6, 7, 8};
  std::vector<unsigned> ppw{1024, 2048, 4096, 8192, 16384};
  std::vector<unsigned> ii{1, 2, 3, 4};
  std::vector<unsigned> k_n{1, 2, 4, 8};
  std::vector<unsigned> u{1, 2, 4, 8, 16, 32};
  std::vector<Topology> topologies{Topology::separate_g1, Topology::shared_g1};
  // Separate sparse G1 core: W and PPW fixed, K_M and II swept.
  std::vector<unsigned> sp_g1_k_m{1, 2, 4, 8, 16};
  std::vector<unsigned> sp_g1_ii{1, 4};
  unsigned sp_w = 5;
  unsigned sp_ppw = 1024;
  // Sparse G2 core: W and PPW as above; pinned to (1, 5, 1024, 4) by default.
  std::vector<unsigned> sp_g2_k_m{1};
  std::vector<unsigned> sp_g2_ii{4};
  unsigned bits = 254;

  void validate() const {
    auto need = [](const auto& v, const char* name) {
      if (v.empty()) throw std::invalid_argument(std::string("design space set '") + name + "' is empty");
    };
    need(k_m, "k_m");
    need(w, "w");
    need(ppw, "ppw");
    need(ii, "ii");
    need(k_n, "k_n");
    need(u, "u");
    need(topologies, "topology");
    need(sp_g2_k_m, "sp_g2_k_m");
    need(sp_g2_ii, "sp_g2_ii");
    if (std::ranges::find(topologies, Topology::separate_g1) != topologies.end()) {
      need(sp_g1_k_m, "sp_g1_k_m");
      need(sp_g1_ii, "sp_g1_ii");
    }
  }

  /// Default space with the sparse G2 core free to grow, for topology studies.
  static DesignSpace topology_study() {
    DesignSpace s;
    s.sp_g2_k_m = {1, 2, 4, 8, 16};
    return s;
  }

  /// Key-value file; any key present replaces the default set, values
  /// separated by spaces or commas. Keys: k_m w ppw ii k_n u topology
  /// sp_g1_k_m sp_g1_ii sp_w sp_ppw sp_g2_k_m sp_g2_ii bits.
  static DesignSpace load(const std::filesystem::path& path) {
    auto kv = KeyValueFile::load(path);
    DesignSpace s;
    for (const auto& [key, value] : kv.entries()) {
      std::string v = value;
      std::ranges::replace(v, ',', ' ');
      std::istringstream in(v);
      if (key == "topology") {
        s.topologies.clear();
        for (std::string t; in >> t;) s.topologies.push_back(parse_topology(t));
        continue;
      }
      std::vector<unsigned> vals;
      for (std::string t; in >> t;) {
        try {
          vals.push_back(static_cast<unsigned>(std::stoul(t)));
        } catch (const std::exception&) {
          throw ParamError(path.string() + ": key '" + key + "' has non-integer value '" + t + "'");
        }
      }
      auto scalar = [&]() {
        if (vals.size() != 1) throw ParamError(path.string() + ": key '" + key + "' takes one value");
        return vals[0];
      };
      if (key == "k_m") s.k_m = vals;
      else if (key == "w") s.w = vals;
      else if (key == "ppw") s.ppw = vals;
      else if (key == "ii") s.ii = vals;
      else if (key == "k_n") s.k_n = vals;
      else if (key == "u") s.u = vals;
      else if (key == "sp_g1_k_m") s.sp_g1_k_m = vals;
      else if (key == "sp_g1_ii") s.sp_g1_ii = vals;
      else if (key == "sp_g2_k_m") s.sp_g2_k_m = vals;
      else if (key == "sp_g2_ii") s.sp_g2_ii = vals;
      else if (key == "sp_w") s.sp_w = scalar();
      else if (key == "sp_ppw") s.sp_ppw = scalar();
      else if (key == "bits") s.bits = scalar();
      else throw ParamError(path.string() + ": unknown design-space key '" + key + "'");
    }
    s.validate();
    return s;
  }
};

inline std::vector<MsmDesign> enumerate_msm(const DesignSpace& s) {
  s.validate();
  std::vector<MsmDesign> out;
  for (unsigned k : s.k_m)
    for (unsigned w : s.w)
      for (unsigned p : s.ppw)
        for (unsigned i : s.ii) out.push_back({k, w, p, i});
  return out;
}

inline std::vector<NttDesign> enumerate_ntt(const DesignSpace& s) {
  s.validate();
  std::vector<NttDesign> out;
  for (unsigned k : s.k_n)
    for (unsigned u : s.u) out.push_back({k, u});
  return out;
}

inline std::vector<MsmDesign> enumerate_sparse_g1(const DesignSpace& s) {
  std::vector<MsmDesign> out;
  for (unsigned k : s.sp_g1_k_m)
    for (unsigned i : s.sp_g1_ii) out.push_back({k, s.sp_w, s.sp_ppw, i});
  return out;
}

inline std::vector<MsmDesign> enumerate_sparse_g2(const DesignSpace& s) {
  std::vector<MsmDesign> out;
  for (unsigned k : s.sp_g2_k_m)
    for (unsigned i : s.sp_g2_ii) out.push_back({k, s.sp_w, s.sp_ppw, i});
  return out;
}

/// Cartesian product in knob order. Shared-G1 designs carry the dense core
/// in the sparse-G1 slot, so they appear once per dense/NTT/G2 choice.
inline std::vector<ChipDesign> enumerate(const DesignSpace& s) {
  auto msm = enumerate_msm(s);
  auto ntt = enumerate_ntt(s);
  auto sg1 = enumerate_sparse_g1(s);
  auto sg2 = enumerate_sparse_g2(s);
  if (s.bits != 254 && s.bits != 753) throw std::invalid_argument("bit width must be 254 or 753");
  for (const auto* set : {&msm, &sg1, &sg2}) {
    for (const auto& d : *set) {
      if (!in_design_space(d)) throw std::invalid_argument("MSM design " + to_string(d) + " outside the reference design space");
    }
  }
  for (const auto& n : ntt) {
    if (!in_design_space(n)) throw std::invalid_argument("NTT design " + to_string(n) + " outside the reference design space");
  }
  std::vector<ChipDesign> out;
  for (Topology t : s.topologies) {
    for (const auto& d : msm) {
      for (const auto& n : ntt) {
        for (const auto& g2 : sg2) {
          ChipDesign c;
          c.dense = d;
          c.ntt = n;
          c.sparse_g2 = g2;
          c.topology = t;
          c.bits = s.bits;
          if (t == Topology::shared_g1) {
            c.sparse_g1 = d;
            out.push_back(c);
            continue;
          }
          for (const auto& g1 : sg1) {
            c.sparse_g1 = g1;
            out.push_back(c);
          }
        }
      }
    }
  }
  return out;
}

// ---- Pareto machinery

struct AreaRuntime {
  double area = 0;
  double runtime = 0;
};

inline bool dominates(const AreaRuntime& a, const AreaRuntime& b) {
  return a.area <= b.area && a.runtime <= b.runtime && (a.area < b.area || a.runtime < b.runtime);
}

/// Indices of the non-dominated points, in increasing area. Among exact
/// duplicates the lowest index (earliest config) is kept.
inline std::vector<std::size_t> pareto(const std::vector<AreaRuntime>& pts) {
  std::vector<std::size_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::ranges::sort(idx, [&](std::size_t a, std::size_t b) {
    if (pts[a].area != pts[b].area) return pts[a].area < pts[b].area;
    if (pts[a].runtime != pts[b].runtime) return pts[a].runtime < pts[b].runtime;
    return a < b;
  });
  std::vector<std::size_t> front;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i : idx) {
    if (pts[i].runtime < best) {
      front.push_back(i);
      best = pts[i].runtime;
    }
  }
  return front;
}

/// Quadratic reference frontier, straight from the definition.
inline std::vector<std::size_t> pareto_bruteforce(const std::vector<AreaRuntime>& pts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < pts.size() && keep; ++j) {
      if (dominates(pts[j], pts[i])) keep = false;
      if (j < i && pts[j].area == pts[i].area && pts[j].runtime == pts[i].runtime) keep = false;
    }
    if (keep) out.push_back(i);
  }
  std::ranges::sort(out, [&](std::size_t a, std::size_t b) { return pts[a].area < pts[b].area; });
  return out;
}

/// Checks a claimed frontier against every input point: no input dominates a
/// frontier point, frontier points are mutually non-dominated, and each input
/// is on the frontier or weakly dominated by a frontier point. Returns an
/// empty string on success, else the first violation.
inline std::string check_frontier(const std::vector<AreaRuntime>& pts, const std::vector<std::size_t>& front) {
  std::vector<char> on(pts.size(), 0);
  for (std::size_t f : front) {
    if (f >= pts.size()) return "frontier index out of range";
    on[f] = 1;
  }
  for (std::size_t f : front) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (dominates(pts[j], pts[f])) return "point " + std::to_string(j) + " dominates frontier point " + std::to_string(f);
    }
  }
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (on[j]) continue;
    bool covered = false;
    for (std::size_t f : front) {
      if (pts[f].area <= pts[j].area && pts[f].runtime <= pts[j].runtime) {
        covered = true;
        break;
      }
    }
    if (!covered) return "point " + std::to_string(j) + " is neither on nor behind the frontier";
  }
  return {};
}

// ---- evaluation

struct DesignPoint {
  ChipDesign chip;
  double area = 0;     // mm^2 at 22 nm
  double power = 0;    // W, without memory
  ProofBreakdown breakdown;  // unconstrained bandwidth
  std::vector<double> normalized;  // per memory tech, total / unconstrained total
  bool frontier = false;

  double runtime() const { return breakdown.total; }
};

struct ParetoReport {
  std::string workload;
  std::vector<MemoryTech> techs;
  std::vector<DesignPoint> points;
  std::vector<std::size_t> frontier;  // indices into points, increasing area

  std::vector<AreaRuntime> area_runtime() const {
    std::vector<AreaRuntime> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back({p.area, p.runtime()});
    return v;
  }
};

namespace detail {

/// Memoizes per-component latencies so each distinct core is modeled once
/// per memory tech.
class ComponentTable {
 public:
  ComponentTable(const PerfModel& m, const WorkloadProfile& w, std::vector<MemoryTech> techs)
      : m_(m), w_(w), techs_(std::move(techs)) {}

  const std::vector<MemoryTech>& techs() const { return techs_; }

  void prepare(const std::vector<ChipDesign>& chips) {
    for (const auto& c : chips) {
      add(poly_keys_, c.ntt);
      add(dense_keys_, c.dense);
      add(g1_keys_, c.g1_sparse_core());
      add(g2_keys_, c.sparse_g2);
    }
    const std::size_t t = techs_.size();
    const unsigned bits = chips.empty() ? 254 : chips.front().bits;
    poly_.assign(poly_keys_.size() * t, 0);
    dense_.assign(dense_keys_.size() * t, 0);
    g1_.assign(g1_keys_.size() * t, 0);
    g2_.assign(g2_keys_.size() * t, 0);
    parallel_for(poly_keys_.size() * t, [&](std::size_t i) {
      poly_[i] = m_.poly_seconds(w_.log_n, poly_keys_[i / t], bits, techs_[i % t]);
    });
    parallel_for(dense_keys_.size(), [&](std::size_t i) {
      for (std::size_t k = 0; k < t; ++k) {
        dense_[i * t + k] = m_.dense_seconds(w_.size(), bits, dense_keys_[i], Group::g1, bits, techs_[k]);
      }
    });
    parallel_for(g1_keys_.size(), [&](std::size_t i) {
      for (std::size_t k = 0; k < t; ++k) {
        double s = 0;
        for (const auto& c : w_.g1) s += m_.sparse_seconds(c, w_.size(), bits, g1_keys_[i], Group::g1, bits, techs_[k]);
        g1_[i * t + k] = s;
      }
    });
    parallel_for(g2_keys_.size(), [&](std::size_t i) {
      for (std::size_t k = 0; k < t; ++k) {
        g2_[i * t + k] = m_.sparse_seconds(w_.g2, w_.size(), bits, g2_keys_[i], Group::g2, bits, techs_[k]);
      }
    });
  }

  ProofBreakdown breakdown(const ChipDesign& c, std::size_t tech) const {
    const std::size_t t = techs_.size();
    ProofBreakdown b;
    b.poly = poly_[find(poly_keys_, c.ntt) * t + tech];
    b.dense = dense_[find(dense_keys_, c.dense) * t + tech];
    b.sp_g1 = g1_[find(g1_keys_, c.g1_sparse_core()) * t + tech];
    b.sp_g2 = g2_[find(g2_keys_, c.sparse_g2) * t + tech];
    b.total = PerfModel::compose(c.topology, b);
    return b;
  }

 private:
  template <class K>
  static void add(std::vector<K>& keys, const K& k) {
    auto it = std::ranges::lower_bound(keys, k);
    if (it == keys.end() || !(*it == k)) keys.insert(it, k);
  }
  template <class K>
  static std::size_t find(const std::vector<K>& keys, const K& k) {
    return static_cast<std::size_t>(std::ranges::lower_bound(keys, k) - keys.begin());
  }

  const PerfModel& m_;
  const WorkloadProfile& w_;
  std::vector<MemoryTech> techs_;
  std::vector<NttDesign> poly_keys_;
  std::vector<MsmDesign> dense_keys_, g1_keys_, g2_keys_;
  std::vector<double> poly_, dense_, g1_, g2_;
};

}  // namespace detail

/// Evaluates every design of the space on one workload. Runtime is the
/// unconstrained full-proof total; techs add normalized columns. The
/// frontier is verified against all points before returning.
inline ParetoReport run_dse(const DesignSpace& space, const WorkloadProfile& w, const std::vector<MemoryTech>& techs,
                            const PerfModel& model) {
  auto chips = enumerate(space);
  std::vector<MemoryTech> all{unconstrained_memory()};
  all.insert(all.end(), techs.begin(), techs.end());
  detail::ComponentTable table(model, w, all);
  table.prepare(chips);

  ParetoReport r;
  r.workload = w.name;
  r.techs = techs;
  r.points.resize(chips.size());
  detail::parallel_for(chips.size(), [&](std::size_t i) {
    DesignPoint& p = r.points[i];
    p.chip = chips[i];
    p.area = model.chip_area(chips[i]);
    p.power = model.chip_power(chips[i]);
    p.breakdown = table.breakdown(chips[i], 0);
    p.breakdown.assembly = 0;
    p.normalized.resize(techs.size());
    for (std::size_t k = 0; k < techs.size(); ++k) p.normalized[k] = table.breakdown(chips[i], k + 1).total / p.runtime();
  });
  auto ar = r.area_runtime();
  r.frontier = pareto(ar);
  if (auto err = check_frontier(ar, r.frontier); !err.empty()) throw std::logic_error("frontier check failed: " + err);
  if (ar.size() <= 10000 && pareto_bruteforce(ar) != r.frontier) {
    throw std::logic_error("frontier differs from the quadratic reference");
  }
  for (std::size_t f : r.frontier) r.points[f].frontier = true;
  return r;
}

inline CsvTable dse_csv(const ParetoReport& r) {
  CsvTable t;
  t.kind = "dse";
  t.columns = {"workload", "k_m",     "w",       "ppw",       "ii",        "k_n",      "u",       "topology",
               "sg1_k_m",  "sg1_ii",  "sg2_k_m", "sg2_ii",  "bits",      "area_mm2",  "runtime_ms", "power_w", "poly_ms",
               "dense_ms", "spg1_ms", "spg2_ms"};
  for (const auto& m : r.techs) t.columns.push_back("norm_" + m.name);
  t.columns.push_back("frontier");
  for (const auto& p : r.points) {
    const auto& c = p.chip;
    bool sep = c.topology == Topology::separate_g1;
    std::vector<std::string> row{r.workload,
                                 std::to_string(c.dense.k_m),
                                 std::to_string(c.dense.w),
                                 std::to_string(c.dense.ppw),
                                 std::to_string(c.dense.ii),
                                 std::to_string(c.ntt.k_n),
                                 std::to_string(c.ntt.u),
                                 topology_name(c.topology),
                                 sep ? std::to_string(c.sparse_g1.k_m) : "-",
                                 sep ? std::to_string(c.sparse_g1.ii) : "-",
                                 std::to_string(c.sparse_g2.k_m),
                                 std::to_string(c.sparse_g2.ii),
                                 std::to_string(c.bits),
                                 csv_num(p.area),
                                 csv_num(p.runtime() * 1e3),
                                 csv_num(p.power),
                                 csv_num(p.breakdown.poly * 1e3),
                                 csv_num(p.breakdown.dense * 1e3),
                                 csv_num(p.breakdown.sp_g1 * 1e3),
                                 csv_num(p.breakdown.sp_g2 * 1e3)};
    for (double v : p.normalized) row.push_back(csv_num(v));
    row.push_back(p.frontier ? "1" : "0");
    t.add_row(std::move(row));
  }
  return t;
}

// ---- topology comparison

struct BudgetRow {
  double area = 0;
  std::optional<double> separate;  // best runtime within the budget
  std::optional<double> shared;
};

struct TopologyComparison {
  std::vector<AreaRuntime> separate_front;
  std::vector<AreaRuntime> shared_front;
  std::vector<AreaRuntime> joint_front;
  std::vector<Topology> joint_topology;
  std::vector<BudgetRow> budgets;  // one per frontier area of either topology
  double area_lo = 0, area_hi = 0;
  double max_gap_lower_half = 0;  // relative runtime gap where both are feasible
  bool top_decile_separate_only = false;
  std::optional<double> crossover_area;  // smallest budget above which only separate-G1 is on the joint frontier

  bool shape_holds(double tolerance = 0.05) const { return max_gap_lower_half <= tolerance && top_decile_separate_only; }
};

inline std::optional<double> best_within(const std::vector<AreaRuntime>& front, double budget) {
  std::optional<double> best;
  for (const auto& p : front) {
    if (p.area <= budget && (!best || p.runtime < *best)) best = p.runtime;
  }
  return best;
}

inline TopologyComparison compare_topologies(const ParetoReport& r) {
  std::vector<AreaRuntime> sep, sh;
  std::vector<std::size_t> sep_i, sh_i;
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    AreaRuntime ar{r.points[i].area, r.points[i].runtime()};
    if (r.points[i].chip.topology == Topology::separate_g1) {
      sep.push_back(ar);
      sep_i.push_back(i);
    } else {
      sh.push_back(ar);
      sh_i.push_back(i);
    }
  }
  TopologyComparison c;
  for (std::size_t f : pareto(sep)) c.separate_front.push_back(sep[f]);
  for (std::size_t f : pareto(sh)) c.shared_front.push_back(sh[f]);
  auto all = r.area_runtime();
  for (std::size_t f : r.frontier) {
    c.joint_front.push_back(all[f]);
    c.joint_topology.push_back(r.points[f].chip.topology);
  }
  if (c.joint_front.empty()) return c;
  c.area_lo = c.joint_front.front().area;
  c.area_hi = c.joint_front.back().area;
  for (const auto* front : {&c.separate_front, &c.shared_front}) {
    for (const auto& p : *front) c.budgets.push_back({p.area, {}, {}});
  }
  std::ranges::sort(c.budgets, {}, &BudgetRow::area);
  const double half = c.area_lo + 0.5 * (c.area_hi - c.area_lo);
  for (auto& b : c.budgets) {
    b.separate = best_within(c.separate_front, b.area);
    b.shared = best_within(c.shared_front, b.area);
    if (b.area <= half && b.separate && b.shared) {
      double gap = std::abs(*b.separate - *b.shared) / std::min(*b.separate, *b.shared);
      c.max_gap_lower_half = std::max(c.max_gap_lower_half, gap);
    }
  }
  const double decile = c.area_hi - 0.1 * (c.area_hi - c.area_lo);
  c.top_decile_separate_only = true;
  for (std::size_t i = 0; i < c.joint_front.size(); ++i) {
    if (c.joint_front[i].area >= decile && c.joint_topology[i] != Topology::separate_g1) c.top_decile_separate_only = false;
  }
  for (std::size_t i = c.joint_front.size(); i-- > 0;) {
    if (c.joint_topology[i] != Topology::separate_g1) break;
    c.crossover_area = c.joint_front[i].area;
  }
  return c;
}

// ---- sparse pipelining study

struct IiPick {
  std::string label;  // HP, MP or LP
  DesignPoint point;
  std::optional<double> full_pipelined_runtime;  // best fully pipelined design within the same area
};

struct IiStudy {
  ParetoReport full;       // sparse cores at II = 1
  ParetoReport optimized;  // sparse II swept over 1..4
  std::vector<IiPick> picks;
};

/// HP is the largest frontier design, LP the smallest, MP the frontier
/// design nearest the middle of the frontier's area range.
inline IiStudy ii_study(DesignSpace space, const WorkloadProfile& w, const PerfModel& model) {
  IiStudy s;
  DesignSpace full = space;
  full.sp_g1_ii = {1};
  full.sp_g2_ii = {1};
  DesignSpace opt = space;
  opt.sp_g1_ii = {1, 2, 3, 4};
  opt.sp_g2_ii = {1, 2, 3, 4};
  s.full = run_dse(full, w, {}, model);
  s.optimized = run_dse(opt, w, {}, model);
  const auto& f = s.optimized.frontier;
  if (f.empty()) return s;
  const auto& pts = s.optimized.points;
  double lo = pts[f.front()].area, hi = pts[f.back()].area, mid = 0.5 * (lo + hi);
  std::size_t mp = f.front();
  for (std::size_t i : f) {
    if (std::abs(pts[i].area - mid) < std::abs(pts[mp].area - mid)) mp = i;
  }
  std::vector<AreaRuntime> full_front;
  for (std::size_t i : s.full.frontier) full_front.push_back({s.full.points[i].area, s.full.points[i].runtime()});
  for (auto [label, idx] : {std::pair{"HP", f.back()}, std::pair{"MP", mp}, std::pair{"LP", f.front()}}) {
    s.picks.push_back({label, pts[idx], best_within(full_front, pts[idx].area)});
  }
  return s;
}

}  // namespace szkp
