// Runs a small BN254 MSM three ways, then models one chip on every
// built-in workload.
#include <chrono>
#include <cstdio>
#include <random>

#include "szkp/msm.hpp"
#include "szkp/perfmodel.hpp"
#include "szkp/presets.hpp"
#include "szkp/workload.hpp"

int main() {
  using namespace szkp;
  const auto& bn = bn254();
  std::mt19937_64 rng(7);
  const std::size_t n = 1024;
  auto points = random_points(bn.g1_generator, n, rng);
  std::vector<Scalar> scalars;
  for (std::size_t i = 0; i < n; ++i) {
    // A third zero, a third one, the rest full width: the sparse path's case.
    scalars.push_back(i % 3 == 0 ? Scalar(0) : i % 3 == 1 ? Scalar(1) : random_scalar(bn.g1_order, rng));
  }
  auto naive = naive_msm(bn.g1, std::span<const Scalar>(scalars), std::span<const Bn254::G1>(points));
  auto pip = pippenger_msm(bn.g1, std::span<const Scalar>(scalars), std::span<const Bn254::G1>(points), 8);
  auto sp = sparse_msm(bn.g1, std::span<const Scalar>(scalars), std::span<const Bn254::G1>(points));
  std::printf("MSM n=%zu: pippenger %s, sparse %s\n", n, pip == naive ? "agrees" : "DIFFERS",
              sp == naive ? "agrees" : "DIFFERS");

  PerfModel model;
  ChipDesign chip;
  chip.dense = {4, 8, 4096, 3};
  chip.ntt = {4, 16};
  chip.sparse_g1 = {2, 5, 1024, 2};
  chip.sparse_g2 = {1, 5, 1024, 4};
  chip.validate();
  std::printf("chip %s\narea %.1f mm2, power %.1f W\n", chip.key().c_str(), model.chip_area(chip),
              model.chip_power(chip));
  std::printf("%-11s %9s %9s %9s %9s %9s\n", "workload", "poly ms", "dense ms", "spG1 ms", "spG2 ms", "total ms");
  for (const auto& w : builtin_workloads()) {
    auto b = model.full_proof(chip, w, unconstrained_memory());
    std::printf("%-11s %9.2f %9.2f %9.2f %9.2f %9.2f\n", w.name.c_str(), b.poly * 1e3, b.dense * 1e3,
                b.sp_g1 * 1e3, b.sp_g2 * 1e3, b.total * 1e3);
  }
  return pip == naive && sp == naive ? 0 : 1;
}
