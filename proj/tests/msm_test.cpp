#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "szkp/msm.hpp"
#include "szkp/presets.hpp"

namespace szkp {
namespace {

using TP = ToyCurve::G1;

std::vector<TP> toy_group() {
  const auto& c = toy_curve();
  std::vector<TP> pts{TP::identity(c.g1)};
  for (u64 x = 0; x < 17; ++x) {
    for (u64 y = 0; y < 17; ++y) {
      auto fx = Fp<1>::from_u64(*c.fq, x);
      auto fy = Fp<1>::from_u64(*c.fq, y);
      if (fy.square() == fx.square() * fx + c.g1.b) pts.push_back(TP::from_affine(c.g1, fx, fy));
    }
  }
  return pts;
}

TEST(SplitWindows, Examples) {
  EXPECT_EQ(split_windows(Scalar(0), 5, 254), std::vector<std::uint32_t>(51, 0));
  EXPECT_EQ(split_windows(Scalar(0xAB), 4, 8), (std::vector<std::uint32_t>{0xB, 0xA}));
  EXPECT_THROW(split_windows(Scalar(0x1AB), 4, 8), std::invalid_argument);
  EXPECT_THROW(split_windows(Scalar(1), 0, 8), std::invalid_argument);
}

TEST(SplitWindows, Reconstructs254) {
  std::mt19937_64 rng(1);
  const auto& r = bn254().g1_order;
  for (int i = 0; i < 200; ++i) {
    auto k = random_scalar(r, rng);
    auto d = split_windows(k, 5, 254);
    ASSERT_EQ(d.size(), 51u);
    ASSERT_LT(d.back(), 1u << 4);
    for (std::size_t bit = 0; bit < 254; ++bit) ASSERT_EQ(k.bit(bit), ((d[bit / 5] >> (bit % 5)) & 1u) == 1u);
  }
}

TEST(BucketReduce, CountsAndValue) {
  const auto& c = bn254();
  std::mt19937_64 rng(2);
  for (unsigned w : {2u, 5u}) {
    auto b = random_points(c.g1_generator, (1u << w) - 1, rng);
    OpCounter cnt;
    auto got = bucket_reduce<Fp<4>>(c.g1, b, &cnt);
    EXPECT_EQ(cnt.adds, 2u * ((1u << w) - 1));
    auto want = Bn254::G1::identity(c.g1);
    for (std::size_t i = 0; i < b.size(); ++i) want = padd(want, scalar_mul(i + 1, b[i]));
    EXPECT_EQ(got, want);
  }
  std::vector<Bn254::G1> empty(31, Bn254::G1::identity(c.g1));
  OpCounter cnt;
  EXPECT_TRUE(bucket_reduce<Fp<4>>(c.g1, empty, &cnt).is_identity());
  EXPECT_EQ(cnt.adds, 62u);
}

TEST(WindowReduce, Examples) {
  const auto& c = bn254();
  std::mt19937_64 rng(3);
  auto s = random_points(c.g1_generator, 2, rng);
  std::vector<Bn254::G1> one{s[0]};
  EXPECT_EQ(window_reduce<Fp<4>>(c.g1, one, 5), s[0]);
  EXPECT_EQ(window_reduce<Fp<4>>(c.g1, s, 1), padd(s[0], pdbl(s[1])));
  OpCounter cnt;
  EXPECT_EQ(window_reduce<Fp<4>>(c.g1, s, 5, &cnt), padd(s[0], scalar_mul(32, s[1])));
  EXPECT_EQ(cnt.doublings, 5u);
}

TEST(Pippenger, SmallToyCase) {
  const auto& c = toy_curve();
  auto p = c.g1_generator;
  std::vector<Scalar> k{Scalar(1), Scalar(2), Scalar(3)};
  std::vector<TP> pts{p, p, p};
  EXPECT_EQ(pippenger_msm<Fp<1>>(c.g1, k, pts, 2), scalar_mul(6, p));
  std::vector<Scalar> zeros(3, Scalar(0));
  EXPECT_TRUE(pippenger_msm<Fp<1>>(c.g1, zeros, pts, 2).is_identity());
  EXPECT_THROW(pippenger_msm<Fp<1>>(c.g1, std::vector<Scalar>{Scalar(1)}, pts, 2), std::invalid_argument);
}

TEST(NaiveMsm, Basics) {
  const auto& c = toy_curve();
  EXPECT_TRUE(naive_msm<Fp<1>>(c.g1, {}, {}).is_identity());
  std::vector<Scalar> k{Scalar(7)};
  std::vector<TP> p{c.g1_generator};
  EXPECT_EQ(naive_msm<Fp<1>>(c.g1, k, p), scalar_mul(7, c.g1_generator));
}

TEST(Pippenger, ToyExhaustivePairs) {
  const auto& c = toy_curve();
  auto group = toy_group();
  for (const auto& p0 : group) {
    for (const auto& p1 : group) {
      std::vector<TP> pts{p0, p1};
      for (u64 a = 0; a < 18; ++a) {
        for (u64 b = 0; b < 18; ++b) {
          std::vector<Scalar> k{Scalar(a), Scalar(b)};
          auto want = naive_msm<Fp<1>>(c.g1, k, pts);
          for (unsigned w : {1u, 3u, 5u}) ASSERT_EQ(pippenger_msm<Fp<1>>(c.g1, k, pts, w, 5), want);
          ASSERT_EQ(sparse_msm<Fp<1>>(c.g1, k, pts, 2, 5), want);
        }
      }
    }
  }
}

TEST(Pippenger, ToySampledUpToFour) {
  const auto& c = toy_curve();
  auto group = toy_group();
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 20000; ++rep) {
    std::size_t n = 3 + rng() % 2;
    std::vector<TP> pts;
    std::vector<Scalar> k;
    for (std::size_t i = 0; i < n; ++i) {
      pts.push_back(group[rng() % group.size()]);
      k.emplace_back(rng() % 18);
    }
    auto want = naive_msm<Fp<1>>(c.g1, k, pts);
    ASSERT_EQ(pippenger_msm<Fp<1>>(c.g1, k, pts, 1 + rng() % 5, 5), want);
    ASSERT_EQ(sparse_msm<Fp<1>>(c.g1, k, pts, 2, 5), want);
  }
}

template <class Suite>
void check_random(const Suite& c, std::size_t n, unsigned w, u64 seed) {
  std::mt19937_64 rng(seed);
  auto pts = random_points(c.g1_generator, n, rng);
  std::vector<Scalar> k;
  for (std::size_t i = 0; i < n; ++i) k.push_back(random_scalar(c.g1_order, rng));
  auto want = naive_msm<typename Suite::G1::Field>(c.g1, k, pts);
  ASSERT_EQ(pippenger_msm<typename Suite::G1::Field>(c.g1, k, pts, w, c.scalar_bits()), want) << "n=" << n << " W=" << w;
}

TEST(Pippenger, Bn254AllWindows) {
  for (unsigned w = 5; w <= 8; ++w) check_random(bn254(), 256, w, 100 + w);
  for (std::size_t n : {1u, 2u, 255u, 1000u}) check_random(bn254(), n, 6, n);
}

TEST(Pippenger, Mnt4753Sampled) {
  check_random(mnt4753(), 32, 5, 7);
  check_random(mnt4753(), 17, 8, 8);
}

TEST(Pippenger, PermutationInvariance) {
  const auto& c = bn254();
  std::mt19937_64 rng(9);
  auto pts = random_points(c.g1_generator, 128, rng);
  std::vector<Scalar> k;
  for (int i = 0; i < 128; ++i) k.push_back(random_scalar(c.g1_order, rng));
  auto before = pippenger_msm<Fp<4>>(c.g1, k, pts, 6);
  std::vector<std::size_t> perm(128);
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Scalar> k2;
  std::vector<Bn254::G1> p2;
  for (auto i : perm) {
    k2.push_back(k[i]);
    p2.push_back(pts[i]);
  }
  EXPECT_EQ(pippenger_msm<Fp<4>>(c.g1, k2, p2, 6), before);
  EXPECT_EQ(sparse_msm<Fp<4>>(c.g1, k2, p2), before);
}

TEST(SparseMsm, SubsetSum) {
  const auto& c = bn254();
  std::mt19937_64 rng(10);
  auto p = random_points(c.g1_generator, 5, rng);
  std::vector<Scalar> k{Scalar(1), Scalar(0), Scalar(1), Scalar(1), Scalar(0)};
  EXPECT_EQ(sparse_msm<Fp<4>>(c.g1, k, p), padd(padd(p[0], p[2]), p[3]));
}

TEST(SparseMsm, IdentityPointsIgnored) {
  const auto& c = bn254();
  std::mt19937_64 rng(11);
  auto p = random_points(c.g1_generator, 9, rng);
  p[4] = Bn254::G1::identity(c.g1);
  std::vector<Scalar> k;
  for (int i = 0; i < 9; ++i) k.emplace_back(rng() % 2);
  k[4] = Scalar(1);
  EXPECT_EQ(sparse_msm<Fp<4>>(c.g1, k, p), naive_msm<Fp<4>>(c.g1, k, p));
  auto prof = sparse_profile<Fp<4>>(k, p);
  EXPECT_EQ(prof.ones + prof.residual + prof.dropped, 9u);
}

TEST(SparseMsm, Mixtures) {
  const auto& c = bn254();
  std::mt19937_64 rng(12);
  auto p = random_points(c.g1_generator, 1024, rng);
  for (double ones_frac : {0.0, 0.475, 1.0}) {
    std::vector<Scalar> k;
    for (int i = 0; i < 1024; ++i) {
      double u = std::uniform_real_distribution<double>(0, 1)(rng);
      if (ones_frac == 1.0) k.emplace_back(1);
      else if (ones_frac == 0.0) k.push_back(random_scalar(c.g1_order, rng));
      else if (u < 0.475) k.emplace_back(0);
      else if (u < 0.95) k.emplace_back(1);
      else k.push_back(random_scalar(c.g1_order, rng));
    }
    EXPECT_EQ(sparse_msm<Fp<4>>(c.g1, k, p), naive_msm<Fp<4>>(c.g1, k, p)) << ones_frac;
  }
}

TEST(TreeSum, OddCountCarriesLast) {
  const auto& c = toy_curve();
  std::vector<TP> pts(5, c.g1_generator);
  OpCounter cnt;
  std::vector<std::size_t> levels;
  EXPECT_EQ(tree_sum(c.g1, pts, &cnt, &levels), scalar_mul(5, c.g1_generator));
  EXPECT_EQ(cnt.adds, 4u);
  EXPECT_EQ(levels, (std::vector<std::size_t>{2, 1, 1}));
}

TEST(Msm, G2Pippenger) {
  const auto& c = bn254();
  std::mt19937_64 rng(13);
  auto pts = random_points(c.g2_generator, 40, rng);
  std::vector<Scalar> k;
  for (int i = 0; i < 40; ++i) k.push_back(i % 3 ? Scalar(1) : random_scalar(c.g2_order, rng));
  auto want = naive_msm<Fp2<4>>(c.g2, k, pts);
  EXPECT_EQ(pippenger_msm<Fp2<4>>(c.g2, k, pts, 5), want);
  EXPECT_EQ(sparse_msm<Fp2<4>>(c.g2, k, pts), want);
}

}  // namespace
}  // namespace szkp
