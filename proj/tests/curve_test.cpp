#include <gtest/gtest.h>

#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "szkp/curve.hpp"
#include "szkp/presets.hpp"

namespace szkp {
namespace {

// Affine chord-tangent law on y^2 = x^3 + 3 over F17 using plain integers.
using Aff = std::optional<std::pair<int, int>>;

int md(long v) { return static_cast<int>(((v % 17) + 17) % 17); }
int inv17(int a) {
  for (int x = 1; x < 17; ++x) {
    if (md(static_cast<long>(a) * x) == 1) return x;
  }
  return -1;
}

Aff affine_add(Aff p, Aff q) {
  if (!p) return q;
  if (!q) return p;
  auto [x1, y1] = *p;
  auto [x2, y2] = *q;
  int lambda;
  if (x1 == x2) {
    if (md(y1 + y2) == 0) return std::nullopt;
    lambda = md(3L * x1 * x1 * inv17(md(2L * y1)));
  } else {
    lambda = md(static_cast<long>(y2 - y1) * inv17(md(x2 - x1)));
  }
  int x3 = md(static_cast<long>(lambda) * lambda - x1 - x2);
  int y3 = md(static_cast<long>(lambda) * (x1 - x3) - y1);
  return std::make_pair(x3, y3);
}

std::vector<Aff> toy_points() {
  std::vector<Aff> pts{std::nullopt};
  for (int x = 0; x < 17; ++x) {
    for (int y = 0; y < 17; ++y) {
      if (md(static_cast<long>(y) * y) == md(static_cast<long>(x) * x * x + 3)) pts.emplace_back(std::make_pair(x, y));
    }
  }
  return pts;
}

using G1t = ToyCurve::G1;

G1t lift(const Aff& a) {
  const auto& c = toy_curve();
  if (!a) return G1t::identity(c.g1);
  return G1t::from_affine(c.g1, Fp<1>::from_u64(*c.fq, static_cast<u64>(a->first)),
                          Fp<1>::from_u64(*c.fq, static_cast<u64>(a->second)));
}

Aff lower(const G1t& p) {
  auto a = p.to_affine();
  if (!a) return std::nullopt;
  return std::make_pair(static_cast<int>(a->first.to_canonical()[0]), static_cast<int>(a->second.to_canonical()[0]));
}

TEST(ToyCurve, GroupOrderByEnumeration) {
  auto pts = toy_points();
  EXPECT_EQ(pts.size(), 18u);
  EXPECT_EQ(toy_curve().g1_order, Scalar(pts.size()));
}

TEST(ToyCurve, ExhaustiveTableMatchesAffineOracle) {
  auto pts = toy_points();
  for (const auto& a : pts) {
    for (const auto& b : pts) {
      auto sum = padd(lift(a), lift(b));
      ASSERT_TRUE(sum.is_on_curve());
      ASSERT_EQ(lower(sum), affine_add(a, b));
    }
    ASSERT_EQ(lower(pdbl(lift(a))), affine_add(a, a));
  }
}

TEST(ToyCurve, DoublingOfGenerator) {
  auto p = toy_curve().g1_generator;
  EXPECT_EQ(lower(padd(p, p)), affine_add(std::make_pair(1, 2), std::make_pair(1, 2)));
}

TEST(ToyCurve, ScalarMulByOrderIsIdentity) {
  const auto& c = toy_curve();
  for (const auto& a : toy_points()) {
    EXPECT_TRUE(scalar_mul(c.g1_order, lift(a)).is_identity());
  }
  EXPECT_TRUE(scalar_mul(0, c.g1_generator).is_identity());
  EXPECT_EQ(scalar_mul(1, c.g1_generator), c.g1_generator);
}

TEST(ToyCurve, TwoTorsionPointDoublesToIdentity) {
  Aff t = std::make_pair(10, 0);
  EXPECT_TRUE(pdbl(lift(t)).is_identity());
  EXPECT_TRUE(padd(lift(t), lift(t)).is_identity());
}

TEST(ToyCurve, G2OrderByEnumeration) {
  const auto& c = toy_curve();
  const auto& ext = *c.fq2;
  std::size_t count = 1;
  for (u64 a = 0; a < 17; ++a) {
    for (u64 b = 0; b < 17; ++b) {
      Fp2<1> x(ext, Fp<1>::from_u64(*c.fq, a), Fp<1>::from_u64(*c.fq, b));
      Fp2<1> rhs = x.square() * x + c.g2.b;
      for (u64 e = 0; e < 17; ++e) {
        for (u64 f = 0; f < 17; ++f) {
          Fp2<1> y(ext, Fp<1>::from_u64(*c.fq, e), Fp<1>::from_u64(*c.fq, f));
          if (y.square() == rhs) ++count;
        }
      }
    }
  }
  EXPECT_EQ(c.g2_order, Scalar(count));
  EXPECT_TRUE(scalar_mul2(c.g2_order, c.g2_generator).is_identity());
}

TEST(Curve, NegOfIdentityIsIdentity) {
  auto o = G1t::identity(toy_curve().g1);
  EXPECT_TRUE(o.neg().is_identity());
  EXPECT_TRUE(pdbl(o).is_identity());
}

TEST(Curve, RejectsOffCurvePoint) {
  const auto& c = toy_curve();
  EXPECT_THROW(G1t::from_affine(c.g1, Fp<1>::from_u64(*c.fq, 1), Fp<1>::from_u64(*c.fq, 3)), std::invalid_argument);
}

template <class Suite>
void group_properties(const Suite& c, u64 seed, int pairs, int triples) {
  std::mt19937_64 rng(seed);
  auto pts = random_points(c.g1_generator, static_cast<std::size_t>(2 * pairs), rng);
  for (int i = 0; i < pairs; ++i) {
    const auto& p = pts[2 * i];
    const auto& q = pts[2 * i + 1];
    auto pq = padd(p, q);
    ASSERT_TRUE(pq.is_on_curve());
    ASSERT_EQ(pq, padd(q, p));
    ASSERT_EQ(pdbl(p), padd(p, p));
    ASSERT_TRUE(padd(p, p.neg()).is_identity());
    ASSERT_EQ(padd(p, Suite::G1::identity(c.g1)), p);
  }
  for (int i = 0; i + 2 < triples; ++i) {
    ASSERT_EQ(padd(padd(pts[i], pts[i + 1]), pts[i + 2]), padd(pts[i], padd(pts[i + 1], pts[i + 2])));
  }
}

TEST(Curve, Bn254GeneratorsOnCurve) {
  const auto& c = bn254();
  EXPECT_TRUE(c.g1_generator.is_on_curve());
  EXPECT_TRUE(c.g2_generator.is_on_curve());
  EXPECT_TRUE(scalar_mul(c.g1_order, c.g1_generator).is_identity());
  EXPECT_TRUE(scalar_mul2(c.g2_order, c.g2_generator).is_identity());
}

TEST(Curve, Mnt4753GeneratorsOnCurve) {
  const auto& c = mnt4753();
  EXPECT_TRUE(c.g1_generator.is_on_curve());
  EXPECT_TRUE(c.g2_generator.is_on_curve());
  EXPECT_TRUE(scalar_mul(c.g1_order, c.g1_generator).is_identity());
  EXPECT_TRUE(scalar_mul2(c.g2_order, c.g2_generator).is_identity());
}

TEST(Curve, Bn254GroupLaw) { group_properties(bn254(), 21, 1000, 100); }
TEST(Curve, Mnt4753GroupLaw) { group_properties(mnt4753(), 22, 200, 100); }

TEST(Curve, RepeatedDoublingMatchesScalarMul) {
  const auto& c = bn254();
  auto p = c.g1_generator;
  auto q = pdbl(pdbl(pdbl(pdbl(p))));
  EXPECT_EQ(q, scalar_mul(16, p));
}

TEST(Curve, G2GroupLaw) {
  const auto& c = bn254();
  std::mt19937_64 rng(5);
  auto pts = random_points(c.g2_generator, 64, rng);
  auto o = Bn254::G2::identity(c.g2);
  for (const auto& p : pts) {
    ASSERT_TRUE(p.is_on_curve());
    ASSERT_EQ(padd2(p, o), p);
    ASSERT_TRUE(padd2(p, p.neg()).is_identity());
    ASSERT_EQ(scalar_mul2(Scalar(2), p), padd2(p, p));
    ASSERT_EQ(pdbl2(p), padd2(p, p));
  }
}

TEST(Curve, FaultHookBreaksDoubling) {
  const auto& c = toy_curve();
  auto p = c.g1_generator;
  fault::padd_skip_doubling_branch = true;
  auto broken = padd(p, p);
  fault::padd_skip_doubling_branch = false;
  EXPECT_NE(broken, pdbl(p));
}

}  // namespace
}  // namespace szkp
