#pragma once

#include <memory>
#include <string>

#include "szkp/curve.hpp"

namespace szkp {

using Bn254 = CurveSuite<4>;
using Mnt4753 = CurveSuite<12>;
using ToyCurve = CurveSuite<1>;

inline const Bn254& bn254() {
  static const auto suite = load_curve<4>(data_dir() / "curves" / "bn254.params");
  return *suite;
}

inline const Mnt4753& mnt4753() {
  static const auto suite = load_curve<12>(data_dir() / "curves" / "mnt4753.params");
  return *suite;
}

inline const ToyCurve& toy_curve() {
  static const auto suite = load_curve<1>(data_dir() / "curves" / "toy.params");
  return *suite;
}

/// Single-limb NTT-friendly prime for desk-scale transform tests beyond
/// what F17 supports.
struct ToyNttField {
  std::shared_ptr<const FieldCtx<1>> field;
  Fp<1> generator;
};

inline const ToyNttField& toy_ntt_field() {
  static const ToyNttField f = [] {
    auto kv = KeyValueFile::load(data_dir() / "fields" / "toy-ntt.params");
    ToyNttField out;
    out.field = FieldCtx<1>::create(kv.hex("p"), kv.str("name"));
    out.generator = Fp<1>::from_canonical(*out.field, kv.hex("generator"));
    return out;
  }();
  return f;
}

}  // namespace szkp
