#include <doctest.h>

#include <cmath>

#include <pseudoshift/errors.hpp>
#include <pseudoshift/seqspace.hpp>

#include "fixture_maps.hpp"

using namespace pseudoshift;

namespace {

// ((wC)^n x)_k straight from the definition, over indices 1..bound
FinSeq<mpq_class> operator_by_definition(const SelfMapRule& m, const WeightRule& w, const FinSeq<mpq_class>& x,
                                         uint64_t n, uint64_t bound) {
  FinSeq<mpq_class> y;
  for (uint64_t k = 1; k <= bound; ++k) {
    mpq_class W = 1;
    uint64_t j = k;
    for (uint64_t t = 0; t < n; ++t) {
      W *= w.exact(j);
      j = m.apply(j);
    }
    y.set(k, W * x.get(j));
  }
  return y;
}

}  // namespace

TEST_CASE("lp and c0 norms") {
  FinSeq<double> x;
  x.set(1, 3.0);
  x.set(7, -4.0);
  CHECK(norm(x, SpaceSpec::lp(2)) == doctest::Approx(5.0));
  CHECK(norm(x, SpaceSpec::lp(1)) == doctest::Approx(7.0));
  CHECK(norm(x, SpaceSpec::c0()) == 4.0);
  CHECK(norm(x, SpaceSpec::lp(3)) == doctest::Approx(std::cbrt(27.0 + 64.0)));
  CHECK(norm(FinSeq<double>{}, SpaceSpec::lp(2)) == 0.0);
  // scaling keeps huge entries finite
  FinSeq<double> big;
  big.set(2, 1e200);
  big.set(3, 1e200);
  CHECK(norm(big, SpaceSpec::lp(2)) == doctest::Approx(std::sqrt(2.0) * 1e200));
}

TEST_CASE("spaces") {
  CHECK_THROWS_AS(SpaceSpec::lp(0.5), ConfigError);
  CHECK_THROWS_AS(SpaceSpec::lp(INFINITY), ConfigError);
  CHECK(SpaceSpec::from_json("c0").kind == SpaceSpec::Kind::C0);
  auto s = SpaceSpec::from_json(json{{"kind", "lp"}, {"p", 1.5}});
  CHECK(s.p == 1.5);
  CHECK(s.name() == "l1.5");
  CHECK(SpaceSpec::from_json(s.to_json()).p == 1.5);
  CHECK_THROWS_AS(SpaceSpec::from_json(json{{"kind", "lq"}}), ConfigError);
}

TEST_CASE("arithmetic drops zeros") {
  auto a = FinSeq<mpq_class>::unit(3, mpq_class(1, 2));
  auto b = FinSeq<mpq_class>::unit(3, mpq_class(1, 2));
  CHECK((a - b).empty());
  CHECK((a + b).get(3) == 1);
  CHECK((mpq_class(0) * a).empty());
  CHECK_THROWS_AS(FinSeq<double>::unit(0), Error);
  auto j = FinSeq<mpq_class>::from_json(json{{"entries", {{"4", "2/3"}, {"9", -1}}}});
  CHECK(j.get(4) == mpq_class(2, 3));
  CHECK(FinSeq<mpq_class>::from_json(j.to_json()) == j);
  CHECK_THROWS_AS(FinSeq<double>::from_json(json{{"entries", {{"0", 1}}}}), ConfigError);
  CHECK_THROWS_AS(FinSeq<double>::from_json(json{{"entries", {{"x", 1}}}}), ConfigError);
}

TEST_CASE("operator powers agree with the definition") {
  auto m = fixtures::mod5_drift();
  auto w = fixtures::block4_weights(2);
  FinSeq<mpq_class> x;
  x.set(1, 1);
  x.set(5, mpq_class(-3, 7));
  x.set(12, 2);
  for (uint64_t n = 0; n <= 4; ++n) {
    auto y = apply_operator(m, w, x, n, 10000);
    // every preimage of a support index lies below 40 for this map
    CHECK(y == operator_by_definition(m, w, x, n, 40));
  }
  auto s = fixtures::successor();
  auto y = apply_operator(s, fixtures::const_weight(2), FinSeq<double>::unit(2), 1);
  CHECK(y.get(1) == 2.0);
  CHECK(y.size() == 1);
  CHECK(apply_operator(s, fixtures::const_weight(2), FinSeq<double>::unit(1), 1).empty());
}

TEST_CASE("T S is the identity") {
  auto m = fixtures::block4();
  auto w = fixtures::block4_weights(2);
  FinSeq<mpq_class> x;
  x.set(2, 5);
  x.set(9, mpq_class(1, 3));
  for (uint64_t n = 1; n <= 6; ++n) CHECK(apply_operator(m, w, s_map(m, w, x, n), n) == x);
  auto e = s_map(fixtures::successor(), fixtures::const_weight(2), FinSeq<mpq_class>::unit(1), 3);
  CHECK(e.get(4) == mpq_class(1, 8));
}

TEST_CASE("preimage sets") {
  auto m = fixtures::first_map();
  auto pre = preimage_set(m, 4, 1, 20);
  CHECK(pre.size() == 17);  // 4..20
  auto s = preimage_set(fixtures::successor(), 3, 5, 100);
  CHECK(s.empty());
}
