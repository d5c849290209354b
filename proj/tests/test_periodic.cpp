#include <doctest.h>

#include <cmath>

#include <pseudoshift/errors.hpp>
#include <pseudoshift/periodic.hpp>

#include "fixture_maps.hpp"

using namespace pseudoshift;

namespace {

Horizons small() {
  Horizons h;
  h.orbit = 300;
  h.series_terms = 400;
  return h;
}

// 1 / W_steps(k) in exact arithmetic
mpq_class inverse_product(const SelfMapRule& m, const WeightRule& w, uint64_t k, uint64_t steps) {
  mpq_class W = 1;
  for (uint64_t t = 0; t < steps; ++t) {
    W *= w.exact(k);
    k = m.apply(k);
  }
  return 1 / W;
}

}  // namespace

TEST_CASE("periodic point of the doubled backward shift") {
  auto s = fixtures::successor();
  auto w = fixtures::const_weight(2);
  auto r = build_periodic_point<mpq_class>(s, w, 1, 1, SpaceSpec::lp(1), 1e-6, small());
  CHECK(r.residual == 0.0);
  // term-by-term: e_1 + sum 2^{-n} e_{1+n}, nothing behind 1
  FinSeq<mpq_class> oracle;
  for (uint64_t n = 0; n < r.vector.size(); ++n) oracle.set(1 + n, mpq_class(1, 1u << n));
  CHECK(r.vector == oracle);
  CHECK(r.vector.size() > 10);
  REQUIRE(std::isfinite(r.tail_bound));
  CHECK(r.tail_bound < 1e-6);
  // the full tail is 2^{-T}, T the last kept exponent
  double dropped = std::ldexp(1.0, -static_cast<int>(r.vector.size() - 1));
  CHECK(dropped <= r.tail_bound * (1 + 1e-12));

  auto f = build_periodic_point<double>(s, w, 1, 1, SpaceSpec::lp(1), 1e-6, small());
  CHECK(f.relative_residual <= 1e-12);
}

TEST_CASE("verification") {
  auto s = fixtures::successor();
  auto w = fixtures::const_weight(2);
  auto zero = verify_periodic(s, w, FinSeq<mpq_class>{}, 3, SpaceSpec::lp(2), 0.0);
  CHECK(zero.residual == 0.0);
  CHECK(zero.pass);
  auto e1 = verify_periodic(s, w, FinSeq<mpq_class>::unit(1), 1, SpaceSpec::lp(2), 1e-9);
  CHECK(e1.residual == 1.0);
  CHECK_FALSE(e1.pass);
  CHECK_THROWS_AS(verify_periodic(s, w, FinSeq<double>::unit(1), 0, SpaceSpec::lp(2), 0.0), std::invalid_argument);
}

TEST_CASE("closing lp example") {
  auto m = fixtures::block4();
  auto w = fixtures::block4_weights(2);
  auto h = small();
  auto f = build_periodic_point<double>(m, w, 1, 2, SpaceSpec::lp(2), 1e-8, h);
  CHECK(f.relative_residual <= 1e-10);
  CHECK(f.tail_bound < 1e-8);
  CHECK(f.certificates.is_object());
  auto e = build_periodic_point<mpq_class>(m, w, 1, 2, SpaceSpec::lp(2), 1e-8, h);
  CHECK(e.residual == 0.0);
  // kept forward entries follow the product formula; 2^{-41} at n = 4 is dropped
  uint64_t at = 1;
  for (uint64_t n = 1; n <= 4; ++n) {
    at = iterate(m, at, 2);
    mpq_class c = inverse_product(m, w, 1, 2 * n);
    if (n < 4) CHECK(e.vector.get(at) == c);
    else CHECK(e.vector.get(at) == 0);
  }
}

TEST_CASE("rational residual vanishes on every example with k <= 10, N <= 3") {
  auto h = small();
  struct Config {
    SelfMapRule map;
    WeightRule rule;
    SpaceSpec space;
  };
  std::vector<Config> configs{{fixtures::successor(), fixtures::const_weight(2), SpaceSpec::lp(1)},
                              {fixtures::block4(), fixtures::block4_weights(2), SpaceSpec::lp(2)},
                              {fixtures::prime_triple(), fixtures::prime_triple_weights(2), SpaceSpec::c0()}};
  for (const auto& c : configs)
    for (uint64_t k = 1; k <= 10; ++k)
      for (uint64_t N = 1; N <= 3; ++N) {
        auto r = build_periodic_point<mpq_class>(c.map, c.rule, k, N, c.space, 1e-6, h);
        CHECK(r.residual == 0.0);
      }
}

TEST_CASE("distinct generators give disjoint supports") {
  auto h = small();
  auto m = fixtures::successor();
  auto w = fixtures::const_weight(2);
  auto a = build_periodic_point<mpq_class>(m, w, 1, 3, SpaceSpec::lp(1), 1e-6, h);
  auto b = build_periodic_point<mpq_class>(m, w, 2, 3, SpaceSpec::lp(1), 1e-6, h);
  for (uint64_t i : a.vector.support()) CHECK(b.vector.get(i) == 0);
  auto x = mpq_class(3) * a.vector + mpq_class(-1, 2) * b.vector;
  std::set<uint64_t> boundary = a.boundary;
  boundary.insert(b.boundary.begin(), b.boundary.end());
  CHECK(verify_periodic(m, w, x, 3, SpaceSpec::lp(1), 0.0, boundary).residual == 0.0);
}

TEST_CASE("tail bound covers 20 further terms") {
  auto h = small();
  auto m = fixtures::block4();
  auto w = fixtures::block4_weights(2);
  for (uint64_t k : {1, 2, 3}) {
    auto r = build_periodic_point<mpq_class>(m, w, k, 1, SpaceSpec::lp(2), 1e-4, h);
    uint64_t kept = 0, at = k;
    while (r.vector.get(iterate(m, at, 1)) != 0) {
      at = m.apply(at);
      ++kept;
    }
    double extra = 0.0;
    for (uint64_t n = kept + 1; n <= kept + 20; ++n) extra += std::pow(inverse_product(m, w, k, n).get_d(), 2);
    CHECK(std::sqrt(extra) <= r.tail_bound);
  }
}

TEST_CASE("non-decaying tails are reported") {
  auto h = small();
  CHECK_THROWS_AS(build_periodic_point<double>(fixtures::successor(), fixtures::const_weight(1), 1, 1,
                                               SpaceSpec::lp(2), 1e-6, h),
                  NonDecayingTail);
}

TEST_CASE("approximation by periodic points") {
  auto h = small();
  auto s = fixtures::successor();
  auto r = approximate_by_periodic(s, fixtures::const_weight(2), FinSeq<double>::unit(1), 0.1, SpaceSpec::lp(1), h);
  CHECK(r.achieved < 0.1);
  // x - e_1 is sum_{n>=1} 2^{-nN} e_{1+nN}, of l1 norm 2^{-N} / (1 - 2^{-N})
  double q = std::ldexp(1.0, -static_cast<int>(r.N));
  CHECK(r.distance <= q / (1 - q));
  CHECK(q / (1 - q) < 0.1);

  auto m = fixtures::block4();
  auto w = fixtures::block4_weights(2);
  FinSeq<double> y;
  for (uint64_t k = 1; k <= 5; ++k) y.set(k, 1.0);
  auto a = approximate_by_periodic(m, w, y, 1e-3, SpaceSpec::lp(2), h);
  CHECK(a.achieved < 1e-3);
  FinSeq<double> diff = a.x - y;
  double acc = 0.0;
  for (const auto& [i, v] : diff.entries()) acc += v * v;
  CHECK(std::sqrt(acc) == doctest::Approx(a.distance));
  CHECK_THROWS_AS(approximate_by_periodic(m, w, FinSeq<double>{}, 0.1, SpaceSpec::lp(2), h), std::invalid_argument);
}

TEST_CASE("hypercyclic prefixes") {
  auto h = small();
  auto s = fixtures::successor();
  auto w = fixtures::const_weight(2);
  auto one = construct_hypercyclic_prefix<double>(s, w, {FinSeq<double>::unit(1)}, {0.1}, SpaceSpec::lp(2), h);
  REQUIRE(one.visits.size() == 1);
  uint64_t m1 = one.visits[0].m;
  CHECK(std::ldexp(1.0, -static_cast<int>(m1)) < 0.05);
  CHECK(one.visits[0].error < 0.1);
  CHECK(norm(apply_operator(s, w, one.x, m1) - FinSeq<double>::unit(1), SpaceSpec::lp(2)) ==
        doctest::Approx(one.visits[0].error));

  auto none = construct_hypercyclic_prefix<double>(s, w, {}, {}, SpaceSpec::lp(2), h);
  CHECK(none.x.empty());
  CHECK(none.visits.empty());

  auto m = fixtures::block4();
  auto bw = fixtures::block4_weights(2);
  FinSeq<double> y2 = FinSeq<double>::unit(1) + FinSeq<double>::unit(2);
  auto two = construct_hypercyclic_prefix<double>(m, bw, {FinSeq<double>::unit(1), y2}, {0.25, 0.25},
                                                  SpaceSpec::lp(2), h);
  REQUIRE(two.visits.size() == 2);
  CHECK(two.visits[0].m < two.visits[1].m);
  CHECK(norm(apply_operator(m, bw, two.x, two.visits[0].m) - FinSeq<double>::unit(1), SpaceSpec::lp(2)) < 0.25);
  CHECK(norm(apply_operator(m, bw, two.x, two.visits[1].m) - y2, SpaceSpec::lp(2)) < 0.25);

  Horizons tight = h;
  tight.orbit = 2;
  CHECK_THROWS_AS(
      construct_hypercyclic_prefix<double>(s, w, {FinSeq<double>::unit(1)}, {0.01}, SpaceSpec::lp(2), tight),
      BudgetExceeded);
}
