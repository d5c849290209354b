#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pseudoshift/lattice.hpp"
#include "pseudoshift/rules.hpp"
#include "pseudoshift/scalar.hpp"
#include "pseudoshift/selfmap.hpp"
#include "pseudoshift/verdict.hpp"

namespace pseudoshift {

struct ConstWeight {
  mpq_class c;
  double log_c = 0.0;
};
// base^(exp_sign * n)
struct GeometricWeight {
  mpq_class base;
  int exp_sign = 1;
  double log_base = 0.0;
};
struct TableWeight {
  std::map<uint64_t, mpq_class> entries;
};
using WeightExpr = std::variant<ConstWeight, GeometricWeight, TableWeight>;

struct WeightClause {
  Guard guard;
  WeightExpr expr;
};

class WeightRule {
 public:
  WeightRule(std::vector<WeightClause> clauses, WeightExpr fallback);

  static WeightRule from_json(const json& j);
  static WeightRule constant(const mpq_class& c);
  json to_json() const;

  const std::vector<WeightClause>& clauses() const { return clauses_; }
  const WeightExpr& expr_for(const Idx& i) const;

  // log|w_n| and sign; n = 0 gives -inf.
  double log_abs(const Idx& i) const;
  int sign(const Idx& i) const;
  mpq_class exact(uint64_t n) const;

  // Guards plus table keys, for building a joint lattice with a map.
  std::vector<Guard> guards() const;
  uint64_t table_floor() const;

 private:
  std::vector<WeightClause> clauses_;
  WeightExpr fallback_;
};

// w_n in the chosen scalar type; w_0 = 0.
template <class S>
S weight(const WeightRule& rule, uint64_t n) {
  if (n == 0) return S(0);
  if constexpr (std::is_same_v<S, double>) {
    return rule.sign(Idx::of(n)) * std::exp(rule.log_abs(Idx::of(n)));
  } else {
    return rule.exact(n);
  }
}

struct LogProduct {
  double log_magnitude = 0.0;
  int sign = 1;
  bool is_zero = false;
  bool incomplete = false;  // a preimage scan stopped at its horizon

  void multiply(double log_abs, int s) {
    log_magnitude += log_abs;
    sign *= s;
  }
  void annihilate() {
    is_zero = true;
    log_magnitude = -std::numeric_limits<double>::infinity();
  }
  double value() const { return is_zero ? 0.0 : sign * std::exp(log_magnitude); }
  json to_json() const;
};

LogProduct forward_product(const SelfMapRule& map, const WeightRule& rule, uint64_t k, uint64_t n);
LogProduct backward_product(const SelfMapRule& map, const WeightRule& rule, uint64_t k, uint64_t n,
                            uint64_t horizon);

// Products evaluated directly in the scalar type (exact rationals serve as the oracle).
template <class S>
S forward_product_value(const SelfMapRule& map, const WeightRule& rule, uint64_t k, uint64_t n) {
  S acc(1);
  for (uint64_t j = 0; j < n; ++j) {
    acc *= weight<S>(rule, k);
    if (j + 1 < n) k = map.apply(k);
  }
  return acc;
}

template <class S>
S backward_product_value(const SelfMapRule& map, const WeightRule& rule, uint64_t k, uint64_t n,
                         uint64_t horizon) {
  S acc(1);
  for (uint64_t j = 0; j < n; ++j) {
    k = preimage(map, k, horizon).value;
    acc *= weight<S>(rule, k);
    if (k == 0) break;
  }
  return acc;
}

// Cumulative log sums L_n = sum_{t<n} lambda_t along a certified escaping walk.
// From `onset` on, lambda repeats blockwise: linearly in the block count j for
// residue maps, or monotonically away from zero for prime-power maps.
struct Trend {
  bool certified = false;
  bool linear = true;
  size_t onset = 0, length = 0;
  double L_onset = 0.0;
  double alpha = 0.0, beta = 0.0;  // block sum is alpha + beta j
  std::vector<double> A, G;        // in-block prefix A_i + G_i j
  double low = -std::numeric_limits<double>::infinity();   // lambda_t >= low for t >= onset
  double high = std::numeric_limits<double>::infinity();   // lambda_t <= high for t >= onset

  bool to_infinity() const;    // lim L_n = +inf
  bool fails_to_infinity() const;
  bool unbounded() const;      // sup L_n = +inf
  bool bounded_above() const;  // sup L_n < +inf
  bool beta_zero() const;

  // Bound on sum_{n >= N} exp(-p L_n) given L_N; N >= onset. Returns {bound, ratio}.
  std::optional<std::pair<double, double>> tail(size_t N, double L_N, double p) const;
  json to_json() const;
};

// Walk data for one direction: points, lambda_t, L_n, and an optional trend.
struct LogWalk {
  std::vector<Idx> points;
  std::vector<double> lambda;  // lambda_t, t = 0..
  std::vector<double> L;       // L_0 = 0, L_{n+1} = L_n + lambda_n
  bool sentinel = false;       // backward: product vanishes from n = lambda.size() + 1 on
  bool certain = true;
  bool overflow = false;
  Trend trend;
};

// Forward: lambda_t = log|w(phi^t k)|. Backward: lambda_t = -log|w(phi^{-(t+1)} k)|.
LogWalk log_walk(const SelfMapRule& map, const WeightRule& rule, uint64_t k, bool backward, size_t steps,
                 uint64_t scan_horizon);

struct SeriesReport {
  Verdict verdict;
  std::vector<std::pair<uint64_t, double>> partial_sums;  // sampled (m, S_m)
  double sum = 0.0;
  uint64_t terms = 0;
  std::string tail_kind = "none";
  std::optional<double> tail_ratio;
  std::optional<uint64_t> onset;
  std::optional<double> tail_bound;  // bound on the sum of all terms after `terms`
  bool divergent = false;
  bool precision_loss = false;
  json to_json() const;
};

SeriesReport forward_inverse_series(const SelfMapRule& map, const WeightRule& rule, uint64_t k, double p,
                                    uint64_t terms);
SeriesReport backward_p_series(const SelfMapRule& map, const WeightRule& rule, uint64_t k, double p,
                               uint64_t terms, uint64_t horizon);

struct LimitReport {
  Verdict forward;   // |W_n(k)| -> inf
  Verdict backward;  // |B_n(k)| -> 0
  std::vector<std::pair<uint64_t, double>> forward_log;   // sampled log|W_n|
  std::vector<std::pair<uint64_t, double>> backward_log;  // sampled log|B_n|
  Verdict overall() const { return combine({forward, backward}); }
  json to_json() const;
};

LimitReport forward_product_limits(const SelfMapRule& map, const WeightRule& rule, uint64_t k, uint64_t terms,
                                   uint64_t horizon = 1'000'000);

// Samples at 1, 2, 4, ... and the last index.
std::vector<std::pair<uint64_t, double>> sample_log2(const std::vector<double>& values, size_t first_index);

}  // namespace pseudoshift
