#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "pseudoshift/criteria.hpp"
#include "pseudoshift/errors.hpp"
#include "pseudoshift/orbits.hpp"
#include "pseudoshift/seqspace.hpp"
#include "pseudoshift/weights.hpp"

namespace pseudoshift {

// Which terms of x_{N,k} to keep, decided on log magnitudes.
struct PeriodicPlan {
  uint64_t k = 0, N = 1;
  LogWalk forward, backward;
  size_t forward_terms = 0;   // kept terms phi^{nN}(k), n = 1..forward_terms
  size_t backward_terms = 0;  // kept terms phi^{-nN}(k), n = 1..backward_terms
  std::set<uint64_t> boundary;
  double tail_bound = 0.0;  // norm of everything dropped; +inf without a certificate
  json certificates = json::object();
};

// Keeps forward (backward) terms until the dropped remainder is certified below
// tail_eps in norm. Walks at most `steps` phi-steps each way.
PeriodicPlan plan_periodic_point(const SelfMapRule& map, const WeightRule& rule, uint64_t k, uint64_t N,
                                 const SpaceSpec& space, double tail_eps, uint64_t steps, uint64_t scan_horizon);

struct PeriodicCheck {
  double residual = 0.0;           // interior
  double relative = 0.0;           // interior residual over the norm of x
  double boundary_residual = 0.0;  // on the truncation boundary
  bool pass = false;
};

// Boundary indices are evaluated through log products only, so exact mode never
// needs the (possibly enormous) weights just past the truncation.
template <class S>
PeriodicCheck verify_periodic(const SelfMapRule& map, const WeightRule& rule, const FinSeq<S>& x, uint64_t N,
                              const SpaceSpec& space, double tol, const std::set<uint64_t>& boundary = {},
                              uint64_t horizon = 1'000'000) {
  if (N == 0) throw std::invalid_argument("period must be >= 1");
  FinSeq<S> interior;
  FinSeq<double> edge;
  for (const auto& [s, v] : x.entries())
    for (uint64_t l : preimage_set(map, s, N, horizon)) {
      if (boundary.count(l)) edge.add(l, forward_product(map, rule, l, N).value() * to_double(v));
      else interior.add(l, product_scalar<S>(map, rule, l, N) * v);
    }
  for (const auto& [i, v] : x.entries()) {
    if (boundary.count(i)) edge.add(i, -to_double(v));
    else interior.add(i, -v);
  }
  PeriodicCheck c;
  c.residual = norm(interior, space);
  const double scale = norm(x, space);
  c.relative = scale > 0 ? c.residual / scale : c.residual;
  c.boundary_residual = norm(edge, space);
  c.pass = c.residual <= tol;
  return c;
}

template <class S>
struct PeriodicPointReport {
  FinSeq<S> vector;
  uint64_t N = 1, k = 0;
  double tail_bound = 0.0;
  double residual = 0.0;
  double relative_residual = 0.0;
  double boundary_residual = 0.0;
  std::set<uint64_t> boundary;
  json certificates = json::object();

  json to_json() const {
    json b = json::array();
    for (uint64_t i : boundary) b.push_back(i);
    return json{{"k", k},
                {"N", N},
                {"entries", vector.to_json()["entries"]},
                {"tail_bound", std::isfinite(tail_bound) ? json(tail_bound) : json("unbounded")},
                {"residual", residual},
                {"relative_residual", relative_residual},
                {"boundary", b},
                {"boundary_residual", boundary_residual},
                {"certificates", certificates}};
  }
};

namespace detail {

template <class S>
S signed_weight(const WeightRule& rule, const Idx& i) {
  if constexpr (std::is_same_v<S, double>) {
    return rule.sign(i) * std::exp(rule.log_abs(i));
  } else {
    if (!i.representable()) throw HorizonExceeded("exact weights need 64-bit indices");
    return weight<S>(rule, i.value);
  }
}

}  // namespace detail

template <class S>
PeriodicPointReport<S> build_periodic_point(const SelfMapRule& map, const WeightRule& rule, uint64_t k, uint64_t N,
                                            const SpaceSpec& space, double tail_eps, const Horizons& h) {
  PeriodicPlan plan = plan_periodic_point(map, rule, k, N, space, tail_eps, h.series_terms, h.preimage_scan);
  PeriodicPointReport<S> r;
  r.k = k;
  r.N = N;
  r.vector.set(k, S(1));
  // forward: 1 / W_{nN}(k) at phi^{nN}(k)
  S W(1);
  for (size_t t = 0; t < plan.forward_terms * N; ++t) {
    W *= detail::signed_weight<S>(rule, plan.forward.points[t]);
    if ((t + 1) % N == 0) {
      const Idx& at = plan.forward.points[t + 1];
      if (!at.representable()) throw HorizonExceeded("periodic point support left the 64-bit range");
      r.vector.set(at.value, S(1) / W);
    }
  }
  // backward: B_{nN}(k) at phi^{-nN}(k)
  S B(1);
  for (size_t t = 1; t <= plan.backward_terms * N; ++t) {
    const Idx& at = plan.backward.points[t];
    B *= detail::signed_weight<S>(rule, at);
    if (t % N == 0) {
      if (!at.representable()) throw HorizonExceeded("periodic point support left the 64-bit range");
      r.vector.set(at.value, B);
    }
  }
  r.tail_bound = plan.tail_bound;
  r.boundary = plan.boundary;
  r.certificates = plan.certificates;
  PeriodicCheck c = verify_periodic(map, rule, r.vector, N, space, 0.0, r.boundary, h.preimage_scan);
  r.residual = c.residual;
  r.relative_residual = c.relative;
  r.boundary_residual = c.boundary_residual;
  return r;
}

template <class S>
struct ApproxReport {
  FinSeq<S> x;
  uint64_t N = 1;
  double achieved = 0.0;  // ||x - y|| plus the weighted tail bounds
  double distance = 0.0;  // ||x - y|| over stored entries
  double residual = 0.0;  // interior residual of x
  std::vector<PeriodicPointReport<S>> parts;
  json escape = json::array();

  json to_json() const {
    json ps = json::array();
    for (const auto& p : parts) ps.push_back(p.to_json());
    return json{{"N", N},        {"achieved", achieved}, {"distance", distance}, {"residual", residual},
                {"x", x.to_json()}, {"parts", ps},        {"escape", escape}};
  }
};

// Smallest admissible period first: past the escape threshold of every support
// index against [1..max supp y], then upward until the tails fit.
template <class S>
ApproxReport<S> approximate_by_periodic(const SelfMapRule& map, const WeightRule& rule, const FinSeq<S>& y,
                                        double eps, const SpaceSpec& space, const Horizons& h) {
  if (y.empty()) throw std::invalid_argument("target must be nonzero");
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  std::set<uint64_t> F;
  for (uint64_t i = 1; i <= y.max_index(); ++i) F.insert(i);
  ApproxReport<S> r;
  uint64_t n_a = 0;
  for (uint64_t k : y.support()) {
    EscapeReport e = escape_threshold(map, k, F, h.orbit, h.preimage_scan);
    if (!e.verdict.positive()) throw EscapeNotFound("no escape threshold for index " + std::to_string(k));
    if (!e.uniform && e.N >= h.orbit) throw EscapeNotFound("escape threshold not reached within the horizon");
    r.escape.push_back({{"k", k}, {"N", e.N}, {"uniform", e.uniform}});
    n_a = std::max(n_a, e.N);
  }
  double mass = 0.0;
  for (const auto& [k, v] : y.entries()) mass += abs_double(v);
  const double tail_eps = eps / (4.0 * mass);
  for (uint64_t N = n_a + 1; N <= n_a + h.orbit; ++N) {
    ApproxReport<S> cand;
    cand.N = N;
    cand.escape = r.escape;
    double tails = 0.0;
    std::set<uint64_t> boundary;
    for (const auto& [k, v] : y.entries()) {
      auto part = build_periodic_point<S>(map, rule, k, N, space, tail_eps, h);
      tails += abs_double(v) * part.tail_bound;
      cand.x += v * part.vector;
      boundary.insert(part.boundary.begin(), part.boundary.end());
      cand.parts.push_back(std::move(part));
    }
    cand.distance = norm(cand.x - y, space);
    cand.achieved = cand.distance + tails;
    if (cand.achieved < eps) {
      cand.residual = verify_periodic(map, rule, cand.x, N, space, 0.0, boundary, h.preimage_scan).residual;
      return cand;
    }
  }
  throw NonDecayingTail("no period within the horizon brings the approximation below eps");
}

struct Visit {
  uint64_t m = 0;
  double error = 0.0;
};

template <class S>
struct PrefixReport {
  FinSeq<S> x;
  std::vector<Visit> visits;

  json to_json() const {
    json v = json::array();
    for (const auto& vi : visits) v.push_back({{"m", vi.m}, {"error", vi.error}});
    return json{{"x", x.to_json()}, {"visits", v}};
  }
};

// Greedy m_1 < m_2 < ... with x = sum_j S^{m_j} y_j. Each m_l is the least value with
//   |T^{m_l} sum_{i<l} S^{m_i} y_i| < delta_l / 2,
//   |S^{m_l - m_i} y_l| < delta_i / 2^l for i < l, and |S^{m_l} y_l| < delta_l / 2^l.
template <class S>
PrefixReport<S> construct_hypercyclic_prefix(const SelfMapRule& map, const WeightRule& rule,
                                             const std::vector<FinSeq<S>>& targets, const std::vector<double>& deltas,
                                             const SpaceSpec& space, const Horizons& h) {
  if (targets.size() != deltas.size()) throw std::invalid_argument("one delta per target");
  PrefixReport<S> r;
  std::vector<uint64_t> ms;
  uint64_t prev = 0;
  for (size_t l = 0; l < targets.size(); ++l) {
    const double scale = std::ldexp(1.0, -static_cast<int>(l + 1));
    const FinSeq<S>& y = targets[l];
    std::optional<uint64_t> chosen;
    for (uint64_t m = prev + 1; m <= h.orbit && !chosen; ++m) {
      if (!(norm(apply_operator(map, rule, r.x, m, h.preimage_scan), space) < deltas[l] / 2)) continue;
      if (!(norm(s_map(map, rule, y, m), space) < deltas[l] * scale)) continue;
      bool cross = true;
      for (size_t i = 0; i < l && cross; ++i)
        cross = norm(s_map(map, rule, y, m - ms[i]), space) < deltas[i] * scale;
      if (cross) chosen = m;
    }
    if (!chosen) throw BudgetExceeded("no visiting time within the horizon for target " + std::to_string(l + 1));
    ms.push_back(*chosen);
    prev = *chosen;
    r.x += s_map(map, rule, y, *chosen);
  }
  for (size_t l = 0; l < targets.size(); ++l) {
    double err = norm(apply_operator(map, rule, r.x, ms[l], h.preimage_scan) - targets[l], space);
    if (!(err < deltas[l])) throw BudgetExceeded("visit " + std::to_string(l + 1) + " misses its target");
    r.visits.push_back({ms[l], err});
  }
  return r;
}

}  // namespace pseudoshift
