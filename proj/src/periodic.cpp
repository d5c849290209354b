#include "pseudoshift/periodic.hpp"

#include <limits>

namespace pseudoshift {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sum_{m >= M} exp(-p L_m): explicit terms up to the trend onset, the certified
// tail after it.
std::optional<double> tail_sum(const LogWalk& lw, size_t M, double p) {
  const Trend& tr = lw.trend;
  if (!tr.to_infinity()) return std::nullopt;
  size_t start = std::max(M, tr.onset);
  if (start >= lw.L.size()) return std::nullopt;
  double s = 0.0;
  for (size_t m = M; m < start; ++m) s += std::exp(-p * lw.L[m]);
  auto t = tr.tail(start, lw.L[start], p);
  if (!t) return std::nullopt;
  return s + t->first;
}

struct Cut {
  size_t terms = 0;       // kept multiples of N
  double tail = 0.0;      // norm bound on the dropped part
  std::string kind;       // "geometric" | "sentinel" | "uncertified"
};

// First multiple M of N whose dropped remainder fits under eps.
std::optional<Cut> find_cut(const LogWalk& lw, uint64_t N, double p, double eps, bool sentinel) {
  const size_t last = lw.L.size() - 1;  // L_m known for m <= last
  for (size_t n = 1;; ++n) {
    const size_t M = n * N;
    if (M > last) {
      if (sentinel) return Cut{n - 1, 0.0, "sentinel"};
      break;
    }
    if (!(std::exp(-lw.L[M]) < eps)) continue;
    if (sentinel) {
      double s = 0.0;
      for (size_t m = M; m <= last; ++m) s += std::exp(-p * lw.L[m]);
      if (std::pow(s, 1.0 / p) < eps) return Cut{n - 1, std::pow(s, 1.0 / p), "sentinel"};
      continue;
    }
    if (auto s = tail_sum(lw, M, p)) {
      if (std::pow(*s, 1.0 / p) < eps) return Cut{n - 1, std::pow(*s, 1.0 / p), "geometric"};
    }
  }
  if (lw.trend.certified) return std::nullopt;
  // no certificate: stop where every walked coefficient from M on is below eps
  for (size_t n = 1; n * N <= last; ++n) {
    bool small = true;
    for (size_t M = n * N; M <= last && small; M += N) small = std::exp(-lw.L[M]) < eps;
    if (small) return Cut{n - 1, kInf, "uncertified"};
  }
  return std::nullopt;
}

uint64_t value_of(const Idx& i) {
  if (!i.representable()) throw HorizonExceeded("periodic point support left the 64-bit range");
  return i.value;
}

}  // namespace

PeriodicPlan plan_periodic_point(const SelfMapRule& map, const WeightRule& rule, uint64_t k, uint64_t N,
                                 const SpaceSpec& space, double tail_eps, uint64_t steps, uint64_t scan_horizon) {
  if (k == 0 || N == 0) throw std::invalid_argument("k and N must be >= 1");
  if (!(tail_eps > 0)) throw std::invalid_argument("tail_eps must be positive");
  const double p = space.kind == SpaceSpec::Kind::C0 ? 1.0 : space.p;
  PeriodicPlan plan;
  plan.k = k;
  plan.N = N;
  plan.forward = log_walk(map, rule, k, false, std::max<uint64_t>(steps, 2 * N), scan_horizon);
  plan.backward = log_walk(map, rule, k, true, std::max<uint64_t>(steps, 2 * N), scan_horizon);

  auto fcut = find_cut(plan.forward, N, p, tail_eps, false);
  if (!fcut) throw NonDecayingTail("forward coefficients of x_{N," + std::to_string(k) + "} do not decay below " +
                                   std::to_string(tail_eps));
  auto bcut = find_cut(plan.backward, N, p, tail_eps, plan.backward.sentinel);
  if (!bcut) throw NonDecayingTail("backward coefficients of x_{N," + std::to_string(k) + "} do not decay below " +
                                   std::to_string(tail_eps));
  plan.forward_terms = fcut->terms;
  plan.backward_terms = bcut->terms;
  plan.tail_bound = fcut->tail + bcut->tail;

  plan.boundary.insert(value_of(plan.forward.points[fcut->terms * N]));
  const size_t drop_b = (bcut->terms + 1) * N;
  if (drop_b < plan.backward.points.size()) plan.boundary.insert(value_of(plan.backward.points[drop_b]));

  GeneratorResult g = generator(map, k, N, scan_horizon);
  plan.certificates = {{"forward", {{"tail", fcut->kind}, {"terms", fcut->terms}, {"trend", plan.forward.trend.to_json()}}},
                       {"backward", {{"tail", bcut->kind}, {"terms", bcut->terms}, {"trend", plan.backward.trend.to_json()}}},
                       {"generator", {{"g", g.g}, {"exact", g.exact}, {"is_generator", g.g == k}}}};
  return plan;
}

}  // namespace pseudoshift
