#include "pseudoshift/weights.hpp"

#include <algorithm>
#include <cmath>

#include "pseudoshift/errors.hpp"

namespace pseudoshift {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr uint64_t kExactExponentCap = 1'000'000;
constexpr size_t kCertificateWalkCap = 100'000;
constexpr double kPrecisionBand = 1e15;

WeightExpr prepare(WeightExpr e) {
  if (auto* c = std::get_if<ConstWeight>(&e)) {
    if (sgn(c->c) == 0) throw MalformedRule("zero constant weight");
    c->log_c = log_abs(c->c);
  } else if (auto* g = std::get_if<GeometricWeight>(&e)) {
    if (sgn(g->base) == 0) throw MalformedRule("zero geometric base");
    if (g->exp_sign != 1 && g->exp_sign != -1) throw MalformedRule("exp_sign must be +1 or -1");
    g->log_base = log_abs(g->base);
  } else {
    for (const auto& [n, v] : std::get<TableWeight>(e).entries) {
      if (n == 0) throw MalformedRule("weight table index 0 is the sentinel");
      if (sgn(v) == 0) throw MalformedRule("zero weight at table index " + std::to_string(n));
    }
  }
  return e;
}

WeightExpr wexpr_from_json(const json& j) {
  if (!j.is_object() || j.size() != 1) throw MalformedRule("weight expression must be an object with one kind");
  if (j.contains("const")) return ConstWeight{parse_rational(j.at("const"))};
  if (j.contains("geometric")) {
    const auto& g = j.at("geometric");
    if (!g.contains("base")) throw MalformedRule("geometric weight needs 'base'");
    int s = g.contains("exp_sign") ? static_cast<int>(json_int(g, "exp_sign")) : 1;
    return GeometricWeight{parse_rational(g.at("base")), s};
  }
  if (j.contains("table")) {
    TableWeight t;
    for (const auto& [key, v] : j.at("table").items()) {
      uint64_t n = 0;
      try {
        n = std::stoull(key);
      } catch (...) {
        throw MalformedRule("weight table key is not an index: " + key);
      }
      t.entries[n] = parse_rational(v);
    }
    return t;
  }
  throw MalformedRule("unknown weight expression: " + j.dump());
}

json wexpr_to_json(const WeightExpr& e) {
  if (auto* c = std::get_if<ConstWeight>(&e)) return json{{"const", rational_to_json(c->c)}};
  if (auto* g = std::get_if<GeometricWeight>(&e))
    return json{{"geometric", {{"base", rational_to_json(g->base)}, {"exp_sign", g->exp_sign}}}};
  json t = json::object();
  for (const auto& [n, v] : std::get<TableWeight>(e).entries) t[std::to_string(n)] = rational_to_json(v);
  return json{{"table", t}};
}

const mpq_class& table_lookup(const TableWeight& t, uint64_t n) {
  auto it = t.entries.find(n);
  if (n == 0 || it == t.entries.end()) throw MalformedRule("weight table has no entry for " + std::to_string(n));
  return it->second;
}

bool is_sentinel(const Idx& i) { return !i.located && i.value == 0; }

}  // namespace

WeightRule::WeightRule(std::vector<WeightClause> clauses, WeightExpr fallback) : fallback_(prepare(fallback)) {
  for (auto& c : clauses) c.expr = prepare(c.expr);
  clauses_ = std::move(clauses);
}

WeightRule WeightRule::from_json(const json& j) {
  if (!j.is_object()) throw MalformedRule("weight rule must be a JSON object");
  std::vector<WeightClause> clauses;
  if (j.contains("clauses")) {
    for (const auto& c : j.at("clauses")) {
      if (!c.contains("guard") || !c.contains("expr")) throw MalformedRule("clause needs 'guard' and 'expr'");
      clauses.push_back({guard_from_json(c.at("guard")), wexpr_from_json(c.at("expr"))});
    }
  }
  if (!j.contains("default")) throw MalformedRule("weight rule needs a 'default' expression");
  return WeightRule(std::move(clauses), wexpr_from_json(j.at("default")));
}

WeightRule WeightRule::constant(const mpq_class& c) { return WeightRule({}, ConstWeight{c}); }

json WeightRule::to_json() const {
  json cl = json::array();
  for (const auto& c : clauses_) cl.push_back({{"guard", pseudoshift::to_json(c.guard)}, {"expr", wexpr_to_json(c.expr)}});
  return json{{"clauses", cl}, {"default", wexpr_to_json(fallback_)}};
}

const WeightExpr& WeightRule::expr_for(const Idx& i) const {
  for (const auto& c : clauses_)
    if (matches(c.guard, i)) return c.expr;
  return fallback_;
}

double WeightRule::log_abs(const Idx& i) const {
  if (is_sentinel(i)) return -kInf;
  const WeightExpr& e = expr_for(i);
  if (auto* c = std::get_if<ConstWeight>(&e)) return c->log_c;
  if (auto* g = std::get_if<GeometricWeight>(&e)) {
    if (g->log_base == 0.0) return 0.0;
    double x = i.value ? static_cast<double>(i.value) : std::exp(log_value(i));
    return g->exp_sign * g->log_base * x;
  }
  return pseudoshift::log_abs(table_lookup(std::get<TableWeight>(e), i.value));
}

int WeightRule::sign(const Idx& i) const {
  if (is_sentinel(i)) return 1;
  const WeightExpr& e = expr_for(i);
  if (auto* c = std::get_if<ConstWeight>(&e)) return sgn(c->c);
  if (auto* g = std::get_if<GeometricWeight>(&e)) return (sgn(g->base) < 0 && value_mod(i, 2) == 1) ? -1 : 1;
  return sgn(table_lookup(std::get<TableWeight>(e), i.value));
}

mpq_class WeightRule::exact(uint64_t n) const {
  if (n == 0) return 0;
  const WeightExpr& e = expr_for(Idx::of(n));
  if (auto* c = std::get_if<ConstWeight>(&e)) return c->c;
  if (auto* g = std::get_if<GeometricWeight>(&e)) {
    if (n > kExactExponentCap) throw HorizonExceeded("exact geometric weight exponent too large: " + std::to_string(n));
    return pow_rational(g->base, g->exp_sign * static_cast<int64_t>(n));
  }
  return table_lookup(std::get<TableWeight>(e), n);
}

std::vector<Guard> WeightRule::guards() const {
  std::vector<Guard> out;
  for (const auto& c : clauses_) out.push_back(c.guard);
  return out;
}

uint64_t WeightRule::table_floor() const {
  uint64_t f = 0;
  auto scan = [&](const WeightExpr& e) {
    if (auto* t = std::get_if<TableWeight>(&e))
      if (!t->entries.empty()) f = std::max(f, t->entries.rbegin()->first + 1);
  };
  for (const auto& c : clauses_) scan(c.expr);
  scan(fallback_);
  return f;
}

json LogProduct::to_json() const {
  json j{{"sign", sign}, {"is_zero", is_zero}, {"incomplete", incomplete}};
  j["log_magnitude"] = is_zero ? json(nullptr) : json(log_magnitude);
  return j;
}

LogProduct forward_product(const SelfMapRule& map, const WeightRule& rule, uint64_t k, uint64_t n) {
  LogProduct lp;
  Idx cur = Idx::of(k);
  for (uint64_t j = 0; j < n; ++j) {
    lp.multiply(rule.log_abs(cur), rule.sign(cur));
    if (j + 1 < n) cur = map.apply(cur);
  }
  return lp;
}

LogProduct backward_product(const SelfMapRule& map, const WeightRule& rule, uint64_t k, uint64_t n,
                            uint64_t horizon) {
  LogProduct lp;
  Idx cur = Idx::of(k);
  for (uint64_t j = 0; j < n; ++j) {
    bool certain = true;
    auto pre = preimages(map, cur, horizon, &certain);
    if (pre.size() > 1) throw NotInjectiveWitness(pre[0].value, pre[1].value);
    if (pre.empty()) {
      lp.incomplete = !certain;
      lp.annihilate();
      break;
    }
    cur = pre[0];
    lp.multiply(rule.log_abs(cur), rule.sign(cur));
  }
  return lp;
}

// ---- trend certificate ----

bool Trend::beta_zero() const {
  double scale = 1.0;
  for (double g : G) scale += std::fabs(g);
  return std::fabs(beta) <= 1e-12 * (scale + std::fabs(alpha));
}

static double tol_of(const Trend& t) {
  double s = 1.0 + std::fabs(t.alpha);
  for (double g : t.G) s += std::fabs(g);
  return 1e-12 * s;
}

bool Trend::to_infinity() const {
  if (!certified) return false;
  if (low > 0) return true;
  if (!linear) return false;
  if (beta_zero()) {
    for (double g : G)
      if (alpha + g <= tol_of(*this)) return false;
    return true;
  }
  return beta > 0;
}

bool Trend::fails_to_infinity() const {
  if (!certified || to_infinity()) return false;
  return linear || high <= 0;
}

bool Trend::unbounded() const {
  if (!certified) return false;
  if (low > 0) return true;
  if (!linear) return false;
  if (beta_zero()) {
    for (double g : G)
      if (alpha + g > tol_of(*this)) return true;
    return false;
  }
  return beta > 0;
}

bool Trend::bounded_above() const {
  if (!certified) return false;
  if (high <= 0) return true;
  if (!linear) return false;
  if (beta_zero()) {
    for (double g : G)
      if (alpha + g > tol_of(*this)) return false;
    return true;
  }
  return beta < 0;
}

std::optional<std::pair<double, double>> Trend::tail(size_t N, double L_N, double p) const {
  if (!to_infinity() || N < onset) return std::nullopt;
  if (low > 0) {
    double r = std::exp(-p * low);
    return std::make_pair(std::exp(-p * L_N) / (1.0 - r), r);
  }
  const bool flat = beta_zero();
  auto Lc = [&](double j, size_t i) {
    double b = flat ? 0.0 : beta;
    return L_onset + alpha * j + b * j * (j - 1) / 2 + A[i] + G[i] * j;
  };
  auto step = [&](double J, size_t i) { return alpha + (flat ? 0.0 : beta) * J + G[i]; };
  uint64_t J = 0;
  if (!flat) {
    double need = 0;
    for (size_t i = 0; i < length; ++i) need = std::max(need, std::ceil((-alpha - G[i]) / beta));
    J = static_cast<uint64_t>(need);
  }
  for (int guard = 0; guard < 64; ++guard) {
    bool ok = true;
    for (size_t i = 0; i < length; ++i) ok = ok && step(static_cast<double>(J), i) > 0;
    if (ok) break;
    ++J;
  }
  uint64_t jN = (N - onset) / length;
  J = std::max<uint64_t>(J, jN + 1);
  if ((J - jN) * length > 10'000'000) return std::nullopt;
  double sum = 0.0;
  for (size_t n = N; n < onset + J * length; ++n) {
    size_t off = n - onset;
    sum += std::exp(-p * Lc(static_cast<double>(off / length), off % length));
  }
  double ratio = 0.0;
  for (size_t i = 0; i < length; ++i) {
    double r = std::exp(-p * step(static_cast<double>(J), i));
    if (!(r < 1.0)) return std::nullopt;
    ratio = std::max(ratio, r);
    sum += std::exp(-p * Lc(static_cast<double>(J), i)) / (1.0 - r);
  }
  return std::make_pair(sum, ratio);
}

json Trend::to_json() const {
  if (!certified) return json{{"certified", false}};
  json j{{"certified", true}, {"onset", onset}, {"length", length}, {"linear", linear}};
  if (linear) {
    j["block_sum"] = {{"alpha", alpha}, {"beta", beta}};
  }
  if (std::isfinite(low)) j["step_lower_bound"] = low;
  if (std::isfinite(high)) j["step_upper_bound"] = high;
  return j;
}

LogWalk log_walk(const SelfMapRule& map, const WeightRule& rule, uint64_t k, bool backward, size_t steps,
                 uint64_t scan_horizon) {
  LogWalk lw;
  auto lat = Lattice::build(map, rule.guards(), rule.table_floor());
  const Lattice* lp = lat ? &*lat : nullptr;
  size_t cap = lp ? std::max(steps, kCertificateWalkCap) : steps;
  Walk w = backward ? walk_backward(map, lp, Idx::of(k), cap, scan_horizon, steps)
                    : walk_forward(map, lp, Idx::of(k), cap, steps);
  lw.points = std::move(w.points);
  lw.sentinel = w.sentinel;
  lw.certain = w.certain;
  lw.overflow = w.overflow;
  const int sgn_dir = backward ? -1 : 1;
  const size_t off = backward ? 1 : 0;
  lw.L.push_back(0.0);
  for (size_t t = 0; t + off < lw.points.size(); ++t) {
    double l;
    try {
      l = sgn_dir * rule.log_abs(lw.points[t + off]);
    } catch (const HorizonExceeded&) {
      lw.overflow = true;
      break;
    }
    if (!std::isfinite(l)) {
      lw.overflow = true;
      break;
    }
    lw.lambda.push_back(l);
    lw.L.push_back(lw.L.back() + l);
  }
  if (lw.overflow) lw.sentinel = false;
  if (!w.cycle) return lw;

  Trend& tr = lw.trend;
  tr.onset = backward ? (w.cycle->onset == 0 ? 0 : w.cycle->onset - 1) : w.cycle->onset;
  tr.length = w.cycle->length;
  if (tr.onset + tr.length > lw.lambda.size()) return lw;
  const double D = static_cast<double>(w.cycle->displacement);
  const bool arithmetic = lp->kind() == LatticeKind::Arithmetic;
  tr.low = kInf;
  tr.high = -kInf;
  std::vector<double> c(tr.length), g(tr.length);
  for (size_t i = 0; i < tr.length; ++i) {
    const Idx& pt = lw.points[tr.onset + i + off];
    const WeightExpr& e = rule.expr_for(pt);
    bool exponential = false;
    if (std::holds_alternative<TableWeight>(e)) return lw;
    c[i] = lw.lambda[tr.onset + i];
    g[i] = 0.0;
    if (auto* ge = std::get_if<GeometricWeight>(&e); ge && ge->log_base != 0.0) {
      if (arithmetic) g[i] = sgn_dir * ge->exp_sign * ge->log_base * D;
      else exponential = true;
    }
    if (exponential) {
      tr.linear = false;
      tr.low = std::min(tr.low, c[i] > 0 ? c[i] : -kInf);
      tr.high = std::max(tr.high, c[i] < 0 ? c[i] : kInf);
    } else {
      tr.low = std::min(tr.low, g[i] >= 0 ? c[i] : -kInf);
      tr.high = std::max(tr.high, g[i] <= 0 ? c[i] : kInf);
    }
  }
  if (tr.linear) {
    tr.A.assign(tr.length, 0.0);
    tr.G.assign(tr.length, 0.0);
    for (size_t i = 0; i < tr.length; ++i) {
      if (i) {
        tr.A[i] = tr.A[i - 1] + c[i - 1];
        tr.G[i] = tr.G[i - 1] + g[i - 1];
      }
      tr.alpha += c[i];
      tr.beta += g[i];
    }
  }
  tr.L_onset = lw.L[tr.onset];
  tr.certified = true;
  return lw;
}

std::vector<std::pair<uint64_t, double>> sample_log2(const std::vector<double>& values, size_t first_index) {
  std::vector<std::pair<uint64_t, double>> out;
  if (values.empty()) return out;
  size_t last = first_index + values.size() - 1;
  for (size_t n = 1; n <= last; n *= 2)
    if (n >= first_index) out.emplace_back(n, values[n - first_index]);
  if (out.empty() || out.back().first != last) out.emplace_back(last, values.back());
  return out;
}

// ---- series ----

namespace {

constexpr size_t kPlateauWindow = 20;
constexpr double kPlateauRelative = 1e-12;

SeriesReport sum_series(const LogWalk& lw, double p, uint64_t terms, bool backward) {
  SeriesReport r;
  if (p < 1.0 || !std::isfinite(p)) throw MalformedRule("p must be a finite real >= 1");
  const size_t avail = lw.lambda.size();
  const size_t m = std::min<size_t>(terms, avail);
  std::vector<double> sums, term;
  double S = 0.0;
  for (size_t n = 1; n <= m; ++n) {
    double L = lw.L[n];
    if (std::fabs(L) > kPrecisionBand) r.precision_loss = true;
    double t = std::exp(-p * L);
    S += t;
    term.push_back(t);
    sums.push_back(S);
  }
  r.sum = S;
  r.terms = m;
  r.partial_sums = sample_log2(sums, 1);

  if (backward && lw.sentinel) {
    double rest = 0.0;
    for (size_t n = m + 1; n <= avail; ++n) rest += std::exp(-p * lw.L[n]);
    r.tail_kind = "sentinel";
    r.tail_bound = rest;
    r.onset = avail + 1;
    r.verdict = Verdict::exact({{"tail", "sentinel"}, {"zero_from", avail + 1}, {"tail_bound", rest}});
    return r;
  }

  const Trend& tr = lw.trend;
  if (tr.to_infinity()) {
    size_t N = std::max<size_t>(m + 1, tr.onset);
    if (N >= lw.L.size()) N = std::max<size_t>(m, tr.onset);
    if (N < lw.L.size()) {
      double explicit_part = 0.0;
      for (size_t n = m + 1; n < N; ++n) explicit_part += std::exp(-p * lw.L[n]);
      if (auto t = tr.tail(N, lw.L[N], p)) {
        r.tail_kind = "geometric";
        r.tail_ratio = t->second;
        r.onset = N;
        r.tail_bound = explicit_part + t->first;
        r.verdict = Verdict::exact({{"tail", "geometric"},
                                    {"ratio", t->second},
                                    {"onset", N},
                                    {"tail_bound", *r.tail_bound},
                                    {"trend", tr.to_json()}});
        return r;
      }
    }
  }
  if (tr.fails_to_infinity()) {
    r.divergent = true;
    r.tail_kind = "divergent";
    r.verdict = Verdict::refuted({{"reason", "terms do not tend to zero"}, {"trend", tr.to_json()}});
    return r;
  }
  if (m >= kPlateauWindow) {
    bool plateau = true;
    for (size_t i = m - kPlateauWindow; i < m; ++i)
      if (!(term[i] <= kPlateauRelative * sums[i])) plateau = false;
    if (plateau) {
      r.tail_kind = "plateau";
      r.verdict = Verdict::satisfied({{"tail", "plateau"}, {"window", kPlateauWindow}});
      return r;
    }
    r.divergent = term[m - 1] >= term[m - kPlateauWindow];
  }
  r.verdict = Verdict::inconclusive({{"terms", m}, {"walk_certain", lw.certain}, {"overflow", lw.overflow}});
  return r;
}

Verdict limit_verdict(const LogWalk& lw, uint64_t terms, bool backward) {
  if (backward && lw.sentinel)
    return Verdict::exact({{"limit", "sentinel"}, {"zero_from", lw.lambda.size() + 1}});
  const Trend& tr = lw.trend;
  if (tr.to_infinity()) return Verdict::exact({{"limit", "certified"}, {"trend", tr.to_json()}});
  if (tr.fails_to_infinity()) return Verdict::refuted({{"limit", "fails"}, {"trend", tr.to_json()}});
  size_t m = std::min<size_t>(terms, lw.lambda.size());
  if (m >= 4) {
    double lo = kInf;
    for (size_t n = m / 2; n <= m; ++n) lo = std::min(lo, lw.L[n]);
    if (lo > std::log(1e8)) return Verdict::satisfied({{"limit", "threshold"}, {"min_log_second_half", lo}});
  }
  return Verdict::inconclusive({{"terms", m}});
}

}  // namespace

json SeriesReport::to_json() const {
  json ps = json::array();
  for (auto [n, s] : partial_sums) ps.push_back({n, s});
  json j{{"verdict", pseudoshift::to_json(verdict)},
         {"partial_sums", ps},
         {"sum", sum},
         {"terms", terms},
         {"tail_kind", tail_kind},
         {"divergent", divergent},
         {"precision_loss", precision_loss}};
  if (tail_ratio) j["tail_ratio"] = *tail_ratio;
  if (onset) j["onset"] = *onset;
  if (tail_bound) j["tail_bound"] = *tail_bound;
  return j;
}

SeriesReport forward_inverse_series(const SelfMapRule& map, const WeightRule& rule, uint64_t k, double p,
                                    uint64_t terms) {
  return sum_series(log_walk(map, rule, k, false, terms, 0), p, terms, false);
}

SeriesReport backward_p_series(const SelfMapRule& map, const WeightRule& rule, uint64_t k, double p,
                               uint64_t terms, uint64_t horizon) {
  return sum_series(log_walk(map, rule, k, true, terms, horizon), p, terms, true);
}

json LimitReport::to_json() const {
  auto pairs = [](const std::vector<std::pair<uint64_t, double>>& v) {
    json a = json::array();
    for (auto [n, x] : v) a.push_back({n, x});
    return a;
  };
  return json{{"forward", pseudoshift::to_json(forward)},
              {"backward", pseudoshift::to_json(backward)},
              {"forward_log", pairs(forward_log)},
              {"backward_log", pairs(backward_log)},
              {"verdict", pseudoshift::to_json(overall())}};
}

LimitReport forward_product_limits(const SelfMapRule& map, const WeightRule& rule, uint64_t k, uint64_t terms,
                                   uint64_t horizon) {
  LimitReport r;
  LogWalk fw = log_walk(map, rule, k, false, terms, horizon);
  LogWalk bw = log_walk(map, rule, k, true, terms, horizon);
  r.forward = limit_verdict(fw, terms, false);
  r.backward = limit_verdict(bw, terms, true);
  size_t mf = std::min<size_t>(terms, fw.lambda.size());
  r.forward_log = sample_log2(std::vector<double>(fw.L.begin() + 1, fw.L.begin() + 1 + mf), 1);
  size_t mb = std::min<size_t>(terms, bw.lambda.size());
  std::vector<double> blog;
  for (size_t n = 1; n <= mb; ++n) blog.push_back(-bw.L[n]);
  r.backward_log = sample_log2(blog, 1);
  return r;
}

}  // namespace pseudoshift
