#include "pseudoshift/selfmap.hpp"

#include <unordered_map>

#include "pseudoshift/errors.hpp"
#include "pseudoshift/lattice.hpp"
#include "pseudoshift/primes.hpp"

namespace pseudoshift {

namespace {

MapExpr expr_from_json(const json& j) {
  if (!j.is_object() || j.size() != 1) throw MalformedRule("expression must be an object with one kind");
  if (j.contains("affine")) {
    const auto& a = j.at("affine");
    return AffineExpr{a.contains("a") ? json_int(a, "a") : 1, a.contains("b") ? json_int(a, "b") : 0};
  }
  if (j.contains("value")) {
    const auto& v = j.at("value");
    if (!v.is_number_integer() || v.get<int64_t>() < 1) throw MalformedRule("value expression must be >= 1");
    return ValueExpr{v.get<uint64_t>()};
  }
  if (j.contains("prime_shift")) return PrimeShiftExpr{json_int(j.at("prime_shift"), "delta")};
  throw MalformedRule("unknown expression kind: " + j.dump());
}

json expr_to_json(const MapExpr& e) {
  if (auto* a = std::get_if<AffineExpr>(&e)) return json{{"affine", {{"a", a->a}, {"b", a->b}}}};
  if (auto* v = std::get_if<ValueExpr>(&e)) return json{{"value", v->v}};
  return json{{"prime_shift", {{"delta", std::get<PrimeShiftExpr>(e).delta}}}};
}

}  // namespace

SelfMapRule::SelfMapRule(std::vector<MapClause> clauses, MapExpr fallback)
    : clauses_(std::move(clauses)), fallback_(fallback) {
  if (auto lat = Lattice::build(*this)) lattice_ = std::make_shared<const Lattice>(std::move(*lat));
}

SelfMapRule SelfMapRule::from_json(const json& j) {
  if (!j.is_object()) throw MalformedRule("map rule must be a JSON object");
  std::vector<MapClause> clauses;
  if (j.contains("clauses")) {
    for (const auto& c : j.at("clauses")) {
      if (!c.contains("guard") || !c.contains("expr")) throw MalformedRule("clause needs 'guard' and 'expr'");
      clauses.push_back({guard_from_json(c.at("guard")), expr_from_json(c.at("expr"))});
    }
  }
  if (!j.contains("default")) throw MalformedRule("map rule needs a 'default' expression");
  return SelfMapRule(std::move(clauses), expr_from_json(j.at("default")));
}

SelfMapRule SelfMapRule::successor() { return SelfMapRule({}, AffineExpr{1, 1}); }

json SelfMapRule::to_json() const {
  json cl = json::array();
  for (const auto& c : clauses_) cl.push_back({{"guard", pseudoshift::to_json(c.guard)}, {"expr", expr_to_json(c.expr)}});
  return json{{"clauses", cl}, {"default", expr_to_json(fallback_)}};
}

const MapExpr& SelfMapRule::expr_for(const Idx& i) const {
  for (const auto& c : clauses_)
    if (matches(c.guard, i)) return c.expr;
  return fallback_;
}

Idx SelfMapRule::apply(const Idx& i) const {
  const MapExpr& e = expr_for(i);
  if (auto* a = std::get_if<AffineExpr>(&e)) {
    if (!i.value) throw HorizonExceeded("affine clause applied to an index beyond 64 bits");
    __int128 r = static_cast<__int128>(a->a) * i.value + a->b;
    if (r < 1) throw MalformedRule("phi(" + std::to_string(i.value) + ") < 1");
    if (r > static_cast<__int128>(UINT64_MAX)) throw HorizonExceeded("phi value overflows 64 bits");
    return Idx::of(static_cast<uint64_t>(r));
  }
  if (auto* v = std::get_if<ValueExpr>(&e)) return Idx::of(v->v);
  Idx l = located(i);
  int64_t p = static_cast<int64_t>(l.pos) + std::get<PrimeShiftExpr>(e).delta;
  if (p < 1) throw MalformedRule("prime_shift moves position of " + std::to_string(i.value) + " below 1");
  Idx out;
  out.located = true;
  out.family = l.family;
  out.pos = static_cast<uint64_t>(p);
  out.value = PrimeTable::shared().element(l.family, out.pos).value_or(0);
  return out;
}

uint64_t SelfMapRule::apply(uint64_t n) const {
  if (n == 0) throw MalformedRule("phi is defined on n >= 1");
  Idx r = apply(Idx::of(n));
  if (!r.value) throw HorizonExceeded("phi(" + std::to_string(n) + ") overflows 64 bits");
  return r.value;
}

uint64_t apply(const SelfMapRule& map, uint64_t n) { return map.apply(n); }

uint64_t iterate(const SelfMapRule& map, uint64_t n, uint64_t j) {
  for (uint64_t s = 0; s < j; ++s) n = map.apply(n);
  return n;
}

std::vector<Idx> preimages(const SelfMapRule& map, const Idx& k, uint64_t horizon, bool* certain) {
  if (const Lattice* lat = map.lattice()) {
    if (certain) *certain = true;
    return lat->preimages(k);
  }
  std::vector<Idx> out;
  if (k.value) {
    for (uint64_t l = 1; l <= horizon; ++l) {
      Idx r = map.apply(Idx::of(l));
      if (r.value == k.value) out.push_back(Idx::of(l));
    }
  }
  if (certain) *certain = !out.empty();
  return out;
}

PreimageResult preimage(const SelfMapRule& map, uint64_t k, uint64_t horizon) {
  bool certain = true;
  auto pre = preimages(map, Idx::of(k), horizon, &certain);
  if (pre.size() > 1) throw NotInjectiveWitness(pre[0].value, pre[1].value);
  if (pre.empty()) return {0, certain};
  if (!pre[0].value) throw HorizonExceeded("preimage of " + std::to_string(k) + " overflows 64 bits");
  return {pre[0].value, true};
}

IterationResult backward_iterate(const SelfMapRule& map, uint64_t k, uint64_t j, uint64_t horizon) {
  IterationResult r;
  Idx cur = Idx::of(k);
  for (uint64_t s = 0; s < j; ++s) {
    bool certain = true;
    auto pre = preimages(map, cur, horizon, &certain);
    ++r.steps_taken;
    if (pre.size() > 1) throw NotInjectiveWitness(pre[0].value, pre[1].value);
    if (pre.empty()) {
      r.value = 0;
      r.hit_sentinel = true;
      r.certain = certain;
      return r;
    }
    cur = pre[0];
  }
  if (!cur.value) throw HorizonExceeded("backward iterate overflows 64 bits");
  r.value = cur.value;
  return r;
}

Verdict check_injective(const SelfMapRule& map, uint64_t horizon) {
  std::unordered_map<uint64_t, uint64_t> first;
  first.reserve(horizon * 2);
  for (uint64_t n = 1; n <= horizon; ++n) {
    uint64_t v = map.apply(n);
    auto [it, fresh] = first.emplace(v, n);
    if (!fresh) return Verdict::refuted({{"witness", {it->second, n}}, {"image", v}, {"horizon", horizon}});
  }
  json ev{{"scanned", horizon}};
  if (const Lattice* lat = map.lattice(); lat && lat->injective()) {
    ev["certificate"] = {{"kind", "residue-translation"},
                         {"modulus", lat->modulus()},
                         {"threshold", lat->threshold()}};
    return Verdict::exact(ev);
  }
  return Verdict::satisfied(ev);
}

std::optional<std::pair<uint64_t, uint64_t>> find_periodic_point(const SelfMapRule& map, uint64_t max_period,
                                                                 uint64_t max_start) {
  for (uint64_t k = 1; k <= max_start; ++k) {
    Idx cur = Idx::of(k);
    for (uint64_t n = 1; n <= max_period; ++n) {
      try {
        cur = map.apply(cur);
      } catch (const HorizonExceeded&) {
        break;
      }
      if (cur.value == k) return std::make_pair(k, n);
    }
  }
  return std::nullopt;
}

Verdict check_periodic_points(const SelfMapRule& map, uint64_t max_period, uint64_t max_start) {
  if (auto pp = find_periodic_point(map, max_period, max_start))
    return Verdict::refuted({{"periodic_point", pp->first}, {"period", pp->second}});
  json ev{{"max_period", max_period}, {"max_start", max_start}};
  if (const Lattice* lat = map.lattice(); lat && lat->aperiodic()) {
    ev["certificate"] = {{"kind", "escaping-residue-cycles"},
                         {"modulus", lat->modulus()},
                         {"threshold", lat->threshold()}};
    return Verdict::exact(ev);
  }
  return Verdict::satisfied(ev);
}

}  // namespace pseudoshift
