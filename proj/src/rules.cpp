#include "pseudoshift/rules.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pseudoshift/errors.hpp"
#include "pseudoshift/primes.hpp"

namespace pseudoshift {

Idx located(const Idx& i) {
  if (i.located) return i;
  auto pp = PrimeTable::shared().locate(i.value);
  if (!pp) throw HorizonExceeded("cannot place " + std::to_string(i.value) + " among prime-power families");
  Idx out = i;
  out.located = true;
  out.family = pp->family;
  out.pos = pp->pos;
  return out;
}

uint64_t value_mod(const Idx& i, uint64_t m) {
  if (i.value) return i.value % m;
  return PrimeTable::shared().element_mod(i.family, i.pos, m);
}

double log_value(const Idx& i) {
  if (i.value) return std::log(static_cast<double>(i.value));
  return PrimeTable::shared().log_element(i.family, i.pos);
}

bool matches(const Guard& g, const Idx& i) {
  return std::visit(
      [&](const auto& gd) -> bool {
        using T = std::decay_t<decltype(gd)>;
        if constexpr (std::is_same_v<T, SetGuard>) {
          return i.value && std::binary_search(gd.members.begin(), gd.members.end(), i.value);
        } else if constexpr (std::is_same_v<T, ResidueGuard>) {
          if (i.value && i.value < gd.min) return false;
          return value_mod(i, gd.mod) == gd.rem;
        } else {
          Idx l = located(i);
          if (gd.family && *gd.family != l.family) return false;
          return l.pos >= gd.pos_min && l.pos % gd.pos_mod == gd.pos_rem;
        }
      },
      g);
}

int64_t json_int(const json& j, const char* field) {
  if (!j.contains(field)) throw MalformedRule(std::string("missing field '") + field + "'");
  const auto& v = j.at(field);
  if (!v.is_number_integer()) throw MalformedRule(std::string("field '") + field + "' must be an integer");
  return v.get<int64_t>();
}

uint64_t json_uint(const json& j, const char* field, uint64_t min_value) {
  int64_t v = json_int(j, field);
  if (v < 0 || static_cast<uint64_t>(v) < min_value)
    throw MalformedRule(std::string("field '") + field + "' must be >= " + std::to_string(min_value));
  return static_cast<uint64_t>(v);
}

Guard guard_from_json(const json& j) {
  if (!j.is_object() || j.size() != 1) throw MalformedRule("guard must be an object with one kind");
  if (j.contains("set")) {
    SetGuard g;
    for (const auto& v : j.at("set")) {
      if (!v.is_number_integer() || v.get<int64_t>() < 1) throw MalformedRule("set guard members must be >= 1");
      g.members.push_back(v.get<uint64_t>());
    }
    std::sort(g.members.begin(), g.members.end());
    g.members.erase(std::unique(g.members.begin(), g.members.end()), g.members.end());
    return g;
  }
  if (j.contains("residue")) {
    const auto& r = j.at("residue");
    ResidueGuard g;
    g.mod = json_uint(r, "mod", 1);
    g.rem = json_uint(r, "rem");
    if (g.rem >= g.mod) throw MalformedRule("residue guard needs rem < mod");
    g.min = r.contains("min") ? json_uint(r, "min", 1) : 1;
    return g;
  }
  if (j.contains("prime_pos")) {
    const auto& r = j.at("prime_pos");
    PrimePosGuard g;
    if (!r.contains("i")) throw MalformedRule("prime_pos guard needs 'i'");
    if (r.at("i").is_string()) {
      if (r.at("i") != "any") throw MalformedRule("prime_pos 'i' must be \"any\" or an integer");
    } else {
      g.family = json_uint(r, "i");
    }
    g.pos_mod = r.contains("pos_mod") ? json_uint(r, "pos_mod", 1) : 1;
    g.pos_rem = r.contains("pos_rem") ? json_uint(r, "pos_rem") : 0;
    if (g.pos_rem >= g.pos_mod) throw MalformedRule("prime_pos guard needs pos_rem < pos_mod");
    g.pos_min = r.contains("pos_min") ? json_uint(r, "pos_min", 1) : 1;
    return g;
  }
  throw MalformedRule("unknown guard kind: " + j.dump());
}

json to_json(const Guard& g) {
  return std::visit(
      [](const auto& gd) -> json {
        using T = std::decay_t<decltype(gd)>;
        if constexpr (std::is_same_v<T, SetGuard>) {
          return json{{"set", gd.members}};
        } else if constexpr (std::is_same_v<T, ResidueGuard>) {
          return json{{"residue", {{"mod", gd.mod}, {"rem", gd.rem}, {"min", gd.min}}}};
        } else {
          json r{{"pos_mod", gd.pos_mod}, {"pos_rem", gd.pos_rem}, {"pos_min", gd.pos_min}};
          if (gd.family) r["i"] = *gd.family;
          else r["i"] = "any";
          return json{{"prime_pos", r}};
        }
      },
      g);
}

}  // namespace pseudoshift
