#include "pseudoshift/seqspace.hpp"

namespace pseudoshift {

SpaceSpec SpaceSpec::lp(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("p must be a finite real >= 1");
  return {Kind::Lp, p};
}

SpaceSpec SpaceSpec::from_json(const json& j) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "c0") return c0();
    throw ConfigError("space must be \"c0\" or {\"kind\": \"lp\", \"p\": p}");
  }
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("space needs a 'kind'");
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "c0") return c0();
  if (kind == "lp") {
    if (!j.contains("p") || !j.at("p").is_number()) throw ConfigError("lp space needs a numeric 'p'");
    return lp(j.at("p").get<double>());
  }
  throw ConfigError("unknown space kind: " + kind);
}

json SpaceSpec::to_json() const {
  if (kind == Kind::C0) return json{{"kind", "c0"}};
  return json{{"kind", "lp"}, {"p", p}};
}

std::string SpaceSpec::name() const {
  if (kind == Kind::C0) return "c0";
  std::string s = std::to_string(p);
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') s.pop_back();
  return "l" + s;
}

std::vector<uint64_t> preimage_set(const SelfMapRule& map, uint64_t s, uint64_t n, uint64_t horizon) {
  std::vector<Idx> level{Idx::of(s)};
  for (uint64_t j = 0; j < n && !level.empty(); ++j) {
    std::vector<Idx> next;
    for (const Idx& m : level) {
      bool certain = true;
      auto pre = preimages(map, m, horizon, &certain);
      if (pre.empty() && !certain)
        throw PreimageHorizonExceeded("no preimage of " + std::to_string(m.value) + " within scan horizon " +
                                      std::to_string(horizon));
      next.insert(next.end(), pre.begin(), pre.end());
    }
    level = std::move(next);
  }
  std::vector<uint64_t> out;
  for (const Idx& i : level) {
    if (!i.value) throw HorizonExceeded("preimage beyond 64 bits");
    out.push_back(i.value);
  }
  return out;
}

}  // namespace pseudoshift
