#include "pseudoshift/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "pseudoshift/errors.hpp"
#include "pseudoshift/orbits.hpp"

namespace pseudoshift {

namespace {

constexpr uint64_t kMaxPeriod = 100;
constexpr uint64_t kMaxPeriodicStart = 1000;
constexpr int kThresholdDecades = 8;

struct Structural {
  Verdict injective, periodic;
  bool refuted() const { return injective.is(VerdictKind::Refuted) || periodic.is(VerdictKind::Refuted); }
};

Structural structural(const SelfMapRule& map, const Horizons& h) {
  return {check_injective(map, h.structural),
          check_periodic_points(map, kMaxPeriod, std::min(h.structural, kMaxPeriodicStart))};
}

template <class PerK>
CriterionReport run(const SelfMapRule& map, const Horizons& h, const std::vector<uint64_t>& sample_k,
                    json header, PerK per_k) {
  if (sample_k.empty()) throw std::invalid_argument("sample set must be nonempty");
  CriterionReport r;
  Structural s = structural(map, h);
  r.injective = s.injective;
  r.periodic = s.periodic;
  std::vector<Verdict> parts{s.injective, s.periodic};
  if (!s.refuted()) {
    std::set<uint64_t> ks(sample_k.begin(), sample_k.end());
    for (uint64_t k : ks) {
      SampleReport sr;
      sr.k = k;
      try {
        per_k(k, sr);
      } catch (const Error& e) {
        sr.verdict = Verdict::inconclusive({{"error", e.what()}});
      }
      parts.push_back(sr.verdict);
      r.samples.push_back(std::move(sr));
    }
  }
  header["samples"] = r.samples.size();
  header["horizons"] = h.to_json();
  r.overall = combine(parts, header);
  return r;
}

}  // namespace

Horizons Horizons::from_json(const json& j, Horizons base) {
  if (!j.is_object()) throw ConfigError("horizons must be an object");
  for (const auto& [key, v] : j.items())
    if (key != "orbit" && key != "series_terms" && key != "preimage_scan" && key != "structural")
      throw ConfigError("unknown horizon '" + key + "'");
  auto read = [&](const char* key, uint64_t& out) {
    if (!j.contains(key)) return;
    try {
      out = json_uint(j, key, 1);
    } catch (const MalformedRule& e) {
      throw ConfigError(std::string("horizons: ") + e.what());
    }
  };
  read("orbit", base.orbit);
  read("series_terms", base.series_terms);
  read("preimage_scan", base.preimage_scan);
  read("structural", base.structural);
  return base;
}

Horizons Horizons::from_json(const json& j) { return from_json(j, Horizons{}); }

json Horizons::to_json() const {
  return json{{"orbit", orbit}, {"series_terms", series_terms}, {"preimage_scan", preimage_scan},
              {"structural", structural}};
}

json CriterionReport::to_json() const {
  json samples_j = json::array();
  for (const auto& s : samples)
    samples_j.push_back({{"k", s.k}, {"forward", s.forward}, {"backward", s.backward},
                         {"verdict", pseudoshift::to_json(s.verdict)}});
  return json{{"structural", {{"injective", pseudoshift::to_json(injective)},
                              {"periodic", pseudoshift::to_json(periodic)}}},
              {"samples", samples_j},
              {"overall", pseudoshift::to_json(overall)}};
}

std::vector<uint64_t> default_sample(const SelfMapRule& map, const Horizons& h, uint64_t cover) {
  std::set<uint64_t> ks;
  for (uint64_t k = 1; k <= 10; ++k) ks.insert(k);
  try {
    GeneratorSet gs = generator_set(map, 1, cover, h.preimage_scan);
    for (const auto& [g, exact] : gs.members)
      if (exact) ks.insert(g);
  } catch (const Error&) {
    // structural failures surface through the criteria themselves
  }
  return {ks.begin(), ks.end()};
}

CriterionReport check_hypercyclic(const SelfMapRule& map, const WeightRule& rule, const SpaceSpec& space,
                                  const std::vector<uint64_t>& sample_k, const Horizons& h) {
  json header{{"criterion", "hypercyclic"}, {"space", space.to_json()}};
  return run(map, h, sample_k, header, [&](uint64_t k, SampleReport& sr) {
    LogWalk fw = log_walk(map, rule, k, false, h.orbit, h.preimage_scan);
    json crossings = json::array();
    size_t idx = 1;
    int crossed = 0;
    for (int d = 1; d <= kThresholdDecades; ++d) {
      const double target = d * std::log(10.0);
      while (idx < fw.L.size() && !(fw.L[idx] > target)) ++idx;
      if (idx >= fw.L.size()) break;
      crossings.push_back({{"threshold", std::pow(10.0, d)}, {"m", idx}});
      ++crossed;
    }
    double sup = fw.L.size() > 1 ? *std::max_element(fw.L.begin() + 1, fw.L.end()) : 0.0;
    json ev{{"crossings", crossings}, {"terms", fw.lambda.size()}, {"sup_log_product", sup},
            {"trend", fw.trend.to_json()}};
    if (fw.trend.unbounded()) sr.verdict = Verdict::exact({{"products", "unbounded"}, {"trend", fw.trend.to_json()}});
    else if (fw.trend.bounded_above())
      sr.verdict = Verdict::refuted({{"products", "bounded"}, {"sup_log_product", sup}, {"trend", fw.trend.to_json()}});
    else if (crossed == kThresholdDecades) sr.verdict = Verdict::satisfied({{"products", "thresholds crossed"}});
    else sr.verdict = Verdict::inconclusive({{"products", "thresholds not crossed"}, {"crossed", crossed}});
    ev["verdict"] = pseudoshift::to_json(sr.verdict);
    sr.forward = ev;
    sr.backward = nullptr;
  });
}

double generator_identity_error(const SelfMapRule& map, const WeightRule& rule, uint64_t k, double p,
                                uint64_t terms) {
  LogWalk base = log_walk(map, rule, k, false, terms + 3, 0);
  double worst = 0.0;
  for (size_t j = 1; j <= 3 && j < base.points.size(); ++j) {
    const Idx& kj = base.points[j];
    if (!kj.representable()) break;
    LogWalk moved = log_walk(map, rule, kj.value, false, terms, 0);
    size_t m = std::min<size_t>({terms, moved.lambda.size(), base.lambda.size() - j});
    double lhs = 0.0, rhs = 0.0;
    for (size_t n = 1; n <= m; ++n) {
      lhs += std::exp(-p * moved.L[n]);
      rhs += std::exp(-p * (base.L[n + j] - base.L[j]));
    }
    if (rhs != 0.0) worst = std::max(worst, std::fabs(lhs - rhs) / std::fabs(rhs));
  }
  return worst;
}

CriterionReport check_chaotic_lp(const SelfMapRule& map, const WeightRule& rule, double p,
                                 const std::vector<uint64_t>& sample_k, const Horizons& h) {
  SpaceSpec space = SpaceSpec::lp(p);
  json header{{"criterion", "chaotic"}, {"space", space.to_json()}};
  return run(map, h, sample_k, header, [&](uint64_t k, SampleReport& sr) {
    SeriesReport fs = forward_inverse_series(map, rule, k, p, h.series_terms);
    SeriesReport bs = backward_p_series(map, rule, k, p, h.series_terms, h.preimage_scan);
    sr.forward = fs.to_json();
    sr.backward = bs.to_json();
    if (!fs.divergent) sr.forward["generator_identity_error"] = generator_identity_error(map, rule, k, p);
    sr.verdict = combine({fs.verdict, bs.verdict});
  });
}

CriterionReport check_chaotic_c0(const SelfMapRule& map, const WeightRule& rule,
                                 const std::vector<uint64_t>& sample_k, const Horizons& h) {
  json header{{"criterion", "chaotic"}, {"space", SpaceSpec::c0().to_json()}};
  return run(map, h, sample_k, header, [&](uint64_t k, SampleReport& sr) {
    LimitReport lr = forward_product_limits(map, rule, k, h.series_terms, h.preimage_scan);
    json j = lr.to_json();
    sr.forward = {{"verdict", j["forward"]}, {"log_products", j["forward_log"]}};
    sr.backward = {{"verdict", j["backward"]}, {"log_products", j["backward_log"]}};
    sr.verdict = lr.overall();
  });
}

CriterionReport check_chaotic(const SelfMapRule& map, const WeightRule& rule, const SpaceSpec& space,
                              const std::vector<uint64_t>& sample_k, const Horizons& h) {
  if (space.kind == SpaceSpec::Kind::C0) return check_chaotic_c0(map, rule, sample_k, h);
  return check_chaotic_lp(map, rule, space.p, sample_k, h);
}

}  // namespace pseudoshift
