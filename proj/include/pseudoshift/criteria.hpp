#pragma once

#include <cstdint>
#include <vector>

#include "pseudoshift/selfmap.hpp"
#include "pseudoshift/seqspace.hpp"
#include "pseudoshift/verdict.hpp"
#include "pseudoshift/weights.hpp"

namespace pseudoshift {

struct Horizons {
  uint64_t orbit = 1000;          // forward product walk length
  uint64_t series_terms = 2000;   // explicit series terms
  uint64_t preimage_scan = 100000;
  uint64_t structural = 10000;    // injectivity / periodic-point scan

  static Horizons from_json(const json& j, Horizons base);
  static Horizons from_json(const json& j);
  json to_json() const;
};

struct SampleReport {
  uint64_t k = 0;
  json forward, backward;
  Verdict verdict;
};

struct CriterionReport {
  Verdict injective, periodic;
  std::vector<SampleReport> samples;
  Verdict overall;
  json to_json() const;
};

// Exact generators of phi within cover, plus 1..10.
std::vector<uint64_t> default_sample(const SelfMapRule& map, const Horizons& h, uint64_t cover = 1000);

CriterionReport check_hypercyclic(const SelfMapRule& map, const WeightRule& rule, const SpaceSpec& space,
                                  const std::vector<uint64_t>& sample_k, const Horizons& h);
CriterionReport check_chaotic_lp(const SelfMapRule& map, const WeightRule& rule, double p,
                                 const std::vector<uint64_t>& sample_k, const Horizons& h);
CriterionReport check_chaotic_c0(const SelfMapRule& map, const WeightRule& rule,
                                 const std::vector<uint64_t>& sample_k, const Horizons& h);
CriterionReport check_chaotic(const SelfMapRule& map, const WeightRule& rule, const SpaceSpec& space,
                              const std::vector<uint64_t>& sample_k, const Horizons& h);

// Forward series of phi^j(k) against |W_j(k)|^p times the shifted series of k,
// j = 1..3, over `terms` explicit terms. Returns the worst relative error.
double generator_identity_error(const SelfMapRule& map, const WeightRule& rule, uint64_t k, double p,
                                uint64_t terms = 50);

}  // namespace pseudoshift
