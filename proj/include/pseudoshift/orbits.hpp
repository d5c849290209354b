#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pseudoshift/selfmap.hpp"
#include "pseudoshift/verdict.hpp"

namespace pseudoshift {

// Truncated phi^n bi-orbit of base.
struct OrbitSlice {
  uint64_t base = 0, stride = 1;
  std::vector<uint64_t> forward;   // phi^{in}(base), i = 1..
  std::vector<uint64_t> backward;  // phi^{-in}(base), i = 1..
  bool generator_found = false;    // backward walk ended at the sentinel
  std::string forward_end;         // "length" | "overflow"
  std::string backward_end;        // "sentinel" | "horizon" | "scan" | "overflow"

  uint64_t min() const;
  json to_json() const;
};

// Backward walk stops at the sentinel or when an index exceeds horizon (also the
// preimage scan bound for maps without a lattice).
OrbitSlice bi_orbit(const SelfMapRule& map, uint64_t k, uint64_t n, uint64_t fwd_len, uint64_t horizon);

struct GeneratorResult {
  uint64_t g = 0;
  bool exact = false;
};

// Exact when both directions of the phi-orbit are certified: the backward walk
// reaches the sentinel or escapes, and the forward walk escapes.
GeneratorResult generator(const SelfMapRule& map, uint64_t k, uint64_t n, uint64_t horizon);

struct GeneratorSet {
  std::map<uint64_t, bool> members;  // generator -> exact

  std::set<uint64_t> values() const;
  bool exact() const;
  json to_json() const;
};

GeneratorSet generator_set(const SelfMapRule& map, uint64_t n, uint64_t cover, uint64_t horizon);

struct OrbitGroup {
  uint64_t generator = 0;
  bool exact = false;
  std::vector<uint64_t> members;  // sorted
};

// Groups 1..cover by generator, then walks each generator's orbit and throws
// PartitionViolation if it meets an index assigned elsewhere.
std::vector<OrbitGroup> partition(const SelfMapRule& map, uint64_t n, uint64_t cover, uint64_t horizon);
json to_json(const std::vector<OrbitGroup>& groups);

// Window of the phi-orbit of k against the union of the stride-n orbits of
// phi^i(k), i < n, each walked independently.
bool orbit_refinement_check(const SelfMapRule& map, uint64_t k, uint64_t n, uint64_t sample_len,
                            uint64_t horizon);

enum class EscapeStatus { Hit, Clear, ClearAtHorizon };

struct EscapeReport {
  uint64_t N = 0;
  std::vector<EscapeStatus> status;  // status[n-1]
  bool uniform = false;  // certified for every n > N, not only n <= n_max
  Verdict verdict;
  json to_json() const;
};

// Least N <= n_max with B_{n,k} disjoint from F for N < n <= n_max.
EscapeReport escape_threshold(const SelfMapRule& map, uint64_t k, const std::set<uint64_t>& F,
                              uint64_t n_max, uint64_t horizon);

// Graphviz chain k -> phi(k) -> ... with length edges, plus the backward chain.
std::string orbit_dot(const SelfMapRule& map, uint64_t k, uint64_t length, uint64_t horizon);

}  // namespace pseudoshift
