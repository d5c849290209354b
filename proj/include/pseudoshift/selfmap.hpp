#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "pseudoshift/rules.hpp"
#include "pseudoshift/verdict.hpp"

namespace pseudoshift {

struct AffineExpr {
  int64_t a = 1, b = 0;
};
struct ValueExpr {
  uint64_t v = 1;
};
// P_i(j) -> P_i(j + delta)
struct PrimeShiftExpr {
  int64_t delta = 1;
};
using MapExpr = std::variant<AffineExpr, ValueExpr, PrimeShiftExpr>;

struct MapClause {
  Guard guard;
  MapExpr expr;
};

class Lattice;

class SelfMapRule {
 public:
  SelfMapRule(std::vector<MapClause> clauses, MapExpr fallback);

  static SelfMapRule from_json(const json& j);
  static SelfMapRule successor();
  json to_json() const;

  const std::vector<MapClause>& clauses() const { return clauses_; }
  const MapExpr& fallback() const { return fallback_; }
  const MapExpr& expr_for(const Idx& i) const;

  uint64_t apply(uint64_t n) const;
  Idx apply(const Idx& i) const;

  // Symbolic structure when the rule is a residue-class translation system
  // (or one on prime-power positions); null otherwise.
  const Lattice* lattice() const { return lattice_.get(); }

 private:
  std::vector<MapClause> clauses_;
  MapExpr fallback_;
  std::shared_ptr<const Lattice> lattice_;
};

struct IterationResult {
  uint64_t value = 0;
  uint64_t steps_taken = 0;
  bool hit_sentinel = false;
  bool certain = true;  // false when a preimage scan stopped at its horizon
};

struct PreimageResult {
  uint64_t value = 0;  // 0: no preimage
  bool certain = true;
};

uint64_t apply(const SelfMapRule& map, uint64_t n);
uint64_t iterate(const SelfMapRule& map, uint64_t n, uint64_t j);

// All l with phi(l) = k. Symbolic when the rule has a lattice, else a scan of 1..horizon.
std::vector<Idx> preimages(const SelfMapRule& map, const Idx& k, uint64_t horizon, bool* certain = nullptr);

PreimageResult preimage(const SelfMapRule& map, uint64_t k, uint64_t horizon);
IterationResult backward_iterate(const SelfMapRule& map, uint64_t k, uint64_t j, uint64_t horizon);

Verdict check_injective(const SelfMapRule& map, uint64_t horizon);

std::optional<std::pair<uint64_t, uint64_t>> find_periodic_point(const SelfMapRule& map, uint64_t max_period,
                                                                 uint64_t max_start);
// Refuted with the smallest periodic point found, exact when the lattice rules them out.
Verdict check_periodic_points(const SelfMapRule& map, uint64_t max_period, uint64_t max_start);

}  // namespace pseudoshift
