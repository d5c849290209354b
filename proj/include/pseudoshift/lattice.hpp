#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "pseudoshift/rules.hpp"

namespace pseudoshift {

class SelfMapRule;

enum class LatticeKind { Arithmetic, Prime };

// Past a threshold the map is a translation whose amount depends only on a residue
// class: of n itself (arithmetic) or of the position j in n = P_i(j) (prime), per
// family class. Walks inside that region can be certified to escape.
class Lattice {
 public:
  // extra: guards of a companion rule (weights) that must also be decided by the
  // residue state; floor: extra lower bound on the threshold.
  static std::optional<Lattice> build(const SelfMapRule& map, const std::vector<Guard>& extra = {},
                                      uint64_t floor = 0);

  LatticeKind kind() const { return kind_; }
  uint64_t modulus() const { return modulus_; }
  uint64_t threshold() const { return threshold_; }
  uint64_t back_threshold() const { return back_threshold_; }

  uint64_t coord(const Idx& i) const;
  uint64_t class_of(const Idx& i) const;
  uint64_t state(const Idx& i) const { return class_of(i) * modulus_ + coord(i) % modulus_; }
  Idx at(const Idx& like, uint64_t coord) const;

  std::vector<Idx> preimages(const Idx& m) const;

  // Proven over all of N (not just a horizon).
  bool injective() const { return injective_; }
  bool aperiodic() const { return aperiodic_; }

 private:
  int64_t shift(uint64_t cls, uint64_t c) const;
  std::vector<uint64_t> coord_preimages(uint64_t cls, uint64_t c) const;
  void analyse();

  LatticeKind kind_ = LatticeKind::Arithmetic;
  uint64_t modulus_ = 1, threshold_ = 1, back_threshold_ = 1;
  std::vector<uint64_t> named_;                        // prime families with their own clauses
  std::vector<std::vector<int64_t>> region_shift_;     // [class][coord mod M]
  std::vector<std::vector<uint64_t>> small_image_;     // [class][coord], coord < threshold
  std::vector<std::unordered_multimap<uint64_t, uint64_t>> small_pre_;
  std::vector<int64_t> distinct_shifts_;
  bool injective_ = false, aperiodic_ = false;
};

struct EscapeCycle {
  size_t onset = 0;   // walk index where the repeating block starts
  size_t length = 0;  // block length in steps
  int64_t displacement = 0;  // coordinate gain per block, > 0
};

// Feeds walk points in order; reports a block that provably repeats with a
// positive coordinate gain from then on.
class EscapeDetector {
 public:
  EscapeDetector(const Lattice& lat, bool backward) : lat_(lat), backward_(backward) {}
  std::optional<EscapeCycle> feed(const Idx& i);

 private:
  const Lattice& lat_;
  bool backward_;
  std::vector<uint64_t> coords_;
  std::unordered_map<uint64_t, size_t> seen_;
};

struct Walk {
  std::vector<Idx> points;  // points[0] is the start
  std::optional<EscapeCycle> cycle;
  bool sentinel = false;  // backward walk ended at a point with no preimage
  bool certain = true;    // false when a preimage scan may be incomplete
  bool overflow = false;  // stopped because an index left the representable range
};

// Walks stop at max_steps, or once a cycle is certified and `after` further steps
// past its first block have been taken. lat may be null (no certificates).
Walk walk_forward(const SelfMapRule& map, const Lattice* lat, const Idx& start, size_t max_steps,
                  size_t after = 0);
Walk walk_backward(const SelfMapRule& map, const Lattice* lat, const Idx& start, size_t max_steps,
                   uint64_t scan_horizon, size_t after = 0);

}  // namespace pseudoshift
