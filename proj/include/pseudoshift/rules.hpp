#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace pseudoshift {

using json = nlohmann::json;

struct SetGuard {
  std::vector<uint64_t> members;  // sorted, unique
};

// n = rem (mod mod), n >= min
struct ResidueGuard {
  uint64_t mod = 1, rem = 0, min = 1;
};

// n = P_i(j) with j = pos_rem (mod pos_mod), j >= pos_min; family unset means any i >= 0
struct PrimePosGuard {
  std::optional<uint64_t> family;
  uint64_t pos_mod = 1, pos_rem = 0, pos_min = 1;
};

using Guard = std::variant<SetGuard, ResidueGuard, PrimePosGuard>;

// An element of N. Prime-power maps carry (family, pos) and may outgrow 64 bits,
// in which case value is 0.
struct Idx {
  uint64_t value = 0;
  bool located = false;
  uint64_t family = 0, pos = 0;

  static Idx of(uint64_t n) { return Idx{n}; }
  bool representable() const { return value != 0; }
  bool operator==(const Idx& o) const {
    if (located && o.located) return family == o.family && pos == o.pos;
    return value == o.value && value != 0;
  }
};

// Ordering key that stays valid past 64 bits.
inline std::pair<uint64_t, uint64_t> idx_key(const Idx& i) {
  if (i.value) return {0, i.value};
  return {i.family + 1, i.pos};
}

// Fills family/pos. Throws HorizonExceeded past the prime cache.
Idx located(const Idx& i);
uint64_t value_mod(const Idx& i, uint64_t m);
double log_value(const Idx& i);

bool matches(const Guard& g, const Idx& i);
inline bool matches(const Guard& g, uint64_t n) { return matches(g, Idx::of(n)); }

Guard guard_from_json(const json& j);
json to_json(const Guard& g);

// Integer-valued JSON field with a readable error.
int64_t json_int(const json& j, const char* field);
uint64_t json_uint(const json& j, const char* field, uint64_t min_value = 0);

}  // namespace pseudoshift
