#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace pseudoshift {

// P_0 lists N minus all prime powers (1 first); P_i(j) = p_i^j for i >= 1.
struct PrimePos {
  uint64_t family;
  uint64_t pos;
};

class PrimeTable {
 public:
  explicit PrimeTable(uint64_t bound);

  // Shared table; bound read once from PSEUDOSHIFT_PRIME_CACHE (default 2^20).
  static const PrimeTable& shared();

  uint64_t bound() const { return bound_; }
  uint64_t prime_count() const { return primes_.size(); }

  // i-th prime, 1-based. nullopt past the cache.
  std::optional<uint64_t> prime(uint64_t i) const;
  std::optional<PrimePos> locate(uint64_t n) const;
  // P_family(pos); nullopt on 64-bit overflow or when P_0 runs past the cache.
  std::optional<uint64_t> element(uint64_t family, uint64_t pos) const;
  // log P_family(pos), valid even when the value overflows.
  double log_element(uint64_t family, uint64_t pos) const;
  // P_family(pos) mod m without materialising the value.
  uint64_t element_mod(uint64_t family, uint64_t pos, uint64_t m) const;

 private:
  uint64_t bound_;
  std::vector<uint32_t> spf_;        // smallest prime factor
  std::vector<uint32_t> primes_;
  std::vector<uint32_t> prime_index_; // index of prime p at spf_ slot p, 0 otherwise
  std::vector<uint32_t> p0_;          // P_0 elements in order
  std::vector<uint32_t> p0_pos_;      // position of n in P_0, 0 if n is a prime power
};

}  // namespace pseudoshift
