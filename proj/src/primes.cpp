#include "pseudoshift/primes.hpp"

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <string>

#include "pseudoshift/errors.hpp"

namespace pseudoshift {

PrimeTable::PrimeTable(uint64_t bound) : bound_(bound < 16 ? 16 : bound) {
  spf_.assign(bound_ + 1, 0);
  prime_index_.assign(bound_ + 1, 0);
  for (uint64_t i = 2; i <= bound_; ++i) {
    if (spf_[i] == 0) {
      primes_.push_back(static_cast<uint32_t>(i));
      prime_index_[i] = static_cast<uint32_t>(primes_.size());
      for (uint64_t j = i; j <= bound_; j += i)
        if (spf_[j] == 0) spf_[j] = static_cast<uint32_t>(i);
    }
  }
  p0_pos_.assign(bound_ + 1, 0);
  p0_.push_back(1);
  p0_pos_[1] = 1;
  for (uint64_t n = 2; n <= bound_; ++n) {
    uint64_t p = spf_[n], m = n;
    while (m % p == 0) m /= p;
    if (m != 1) {
      p0_.push_back(static_cast<uint32_t>(n));
      p0_pos_[n] = static_cast<uint32_t>(p0_.size());
    }
  }
}

const PrimeTable& PrimeTable::shared() {
  static std::once_flag once;
  static const PrimeTable* table = nullptr;
  std::call_once(once, [] {
    uint64_t bound = uint64_t{1} << 20;
    if (const char* env = std::getenv("PSEUDOSHIFT_PRIME_CACHE")) {
      try {
        bound = std::stoull(env);
      } catch (...) {
      }
    }
    table = new PrimeTable(bound);
  });
  return *table;
}

std::optional<uint64_t> PrimeTable::prime(uint64_t i) const {
  if (i == 0 || i > primes_.size()) return std::nullopt;
  return primes_[i - 1];
}

std::optional<PrimePos> PrimeTable::locate(uint64_t n) const {
  if (n == 0) return std::nullopt;
  if (n == 1) return PrimePos{0, 1};
  if (n <= bound_) {
    uint64_t p = spf_[n], m = n, e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    if (m == 1) return PrimePos{prime_index_[p], e};
    return PrimePos{0, p0_pos_[n]};
  }
  // past the sieve: only prime powers of cached primes can be placed
  for (uint32_t p : primes_) {
    uint64_t pp = p;
    if (pp * pp > n) return std::nullopt;
    if (n % pp) continue;
    uint64_t m = n, e = 0;
    while (m % pp == 0) {
      m /= pp;
      ++e;
    }
    if (m == 1) return PrimePos{prime_index_[p], e};
    return std::nullopt;
  }
  return std::nullopt;
}

std::optional<uint64_t> PrimeTable::element(uint64_t family, uint64_t pos) const {
  if (pos == 0) return std::nullopt;
  if (family == 0) {
    if (pos > p0_.size()) return std::nullopt;
    return p0_[pos - 1];
  }
  auto p = prime(family);
  if (!p) return std::nullopt;
  uint64_t v = 1;
  for (uint64_t j = 0; j < pos; ++j)
    if (__builtin_mul_overflow(v, *p, &v)) return std::nullopt;
  return v;
}

double PrimeTable::log_element(uint64_t family, uint64_t pos) const {
  if (family == 0) {
    auto v = element(0, pos);
    if (!v) throw HorizonExceeded("P_0 position " + std::to_string(pos) + " beyond prime cache");
    return std::log(static_cast<double>(*v));
  }
  auto p = prime(family);
  if (!p) throw HorizonExceeded("prime family " + std::to_string(family) + " beyond prime cache");
  return static_cast<double>(pos) * std::log(static_cast<double>(*p));
}

uint64_t PrimeTable::element_mod(uint64_t family, uint64_t pos, uint64_t m) const {
  if (family == 0) {
    auto v = element(0, pos);
    if (!v) throw HorizonExceeded("P_0 position " + std::to_string(pos) + " beyond prime cache");
    return *v % m;
  }
  auto p = prime(family);
  if (!p) throw HorizonExceeded("prime family " + std::to_string(family) + " beyond prime cache");
  unsigned __int128 r = 1 % m, b = *p % m;
  for (uint64_t e = pos; e; e >>= 1) {
    if (e & 1) r = r * b % m;
    b = b * b % m;
  }
  return static_cast<uint64_t>(r);
}

}  // namespace pseudoshift
