#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pseudoshift {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedRule : Error {
  using Error::Error;
};

// Index or position fell outside what the prime cache / 64-bit range can represent.
struct HorizonExceeded : Error {
  using Error::Error;
};

struct PreimageHorizonExceeded : Error {
  using Error::Error;
};

struct NotInjectiveWitness : Error {
  uint64_t first, second;
  NotInjectiveWitness(uint64_t a, uint64_t b)
      : Error("map is not injective: phi(" + std::to_string(a) + ") = phi(" + std::to_string(b) + ")"),
        first(a), second(b) {}
};

struct PeriodicOrbitDetected : Error {
  uint64_t point, period;
  PeriodicOrbitDetected(uint64_t k, uint64_t n)
      : Error("periodic orbit through " + std::to_string(k) + " with period " + std::to_string(n)),
        point(k), period(n) {}
};

struct PartitionViolation : Error {
  using Error::Error;
};

struct NonDecayingTail : Error {
  using Error::Error;
};

struct EscapeNotFound : Error {
  using Error::Error;
};

struct BudgetExceeded : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace pseudoshift
