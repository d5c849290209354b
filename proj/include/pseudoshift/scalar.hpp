#pragma once

#include <cmath>
#include <string>

#include <gmpxx.h>
#include <json.hpp>

namespace pseudoshift {

using json = nlohmann::json;

// Integers and "a/b" strings are exact; JSON doubles are taken at their exact binary value.
mpq_class parse_rational(const json& j);
json rational_to_json(const mpq_class& q);

// log|q|, accurate for numbers far outside double range. -inf for 0.
double log_abs(const mpq_class& q);
mpq_class pow_rational(const mpq_class& base, int64_t exponent);

inline double to_double(double x) { return x; }
inline double to_double(const mpq_class& q) { return q.get_d(); }
inline double abs_double(double x) { return std::fabs(x); }
inline double abs_double(const mpq_class& q) { return std::fabs(q.get_d()); }
inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const mpq_class& q) { return sgn(q) == 0; }

template <class S>
S from_rational(const mpq_class& q) {
  if constexpr (std::is_same_v<S, double>) return q.get_d();
  else return q;
}

// Inverse of from_double for JSON output.
inline json scalar_to_json(double x) { return x; }
inline json scalar_to_json(const mpq_class& q) { return rational_to_json(q); }

template <class S>
S scalar_from_json(const json& j) {
  return from_rational<S>(parse_rational(j));
}

}  // namespace pseudoshift
