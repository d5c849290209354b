#include "pseudoshift/scalar.hpp"

#include <limits>

#include "pseudoshift/errors.hpp"

namespace pseudoshift {

mpq_class parse_rational(const json& j) {
  if (j.is_number_integer()) {
    mpq_class q;
    if (j.is_number_unsigned()) q = mpz_class(std::to_string(j.get<uint64_t>()));
    else q = mpz_class(std::to_string(j.get<int64_t>()));
    return q;
  }
  if (j.is_number_float()) {
    double d = j.get<double>();
    if (!std::isfinite(d)) throw MalformedRule("non-finite scalar");
    return mpq_class(d);
  }
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw MalformedRule("bad rational literal: " + s);
    if (q.get_den() == 0) throw MalformedRule("zero denominator: " + s);
    q.canonicalize();
    return q;
  }
  throw MalformedRule("scalar must be a number or an \"a/b\" string");
}

json rational_to_json(const mpq_class& q) {
  if (q.get_den() == 1 && q.get_num().fits_slong_p()) return static_cast<int64_t>(q.get_num().get_si());
  return q.get_str();
}

static double log_abs_z(const mpz_class& z) {
  long e = 0;
  double m = mpz_get_d_2exp(&e, z.get_mpz_t());
  return std::log(std::fabs(m)) + static_cast<double>(e) * std::log(2.0);
}

double log_abs(const mpq_class& q) {
  if (sgn(q) == 0) return -std::numeric_limits<double>::infinity();
  return log_abs_z(q.get_num()) - log_abs_z(q.get_den());
}

mpq_class pow_rational(const mpq_class& base, int64_t exponent) {
  uint64_t e = exponent < 0 ? static_cast<uint64_t>(-exponent) : static_cast<uint64_t>(exponent);
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num().get_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), base.get_den().get_mpz_t(), e);
  mpq_class r = exponent < 0 ? mpq_class(den, num) : mpq_class(num, den);
  r.canonicalize();
  return r;
}

}  // namespace pseudoshift
