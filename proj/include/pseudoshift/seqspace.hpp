#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pseudoshift/errors.hpp"
#include "pseudoshift/scalar.hpp"
#include "pseudoshift/selfmap.hpp"
#include "pseudoshift/weights.hpp"

namespace pseudoshift {

struct SpaceSpec {
  enum class Kind { Lp, C0 };
  Kind kind = Kind::Lp;
  double p = 2.0;

  static SpaceSpec lp(double p);
  static SpaceSpec c0() { return {Kind::C0, 0.0}; }
  static SpaceSpec from_json(const json& j);
  json to_json() const;
  std::string name() const;
};

// Finitely supported sequence on N (1-based); zeros are never stored.
template <class S>
class FinSeq {
 public:
  FinSeq() = default;
  static FinSeq unit(uint64_t k, S v = S(1)) {
    FinSeq x;
    x.set(k, v);
    return x;
  }

  void set(uint64_t k, const S& v) {
    if (k == 0) throw Error("FinSeq index 0 is reserved for the sentinel");
    if (is_zero(v)) entries_.erase(k);
    else entries_[k] = v;
  }
  void add(uint64_t k, const S& v) { set(k, get(k) + v); }
  S get(uint64_t k) const {
    auto it = entries_.find(k);
    return it == entries_.end() ? S(0) : it->second;
  }

  const std::map<uint64_t, S>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  size_t size() const { return entries_.size(); }
  std::vector<uint64_t> support() const {
    std::vector<uint64_t> s;
    for (const auto& e : entries_) s.push_back(e.first);
    return s;
  }
  uint64_t max_index() const { return entries_.empty() ? 0 : entries_.rbegin()->first; }

  FinSeq& operator+=(const FinSeq& o) {
    for (const auto& [k, v] : o.entries_) add(k, v);
    return *this;
  }
  FinSeq& operator-=(const FinSeq& o) {
    for (const auto& [k, v] : o.entries_) add(k, -v);
    return *this;
  }
  FinSeq& operator*=(const S& c) {
    if (is_zero(c)) entries_.clear();
    for (auto& e : entries_) e.second *= c;
    return *this;
  }
  friend FinSeq operator+(FinSeq a, const FinSeq& b) { return a += b; }
  friend FinSeq operator-(FinSeq a, const FinSeq& b) { return a -= b; }
  friend FinSeq operator*(const S& c, FinSeq a) { return a *= c; }
  bool operator==(const FinSeq& o) const { return entries_ == o.entries_; }

  static FinSeq from_json(const json& j) {
    if (!j.is_object() || !j.contains("entries") || !j.at("entries").is_object())
      throw ConfigError("vector must look like {\"entries\": {\"index\": value}}");
    FinSeq x;
    for (const auto& [key, v] : j.at("entries").items()) {
      uint64_t k = 0;
      try {
        k = std::stoull(key);
      } catch (...) {
        throw ConfigError("vector index is not a positive integer: " + key);
      }
      if (k == 0) throw ConfigError("vector index 0 is reserved for the sentinel");
      x.set(k, scalar_from_json<S>(v));
    }
    return x;
  }
  json to_json() const {
    json e = json::object();
    for (const auto& [k, v] : entries_) e[std::to_string(k)] = scalar_to_json(v);
    return json{{"entries", e}};
  }

 private:
  std::map<uint64_t, S> entries_;
};

template <class S>
double norm(const FinSeq<S>& x, const SpaceSpec& space) {
  double m = 0.0;
  for (const auto& e : x.entries()) m = std::max(m, abs_double(e.second));
  if (space.kind == SpaceSpec::Kind::C0 || m == 0.0) return m;
  double acc = 0.0;
  for (const auto& e : x.entries()) acc += std::pow(abs_double(e.second) / m, space.p);
  return m * std::pow(acc, 1.0 / space.p);
}

// W_n(k) in the scalar type: via logs for doubles, exactly for rationals.
template <class S>
S product_scalar(const SelfMapRule& map, const WeightRule& rule, uint64_t k, uint64_t n) {
  if constexpr (std::is_same_v<S, double>) return forward_product(map, rule, k, n).value();
  else return forward_product_value<S>(map, rule, k, n);
}

// All l with phi^n(l) = s.
std::vector<uint64_t> preimage_set(const SelfMapRule& map, uint64_t s, uint64_t n, uint64_t horizon);

// ((w C_phi)^n x)_k = W_n(k) x_{phi^n(k)}
template <class S>
FinSeq<S> apply_operator(const SelfMapRule& map, const WeightRule& rule, const FinSeq<S>& x, uint64_t n,
                         uint64_t horizon = 1'000'000) {
  if (n == 0) return x;
  FinSeq<S> y;
  for (const auto& [s, v] : x.entries())
    for (uint64_t l : preimage_set(map, s, n, horizon)) y.add(l, product_scalar<S>(map, rule, l, n) * v);
  return y;
}

// S^n with S e_k = e_{phi(k)} / w_k
template <class S>
FinSeq<S> s_map(const SelfMapRule& map, const WeightRule& rule, const FinSeq<S>& x, uint64_t n) {
  if (n == 0) return x;
  FinSeq<S> y;
  for (const auto& [k, v] : x.entries()) y.add(iterate(map, k, n), v / product_scalar<S>(map, rule, k, n));
  return y;
}

}  // namespace pseudoshift
