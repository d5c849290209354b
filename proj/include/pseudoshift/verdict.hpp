#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace pseudoshift {

using json = nlohmann::json;

enum class VerdictKind { Refuted, SatisfiedAtHorizon, ExactTailBound, Inconclusive };

struct Verdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  json evidence = json::object();

  static Verdict refuted(json ev) { return {VerdictKind::Refuted, std::move(ev)}; }
  static Verdict satisfied(json ev) { return {VerdictKind::SatisfiedAtHorizon, std::move(ev)}; }
  static Verdict exact(json ev) { return {VerdictKind::ExactTailBound, std::move(ev)}; }
  static Verdict inconclusive(json ev) { return {VerdictKind::Inconclusive, std::move(ev)}; }

  bool is(VerdictKind k) const { return kind == k; }
  // Satisfied or exact.
  bool positive() const {
    return kind == VerdictKind::SatisfiedAtHorizon || kind == VerdictKind::ExactTailBound;
  }
};

const char* to_string(VerdictKind k);
VerdictKind verdict_kind_from_string(const std::string& s);

// Refuted dominates; otherwise the weakest of Inconclusive < Satisfied < Exact.
Verdict combine(const std::vector<Verdict>& parts, json evidence = json::object());

// 0 satisfied/exact, 1 refuted, 2 inconclusive.
int exit_code(const Verdict& v);

json to_json(const Verdict& v);

}  // namespace pseudoshift
