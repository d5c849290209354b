#include "pseudoshift/verdict.hpp"

#include "pseudoshift/errors.hpp"

namespace pseudoshift {

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Refuted: return "Refuted";
    case VerdictKind::SatisfiedAtHorizon: return "SatisfiedAtHorizon";
    case VerdictKind::ExactTailBound: return "ExactTailBound";
    case VerdictKind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

VerdictKind verdict_kind_from_string(const std::string& s) {
  if (s == "Refuted") return VerdictKind::Refuted;
  if (s == "SatisfiedAtHorizon") return VerdictKind::SatisfiedAtHorizon;
  if (s == "ExactTailBound") return VerdictKind::ExactTailBound;
  if (s == "Inconclusive") return VerdictKind::Inconclusive;
  throw ConfigError("unknown verdict kind: " + s);
}

static int strength(VerdictKind k) {
  switch (k) {
    case VerdictKind::Inconclusive: return 0;
    case VerdictKind::SatisfiedAtHorizon: return 1;
    case VerdictKind::ExactTailBound: return 2;
    default: return -1;
  }
}

Verdict combine(const std::vector<Verdict>& parts, json evidence) {
  VerdictKind out = VerdictKind::ExactTailBound;
  bool any = false;
  for (const auto& p : parts) {
    if (p.kind == VerdictKind::Refuted) return Verdict::refuted(std::move(evidence));
    if (!any || strength(p.kind) < strength(out)) out = p.kind;
    any = true;
  }
  if (!any) out = VerdictKind::Inconclusive;
  return {out, std::move(evidence)};
}

int exit_code(const Verdict& v) {
  switch (v.kind) {
    case VerdictKind::SatisfiedAtHorizon:
    case VerdictKind::ExactTailBound: return 0;
    case VerdictKind::Refuted: return 1;
    default: return 2;
  }
}

json to_json(const Verdict& v) { return json{{"kind", to_string(v.kind)}, {"evidence", v.evidence}}; }

}  // namespace pseudoshift
