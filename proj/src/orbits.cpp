#include "pseudoshift/orbits.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "pseudoshift/errors.hpp"
#include "pseudoshift/lattice.hpp"

namespace pseudoshift {

namespace {

constexpr size_t kCertCap = 200000;
constexpr uint64_t kPlainForward = 1000;

using Key = std::pair<uint64_t, uint64_t>;

void require_positive(uint64_t k, uint64_t n) {
  if (k == 0) throw std::invalid_argument("index must be >= 1");
  if (n == 0) throw std::invalid_argument("stride must be >= 1");
}

Idx start_of(const SelfMapRule& map, uint64_t k) {
  const Lattice* lat = map.lattice();
  if (lat && lat->kind() == LatticeKind::Prime) return located(Idx::of(k));
  return Idx::of(k);
}

std::optional<Idx> step_forward(const SelfMapRule& map, const Idx& cur) {
  try {
    Idx nx = map.apply(cur);
    if (!nx.value && !nx.located) return std::nullopt;
    return nx;
  } catch (const HorizonExceeded&) {
    return std::nullopt;
  }
}

enum class BackStop { None, Sentinel, Scan, Overflow };

std::optional<Idx> step_backward(const SelfMapRule& map, const Idx& cur, uint64_t horizon, BackStop& stop) {
  bool certain = true;
  std::vector<Idx> pre;
  try {
    pre = preimages(map, cur, horizon, &certain);
  } catch (const HorizonExceeded&) {
    stop = BackStop::Overflow;
    return std::nullopt;
  }
  if (pre.size() > 1) throw NotInjectiveWitness(pre[0].value, pre[1].value);
  if (pre.empty()) {
    stop = certain ? BackStop::Sentinel : BackStop::Scan;
    return std::nullopt;
  }
  return pre[0];
}

// Bound on walk indices past which the walk provably never returns below the
// smallest index it has already shown: the first multiple-of-n index t with
// t >= onset + lcm(n, L) maps onto t - lcm plus a positive gain.
std::optional<size_t> certified_limit(const Walk& w, uint64_t n) {
  if (!w.cycle) return std::nullopt;
  uint64_t lc = std::lcm<uint64_t>(n, w.cycle->length);
  if (lc > kCertCap) return std::nullopt;
  return w.cycle->onset + lc;
}

// Minimum key over multiple-of-n indices below limit.
Key stride_min(const Walk& w, uint64_t n, size_t limit, Key best) {
  for (size_t t = 0; t < w.points.size() && t < limit; t += n) best = std::min(best, idx_key(w.points[t]));
  return best;
}

std::pair<Walk, std::optional<size_t>> certified_walk(const SelfMapRule& map, const Lattice& lat, const Idx& start,
                                                     bool backward, uint64_t n, uint64_t horizon) {
  auto run = [&](size_t after) {
    return backward ? walk_backward(map, &lat, start, kCertCap, horizon, after)
                    : walk_forward(map, &lat, start, kCertCap, after);
  };
  Walk w = run(0);
  if (backward && w.sentinel) return {std::move(w), w.points.size()};
  auto limit = certified_limit(w, n);
  if (!limit) return {std::move(w), std::nullopt};
  if (w.points.size() <= *limit) {
    w = run(*limit - w.cycle->onset - w.cycle->length);
    if (w.points.size() <= *limit) return {std::move(w), std::nullopt};
  }
  return {std::move(w), limit};
}

}  // namespace

uint64_t OrbitSlice::min() const {
  uint64_t m = base;
  for (uint64_t v : forward) m = std::min(m, v);
  for (uint64_t v : backward) m = std::min(m, v);
  return m;
}

json OrbitSlice::to_json() const {
  return json{{"base", base},
              {"stride", stride},
              {"forward", forward},
              {"backward", backward},
              {"generator_found", generator_found},
              {"forward_end", forward_end},
              {"backward_end", backward_end}};
}

OrbitSlice bi_orbit(const SelfMapRule& map, uint64_t k, uint64_t n, uint64_t fwd_len, uint64_t horizon) {
  require_positive(k, n);
  OrbitSlice s;
  s.base = k;
  s.stride = n;
  Idx start = start_of(map, k);
  // signed step of every visited index, to report the period on a repeat
  std::map<Key, int64_t> seen{{idx_key(start), 0}};
  auto visit = [&](const Idx& i, int64_t step) {
    auto [it, fresh] = seen.emplace(idx_key(i), step);
    if (!fresh) throw PeriodicOrbitDetected(i.value, static_cast<uint64_t>(std::llabs(step - it->second)));
  };

  s.forward_end = "length";
  Idx cur = start;
  int64_t step = 0;
  for (uint64_t i = 0; i < fwd_len && s.forward_end == "length"; ++i) {
    for (uint64_t r = 0; r < n; ++r) {
      auto nx = step_forward(map, cur);
      if (!nx) {
        s.forward_end = "overflow";
        break;
      }
      cur = *nx;
      visit(cur, ++step);
    }
    if (s.forward_end != "length") break;
    if (!cur.representable()) {
      s.forward_end = "overflow";
      break;
    }
    s.forward.push_back(cur.value);
  }

  cur = start;
  step = 0;
  for (;;) {
    BackStop stop = BackStop::None;
    auto pre = step_backward(map, cur, horizon, stop);
    if (!pre) {
      s.backward_end = stop == BackStop::Sentinel ? "sentinel" : stop == BackStop::Scan ? "scan" : "overflow";
      s.generator_found = stop == BackStop::Sentinel;
      break;
    }
    if (!pre->representable() || pre->value > horizon) {
      s.backward_end = "horizon";
      break;
    }
    cur = *pre;
    visit(cur, --step);
    if (static_cast<uint64_t>(-step) % n == 0) s.backward.push_back(cur.value);
  }
  return s;
}

GeneratorResult generator(const SelfMapRule& map, uint64_t k, uint64_t n, uint64_t horizon) {
  require_positive(k, n);
  const Lattice* lat = map.lattice();
  if (!lat) {
    OrbitSlice s = bi_orbit(map, k, n, kPlainForward, horizon);
    return {s.min(), false};
  }
  Idx start = start_of(map, k);
  auto [fw, f_limit] = certified_walk(map, *lat, start, false, n, horizon);
  auto [bw, b_limit] = certified_walk(map, *lat, start, true, n, horizon);
  Key best = idx_key(start);
  best = stride_min(fw, n, f_limit.value_or(fw.points.size()), best);
  best = stride_min(bw, n, b_limit.value_or(bw.points.size()), best);
  return {best.second, f_limit.has_value() && b_limit.has_value()};
}

std::set<uint64_t> GeneratorSet::values() const {
  std::set<uint64_t> out;
  for (const auto& [g, e] : members) out.insert(g);
  return out;
}

bool GeneratorSet::exact() const {
  return std::all_of(members.begin(), members.end(), [](const auto& m) { return m.second; });
}

json GeneratorSet::to_json() const {
  json gens = json::array();
  for (const auto& [g, e] : members) gens.push_back({{"generator", g}, {"exact", e}});
  return json{{"generators", gens}, {"exact", exact()}};
}

GeneratorSet generator_set(const SelfMapRule& map, uint64_t n, uint64_t cover, uint64_t horizon) {
  require_positive(cover, n);
  GeneratorSet out;
  for (uint64_t k = 1; k <= cover; ++k) {
    GeneratorResult r = generator(map, k, n, horizon);
    auto [it, fresh] = out.members.emplace(r.g, r.exact);
    if (!fresh) it->second = it->second && r.exact;
  }
  return out;
}

std::vector<OrbitGroup> partition(const SelfMapRule& map, uint64_t n, uint64_t cover, uint64_t horizon) {
  require_positive(cover, n);
  std::map<uint64_t, OrbitGroup> groups;
  std::vector<uint64_t> owner(cover + 1, 0);
  for (uint64_t k = 1; k <= cover; ++k) {
    GeneratorResult r = generator(map, k, n, horizon);
    auto [it, fresh] = groups.try_emplace(r.g);
    if (fresh) {
      it->second.generator = r.g;
      it->second.exact = true;
    }
    it->second.exact = it->second.exact && r.exact;
    it->second.members.push_back(k);
    owner[k] = r.g;
  }
  for (const auto& [g, group] : groups) {
    OrbitSlice s = bi_orbit(map, g, n, cover, horizon);
    auto check = [&](uint64_t v) {
      if (v <= cover && owner[v] != g)
        throw PartitionViolation("index " + std::to_string(v) + " lies on the orbit of " + std::to_string(g) +
                                 " but was assigned to " + std::to_string(owner[v]));
    };
    for (uint64_t v : s.forward) check(v);
    for (uint64_t v : s.backward) check(v);
  }
  std::vector<OrbitGroup> out;
  for (auto& [g, group] : groups) out.push_back(std::move(group));
  return out;
}

json to_json(const std::vector<OrbitGroup>& groups) {
  json out = json::array();
  for (const auto& g : groups)
    out.push_back({{"generator", g.generator}, {"exact", g.exact}, {"members", g.members}});
  return out;
}

bool orbit_refinement_check(const SelfMapRule& map, uint64_t k, uint64_t n, uint64_t sample_len,
                            uint64_t horizon) {
  require_positive(k, n);
  Idx start = start_of(map, k);
  std::vector<Idx> fwd{start};
  while (fwd.size() <= sample_len) {
    auto nx = step_forward(map, fwd.back());
    if (!nx) break;
    fwd.push_back(*nx);
  }
  std::vector<Idx> bwd{start};
  while (bwd.size() <= sample_len) {
    BackStop stop = BackStop::None;
    auto pre = step_backward(map, bwd.back(), horizon, stop);
    if (!pre) break;
    bwd.push_back(*pre);
  }
  const int64_t f = static_cast<int64_t>(fwd.size()) - 1;
  const int64_t b = static_cast<int64_t>(bwd.size()) - 1;
  std::set<Key> window;
  for (const Idx& i : fwd) window.insert(idx_key(i));
  for (const Idx& i : bwd) window.insert(idx_key(i));

  std::map<Key, int> hits;
  for (int64_t i = 0; i < static_cast<int64_t>(n) && i <= f; ++i) {
    Idx base = fwd[static_cast<size_t>(i)];
    ++hits[idx_key(base)];
    Idx cur = base;
    for (int64_t t = i; t + static_cast<int64_t>(n) <= f; t += n) {
      for (uint64_t r = 0; r < n; ++r) {
        auto nx = step_forward(map, cur);
        if (!nx) return false;
        cur = *nx;
      }
      ++hits[idx_key(cur)];
    }
    cur = base;
    for (int64_t t = i; t - static_cast<int64_t>(n) >= -b; t -= n) {
      for (uint64_t r = 0; r < n; ++r) {
        BackStop stop = BackStop::None;
        auto pre = step_backward(map, cur, horizon, stop);
        if (!pre) return false;
        cur = *pre;
      }
      ++hits[idx_key(cur)];
    }
  }
  // every window index must be reached by exactly one stride walk
  if (hits.size() != window.size()) return false;
  for (const auto& [key, count] : hits)
    if (count != 1 || !window.count(key)) return false;
  return true;
}

namespace {

struct DirectionScan {
  std::vector<Idx> points;
  bool complete = false;  // no later point of this direction can land in F
};

DirectionScan scan_direction(const SelfMapRule& map, const Idx& start, bool backward, uint64_t max_f,
                             uint64_t horizon) {
  DirectionScan out;
  const Lattice* lat = map.lattice();
  if (!lat) {
    size_t steps = std::min<uint64_t>(horizon, kCertCap);
    Walk w = backward ? walk_backward(map, nullptr, start, steps, horizon) : walk_forward(map, nullptr, start, steps);
    out.complete = backward && w.sentinel;
    out.points = std::move(w.points);
    return out;
  }
  const Key bound{0, max_f};
  for (size_t after = 64;; after *= 2) {
    Walk w = backward ? walk_backward(map, lat, start, kCertCap, horizon, after)
                      : walk_forward(map, lat, start, kCertCap, after);
    if (backward && w.sentinel) {
      out.complete = true;
      out.points = std::move(w.points);
      return out;
    }
    if (w.cycle) {
      // past onset the walk repeats its block shifted upward, so a whole block
      // above max F keeps every later point above it
      const size_t L = w.cycle->length;
      for (size_t e = w.cycle->onset; e + L <= w.points.size(); ++e) {
        bool above = true;
        for (size_t t = e; t < e + L && above; ++t) above = idx_key(w.points[t]) > bound;
        if (above) {
          w.points.resize(e);
          out.points = std::move(w.points);
          out.complete = true;
          return out;
        }
      }
    }
    bool truncated = !w.cycle || w.overflow || w.points.size() > kCertCap || after > kCertCap;
    if (truncated) {
      out.points = std::move(w.points);
      return out;
    }
  }
}

const char* status_name(EscapeStatus s) {
  switch (s) {
    case EscapeStatus::Hit: return "hit";
    case EscapeStatus::Clear: return "clear";
    case EscapeStatus::ClearAtHorizon: return "clear_at_horizon";
  }
  return "?";
}

}  // namespace

json EscapeReport::to_json() const {
  json st = json::array();
  for (EscapeStatus s : status) st.push_back(status_name(s));
  return json{{"N", N}, {"status", st}, {"uniform", uniform}, {"verdict", pseudoshift::to_json(verdict)}};
}

EscapeReport escape_threshold(const SelfMapRule& map, uint64_t k, const std::set<uint64_t>& F, uint64_t n_max,
                              uint64_t horizon) {
  require_positive(k, 1);
  if (F.empty()) throw std::invalid_argument("escape_threshold needs a nonempty set");
  Idx start = start_of(map, k);
  const uint64_t max_f = *F.rbegin();
  DirectionScan fw = scan_direction(map, start, false, max_f, horizon);
  DirectionScan bw = scan_direction(map, start, true, max_f, horizon);
  auto in_f = [&](const Idx& i) { return i.representable() && F.count(i.value); };

  EscapeReport r;
  r.uniform = fw.complete && bw.complete;
  const uint64_t reach = std::max(fw.points.size(), bw.points.size());
  const uint64_t recorded = std::min<uint64_t>(n_max, reach);
  for (uint64_t n = 1; n <= recorded; ++n) {
    bool hit = false;
    for (size_t t = n; t < fw.points.size() && !hit; t += n) hit = in_f(fw.points[t]);
    for (size_t t = n; t < bw.points.size() && !hit; t += n) hit = in_f(bw.points[t]);
    EscapeStatus s = hit ? EscapeStatus::Hit : r.uniform ? EscapeStatus::Clear : EscapeStatus::ClearAtHorizon;
    r.status.push_back(s);
    if (hit) r.N = n;
  }
  bool all_clear = r.uniform;
  for (uint64_t n = r.N + 1; n <= recorded; ++n)
    all_clear = all_clear && r.status[n - 1] == EscapeStatus::Clear;
  json ev{{"N", r.N}, {"n_max", n_max}, {"uniform", r.uniform}, {"forward_points", fw.points.size()},
          {"backward_points", bw.points.size()}};
  r.verdict = all_clear ? Verdict::exact(ev) : Verdict::satisfied(ev);
  return r;
}

std::string orbit_dot(const SelfMapRule& map, uint64_t k, uint64_t length, uint64_t horizon) {
  OrbitSlice s = bi_orbit(map, k, 1, length, horizon);
  std::ostringstream out;
  out << "digraph orbit {\n";
  uint64_t prev = k;
  for (uint64_t v : s.forward) {
    out << "  " << prev << " -> " << v << ";\n";
    prev = v;
  }
  prev = k;
  for (uint64_t v : s.backward) {
    out << "  " << v << " -> " << prev << ";\n";
    prev = v;
  }
  out << "}\n";
  return out.str();
}

}  // namespace pseudoshift
