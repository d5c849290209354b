#include "pseudoshift/lattice.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "pseudoshift/errors.hpp"
#include "pseudoshift/primes.hpp"
#include "pseudoshift/selfmap.hpp"

namespace pseudoshift {

namespace {

constexpr uint64_t kMaxModulus = 1'000'000;
constexpr uint64_t kMaxThreshold = 1'000'000;
constexpr size_t kAperiodicWalkCap = 200'000;

bool grow_lcm(uint64_t& m, uint64_t by) {
  m = m / std::gcd(m, by) * by;
  return m <= kMaxModulus;
}

bool prime_hit(const PrimePosGuard& g, std::optional<uint64_t> family, uint64_t pos) {
  if (g.family && (!family || *g.family != *family)) return false;
  return pos >= g.pos_min && pos % g.pos_mod == g.pos_rem;
}

uint64_t rep_at_least(uint64_t t, uint64_t s, uint64_t m) { return t + (s + m - t % m) % m; }

}  // namespace

std::optional<Lattice> Lattice::build(const SelfMapRule& map, const std::vector<Guard>& extra, uint64_t floor) {
  Lattice lat;
  uint64_t M = 1, T = std::max<uint64_t>(1, floor);
  const auto& fb = map.fallback();

  if (auto* a = std::get_if<AffineExpr>(&fb); a && a->a == 1) {
    lat.kind_ = LatticeKind::Arithmetic;
    for (const auto& c : map.clauses()) {
      if (auto* s = std::get_if<SetGuard>(&c.guard)) {
        if (!s->members.empty()) T = std::max(T, s->members.back() + 1);
      } else if (auto* r = std::get_if<ResidueGuard>(&c.guard)) {
        auto* e = std::get_if<AffineExpr>(&c.expr);
        if (!e || e->a != 1) return std::nullopt;
        if (!grow_lcm(M, r->mod)) return std::nullopt;
        T = std::max(T, r->min);
      } else {
        return std::nullopt;
      }
    }
    for (const auto& g : extra) {
      if (auto* s = std::get_if<SetGuard>(&g)) {
        if (!s->members.empty()) T = std::max(T, s->members.back() + 1);
      } else if (auto* r = std::get_if<ResidueGuard>(&g)) {
        if (!grow_lcm(M, r->mod)) return std::nullopt;
        T = std::max(T, r->min);
      } else {
        return std::nullopt;
      }
    }
    std::vector<int64_t> shifts(M);
    for (uint64_t s = 0; s < M; ++s) {
      uint64_t rep = rep_at_least(T, s, M);
      int64_t b = a->b;
      for (const auto& c : map.clauses()) {
        auto* r = std::get_if<ResidueGuard>(&c.guard);
        if (r && rep % r->mod == r->rem) {
          b = std::get<AffineExpr>(c.expr).b;
          break;
        }
      }
      shifts[s] = b;
    }
    lat.region_shift_.push_back(std::move(shifts));
  } else if (std::holds_alternative<PrimeShiftExpr>(fb)) {
    lat.kind_ = LatticeKind::Prime;
    std::set<uint64_t> named;
    auto take = [&](const PrimePosGuard& g) {
      if (g.family) named.insert(*g.family);
      T = std::max(T, g.pos_min);
      return grow_lcm(M, g.pos_mod);
    };
    for (const auto& c : map.clauses()) {
      auto* g = std::get_if<PrimePosGuard>(&c.guard);
      if (!g || !std::holds_alternative<PrimeShiftExpr>(c.expr)) return std::nullopt;
      if (!take(*g)) return std::nullopt;
    }
    for (const auto& g : extra) {
      if (auto* p = std::get_if<PrimePosGuard>(&g)) {
        if (!take(*p)) return std::nullopt;
      } else if (auto* s = std::get_if<SetGuard>(&g)) {
        // P_i(j) >= j, so positions past max(set) never hit the set
        if (!s->members.empty()) T = std::max(T, s->members.back() + 1);
      } else {
        return std::nullopt;
      }
    }
    lat.named_.assign(named.begin(), named.end());
    for (size_t cls = 0; cls <= lat.named_.size(); ++cls) {
      std::optional<uint64_t> fam;
      if (cls < lat.named_.size()) fam = lat.named_[cls];
      std::vector<int64_t> shifts(M);
      for (uint64_t s = 0; s < M; ++s) {
        uint64_t rep = rep_at_least(T, s, M);
        int64_t d = std::get<PrimeShiftExpr>(fb).delta;
        for (const auto& c : map.clauses()) {
          if (prime_hit(std::get<PrimePosGuard>(c.guard), fam, rep)) {
            d = std::get<PrimeShiftExpr>(c.expr).delta;
            break;
          }
        }
        shifts[s] = d;
      }
      lat.region_shift_.push_back(std::move(shifts));
    }
  } else {
    return std::nullopt;
  }

  int64_t lo = 0, hi = 0;
  for (const auto& row : lat.region_shift_)
    for (int64_t b : row) {
      lo = std::min(lo, b);
      hi = std::max(hi, b);
    }
  if (lo < 0) T = std::max<uint64_t>(T, static_cast<uint64_t>(1 - lo));
  if (T > kMaxThreshold) return std::nullopt;
  lat.modulus_ = M;
  lat.threshold_ = T;

  uint64_t max_small = 0;
  for (size_t cls = 0; cls < lat.region_shift_.size(); ++cls) {
    std::vector<uint64_t> img(T, 0);
    std::unordered_multimap<uint64_t, uint64_t> pre;
    for (uint64_t c = 1; c < T; ++c) {
      uint64_t v;
      if (lat.kind_ == LatticeKind::Arithmetic) {
        v = map.apply(c);
      } else {
        std::optional<uint64_t> fam;
        if (cls < lat.named_.size()) fam = lat.named_[cls];
        int64_t d = std::get<PrimeShiftExpr>(fb).delta;
        for (const auto& cl : map.clauses()) {
          if (prime_hit(std::get<PrimePosGuard>(cl.guard), fam, c)) {
            d = std::get<PrimeShiftExpr>(cl.expr).delta;
            break;
          }
        }
        int64_t p = static_cast<int64_t>(c) + d;
        if (p < 1) throw MalformedRule("prime_shift moves position " + std::to_string(c) + " below 1");
        v = static_cast<uint64_t>(p);
      }
      img[c] = v;
      pre.emplace(v, c);
      max_small = std::max(max_small, v);
    }
    lat.small_image_.push_back(std::move(img));
    lat.small_pre_.push_back(std::move(pre));
  }
  lat.back_threshold_ = std::max(T + static_cast<uint64_t>(hi), max_small + 1);

  std::set<int64_t> ds;
  for (const auto& row : lat.region_shift_) ds.insert(row.begin(), row.end());
  lat.distinct_shifts_.assign(ds.begin(), ds.end());
  lat.analyse();
  return lat;
}

uint64_t Lattice::coord(const Idx& i) const {
  if (kind_ == LatticeKind::Arithmetic) return i.value;
  return located(i).pos;
}

uint64_t Lattice::class_of(const Idx& i) const {
  if (kind_ == LatticeKind::Arithmetic) return 0;
  uint64_t f = located(i).family;
  auto it = std::lower_bound(named_.begin(), named_.end(), f);
  if (it != named_.end() && *it == f) return static_cast<uint64_t>(it - named_.begin());
  return named_.size();
}

Idx Lattice::at(const Idx& like, uint64_t c) const {
  if (kind_ == LatticeKind::Arithmetic) return Idx::of(c);
  Idx l = located(like);
  Idx out;
  out.located = true;
  out.family = l.family;
  out.pos = c;
  out.value = PrimeTable::shared().element(l.family, c).value_or(0);
  return out;
}

int64_t Lattice::shift(uint64_t cls, uint64_t c) const {
  if (c >= threshold_) return region_shift_[cls][c % modulus_];
  return static_cast<int64_t>(small_image_[cls][c]) - static_cast<int64_t>(c);
}

std::vector<uint64_t> Lattice::coord_preimages(uint64_t cls, uint64_t c) const {
  std::vector<uint64_t> out;
  auto [lo, hi] = small_pre_[cls].equal_range(c);
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  for (int64_t b : distinct_shifts_) {
    int64_t n = static_cast<int64_t>(c) - b;
    if (n < static_cast<int64_t>(threshold_)) continue;
    if (region_shift_[cls][static_cast<uint64_t>(n) % modulus_] == b) out.push_back(static_cast<uint64_t>(n));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Idx> Lattice::preimages(const Idx& m) const {
  std::vector<Idx> out;
  for (uint64_t c : coord_preimages(class_of(m), coord(m))) out.push_back(at(m, c));
  return out;
}

void Lattice::analyse() {
  const uint64_t M = modulus_, T = threshold_;
  injective_ = true;
  aperiodic_ = true;
  for (size_t cls = 0; cls < region_shift_.size(); ++cls) {
    const auto& row = region_shift_[cls];
    auto image_residue = [&](uint64_t s) {
      int64_t r = (static_cast<int64_t>(s) + row[s]) % static_cast<int64_t>(M);
      return static_cast<uint64_t>(r < 0 ? r + static_cast<int64_t>(M) : r);
    };
    std::vector<char> hit(M, 0);
    for (uint64_t s = 0; s < M; ++s) {
      uint64_t t = image_residue(s);
      if (hit[t]) injective_ = false;
      hit[t] = 1;
    }
    std::set<uint64_t> seen;
    for (uint64_t c = 1; c < T; ++c) {
      uint64_t v = small_image_[cls][c];
      if (!seen.insert(v).second) injective_ = false;
      for (int64_t b : distinct_shifts_) {
        int64_t n = static_cast<int64_t>(v) - b;
        if (n >= static_cast<int64_t>(T) && row[static_cast<uint64_t>(n) % M] == b) injective_ = false;
      }
    }
    if (!injective_) {
      aperiodic_ = false;
      return;
    }
    // a zero-gain residue cycle would carry periodic orbits above T
    std::vector<char> done(M, 0);
    for (uint64_t s = 0; s < M; ++s) {
      if (done[s]) continue;
      int64_t gain = 0;
      for (uint64_t t = s; !done[t]; t = image_residue(t)) {
        done[t] = 1;
        gain += row[t];
      }
      if (gain == 0) aperiodic_ = false;
    }
    if (!aperiodic_) return;
    // a periodic orbit cannot stay above T, so it passes through a small coordinate
    for (uint64_t c0 = 1; c0 < T && aperiodic_; ++c0) {
      std::set<uint64_t> visited{c0};
      std::unordered_map<uint64_t, uint64_t> state_coord;
      uint64_t c = c0;
      bool escaped = false;
      for (size_t step = 0; step < kAperiodicWalkCap; ++step) {
        c = static_cast<uint64_t>(static_cast<int64_t>(c) + shift(cls, c));
        if (!visited.insert(c).second) break;
        if (c < T) {
          state_coord.clear();
          continue;
        }
        auto [it, fresh] = state_coord.emplace(c % M, c);
        if (!fresh) {
          if (c > it->second) {
            escaped = true;
            break;
          }
          it->second = c;
        }
      }
      if (!escaped) aperiodic_ = false;
    }
  }
}

std::optional<EscapeCycle> EscapeDetector::feed(const Idx& i) {
  uint64_t c = lat_.coord(i);
  size_t idx = coords_.size();
  coords_.push_back(c);
  uint64_t thr = backward_ ? lat_.back_threshold() : lat_.threshold();
  if (c < thr) {
    seen_.clear();
    return std::nullopt;
  }
  auto [it, fresh] = seen_.emplace(lat_.state(i), idx);
  if (!fresh) {
    size_t j = it->second;
    if (c > coords_[j])
      return EscapeCycle{j, idx - j, static_cast<int64_t>(c - coords_[j])};
    it->second = idx;
  }
  return std::nullopt;
}

namespace {

Idx normalise(const Lattice* lat, const Idx& i) {
  if (lat && lat->kind() == LatticeKind::Prime) return located(i);
  return i;
}

}  // namespace

Walk walk_forward(const SelfMapRule& map, const Lattice* lat, const Idx& start, size_t max_steps, size_t after) {
  Walk w;
  Idx cur = normalise(lat, start);
  w.points.push_back(cur);
  std::map<std::pair<uint64_t, uint64_t>, size_t> visited{{idx_key(cur), 0}};
  std::optional<EscapeDetector> det;
  if (lat) {
    det.emplace(*lat, false);
    w.cycle = det->feed(cur);
  }
  for (size_t step = 0; step < max_steps; ++step) {
    if (w.cycle && step >= w.cycle->onset + w.cycle->length + after) break;
    Idx nx;
    try {
      nx = map.apply(cur);
    } catch (const HorizonExceeded&) {
      w.overflow = true;
      break;
    }
    if (!nx.value && !nx.located) {
      w.overflow = true;
      break;
    }
    auto [it, fresh] = visited.emplace(idx_key(nx), step + 1);
    if (!fresh) throw PeriodicOrbitDetected(nx.value, step + 1 - it->second);
    w.points.push_back(nx);
    cur = nx;
    if (det && !w.cycle) w.cycle = det->feed(cur);
  }
  return w;
}

Walk walk_backward(const SelfMapRule& map, const Lattice* lat, const Idx& start, size_t max_steps,
                   uint64_t scan_horizon, size_t after) {
  Walk w;
  Idx cur = normalise(lat, start);
  w.points.push_back(cur);
  std::map<std::pair<uint64_t, uint64_t>, size_t> visited{{idx_key(cur), 0}};
  std::optional<EscapeDetector> det;
  if (lat) {
    det.emplace(*lat, true);
    w.cycle = det->feed(cur);
  }
  for (size_t step = 0; step < max_steps; ++step) {
    if (w.cycle && step >= w.cycle->onset + w.cycle->length + after) break;
    bool certain = true;
    std::vector<Idx> pre;
    try {
      pre = lat ? lat->preimages(cur) : preimages(map, cur, scan_horizon, &certain);
    } catch (const HorizonExceeded&) {
      w.overflow = true;
      break;
    }
    if (pre.size() > 1) throw NotInjectiveWitness(pre[0].value, pre[1].value);
    if (pre.empty()) {
      if (certain) w.sentinel = true;
      else w.certain = false;
      break;
    }
    auto [it, fresh] = visited.emplace(idx_key(pre[0]), step + 1);
    if (!fresh) throw PeriodicOrbitDetected(pre[0].value, step + 1 - it->second);
    w.points.push_back(pre[0]);
    cur = pre[0];
    if (det && !w.cycle) w.cycle = det->feed(cur);
  }
  return w;
}

}  // namespace pseudoshift
