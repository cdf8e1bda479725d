#include "torsionlab/sets.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>
#include <sstream>

namespace torsionlab {

namespace {
constexpr u64 kEpModulusCap = 1u << 20;
constexpr u64 kEpThresholdCap = 1u << 22;
constexpr size_t kEpHeadCap = 1u << 22;
}  // namespace

// ---------------------------------------------------------------------------
// SparseMap / IntervalRule

Int SparseMap::value_at(u64 n) const {
  if (kind == Kind::Exp) {
    Int v;
    mpz_ui_pow_ui(v.get_mpz_t(), static_cast<unsigned long>(base), static_cast<unsigned long>(n));
    return v;
  }
  Int v = 0;
  for (size_t i = coeffs.size(); i-- > 0;) v = v * Int(n) + Int(coeffs[i]);
  return v;
}

std::string SparseMap::str() const {
  std::ostringstream os;
  if (kind == Kind::Exp) {
    os << "powers " << base;
  } else if (coeffs == std::vector<long long>{0, 0, 1}) {
    os << "squares";
  } else if (coeffs == std::vector<long long>{0, 0, 0, 1}) {
    os << "cubes";
  } else {
    os << "poly";
    for (long long c : coeffs) os << " " << c;
  }
  return os.str();
}

Int IntervalRule::start_at(u64 n) const {
  if (start_kind == StartKind::Geometric) {
    Int v;
    mpz_ui_pow_ui(v.get_mpz_t(), static_cast<unsigned long>(base), static_cast<unsigned long>(n));
    return v;
  }
  return Int(a) * Int(n) + Int(c);
}

std::string IntervalRule::str() const {
  std::ostringstream os;
  os << "intervals ";
  if (start_kind == StartKind::Geometric)
    os << "geometric " << base;
  else
    os << "affine " << a << " " << c;
  os << " length ";
  if (len_a == 0)
    os << len_c;
  else if (len_a == 1 && len_c == 0)
    os << "n";
  else
    os << len_a << "n+" << len_c;
  return os.str();
}

// ---------------------------------------------------------------------------
// Node

namespace detail {
struct SetNode {
  SetSpec::Kind kind;
  std::vector<u64> elems;  // Finite members / Cofinite missing
  u64 a = 1, r = 0;        // Progression
  SparseMap map;
  IntervalRule rule;
  long long offset = 0;  // Shift
  std::shared_ptr<const SetNode> left, right;
};
}  // namespace detail

using detail::SetNode;
using Kind = SetSpec::Kind;

namespace {

std::shared_ptr<const SetNode> make_node(SetNode n) {
  return std::make_shared<const SetNode>(std::move(n));
}

bool node_equal(const SetNode& x, const SetNode& y) {
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case Kind::Finite:
    case Kind::Cofinite:
      return x.elems == y.elems;
    case Kind::Progression:
      return x.a == y.a && x.r == y.r;
    case Kind::Sparse:
      return x.map.kind == y.map.kind && x.map.coeffs == y.map.coeffs && x.map.base == y.map.base;
    case Kind::Intervals:
      return x.rule.start_kind == y.rule.start_kind && x.rule.a == y.rule.a &&
             x.rule.c == y.rule.c && x.rule.base == y.rule.base &&
             x.rule.len_a == y.rule.len_a && x.rule.len_c == y.rule.len_c;
    case Kind::Shift:
      return x.offset == y.offset && node_equal(*x.left, *y.left);
    default:
      return node_equal(*x.left, *y.left) && node_equal(*x.right, *y.right);
  }
}

void validate_sparse(const SparseMap& m) {
  if (m.kind == SparseMap::Kind::Exp) {
    if (m.base < 2) throw std::invalid_argument("SparseMap: exponential base must be >= 2");
    return;
  }
  if (m.coeffs.size() < 3 || m.coeffs.back() <= 0)
    throw std::invalid_argument("SparseMap: polynomial must have degree >= 2, positive leading coefficient");
  // strictly increasing and non-negative; scan past the Cauchy bound of the
  // difference polynomial so monotonicity beyond the scan is guaranteed
  long long bound = 2;
  long long lead = m.coeffs.back();
  for (long long c : m.coeffs) bound = std::max(bound, 2 + (std::llabs(c) * 2) / lead);
  Int prev = m.value_at(0);
  if (prev < 0) throw std::invalid_argument("SparseMap: negative value at 0");
  for (u64 j = 1; j <= static_cast<u64>(bound) + 4; ++j) {
    Int cur = m.value_at(j);
    if (cur <= prev) throw std::invalid_argument("SparseMap: values not strictly increasing");
    prev = cur;
  }
}

void validate_intervals(const IntervalRule& r) {
  if (r.len_a < 0 || r.len_c < 0) throw std::invalid_argument("IntervalRule: negative length");
  if (r.start_kind == IntervalRule::StartKind::Geometric) {
    if (r.base < 2) throw std::invalid_argument("IntervalRule: geometric base must be >= 2");
  } else {
    if (r.a < 1 || r.c < 0) throw std::invalid_argument("IntervalRule: affine start needs a >= 1, c >= 0");
    if (r.len_a != 0) throw std::invalid_argument("IntervalRule: affine starts require constant lengths");
    if (r.a < r.len_c + 2) throw std::invalid_argument("IntervalRule: intervals overlap or touch");
  }
  Int prev_end = r.start_at(0) + r.len_at(0);
  for (u64 n = 1; n <= 64; ++n) {
    Int st = r.start_at(n);
    if (st <= prev_end + 1) throw std::invalid_argument("IntervalRule: intervals overlap or touch");
    prev_end = st + r.len_at(n);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Factories

SetSpec::SetSpec() : node_(make_node({Kind::Finite})) {}

SetSpec SetSpec::finite(std::vector<u64> elems) {
  std::sort(elems.begin(), elems.end());
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  SetNode n{Kind::Finite};
  n.elems = std::move(elems);
  return SetSpec(make_node(std::move(n)));
}

SetSpec SetSpec::cofinite(std::vector<u64> missing) {
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  SetNode n{Kind::Cofinite};
  n.elems = std::move(missing);
  return SetSpec(make_node(std::move(n)));
}

SetSpec SetSpec::naturals() { return progression(1, 0); }
SetSpec SetSpec::positives() { return progression(1, 1); }

SetSpec SetSpec::progression(u64 a, u64 r) {
  if (a < 1) throw std::invalid_argument("progression: a must be >= 1");
  SetNode n{Kind::Progression};
  n.a = a;
  n.r = r;
  return SetSpec(make_node(std::move(n)));
}

SetSpec SetSpec::sparse(SparseMap f) {
  validate_sparse(f);
  SetNode n{Kind::Sparse};
  n.map = std::move(f);
  return SetSpec(make_node(std::move(n)));
}

SetSpec SetSpec::squares() {
  SparseMap m;
  m.kind = SparseMap::Kind::Poly;
  m.coeffs = {0, 0, 1};
  return sparse(std::move(m));
}

SetSpec SetSpec::cubes() {
  SparseMap m;
  m.kind = SparseMap::Kind::Poly;
  m.coeffs = {0, 0, 0, 1};
  return sparse(std::move(m));
}

SetSpec SetSpec::powers(long long base) {
  SparseMap m;
  m.kind = SparseMap::Kind::Exp;
  m.base = base;
  return sparse(std::move(m));
}

SetSpec SetSpec::intervals(IntervalRule rule) {
  validate_intervals(rule);
  SetNode n{Kind::Intervals};
  n.rule = std::move(rule);
  return SetSpec(make_node(std::move(n)));
}

SetSpec SetSpec::shifted(long long k) const {
  if (k == 0) return *this;
  // fold simple shapes so shifted progressions stay progressions
  const SetNode& n = *node_;
  if (n.kind == Kind::Finite) {
    std::vector<u64> out;
    for (u64 e : n.elems) {
      long long v = static_cast<long long>(e) + k;
      if (v >= 0) out.push_back(static_cast<u64>(v));
    }
    return finite(std::move(out));
  }
  if (n.kind == Kind::Progression) {
    long long r2 = static_cast<long long>(n.r) + k;
    if (r2 >= 0) return progression(n.a, static_cast<u64>(r2));
    // clip below zero: first surviving member
    long long rem = ((r2 % static_cast<long long>(n.a)) + static_cast<long long>(n.a)) %
                    static_cast<long long>(n.a);
    return progression(n.a, static_cast<u64>(rem));
  }
  if (n.kind == Kind::Shift) {
    SetSpec inner(n.left);
    long long combined = n.offset + k;
    // combining shifts of opposite signs does not commute with clipping when
    // the intermediate shift clipped something; only fold same-sign shifts
    if ((n.offset >= 0) == (k >= 0) || combined == 0) {
      if (combined == 0) return inner;
      SetNode out{Kind::Shift};
      out.offset = combined;
      out.left = n.left;
      return SetSpec(make_node(std::move(out)));
    }
  }
  SetNode out{Kind::Shift};
  out.offset = k;
  out.left = node_;
  return SetSpec(make_node(std::move(out)));
}

SetSpec SetSpec::unioned(const SetSpec& o) const {
  SetNode n{Kind::Union};
  n.left = node_;
  n.right = o.node_;
  return SetSpec(make_node(std::move(n)));
}

SetSpec SetSpec::intersected(const SetSpec& o) const {
  SetNode n{Kind::Intersection};
  n.left = node_;
  n.right = o.node_;
  return SetSpec(make_node(std::move(n)));
}

SetSpec SetSpec::minus(const SetSpec& o) const {
  SetNode n{Kind::Difference};
  n.left = node_;
  n.right = o.node_;
  return SetSpec(make_node(std::move(n)));
}

SetSpec SetSpec::complement() const { return naturals().minus(*this); }

Kind SetSpec::kind() const { return node_->kind; }

SetSpec shift(const SetSpec& a, long long k) { return a.shifted(k); }

SetSpec s_k(const SetSpec& e, unsigned k) {
  SetSpec acc = e;
  for (unsigned j = 1; j <= k; ++j) acc = acc.unioned(e.shifted(static_cast<long long>(j)));
  return acc;
}

SetSpec c_k_chain(const std::vector<SetSpec>& chain, unsigned k, u64 check_horizon) {
  if (chain.size() < static_cast<size_t>(k) + 1)
    throw std::invalid_argument("c_k_chain: chain shorter than k+1");
  for (unsigned j = 0; j + 1 <= k; ++j) {
    auto sub = chain[j + 1].subset_of(chain[j], check_horizon);
    if (sub.value == TriBool::No)
      throw NotDecreasingError("c_k_chain: chain not decreasing at index " + std::to_string(j + 1));
  }
  SetSpec acc = chain[0];
  for (unsigned j = 1; j <= k; ++j) acc = acc.unioned(chain[j].shifted(static_cast<long long>(j)));
  return acc;
}

// ---------------------------------------------------------------------------
// Membership

namespace {

bool sparse_contains(const SparseMap& m, const Int& v) {
  if (v < 0) return false;
  if (m.kind == SparseMap::Kind::Exp) {
    Int cur = v;
    if (cur == 0) return false;
    while (cur % m.base == 0) cur /= m.base;
    return cur == 1;
  }
  // binary search j with m(j) == v; values strictly increasing
  u64 lo = 0, hi = 1;
  while (m.value_at(hi) < v) {
    lo = hi;
    hi *= 2;
    if (hi > (1ull << 40)) return false;
  }
  while (lo <= hi) {
    u64 mid = lo + (hi - lo) / 2;
    Int x = m.value_at(mid);
    if (x == v) return true;
    if (x < v) {
      lo = mid + 1;
    } else {
      if (mid == 0) break;
      hi = mid - 1;
    }
  }
  return false;
}

u64 sparse_count_le(const SparseMap& m, const Int& v) {
  // #{ j >= 0 : m(j) <= v }
  if (v < m.value_at(0)) return 0;
  u64 lo = 0, hi = 1;
  while (m.value_at(hi) <= v) {
    lo = hi;
    hi *= 2;
    if (hi > (1ull << 40)) break;
  }
  while (lo < hi) {
    u64 mid = lo + (hi - lo + 1) / 2;
    if (m.value_at(mid) <= v)
      lo = mid;
    else
      hi = mid - 1;
  }
  return lo + 1;
}

bool intervals_contain(const IntervalRule& r, u64 n) {
  Int v(static_cast<unsigned long>(n));
  if (r.start_kind == IntervalRule::StartKind::Affine) {
    // intervals are disjoint with constant length, so only one candidate index
    if (v < r.c) return false;
    Int j = (v - r.c) / r.a;
    return v <= r.start_at(j.get_ui()) + r.len_c;
  }
  for (u64 j = 0;; ++j) {
    Int st = r.start_at(j);
    if (st > v) return false;
    if (v <= st + r.len_at(j)) return true;
  }
}

}  // namespace

bool SetSpec::contains(u64 n) const {
  const SetNode& nd = *node_;
  switch (nd.kind) {
    case Kind::Finite:
      return std::binary_search(nd.elems.begin(), nd.elems.end(), n);
    case Kind::Cofinite:
      return !std::binary_search(nd.elems.begin(), nd.elems.end(), n);
    case Kind::Progression:
      return n >= nd.r && (n - nd.r) % nd.a == 0;
    case Kind::Sparse:
      return sparse_contains(nd.map, Int(static_cast<unsigned long>(n)));
    case Kind::Intervals:
      return intervals_contain(nd.rule, n);
    case Kind::Shift: {
      long long v = static_cast<long long>(n) - nd.offset;
      if (v < 0) return false;
      return SetSpec(nd.left).contains(static_cast<u64>(v));
    }
    case Kind::Union:
      return SetSpec(nd.left).contains(n) || SetSpec(nd.right).contains(n);
    case Kind::Intersection:
      return SetSpec(nd.left).contains(n) && SetSpec(nd.right).contains(n);
    case Kind::Difference:
      return SetSpec(nd.left).contains(n) && !SetSpec(nd.right).contains(n);
  }
  return false;
}

std::vector<u64> SetSpec::prefix(u64 up_to) const {
  std::vector<u64> out;
  const SetNode& nd = *node_;
  if (nd.kind == Kind::Sparse) {
    for (u64 j = 0;; ++j) {
      Int v = nd.map.value_at(j);
      if (v > static_cast<unsigned long>(up_to)) break;
      out.push_back(v.get_ui());
    }
    return out;
  }
  if (nd.kind == Kind::Finite) {
    for (u64 e : nd.elems)
      if (e <= up_to) out.push_back(e);
    return out;
  }
  for (u64 i = 0; i <= up_to; ++i)
    if (contains(i)) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Eventually periodic normal form

u64 EventuallyPeriodic::residue_count() const {
  u64 c = 0;
  for (char b : residues) c += (b != 0);
  return c;
}

bool EventuallyPeriodic::contains(u64 n) const {
  if (n < threshold) return std::binary_search(head.begin(), head.end(), n);
  return residues[n % modulus] != 0;
}

u64 EventuallyPeriodic::counting(u64 n) const {
  u64 c = static_cast<u64>(std::upper_bound(head.begin(), head.end(), n) - head.begin());
  if (n < threshold) return c;
  for (u64 r = 0; r < modulus; ++r) {
    if (!residues[r]) continue;
    // members >= threshold, <= n, congruent to r
    u64 first = threshold + ((r + modulus - threshold % modulus) % modulus);
    if (first <= n) c += (n - first) / modulus + 1;
  }
  return c;
}

namespace {

std::optional<EventuallyPeriodic> ep_of(const SetNode& nd);

std::optional<EventuallyPeriodic> ep_lift(const EventuallyPeriodic& e, u64 modulus, u64 threshold) {
  if (modulus % e.modulus != 0 || threshold < e.threshold) return std::nullopt;
  if (modulus > kEpModulusCap || threshold > kEpThresholdCap) return std::nullopt;
  EventuallyPeriodic out;
  out.modulus = modulus;
  out.threshold = threshold;
  out.residues.assign(modulus, 0);
  for (u64 r = 0; r < modulus; ++r) out.residues[r] = e.residues[r % e.modulus];
  out.head = e.head;
  for (u64 n = e.threshold; n < threshold; ++n)
    if (e.residues[n % e.modulus]) out.head.push_back(n);
  std::sort(out.head.begin(), out.head.end());
  if (out.head.size() > kEpHeadCap) return std::nullopt;
  return out;
}

u64 lcm_u64(u64 a, u64 b) {
  u64 g = std::gcd(a, b);
  if (a / g > kEpModulusCap / b + 1) return 0;
  return a / g * b;
}

std::optional<EventuallyPeriodic> ep_binary(const EventuallyPeriodic& a, const EventuallyPeriodic& b,
                                            Kind op) {
  u64 m = lcm_u64(a.modulus, b.modulus);
  if (m == 0 || m > kEpModulusCap) return std::nullopt;
  u64 t = std::max(a.threshold, b.threshold);
  auto la = ep_lift(a, m, t);
  auto lb = ep_lift(b, m, t);
  if (!la || !lb) return std::nullopt;
  EventuallyPeriodic out;
  out.modulus = m;
  out.threshold = t;
  out.residues.assign(m, 0);
  for (u64 r = 0; r < m; ++r) {
    bool x = la->residues[r], y = lb->residues[r];
    out.residues[r] = (op == Kind::Union) ? (x || y) : (op == Kind::Intersection) ? (x && y) : (x && !y);
  }
  for (u64 n : la->head) {
    bool y = lb->contains(n);
    bool keep = (op == Kind::Union) || (op == Kind::Intersection && y) || (op == Kind::Difference && !y);
    if (keep) out.head.push_back(n);
  }
  if (op == Kind::Union)
    for (u64 n : lb->head)
      if (!la->contains(n)) out.head.push_back(n);
  std::sort(out.head.begin(), out.head.end());
  return out;
}

std::optional<EventuallyPeriodic> ep_shift(const EventuallyPeriodic& e, long long k) {
  EventuallyPeriodic out;
  out.modulus = e.modulus;
  out.residues.assign(e.modulus, 0);
  long long m = static_cast<long long>(e.modulus);
  for (u64 r = 0; r < e.modulus; ++r) {
    if (!e.residues[r]) continue;
    u64 nr = static_cast<u64>(((static_cast<long long>(r) + k) % m + m) % m);
    out.residues[nr] = 1;
  }
  long long t = static_cast<long long>(e.threshold) + k;
  out.threshold = t > 0 ? static_cast<u64>(t) : 0;
  if (out.threshold > kEpThresholdCap) return std::nullopt;
  for (u64 h : e.head) {
    long long v = static_cast<long long>(h) + k;
    if (v >= 0 && static_cast<u64>(v) < out.threshold) out.head.push_back(static_cast<u64>(v));
  }
  std::sort(out.head.begin(), out.head.end());
  return out;
}

std::optional<EventuallyPeriodic> ep_of(const SetNode& nd) {
  switch (nd.kind) {
    case Kind::Finite: {
      EventuallyPeriodic e;
      e.modulus = 1;
      e.residues = {0};
      e.threshold = nd.elems.empty() ? 0 : nd.elems.back() + 1;
      if (e.threshold > kEpThresholdCap) return std::nullopt;
      e.head = nd.elems;
      return e;
    }
    case Kind::Cofinite: {
      EventuallyPeriodic e;
      e.modulus = 1;
      e.residues = {1};
      e.threshold = nd.elems.empty() ? 0 : nd.elems.back() + 1;
      if (e.threshold > kEpThresholdCap) return std::nullopt;
      for (u64 n = 0; n < e.threshold; ++n)
        if (!std::binary_search(nd.elems.begin(), nd.elems.end(), n)) e.head.push_back(n);
      return e;
    }
    case Kind::Progression: {
      if (nd.a > kEpModulusCap || nd.r > kEpThresholdCap) return std::nullopt;
      EventuallyPeriodic e;
      e.modulus = nd.a;
      e.residues.assign(nd.a, 0);
      e.residues[nd.r % nd.a] = 1;
      e.threshold = nd.r;
      return e;
    }
    case Kind::Shift: {
      auto inner = ep_of(*nd.left);
      if (!inner) return std::nullopt;
      return ep_shift(*inner, nd.offset);
    }
    case Kind::Union:
    case Kind::Intersection:
    case Kind::Difference: {
      auto l = ep_of(*nd.left);
      if (!l) return std::nullopt;
      auto r = ep_of(*nd.right);
      if (!r) return std::nullopt;
      return ep_binary(*l, *r, nd.kind);
    }
    default:
      return std::nullopt;
  }
}

}  // namespace

std::optional<EventuallyPeriodic> to_eventually_periodic(const SetSpec& a) {
  return ep_of(a.node());
}

// ---------------------------------------------------------------------------
// Sparse view and residue analysis

namespace {

struct SparseView {
  SparseMap map;
  long long offset = 0;
};

std::optional<SparseView> as_sparse_view(const SetNode& nd) {
  if (nd.kind == Kind::Sparse) return SparseView{nd.map, 0};
  if (nd.kind == Kind::Shift) {
    auto inner = as_sparse_view(*nd.left);
    if (!inner) return std::nullopt;
    inner->offset += nd.offset;
    return inner;
  }
  return std::nullopt;
}

// Residue classes of the parameter j for which map(j)+offset falls in a given
// residue set mod m, split into classes hit infinitely often vs only finitely.
struct HitAnalysis {
  u64 infinite_hits = 0;   // parameter classes (poly: mod m; exp: cycle slots)
  u64 total_classes = 1;
  bool any_infinite = false;
};

HitAnalysis sparse_hits(const SparseView& sv, const EventuallyPeriodic& target) {
  HitAnalysis h;
  u64 m = target.modulus;
  auto in_target = [&](const Int& value) {
    Int res = ((value % static_cast<long>(m)) + static_cast<long>(m)) % static_cast<long>(m);
    return target.residues[res.get_ui()] != 0;
  };
  if (sv.map.kind == SparseMap::Kind::Poly) {
    h.total_classes = m;
    for (u64 j = 0; j < m; ++j) {
      Int v = sv.map.value_at(j) + sv.offset;
      if (in_target(v)) {
        ++h.infinite_hits;
        h.any_infinite = true;
      }
    }
  } else {
    // base^j mod m is eventually periodic; values on the cycle recur forever
    std::map<u64, u64> seen;
    std::vector<u64> vals;
    Int cur = 1;
    u64 mod = m;
    u64 j = 0;
    u64 cycle_start = 0;
    // the iteration v -> v*base mod m is deterministic, so the first repeated
    // residue starts the cycle
    for (;; ++j) {
      u64 v = mpz_fdiv_ui(cur.get_mpz_t(), mod);
      auto it = seen.find(v);
      if (it != seen.end()) {
        cycle_start = it->second;
        break;
      }
      seen[v] = j;
      vals.push_back(v);
      cur = (cur * sv.map.base) % static_cast<long>(mod);
      if (j > 4 * mod + 8) break;
    }
    h.total_classes = vals.size() > cycle_start ? vals.size() - cycle_start : 1;
    for (u64 i = cycle_start; i < vals.size(); ++i) {
      Int v = Int(static_cast<unsigned long>(vals[i])) + sv.offset;
      if (in_target(v)) {
        ++h.infinite_hits;
        h.any_infinite = true;
      }
    }
  }
  return h;
}

// Finitely many j can put map(j)+offset inside target even when no class is
// hit infinitely often; callers that need exact finiteness combine this with
// an explicit scan of small j against target.head.
bool sparse_meets_head(const SparseView& sv, const EventuallyPeriodic& target) {
  for (u64 j = 0;; ++j) {
    Int v = sv.map.value_at(j) + sv.offset;
    if (v >= 0 && v > static_cast<long>(target.threshold)) break;
    if (v >= 0) {
      u64 vv = v.get_ui();
      if (target.contains(vv)) return true;
    }
    if (j > (1u << 16)) break;
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// Counting

u64 SetSpec::counting(u64 n) const {
  const SetNode& nd = *node_;
  if (auto ep = to_eventually_periodic(*this)) return ep->counting(n);
  switch (nd.kind) {
    case Kind::Sparse:
      return sparse_count_le(nd.map, Int(static_cast<unsigned long>(n)));
    case Kind::Intervals: {
      u64 total = 0;
      Int bound(static_cast<unsigned long>(n));
      for (u64 j = 0;; ++j) {
        Int st = nd.rule.start_at(j);
        if (st > bound) break;
        Int en = st + nd.rule.len_at(j);
        Int hi = en < bound ? en : bound;
        total += Int(hi - st + 1).get_ui();
      }
      return total;
    }
    case Kind::Shift: {
      SetSpec inner(nd.left);
      long long k = nd.offset;
      if (k >= 0) {
        if (n < static_cast<u64>(k)) return 0;
        return inner.counting(n - static_cast<u64>(k));
      }
      u64 j = static_cast<u64>(-k);
      u64 upper = inner.counting(n + j);
      u64 lower = j == 0 ? 0 : inner.counting(j - 1);
      return upper - lower;
    }
    default: {
      u64 c = 0;
      for (u64 i = 0; i <= n; ++i) c += contains(i);
      return c;
    }
  }
}

// ---------------------------------------------------------------------------
// Finiteness

TriBool SetSpec::finite_tb() const {
  const SetNode& nd = *node_;
  if (auto ep = to_eventually_periodic(*this)) return tri_of(ep->is_finite());
  switch (nd.kind) {
    case Kind::Finite:
      return TriBool::Yes;
    case Kind::Cofinite:
    case Kind::Progression:
    case Kind::Sparse:
    case Kind::Intervals:
      return TriBool::No;
    case Kind::Shift:
      return SetSpec(nd.left).finite_tb();
    case Kind::Union:
      return tri_and(SetSpec(nd.left).finite_tb(), SetSpec(nd.right).finite_tb());
    case Kind::Intersection: {
      SetSpec l(nd.left), r(nd.right);
      if (l.finite_tb() == TriBool::Yes || r.finite_tb() == TriBool::Yes) return TriBool::Yes;
      // sparse against an eventually periodic partner
      auto try_pair = [](const SetNode& s, const SetSpec& other) -> TriBool {
        auto sv = as_sparse_view(s);
        if (!sv) return TriBool::Unknown;
        auto ep = to_eventually_periodic(other);
        if (!ep) return TriBool::Unknown;
        auto hits = sparse_hits(*sv, *ep);
        if (hits.any_infinite) return TriBool::No;
        return TriBool::Yes;  // only finitely many parameter values can land in the head
      };
      TriBool t = try_pair(*nd.left, r);
      if (t != TriBool::Unknown) return t;
      t = try_pair(*nd.right, l);
      if (t != TriBool::Unknown) return t;
      // two sparse images
      auto svl = as_sparse_view(*nd.left);
      auto svr = as_sparse_view(*nd.right);
      if (svl && svr && svl->offset == 0 && svr->offset == 0) {
        if (node_equal(*nd.left, *nd.right)) return TriBool::No;
        if (svl->map.kind == SparseMap::Kind::Exp && svr->map.kind == SparseMap::Kind::Exp) {
          // common perfect-power root -> infinite, else only 1 is shared
          auto root_of = [](long long b) {
            for (long long r = 2; r * r <= b; ++r) {
              long long v = r;
              while (v < b) v *= r;
              if (v == b) return r;
            }
            return b;
          };
          return tri_of(root_of(svl->map.base) != root_of(svr->map.base));
        }
      }
      return TriBool::Unknown;
    }
    case Kind::Difference: {
      SetSpec l(nd.left), r(nd.right);
      if (l.finite_tb() == TriBool::Yes) return TriBool::Yes;
      if (r.cofinite_tb() == TriBool::Yes) return TriBool::Yes;
      if (auto sv = as_sparse_view(*nd.left)) {
        if (auto ep = to_eventually_periodic(r)) {
          // A \ B = A ∩ B^c with B^c eventually periodic
          EventuallyPeriodic comp = *ep;
          for (auto& b : comp.residues) b = !b;
          std::vector<u64> ch;
          for (u64 x = 0; x < comp.threshold; ++x)
            if (!ep->contains(x)) ch.push_back(x);
          comp.head = std::move(ch);
          auto hits = sparse_hits(*sv, comp);
          if (hits.any_infinite) return TriBool::No;
          return TriBool::Yes;
        }
      }
      if (l.finite_tb() == TriBool::No && r.finite_tb() == TriBool::Yes) return TriBool::No;
      auto sub = l.subset_of(r, 4096);
      if (sub.value == TriBool::Yes && !sub.prefix_only) return TriBool::Yes;
      return TriBool::Unknown;
    }
    default:
      return TriBool::Unknown;
  }
}

TriBool SetSpec::cofinite_tb() const {
  if (auto ep = to_eventually_periodic(*this))
    return tri_of(ep->residue_count() == ep->modulus);
  const SetNode& nd = *node_;
  switch (nd.kind) {
    case Kind::Cofinite:
      return TriBool::Yes;
    case Kind::Finite:
    case Kind::Sparse:
    case Kind::Intervals:
      return TriBool::No;
    case Kind::Progression:
      return tri_of(nd.a == 1);
    case Kind::Union: {
      TriBool l = SetSpec(nd.left).cofinite_tb(), r = SetSpec(nd.right).cofinite_tb();
      if (l == TriBool::Yes || r == TriBool::Yes) return TriBool::Yes;
      return TriBool::Unknown;
    }
    case Kind::Difference:
      return SetSpec(nd.left).complement().unioned(SetSpec(nd.right)).finite_tb();
    default:
      return complement().finite_tb();
  }
}

// ---------------------------------------------------------------------------
// Density

TriBool SetSpec::density_zero(const Rational& alpha) const {
  if (alpha <= Rational(0) || alpha > Rational(1))
    throw std::invalid_argument("density_zero: alpha must lie in (0,1]");
  if (auto ep = to_eventually_periodic(*this)) return tri_of(ep->is_finite());
  const SetNode& nd = *node_;
  if (auto sv = as_sparse_view(nd)) {
    if (sv->map.kind == SparseMap::Kind::Exp) return TriBool::Yes;
    // count(n) ~ (n/lead)^{1/d}
    Rational inv_deg(1, sv->map.degree());
    return alpha > inv_deg ? TriBool::Yes : TriBool::No;
  }
  switch (nd.kind) {
    case Kind::Intervals:
      if (nd.rule.start_kind == IntervalRule::StartKind::Geometric) return TriBool::Yes;
      return TriBool::No;  // affine starts with constant lengths: positive density
    case Kind::Shift:
      return SetSpec(nd.left).density_zero(alpha);
    case Kind::Union: {
      TriBool l = SetSpec(nd.left).density_zero(alpha), r = SetSpec(nd.right).density_zero(alpha);
      if (l == TriBool::No || r == TriBool::No) return TriBool::No;
      return tri_and(l, r);
    }
    case Kind::Intersection: {
      SetSpec l(nd.left), r(nd.right);
      TriBool lz = l.density_zero(alpha), rz = r.density_zero(alpha);
      if (lz == TriBool::Yes || rz == TriBool::Yes) return TriBool::Yes;
      auto analyse = [&](const SetNode& s, const SetSpec& other) -> TriBool {
        auto sv = as_sparse_view(s);
        if (!sv) return TriBool::Unknown;
        auto ep = to_eventually_periodic(other);
        if (!ep) return TriBool::Unknown;
        auto hits = sparse_hits(*sv, *ep);
        if (!hits.any_infinite) return TriBool::Yes;  // finite
        if (sv->map.kind == SparseMap::Kind::Exp) return TriBool::Yes;
        Rational inv_deg(1, sv->map.degree());
        return alpha > inv_deg ? TriBool::Yes : TriBool::No;
      };
      TriBool t = analyse(*nd.left, r);
      if (t != TriBool::Unknown) return t;
      t = analyse(*nd.right, l);
      if (t != TriBool::Unknown) return t;
      if (finite_tb() == TriBool::Yes) return TriBool::Yes;
      return TriBool::Unknown;
    }
    case Kind::Difference: {
      SetSpec l(nd.left), r(nd.right);
      if (l.density_zero(alpha) == TriBool::Yes) return TriBool::Yes;
      if (r.cofinite_tb() == TriBool::Yes) return TriBool::Yes;
      if (auto sv = as_sparse_view(*nd.left)) {
        return l.intersected(r.complement()).density_zero(alpha);
      }
      auto dl = l.natural_density();
      if (dl && *dl > Rational(0) && r.density_zero(Rational(1)) == TriBool::Yes) return TriBool::No;
      if (finite_tb() == TriBool::Yes) return TriBool::Yes;
      return TriBool::Unknown;
    }
    default:
      return TriBool::Unknown;
  }
}

std::optional<Rational> SetSpec::natural_density() const {
  if (auto ep = to_eventually_periodic(*this))
    return Rational(Int(static_cast<unsigned long>(ep->residue_count())),
                    Int(static_cast<unsigned long>(ep->modulus)));
  const SetNode& nd = *node_;
  if (as_sparse_view(nd)) return Rational(0);
  switch (nd.kind) {
    case Kind::Intervals:
      if (nd.rule.start_kind == IntervalRule::StartKind::Geometric) return Rational(0);
      return Rational(nd.rule.len_c + 1, nd.rule.a);
    case Kind::Shift:
      return SetSpec(nd.left).natural_density();
    case Kind::Union: {
      auto a = SetSpec(nd.left).natural_density();
      auto b = SetSpec(nd.right).natural_density();
      auto ab = SetSpec(nd.left).intersected(SetSpec(nd.right)).natural_density();
      if (a && b && ab) return *a + *b - *ab;
      return std::nullopt;
    }
    case Kind::Intersection: {
      SetSpec l(nd.left), r(nd.right);
      auto a = l.natural_density();
      auto b = r.natural_density();
      if (a && *a == Rational(0)) return Rational(0);
      if (b && *b == Rational(0)) return Rational(0);
      return std::nullopt;
    }
    case Kind::Difference: {
      SetSpec l(nd.left), r(nd.right);
      auto a = l.natural_density();
      if (!a) return std::nullopt;
      auto ab = l.intersected(r).natural_density();
      if (ab) return *a - *ab;
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Subset

SetSpec::SubsetAnswer SetSpec::subset_of(const SetSpec& other, u64 prefix_horizon) const {
  SubsetAnswer ans;
  // structural rules
  if (node_equal(*node_, *other.node_)) {
    ans.value = TriBool::Yes;
    return ans;
  }
  const SetNode& me = *node_;
  const SetNode& them = *other.node_;
  if (me.kind == Kind::Finite) {
    for (u64 e : me.elems)
      if (!other.contains(e)) {
        ans.value = TriBool::No;
        ans.counterexample = e;
        return ans;
      }
    ans.value = TriBool::Yes;
    return ans;
  }
  if ((me.kind == Kind::Intersection || me.kind == Kind::Difference) &&
      (node_equal(*me.left, *other.node_))) {
    ans.value = TriBool::Yes;
    return ans;
  }
  if (me.kind == Kind::Intersection && node_equal(*me.right, *other.node_)) {
    ans.value = TriBool::Yes;
    return ans;
  }
  if (them.kind == Kind::Union &&
      (node_equal(*node_, *them.left) || node_equal(*node_, *them.right))) {
    ans.value = TriBool::Yes;
    return ans;
  }
  auto epa = to_eventually_periodic(*this);
  auto epb = to_eventually_periodic(other);
  if (epa && epb) {
    u64 m = lcm_u64(epa->modulus, epb->modulus);
    u64 t = std::max(epa->threshold, epb->threshold);
    if (m != 0) {
      auto la = ep_lift(*epa, m, t);
      auto lb = ep_lift(*epb, m, t);
      if (la && lb) {
        for (u64 h : la->head)
          if (!lb->contains(h)) {
            ans.value = TriBool::No;
            ans.counterexample = h;
            return ans;
          }
        for (u64 r = 0; r < m; ++r)
          if (la->residues[r] && !lb->residues[r]) {
            ans.value = TriBool::No;
            ans.counterexample = t + ((r + m - t % m) % m);
            return ans;
          }
        ans.value = TriBool::Yes;
        return ans;
      }
    }
  }
  if (auto sv = as_sparse_view(me)) {
    if (epb) {
      // every value beyond the head must land in a residue of the target
      auto hits = sparse_hits(*sv, *epb);
      bool all_classes = hits.infinite_hits == hits.total_classes;
      if (all_classes) {
        // check parameter values whose image is below the target threshold
        for (u64 j = 0;; ++j) {
          Int v = sv->map.value_at(j) + sv->offset;
          if (v >= static_cast<long>(epb->threshold)) break;
          if (v >= 0 && !epb->contains(v.get_ui())) {
            ans.value = TriBool::No;
            ans.counterexample = v.get_ui();
            return ans;
          }
          if (j > (1u << 16)) break;
        }
        ans.value = TriBool::Yes;
        return ans;
      }
    }
  }
  // prefix fallback
  for (u64 i = 0; i <= prefix_horizon; ++i) {
    if (contains(i) && !other.contains(i)) {
      ans.value = TriBool::No;
      ans.counterexample = i;
      return ans;
    }
  }
  ans.value = TriBool::Yes;
  ans.prefix_only = true;
  return ans;
}

// ---------------------------------------------------------------------------
// Convexity / gaps

std::vector<MaxInterval> interval_decomposition(const SetSpec& a, u64 horizon, bool drop_open_tail) {
  std::vector<MaxInterval> out;
  bool in_run = false;
  u64 start = 0;
  for (u64 i = 0; i <= horizon; ++i) {
    bool m = a.contains(i);
    if (m && !in_run) {
      in_run = true;
      start = i;
    } else if (!m && in_run) {
      in_run = false;
      out.push_back({start, i - 1});
    }
  }
  if (in_run && !drop_open_tail) out.push_back({start, horizon});
  return out;
}

namespace {

struct RunScan {
  u64 max_run = 0;
  u64 max_gap = 0;  // includes the leading gap [0, first member)
};

RunScan scan_runs(const SetSpec& a, u64 lo, u64 hi) {
  RunScan rs;
  u64 run = 0, gap = 0;
  for (u64 i = lo; i <= hi; ++i) {
    if (a.contains(i)) {
      run += 1;
      rs.max_gap = std::max(rs.max_gap, gap);
      gap = 0;
    } else {
      gap += 1;
      rs.max_run = std::max(rs.max_run, run);
      run = 0;
    }
  }
  rs.max_run = std::max(rs.max_run, run);
  rs.max_gap = std::max(rs.max_gap, gap);
  return rs;
}

// longest circular run of marked (or unmarked) residues
u64 circular_run(const std::vector<char>& bits, bool value) {
  u64 m = bits.size();
  u64 best = 0, cur = 0;
  for (u64 i = 0; i < 2 * m; ++i) {
    if ((bits[i % m] != 0) == value) {
      cur += 1;
      if (cur >= m) return m;  // full circle
      best = std::max(best, cur);
    } else {
      cur = 0;
    }
  }
  return best;
}

}  // namespace

ConvexityGap convexity_and_gap(const SetSpec& a, u64 horizon) {
  ConvexityGap out;
  TriBool fin = a.finite_tb();
  TriBool cof = a.cofinite_tb();
  if (fin == TriBool::Yes || cof == TriBool::Yes) {
    out.degenerate = true;
    out.note = fin == TriBool::Yes ? "finite set" : "cofinite set";
    RunScan rs = scan_runs(a, 0, horizon);
    out.c = {ExtentResult::Kind::LowerBound, rs.max_run, out.note};
    out.g = {ExtentResult::Kind::LowerBound, rs.max_gap, out.note};
    if (fin == TriBool::Yes) out.g = {ExtentResult::Kind::Infinite, 0, "finite set has a final gap"};
    return out;
  }

  if (auto ep = to_eventually_periodic(a)) {
    u64 m = ep->modulus;
    u64 t = ep->threshold;
    // runs fully inside the head window are found by scanning; periodic runs
    // come from the circular pattern (every run has length < m here, since
    // all-residues would mean cofinite)
    u64 window = t + 2 * m + 2;
    RunScan rs = scan_runs(a, 0, window);
    u64 c_per = circular_run(ep->residues, true);
    u64 g_per = circular_run(ep->residues, false);
    out.c = {ExtentResult::Kind::Exact, std::max(rs.max_run, c_per), "eventually periodic pattern"};
    out.g = {ExtentResult::Kind::Exact, std::max(rs.max_gap, g_per), "eventually periodic pattern"};
    return out;
  }

  const SetNode& nd = a.node();
  if (auto sv = as_sparse_view(nd)) {
    // consecutive values eventually differ by >= 2, so intervals collapse to
    // singletons past a computable point and gaps grow without bound; scan
    // past a bound that clears every root of the difference polynomial
    u64 scan_bound = 4;
    if (sv->map.kind == SparseMap::Kind::Poly) {
      // the difference polynomial's coefficients are bounded by 2^deg * max|c|
      long long mx = 1;
      for (long long c : sv->map.coeffs) mx = std::max(mx, std::llabs(c));
      unsigned deg = sv->map.degree();
      long long factor = 1LL << std::min<unsigned>(deg, 20);
      scan_bound = static_cast<u64>(std::min<long long>(4 + 4 * mx * factor, 1LL << 22));
    }
    u64 j = 0;
    for (u64 t = 0; t <= scan_bound; ++t) {
      Int d = sv->map.value_at(t + 1) - sv->map.value_at(t);
      if (d < 2) j = t + 1;
    }
    Int stable = sv->map.value_at(j + 1) + sv->offset;
    u64 scan_to = stable >= 0 && stable < static_cast<long>(horizon) ? stable.get_ui() + 1 : horizon;
    RunScan rs = scan_runs(a, 0, scan_to);
    out.c = {ExtentResult::Kind::Exact, std::max<u64>(rs.max_run, 1), "image gaps grow; intervals eventually singletons"};
    out.g = {ExtentResult::Kind::Infinite, 0, "consecutive image gaps are unbounded"};
    return out;
  }
  if (nd.kind == Kind::Intervals) {
    const IntervalRule& r = nd.rule;
    if (r.len_a > 0) {
      out.c = {ExtentResult::Kind::Infinite, 0, "interval lengths are unbounded"};
    } else {
      out.c = {ExtentResult::Kind::Exact, static_cast<u64>(r.len_c) + 1, "constant interval lengths"};
    }
    if (r.start_kind == IntervalRule::StartKind::Geometric) {
      out.g = {ExtentResult::Kind::Infinite, 0, "geometric starts leave unbounded gaps"};
    } else {
      u64 interior = static_cast<u64>(r.a - r.len_c - 1);
      u64 leading = static_cast<u64>(r.c);
      out.g = {ExtentResult::Kind::Exact, std::max(interior, leading), "constant interval spacing"};
    }
    return out;
  }

  RunScan rs = scan_runs(a, 0, horizon);
  out.c = {ExtentResult::Kind::LowerBound, rs.max_run, "empirical scan"};
  out.g = {ExtentResult::Kind::LowerBound, rs.max_gap, "empirical scan"};
  return out;
}

// ---------------------------------------------------------------------------
// Alternating half

std::optional<SetSpec> alternating_half(const SetSpec& a, int parity) {
  const SetNode& nd = a.node();
  switch (nd.kind) {
    case Kind::Finite: {
      std::vector<u64> out;
      for (size_t i = static_cast<size_t>(parity); i < nd.elems.size(); i += 2)
        out.push_back(nd.elems[i]);
      return SetSpec::finite(std::move(out));
    }
    case Kind::Progression:
      return SetSpec::progression(2 * nd.a, nd.r + static_cast<u64>(parity) * nd.a);
    case Kind::Sparse: {
      if (nd.map.kind == SparseMap::Kind::Exp) {
        if (parity != 0) return std::nullopt;
        long long b2 = nd.map.base * nd.map.base;
        return SetSpec::powers(b2);
      }
      // compose p(2j + parity)
      const auto& cs = nd.map.coeffs;
      size_t d = cs.size();
      std::vector<long long> out(d, 0);
      // expand sum c_i (2j+p)^i via binomial; coefficients stay small here
      std::vector<std::vector<long long>> binom(d, std::vector<long long>(d, 0));
      for (size_t i = 0; i < d; ++i) {
        binom[i][0] = 1;
        for (size_t k = 1; k <= i; ++k)
          binom[i][k] = binom[i - 1][k - 1] + (k <= i - 1 ? binom[i - 1][k] : 0);
      }
      for (size_t i = 0; i < d; ++i) {
        long long pw_p = 1;
        for (size_t k = 0; k <= i; ++k) {
          // term: c_i * C(i,k) * (2j)^k * parity^{i-k}
          long long coeff = cs[i] * binom[i][k];
          long long parity_pow = 1;
          for (size_t t = 0; t < i - k; ++t) parity_pow *= parity;
          long long two_pow = 1;
          for (size_t t = 0; t < k; ++t) two_pow *= 2;
          out[k] += coeff * two_pow * parity_pow;
        }
        (void)pw_p;
      }
      SparseMap m;
      m.kind = SparseMap::Kind::Poly;
      m.coeffs = std::move(out);
      return SetSpec::sparse(std::move(m));
    }
    case Kind::Shift: {
      if (nd.offset < 0) return std::nullopt;
      auto inner = alternating_half(SetSpec(nd.left), parity);
      if (!inner) return std::nullopt;
      return inner->shifted(nd.offset);
    }
    default:
      return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Printing

std::string SetSpec::str() const {
  const SetNode& nd = *node_;
  std::ostringstream os;
  switch (nd.kind) {
    case Kind::Finite: {
      os << "finite";
      for (u64 e : nd.elems) os << " " << e;
      if (nd.elems.empty()) os << " (empty)";
      return os.str();
    }
    case Kind::Cofinite: {
      os << "cofinite";
      for (u64 e : nd.elems) os << " " << e;
      return os.str();
    }
    case Kind::Progression:
      if (nd.a == 1 && nd.r == 0) return "all";
      if (nd.a == 1 && nd.r == 1) return "positives";
      if (nd.a == 2 && nd.r == 0) return "evens";
      if (nd.a == 2 && nd.r == 1) return "odds";
      os << "progression " << nd.a << " " << nd.r;
      return os.str();
    case Kind::Sparse:
      return nd.map.str();
    case Kind::Intervals:
      return nd.rule.str();
    case Kind::Shift:
      os << "shift(" << SetSpec(nd.left).str() << "; " << nd.offset << ")";
      return os.str();
    case Kind::Union:
      os << "union(" << SetSpec(nd.left).str() << "; " << SetSpec(nd.right).str() << ")";
      return os.str();
    case Kind::Intersection:
      os << "intersect(" << SetSpec(nd.left).str() << "; " << SetSpec(nd.right).str() << ")";
      return os.str();
    case Kind::Difference:
      os << "diff(" << SetSpec(nd.left).str() << "; " << SetSpec(nd.right).str() << ")";
      return os.str();
  }
  return "?";
}

}  // namespace torsionlab
