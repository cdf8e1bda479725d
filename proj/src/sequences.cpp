#include "torsionlab/sequences.hpp"

#include <algorithm>
#include <sstream>

namespace torsionlab {

// ---------------------------------------------------------------------------
// RatioRule

RatioRule RatioRule::constant(u64 b) {
  if (b < 2) throw std::invalid_argument("RatioRule: constant ratio must be >= 2");
  RatioRule r;
  r.kind_ = Kind::Constant;
  r.values_ = {b};
  return r;
}

RatioRule RatioRule::periodic(std::vector<u64> values) {
  if (values.empty()) throw std::invalid_argument("RatioRule: empty period");
  for (u64 v : values)
    if (v < 2) throw std::invalid_argument("RatioRule: periodic ratios must be >= 2");
  RatioRule r;
  r.kind_ = Kind::Periodic;
  r.values_ = std::move(values);
  return r;
}

RatioRule RatioRule::affine(long long a, long long c) {
  if (a < 1) throw std::invalid_argument("RatioRule: affine slope must be >= 1");
  RatioRule r;
  r.kind_ = Kind::Affine;
  r.a_ = a;
  r.c_ = c;
  return r;
}

RatioRule RatioRule::power(u64 base) {
  if (base < 2) throw std::invalid_argument("RatioRule: power base must be >= 2");
  RatioRule r;
  r.kind_ = Kind::Power;
  r.base_ = base;
  return r;
}

RatioRule RatioRule::piecewise(std::vector<std::pair<SetSpec, RatioRule>> pieces) {
  if (pieces.empty()) throw std::invalid_argument("RatioRule: piecewise needs at least one piece");
  RatioRule r;
  r.kind_ = Kind::Piecewise;
  r.pieces_ = std::move(pieces);
  // the pieces must cover every index; verified on a prefix
  for (u64 n = 1; n <= 512; ++n) {
    bool covered = false;
    for (const auto& [set, rule] : r.pieces_)
      if (set.contains(n)) {
        covered = true;
        break;
      }
    if (!covered)
      throw std::invalid_argument("RatioRule: piecewise pieces do not cover index " + std::to_string(n));
  }
  return r;
}

RatioRule RatioRule::explicit_prefix(std::vector<u64> head, RatioRule tail) {
  for (u64 v : head)
    if (v < 2) throw std::invalid_argument("RatioRule: prefix ratios must be >= 2");
  RatioRule r;
  r.kind_ = Kind::ExplicitPrefix;
  r.values_ = std::move(head);
  r.tail_ = std::make_shared<RatioRule>(std::move(tail));
  return r;
}

Int RatioRule::at(u64 n) const {
  if (n < 1) throw std::invalid_argument("RatioRule: ratios are defined for n >= 1");
  switch (kind_) {
    case Kind::Constant:
      return Int(static_cast<unsigned long>(values_[0]));
    case Kind::Periodic:
      return Int(static_cast<unsigned long>(values_[(n - 1) % values_.size()]));
    case Kind::Affine: {
      Int v = Int(a_) * Int(static_cast<unsigned long>(n)) + Int(c_);
      return v < 2 ? Int(2) : v;
    }
    case Kind::Power: {
      Int v;
      mpz_ui_pow_ui(v.get_mpz_t(), static_cast<unsigned long>(base_), static_cast<unsigned long>(n));
      return v < 2 ? Int(2) : v;
    }
    case Kind::Piecewise:
      for (const auto& [set, rule] : pieces_)
        if (set.contains(n)) return rule.at(n);
      throw std::logic_error("RatioRule: piecewise gap at index " + std::to_string(n));
    case Kind::ExplicitPrefix:
      if (n <= values_.size()) return Int(static_cast<unsigned long>(values_[n - 1]));
      return tail_->at(n);
  }
  throw std::logic_error("RatioRule: bad kind");
}

SetSpec RatioRule::threshold_le(u64 k) const {
  switch (kind_) {
    case Kind::Constant:
      return values_[0] <= k ? SetSpec::positives() : SetSpec::empty();
    case Kind::Periodic: {
      SetSpec acc = SetSpec::empty();
      u64 p = values_.size();
      for (u64 i = 0; i < p; ++i)
        if (values_[i] <= k) acc = acc.unioned(SetSpec::progression(p, i + 1));
      return acc;
    }
    case Kind::Affine: {
      if (k < 2) return SetSpec::empty();
      // max(2, a n + c) <= k  <=>  a n + c <= k (k >= 2 absorbs the clip)
      long long top = (static_cast<long long>(k) - c_) / a_;
      std::vector<u64> elems;
      for (long long n = 1; n <= top; ++n)
        if (a_ * n + c_ <= static_cast<long long>(k)) elems.push_back(static_cast<u64>(n));
      return SetSpec::finite(std::move(elems));
    }
    case Kind::Power: {
      if (k < 2) return SetSpec::empty();
      std::vector<u64> elems;
      Int v(static_cast<unsigned long>(base_));
      for (u64 n = 1; v <= static_cast<long>(k) || n == 1; ++n) {
        Int b = v < 2 ? Int(2) : v;
        if (b <= static_cast<long>(k)) elems.push_back(n);
        if (v > static_cast<long>(k)) break;
        v *= static_cast<long>(base_);
      }
      return SetSpec::finite(std::move(elems));
    }
    case Kind::Piecewise: {
      SetSpec acc = SetSpec::empty();
      SetSpec earlier = SetSpec::empty();
      for (const auto& [set, rule] : pieces_) {
        SetSpec region = set.minus(earlier);
        acc = acc.unioned(region.intersected(rule.threshold_le(k)));
        earlier = earlier.unioned(set);
      }
      return acc;
    }
    case Kind::ExplicitPrefix: {
      std::vector<u64> head;
      for (u64 i = 0; i < values_.size(); ++i)
        if (values_[i] <= k) head.push_back(i + 1);
      SetSpec beyond = SetSpec::progression(1, values_.size() + 1);
      return SetSpec::finite(std::move(head)).unioned(beyond.intersected(tail_->threshold_le(k)));
    }
  }
  throw std::logic_error("RatioRule: bad kind");
}

u64 RatioRule::stable_bound() const {
  switch (kind_) {
    case Kind::Constant:
      return values_[0];
    case Kind::Periodic:
      return *std::max_element(values_.begin(), values_.end());
    case Kind::Affine:
    case Kind::Power:
      return 2;  // clip floor; the rule exceeds any bound beyond a finite prefix
    case Kind::Piecewise: {
      u64 k = 2;
      for (const auto& [set, rule] : pieces_) k = std::max(k, rule.stable_bound());
      return k;
    }
    case Kind::ExplicitPrefix: {
      u64 k = tail_->stable_bound();
      for (u64 v : values_) k = std::max(k, v);
      return k;
    }
  }
  return 2;
}

std::string RatioRule::str() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Constant:
      os << "constant " << values_[0];
      break;
    case Kind::Periodic:
      os << "periodic";
      for (u64 v : values_) os << " " << v;
      break;
    case Kind::Affine:
      os << "affine " << a_ << " " << c_;
      break;
    case Kind::Power:
      os << "power " << base_;
      break;
    case Kind::Piecewise: {
      os << "piecewise ";
      bool first = true;
      for (const auto& [set, rule] : pieces_) {
        if (!first) os << "; ";
        os << set.str() << ": " << rule.str();
        first = false;
      }
      break;
    }
    case Kind::ExplicitPrefix:
      os << "prefix";
      for (u64 v : values_) os << " " << v;
      os << " then " << tail_->str();
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// ArithmeticSequence

ArithmeticSequence::ArithmeticSequence(RatioRule ratios)
    : state_(std::make_shared<State>(std::move(ratios))) {
  state_->products.push_back(Int(1));  // u_0 = 1
}

Int ArithmeticSequence::u_of(u64 n) const {
  std::lock_guard<std::mutex> lock(state_->mu);
  auto& products = state_->products;
  while (products.size() <= n) {
    u64 next = products.size();
    products.push_back(products.back() * state_->ratios.at(next));
  }
  return products[n];
}

SetSpec ArithmeticSequence::bounded_part() const {
  return state_->ratios.threshold_le(state_->ratios.stable_bound());
}

SetSpec ArithmeticSequence::divergent_part() const {
  return SetSpec::positives().minus(bounded_part());
}

// ---------------------------------------------------------------------------
// Behavior classification

namespace {

RatioBehavior analyze(const RatioRule& rule, const SetSpec& a);

RatioBehavior bounded(u64 sup) { return {RatioBehavior::Kind::Bounded, sup}; }
RatioBehavior divergent() { return {RatioBehavior::Kind::Divergent, 0}; }
RatioBehavior mixed() { return {RatioBehavior::Kind::Mixed, 0}; }
RatioBehavior unknown() { return {RatioBehavior::Kind::Unknown, 0}; }

RatioBehavior combine(const RatioBehavior& x, const RatioBehavior& y) {
  using K = RatioBehavior::Kind;
  if (x.kind == K::Unknown || y.kind == K::Unknown) return unknown();
  if (x.kind == K::Mixed || y.kind == K::Mixed) return mixed();
  if (x.kind != y.kind) return mixed();
  if (x.kind == K::Bounded) return bounded(std::max(x.sup, y.sup));
  return divergent();
}

RatioBehavior analyze(const RatioRule& rule, const SetSpec& a) {
  using RKind = RatioRule::Kind;
  switch (rule.kind()) {
    case RKind::Constant:
      return bounded(rule.values()[0]);
    case RKind::Periodic: {
      if (auto ep = to_eventually_periodic(a)) {
        u64 p = rule.values().size();
        u64 m = std::lcm(ep->modulus, p);
        u64 sup = 2;
        bool any = false;
        // residue classes of the lcm that A hits beyond its threshold
        for (u64 r = 0; r < m; ++r) {
          if (!ep->residues[r % ep->modulus]) continue;
          // indices n ≡ r (mod m), n >= 1: ratio value fixed by (n-1) mod p
          u64 idx = (r + m - 1) % p;  // (n - 1) mod p for n ≡ r
          sup = std::max(sup, rule.values()[idx]);
          any = true;
        }
        u64 head_max = 0;
        for (u64 h : ep->head)
          if (h >= 1) head_max = std::max(head_max, rule.values()[(h - 1) % p]);
        if (!any) return bounded(std::max<u64>(head_max, 2));
        return bounded(std::max(sup, head_max));
      }
      return bounded(*std::max_element(rule.values().begin(), rule.values().end()));
    }
    case RKind::Affine:
    case RKind::Power:
      return divergent();
    case RKind::Piecewise: {
      RatioBehavior acc = unknown();
      bool first = true;
      SetSpec earlier = SetSpec::empty();
      for (const auto& [set, sub] : rule.pieces()) {
        SetSpec region = a.intersected(set.minus(earlier));
        earlier = earlier.unioned(set);
        TriBool inf = region.infinite_tb();
        if (inf == TriBool::Unknown) return unknown();
        if (inf == TriBool::No) continue;
        RatioBehavior rb = analyze(sub, region);
        acc = first ? rb : combine(acc, rb);
        first = false;
      }
      if (first) return unknown();  // no piece met A infinitely: A finite, handled by caller
      return acc;
    }
    case RKind::ExplicitPrefix: {
      SetSpec beyond = a.intersected(SetSpec::progression(1, rule.values().size() + 1));
      RatioBehavior rb = analyze(rule.tail(), beyond);
      if (rb.kind == RatioBehavior::Kind::Bounded) {
        for (u64 i = 0; i < rule.values().size(); ++i)
          if (a.contains(i + 1)) rb.sup = std::max(rb.sup, rule.values()[i]);
      }
      return rb;
    }
  }
  return unknown();
}

}  // namespace

RatioBehavior classify_ratio_behavior(const ArithmeticSequence& seq, const SetSpec& a) {
  TriBool fin = a.finite_tb();
  if (fin == TriBool::Yes) {
    u64 sup = 0;
    u64 horizon = a.kind() == SetSpec::Kind::Finite ? ~u64{0} : (1u << 18);
    for (u64 n : a.prefix(horizon)) {
      if (n < 1) continue;
      Int b = seq.ratio(n);
      if (b.fits_ulong_p()) sup = std::max<u64>(sup, b.get_ui());
    }
    return {RatioBehavior::Kind::Bounded, sup};
  }
  if (fin == TriBool::Unknown) return {RatioBehavior::Kind::Unknown, 0};
  return analyze(seq.ratios(), a.intersected(SetSpec::positives()));
}

BetaDegree beta_degree(const ArithmeticSequence& seq, const SetSpec& a, unsigned k_max) {
  for (unsigned k = 0; k <= k_max; ++k) {
    RatioBehavior rb = classify_ratio_behavior(seq, s_k(a, k));
    switch (rb.kind) {
      case RatioBehavior::Kind::Bounded:
        continue;
      case RatioBehavior::Kind::Divergent:
      case RatioBehavior::Kind::Mixed:
        return {BetaDegree::Kind::Finite, static_cast<long long>(k) - 1};
      case RatioBehavior::Kind::Unknown:
        return {BetaDegree::Kind::Unknown, 0};
    }
  }
  return {BetaDegree::Kind::AtLeast, static_cast<long long>(k_max)};
}

// ---------------------------------------------------------------------------
// General sequences

GeneralSequence dk_sequence() {
  // index i sits in block n (1-based) at offset k-1, term k * n!
  auto factorial_cache = std::make_shared<std::vector<Int>>(std::vector<Int>{Int(1)});
  auto mu = std::make_shared<std::mutex>();
  return GeneralSequence([factorial_cache, mu](u64 i) {
    u64 n = 1;
    u64 before = 0;  // terms before block n
    while (before + n <= i) {
      before += n;
      n += 1;
    }
    u64 k = i - before + 1;
    std::lock_guard<std::mutex> lock(*mu);
    auto& fc = *factorial_cache;
    while (fc.size() <= n) fc.push_back(fc.back() * static_cast<unsigned long>(fc.size()));
    return Int(static_cast<unsigned long>(k)) * fc[n];
  });
}

bool is_arithmetic_prefix(const GeneralSequence& s, u64 count) {
  if (count == 0) return true;
  Int prev = s.term(0);
  if (prev != 1) return false;
  for (u64 i = 1; i < count; ++i) {
    Int cur = s.term(i);
    if (cur <= prev) return false;
    if (cur % prev != 0) return false;
    prev = cur;
  }
  return true;
}

}  // namespace torsionlab
