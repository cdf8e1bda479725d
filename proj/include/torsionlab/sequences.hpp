#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "torsionlab/rational.hpp"
#include "torsionlab/sets.hpp"
#include "torsionlab/tribool.hpp"

namespace torsionlab {

/// Closed symbolic grammar for ratio sequences (b_n), n >= 1.  Boundedness
/// and divergence questions are decidable on this fragment; arbitrary
/// callables are only admitted in GeneralSequence.
///
/// Affine and power rules are clipped below at 2 so every rule yields b_n >= 2.
class RatioRule {
 public:
  enum class Kind { Constant, Periodic, Affine, Power, Piecewise, ExplicitPrefix };

  static RatioRule constant(u64 b);
  static RatioRule periodic(std::vector<u64> values);
  static RatioRule affine(long long a, long long c);  // b_n = max(2, a*n + c), a >= 1
  static RatioRule power(u64 base);                   // b_n = max(2, base^n)
  static RatioRule piecewise(std::vector<std::pair<SetSpec, RatioRule>> pieces);
  static RatioRule explicit_prefix(std::vector<u64> head, RatioRule tail);

  Kind kind() const { return kind_; }
  Int at(u64 n) const;  // b_n, n >= 1

  /// {n >= 1 : b_n <= k} as a SetSpec.
  SetSpec threshold_le(u64 k) const;
  /// Bound K* such that {b_n <= k} and {b_n <= K*} differ only finitely for
  /// every k >= K*: the ratio values below K* come from bounded leaves, the
  /// values above come from pointwise-divergent leaves.
  u64 stable_bound() const;

  std::string str() const;

  const std::vector<std::pair<SetSpec, RatioRule>>& pieces() const { return pieces_; }
  const std::vector<u64>& values() const { return values_; }
  long long affine_a() const { return a_; }
  long long affine_c() const { return c_; }
  u64 power_base() const { return base_; }
  const RatioRule& tail() const { return *tail_; }

 private:
  RatioRule() = default;
  Kind kind_ = Kind::Constant;
  std::vector<u64> values_;  // Constant (single), Periodic, ExplicitPrefix head
  long long a_ = 0, c_ = 0;
  u64 base_ = 0;
  std::vector<std::pair<SetSpec, RatioRule>> pieces_;
  std::shared_ptr<RatioRule> tail_;
};

/// Arithmetic sequence u with u_0 = 1, u_n = b_n * u_{n-1}.  Immutable after
/// construction except the product cache, which is a thread-safe idempotent
/// memo.  Copies share the cache.
class ArithmeticSequence {
 public:
  explicit ArithmeticSequence(RatioRule ratios);

  const RatioRule& ratios() const { return state_->ratios; }
  Int ratio(u64 n) const { return state_->ratios.at(n); }
  Int u_of(u64 n) const;

  SetSpec bounded_part() const;   // {n >= 1 : b_n <= K*}
  SetSpec divergent_part() const; // positives \ bounded_part
  std::string str() const { return state_->ratios.str(); }

 private:
  struct State {
    RatioRule ratios;
    std::mutex mu;
    std::vector<Int> products;  // products[n] = u_n
    explicit State(RatioRule r) : ratios(std::move(r)) {}
  };
  std::shared_ptr<State> state_;
};

/// Behavior of (b_n) restricted to a set.
struct RatioBehavior {
  enum class Kind { Bounded, Divergent, Mixed, Unknown };
  Kind kind = Kind::Unknown;
  u64 sup = 0;  // for Bounded: least upper bound the analysis certifies
};

RatioBehavior classify_ratio_behavior(const ArithmeticSequence& seq, const SetSpec& a);

/// Degree of b-boundedness: the largest k <= k_max such that S_0(A)..S_k(A)
/// are all b-bounded; AtLeast(k_max) when the cutoff never trips.
struct BetaDegree {
  enum class Kind { Finite, AtLeast, Unknown };
  Kind kind = Kind::Unknown;
  long long value = 0;
};

BetaDegree beta_degree(const ArithmeticSequence& seq, const SetSpec& a, unsigned k_max);

/// Integer sequence with no arithmetic structure assumed; oracle-only.
class GeneralSequence {
 public:
  explicit GeneralSequence(std::function<Int(u64)> term) : term_(std::move(term)) {}
  Int term(u64 i) const { return term_(i); }

 private:
  std::function<Int(u64)> term_;
};

/// The sequence (1!, 2!, 2*2!, 3!, 2*3!, 3*3!, 4!, ...): block n lists
/// k * n! for k = 1..n.  Not arithmetic (4 does not divide 6).
GeneralSequence dk_sequence();

/// Checks u_0 = 1, strict increase and divisibility on a prefix.
bool is_arithmetic_prefix(const GeneralSequence& s, u64 count);

}  // namespace torsionlab
