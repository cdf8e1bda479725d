#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "torsionlab/rational.hpp"
#include "torsionlab/tribool.hpp"

namespace torsionlab {

/// Strictly increasing integer map backing a SparseImage set: either an
/// integer polynomial of degree >= 2 with positive leading coefficient, or
/// base^n with base >= 2.
struct SparseMap {
  enum class Kind { Poly, Exp };
  Kind kind = Kind::Poly;
  std::vector<long long> coeffs;  // Poly: coeffs[i] * n^i
  long long base = 0;             // Exp

  Int value_at(u64 n) const;
  unsigned degree() const { return kind == Kind::Poly ? unsigned(coeffs.size() - 1) : 0; }
  long long leading() const { return kind == Kind::Poly ? coeffs.back() : base; }
  std::string str() const;
};

/// Family of disjoint intervals [start(n), start(n) + len(n)].
/// start is affine (a*n + c) or geometric (base^n); len is affine, >= 0.
struct IntervalRule {
  enum class StartKind { Affine, Geometric };
  StartKind start_kind = StartKind::Geometric;
  long long a = 0, c = 0;  // affine start
  long long base = 0;      // geometric start
  long long len_a = 0, len_c = 0;

  Int start_at(u64 n) const;
  Int len_at(u64 n) const { return Int(len_a) * Int(n) + Int(len_c); }
  std::string str() const;
};

namespace detail {
struct SetNode;
}

/// Finitely presented subset of N with total membership, exact counting and
/// prefix enumeration.  Boolean combinations are kept as trees and evaluated
/// lazily; analysis routines work on the decidable fragment and answer
/// Unknown outside it.
class SetSpec {
 public:
  enum class Kind {
    Finite,
    Cofinite,
    Progression,
    Sparse,
    Intervals,
    Shift,
    Union,
    Intersection,
    Difference
  };

  SetSpec();  // empty set

  static SetSpec finite(std::vector<u64> elems);
  static SetSpec empty() { return finite({}); }
  static SetSpec cofinite(std::vector<u64> missing);
  static SetSpec naturals();   // {0,1,2,...}
  static SetSpec positives();  // {1,2,3,...}
  static SetSpec progression(u64 a, u64 r);  // {a*n + r : n >= 0}, a >= 1
  static SetSpec evens() { return progression(2, 0); }
  static SetSpec odds() { return progression(2, 1); }
  static SetSpec sparse(SparseMap f);
  static SetSpec squares();
  static SetSpec cubes();
  static SetSpec powers(long long base);
  static SetSpec intervals(IntervalRule rule);

  SetSpec shifted(long long k) const;
  SetSpec unioned(const SetSpec& o) const;
  SetSpec intersected(const SetSpec& o) const;
  SetSpec minus(const SetSpec& o) const;
  SetSpec complement() const;  // N \ A

  Kind kind() const;

  bool contains(u64 n) const;
  /// Sorted members <= up_to.
  std::vector<u64> prefix(u64 up_to) const;
  /// |A ∩ [0, n]|, exact (formula where the shape allows, else enumeration).
  u64 counting(u64 n) const;

  TriBool finite_tb() const;
  TriBool infinite_tb() const { return tri_not(finite_tb()); }
  TriBool cofinite_tb() const;

  /// Symbolic subset test; prefix_fallback verifies on [0, horizon] when the
  /// fragment cannot decide, reporting Yes with prefix_only set.
  struct SubsetAnswer {
    TriBool value = TriBool::Unknown;
    bool prefix_only = false;
    std::optional<u64> counterexample;
  };
  SubsetAnswer subset_of(const SetSpec& other, u64 prefix_horizon = 4096) const;

  /// Whether the upper density of order alpha is provably zero / provably
  /// positive. alpha in (0,1].
  TriBool density_zero(const Rational& alpha) const;
  /// The natural density when it exists and the fragment knows it.
  std::optional<Rational> natural_density() const;

  std::string str() const;

  const detail::SetNode& node() const { return *node_; }

 private:
  explicit SetSpec(std::shared_ptr<const detail::SetNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::SetNode> node_;
  friend std::optional<SetSpec> alternating_half(const SetSpec& a, int parity);
};

SetSpec shift(const SetSpec& a, long long k);

/// S_k(E) = union of E+0 .. E+k.
SetSpec s_k(const SetSpec& e, unsigned k);

struct NotDecreasingError : std::runtime_error {
  explicit NotDecreasingError(const std::string& w) : std::runtime_error(w) {}
};

/// C_k(alpha) = union of A_j + j for j = 0..k; the chain must be decreasing
/// (checked on a prefix).
SetSpec c_k_chain(const std::vector<SetSpec>& chain, unsigned k, u64 check_horizon = 1024);

/// Exact value, infinity certificate, or empirical lower bound.
struct ExtentResult {
  enum class Kind { Exact, Infinite, LowerBound };
  Kind kind = Kind::LowerBound;
  u64 value = 0;
  std::string certificate;
};

struct ConvexityGap {
  ExtentResult c, g;
  bool degenerate = false;  // finite or cofinite input
  std::string note;
};

/// Convexity number c(A) = sup maximal-interval length and gap number
/// g(A) = sup gap length (counting the leading gap [0, min A)).
ConvexityGap convexity_and_gap(const SetSpec& a, u64 horizon);

struct MaxInterval {
  u64 lo, hi;
};
/// Maximal intervals of A within [0, horizon]; the last interval is dropped
/// if it might continue past the horizon.
std::vector<MaxInterval> interval_decomposition(const SetSpec& a, u64 horizon, bool drop_open_tail = true);

/// Eventually periodic normal form: members < threshold listed explicitly,
/// members >= threshold are exactly the residue classes marked true.
struct EventuallyPeriodic {
  u64 modulus = 1;
  std::vector<char> residues;
  u64 threshold = 0;
  std::vector<u64> head;  // sorted members < threshold

  u64 residue_count() const;
  bool contains(u64 n) const;
  u64 counting(u64 n) const;
  bool is_finite() const { return residue_count() == 0; }
};

/// Normalizes a spec tree into EP form when every leaf is Finite / Cofinite /
/// Progression (possibly shifted / combined).  nullopt outside the fragment
/// or if the modulus blows past an internal cap.
std::optional<EventuallyPeriodic> to_eventually_periodic(const SetSpec& a);

/// Picks out every other member of A by rank: {a_0, a_2, ...} (parity 0) or
/// {a_1, a_3, ...} (parity 1).  Only shapes closed under this operation are
/// supported (Finite, Progression, Sparse); nullopt otherwise.
std::optional<SetSpec> alternating_half(const SetSpec& a, int parity);

}  // namespace torsionlab
