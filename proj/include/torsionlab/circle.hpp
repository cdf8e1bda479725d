#pragma once

#include <stdexcept>
#include <utility>

#include "torsionlab/rational.hpp"

namespace torsionlab {

struct TooWideError : std::runtime_error {
  explicit TooWideError(const std::string& what) : std::runtime_error(what) {}
};

/// Fractional-part representative of a point of the circle R/Z, kept in [0,1).
class CircleValue {
 public:
  explicit CircleValue(Rational rep) : rep_(std::move(rep)) {
    if (rep_ < Rational(0) || rep_ >= Rational(1))
      throw std::invalid_argument("CircleValue: representative outside [0,1)");
  }
  const Rational& rep() const { return rep_; }

  friend bool operator==(const CircleValue& a, const CircleValue& b) { return a.rep_ == b.rep_; }

 private:
  Rational rep_;
};

/// Distance to the nearest integer, a value in [0, 1/2].
class NormValue {
 public:
  explicit NormValue(Rational value) : value_(std::move(value)) {
    if (value_ < Rational(0) || value_ > Rational(1, 2))
      throw std::invalid_argument("NormValue: value outside [0,1/2]");
  }
  const Rational& value() const { return value_; }

  friend bool operator==(const NormValue& a, const NormValue& b) { return a.value_ == b.value_; }
  friend bool operator<(const NormValue& a, const NormValue& b) { return a.value_ < b.value_; }

 private:
  Rational value_;
};

/// Closed interval [lo, hi] of rationals; used where a quantity is known
/// only within rigorous bounds.
struct IntervalValue {
  Rational lo, hi;

  IntervalValue(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h)) {
    if (hi < lo) throw std::invalid_argument("IntervalValue: hi < lo");
  }
  Rational width() const { return hi - lo; }
  bool contains(const Rational& t) const { return lo <= t && t <= hi; }
  bool contained_in(const IntervalValue& outer) const {
    return outer.lo <= lo && hi <= outer.hi;
  }
};

/// Fractional part r - floor(r), with the mathematical floor (so -1/4 -> 3/4).
CircleValue frac(const Rational& r);

/// min(rep, 1 - rep).
NormValue circle_norm(const CircleValue& v);

/// circle_norm(frac(r)), i.e. the distance from r to the nearest integer.
NormValue norm_of(const Rational& r);

/// Rigorous enclosure of the distance-to-nearest-integer over all t in [lo,hi].
/// Requires width < 1/2, otherwise the enclosure would be the uninformative
/// [0,1/2] and a TooWideError is raised instead.
IntervalValue interval_norm(const IntervalValue& v);

}  // namespace torsionlab
