#include "torsionlab/circle.hpp"

namespace torsionlab {

CircleValue frac(const Rational& r) {
  return CircleValue(r - Rational(r.floor()));
}

NormValue circle_norm(const CircleValue& v) {
  const Rational& x = v.rep();
  Rational other = Rational(1) - x;
  return NormValue(x <= other ? x : other);
}

NormValue norm_of(const Rational& r) { return circle_norm(frac(r)); }

IntervalValue interval_norm(const IntervalValue& v) {
  if (v.width() >= Rational(1, 2))
    throw TooWideError("interval_norm: width >= 1/2, enclosure uninformative");

  // dist(t, Z) is piecewise linear with period 1; with width < 1/2 the
  // interval can cover at most one integer or one half-integer.
  Rational dlo = norm_of(v.lo).value();
  Rational dhi = norm_of(v.hi).value();

  // Integer inside [lo, hi]?  floor(hi) >= ceil(lo)
  Int ceil_lo = (-((-v.lo).floor()));
  bool integer_inside = Rational(ceil_lo) >= v.lo && Rational(ceil_lo) <= v.hi;
  // Half-integer inside?  t = m + 1/2 for integer m
  Rational shifted_lo = v.lo - Rational(1, 2);
  Int ceil_half = (-((-shifted_lo).floor()));
  Rational half_point = Rational(ceil_half) + Rational(1, 2);
  bool half_inside = half_point >= v.lo && half_point <= v.hi;

  Rational lo_out = integer_inside ? Rational(0) : (dlo <= dhi ? dlo : dhi);
  Rational hi_out = half_inside ? Rational(1, 2) : (dlo >= dhi ? dlo : dhi);
  return IntervalValue(lo_out, hi_out);
}

}  // namespace torsionlab
