#pragma once

// Holonomy vectors on the twice-marked torus and its double cover.  A vector
// is (x, y) with x = s + t*lambda and integer height carrier y; loops are the
// primitive integer vectors, slits have x = lambda + m, and separating slits
// are the slits with both m and n even (plus the horizontal seed (lambda,0)).
// The "length" of a vector is |y| throughout, which keeps every comparison
// inside exact rational-interval arithmetic.

#include "slitforge/lambda_linear.hpp"

#include <optional>
#include <utility>

namespace slitforge {

struct HolVec {
  LambdaLinear x;
  Int y;

  HolVec() = default;
  HolVec(LambdaLinear x0, Int y0) : x(std::move(x0)), y(std::move(y0)) {}

  Int height() const { return abs(y); }
  bool operator==(const HolVec& o) const { return x == o.x && y == o.y; }
  HolVec operator+(const HolVec& o) const { return {x + o.x, y + o.y}; }
  HolVec operator-() const { return {-x, -y}; }
  HolVec scaled(const Int& c) const { return {x.scaled(Rat(c)), y * c}; }
};

inline HolVec make_loop(const Int& p, const Int& q) {
  if (gcd(p, q) != 1) throw domain_error("loop holonomy must be primitive");
  return {LambdaLinear(Rat(p), Rat(0)), q};
}
inline HolVec make_slit(const Int& m, const Int& n) { return {LambdaLinear(Rat(m), Rat(1)), n}; }

inline bool is_loop(const HolVec& v) {
  return v.x.t == 0 && den(v.x.s) == 1 && gcd(num(v.x.s), v.y) == 1;
}
inline bool is_slit(const HolVec& v) { return v.x.t == 1 && den(v.x.s) == 1; }
// n > 0, plus the horizontal seed (lambda, 0)
inline bool in_V1_plus(const HolVec& v) {
  return is_slit(v) && (v.y > 0 || (v.y == 0 && v.x.s == 0));
}
inline bool in_V2_plus(const HolVec& v) {
  return in_V1_plus(v) && num(v.x.s) % 2 == 0 && v.y % 2 == 0;
}
inline bool is_horizontal_seed(const HolVec& v) { return is_slit(v) && v.y == 0 && v.x.s == 0; }

// Flip a slit in -V1^+ back into V1^+.
inline HolVec normalize_slit(const HolVec& v) {
  if (v.x.t == -1) return -v;
  return v;
}

inline LambdaLinear cross(const HolVec& u, const HolVec& v) {
  return u.x.scaled(Rat(v.y)) - v.x.scaled(Rat(u.y));
}

// |u x v| / (|u| |v|), heights nonzero.
inline Interval angle(const HolVec& u, const HolVec& v, QuotientStream& lam, mpfr_prec_t prec = 128) {
  if (u.y == 0 || v.y == 0) throw domain_error("angle needs nonzero heights");
  Interval c = lin_interval(cross(u, v), lam, prec).abs();
  return c / Interval::exact(Rat(u.height() * v.height()), prec);
}

// hor_theta(v) = |y*theta - x| as a linear form in (lambda, theta).
inline LinForm hor_form(const HolVec& v) { return LinForm(-v.x.s, -v.x.t, Rat(v.y)); }

inline Interval hor_interval(const HolVec& v, const StreamPtr& lam, const DirectionRef& theta, mpfr_prec_t prec = 128,
                             std::size_t min_depth = 20) {
  Rat tlo, thi;
  theta.warm(min_depth);
  theta.enclosure(tlo, thi);
  Rat y(v.y);
  Rat alo, ahi;
  if (y >= 0) {
    alo = y * tlo;
    ahi = y * thi;
  } else {
    alo = y * thi;
    ahi = y * tlo;
  }
  Rat xlo, xhi;
  if (v.x.t == 0) {
    xlo = xhi = v.x.s;
  } else {
    if (!lam) throw domain_error("hor: lambda term without a lambda stream");
    lam->ensure(min_depth);
    Rat llo, lhi;
    lam->enclosure(llo, lhi);
    lin_range(v.x, llo, lhi, xlo, xhi);
  }
  return (Interval::from_endpoints(alo, ahi, prec) - Interval::from_endpoints(xlo, xhi, prec)).abs();
}

// |w x v| < 1, certified.
inline bool in_cylinder(const HolVec& w, const HolVec& v, QuotientStream& lam) {
  Sign s = compare_abs_lin(cross(w, v), LambdaLinear(Rat(1), Rat(0)), lam);
  if (s == Sign::indeterminate) throw precision_exhausted("in_cylinder: cannot separate |w x v| from 1");
  return s == Sign::negative;
}

struct TwistWitness {
  HolVec v;
  Int b = 0;
  bool identity = false;  // w' == w; a twist proper needs b != 0
};

// If |w x v| + |w' x v| < 1 and w' = w + b v for an integer b, produce the
// witness.  Non-parallel differences are a plain absence; a parallel but
// non-integral ratio under the area condition means the caller handed in
// vectors that cannot both be simple on the cover.
inline std::optional<TwistWitness> dehn_related(const HolVec& w_in, const HolVec& w2_in, const HolVec& v,
                                                QuotientStream& lam) {
  HolVec w = normalize_slit(w_in), w2 = normalize_slit(w2_in);
  if (!in_V1_plus(w) || !in_V1_plus(w2)) throw domain_error("dehn_related: slits must normalize into V1^+");
  LambdaLinear c1 = cross(w, v), c2 = cross(w2, v);
  Sign s1 = sign_lin(c1, lam), s2 = sign_lin(c2, lam);
  if (s1 == Sign::indeterminate || s2 == Sign::indeterminate)
    throw precision_exhausted("dehn_related: undecidable cross sign");
  LambdaLinear total = (s1 == Sign::negative ? -c1 : c1) + (s2 == Sign::negative ? -c2 : c2);
  Sign below = sign_lin(total - LambdaLinear(Rat(1), Rat(0)), lam);
  if (below == Sign::indeterminate) throw precision_exhausted("dehn_related: area sum vs 1 undecidable");
  if (below != Sign::negative) return std::nullopt;

  LambdaLinear dx = w2.x - w.x;
  Int dy = w2.y - w.y;
  if (dx.t != 0) throw domain_error("dehn_related: slit difference must be loop-directed");
  Rat b;
  if (v.y != 0) {
    b = Rat(dy) / Rat(v.y);
    if (dx.s != b * v.x.s) return std::nullopt;
  } else {
    if (dy != 0) return std::nullopt;
    if (v.x.s == 0) throw domain_error("dehn_related: zero twist direction");
    b = dx.s / v.x.s;
  }
  if (den(b) != 1) throw domain_error("dehn_related: area condition holds but the twist order is fractional");
  TwistWitness tw;
  tw.v = v;
  tw.b = num(b);
  tw.identity = tw.b == 0;
  if (!tw.identity && in_V2_plus(w) && in_V2_plus(w2) && tw.b % 2 != 0)
    throw domain_error("dehn_related: separating slits need an even twist order");
  return tw;
}

struct AreaExchange {
  LambdaLinear chi;   // sign-normalized |w x v|
  Interval chi_iv;    // certified enclosure
  bool leq_one;       // the symmetric-difference area never exceeds the torus
};

inline AreaExchange area_exchange(const HolVec& w_in, const HolVec& w2_in, const HolVec& v, QuotientStream& lam,
                                  mpfr_prec_t prec = 128) {
  HolVec w = normalize_slit(w_in), w2 = normalize_slit(w2_in);
  if (!in_V2_plus(w) || !in_V2_plus(w2)) throw domain_error("area_exchange: both slits must be separating");
  auto tw = dehn_related(w, w2, v, lam);
  if (!tw || tw->identity) throw domain_error("area_exchange: inputs are not a proper twist pair");
  LambdaLinear c1 = cross(w, v);
  Sign s1 = sign_lin(c1, lam);
  if (s1 == Sign::zero) throw domain_error("area_exchange: parallel input is not a twist");
  if (s1 == Sign::indeterminate) throw precision_exhausted("area_exchange: undecidable cross sign");
  AreaExchange out;
  out.chi = s1 == Sign::negative ? -c1 : c1;
  // w x w' = b (w x v) exactly; any mismatch means the witness lied
  LambdaLinear c12 = cross(w, w2);
  if (!(c12 == c1.scaled(Rat(tw->b))))
    throw guarantee_failure("area_exchange: |w x w'| != |b| |w x v|");
  out.chi_iv = lin_interval(out.chi, lam, prec);
  Sign cmp1 = sign_lin(out.chi - LambdaLinear(Rat(1), Rat(0)), lam);
  out.leq_one = cmp1 == Sign::negative || cmp1 == Sign::zero;
  return out;
}

}  // namespace slitforge
