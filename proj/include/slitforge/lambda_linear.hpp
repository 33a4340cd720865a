#pragma once

// Exact arithmetic over numbers of the form s + t*lambda (rational s, t) and
// linear forms c0 + cl*lambda + ct*theta.  Signs are decided by refining the
// continued fraction enclosure of lambda; for irrational lambda a nonzero form
// always separates after finitely many refinements, and exact zero is caught
// structurally (t = 0, or a rational lambda folded in) rather than numerically.

#include "slitforge/cf_engine.hpp"

#include <optional>
#include <utility>

namespace slitforge {

enum class Sign : int8_t { negative = -1, zero = 0, positive = 1, indeterminate = 2 };

inline Sign sign_of(const Rat& v) { return v > 0 ? Sign::positive : v < 0 ? Sign::negative : Sign::zero; }

struct LambdaLinear {
  Rat s, t;  // value s + t*lambda

  LambdaLinear() = default;
  LambdaLinear(Rat s0, Rat t0) : s(std::move(s0)), t(std::move(t0)) {}

  LambdaLinear operator+(const LambdaLinear& o) const { return {s + o.s, t + o.t}; }
  LambdaLinear operator-(const LambdaLinear& o) const { return {s - o.s, t - o.t}; }
  LambdaLinear operator-() const { return {-s, -t}; }
  LambdaLinear scaled(const Rat& c) const { return {s * c, t * c}; }
  bool operator==(const LambdaLinear& o) const { return s == o.s && t == o.t; }
  bool structurally_zero() const { return s == 0 && t == 0; }
};

// Rational interval image of s + t*lambda over lambda in [lo, hi].
inline void lin_range(const LambdaLinear& v, const Rat& lo, const Rat& hi, Rat& out_lo, Rat& out_hi) {
  if (v.t >= 0) {
    out_lo = v.s + v.t * lo;
    out_hi = v.s + v.t * hi;
  } else {
    out_lo = v.s + v.t * hi;
    out_hi = v.s + v.t * lo;
  }
}

inline Sign sign_lin(const LambdaLinear& v, QuotientStream& lam) {
  if (v.t == 0) return sign_of(v.s);
  for (;;) {
    if (lam.rational()) return sign_of(v.s + v.t * lam.value());
    Rat lo, hi;
    lam.enclosure(lo, hi);
    Rat rlo, rhi;
    lin_range(v, lo, hi, rlo, rhi);
    if (rlo > 0) return Sign::positive;
    if (rhi < 0) return Sign::negative;
    // endpoints touching zero with an irrational lambda stay strictly one-sided
    if (!lam.refine()) {
      if (lam.rational()) continue;
      return Sign::indeterminate;
    }
  }
}

inline Sign compare_lin(const LambdaLinear& a, const LambdaLinear& b, QuotientStream& lam) {
  return sign_lin(a - b, lam);
}

// |a| vs |b|: ties are exactly the structural cases a = b or a = -b.
inline Sign compare_abs_lin(const LambdaLinear& a, const LambdaLinear& b, QuotientStream& lam) {
  if ((a - b).structurally_zero() || (a + b).structurally_zero()) return Sign::zero;
  Sign sa = sign_lin(a, lam);
  Sign sb = sign_lin(b, lam);
  if (sa == Sign::indeterminate || sb == Sign::indeterminate) return Sign::indeterminate;
  LambdaLinear aa = sa == Sign::negative ? -a : a;
  LambdaLinear bb = sb == Sign::negative ? -b : b;
  return sign_lin(aa - bb, lam);
}

inline Interval lin_interval(const LambdaLinear& v, QuotientStream& lam, mpfr_prec_t prec, std::size_t min_depth = 20) {
  lam.ensure(min_depth);
  Rat lo, hi;
  lam.enclosure(lo, hi);
  Rat rlo, rhi;
  lin_range(v, lo, hi, rlo, rhi);
  return Interval::from_endpoints(rlo, rhi, prec);
}

// A direction value: exactly rational, affine in lambda, or an independent
// continued fraction of its own.
class DirectionRef {
 public:
  static DirectionRef rational(Rat v) {
    DirectionRef d;
    d.a_ = std::move(v);
    return d;
  }
  static DirectionRef lambda_affine(Rat a, Rat b, StreamPtr lam) {
    DirectionRef d;
    d.a_ = std::move(a);
    d.b_ = std::move(b);
    d.lam_ = std::move(lam);
    return d;
  }
  static DirectionRef stream(StreamPtr own) {
    DirectionRef d;
    d.own_ = std::move(own);
    return d;
  }

  const StreamPtr& lam() const { return lam_; }
  const StreamPtr& own() const { return own_; }
  const Rat& affine_a() const { return a_; }
  const Rat& affine_b() const { return b_; }

  // Exact rational value when one is available without refinement loops.
  std::optional<Rat> exact() const {
    if (own_) {
      if (own_->rational()) return own_->value();
      return std::nullopt;
    }
    if (!lam_ || b_ == 0) return a_;
    if (lam_->rational()) return a_ + b_ * lam_->value();
    return std::nullopt;
  }

  void enclosure(Rat& lo, Rat& hi) const {
    if (own_) {
      own_->enclosure(lo, hi);
      return;
    }
    if (!lam_ || b_ == 0) {
      lo = hi = a_;
      return;
    }
    Rat llo, lhi;
    lam_->enclosure(llo, lhi);
    lin_range(LambdaLinear(a_, b_), llo, lhi, lo, hi);
  }
  bool refine() const {
    if (own_) return own_->refine();
    if (lam_ && b_ != 0) return lam_->refine();
    return false;
  }
  // Pull the underlying streams to at least the given depth.  The streams are
  // shared mutable caches, so this is const for callers holding refs.
  void warm(std::size_t depth) const {
    if (own_) own_->ensure(depth);
    if (lam_) lam_->ensure(depth);
  }

 private:
  Rat a_, b_;
  StreamPtr lam_;
  StreamPtr own_;
};

// c0 + cl*lambda + ct*theta
struct LinForm {
  Rat c0, cl, ct;

  LinForm() = default;
  LinForm(Rat a, Rat l, Rat t) : c0(std::move(a)), cl(std::move(l)), ct(std::move(t)) {}

  LinForm operator-(const LinForm& o) const { return {c0 - o.c0, cl - o.cl, ct - o.ct}; }
  LinForm operator-() const { return {-c0, -cl, -ct}; }
  LinForm scaled(const Rat& c) const { return {c0 * c, cl * c, ct * c}; }
};

// Fold theta into the rational and lambda coefficients whenever theta is
// rational or affine over this lambda stream; fold lambda too when it is a
// terminated rational.  After folding, ct == 0 means theta is gone and
// (cl == 0 or lambda irrational) the form is as reduced as it gets.
inline void fold_form(LinForm& f, const StreamPtr& lam, const DirectionRef& theta) {
  if (f.ct != 0) {
    if (auto tv = theta.exact()) {
      f.c0 += f.ct * *tv;
      f.ct = 0;
    } else if (!theta.own() && theta.lam() == lam) {
      f.c0 += f.ct * theta.affine_a();
      f.cl += f.ct * theta.affine_b();
      f.ct = 0;
    }
  }
  if (f.cl != 0 && lam && lam->rational()) {
    f.c0 += f.cl * lam->value();
    f.cl = 0;
  }
}

// Rational enclosure of the folded form's value from current stream depth.
inline void form_range(const LinForm& f, const StreamPtr& lam, const DirectionRef& theta, Rat& lo, Rat& hi) {
  lo = hi = f.c0;
  if (f.cl != 0) {
    if (!lam) throw domain_error("form_range: lambda coefficient without a lambda stream");
    Rat llo, lhi;
    lam->enclosure(llo, lhi);
    if (f.cl > 0) {
      lo += f.cl * llo;
      hi += f.cl * lhi;
    } else {
      lo += f.cl * lhi;
      hi += f.cl * llo;
    }
  }
  if (f.ct != 0) {
    Rat tlo, thi;
    theta.enclosure(tlo, thi);
    if (f.ct > 0) {
      lo += f.ct * tlo;
      hi += f.ct * thi;
    } else {
      lo += f.ct * thi;
      hi += f.ct * tlo;
    }
  }
}

inline bool refine_form_streams(const LinForm& f, const StreamPtr& lam, const DirectionRef& theta) {
  bool moved = false;
  if (f.cl != 0 && lam) moved |= lam->refine();
  if (f.ct != 0) moved |= theta.refine();
  return moved;
}

// Sign of a linear form.  Exact through folding when possible; otherwise
// interval refinement with a round cap, reporting indeterminate on honest
// ties (independent streams, or inputs that stopped refining).
inline Sign sign_form(LinForm f, const StreamPtr& lam, const DirectionRef& theta, std::size_t max_rounds = 256) {
  fold_form(f, lam, theta);
  if (f.ct == 0) {
    if (f.cl == 0) return sign_of(f.c0);
    if (!lam) throw domain_error("sign_form: lambda coefficient without a lambda stream");
    return sign_lin(LambdaLinear(f.c0, f.cl), *lam);
  }
  for (std::size_t round = 0; round < max_rounds; ++round) {
    Rat lo, hi;
    form_range(f, lam, theta, lo, hi);
    if (lo > 0) return Sign::positive;
    if (hi < 0) return Sign::negative;
    if (!refine_form_streams(f, lam, theta)) return Sign::indeterminate;
  }
  return Sign::indeterminate;
}

inline Interval form_interval(const LinForm& f, const StreamPtr& lam, const DirectionRef& theta, mpfr_prec_t prec,
                              std::size_t min_depth = 20) {
  LinForm g = f;
  fold_form(g, lam, theta);
  if (g.cl != 0 && lam) lam->ensure(min_depth);
  if (g.ct != 0) theta.warm(min_depth);
  Rat lo, hi;
  form_range(g, lam, theta, lo, hi);
  return Interval::from_endpoints(lo, hi, prec);
}

// Nearest integer to the form's value; tie set when the value is exactly
// half-integral (decidable only through folding, and an unfoldable stream
// value never lands on a half-integer).
struct RoundedForm {
  Int z;
  bool tie = false;  // value == z + 1/2 exactly; z and z+1 are equidistant
};

inline RoundedForm round_form(LinForm f, const StreamPtr& lam, const DirectionRef& theta, std::size_t max_rounds = 256) {
  fold_form(f, lam, theta);
  if (f.ct == 0 && f.cl == 0) {
    RoundedForm r;
    Rat twice = f.c0 * 2;
    if (den(twice) == 1 && num(twice) % 2 != 0) {
      r.z = (num(twice) - 1) / 2;
      r.tie = true;
      return r;
    }
    r.z = round_rat(f.c0);
    return r;
  }
  for (std::size_t round = 0; round < max_rounds; ++round) {
    Rat lo, hi;
    form_range(f, lam, theta, lo, hi);
    Int zl = round_rat(lo), zh = round_rat(hi);
    if (zl == zh) {
      // both endpoints round the same way; the open half-step boundary can
      // only be touched by a foldable (hence already handled) value
      Rat bl = Rat(zl) - Rat(1, 2), bh = Rat(zl) + Rat(1, 2);
      if (lo > bl && hi < bh) return {zl, false};
    }
    if (!refine_form_streams(f, lam, theta)) break;
  }
  throw precision_exhausted("round_form: cannot pin the nearest integer");
}

}  // namespace slitforge
