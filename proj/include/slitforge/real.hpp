#pragma once

// Certified real arithmetic: a thin RAII wrapper over mpfr_t plus an interval
// type whose endpoints are rounded outward (RNDD / RNDU).  Every comparison
// against another interval yields a Tri; "unknown" surfaces overlapping
// enclosures instead of silently guessing.

#include "slitforge/numeric.hpp"

#include <mpfr.h>

#include <ostream>
#include <string>
#include <utility>

namespace slitforge {

class Real {
 public:
  explicit Real(mpfr_prec_t prec = 128) { mpfr_init2(x_, prec); mpfr_set_zero(x_, 1); }
  Real(const Real& o) { mpfr_init2(x_, mpfr_get_prec(o.x_)); mpfr_set(x_, o.x_, MPFR_RNDN); }
  Real(Real&& o) noexcept {
    mpfr_init2(x_, 64);
    mpfr_swap(x_, o.x_);
  }
  Real& operator=(const Real& o) {
    if (this != &o) {
      mpfr_set_prec(x_, mpfr_get_prec(o.x_));
      mpfr_set(x_, o.x_, MPFR_RNDN);
    }
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    mpfr_swap(x_, o.x_);
    return *this;
  }
  ~Real() { mpfr_clear(x_); }

  mpfr_ptr get() { return x_; }
  mpfr_srcptr get() const { return x_; }
  double to_double() const { return mpfr_get_d(x_, MPFR_RNDN); }

 private:
  mpfr_t x_;
};

class Interval {
 public:
  explicit Interval(mpfr_prec_t prec = 128) : lo_(prec), hi_(prec) {}

  static Interval exact(const Int& v, mpfr_prec_t prec) {
    Interval r(prec);
    mpfr_set_z(r.lo_.get(), v.backend().data(), MPFR_RNDD);
    mpfr_set_z(r.hi_.get(), v.backend().data(), MPFR_RNDU);
    return r;
  }
  static Interval exact(const Rat& v, mpfr_prec_t prec) {
    Interval r(prec);
    mpfr_set_q(r.lo_.get(), v.backend().data(), MPFR_RNDD);
    mpfr_set_q(r.hi_.get(), v.backend().data(), MPFR_RNDU);
    return r;
  }
  static Interval from_endpoints(const Rat& lo, const Rat& hi, mpfr_prec_t prec) {
    Interval r(prec);
    mpfr_set_q(r.lo_.get(), lo.backend().data(), MPFR_RNDD);
    mpfr_set_q(r.hi_.get(), hi.backend().data(), MPFR_RNDU);
    return r;
  }
  static Interval exact_double(double v, mpfr_prec_t prec) {
    Interval r(prec);
    mpfr_set_d(r.lo_.get(), v, MPFR_RNDD);
    mpfr_set_d(r.hi_.get(), v, MPFR_RNDU);
    return r;
  }

  mpfr_prec_t prec() const { return mpfr_get_prec(lo_.get()); }

  Interval operator+(const Interval& o) const {
    Interval r(prec());
    mpfr_add(r.lo_.get(), lo_.get(), o.lo_.get(), MPFR_RNDD);
    mpfr_add(r.hi_.get(), hi_.get(), o.hi_.get(), MPFR_RNDU);
    return r;
  }
  Interval operator-(const Interval& o) const {
    Interval r(prec());
    mpfr_sub(r.lo_.get(), lo_.get(), o.hi_.get(), MPFR_RNDD);
    mpfr_sub(r.hi_.get(), hi_.get(), o.lo_.get(), MPFR_RNDU);
    return r;
  }
  Interval operator-() const {
    Interval r(prec());
    mpfr_neg(r.lo_.get(), hi_.get(), MPFR_RNDD);
    mpfr_neg(r.hi_.get(), lo_.get(), MPFR_RNDU);
    return r;
  }
  Interval operator*(const Interval& o) const {
    // Generic sign-split product: min/max over the four endpoint products.
    Interval r(prec());
    Real a(prec()), b(prec());
    mpfr_mul(a.get(), lo_.get(), o.lo_.get(), MPFR_RNDD);
    mpfr_mul(b.get(), lo_.get(), o.hi_.get(), MPFR_RNDD);
    if (mpfr_cmp(b.get(), a.get()) < 0) mpfr_swap(a.get(), b.get());
    mpfr_mul(b.get(), hi_.get(), o.lo_.get(), MPFR_RNDD);
    if (mpfr_cmp(b.get(), a.get()) < 0) mpfr_swap(a.get(), b.get());
    mpfr_mul(b.get(), hi_.get(), o.hi_.get(), MPFR_RNDD);
    if (mpfr_cmp(b.get(), a.get()) < 0) mpfr_swap(a.get(), b.get());
    mpfr_set(r.lo_.get(), a.get(), MPFR_RNDD);

    mpfr_mul(a.get(), lo_.get(), o.lo_.get(), MPFR_RNDU);
    mpfr_mul(b.get(), lo_.get(), o.hi_.get(), MPFR_RNDU);
    if (mpfr_cmp(b.get(), a.get()) > 0) mpfr_swap(a.get(), b.get());
    mpfr_mul(b.get(), hi_.get(), o.lo_.get(), MPFR_RNDU);
    if (mpfr_cmp(b.get(), a.get()) > 0) mpfr_swap(a.get(), b.get());
    mpfr_mul(b.get(), hi_.get(), o.hi_.get(), MPFR_RNDU);
    if (mpfr_cmp(b.get(), a.get()) > 0) mpfr_swap(a.get(), b.get());
    mpfr_set(r.hi_.get(), a.get(), MPFR_RNDU);
    return r;
  }
  Interval operator/(const Interval& o) const {
    if (o.contains_zero()) throw domain_error("interval division by an enclosure of zero");
    return *this * o.recip();
  }
  Interval recip() const {
    if (contains_zero()) throw domain_error("interval reciprocal of an enclosure of zero");
    Interval r(prec());
    mpfr_ui_div(r.lo_.get(), 1, hi_.get(), MPFR_RNDD);
    mpfr_ui_div(r.hi_.get(), 1, lo_.get(), MPFR_RNDU);
    return r;
  }
  Interval abs() const {
    Interval r(prec());
    if (sign_lo() >= 0) return *this;
    if (sign_hi() <= 0) return -*this;
    mpfr_set_zero(r.lo_.get(), 1);
    mpfr_neg(r.hi_.get(), lo_.get(), MPFR_RNDU);
    Real h(prec());
    mpfr_set(h.get(), hi_.get(), MPFR_RNDU);
    if (mpfr_cmp(h.get(), r.hi_.get()) > 0) mpfr_set(r.hi_.get(), h.get(), MPFR_RNDU);
    return r;
  }

  // log/exp require the operand range to be valid; callers guard domains.
  Interval log() const {
    if (sign_lo() <= 0) throw domain_error("interval log needs a positive enclosure");
    Interval r(prec());
    mpfr_log(r.lo_.get(), lo_.get(), MPFR_RNDD);
    mpfr_log(r.hi_.get(), hi_.get(), MPFR_RNDU);
    return r;
  }
  Interval exp() const {
    Interval r(prec());
    mpfr_exp(r.lo_.get(), lo_.get(), MPFR_RNDD);
    mpfr_exp(r.hi_.get(), hi_.get(), MPFR_RNDU);
    return r;
  }

  static Interval log_of(const Int& v, mpfr_prec_t prec) {
    if (v <= 0) throw domain_error("log of a nonpositive integer");
    Interval r(prec);
    mpfr_set_z(r.lo_.get(), v.backend().data(), MPFR_RNDD);
    mpfr_log(r.lo_.get(), r.lo_.get(), MPFR_RNDD);
    mpfr_set_z(r.hi_.get(), v.backend().data(), MPFR_RNDU);
    mpfr_log(r.hi_.get(), r.hi_.get(), MPFR_RNDU);
    return r;
  }
  static Interval log_of(const Rat& v, mpfr_prec_t prec) {
    return log_of(num(v), prec) - log_of(den(v), prec);
  }
  static Interval pi(mpfr_prec_t prec) {
    Interval r(prec);
    mpfr_const_pi(r.lo_.get(), MPFR_RNDD);
    mpfr_const_pi(r.hi_.get(), MPFR_RNDU);
    return r;
  }

  int sign_lo() const { return mpfr_sgn(lo_.get()); }
  int sign_hi() const { return mpfr_sgn(hi_.get()); }
  bool contains_zero() const { return sign_lo() <= 0 && sign_hi() >= 0; }

  Tri less_than(const Interval& o) const {
    if (mpfr_cmp(hi_.get(), o.lo_.get()) < 0) return Tri::yes;
    if (mpfr_cmp(lo_.get(), o.hi_.get()) >= 0) return Tri::no;
    return Tri::unknown;
  }
  Tri less_equal(const Interval& o) const {
    if (mpfr_cmp(hi_.get(), o.lo_.get()) <= 0) return Tri::yes;
    if (mpfr_cmp(lo_.get(), o.hi_.get()) > 0) return Tri::no;
    return Tri::unknown;
  }
  Tri sign() const {
    if (sign_lo() > 0) return Tri::yes;        // certainly positive
    if (sign_hi() < 0) return Tri::no;         // certainly negative
    return Tri::unknown;
  }

  double lo_double() const { return mpfr_get_d(lo_.get(), MPFR_RNDD); }
  double hi_double() const { return mpfr_get_d(hi_.get(), MPFR_RNDU); }
  double mid_double() const { return 0.5 * (lo_double() + hi_double()); }
  double width_double() const { return hi_double() - lo_double(); }

  const Real& lo() const { return lo_; }
  const Real& hi() const { return hi_; }
  Real& lo() { return lo_; }
  Real& hi() { return hi_; }

  std::string str(int digits = 17) const;

 private:
  Real lo_, hi_;
};

inline std::string format_real(mpfr_srcptr x, int digits) {
  char buf[128];
  mpfr_snprintf(buf, sizeof buf, "%.*Rg", digits, x);
  return buf;
}

inline std::string Interval::str(int digits) const {
  return "[" + format_real(lo_.get(), digits) + ", " + format_real(hi_.get(), digits) + "]";
}

inline std::ostream& operator<<(std::ostream& os, const Interval& iv) { return os << iv.str(); }

}  // namespace slitforge
