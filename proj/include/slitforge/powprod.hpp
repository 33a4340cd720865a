#pragma once

// Positive quantities kept in factored form c * prod b_i^{e_i} * pi^m with
// rational c, b_i > 0 and rational exponents.  Comparisons go through interval
// logs at escalating precision; when both sides carry the same power of pi the
// residual case (near-equality) falls back to an exact rational power test.

#include "slitforge/numeric.hpp"
#include "slitforge/real.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace slitforge {

class PowProd {
 public:
  PowProd() : coef_(1) {}
  explicit PowProd(const Rat& c) : coef_(c) {
    if (c <= 0) throw domain_error("PowProd coefficient must be positive");
  }
  explicit PowProd(const Int& c) : PowProd(Rat(c)) {}

  static PowProd power(const Rat& base, const Rat& exp) {
    if (base <= 0) throw domain_error("PowProd base must be positive");
    PowProd p;
    if (base != 1 && exp != 0) p.factors_.emplace_back(base, exp);
    return p;
  }
  static PowProd power(const Int& base, const Rat& exp) { return power(Rat(base), exp); }
  static PowProd pi_power(int m) {
    PowProd p;
    p.pi_ = m;
    return p;
  }

  const Rat& coef() const { return coef_; }
  int pi_exp() const { return pi_; }
  // value == coef() with no power factors in the way
  bool plain_rational() const { return factors_.empty() && pi_ == 0; }

  PowProd operator*(const PowProd& o) const {
    PowProd r = *this;
    r.coef_ *= o.coef_;
    r.pi_ += o.pi_;
    for (const auto& f : o.factors_) r.push_factor(f.first, f.second);
    return r;
  }
  PowProd operator/(const PowProd& o) const {
    PowProd r = *this;
    r.coef_ /= o.coef_;
    r.pi_ -= o.pi_;
    for (const auto& f : o.factors_) r.push_factor(f.first, -f.second);
    return r;
  }
  PowProd pow(const Rat& e) const {
    PowProd r;
    if (pi_ != 0) {
      // pi^(m e) only stays representable for integer m e
      Rat me = Rat(pi_) * e;
      if (den(me) != 1) throw domain_error("PowProd: pi exponent must stay integral");
      r.pi_ = static_cast<int>(num(me).convert_to<long>());
    }
    if (coef_ != 1) r.push_factor(coef_, e);
    for (const auto& f : factors_) r.push_factor(f.first, f.second * e);
    return r;
  }

  Interval log_interval(mpfr_prec_t prec) const {
    Interval acc = Interval::log_of(coef_, prec);
    for (const auto& f : factors_) acc = acc + Interval::log_of(f.first, prec) * Interval::exact(f.second, prec);
    if (pi_ != 0) acc = acc + Interval::pi(prec).log() * Interval::exact(Int(pi_), prec);
    return acc;
  }
  Interval value_interval(mpfr_prec_t prec) const { return log_interval(prec).exp(); }
  double to_double() const { return value_interval(128).mid_double(); }

  // this < other, escalating interval precision and finishing with an exact
  // rational power comparison when pi cancels.
  Tri cmp_less(const PowProd& o) const {
    PowProd r = *this / o;
    for (mpfr_prec_t prec = 128; prec <= 4096; prec *= 2) {
      Tri t = r.log_interval(prec).sign();
      if (t == Tri::yes) return Tri::no;  // log > 0: this > other
      if (t == Tri::no) return Tri::yes;
    }
    if (r.pi_ != 0) return Tri::unknown;
    return r.exact_less_than_one();
  }
  Tri cmp_less(const Int& v) const { return cmp_less(PowProd(v)); }
  bool definitely_less(const PowProd& o) const { return cmp_less(o) == Tri::yes; }

  // Smallest integer >= value.  The enclosure usually pins it down directly;
  // an exactly-integral value straddles the boundary at every precision, so
  // the near-miss case walks the candidates with the exact comparator.
  std::optional<Int> ceil_int(mpfr_prec_t max_prec = 4096) const {
    if (factors_.empty() && pi_ == 0) return ceil_rat(coef_);
    Int lo_ceil, hi_ceil;
    for (mpfr_prec_t prec = 128; prec <= max_prec; prec *= 2) {
      Interval v = value_interval(prec);
      Real c(prec);
      mpfr_ceil(c.get(), v.lo().get());
      mpfr_get_z(lo_ceil.backend().data(), c.get(), MPFR_RNDN);
      mpfr_ceil(c.get(), v.hi().get());
      mpfr_get_z(hi_ceil.backend().data(), c.get(), MPFR_RNDN);
      if (lo_ceil == hi_ceil) return lo_ceil;
      if (hi_ceil - lo_ceil < 4) break;
    }
    if (lo_ceil < 1) lo_ceil = 1;  // the value is positive
    for (Int c = lo_ceil; c <= hi_ceil; ++c) {
      // by construction c - 1 < value; ceil is the first c with value <= c
      Tri above = PowProd(c).cmp_less(*this);
      if (above == Tri::unknown) return std::nullopt;
      if (above == Tri::no) return c;
    }
    return std::nullopt;
  }

  // Largest integer <= value, same strategy in the other direction.  The
  // value is positive so the floor is never negative.
  std::optional<Int> floor_int(mpfr_prec_t max_prec = 4096) const {
    if (factors_.empty() && pi_ == 0) return floor_rat(coef_);
    Int lo_floor, hi_floor;
    for (mpfr_prec_t prec = 128; prec <= max_prec; prec *= 2) {
      Interval v = value_interval(prec);
      Real c(prec);
      mpfr_floor(c.get(), v.lo().get());
      mpfr_get_z(lo_floor.backend().data(), c.get(), MPFR_RNDN);
      mpfr_floor(c.get(), v.hi().get());
      mpfr_get_z(hi_floor.backend().data(), c.get(), MPFR_RNDN);
      if (lo_floor == hi_floor) return lo_floor;
      if (hi_floor - lo_floor < 4) break;
    }
    for (Int c = hi_floor; c >= lo_floor && c >= 1; --c) {
      // by construction c + 1 > value; floor is the first c with c <= value
      Tri below = cmp_less(PowProd(c));
      if (below == Tri::unknown) return std::nullopt;
      if (below == Tri::no) return c;
    }
    if (lo_floor <= 0) return Int(0);
    return std::nullopt;
  }

 private:
  void push_factor(const Rat& b, const Rat& e) {
    if (b == 1 || e == 0) return;
    for (auto& f : factors_) {
      if (f.first == b) {
        f.second += e;
        if (f.second == 0) {
          f = factors_.back();
          factors_.pop_back();
        }
        return;
      }
    }
    factors_.emplace_back(b, e);
  }

  // Decide c * prod b_i^{e_i} < 1 exactly: raise to the common exponent
  // denominator and compare integer products, guarding digit blowup.
  Tri exact_less_than_one() const {
    Int D(1);
    for (const auto& f : factors_) D = D / gcd(D, den(f.second)) * den(f.second);
    double bits = static_cast<double>(msb(num(coef_)) + msb(den(coef_)) + 2) * static_cast<double>(D.convert_to<double>());
    for (const auto& f : factors_) {
      double fb = static_cast<double>(msb(num(f.first)) + msb(den(f.first)) + 2);
      bits += fb * std::abs((f.second * D).convert_to<double>());
    }
    if (bits > 8.0e6) return Tri::unknown;
    Int lhs(1), rhs(1);  // lhs/rhs = value^D
    auto mul_pow = [&](const Int& base, const Int& e) {
      Int b = base;
      Int n = e;
      Int& num_side = n > 0 ? lhs : rhs;
      if (n < 0) n = -n;
      unsigned long ul = n.convert_to<unsigned long>();
      Int acc;
      mpz_pow_ui(acc.backend().data(), b.backend().data(), ul);
      num_side *= acc;
    };
    mul_pow(num(coef_), D);
    mul_pow(den(coef_), -D);
    for (const auto& f : factors_) {
      Int e = num(f.second) * (D / den(f.second));
      if (e == 0) continue;
      mul_pow(num(f.first), e);
      mul_pow(den(f.first), -e);
    }
    if (lhs < rhs) return Tri::yes;
    if (lhs > rhs) return Tri::no;
    return Tri::no;  // exactly 1: not less
  }

  Rat coef_;
  std::vector<std::pair<Rat, Rat>> factors_;
  int pi_ = 0;
};

}  // namespace slitforge
