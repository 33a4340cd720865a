#pragma once

// Exact integer/rational layer shared by every module.  All combinatorial
// quantities (convergents, holonomy coordinates, twist orders) live in Int /
// Rat; floating point only ever appears behind the certified Interval type.

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace slitforge {

using Int = boost::multiprecision::mpz_int;
using Rat = boost::multiprecision::mpq_rational;

using boost::multiprecision::abs;
using boost::multiprecision::gcd;
using boost::multiprecision::pow;

inline Int num(const Rat& r) { return numerator(r); }
inline Int den(const Rat& r) { return denominator(r); }

inline int sgn(const Int& v) { return v.sign(); }
inline int sgn(const Rat& v) { return v.sign(); }

// Three-valued verdict for certified predicates.  "unknown" means the
// precision/depth budget ran out before the enclosures separated; callers
// decide whether that is an error (strict mode) or a reportable outcome.
enum class Tri : int8_t { no = -1, unknown = 0, yes = 1 };

inline Tri tri_not(Tri t) { return static_cast<Tri>(-static_cast<int8_t>(t)); }
inline Tri tri_and(Tri a, Tri b) {
  if (a == Tri::no || b == Tri::no) return Tri::no;
  if (a == Tri::yes && b == Tri::yes) return Tri::yes;
  return Tri::unknown;
}
inline Tri tri_or(Tri a, Tri b) { return tri_not(tri_and(tri_not(a), tri_not(b))); }
inline bool definitely(Tri t) { return t == Tri::yes; }
inline const char* to_string(Tri t) {
  switch (t) {
    case Tri::yes: return "yes";
    case Tri::no: return "no";
    default: return "unknown";
  }
}

struct precision_exhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct truncation_error : std::runtime_error {
  // Raised when a quotient stream cannot be extended far enough (finite spec,
  // digit budget).  Carries the deepest index that was reached.
  truncation_error(const std::string& what, long reached_) : std::runtime_error(what), reached(reached_) {}
  long reached;
};
struct domain_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct guarantee_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Global budgets, overridable through the environment so the CLI and tests
// share one knob.  Precision is in bits, the stream budget in decimal digits
// of the largest denominator we are willing to materialize.
struct Budget {
  unsigned start_prec = 128;
  unsigned max_prec = 1u << 15;
  std::size_t max_quotients = 100000;
  std::size_t max_digits = 100000;

  static const Budget& global() {
    static Budget b = from_env();
    return b;
  }

 private:
  static Budget from_env() {
    Budget b;
    if (const char* p = std::getenv("SLITFORGE_PREC_BITS")) b.start_prec = static_cast<unsigned>(std::strtoul(p, nullptr, 10));
    if (const char* p = std::getenv("SLITFORGE_MAX_PREC_BITS")) b.max_prec = static_cast<unsigned>(std::strtoul(p, nullptr, 10));
    if (const char* p = std::getenv("SLITFORGE_MAX_QUOTIENTS")) b.max_quotients = std::strtoull(p, nullptr, 10);
    if (const char* p = std::getenv("SLITFORGE_MAX_DIGITS")) b.max_digits = std::strtoull(p, nullptr, 10);
    if (b.start_prec < 64) b.start_prec = 64;
    if (b.max_prec < b.start_prec) b.max_prec = b.start_prec;
    return b;
  }
};

// Exact floor/ceil of num/den for integers (C++ / operator truncates).
inline Int floor_div(const Int& a, const Int& b) {
  Int q, r;
  divide_qr(a, b, q, r);
  if (r != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}
inline Int ceil_div(const Int& a, const Int& b) { return -floor_div(-a, b); }
inline Int floor_rat(const Rat& r) { return floor_div(num(r), den(r)); }
inline Int ceil_rat(const Rat& r) { return ceil_div(num(r), den(r)); }

// Nearest integer to a rational, ties toward even (the tie direction never
// matters for callers: they re-check both neighbours when on a boundary).
inline Int round_rat(const Rat& r) {
  Int f = floor_rat(r);
  Rat frac = r - Rat(f);
  if (frac * 2 < 1) return f;
  if (frac * 2 > 1) return f + 1;
  return (f % 2 == 0) ? f : f + 1;
}

// If a^(p/q) is rational, return it; digit_guard caps the size of the exact
// computation (a^p can be huge for schedule comparisons).
inline bool exact_pow_rat(const Int& a, const Int& p, const Int& q, Int& out, std::size_t digit_guard = 2000000) {
  if (a <= 0 || p < 0 || q <= 0) return false;
  if (a == 1) {
    out = 1;
    return true;
  }
  double digits = static_cast<double>(p.convert_to<double>()) * static_cast<double>(msb(a) + 1) * 0.302;
  if (!(digits < static_cast<double>(digit_guard))) return false;
  Int ap = pow(a, p.convert_to<unsigned long>());
  if (q == 1) {
    out = ap;
    return true;
  }
  Int root;
  int exact = mpz_root(root.backend().data(), ap.backend().data(), q.convert_to<unsigned long>());
  if (!exact) return false;
  out = root;
  return true;
}

}  // namespace slitforge
