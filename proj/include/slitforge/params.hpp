#pragma once
// Global parameter pack for the slit-tree construction.  From a single
// dimension-loss tolerance eps we derive the growth exponent r, the slack
// delta, the ladder M, M', N, N', the return base rho and the child-count
// constant c_0, all as exact rationals so that downstream certificates never
// inherit rounding noise.  The start index k_0 is subject to a lower bound
// whose terms are astronomically large at the true constants; we evaluate it
// in log10 enclosures and refuse searches that cannot fit the digit budget
// instead of silently relaxing.

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cf_engine.hpp"
#include "goodness.hpp"

namespace slitforge {

enum class Mode { strict, relaxed };

struct ParamPack {
  Rat eps;
  Rat r;       // growth exponent, 1 < r < 2
  Rat delta;   // slack in the local-dimension inequality
  Rat M;       // 1/(r-1)
  Rat Mprime;  // max(3M^2, Mr/delta)
  Rat N;       // M' r^5, the gap threshold
  Rat Nprime;  // (N+1) r/(r-1)
  Rat rho;     // r + 1/2
  PowProd c0 = c0_default();
  long k0 = -1;  // start index; -1 until chosen
  Mode mode = Mode::strict;
  std::map<std::string, Rat> overrides;  // echo of accepted relaxed overrides
  std::vector<std::string> notes;        // deviations from the derived formulas
  bool tainted() const { return !overrides.empty(); }
};

// Exact rational from "a/b", an integer literal, or a decimal like "1.4".
inline Rat parse_rat(const std::string& text) {
  auto digits = [](const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };
  std::string s = text;
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    s.erase(0, 1);
  }
  Rat v;
  if (auto slash = s.find('/'); slash != std::string::npos) {
    std::string a = s.substr(0, slash), b = s.substr(slash + 1);
    if (!digits(a) || !digits(b) || Int(b) == 0) throw domain_error("parse_rat: malformed fraction '" + text + "'");
    v = Rat(Int(a), Int(b));
  } else if (auto dot = s.find('.'); dot != std::string::npos) {
    std::string a = s.substr(0, dot), b = s.substr(dot + 1);
    if (a.empty()) a = "0";
    if (!digits(a) || !digits(b) || b.empty()) throw domain_error("parse_rat: malformed decimal '" + text + "'");
    Int scale = 1;
    for (std::size_t i = 0; i < b.size(); ++i) scale *= 10;
    v = Rat(Int(a) * scale + Int(b), scale);
  } else {
    if (!digits(s)) throw domain_error("parse_rat: malformed number '" + text + "'");
    v = Rat(Int(s));
  }
  return neg ? -v : v;
}

namespace detail {

// Largest multiple of a power-of-ten grid step strictly between floor_excl
// and sup, refining the grid until one exists.  The refinement floor mirrors
// the "eps too small for the numeric range" error contract.
inline std::optional<Rat> grid_below(const Rat& sup, int first_exp, const Rat& floor_excl) {
  for (int e = first_exp; e <= 18; ++e) {
    Int p10 = 1;
    for (int i = 0; i < e; ++i) p10 *= 10;
    Rat g(Int(1), p10);
    Int n = floor_rat(sup / g);
    if (Rat(n) * g >= sup) --n;
    Rat cand = Rat(n) * g;
    if (cand > floor_excl && cand < sup) return cand;
  }
  return std::nullopt;
}

inline Rat pow_rat(const Rat& base, unsigned e) {
  Rat acc(1);
  for (unsigned i = 0; i < e; ++i) acc *= base;
  return acc;
}

inline Interval interval_max(const Interval& a, const Interval& b) {
  Interval r = a;
  mpfr_max(r.lo().get(), a.lo().get(), b.lo().get(), MPFR_RNDD);
  mpfr_max(r.hi().get(), a.hi().get(), b.hi().get(), MPFR_RNDU);
  return r;
}

}  // namespace detail

// The keys a relaxed run may override.  count_target is our own relaxed-mode
// extension: the schedule scales the per-level count demands down to roughly
// this many children per parent so that desk-scale trees stay buildable.
inline const std::vector<std::string>& override_keys() {
  static const std::vector<std::string> keys = {"r", "delta", "Mprime", "N", "Nprime", "c0", "k0", "count_target"};
  return keys;
}

inline ParamPack derive_params(const Rat& eps, Mode mode = Mode::strict,
                               const std::map<std::string, std::string>& overrides = {}) {
  if (!(eps > 0 && eps < Rat(1, 2))) throw domain_error("derive_params: eps must lie strictly between 0 and 1/2");
  if (mode == Mode::strict && !overrides.empty())
    throw domain_error("derive_params: overrides require relaxed mode");

  std::map<std::string, Rat> ov;
  for (const auto& [key, text] : overrides) {
    const auto& keys = override_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw domain_error("derive_params: unknown override '" + key + "'");
    ov[key] = parse_rat(text);
  }
  auto taken = [&](const char* key) { return ov.find(key) != ov.end(); };

  ParamPack p;
  p.eps = eps;
  p.mode = mode;
  p.overrides = ov;
  const Rat half_gap = Rat(1, 2) - eps;

  // r: the largest value on a refining power-of-ten grid strictly inside the
  // admissible range (1, min(2, (1/2+eps)/(1/2-eps))).
  if (taken("r")) {
    p.r = ov["r"];
    if (p.r <= 1) throw domain_error("derive_params: r must exceed 1");
  } else {
    Rat rmax = std::min(Rat(2), (Rat(1, 2) + eps) / half_gap);
    auto r = detail::grid_below(rmax, 1, Rat(1));
    if (!r) throw domain_error("derive_params: no admissible r (eps too small for the numeric range)");
    p.r = *r;
  }
  if (!(Rat(1) / (1 + p.r) > half_gap)) p.notes.push_back("local-dimension inequality fails at the active r");
  if (p.r >= 2) p.notes.push_back("r lies outside the range (1,2) the construction assumes");
  p.M = Rat(1) / (p.r - 1);
  p.rho = p.r + Rat(1, 2);

  // delta: largest grid value strictly below the admissible supremum at the
  // active r, so the second local-dimension inequality holds with room.
  if (taken("delta")) {
    p.delta = ov["delta"];
    if (p.delta <= 0) throw domain_error("derive_params: delta must be positive");
  } else {
    Rat dsup = (1 - half_gap * (1 + p.r)) / (2 - 2 * eps);
    auto d = dsup > 0 ? detail::grid_below(dsup, 2, Rat(0)) : std::nullopt;
    if (!d) throw domain_error("derive_params: no admissible delta at the active r");
    p.delta = *d;
  }
  if (!((1 - p.delta) / (1 + p.r + 2 * p.delta) > half_gap))
    p.notes.push_back("local-dimension inequality fails at the active delta");

  Rat mp_formula = std::max(Rat(3 * p.M * p.M), Rat(p.M * p.r / p.delta));
  p.Mprime = taken("Mprime") ? ov["Mprime"] : mp_formula;
  if (p.Mprime != mp_formula) p.notes.push_back("M' departs from max(3M^2, Mr/delta)");

  Rat n_formula = p.Mprime * detail::pow_rat(p.r, 5);
  p.N = taken("N") ? ov["N"] : n_formula;
  if (p.N != n_formula) p.notes.push_back("N departs from M' r^5");

  Rat np_formula = (p.N + 1) * p.r / (p.r - 1);
  p.Nprime = taken("Nprime") ? ov["Nprime"] : np_formula;
  if (p.Nprime != np_formula) p.notes.push_back("N' departs from (N+1) r/(r-1)");

  if (taken("c0")) {
    if (ov["c0"] <= 0) throw domain_error("derive_params: c0 must be positive");
    p.c0 = PowProd(ov["c0"]);
    p.notes.push_back("c0 overridden; the derived constant is 4/(243 pi)");
  }
  if (taken("k0")) {
    Rat k = ov["k0"];
    if (den(k) != 1 || k < 1) throw domain_error("derive_params: k0 must be a positive integer");
    p.k0 = num(k).convert_to<long>();
  }
  if (taken("count_target") && ov["count_target"] < 2)
    throw domain_error("derive_params: count_target below 2 cannot satisfy the branching floor");

  if (mode == Mode::strict && !p.notes.empty())
    throw guarantee_failure("derive_params: strict derivation violated its own invariants");
  return p;
}

// The lower bound the start index must clear: q_{k_0} above all four of
//   5^M,  60 c_0^{-1} rho^{N'+3},  2 rho^{N'} (log_r M' + 4),  2^7 rho^{N'}.
// (The last factor is read as 2^7 rho^{N'}; the source prints the exponent
// ambiguously.)  Terms are reported as log10 enclosures because at the true
// constants they run to hundreds of digits.
struct K0Requirement {
  std::array<Interval, 4> log10_terms{Interval(64), Interval(64), Interval(64), Interval(64)};
  Interval log10_bound{64};
  // Once q_{k_0} clears the bound, membership in the gap set forces
  // q_{k_0+1} > q_{k_0}^N; this many decimal digits at least.
  double next_digits = 0;

  Tri satisfied_by(const Int& q, mpfr_prec_t prec = 192) const {
    Interval lq = Interval::log_of(q, prec) / Interval::log_of(Int(10), prec);
    Tri above = log10_bound.less_than(lq);
    if (above == Tri::yes) return Tri::yes;
    if (lq.less_equal(log10_bound) == Tri::yes) return Tri::no;
    return Tri::unknown;
  }
};

inline K0Requirement k0_requirement(const ParamPack& p, mpfr_prec_t prec = 192) {
  K0Requirement req;
  Interval ln10 = Interval::log_of(Int(10), prec);
  auto log10_pp = [&](const PowProd& pp) { return pp.log_interval(prec) / ln10; };

  req.log10_terms[0] = log10_pp(PowProd::power(Int(5), p.M));
  req.log10_terms[1] = log10_pp(PowProd(Rat(60)) / p.c0 * PowProd::power(p.rho, p.Nprime + 3));
  Interval paren = Interval::log_of(p.Mprime, prec) / Interval::log_of(p.r, prec) + Interval::exact(Int(4), prec);
  if (paren.sign() != Tri::yes) throw domain_error("k0_requirement: log_r(M') + 4 must be positive");
  req.log10_terms[2] =
      log10_pp(PowProd(Rat(2)) * PowProd::power(p.rho, p.Nprime)) + paren.log() / ln10;
  req.log10_terms[3] = log10_pp(PowProd(Int(128)) * PowProd::power(p.rho, p.Nprime));

  req.log10_bound = req.log10_terms[0];
  for (int i = 1; i < 4; ++i) req.log10_bound = detail::interval_max(req.log10_bound, req.log10_terms[i]);
  req.next_digits = p.N.convert_to<double>() * req.log10_bound.lo_double();
  return req;
}

struct K0Options {
  Int digit_budget = Int(100000);  // decimal digits allowed in any materialized q_k
  std::size_t max_k = 4096;
};

struct K0Choice {
  enum class Outcome { found, infeasible, exhausted };
  Outcome outcome = Outcome::exhausted;
  long k0 = -1;
  Int q_k0;
  K0Requirement requirement;
  Tri bound_ok = Tri::unknown;  // q_{k_0} clears the four-term bound
  Tri gap_ok = Tri::unknown;    // k_0 lies in the gap set for N
  std::string diagnostic;
};

// Choose (or, when the pack presets one, audit) the start index.  A preset
// k_0 is honored and reported against the bound; a search refuses to start
// when the bound already forces more digits than the budget allows.
inline K0Choice choose_k0(const ParamPack& p, QuotientStream& s, const K0Options& opt = {}) {
  K0Choice out;
  out.requirement = k0_requirement(p);

  if (p.k0 >= 0) {
    std::size_t k = static_cast<std::size_t>(p.k0);
    if (s.ensure(k + 1) < k + 1) {
      out.diagnostic = "expansion too short to audit the preset start index";
      return out;
    }
    out.outcome = K0Choice::Outcome::found;
    out.k0 = p.k0;
    out.q_k0 = s.q(k);
    out.bound_ok = out.requirement.satisfied_by(out.q_k0);
    out.gap_ok = cmp_gap(s.q(k + 1), s.q(k), p.N);
    if (out.bound_ok != Tri::yes)
      out.diagnostic = "preset start index does not clear the four-term lower bound at the active constants";
    else if (out.gap_ok != Tri::yes)
      out.diagnostic = "preset start index is not followed by a gap of exponent N";
    return out;
  }

  double budget = opt.digit_budget.convert_to<double>();
  if (out.requirement.next_digits > budget) {
    out.outcome = K0Choice::Outcome::infeasible;
    std::ostringstream os;
    os.precision(4);
    os << "infeasible at the active constants: the start index needs q_k > ~1e"
       << out.requirement.log10_bound.lo_double() << ", and the gap after it then needs q_{k+1} > q_k^"
       << p.N.convert_to<double>() << " (~" << out.requirement.next_digits
       << " digits), beyond the " << opt.digit_budget << "-digit budget";
    out.diagnostic = os.str();
    return out;
  }

  for (std::size_t k = 1; k <= opt.max_k; ++k) {
    if (s.ensure(k + 1) < k + 1) {
      out.diagnostic = s.budget_stopped() ? "expansion starved before a qualifying start index"
                                          : "expansion ended before a qualifying start index";
      return out;
    }
    double digits = static_cast<double>(msb(s.q(k))) * 0.30103;
    if (digits > budget) {
      out.diagnostic = "digit budget exceeded while scanning for the start index";
      return out;
    }
    if (out.requirement.satisfied_by(s.q(k)) != Tri::yes) continue;
    if (cmp_gap(s.q(k + 1), s.q(k), p.N) != Tri::yes) continue;
    out.outcome = K0Choice::Outcome::found;
    out.k0 = static_cast<long>(k);
    out.q_k0 = s.q(k);
    out.bound_ok = Tri::yes;
    out.gap_ok = Tri::yes;
    return out;
  }
  out.diagnostic = "no qualifying start index within the scan limit";
  return out;
}

}  // namespace slitforge
