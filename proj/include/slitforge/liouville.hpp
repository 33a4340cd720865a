#pragma once

// Slits short enough relative to the gap after q_k collapse onto a primitive
// integer direction: d u = (p_k + m q_k, n q_k) where d is the gcd of the
// pair.  This file computes the collapse record, the two lattice companions
// of u, the child families w + 2(u_tilde + a u), and the area dichotomy for
// twist directions near a collapsed slit.

#include "slitforge/gosper.hpp"
#include "slitforge/holonomy.hpp"
#include "slitforge/powprod.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <utility>
#include <vector>

namespace slitforge {

namespace detail {

inline Int icross(const HolVec& a, const HolVec& b) {
  LambdaLinear c = cross(a, b);
  if (c.t != 0 || den(c.s) != 1) throw domain_error("integer cross product expected");
  return num(c.s);
}

}  // namespace detail

// Both lattice companions of a primitive direction u with u.y >= 1: the
// solutions of u x t = +1 and -1, each shifted into 0 < t.y <= u.y.  The +1
// companion comes first.
inline std::array<HolVec, 2> companions(const HolVec& u) {
  if (!is_loop(u) || u.y < 1) throw domain_error("companions: u must be a primitive direction of positive height");
  Int ux = num(u.x.s), uy = u.y;
  Int g, s, t;
  mpz_gcdext(g.backend().data(), s.backend().data(), t.backend().data(), ux.backend().data(), uy.backend().data());
  // ux*s + uy*t = 1, so y = s solves ux*y - uy*x = 1 with x = -t
  auto shifted = [&](const Int& y0, int sign) {
    Int y = ((y0 % uy) + uy) % uy;
    if (y == 0) y = uy;
    Int x = (ux * y - sign) / uy;
    return make_loop(x, y);
  };
  return {shifted(s, 1), shifted(-s, -1)};
}

// w collapsed at level k.  The defining identity d u = (p_k + m q_k, n q_k)
// holds exactly, u is primitive, and u_tilde is the +1 companion.
struct LiouvilleConvergentRecord {
  HolVec w;
  std::size_t k = 0;
  Int d;
  HolVec u;
  HolVec u_tilde;
};

inline LiouvilleConvergentRecord liouville_convergent(const HolVec& w_in, std::size_t k, QuotientStream& lam) {
  HolVec w = normalize_slit(w_in);
  if (!is_slit(w) || w.y <= 0) throw domain_error("liouville_convergent: w must be a slit of positive height");
  if (lam.ensure(k + 1) < k + 1)
    throw truncation_error("liouville_convergent: expansion too short for level k+1", static_cast<long>(lam.depth()));
  const Int& qk = lam.q(k);
  if (2 * w.y * qk >= lam.q(k + 1))
    throw domain_error("liouville_convergent: slit is too long for the gap after q_k");
  Int m = num(w.x.s);
  Int X = lam.p(k) + m * qk;
  Int Y = w.y * qk;
  LiouvilleConvergentRecord rec;
  rec.w = w;
  rec.k = k;
  rec.d = gcd(X, Y);
  rec.u = make_loop(X / rec.d, Y / rec.d);
  // gcd(X, q_k) = 1 forces d | n, hence q_k <= |u| <= n q_k
  if (rec.d > w.y) throw guarantee_failure("liouville_convergent: collapse divisor exceeds the slit height");
  rec.u_tilde = companions(rec.u)[0];
  return rec;
}

// On-demand part of the collapse guarantee: u appears among the convergents
// of (lambda + m)/n and the height that follows it exceeds q_{k+1}/2.  A
// terminating expansion whose last convergent is u leaves no next height and
// counts as a pass; a starved stream leaves the verdict unknown.
struct NextHeightCheck {
  Tri beyond_half_gap = Tri::unknown;
  std::optional<Int> next_height;
  std::size_t index = 0;
};

inline NextHeightCheck verify_next_height(const LiouvilleConvergentRecord& rec, const StreamPtr& lam) {
  StreamPtr hs = make_homographic(lam, num(rec.w.x.s), rec.w.y);
  NextHeightCheck out;
  std::size_t i = 0;
  for (;; ++i) {
    if (hs->ensure(i) < i) {
      if (hs->budget_stopped()) return out;
      throw guarantee_failure("verify_next_height: u is not a convergent of the inverse slope");
    }
    if (hs->q(i) == rec.u.y && hs->p(i) == num(rec.u.x.s)) break;
    if (hs->q(i) > rec.u.y) throw guarantee_failure("verify_next_height: u is not a convergent of the inverse slope");
  }
  out.index = i;
  if (hs->ensure(i + 1) < i + 1) {
    if (hs->budget_stopped()) return out;
    out.beyond_half_gap = Tri::yes;  // exact rational slope ending at u
    return out;
  }
  out.next_height = hs->q(i + 1);
  out.beyond_half_gap = 2 * *out.next_height > lam->q(rec.k + 1) ? Tri::yes : Tri::no;
  return out;
}

enum class LambdaMode { window, first_a };

struct LambdaChildOptions {
  LambdaMode mode = LambdaMode::window;
  Rat r = Rat(3, 2);                // window mode: |w|^r <= |v| <= 2 |w|^r
  Int a_count = Int(3);             // first_a mode: a = 1..a_count on each branch
  std::optional<Int> max_children;  // stop early, flagged truncated
};

struct LambdaChild {
  HolVec child;  // w + 2v
  HolVec v;      // u_tilde + a u
  Int a;
  int branch = 0;
  LambdaLinear cross_wv;
};

struct LambdaChildSet {
  LiouvilleConvergentRecord rec;
  std::vector<LambdaChild> children;
  bool empty_window = false;
  bool truncated = false;
  Int v_lo, v_hi;  // window mode: the realized integer height window
};

// Children w + 2v with v = u_tilde + a u ranging over both companion
// branches, emitted by increasing height (ties by the integer part).  An
// empty height window is an answer, not an error.
inline LambdaChildSet lambda_children(const HolVec& w_in, std::size_t k, QuotientStream& lam,
                                      const LambdaChildOptions& opt = {}) {
  LambdaChildSet out;
  out.rec = liouville_convergent(w_in, k, lam);
  const HolVec& u = out.rec.u;
  auto comp = companions(u);

  // per-branch range of a, inclusive
  std::array<Int, 2> a_lo, a_hi;
  if (opt.mode == LambdaMode::window) {
    if (opt.r <= 0) throw domain_error("lambda_children: window exponent must be positive");
    PowProd wr = PowProd(Rat(out.rec.w.y)).pow(opt.r);
    auto lo = wr.ceil_int();
    auto hi = (PowProd(Rat(2)) * wr).floor_int();
    if (!lo || !hi) throw precision_exhausted("lambda_children: window bounds undecidable");
    out.v_lo = *lo;
    out.v_hi = *hi;
    for (int b = 0; b < 2; ++b) {
      a_lo[b] = std::max(Int(1), ceil_div(*lo - comp[b].y, u.y));
      a_hi[b] = floor_div(*hi - comp[b].y, u.y);
    }
  } else {
    for (int b = 0; b < 2; ++b) {
      a_lo[b] = 1;
      a_hi[b] = opt.a_count;
    }
  }

  auto v_at = [&](int b, const Int& a) { return comp[b] + u.scaled(a); };
  auto key_less = [](const HolVec& p, const HolVec& q) {
    if (p.y != q.y) return p.y < q.y;
    return p.x.s < q.x.s;
  };
  std::array<Int, 2> a_cur = a_lo;
  while (a_cur[0] <= a_hi[0] || a_cur[1] <= a_hi[1]) {
    if (opt.max_children && Int(out.children.size()) >= *opt.max_children) {
      out.truncated = true;
      break;
    }
    int b;
    if (a_cur[0] > a_hi[0])
      b = 1;
    else if (a_cur[1] > a_hi[1])
      b = 0;
    else
      b = key_less(v_at(0, a_cur[0]), v_at(1, a_cur[1])) ? 0 : 1;
    HolVec v = v_at(b, a_cur[b]);
    out.children.push_back({out.rec.w + v.scaled(2), v, a_cur[b], b, cross(out.rec.w, v)});
    ++a_cur[b];
  }
  out.empty_window = out.children.empty() && !out.truncated;
  return out;
}

// Area dichotomy for a twist pair: either the twist direction is the collapse
// direction itself, or its cross product with w is certified above 1/(2 q_k).
struct MinAreaVerdict {
  enum class Case { area_bounded_below, along_u };
  Case which = Case::area_bounded_below;
  LiouvilleConvergentRecord rec;
  Interval cross_abs;
};

inline MinAreaVerdict check_min_area(const HolVec& w_in, const HolVec& w2_in, const HolVec& v, std::size_t k,
                                     QuotientStream& lam, mpfr_prec_t prec = 128) {
  HolVec w = normalize_slit(w_in), w2 = normalize_slit(w2_in);
  auto tw = dehn_related(w, w2, v, lam);
  if (!tw || tw->identity) throw domain_error("check_min_area: slits are not twist-related along v");
  LambdaLinear c = cross(w, v);
  Sign below = compare_abs_lin(c, LambdaLinear(Rat(1, 2), Rat(0)), lam);
  if (below == Sign::indeterminate) throw precision_exhausted("check_min_area: |w x v| vs 1/2 undecidable");
  if (below != Sign::negative) throw domain_error("check_min_area: twist area must stay below 1/2");
  if (w2.y <= w.y) throw domain_error("check_min_area: expected |w| < |w'|");
  if (lam.ensure(k + 1) < k + 1)
    throw truncation_error("check_min_area: expansion too short for level k+1", static_cast<long>(lam.depth()));
  if (2 * w2.y * lam.q(k) >= lam.q(k + 1))
    throw domain_error("check_min_area: |w'| must stay below the gap after q_k");
  MinAreaVerdict out;
  out.rec = liouville_convergent(w, k, lam);
  const HolVec& u = out.rec.u;
  if (v == u || v == -u) {
    out.which = MinAreaVerdict::Case::along_u;
    return out;
  }
  Sign above = compare_abs_lin(c, LambdaLinear(Rat(Int(1), 2 * lam.q(k)), Rat(0)), lam);
  if (above == Sign::indeterminate) throw precision_exhausted("check_min_area: |w x v| vs 1/(2 q_k) undecidable");
  if (above != Sign::positive)
    throw guarantee_failure("check_min_area: independent twist direction with area at most 1/(2 q_k)");
  out.cross_abs = lin_interval(c, lam, prec).abs();
  return out;
}

// The along_u case leaves a universal claim behind: every direction v'
// independent of u with |w' x v'| < 1/2 satisfies |v'| > q_{k+1}/4.  Verify
// it for one supplied v'; an area condition that already fails makes the
// claim vacuously true.
inline Tri check_independent_height(const HolVec& w2_in, const HolVec& u, const HolVec& v_prime, std::size_t k,
                                    QuotientStream& lam) {
  HolVec w2 = normalize_slit(w2_in);
  if (detail::icross(u, v_prime) == 0) throw domain_error("check_independent_height: v' must be independent of u");
  Sign below = compare_abs_lin(cross(w2, v_prime), LambdaLinear(Rat(1, 2), Rat(0)), lam);
  if (below == Sign::indeterminate) throw precision_exhausted("check_independent_height: area vs 1/2 undecidable");
  if (below != Sign::negative) return Tri::yes;
  if (lam.ensure(k + 1) < k + 1)
    throw truncation_error("check_independent_height: expansion too short for level k+1",
                           static_cast<long>(lam.depth()));
  return 4 * v_prime.height() > lam.q(k + 1) ? Tri::yes : Tri::no;
}

}  // namespace slitforge
