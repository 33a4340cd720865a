#pragma once

// (alpha, beta)-goodness of a slit asks its inverse slope for a convergent
// height inside [alpha |w|, beta |w|].  Delta children displace w by 2v where
// v runs over primitive vectors with height in the closed band
// [beta |w|, 2 beta |w|] and cross product in the open window
// (1/beta, 1/alpha).  Normality is goodness along a whole exponent ramp
// t in [1, T]; it reduces to finitely many emptiness checks, one per
// consecutive pair of inverse-slope heights.

#include "slitforge/gosper.hpp"
#include "slitforge/holonomy.hpp"
#include "slitforge/liouville.hpp"
#include "slitforge/powprod.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace slitforge {

// Universal density constant 4/(243 pi) behind the Delta child-count
// guarantee.  Relaxed runs may pass a larger value; every count bound then
// refers to the active one.
inline PowProd c0_default() { return PowProd(Rat(4, 243)) * PowProd::pi_power(-1); }

namespace detail {

// Sign of |c| - bound.  Exact through the lambda expansion when the bound is
// plainly rational, otherwise by escalating intervals on both sides.
inline Sign sign_abs_minus(const LambdaLinear& c, const PowProd& bound, QuotientStream& lam,
                           mpfr_prec_t max_prec = 4096) {
  if (bound.plain_rational()) return compare_abs_lin(c, LambdaLinear(bound.coef(), Rat(0)), lam);
  for (mpfr_prec_t prec = 128; prec <= max_prec; prec *= 2) {
    Interval d = lin_interval(c, lam, prec, static_cast<std::size_t>(prec / 4)).abs() - bound.value_interval(prec);
    Tri s = d.sign();
    if (s == Tri::yes) return Sign::positive;
    if (s == Tri::no) return Sign::negative;
  }
  return Sign::indeterminate;
}

inline Int floor_real(const Real& x) {
  Int z;
  mpfr_get_z(z.backend().data(), x.get(), MPFR_RNDD);
  return z;
}

// Smallest k >= 0 with (a k + c) mod m in [0, L], or nullopt when the orbit
// never enters the window.  After reducing a and c, a hit at k > 0 forces
// a k mod m into [m - c, m - c + L]; the multiples of a meeting a shifted copy
// of that window are found by the same question at modulus a, so the moduli
// shrink as in the Euclidean algorithm and each query costs O(log m) steps.
inline std::optional<Int> min_k_in_window(Int a, Int m, Int c, const Int& L) {
  a %= m;
  if (a < 0) a += m;
  c %= m;
  if (c < 0) c += m;
  if (c <= L) return Int(0);
  if (a == 0) return std::nullopt;
  Int lo = m - c, hi = m - c + L;
  auto j = min_k_in_window(-m, a, -lo, hi - lo);
  if (!j) return std::nullopt;
  return (lo + *j * m + a - 1) / a;
}

}  // namespace detail

struct GoodnessWitness {
  HolVec w;
  PowProd alpha, beta;
  Int q;                  // convergent height with alpha |w| <= q <= beta |w|
  std::size_t index = 0;  // its position in the inverse-slope expansion
};

struct GoodCheck {
  Tri verdict = Tri::unknown;
  std::optional<GoodnessWitness> witness;
};

// Walk the inverse-slope heights upward; the first one reaching alpha |w|
// settles the question since heights never decrease.  A starved stream (or a
// scan past max_depth) leaves the verdict unknown; a rational slope that
// terminates below alpha |w| is a definite no.
inline GoodCheck is_good(const HolVec& w_in, const PowProd& alpha, const PowProd& beta, const StreamPtr& lam,
                         std::size_t max_depth = 4096) {
  HolVec w = normalize_slit(w_in);
  if (!is_slit(w) || w.y <= 0) throw domain_error("is_good: w must be a slit of positive height");
  if (alpha.cmp_less(Int(1)) == Tri::yes) throw domain_error("is_good: alpha must be at least 1");
  PowProd A = alpha * PowProd(w.y);
  PowProd B = beta * PowProd(w.y);
  StreamPtr hs = make_homographic(lam, num(w.x.s), w.y);
  GoodCheck out;
  for (std::size_t i = 0; i <= max_depth; ++i) {
    if (hs->ensure(i) < i) {
      if (!hs->budget_stopped()) out.verdict = Tri::no;
      return out;
    }
    Int q = hs->q(i);
    Tri below = PowProd(q).cmp_less(A);
    if (below == Tri::unknown) throw precision_exhausted("is_good: height against alpha |w| undecidable");
    if (below == Tri::yes) continue;
    Tri past = B.cmp_less(PowProd(q));
    if (past == Tri::unknown) throw precision_exhausted("is_good: height against beta |w| undecidable");
    if (past == Tri::yes) {
      out.verdict = Tri::no;
      return out;
    }
    out.verdict = Tri::yes;
    out.witness = GoodnessWitness{w, alpha, beta, q, i};
    return out;
  }
  return out;
}

struct DeltaChild {
  HolVec child;  // w + 2v
  HolVec v;
  LambdaLinear cross_wv;
};

struct DeltaChildOptions {
  std::optional<Int> max_children;  // stop early, flagged truncated
  mpfr_prec_t prec = 192;
  std::size_t good_depth = 4096;   // scan depth for the parent goodness check
  Int dense_band_limit = 1 << 16;  // bands at least this wide switch to the jump walk
};

struct DeltaChildSet {
  std::vector<DeltaChild> children;
  GoodCheck parent;               // (alpha, beta)-goodness of w itself
  bool guarantee_active = false;  // parent good and alpha < c_0 beta
  Interval count_bound;           // c_0 beta / alpha at opt.prec
  bool truncated = false;
  Int y_lo = Int(0), y_hi = Int(-1);  // realized height band, empty when y_lo > y_hi
};

// Enumerate the displacement family exactly.  Per height y in the band, the
// cross-product window pins n p inside an interval of length 2/alpha around
// (lambda + m) y, so only a handful of p survive; each survivor is certified
// against the open window before emission.  An enumeration for a parent that
// is not good still runs, with the count guarantee withdrawn.
//
// Narrow bands scan every height.  Wide bands (the parent of a full-size
// child set has |w|^r of them) instead jump between the heights whose
// residue (P y mod Q) lands within H of 0, where P/Q approximates
// (lambda + m)/n and H over-covers the cross window plus the approximation
// slack; every emitted child still passes the same exact certification, so
// the two paths agree and the walk costs O(log Q) per visited height.
inline DeltaChildSet delta_children(const HolVec& w_in, const PowProd& alpha, const PowProd& beta,
                                    const StreamPtr& lam, const PowProd& c0 = c0_default(),
                                    const DeltaChildOptions& opt = {}) {
  HolVec w = normalize_slit(w_in);
  if (!is_slit(w) || w.y <= 0) throw domain_error("delta_children: w must be a slit of positive height");
  DeltaChildSet out;
  out.parent = is_good(w, alpha, beta, lam, opt.good_depth);
  out.guarantee_active = out.parent.verdict == Tri::yes && alpha.cmp_less(c0 * beta) == Tri::yes;
  out.count_bound = (c0 * beta / alpha).value_interval(opt.prec);

  PowProd Bw = beta * PowProd(w.y);
  auto lo = Bw.ceil_int();
  auto hi = (PowProd(Rat(2)) * Bw).floor_int();
  if (!lo || !hi) throw precision_exhausted("delta_children: height band undecidable");
  out.y_lo = *lo < 1 ? Int(1) : *lo;
  out.y_hi = *hi;
  if (out.y_lo > out.y_hi) return out;
  if (alpha.cmp_less(beta) == Tri::no) return out;  // 1/beta >= 1/alpha: nothing can pass

  const Int m = num(w.x.s);
  const Int n = w.y;
  const bool jump_walk = out.y_hi - out.y_lo >= opt.dense_band_limit;
  // tighten lambda until its slack at the widest height is below a quarter
  // step, so each per-height candidate hull stays short
  Rat llo, lhi;
  lam->ensure(8);
  lam->enclosure(llo, lhi);
  while ((lhi - llo) * Rat(out.y_hi * 4) > Rat(n)) {
    std::size_t d = lam->depth();
    if (!lam->refine() || lam->depth() == d) break;
    lam->enclosure(llo, lhi);
  }
  if (jump_walk) {
    // the walk inflates its residue window by the slack, so drive that below
    // an eighth of the cross window or give up rather than revisit everything
    while (lhi > llo) {
      if ((alpha * PowProd(Rat((lhi - llo) * Rat(out.y_hi * 8)))).cmp_less(Int(1)) == Tri::yes) break;
      std::size_t d = lam->depth();
      if (!lam->refine() || lam->depth() == d)
        throw precision_exhausted("delta_children: expansion too shallow for the height band");
      lam->enclosure(llo, lhi);
    }
  }
  Interval lam_iv = Interval::from_endpoints(llo, lhi, opt.prec);
  Interval inva = (PowProd(Rat(1)) / alpha).value_interval(opt.prec);
  Interval n_iv = Interval::exact(n, opt.prec);
  PowProd upper = PowProd(Rat(1)) / alpha, lower = PowProd(Rat(1)) / beta;
  auto full = [&] { return opt.max_children && Int(out.children.size()) >= *opt.max_children; };
  auto scan_height = [&](const Int& y) -> bool {
    if (full()) {
      out.truncated = true;
      return false;
    }
    Interval S = (lam_iv + Interval::exact(m, opt.prec)) * Interval::exact(y, opt.prec);
    Int p_from = detail::floor_real(((S - inva) / n_iv).lo());
    Int p_to = detail::floor_real(((S + inva) / n_iv).hi()) + 1;
    if (p_to - p_from > 64) throw precision_exhausted("delta_children: candidate hull failed to shrink");
    for (Int p = p_from; p <= p_to; ++p) {
      if (gcd(p, y) != 1) continue;
      HolVec v = make_loop(p, y);
      LambdaLinear c = cross(w, v);
      Sign above = detail::sign_abs_minus(c, lower, *lam);
      if (above == Sign::indeterminate) throw precision_exhausted("delta_children: cross window undecidable");
      if (above != Sign::positive) continue;
      Sign below = detail::sign_abs_minus(c, upper, *lam);
      if (below == Sign::indeterminate) throw precision_exhausted("delta_children: cross window undecidable");
      if (below != Sign::negative) continue;
      if (full()) {
        out.truncated = true;
        return false;
      }
      out.children.push_back({w + v.scaled(2), v, c});
    }
    return true;
  };
  if (!jump_walk) {
    for (Int y = out.y_lo; y <= out.y_hi; ++y)
      if (!scan_height(y)) break;
    return out;
  }
  // a child at height y puts (lambda + m) y within 1/alpha of a multiple of
  // n, so P y mod Q sits within H of 0 for P/Q = (llo + m)/n and H covering
  // Q/(alpha n) plus Q y_hi times the enclosure slack
  Rat theta = (llo + Rat(m)) / Rat(n);
  const Int Q = den(theta);
  Int P = num(theta) % Q;
  if (P < 0) P += Q;
  auto h_cross = (PowProd(Rat(Rat(Q) / Rat(n))) / alpha).ceil_int();
  if (!h_cross) throw precision_exhausted("delta_children: residue window undecidable");
  const Int H = *h_cross + ceil_rat(Rat((lhi - llo) / Rat(n) * Rat(out.y_hi) * Rat(Q))) + 1;
  Int y = out.y_lo;
  Int res = (P * y + H) % Q;
  Int scanned_to = out.y_lo - 1;
  while (true) {
    if (res <= 2 * H) {
      if (!scan_height(y)) return out;
      scanned_to = y;
    }
    auto j = detail::min_k_in_window(P, Q, res + P, 2 * H);
    if (!j) break;
    Int step = *j + 1;
    y += step;
    if (y > out.y_hi) break;
    res = (res + step * P) % Q;
  }
  if (full() && scanned_to < out.y_hi) out.truncated = true;
  return out;
}

struct ChildGoodness {
  GoodCheck upper;               // (alpha - 1/2, beta)-good
  Tri not_lower = Tri::unknown;  // confirmed to miss the (1, alpha - 1/2) window; unknown = unchecked
};

// Every Delta child should be (alpha - 1/2, beta)-good while missing the
// lower window (1, alpha - 1/2) entirely.  The lower check is a diagnostic;
// when the child's expansion cannot be materialized that far it reports
// unchecked rather than guessing.
inline ChildGoodness check_child_goodness(const HolVec& child, const Rat& alpha, const PowProd& beta,
                                          const StreamPtr& lam, std::size_t max_depth = 4096) {
  ChildGoodness out;
  out.upper = is_good(child, PowProd(alpha - Rat(1, 2)), beta, lam, max_depth);
  GoodCheck low = is_good(child, PowProd(Rat(1)), PowProd(alpha - Rat(1, 2)), lam, max_depth);
  out.not_lower = tri_not(low.verdict);
  return out;
}

struct NormalWindow {
  Int q_lo;  // consecutive height pair; open-ended past a terminated slope
  std::optional<Int> q_hi;
  Tri empty = Tri::unknown;  // the failure window between them misses [1, T]
};

struct NormalityWitness {
  HolVec w;
  PowProd alpha;
  Rat r;
  Tri verdict = Tri::unknown;
  bool vacuous = false;  // T < 1: the exponent ramp is empty
  Interval T;            // alpha rho^T = |w|^{r-1}, rho = r + 1/2
  std::vector<NormalWindow> windows;
  std::optional<std::size_t> failure_window;  // index of a certified nonempty window
  std::optional<HolVec> top;                  // tallest convergent below |w|^r, when known
};

// alpha-normality: for every t in [1, T] the window
// [alpha rho^t |w|, |w|^{1 + (r-1) t}] must contain an inverse-slope height.
// Coverage can only break between consecutive heights, so the decision is a
// finite list of per-pair emptiness checks, each certified with directed
// rounding at escalating precision and allowed to come back unknown.
inline NormalityWitness is_normal(const HolVec& w_in, const PowProd& alpha, const Rat& r, const StreamPtr& lam,
                                  mpfr_prec_t prec = 192) {
  HolVec w = normalize_slit(w_in);
  if (!is_slit(w) || w.y <= 0) throw domain_error("is_normal: w must be a slit of positive height");
  if (r <= 1) throw domain_error("is_normal: need r > 1");
  if (alpha.cmp_less(Int(1)) == Tri::yes) throw domain_error("is_normal: alpha must be at least 1");
  NormalityWitness out;
  out.w = w;
  out.alpha = alpha;
  out.r = r;
  const Rat rho = r + Rat(1, 2);

  for (mpfr_prec_t P = prec;; P *= 2) {
    Interval Lw = Interval::log_of(Rat(w.y), P);
    out.T = (Interval::exact(r - 1, P) * Lw - alpha.log_interval(P)) / Interval::log_of(rho, P);
    Tri ge1 = (out.T - Interval::exact(Rat(1), P)).sign();
    if (ge1 == Tri::no) {
      out.vacuous = true;
      out.verdict = Tri::yes;
      return out;
    }
    if (ge1 == Tri::yes) break;
    if (P >= 4096) return out;  // T against 1 undecidable
  }

  // materialize inverse-slope heights up to the first one reaching |w|^r
  PowProd Wr = PowProd::power(Rat(w.y), r);
  StreamPtr hs = make_homographic(lam, num(w.x.s), w.y);
  std::vector<Int> qs;
  bool terminated = false, starved = false, reached = false;
  for (std::size_t i = 0;; ++i) {
    if (hs->ensure(i) < i) {
      (hs->budget_stopped() ? starved : terminated) = true;
      break;
    }
    qs.push_back(hs->q(i));
    Tri below = PowProd(hs->q(i)).cmp_less(Wr);
    if (below == Tri::unknown) throw precision_exhausted("is_normal: height against |w|^r undecidable");
    if (below == Tri::no) {
      reached = true;
      break;
    }
  }
  if (reached && qs.size() >= 2) out.top = make_loop(hs->p(qs.size() - 2), qs[qs.size() - 2]);
  if (terminated && !qs.empty()) out.top = make_loop(hs->p(qs.size() - 1), qs.back());
  (void)starved;

  for (mpfr_prec_t P = prec;; P *= 2) {
    out.windows.clear();
    out.failure_window.reset();
    Interval Lw = Interval::log_of(Rat(w.y), P);
    Interval La = alpha.log_interval(P);
    Interval Lr = Interval::log_of(rho, P);
    Interval Tiv = (Interval::exact(r - 1, P) * Lw - La) / Lr;
    out.T = Tiv;
    Interval one = Interval::exact(Rat(1), P);
    Interval dh = Interval::exact(r - 1, P) * Lw;
    bool undecided = false;
    auto push_pair = [&](const Int& qa, const std::optional<Int>& qb) {
      // failure window (t_lo, t_hi): the lower edge has passed qa while the
      // upper edge has not yet reached qb
      Interval t_lo = (Interval::log_of(qa, P) - La - Lw) / Lr;
      Tri nonempty;
      if (!qb) {
        nonempty = (Tiv - t_lo).sign();
      } else {
        Interval t_hi = (Interval::log_of(*qb, P) - Lw) / dh;
        Tri lo1 = (t_lo - one).sign();
        Tri fa = (t_hi - one).sign();                                 // when t_lo < 1
        Tri fb = tri_and((t_hi - t_lo).sign(), (Tiv - t_lo).sign());  // when t_lo >= 1
        if (lo1 == Tri::no)
          nonempty = fa;
        else if (lo1 == Tri::yes)
          nonempty = fb;
        else
          nonempty = fa == fb ? fa : Tri::unknown;
      }
      NormalWindow row;
      row.q_lo = qa;
      row.q_hi = qb;
      row.empty = tri_not(nonempty);
      if (nonempty == Tri::yes && !out.failure_window) out.failure_window = out.windows.size();
      if (nonempty == Tri::unknown) undecided = true;
      out.windows.push_back(row);
    };
    for (std::size_t i = 0; i + 1 < qs.size(); ++i) push_pair(qs[i], qs[i + 1]);
    if (terminated && !qs.empty()) push_pair(qs.back(), std::nullopt);
    if (out.failure_window) {
      out.verdict = Tri::no;
      return out;
    }
    if (!undecided) {
      // a starved scan with every materialized window empty stays unknown
      if (reached || terminated) out.verdict = Tri::yes;
      return out;
    }
    if (P >= 4096) return out;
  }
}

struct NormalSufficiency {
  Tri length_lower = Tri::unknown;  // q_{k+1}^{1/N} <= |w|
  Tri length_upper = Tri::unknown;  // |w| < q_{k'}^{1/r}
  GoodCheck good;                   // (alpha rho^{N'}, |w|^{r-1})-goodness
  Tri verdict = Tri::unknown;       // yes certifies alpha-normal; never a refutation
};

// Fast sufficient test: inside the length window, a single goodness check at
// the boosted lower bound alpha rho^{N'} already certifies alpha-normality.
// A failed check proves nothing, so the verdict degrades to unknown.
inline NormalSufficiency normal_sufficient(const HolVec& w_in, const PowProd& alpha, const Rat& r, const Rat& Nprime,
                                           const Rat& N, const Int& q_next, const Int& q_kprime, const StreamPtr& lam,
                                           std::size_t max_depth = 4096) {
  HolVec w = normalize_slit(w_in);
  if (!is_slit(w) || w.y <= 0) throw domain_error("normal_sufficient: w must be a slit of positive height");
  if (r <= 1 || N <= 0) throw domain_error("normal_sufficient: need r > 1 and N > 0");
  NormalSufficiency out;
  PowProd W(w.y);
  out.length_lower = tri_not(W.cmp_less(PowProd::power(q_next, Rat(1) / N)));
  out.length_upper = W.cmp_less(PowProd::power(q_kprime, Rat(1) / r));
  out.good = is_good(w, alpha * PowProd::power(r + Rat(1, 2), Nprime), PowProd::power(Rat(w.y), r - 1), lam, max_depth);
  if (out.length_lower == Tri::yes && out.length_upper == Tri::yes && out.good.verdict == Tri::yes)
    out.verdict = Tri::yes;
  return out;
}

struct NormalReject {
  DeltaChild child;
  NormalityWitness why;
  std::optional<HolVec> u_prime;  // tallest convergent of the child below |child|^r
  std::optional<Int> strip;       // the signed a minimizing |(w x u') + 2a|
  std::optional<Int> cluster;     // u' x u; splits a strip into translation classes
};

struct NormalChildSet {
  DeltaChildSet delta;  // the unfiltered enumeration at beta = |w|^{r-1}
  std::vector<DeltaChild> accepted;
  std::vector<NormalReject> rejected;
  std::vector<DeltaChild> undecided;
  Tri parent_normal = Tri::unknown;
  Tri length_lower = Tri::unknown;  // q_{k+1}^{1/N} <= |w|
  Tri length_upper = Tri::unknown;  // 5 |w|^r < q_{k'}^{1/r}
  Tri density = Tri::unknown;       // 240 alpha^2 rho^{3N'+3} <= c_0 |w|^{(r-1)^2}
  std::vector<std::string> hypothesis_failures;
  bool guarantee_active = false;
  Interval count_bound;  // c_0 |w|^{r-1} / (2 alpha rho^{N'+1})
  std::size_t strips = 0, clusters = 0, max_cluster = 0;
  std::optional<HolVec> u;  // the parent's own tallest convergent below |w|^r
};

// Delta enumeration at beta = |w|^{r-1} filtered by (alpha r)-normality of
// each child.  Hypothesis failures are itemized rather than thrown: the
// enumeration is still an answer, only the count guarantee is withdrawn.
// Rejects carry the strip and cluster coordinates their witnessing
// convergents fall into, and the set-level counters summarize them.
inline NormalChildSet normal_children(const HolVec& w_in, const Rat& alpha, const Rat& r, const Rat& Nprime,
                                      const Rat& N, const Int& q_next, const Int& q_kprime, const StreamPtr& lam,
                                      const PowProd& c0 = c0_default(), const DeltaChildOptions& opt = {},
                                      const std::optional<PowProd>& density_c0 = std::nullopt) {
  HolVec w = normalize_slit(w_in);
  if (!is_slit(w) || w.y <= 0) throw domain_error("normal_children: w must be a slit of positive height");
  if (r <= 1 || N <= 0 || alpha <= 1) throw domain_error("normal_children: need r > 1, N > 0, alpha > 1");
  NormalChildSet out;
  const Rat rho = r + Rat(1, 2);
  PowProd beta = PowProd::power(Rat(w.y), r - Rat(1));

  NormalityWitness pn = is_normal(w, PowProd(alpha), r, lam, opt.prec);
  out.parent_normal = pn.verdict;
  out.u = pn.top;
  out.length_lower = tri_not(PowProd(w.y).cmp_less(PowProd::power(q_next, Rat(1) / N)));
  out.length_upper = (PowProd(Rat(5)) * PowProd::power(Rat(w.y), r)).cmp_less(PowProd::power(q_kprime, Rat(1) / r));
  PowProd lhs = PowProd(Rat(240) * alpha * alpha) * PowProd::power(rho, 3 * Nprime + 3);
  // a relaxed run may check density against a caller-supplied constant; the
  // count bound below always refers to the true c0
  PowProd rhs = (density_c0 ? *density_c0 : c0) * PowProd::power(Rat(w.y), (r - 1) * (r - 1));
  out.density = tri_not(rhs.cmp_less(lhs));
  auto itemize = [&](Tri t, const char* what) {
    if (t == Tri::yes) return;
    out.hypothesis_failures.push_back(std::string(what) + (t == Tri::no ? " fails" : " is undecided"));
  };
  itemize(out.parent_normal, "parent normality");
  itemize(out.length_lower, "lower length bound q_{k+1}^{1/N} <= |w|");
  itemize(out.length_upper, "upper length bound 5 |w|^r < q_{k'}^{1/r}");
  itemize(out.density, "density inequality at the active constants");
  out.guarantee_active = out.hypothesis_failures.empty();
  out.count_bound =
      (c0 * beta / (PowProd(2 * alpha) * PowProd::power(rho, Nprime + 1))).value_interval(opt.prec);

  out.delta = delta_children(w, PowProd(alpha), beta, lam, c0, opt);
  std::set<Int> strip_ids;
  std::map<std::pair<Int, Int>, std::size_t> cluster_sizes;
  for (const DeltaChild& dc : out.delta.children) {
    NormalityWitness nc = is_normal(dc.child, PowProd(alpha * r), r, lam, opt.prec);
    if (nc.verdict == Tri::yes) {
      out.accepted.push_back(dc);
      continue;
    }
    if (nc.verdict == Tri::unknown) {
      out.undecided.push_back(dc);
      continue;
    }
    NormalReject rej;
    rej.child = dc;
    rej.u_prime = nc.top;
    rej.why = std::move(nc);
    if (rej.u_prime) {
      LambdaLinear c = cross(w, *rej.u_prime);
      try {
        LinForm half(-c.s / 2, -c.t / 2, Rat(0));
        rej.strip = round_form(half, lam, DirectionRef::rational(Rat(0))).z;
      } catch (const precision_exhausted&) {
        // strip id is a diagnostic; leave it unset when the rounding starves
      }
      if (out.u) rej.cluster = detail::icross(*rej.u_prime, *out.u);
      if (rej.strip) {
        strip_ids.insert(*rej.strip);
        if (rej.cluster) {
          std::size_t& n = cluster_sizes[{*rej.strip, *rej.cluster}];
          ++n;
          if (n > out.max_cluster) out.max_cluster = n;
        }
      }
    }
    out.rejected.push_back(std::move(rej));
  }
  out.strips = strip_ids.size();
  out.clusters = cluster_sizes.size();
  return out;
}

}  // namespace slitforge
