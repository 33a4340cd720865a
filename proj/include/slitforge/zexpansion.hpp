// Best-approximation expansions over slit-holonomy families: records of the
// vectors that successively minimize the horizontal component in a chosen
// family, relative growth classification, interval covers of badly
// approximable direction sets, and the certificate checker for limit
// directions produced by iterated twist constructions.
#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cf_engine.hpp"
#include "holonomy.hpp"
#include "powprod.hpp"

namespace slitforge {

// Which holonomy family the expansion runs over.  loops is the primitive
// integer family; separating_slits is the even/even slit family together
// with its horizontal seed.
struct ZSet {
  enum class Members { loops, separating_slits, both };
  Members members = Members::loops;
  Rat mu_bound = Rat(1);

  bool has_loops() const { return members != Members::separating_slits; }
  bool has_slits() const { return members != Members::loops; }
};

struct ZRecord {
  HolVec v;
  Int height;      // |v|
  Interval hor;    // certified enclosure of |y*theta - x|
  bool slit = false;
  bool exact_hit = false;  // hor == 0 exactly; always the final record
};

namespace detail {

// A sign-normalized linear form known to be >= 0, with exact-zero flagged.
struct AbsForm {
  LinForm f;
  bool zero = false;
};

inline AbsForm abs_form(const LinForm& f, const StreamPtr& lam, const DirectionRef& theta) {
  Sign s = sign_form(f, lam, theta);
  if (s == Sign::indeterminate) throw precision_exhausted("cannot determine the sign of a horizontal component");
  if (s == Sign::zero) return {f, true};
  if (s == Sign::negative) return {-f, false};
  return {f, false};
}

struct ZCand {
  HolVec v;
  AbsForm a;
  bool slit = false;
};

// Candidate loops at one height: nearest integers to h*theta, widened until a
// numerator coprime to h appears.  Order is ascending numerator so that the
// later tie rule (first wins) keeps the smallest.
inline void loop_candidates(const Int& h, const StreamPtr& lam, const DirectionRef& theta, std::vector<ZCand>& out) {
  RoundedForm rf = round_form(LinForm(Rat(0), Rat(0), Rat(h)), lam, theta);
  for (Int radius = 2;; radius *= 2) {
    bool any = false;
    for (Int p = rf.z - radius; p <= rf.z + radius + (rf.tie ? 1 : 0); ++p) {
      if (gcd(p, h) != 1) continue;
      any = true;
      out.push_back({make_loop(p, h), abs_form(LinForm(-Rat(p), Rat(0), Rat(h)), lam, theta), false});
    }
    if (any) return;
  }
}

// Candidate slits at one even height: the nearest even offsets to h*theta - lambda.
inline void slit_candidates(const Int& h, const StreamPtr& lam, const DirectionRef& theta, std::vector<ZCand>& out) {
  if (!lam) throw domain_error("slit family needs a lambda stream");
  RoundedForm rf = round_form(LinForm(Rat(0), Rat(-1, 2), Rat(h) / 2), lam, theta);
  for (Int j = -1; j <= (rf.tie ? 2 : 1); ++j) {
    Int m = 2 * (rf.z + j);
    HolVec v = make_slit(m, h);
    out.push_back({v, abs_form(hor_form(v), lam, theta), true});
  }
}

// Index of the candidate with the smallest horizontal component.  Ties keep
// the earliest entry, which the generation order makes the lexicographically
// smallest (loops before slits, then ascending x).
inline std::size_t pick_min(const std::vector<ZCand>& cands, const StreamPtr& lam, const DirectionRef& theta) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < cands.size(); ++i) {
    if (cands[best].a.zero) break;
    if (cands[i].a.zero) {
      best = i;
      break;
    }
    Sign s = sign_form(cands[best].a.f - cands[i].a.f, lam, theta);
    if (s == Sign::indeterminate) throw precision_exhausted("cannot order candidate horizontal components");
    if (s == Sign::positive) best = i;
  }
  return best;
}

}  // namespace detail

// The expansion of theta over Z up to the height bound: every vector that
// strictly improves on the horizontal component of all family members of
// height at most its own.  Cross-height ties never improve and are dropped;
// an exact hit (theta lies on a family direction) ends the expansion with a
// flagged record.
inline std::vector<ZRecord> z_convergents(const StreamPtr& lam, const DirectionRef& theta, const ZSet& Z,
                                          const Int& height_bound, mpfr_prec_t prec = 128) {
  if (Z.has_slits() && !lam) throw domain_error("slit family needs a lambda stream");
  std::vector<ZRecord> out;
  std::optional<LinForm> best;

  auto append = [&](const detail::ZCand& c, const Int& h) {
    ZRecord r;
    r.v = c.v;
    r.height = h;
    r.slit = c.slit;
    if (c.a.zero) {
      r.hor = Interval::exact(Int(0), prec);
      r.exact_hit = true;
    } else {
      r.hor = form_interval(c.a.f, lam, theta, prec);
    }
    out.push_back(std::move(r));
    best = c.a.f;
    return r.exact_hit;
  };

  // height 0: the horizontal seed beats the unit loop whenever it is present
  {
    detail::ZCand c;
    if (Z.has_slits()) {
      HolVec seed = make_slit(Int(0), Int(0));
      c = {seed, detail::abs_form(hor_form(seed), lam, theta), true};
    } else {
      HolVec unit = make_loop(Int(1), Int(0));
      c = {unit, detail::abs_form(hor_form(unit), lam, theta), false};
    }
    if (append(c, Int(0))) return out;
  }

  for (Int h = 1; h <= height_bound; ++h) {
    std::vector<detail::ZCand> cands;
    if (Z.has_loops()) detail::loop_candidates(h, lam, theta, cands);
    if (Z.has_slits() && h % 2 == 0) detail::slit_candidates(h, lam, theta, cands);
    if (cands.empty()) continue;
    std::size_t i = detail::pick_min(cands, lam, theta);
    const detail::ZCand& c = cands[i];
    if (!c.a.zero) {
      Sign s = sign_form(*best - c.a.f, lam, theta);
      if (s == Sign::indeterminate) throw precision_exhausted("cannot compare against the running minimum");
      if (s != Sign::positive) continue;  // no strict improvement at this height
    }
    if (append(c, h)) break;
  }
  return out;
}

// Per-pair angle bounds along an expansion, in division-free form so the
// height-0 seed record participates:
//   left:  |v_k x v_{k+1}| / 2 < hor(v_k) * |v_{k+1}|
//   right: hor(v_k) * |v_{k+1}| <= mu_bound
// The report also revalidates the structural invariants, so corrupted record
// lists surface as monotonicity violations instead of bogus bounds.
struct AngleBoundRow {
  std::size_t k = 0;
  bool left_ok = false;
  bool right_ok = false;
};

struct AngleBoundReport {
  bool monotone_ok = true;
  std::string violation;  // first structural breach, empty when clean
  std::vector<AngleBoundRow> rows;
  bool all_left_ok = true;
  bool all_right_ok = true;
};

inline AngleBoundReport check_angle_bounds(const std::vector<ZRecord>& recs, const StreamPtr& lam,
                                           const DirectionRef& theta, const ZSet& Z) {
  AngleBoundReport rep;
  auto fail = [&](std::string why) {
    rep.monotone_ok = false;
    rep.violation = std::move(why);
    rep.all_left_ok = rep.all_right_ok = false;
    return rep;
  };
  std::vector<detail::AbsForm> hors;
  hors.reserve(recs.size());
  for (std::size_t k = 0; k < recs.size(); ++k) {
    const ZRecord& r = recs[k];
    if (r.height != r.v.height()) return fail("record height disagrees with its vector");
    if (r.slit ? !in_V2_plus(r.v) : !is_loop(r.v)) return fail("record vector outside its declared family");
    if (k > 0 && recs[k].height <= recs[k - 1].height) return fail("heights are not strictly increasing");
    hors.push_back(detail::abs_form(hor_form(r.v), lam, theta));
    if (hors.back().zero && k + 1 < recs.size()) return fail("exact hit followed by further records");
    if (k > 0) {
      Sign s = hors[k].zero ? Sign::positive : sign_form(hors[k - 1].f - hors[k].f, lam, theta);
      if (s == Sign::indeterminate) throw precision_exhausted("cannot order horizontal components");
      if (s != Sign::positive) return fail("horizontal components are not strictly decreasing");
    }
  }
  for (std::size_t k = 0; k + 1 < recs.size(); ++k) {
    AngleBoundRow row;
    row.k = k;
    Rat h1(recs[k + 1].height);
    LambdaLinear cr = cross(recs[k].v, recs[k + 1].v);
    if (lam) {
      Sign cs = sign_lin(cr, *lam);
      if (cs == Sign::indeterminate) throw precision_exhausted("cannot normalize a cross-product sign");
      if (cs == Sign::negative) cr = -cr;
    } else if (sign_of(cr.s) == Sign::negative) {
      cr = -cr;
    }
    LinForm rhs = hors[k].f.scaled(h1);
    LinForm half_cross(cr.s / 2, cr.t / 2, Rat(0));
    Sign left = sign_form(rhs - half_cross, lam, theta);
    Sign right = sign_form(LinForm(Z.mu_bound, Rat(0), Rat(0)) - rhs, lam, theta);
    if (left == Sign::indeterminate || right == Sign::indeterminate)
      throw precision_exhausted("cannot certify an angle bound");
    row.left_ok = left == Sign::positive;
    row.right_ok = right != Sign::negative;
    rep.all_left_ok &= row.left_ok;
    rep.all_right_ok &= row.right_ok;
    rep.rows.push_back(row);
  }
  return rep;
}

// Relative growth along the expansion heights: e_k = log h_{k+1} / log h_k
// for pairs with h_k >= 2, and a certified witness wherever h_{k+1} > h_k^N.
// Any verdict is provisional at finite depth, hence the fixed flag.
struct RelClassRow {
  std::size_t k = 0;
  Interval e;
  Tri witness = Tri::unknown;
};

struct RelClassReport {
  std::vector<RelClassRow> rows;
  std::optional<std::size_t> first_witness;
  bool depth_limited = true;
};

inline RelClassReport classify_relative(const std::vector<ZRecord>& recs, const Rat& N, mpfr_prec_t prec = 128) {
  RelClassReport rep;
  for (std::size_t k = 0; k + 1 < recs.size(); ++k) {
    if (recs[k].height < 2) continue;
    RelClassRow row;
    row.k = k;
    row.e = Interval::log_of(recs[k + 1].height, prec) / Interval::log_of(recs[k].height, prec);
    row.witness = cmp_gap(recs[k + 1].height, recs[k].height, N);
    if (row.witness == Tri::yes && !rep.first_witness) rep.first_witness = k;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

namespace detail {

// floor(s + t*lambda), certified through enclosure refinement.  With t != 0
// and lambda irrational the value is never an integer, so refinement always
// separates; the rational fold covers terminated streams.
inline Int certified_floor_affine(const LambdaLinear& v, QuotientStream& lam) {
  if (v.t == 0) return floor_rat(v.s);
  for (;;) {
    if (lam.rational()) return floor_rat(v.s + v.t * lam.value());
    Rat llo, lhi, lo, hi;
    lam.enclosure(llo, lhi);
    lin_range(v, llo, lhi, lo, hi);
    Int fl = floor_rat(lo), fh = floor_rat(hi);
    if (fl == fh) return fl;
    if (!lam.refine()) throw precision_exhausted("cannot pin an integer part against lambda");
  }
}

inline std::vector<Int> distinct_prime_factors(Int n) {
  std::vector<Int> ps;
  for (Int d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      ps.push_back(d);
      while (n % d == 0) n /= d;
    }
  }
  if (n > 1) ps.push_back(n);
  return ps;
}

// #{p in [lo, hi] : gcd(p, q) = 1} by inclusion-exclusion over the prime
// factors of q.
inline Int coprime_count(const Int& lo, const Int& hi, const Int& q) {
  if (hi < lo) return 0;
  std::vector<Int> ps = distinct_prime_factors(q);
  Int total = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << ps.size()); ++mask) {
    Int d = 1;
    int sign = 1;
    for (std::size_t i = 0; i < ps.size(); ++i)
      if (mask & (std::size_t{1} << i)) {
        d *= ps[i];
        sign = -sign;
      }
    Int cnt = floor_div(hi, d) - floor_div(lo - 1, d);
    total += sign * cnt;
  }
  return total;
}

}  // namespace detail

// One dyadic height band of the cover: family members with inverse slope in
// [a, a+1] and height in [2^k, 2^{k+1}), each covered by an interval of
// length 2*mu / h^{1+r}.  len reports the length at the band's floor height;
// ssum accumulates sum |I(v)|^s over the band.
struct CoverBand {
  int k = 0;
  Int count;
  Interval len;
  Interval ssum;
};

struct CoverTable {
  std::vector<CoverBand> bands;
  std::vector<Interval> ratios;  // consecutive ssum ratios, bands[i+1]/bands[i]
};

inline CoverTable cover_E_r(const StreamPtr& lam, const ZSet& Z, const Rat& r, const Int& a, int k_lo, int k_hi,
                            const Rat& s, mpfr_prec_t prec = 128) {
  if (r <= 1) throw domain_error("cover needs r > 1");
  if (s <= 0) throw domain_error("cover needs s > 0");
  if (Z.has_slits() && !lam) throw domain_error("slit family needs a lambda stream");
  CoverTable table;
  Rat exp_len = -(1 + r);
  PowProd len_coef(Rat(2) * Z.mu_bound);
  for (int k = k_lo; k <= k_hi; ++k) {
    CoverBand band;
    band.k = k;
    Int h_lo = Int(1) << k, h_hi = Int(1) << (k + 1);
    band.count = 0;
    band.ssum = Interval::exact(Int(0), prec);
    for (Int h = h_lo; h < h_hi; ++h) {
      Int at_h = 0;
      if (Z.has_loops()) at_h += detail::coprime_count(a * h, (a + 1) * h, h);
      if (Z.has_slits() && h % 2 == 0) {
        // even m = 2j with a*h <= lambda + m <= (a+1)*h
        Int j_hi = detail::certified_floor_affine(LambdaLinear(Rat((a + 1) * h) / 2, Rat(-1, 2)), *lam);
        Int j_lo = -detail::certified_floor_affine(LambdaLinear(Rat(-a * h) / 2, Rat(1, 2)), *lam);
        if (j_hi >= j_lo) at_h += j_hi - j_lo + 1;
      }
      if (at_h == 0) continue;
      band.count += at_h;
      Interval term = (len_coef.pow(s) * PowProd::power(Rat(h), exp_len * s)).value_interval(prec);
      band.ssum = band.ssum + Interval::exact(at_h, prec) * term;
    }
    band.len = (len_coef * PowProd::power(Rat(h_lo), exp_len)).value_interval(prec);
    table.bands.push_back(std::move(band));
  }
  for (std::size_t i = 0; i + 1 < table.bands.size(); ++i)
    table.ratios.push_back(table.bands[i + 1].ssum / table.bands[i].ssum);
  return table;
}

// One stage of an iterated twist construction: a separating slit and the loop
// it is about to be twisted along.  claimed_b, when present, is the twist
// order the producer asserts for the step to the next slit.
struct CertStep {
  HolVec w;
  HolVec v;
  std::optional<Int> claimed_b;
};

struct NonergodicCertificate {
  std::vector<CertStep> steps;
};

struct CertStepReport {
  std::size_t j = 0;
  Int twist_b;          // witnessed order to the next slit (0 on the last step)
  Interval cross_abs;   // |w_j x v_j|
  Interval partial_sum; // running sum of cross_abs through this step
  Interval h_bound;     // 2 * (remaining cross sum + tail): transverse height decay
};

struct CertVerdict {
  bool accepted = false;
  std::string reject_reason;
  std::optional<std::size_t> reject_step;
  std::vector<CertStepReport> steps;
  Interval theta;  // enclosure of the limit direction, meaningful when accepted
};

// Validates an iterated twist certificate: every slit separating, every loop
// primitive, slit heights strictly increasing, each cross-product below 1/2
// so consecutive slits sit in a common cylinder, and consecutive slits
// actually twist-related along the recorded loop with even order.  On
// acceptance the cross-product sum plus the caller's bound on the unrecorded
// tail encloses the limit direction around the last slit's inverse slope.
// The limit set always keeps half the torus area on each side, so no measure
// check appears here.
inline CertVerdict check_certificate(const NonergodicCertificate& cert, QuotientStream& lam, const Rat& tail_bound,
                                     mpfr_prec_t prec = 128) {
  CertVerdict verdict;
  auto reject = [&](std::size_t j, std::string why) {
    verdict.accepted = false;
    verdict.reject_reason = std::move(why);
    verdict.reject_step = j;
    return verdict;
  };
  if (cert.steps.empty()) return reject(0, "empty certificate");
  if (tail_bound < 0) throw domain_error("tail bound must be nonnegative");

  std::vector<Interval> crosses;
  Interval sum = Interval::exact(Int(0), prec);
  for (std::size_t j = 0; j < cert.steps.size(); ++j) {
    const CertStep& st = cert.steps[j];
    if (!in_V2_plus(st.w)) return reject(j, "slit outside the separating family");
    if (st.w.y == 0) return reject(j, "horizontal slit cannot start a twist step");
    if (!is_loop(st.v)) return reject(j, "twist curve is not a primitive loop");
    if (j > 0 && cert.steps[j].w.height() <= cert.steps[j - 1].w.height())
      return reject(j, "slit heights are not strictly increasing");
    if (st.claimed_b && *st.claimed_b % 2 != 0) return reject(j, "odd claimed twist order between separating slits");

    LambdaLinear c = cross(st.w, st.v);
    Sign cs = compare_abs_lin(c, LambdaLinear(Rat(1, 2), Rat(0)), lam);
    if (cs == Sign::indeterminate) throw precision_exhausted("cannot separate a cross-product from 1/2");
    if (cs != Sign::negative) return reject(j, "cross-product reaches 1/2, twist hypothesis fails");
    Interval ca = lin_interval(c, lam, prec).abs();
    crosses.push_back(ca);
    sum = sum + ca;

    CertStepReport rep;
    rep.j = j;
    rep.cross_abs = ca;
    rep.partial_sum = sum;
    verdict.steps.push_back(std::move(rep));
  }
  for (std::size_t j = 0; j + 1 < cert.steps.size(); ++j) {
    const CertStep& st = cert.steps[j];
    std::optional<TwistWitness> tw;
    try {
      tw = dehn_related(st.w, cert.steps[j + 1].w, st.v, lam);
    } catch (const domain_error&) {
      return reject(j, "odd twist order between separating slits");
    }
    if (!tw) return reject(j, "consecutive slits are not twist-related along the recorded loop");
    if (tw->identity) return reject(j, "twist order zero between consecutive slits");
    if (st.claimed_b && *st.claimed_b != tw->b) return reject(j, "claimed twist order disagrees with the witness");
    verdict.steps[j].twist_b = tw->b;
  }

  Interval tail = Interval::exact(tail_bound, prec);
  Interval two = Interval::exact(Int(2), prec);
  for (std::size_t j = 0; j < verdict.steps.size(); ++j) {
    Interval remaining = sum - verdict.steps[j].partial_sum + crosses[j];
    verdict.steps[j].h_bound = two * (remaining + tail);
  }

  const HolVec& w_last = cert.steps.back().w;
  Interval slope = lin_interval(w_last.x, lam, prec) / Interval::exact(Rat(w_last.y), prec);
  Interval radius = two * (crosses.back() + tail) / Interval::exact(Rat(w_last.height()), prec);
  Interval unit = Interval::from_endpoints(Rat(-1), Rat(1), prec);
  verdict.theta = slope + unit * radius;
  verdict.accepted = true;
  return verdict;
}

}  // namespace slitforge
