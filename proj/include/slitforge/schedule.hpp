#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "slitforge/cf_engine.hpp"
#include "slitforge/liouville.hpp"
#include "slitforge/params.hpp"
#include "slitforge/powprod.hpp"

namespace slitforge {

// The seed grows into the shortest member of the companion family whose
// length clears q_{k0}^{M'}; everything downstream measures itself against
// that length, so the record keeps the verified window alongside the slit.
struct InitialSlit {
  HolVec w0;
  HolVec v;                       // w0 = seed + 2v
  LiouvilleConvergentRecord rec;  // of w0 itself, carrying d(w0, k0)
  Int h_lo, h_hi;                 // integer length window [ceil(q^M'), ceil(q^(M'r)) - 1]
};

inline InitialSlit initial_slit(const HolVec& seed, const ParamPack& pack, const StreamPtr& lam) {
  if (pack.k0 < 1) throw domain_error("initial_slit: the pack has no chosen start index");
  if (!in_V2_plus(seed)) throw domain_error("initial_slit: seed must lie in the even-even branch");
  std::size_t k0 = static_cast<std::size_t>(pack.k0);
  if (lam->ensure(k0 + 1) < k0 + 1) throw domain_error("initial_slit: expansion too short for the start index");
  const Int qk = lam->q(k0);
  if (2 * seed.y >= qk) throw domain_error("initial_slit: seed length must stay below half the start height");
  if (cmp_gap(lam->q(k0 + 1), qk, pack.N) != Tri::yes)
    throw domain_error("initial_slit: start index does not open a gap of exponent N");

  auto lo = PowProd::power(qk, pack.Mprime).ceil_int();
  auto hi = PowProd::power(qk, pack.Mprime * pack.r).ceil_int();
  if (!lo || !hi) throw precision_exhausted("initial_slit: length window undecidable");
  InitialSlit out;
  out.h_lo = *lo;
  out.h_hi = *hi - 1;

  // The height-zero seed has no collapse record of its own: its children
  // twist around the convergent direction itself.
  HolVec u = is_horizontal_seed(seed) ? make_loop(lam->p(k0), qk)
                                      : liouville_convergent(seed, k0, *lam).u;
  auto comp = companions(u);
  // minimal child length n + 2 v_y with v_y = comp_y + a u_y, a >= 1
  std::optional<HolVec> best;
  for (int b = 0; b < 2; ++b) {
    Int vt_lo = ceil_div(out.h_lo - seed.y, Int(2)) - comp[b].y;
    Int a = ceil_div(vt_lo, u.y);
    if (a < 1) a = 1;
    HolVec v = comp[b] + u.scaled(a);
    if (seed.y + 2 * v.y > out.h_hi) continue;
    if (!best || v.y < best->y || (v.y == best->y && v.x.s < best->x.s)) best = v;
  }
  if (!best) throw guarantee_failure("initial_slit: length window admits no member at the active constants");
  out.v = *best;
  out.w0 = seed + best->scaled(2);
  out.rec = liouville_convergent(out.w0, k0, *lam);
  if (out.rec.d > 2) throw guarantee_failure("initial_slit: twist divisor exceeded 2");
  if (!in_V2_plus(out.w0)) throw guarantee_failure("initial_slit: child left the even-even branch");
  return out;
}

// Length window of level j: inf = |w0|^(r^j), sup = 5^((r^j-1)/(r-1)) inf.
inline std::pair<PowProd, PowProd> level_window(const Int& w0_len, const Rat& r, long j) {
  if (w0_len < 1) throw domain_error("level_window: length must be positive");
  if (j < 0) throw domain_error("level_window: negative level");
  Rat rj = detail::pow_rat(r, static_cast<unsigned>(j));
  PowProd lo = PowProd::power(w0_len, rj);
  return {lo, PowProd::power(Rat(5), (rj - 1) / (r - 1)) * lo};
}

enum class Region { liouville, transition, diophantine, bounded };

inline const char* region_name(Region r) {
  switch (r) {
    case Region::liouville: return "liouville";
    case Region::transition: return "transition";
    case Region::diophantine: return "diophantine";
    case Region::bounded: return "bounded";
  }
  return "?";
}

// One row per level j: the length window H_j, the governing gap index, and
// the (delta_j, rho_j) budget the construction at that level must meet.
struct LevelRow {
  long j = 0;
  Region region = Region::liouville;
  long k = -1;        // gap index whose construction runs at this level
  long k_tilde = -1;  // previous gap index, where the budget row refers to it
  PowProd h_lo, h_hi;
  PowProd delta, rho, rho_delta;
  PowProd m_floor;  // rho_j delta_j (inf H_j)^{r-1}
  PowProd kappa;    // thinning factor, 1 unless a count target is active
  bool thinned = false;
  std::optional<PowProd> alpha;    // diophantine rows: alpha_k r^{j - j^D}
  std::optional<Rat> alpha_exact;  // bounded rows: alpha_ktilde - (j - j^B)/2
};

// Consecutive gap indices k < k' and the level cutoffs they induce.  A -1
// cutoff means the scan horizon ended before the cutoff was reached.
struct GapBlock {
  long k = -1;
  long k_next = -1;
  long j_C = -1;
  long j_D = -1;
  long j_B_next = -1;
  long j_C_next = -1;
  Int q_k, q_k1;  // q_k and q_{k+1}
  bool dual_forms_ok = true;
};

struct LevelSchedule {
  std::vector<GapBlock> blocks;
  std::vector<LevelRow> rows;  // j = 0..level_max, possibly cut short
  bool diophantine_regime = false;
  std::string regime_note;
  std::vector<std::string> flagged;
  Int w0_len = 0;
  bool ok() const { return flagged.empty() && !diophantine_regime; }
};

namespace detail {

// yes/no comparisons that land unknown get flagged, then treated as no
inline bool flag_lt(const PowProd& a, const PowProd& b, long j, const char* what,
                    std::vector<std::string>& flagged) {
  Tri t = a.cmp_less(b);
  if (t == Tri::unknown)
    flagged.push_back("level " + std::to_string(j) + ": " + what + " undecided");
  return t == Tri::yes;
}

inline bool flag_ge(const PowProd& a, const PowProd& b, long j, const char* what,
                    std::vector<std::string>& flagged) {
  Tri t = a.cmp_less(b);
  if (t == Tri::unknown) {
    flagged.push_back("level " + std::to_string(j) + ": " + what + " undecided");
    return false;
  }
  return t == Tri::no;  // equality counts as reaching the bound
}

}  // namespace detail

// Walks the gap indices from k0 and slices the levels 0..level_max into
// liouville / diophantine / bounded stretches, with the budget table filled
// in per row.  Index cutoffs are computed from the height form of each
// definition and cross-checked against the window form.
inline LevelSchedule make_schedule(const ParamPack& pack, const StreamPtr& lam, const Int& w0_len,
                                   long level_max) {
  if (pack.k0 < 1) throw domain_error("make_schedule: the pack has no chosen start index");
  if (w0_len < 2) throw domain_error("make_schedule: initial length must be at least 2");
  if (level_max < 0) throw domain_error("make_schedule: negative level cap");
  LevelSchedule out;
  out.w0_len = w0_len;

  const Rat& r = pack.r;
  const Rat rho = pack.rho;
  const PowProd rhoN = PowProd::power(rho, pack.Nprime);
  const std::optional<Rat> rhoN_exact =
      den(pack.Nprime) == 1 ? std::optional<Rat>(detail::pow_rat(rho, num(pack.Nprime).convert_to<unsigned>()))
                            : std::nullopt;
  std::optional<Rat> target;
  if (auto it = pack.overrides.find("count_target"); it != pack.overrides.end()) target = it->second;

  auto inf_H = [&](long j) { return PowProd::power(w0_len, detail::pow_rat(r, static_cast<unsigned>(j))); };
  auto sup_H = [&](long j) {
    Rat rj = detail::pow_rat(r, static_cast<unsigned>(j));
    return PowProd::power(Rat(5), (rj - 1) / (r - 1)) * PowProd::power(w0_len, rj);
  };

  // the separation sup H_j < inf H_{j+1} needs |w0|^{(r-1)^2} > 5 once
  {
    Tri sep = PowProd(Rat(5)).cmp_less(PowProd::power(w0_len, (r - 1) * (r - 1)));
    if (sep == Tri::no) throw domain_error("make_schedule: initial length too short to separate the level windows");
    if (sep == Tri::unknown) out.flagged.push_back("level 0: window separation undecided");
  }

  // confirm the start index opens a gap
  std::size_t k0 = static_cast<std::size_t>(pack.k0);
  if (lam->ensure(k0 + 1) < k0 + 1) throw domain_error("make_schedule: expansion too short for the start index");
  if (cmp_gap(lam->q(k0 + 1), lam->q(k0), pack.N) != Tri::yes)
    throw domain_error("make_schedule: start index does not open a gap of exponent N");

  // Next element of ell_N after k.  The scan stops once q_k^{1/r} clears the
  // top window in range: any later gap starts its bounded stretch past
  // level_max, so it cannot shape a row we would emit.
  enum class ScanEnd { found, horizon, expansion, budget };
  ScanEnd scan_end = ScanEnd::found;
  const PowProd sup_cap = sup_H(level_max + 1);
  auto next_gap = [&](long from) -> std::optional<long> {
    for (long kk = from + 1;; ++kk) {
      std::size_t need = static_cast<std::size_t>(kk) + 1;
      if (lam->ensure(need) < need) {
        scan_end = lam->budget_stopped() ? ScanEnd::budget : ScanEnd::expansion;
        return std::nullopt;
      }
      if (sup_cap.cmp_less(PowProd::power(lam->q(static_cast<std::size_t>(kk)), Rat(1) / r)) == Tri::yes) {
        scan_end = ScanEnd::horizon;
        return std::nullopt;
      }
      Tri t = cmp_gap(lam->q(need), lam->q(need - 1), pack.N);
      if (t == Tri::unknown) out.flagged.push_back("gap test at index " + std::to_string(kk) + " undecided");
      if (t == Tri::yes) {
        scan_end = ScanEnd::found;
        return kk;
      }
    }
  };

  // smallest j > from with sup H_j >= q^{1/x}, horizon-capped
  auto first_sup_reach = [&](long from, const Int& q, const Rat& inv_exp, const char* what) -> long {
    PowProd bound = PowProd::power(q, inv_exp);
    for (long j = from;; ++j) {
      if (j > level_max + 1) return -1;
      if (!detail::flag_lt(sup_H(j), bound, j, what, out.flagged)) return j;
    }
  };

  long k = static_cast<long>(k0);
  long j_C = 0;
  if (!detail::flag_ge(inf_H(0), PowProd::power(lam->q(k0), pack.Mprime), 0, "initial length against q^M'",
                       out.flagged))
    out.flagged.push_back("level 0: initial length sits below q^M'");

  while (j_C <= level_max) {
    GapBlock blk;
    blk.k = k;
    blk.j_C = j_C;
    blk.q_k = lam->q(static_cast<std::size_t>(k));
    blk.q_k1 = lam->q(static_cast<std::size_t>(k) + 1);

    auto knext = next_gap(k);
    long reach_D = first_sup_reach(j_C, blk.q_k1, 1 / r, "liouville cutoff");
    if (reach_D >= 0) {
      blk.j_D = reach_D - 1;
      if (blk.j_D <= blk.j_C)
        out.flagged.push_back("block k=" + std::to_string(k) + ": liouville stretch collapsed");
    }

    long j_B = -1, j_C2 = -1;
    if (knext) {
      blk.k_next = *knext;
      Int q_next = lam->q(static_cast<std::size_t>(*knext));
      long jb = first_sup_reach(blk.j_D >= 0 ? blk.j_D : j_C, q_next, 1 / r, "diophantine cutoff");
      if (jb > 0) j_B = jb - 1;
      blk.j_B_next = j_B;
      if (j_B >= 0) {
        PowProd bound = PowProd::power(q_next, pack.Mprime);
        for (long j = j_B;; ++j) {
          if (j > level_max + 1) break;
          if (detail::flag_ge(inf_H(j), bound, j, "bounded cutoff", out.flagged)) {
            j_C2 = j;
            break;
          }
        }
        blk.j_C_next = j_C2;
      }
    } else if (scan_end == ScanEnd::expansion) {
      if (lam->rational()) {
        out.diophantine_regime = true;
        out.regime_note = "gap indices end at k=" + std::to_string(k) +
                          ": bounded-type expansion past this point, separate handling applies";
      } else {
        out.flagged.push_back("expansion ends past k=" + std::to_string(k) +
                              " without deciding the next gap");
      }
    } else if (scan_end == ScanEnd::budget) {
      out.flagged.push_back("gap scan past k=" + std::to_string(k) + " hit the expansion budget");
    }
    // horizon: later gaps sit beyond every level in range, nothing to record

    // ordering and dual-form cross-checks for this block
    if (blk.j_D >= 0 && j_B >= 0 && blk.j_D > j_B)
      out.flagged.push_back("block k=" + std::to_string(k) + ": cutoffs out of order");
    if (j_B >= 0 && j_C2 >= 0) {
      if (j_B >= j_C2) out.flagged.push_back("block k=" + std::to_string(k) + ": bounded stretch inverted");
      // bounded stretch must stay within log_r(M') + 4 levels
      Rat rpow = detail::pow_rat(r, static_cast<unsigned>(j_C2 - j_B > 4 ? j_C2 - j_B - 4 : 0));
      if (rpow > pack.Mprime) {
        out.flagged.push_back("block k=" + std::to_string(k) + ": bounded stretch exceeds its level budget");
        blk.dual_forms_ok = false;
      }
    }
    if (blk.j_D >= 0) {
      // window form: largest j with H_{j+1} inside [q_k^M', q_{k+1}^{1/r})
      PowProd lo_b = PowProd::power(blk.q_k, pack.Mprime);
      PowProd hi_b = PowProd::power(blk.q_k1, 1 / r);
      long wf = -1;
      for (long j = 0; j <= level_max + 1; ++j) {
        if (detail::flag_ge(inf_H(j + 1), lo_b, j, "window form lower edge", out.flagged) &&
            detail::flag_lt(sup_H(j + 1), hi_b, j, "window form upper edge", out.flagged))
          wf = j;
      }
      if (wf != blk.j_D - 1) {
        blk.dual_forms_ok = false;
        out.flagged.push_back("block k=" + std::to_string(k) + ": liouville cutoff forms disagree");
      }
      // at least three consecutive windows must fit the overlap interval
      long fit = 0;
      PowProd ov_lo = PowProd::power(blk.q_k1, 1 / detail::pow_rat(r, 5));
      for (long j = 0; j <= level_max + 1; ++j) {
        if (detail::flag_ge(inf_H(j), ov_lo, j, "overlap lower edge", out.flagged) &&
            detail::flag_lt(sup_H(j), hi_b, j, "overlap upper edge", out.flagged))
          ++fit;
      }
      if (fit < 3) {
        blk.dual_forms_ok = false;
        out.flagged.push_back("block k=" + std::to_string(k) + ": fewer than three windows span the overlap");
      }
    }

    // emit the rows this block governs
    long row_end = j_C2 >= 0 ? j_C2 - 1 : level_max;
    for (long j = j_C; j <= std::min(row_end, level_max); ++j) {
      LevelRow row;
      row.j = j;
      row.k = k;
      row.h_lo = inf_H(j);
      row.h_hi = sup_H(j);
      Int q_k = blk.q_k;
      if (j == 0) {
        row.region = Region::liouville;
        row.delta = PowProd(Rat(4) / Rat(q_k));
        row.rho = PowProd(Rat(1, 4));
      } else if (j == j_C) {
        // j > 0 here, so a previous block exists and owns the budget
        row.region = Region::transition;
        row.k_tilde = out.blocks.back().k;
        Int q_kt = out.blocks.back().q_k;
        row.delta = PowProd(Rat(8)) * rhoN / PowProd(q_kt);
        row.rho = PowProd(Rat(q_kt) / Rat(Int(8 * q_k))) / rhoN;
      } else if (blk.j_D < 0 || j < blk.j_D) {
        row.region = Region::liouville;
        row.delta = PowProd(Rat(4) / Rat(q_k));
        row.rho = PowProd(Rat(1, 4));
      } else if (j_B < 0 || j < j_B) {
        row.region = Region::diophantine;
        Rat rj = detail::pow_rat(r, static_cast<unsigned>(j - blk.j_D));
        row.delta = PowProd(Rat(2)) * rhoN / PowProd(Rat(q_k) * rj);
        row.rho = pack.c0 / (PowProd(Rat(2) * rho) * rhoN);
        row.alpha = PowProd(Rat(q_k) * rj / 2) / rhoN;
      } else {
        row.region = Region::bounded;
        row.k = blk.k_next;
        row.k_tilde = k;
        row.delta = PowProd(Rat(4)) * rhoN / PowProd(q_k);
        row.rho = pack.c0 / PowProd(Rat(2));
        if (rhoN_exact) row.alpha_exact = Rat(q_k) / (2 * *rhoN_exact) - Rat(j - j_B) / 2;
      }
      row.rho_delta = row.rho * row.delta;
      row.m_floor = row.rho_delta * row.h_lo.pow(r - 1);
      row.kappa = PowProd(Rat(1));
      if (target && PowProd(*target).cmp_less(row.m_floor) == Tri::yes) {
        row.kappa = PowProd(*target) / row.m_floor;
        row.thinned = true;
      }
      // the Falconer hypotheses, against the active (possibly thinned) row
      if (!detail::flag_lt(row.delta, PowProd(Rat(1, 16)), j, "delta below 1/16", out.flagged))
        out.flagged.push_back("level " + std::to_string(j) + ": delta reaches 1/16");
      PowProd m_active = row.thinned ? PowProd(*target) : row.m_floor;
      if (!detail::flag_ge(m_active, PowProd(Rat(2)), j, "branching floor", out.flagged))
        out.flagged.push_back("level " + std::to_string(j) + ": branching floor below 2");
      // window separation row by row
      if (!detail::flag_lt(row.h_hi, inf_H(j + 1), j, "window separation", out.flagged))
        out.flagged.push_back("level " + std::to_string(j) + ": windows touch");
      out.rows.push_back(std::move(row));
    }

    out.blocks.push_back(blk);
    if (j_C2 < 0 || !knext) break;
    k = *knext;
    j_C = j_C2;
  }
  return out;
}

}  // namespace slitforge
