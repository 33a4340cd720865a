#pragma once

// Quotient streams: lazy materialization of partial quotients a_k and the
// convergents p_k/q_k (k from 0, so p_0/q_0 = a_0/1).  Gap families keep
// sound log-domain surrogates for log q_k and log log q_k past the point
// where the integers exceed the digit budget.
//
// Extension is not thread safe; a materialized prefix is immutable and may be
// read freely between extensions.

#include "slitforge/cf_spec.hpp"
#include "slitforge/numeric.hpp"
#include "slitforge/real.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace slitforge {

inline std::size_t decimal_digits(const Int& v) {
  if (v == 0) return 1;
  return static_cast<std::size_t>(static_cast<double>(msb(abs(v)) + 1) * 0.30103) + 1;
}

class QuotientStream {
 public:
  virtual ~QuotientStream() = default;

  // Materialize through index k when possible; returns the deepest index now
  // available.  The stream never shrinks.
  std::size_t ensure(std::size_t k) {
    while (a_.size() <= k && !exhausted_) step();
    return a_.empty() ? 0 : a_.size() - 1;
  }
  std::size_t depth() {
    if (a_.empty() && !exhausted_) step();
    return a_.empty() ? 0 : a_.size() - 1;
  }
  bool materialized(std::size_t k) const { return k < a_.size(); }
  bool exhausted() const { return exhausted_; }
  bool budget_stopped() const { return budget_stopped_; }

  const Int& a(std::size_t k) const { return a_.at(k); }
  const Int& p(std::size_t k) const { return p_.at(k); }
  const Int& q(std::size_t k) const { return q_.at(k); }
  Rat convergent(std::size_t k) const { return Rat(p_.at(k), q_.at(k)); }

  // A fully materialized explicit list denotes an exact rational.
  virtual bool rational() const { return false; }
  Rat value() const {
    if (!rational() || a_.empty()) throw domain_error("value() on a non-rational stream");
    return Rat(p_.back(), q_.back());
  }

  // Closed rational enclosure of the value from the deepest convergents.
  void enclosure(Rat& lo, Rat& hi) {
    std::size_t d = depth();
    if (rational()) {
      ensure(~static_cast<std::size_t>(0));
      lo = hi = value();
      return;
    }
    if (d == 0) {
      lo = Rat(a_[0]);
      hi = lo + 1;
      return;
    }
    Rat x = convergent(d - 1), y = convergent(d);
    if (x <= y) {
      lo = x;
      hi = y;
    } else {
      lo = y;
      hi = x;
    }
  }
  // Grow the materialized prefix (roughly doubling); false when stuck.
  bool refine() {
    if (exhausted_) return false;
    std::size_t d = depth();
    ensure(d + d / 2 + 4);
    return depth() > d || !exhausted_;
  }

  // log q_k / log log q_k as certified enclosures; works past the exact depth
  // only for streams with surrogate support (gap families).
  virtual Interval log_q(std::size_t k, mpfr_prec_t prec) {
    ensure(k);
    if (!materialized(k)) throw truncation_error("log q_k beyond materializable depth", static_cast<long>(depth()));
    return Interval::log_of(q_[k], prec);
  }
  virtual Interval loglog_q(std::size_t k, mpfr_prec_t prec) {
    ensure(k);
    if (!materialized(k)) throw truncation_error("log log q_k beyond materializable depth", static_cast<long>(depth()));
    if (q_[k] < 3) throw domain_error("log log q_k needs q_k >= 3");
    return log_q(k, prec).log();
  }
  // Deepest index with any (exact or surrogate) log information.
  virtual std::size_t log_depth() { return depth(); }

 protected:
  // Produce the next quotient; false when the stream has no further terms.
  virtual bool produce_next(Int& out) = 0;
  // Called once when materialization stops because of the digit budget; the
  // rejected convergent is handed over so surrogates can anchor on it.
  virtual void on_budget_stop(const Int& /*next_a*/, const Int& /*next_q*/) {}

  void step() {
    Int next;
    if (!produce_next(next)) {
      exhausted_ = true;
      return;
    }
    std::size_t i = a_.size();
    Int np, nq;
    if (i == 0) {
      np = next;
      nq = 1;
    } else if (i == 1) {
      np = next * p_[0] + 1;
      nq = next;
    } else {
      np = next * p_[i - 1] + p_[i - 2];
      nq = next * q_[i - 1] + q_[i - 2];
    }
    if (i >= k_max_ || decimal_digits(nq) > Budget::global().max_digits) {
      exhausted_ = true;
      budget_stopped_ = true;
      on_budget_stop(next, nq);
      return;
    }
    a_.push_back(std::move(next));
    p_.push_back(std::move(np));
    q_.push_back(std::move(nq));
  }

  std::vector<Int> a_, p_, q_;
  std::size_t k_max_ = Budget::global().max_quotients;
  bool exhausted_ = false;
  bool budget_stopped_ = false;
};

using StreamPtr = std::shared_ptr<QuotientStream>;

class ExplicitStream final : public QuotientStream {
 public:
  ExplicitStream(std::vector<Int> terms, bool open_tail, std::size_t k_max)
      : terms_(std::move(terms)), open_(open_tail) {
    k_max_ = k_max;
  }
  bool rational() const override { return !open_ && exhausted() && !budget_stopped(); }

 protected:
  bool produce_next(Int& out) override {
    if (idx_ >= terms_.size()) return false;
    out = terms_[idx_++];
    return true;
  }

 private:
  std::vector<Int> terms_;
  std::size_t idx_ = 0;
  bool open_;
};

class PeriodicStream final : public QuotientStream {
 public:
  PeriodicStream(std::vector<Int> head, std::vector<Int> cycle, std::size_t k_max)
      : head_(std::move(head)), cycle_(std::move(cycle)) {
    k_max_ = k_max;
  }

 protected:
  bool produce_next(Int& out) override {
    if (idx_ < head_.size()) {
      out = head_[idx_++];
      return true;
    }
    out = cycle_[(idx_ - head_.size()) % cycle_.size()];
    ++idx_;
    return true;
  }

 private:
  std::vector<Int> head_, cycle_;
  std::size_t idx_ = 0;
};

// Gap family: past the base, a_{k+1} = max(1, ceil((T_k - q_{k-1})/q_k)) with
// T_k = ceil(upper(q_k^{n_k})) evaluated at a fixed 192-bit precision, making
// materialization deterministic.  This pins q_{k+1} into [q_k^{n_k}, q_k^{n_k}
// + 2 q_k), which the log-domain surrogates encode as an interval.
class GapStream final : public QuotientStream {
 public:
  GapStream(std::vector<Int> base, std::shared_ptr<const GrowthExpr> growth, std::size_t k_max)
      : base_(std::move(base)), growth_(std::move(growth)) {
    k_max_ = k_max;
  }

  Interval log_q(std::size_t k, mpfr_prec_t prec) override {
    ensure(k);
    if (materialized(k)) return Interval::log_of(q(k), prec);
    extend_surrogates(k);
    std::size_t base = a_.size();  // first surrogate index
    if (k < base || k >= base + lq_.size()) throw truncation_error("log q_k beyond surrogate depth", static_cast<long>(log_depth()));
    return widen_to(lq_[k - base], prec);
  }
  Interval loglog_q(std::size_t k, mpfr_prec_t prec) override {
    Interval l = log_q(k, prec);
    if (l.sign_lo() <= 0) throw domain_error("log log q_k needs q_k >= 3");
    return l.log();
  }
  std::size_t log_depth() override {
    return (a_.empty() ? 0 : a_.size() - 1) + lq_.size();
  }

 protected:
  bool produce_next(Int& out) override {
    std::size_t i = a_.size();
    if (i < base_.size() + 1) {  // +1 for the implicit a_0 = 0
      out = (i == 0) ? Int(0) : base_[i - 1];
      return true;
    }
    // Generating a_{K+1} from the law at k = K needs q_{K-1}, q_K.
    std::size_t K = i - 1;
    GrowthEnv env;
    env.k = Int(K);
    env.q_exact = &q(K);
    env.prec = kRulePrec;
    auto n = growth_->eval(env);
    if (!n) throw domain_error("gap growth law failed to evaluate at k=" + std::to_string(K));
    // Overflow pre-check: bail out to surrogates before computing T.
    Interval lt = Interval::log_of(q(K), kRulePrec) * *n;
    double digits = lt.hi_double() * 0.4342944819032518;
    if (digits > static_cast<double>(Budget::global().max_digits)) {
      budget_stopped_ = true;
      return false;
    }
    Interval qi = Interval::exact(q(K), kRulePrec);
    Interval t = (qi.log() * *n).exp();
    Real ti(kRulePrec);
    mpfr_ceil(ti.get(), t.hi().get());
    Int T;
    mpfr_get_z(T.backend().data(), ti.get(), MPFR_RNDN);
    Int num = T - q(K - 1);
    Int cand = num > 0 ? ceil_div(num, q(K)) : Int(1);
    out = cand < 1 ? Int(1) : cand;
    return true;
  }

 private:
  static constexpr mpfr_prec_t kRulePrec = 192;

  static Interval widen_to(const Interval& iv, mpfr_prec_t prec) {
    Interval r(prec);
    mpfr_set(r.lo().get(), iv.lo().get(), MPFR_RNDD);
    mpfr_set(r.hi().get(), iv.hi().get(), MPFR_RNDU);
    return r;
  }

  void extend_surrogates(std::size_t k) {
    if (!exhausted_) ensure(k);  // fill exact part first
    if (materialized(k)) return;
    std::size_t base = a_.size();  // index of the first surrogate entry
    while (base + lq_.size() <= k) {
      std::size_t K = base + lq_.size() - 1;  // index whose q feeds the law; surrogate chain starts from exact tail
      GrowthEnv env;
      env.k = Int(K);
      env.prec = kRulePrec;
      Interval lqK(kRulePrec);
      if (K < base) {
        env.q_exact = &q(K);
        lqK = Interval::log_of(q(K), kRulePrec);
      } else {
        lqK = lq_[K - base];
        env.log_q = &lqK;
      }
      auto n = growth_->eval(env);
      // Surrogate soundness needs a certified n_k >= 2 (slack bound below).
      if (!n || n->less_than(Interval::exact(Int(2), kRulePrec)) != Tri::no) {
        throw truncation_error("log-domain surrogate needs certified n_k >= 2", static_cast<long>(log_depth()));
      }
      Interval next = lqK * *n;
      // q_{k+1} in [T, T + 2 q_k) with T within one ulp of q_k^{n_k}; for
      // n_k >= 2 the additive slack is below 2^-64 of the log.
      Interval slack(kRulePrec);
      mpfr_set_zero(slack.lo().get(), 1);
      mpfr_set_d(slack.hi().get(), 1.0, MPFR_RNDU);
      mpfr_mul_2si(slack.hi().get(), slack.hi().get(), -64, MPFR_RNDU);
      next = next + slack;
      if (!mpfr_number_p(next.hi().get())) throw truncation_error("log-domain surrogate overflow", static_cast<long>(log_depth()));
      lq_.push_back(next);
      if (lq_.size() > 64) throw truncation_error("log-domain surrogate depth limit", static_cast<long>(log_depth()));
    }
  }

  std::vector<Int> base_;
  std::shared_ptr<const GrowthExpr> growth_;
  std::vector<Interval> lq_;  // log q at indices a_.size(), a_.size()+1, ...
};

inline StreamPtr make_stream(const PartialQuotientSpec& spec) {
  std::vector<Int> terms;
  terms.push_back(Int(0));  // a_0 = 0
  for (const Int& t : spec.head) terms.push_back(t);
  switch (spec.kind) {
    case PartialQuotientSpec::Kind::explicit_list:
      return std::make_shared<ExplicitStream>(std::move(terms), spec.open_tail, spec.k_max);
    case PartialQuotientSpec::Kind::periodic:
      return std::make_shared<PeriodicStream>(std::move(terms), spec.cycle, spec.k_max);
    default:
      return std::make_shared<GapStream>(spec.head, spec.growth, spec.k_max);
  }
}

inline StreamPtr make_stream(const std::string& text) { return make_stream(PartialQuotientSpec::parse(text)); }

// ---- operations on streams ----

// Certified check of the two-sided convergent gap estimate at index k:
//   1/(q_k (q_k + q_{k+1})) < |x - p_k/q_k| <= 1/(q_k q_{k+1}).
inline Tri check_cf1(QuotientStream& s, std::size_t k) {
  if (s.ensure(k + 1) < k + 1) throw domain_error("check_cf1: no quotient at k+1");
  Rat bl = Rat(1, s.q(k) * (s.q(k) + s.q(k + 1)));
  Rat bh = Rat(1, s.q(k) * s.q(k + 1));
  Rat ck = s.convergent(k);
  for (;;) {
    Rat lo, hi;
    s.enclosure(lo, hi);
    Rat dlo = lo - ck, dhi = hi - ck;
    // |x - c_k| as an interval
    Rat alo, ahi;
    if (dlo >= 0) {
      alo = dlo;
      ahi = dhi;
    } else if (dhi <= 0) {
      alo = -dhi;
      ahi = -dlo;
    } else {
      alo = 0;
      ahi = dhi > -dlo ? dhi : -dlo;
    }
    if (alo > bl && ahi <= bh) return Tri::yes;
    if (ahi <= bl || alo > bh) return Tri::no;
    if (!s.refine()) {
      if (s.rational()) {
        Rat d = abs(s.value() - ck);
        return (d > bl && d <= bh) ? Tri::yes : Tri::no;
      }
      throw precision_exhausted("check_cf1: enclosure cannot separate before stream exhaustion");
    }
  }
}

struct ConvergentHit {
  Tri verdict = Tri::unknown;  // unknown == insufficient depth
  std::optional<std::size_t> index;
  std::size_t reached = 0;
};

// Is p/q (in lowest terms) a convergent of the stream?  Certified by direct
// comparison against the materialized convergents, which is exactly the
// sufficient direction of the 1/(2q^2) criterion.
inline ConvergentHit is_convergent(QuotientStream& s, const Int& p, const Int& q) {
  ConvergentHit hit;
  if (q <= 0) throw domain_error("is_convergent: q must be positive");
  for (std::size_t k = 0;; ++k) {
    if (s.ensure(k) < k) {
      // Every materialized convergent has been scanned without a hit.  A
      // finite stream is settled; a budget stop leaves deeper terms unseen.
      hit.reached = s.depth();
      hit.verdict = s.budget_stopped() ? Tri::unknown : Tri::no;
      return hit;
    }
    if (s.q(k) == q && s.p(k) == p) {
      hit.verdict = Tri::yes;
      hit.index = k;
      hit.reached = k;
      return hit;
    }
    if (s.q(k) > q) {
      hit.verdict = Tri::no;
      hit.reached = k;
      return hit;
    }
  }
}

// Certified comparison q_{k+1} > q_k^N for rational N > 0: exact when the
// power is small enough, interval logs otherwise.
inline Tri cmp_gap(const Int& q_next, const Int& q_here, const Rat& N) {
  if (q_here == 1) return q_next > 1 ? Tri::yes : Tri::no;
  Int exact;
  if (exact_pow_rat(q_here, num(N), den(N), exact)) return q_next > exact ? Tri::yes : Tri::no;
  for (mpfr_prec_t prec = 128; prec <= static_cast<mpfr_prec_t>(Budget::global().max_prec); prec *= 2) {
    Interval lhs = Interval::log_of(q_next, prec);
    Interval rhs = Interval::log_of(q_here, prec) * Interval::exact(N, prec);
    Tri t = rhs.less_than(lhs);
    if (t != Tri::unknown) return t;
  }
  // Equality q_next == q_here^N is the only way to stay unresolved; for
  // rational N that was settled by the exact path, so treat as no.
  return Tri::no;
}

struct GapIndexSet {
  std::vector<std::size_t> indices;           // k with q_{k+1} > q_k^N
  std::vector<std::pair<std::size_t, Interval>> exponents;  // n_k = log q_{k+1}/log q_k
  std::size_t scanned_to = 0;
  bool log_domain = false;
};

inline GapIndexSet gap_indices(QuotientStream& s, const Rat& N, std::size_t K, mpfr_prec_t prec = 128) {
  GapIndexSet out;
  for (std::size_t k = 1; k <= K; ++k) {
    std::size_t have = s.ensure(k + 1);
    if (have >= k + 1) {
      if (cmp_gap(s.q(k + 1), s.q(k), N) == Tri::yes) out.indices.push_back(k);
      if (s.q(k) >= 2) {
        Interval n = s.log_q(k + 1, prec) / s.log_q(k, prec);
        out.exponents.emplace_back(k, n);
      }
      out.scanned_to = k;
      continue;
    }
    // log-domain continuation where available
    try {
      Interval ln = s.log_q(k + 1, prec);
      Interval ld = s.log_q(k, prec);
      out.log_domain = true;
      Interval n = ln / ld;
      out.exponents.emplace_back(k, n);
      Tri t = (ld * Interval::exact(N, prec)).less_than(ln);
      if (t == Tri::yes) out.indices.push_back(k);
      out.scanned_to = k;
    } catch (const truncation_error&) {
      break;
    }
  }
  return out;
}

struct DivergenceSum {
  struct Term {
    std::size_t k;
    Interval value;
    bool log_domain;
  };
  std::vector<Term> terms;
  Interval partial{128};
  std::size_t skipped = 0;       // q_{k+1} < 3: log log undefined or negative
  std::size_t reached = 0;       // deepest k whose term was computable
  bool exhausted_early = false;  // stream ran out before K
};

// Partial sums of sum_k (log log q_{k+1})/q_k over k = 1..K.  Terms with
// q_{k+1} < 3 are skipped and counted.  Terms past the exact depth fall back
// to log-domain surrogates when the stream supports them.
inline DivergenceSum perez_marco_partial_sum(QuotientStream& s, std::size_t K, mpfr_prec_t prec = 192) {
  DivergenceSum out;
  out.partial = Interval::exact(Int(0), prec);
  for (std::size_t k = 1; k <= K; ++k) {
    bool have_next = s.ensure(k + 1) >= k + 1;
    bool have_here = s.materialized(k);
    try {
      if (have_next && s.q(k + 1) < 3) {
        ++out.skipped;
        out.reached = k;
        continue;
      }
      Interval ll = s.loglog_q(k + 1, prec);
      Interval term(prec);
      if (have_here) {
        term = ll / Interval::exact(s.q(k), prec);
      } else {
        Interval il = (-s.log_q(k, prec)).exp();  // 1/q_k, underflow-safe from above
        term = ll * il;
        if (term.sign_lo() < 0) {
          Interval z(prec);  // clamp the spurious negative from underflow
          mpfr_set_zero(z.lo().get(), 1);
          mpfr_set(z.hi().get(), term.hi().get(), MPFR_RNDU);
          term = z;
        }
      }
      out.terms.push_back({k, term, !have_next || !have_here});
      out.partial = out.partial + term;
      out.reached = k;
    } catch (const truncation_error&) {
      out.exhausted_early = true;
      break;
    } catch (const domain_error&) {
      ++out.skipped;
      out.reached = k;
    }
  }
  return out;
}

}  // namespace slitforge
