#pragma once

// Continued fraction of a Moebius image (a x + b)/(c x + d) of a stream value,
// computed by matrix state ingestion/emission.  The state M = (A B; C D)
// represents the target as f(y) = (A y + B)/(C y + D) where y is the value of
// the not-yet-ingested tail of the input.  After at least one ingest the tail
// lies in [1, +inf] (1 attained only by a terminating ...,1 tail and +inf by
// immediate termination), so a quotient t may be emitted exactly when the
// closed image interval sits inside [t, t+1).

#include "slitforge/cf_engine.hpp"

namespace slitforge {

class MoebiusStream final : public QuotientStream {
 public:
  MoebiusStream(StreamPtr inner, Int a, Int b, Int c, Int d, std::size_t ingest_cap = 10000)
      : inner_(std::move(inner)), A_(std::move(a)), B_(std::move(b)), C_(std::move(c)), D_(std::move(d)), cap_(ingest_cap) {
    if (A_ * D_ - B_ * C_ == 0) throw domain_error("moebius: singular coefficient matrix");
  }

  bool rational() const override { return rat_done_; }

 protected:
  bool produce_next(Int& out) override {
    if (rat_mode_) return rational_emit(out);
    for (std::size_t fed = 0; fed <= cap_; ++fed) {
      if (ingested_ > 0 && try_emit(out)) return true;
      if (!feed()) {
        if (!inner_->rational()) {
          // budget-stopped or open-tailed input: the value is not pinned
          budget_stopped_ = true;
          return false;
        }
        // Finite input fully ingested: tail is empty, value = f(inf) = A/C.
        if (C_ == 0) throw domain_error("moebius: pole at rational input");
        rat_mode_ = true;
        rat_val_ = Rat(A_, C_);
        return rational_emit(out);
      }
    }
    budget_stopped_ = true;  // emission starved within the ingestion budget
    return false;
  }

 private:
  // Pull one more quotient from the input into the state.
  bool feed() {
    if (inner_->ensure(ingested_) < ingested_) return false;
    const Int& t = inner_->a(ingested_);
    Int na = A_ * t + B_, nc = C_ * t + D_;
    B_ = A_;
    D_ = C_;
    A_ = std::move(na);
    C_ = std::move(nc);
    ++ingested_;
    return true;
  }

  // Emit iff floor(f) is constant over all possible tail values in [1, +inf].
  bool try_emit(Int& out) {
    Int cd = C_ + D_;
    if (C_ == 0 || cd == 0 || (C_ > 0) != (cd > 0)) return false;  // pole inside or at the boundary
    Rat e1(A_ + B_, cd), e2(A_, C_);
    Rat u = e1 < e2 ? e1 : e2;
    Rat v = e1 < e2 ? e2 : e1;
    Int t = floor_rat(u);
    if (!(v < t + 1)) return false;
    Int nc = A_ - t * C_, nd = B_ - t * D_;
    A_ = C_;
    B_ = D_;
    C_ = std::move(nc);
    D_ = std::move(nd);
    out = std::move(t);
    return true;
  }

  bool rational_emit(Int& out) {
    if (rat_done_) return false;
    Int t = floor_rat(rat_val_);
    Rat frac = rat_val_ - t;
    if (frac == 0) {
      rat_done_ = true;
    } else {
      rat_val_ = 1 / frac;
    }
    out = std::move(t);
    return true;
  }

  StreamPtr inner_;
  Int A_, B_, C_, D_;
  std::size_t cap_;
  std::size_t ingested_ = 0;
  bool rat_mode_ = false;
  bool rat_done_ = false;
  Rat rat_val_;
};

// (x + m)/n, the slope seen through an n-fold cover twisted m times.
inline StreamPtr make_homographic(StreamPtr inner, const Int& m, const Int& n) {
  if (n == 0) throw domain_error("homographic: n must be nonzero");
  return std::make_shared<MoebiusStream>(std::move(inner), Int(1), m, Int(0), n);
}

inline StreamPtr make_moebius(StreamPtr inner, const Int& a, const Int& b, const Int& c, const Int& d) {
  return std::make_shared<MoebiusStream>(std::move(inner), a, b, c, d);
}

}  // namespace slitforge
