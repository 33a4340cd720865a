#include <catch2/catch_amalgamated.hpp>

#include "slitforge/gosper.hpp"

using namespace slitforge;

namespace {

// Floating-point quotient extraction at a given precision; stops when the
// remainder loses too many bits to trust another term.
std::vector<Int> float_cf(mpfr_srcptr x0, std::size_t count, mpfr_prec_t prec) {
  std::vector<Int> out;
  Real y(prec), f(prec);
  mpfr_set(y.get(), x0, MPFR_RNDN);
  for (std::size_t i = 0; i < count; ++i) {
    mpfr_floor(f.get(), y.get());
    Int t;
    mpfr_get_z(t.backend().data(), f.get(), MPFR_RNDN);
    out.push_back(t);
    mpfr_sub(y.get(), y.get(), f.get(), MPFR_RNDN);
    if (mpfr_zero_p(y.get())) break;
    mpfr_ui_div(y.get(), 1, y.get(), MPFR_RNDN);
  }
  return out;
}

// Quotients of (a x + b)/(c x + d) for x = sqrt(2)-1, trusted only where two
// working precisions agree.
std::vector<Int> oracle_moebius_sqrt2(long a, long b, long c, long d, std::size_t count) {
  std::vector<Int> lo, hi;
  for (mpfr_prec_t prec : {mpfr_prec_t(320), mpfr_prec_t(448)}) {
    Real x(prec), num(prec), den(prec);
    mpfr_sqrt_ui(x.get(), 2, MPFR_RNDN);
    mpfr_sub_ui(x.get(), x.get(), 1, MPFR_RNDN);
    mpfr_mul_si(num.get(), x.get(), a, MPFR_RNDN);
    mpfr_add_si(num.get(), num.get(), b, MPFR_RNDN);
    mpfr_mul_si(den.get(), x.get(), c, MPFR_RNDN);
    mpfr_add_si(den.get(), den.get(), d, MPFR_RNDN);
    mpfr_div(num.get(), num.get(), den.get(), MPFR_RNDN);
    (prec == 320 ? lo : hi) = float_cf(num.get(), count, prec);
  }
  std::vector<Int> agreed;
  for (std::size_t i = 0; i < lo.size() && i < hi.size(); ++i) {
    if (lo[i] != hi[i]) break;
    agreed.push_back(lo[i]);
  }
  return agreed;
}

}  // namespace

TEST_CASE("homographic image of a quadratic") {
  // (x+1)/2 at x = sqrt(2)-1 is 1/sqrt(2) = [0;1,2,2,2,...]
  auto h = make_homographic(make_stream("periodic:[0;(2)]"), Int(1), Int(2));
  h->ensure(8);
  CHECK(h->a(0) == 0);
  CHECK(h->a(1) == 1);
  for (std::size_t k = 2; k <= 8; ++k) CHECK(h->a(k) == 2);
}

TEST_CASE("moebius images agree with the float oracle") {
  struct Case {
    long a, b, c, d;
  };
  Case cases[] = {
      {1, 0, 0, 1}, {1, 1, 0, 2}, {2, 1, 1, 3}, {1, -1, 1, 1}, {3, 2, 0, 1},
      {0, 1, 1, 0}, {5, 3, 2, 7}, {1, 4, 0, 3}, {2, -1, 3, 1},
  };
  for (const auto& c : cases) {
    CAPTURE(c.a, c.b, c.c, c.d);
    auto oracle = oracle_moebius_sqrt2(c.a, c.b, c.c, c.d, 12);
    REQUIRE(oracle.size() >= 8);
    auto m = make_moebius(make_stream("periodic:[0;(2)]"), Int(c.a), Int(c.b), Int(c.c), Int(c.d));
    m->ensure(7);
    for (std::size_t k = 0; k <= 7; ++k) CHECK(m->a(k) == oracle[k]);
  }
}

TEST_CASE("rational inputs fall through to exact division") {
  // identity applied to a non-canonical terminating expansion re-emits the
  // canonical one
  auto m = make_moebius(make_stream("cf:[0;2,1]"), Int(1), Int(0), Int(0), Int(1));
  m->ensure(20);
  CHECK(m->rational());
  CHECK(m->value() == Rat(1, 3));
  CHECK(m->a(0) == 0);
  CHECK(m->a(1) == 3);
  CHECK(m->depth() == 1);

  auto h = make_homographic(make_stream("cf:[0;2,2,2]"), Int(1), Int(2));
  h->ensure(20);
  CHECK(h->rational());
  CHECK(h->value() == Rat(17, 24));
}

TEST_CASE("singular matrix and pole are rejected") {
  CHECK_THROWS_AS(make_moebius(make_stream("periodic:[0;(2)]"), Int(2), Int(4), Int(1), Int(2)), domain_error);
  // 1/(x - 1/2) at x = 1/2
  auto m = make_moebius(make_stream("cf:[0;2]"), Int(0), Int(1), Int(2), Int(-1));
  CHECK_THROWS_AS(m->ensure(5), domain_error);
}

TEST_CASE("round trip through a cover and back") {
  auto lam = make_stream("periodic:[0;3,(1,4)]");
  lam->ensure(21);
  auto up = make_homographic(make_stream("periodic:[0;3,(1,4)]"), Int(5), Int(7));
  // inverse of (x+5)/7 is 7y-5
  auto back = make_moebius(up, Int(7), Int(-5), Int(0), Int(1));
  back->ensure(20);
  for (std::size_t k = 0; k <= 20; ++k) CHECK(back->a(k) == lam->a(k));
}

TEST_CASE("emission starves honestly on a stalled input") {
  // the input exhausts its digit budget long before the cap, leaving the
  // image pinned between two convergents it cannot separate
  auto inner = make_stream("gaps:{base:[0;3,3], n_k:2}");
  auto m = make_homographic(inner, Int(0), Int(1));
  m->ensure(100000);
  CHECK(m->budget_stopped());
  CHECK(m->depth() > 10);
}
