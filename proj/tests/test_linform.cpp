#include <catch2/catch_amalgamated.hpp>

#include "slitforge/lambda_linear.hpp"
#include "slitforge/powprod.hpp"

#include <cmath>
#include <random>

using namespace slitforge;

TEST_CASE("lambda-linear signs against a double oracle") {
  auto lam = make_stream("periodic:[0;(2)]");  // sqrt(2)-1
  const double lam_d = std::sqrt(2.0) - 1.0;
  CHECK(sign_lin(LambdaLinear(Rat(1), Rat(-2)), *lam) == Sign::positive);
  CHECK(sign_lin(LambdaLinear(Rat(-1), Rat(2)), *lam) == Sign::negative);
  CHECK(sign_lin(LambdaLinear(Rat(0), Rat(0)), *lam) == Sign::zero);
  CHECK(sign_lin(LambdaLinear(Rat(0), Rat(5)), *lam) == Sign::positive);

  std::mt19937 rng(20240817);
  std::uniform_int_distribution<long> coef(-1000, 1000);
  std::uniform_int_distribution<long> denom(1, 50);
  for (int i = 0; i < 1000; ++i) {
    Rat s(coef(rng), denom(rng));
    Rat t(coef(rng), denom(rng));
    double v = s.convert_to<double>() + t.convert_to<double>() * lam_d;
    if (std::abs(v) < 1e-9) continue;  // double oracle unreliable near zero
    Sign got = sign_lin(LambdaLinear(s, t), *lam);
    CAPTURE(s, t, v);
    CHECK(got == (v > 0 ? Sign::positive : Sign::negative));
  }
}

TEST_CASE("exact zero through a rational stream") {
  auto half = make_stream("cf:[0;2]");
  CHECK(sign_lin(LambdaLinear(Rat(-1, 2), Rat(1)), *half) == Sign::zero);
  CHECK(sign_lin(LambdaLinear(Rat(-1, 2), Rat(2)), *half) == Sign::positive);
}

TEST_CASE("open tails admit honest indeterminacy") {
  auto open = make_stream("cf:[0;2,...]");
  // lambda - 1/4 vanishes inside the terminal enclosure [1/3, 1/2]
  CHECK(sign_lin(LambdaLinear(Rat(-1, 4), Rat(1)), *open) == Sign::indeterminate);
  // but a form separated from the enclosure still resolves
  CHECK(sign_lin(LambdaLinear(Rat(-2), Rat(1)), *open) == Sign::negative);
}

TEST_CASE("absolute comparison catches structural ties") {
  auto lam = make_stream("periodic:[0;(2)]");
  LambdaLinear a(Rat(3), Rat(-2));
  CHECK(compare_abs_lin(a, a, *lam) == Sign::zero);
  CHECK(compare_abs_lin(a, -a, *lam) == Sign::zero);
  CHECK(compare_abs_lin(LambdaLinear(Rat(0), Rat(1)), LambdaLinear(Rat(1), Rat(0)), *lam) == Sign::negative);
  CHECK(compare_abs_lin(LambdaLinear(Rat(2), Rat(1)), LambdaLinear(Rat(1), Rat(0)), *lam) == Sign::positive);
}

TEST_CASE("direction references fold into forms") {
  auto lam = make_stream("periodic:[0;(2)]");
  SECTION("rational theta folds exactly") {
    auto th = DirectionRef::rational(Rat(7, 10));
    // -7/10 + 0*lambda + 1*theta = 0
    CHECK(sign_form(LinForm(Rat(-7, 10), Rat(0), Rat(1)), lam, th) == Sign::zero);
    CHECK(sign_form(LinForm(Rat(-7, 10), Rat(0), Rat(2)), lam, th) == Sign::positive);
  }
  SECTION("affine theta over the same stream folds exactly") {
    auto th = DirectionRef::lambda_affine(Rat(1), Rat(-1), lam);  // 1 - lambda
    // theta + lambda - 1 = 0 structurally
    CHECK(sign_form(LinForm(Rat(-1), Rat(1), Rat(1)), lam, th) == Sign::zero);
    CHECK(sign_form(LinForm(Rat(-1), Rat(1), Rat(2)), lam, th) == Sign::positive);
  }
  SECTION("independent theta refines both streams") {
    auto th = DirectionRef::stream(make_stream("periodic:[0;(1)]"));  // golden, 0.618...
    // theta - lambda > 0 (0.618 vs 0.414)
    CHECK(sign_form(LinForm(Rat(0), Rat(-1), Rat(1)), lam, th) == Sign::positive);
    CHECK(sign_form(LinForm(Rat(0), Rat(1), Rat(-1)), lam, th) == Sign::negative);
    // theta + lambda - 2 < 0
    CHECK(sign_form(LinForm(Rat(-2), Rat(1), Rat(1)), lam, th) == Sign::negative);
  }
}

TEST_CASE("factored positive reals compare") {
  SECTION("interval separation") {
    auto a = PowProd::power(Int(2), Rat(1, 2));
    auto b = PowProd::power(Int(3), Rat(1, 3));
    CHECK(a.cmp_less(b) == Tri::yes);
    CHECK(b.cmp_less(a) == Tri::no);
  }
  SECTION("exact fallback on algebraic ties") {
    auto four_sqrt = PowProd::power(Int(4), Rat(1, 2));
    CHECK(four_sqrt.cmp_less(Int(2)) == Tri::no);  // equal, not less
    CHECK(PowProd(Rat(2)).cmp_less(four_sqrt) == Tri::no);
    auto eight_cbrt = PowProd::power(Int(8), Rat(1, 3));
    CHECK(eight_cbrt.cmp_less(Int(2)) == Tri::no);
    CHECK(eight_cbrt.cmp_less(PowProd(Rat(20001, 10000)) * PowProd(Rat(1))) == Tri::yes);
  }
  SECTION("pi factors") {
    auto pi1 = PowProd::pi_power(1);
    CHECK(pi1.cmp_less(PowProd(Rat(22, 7))) == Tri::yes);
    CHECK(pi1.cmp_less(PowProd(Rat(314159, 100000))) == Tri::no);
    CHECK((pi1 / pi1).cmp_less(Int(2)) == Tri::yes);  // cancels exactly
  }
  SECTION("arithmetic and value") {
    // 4/(243 pi): the goodness density constant
    auto c0 = PowProd(Rat(4, 243)) * PowProd::pi_power(-1);
    double v = c0.to_double();
    CHECK(v == Catch::Approx(4.0 / (243.0 * 3.14159265358979)).epsilon(1e-9));
    auto sq = c0.pow(Rat(2));
    CHECK(sq.to_double() == Catch::Approx(v * v).epsilon(1e-9));
  }
  SECTION("integer ceilings") {
    CHECK(PowProd(Rat(5, 2)).ceil_int().value() == 3);
    CHECK(PowProd(Rat(3)).ceil_int().value() == 3);
    CHECK(PowProd::power(Int(2), Rat(1, 2)).ceil_int().value() == 2);
    // inf H_1 for |w0| = 100, r = 3/2: 100^(3/2) = 1000 exactly
    CHECK(PowProd::power(Int(100), Rat(3, 2)).ceil_int().value() == 1000);
  }
}
