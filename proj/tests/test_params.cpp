#include <catch2/catch_amalgamated.hpp>

#include "slitforge/params.hpp"

#include <map>
#include <string>

using namespace slitforge;

namespace {

std::string big_pow10(int zeros) {
  std::string s = "1";
  s.append(static_cast<std::size_t>(zeros), '0');
  return s;
}

}  // namespace

TEST_CASE("rational literals parse exactly") {
  CHECK(parse_rat("7/5") == Rat(7, 5));
  CHECK(parse_rat("1.4") == Rat(7, 5));
  CHECK(parse_rat("0.02") == Rat(1, 50));
  CHECK(parse_rat("4") == Rat(4));
  CHECK(parse_rat("-3/2") == Rat(-3, 2));
  CHECK(parse_rat(".5") == Rat(1, 2));
  CHECK_THROWS_AS(parse_rat("1.4.5"), domain_error);
  CHECK_THROWS_AS(parse_rat("a/b"), domain_error);
  CHECK_THROWS_AS(parse_rat("3/0"), domain_error);
  CHECK_THROWS_AS(parse_rat(""), domain_error);
}

TEST_CASE("the derived pack at eps = 1/10 is pinned field by field") {
  ParamPack p = derive_params(Rat(1, 10));
  CHECK(p.r == Rat(7, 5));
  CHECK(p.delta == Rat(1, 50));
  CHECK(p.M == Rat(5, 2));
  CHECK(p.Mprime == Rat(175));
  CHECK(p.N == Rat(117649, 125));
  CHECK(p.Nprime == Rat(412209, 125));  // 3297.672 exactly
  CHECK(p.rho == Rat(19, 10));
  CHECK(p.k0 == -1);
  CHECK(p.mode == Mode::strict);
  CHECK_FALSE(p.tainted());
  CHECK(p.notes.empty());
  // c_0 still carries the pi factor
  CHECK_FALSE(p.c0.plain_rational());
  CHECK((p.c0 * PowProd::pi_power(1)).plain_rational());

  // both local-dimension inequalities hold with the margins computed by hand
  CHECK(Rat(1) / (1 + p.r) == Rat(5, 12));
  CHECK((1 - p.delta) / (1 + p.r + 2 * p.delta) == Rat(49, 122));  // > 2/5 by 1/610
}

TEST_CASE("the derived pack at eps = 2/5 uses the slack range") {
  ParamPack p = derive_params(Rat(2, 5));
  CHECK(p.r == Rat(19, 10));
  CHECK(p.delta == Rat(59, 100));
  CHECK(p.M == Rat(10, 9));
  CHECK(p.Mprime == Rat(100, 27));
  CHECK(p.N == Rat(2476099, 27000));
  CHECK(p.Nprime == Rat(47558881, 243000));
  CHECK(p.rho == Rat(12, 5));
  CHECK(p.notes.empty());
}

TEST_CASE("tiny eps refines the grid instead of failing") {
  ParamPack p = derive_params(Rat(1, 1000));
  CHECK(p.r == Rat(251, 250));
  CHECK(p.delta == Rat(1, 500000));
  CHECK(p.M == Rat(250));
  CHECK(p.Mprime == Rat(125500000));
  CHECK(p.notes.empty());
}

TEST_CASE("derive_params rejects out-of-range eps and strict overrides") {
  CHECK_THROWS_AS(derive_params(Rat(0)), domain_error);
  CHECK_THROWS_AS(derive_params(Rat(1, 2)), domain_error);
  CHECK_THROWS_AS(derive_params(Rat(3, 5)), domain_error);
  CHECK_THROWS_AS(derive_params(Rat(-1, 10)), domain_error);
  CHECK_THROWS_AS(derive_params(Rat(1, 10), Mode::strict, {{"r", "3/2"}}), domain_error);
  CHECK_THROWS_AS(derive_params(Rat(1, 10), Mode::relaxed, {{"Q", "3"}}), domain_error);
  CHECK_THROWS_AS(derive_params(Rat(1, 10), Mode::relaxed, {{"r", "1"}}), domain_error);
  CHECK_THROWS_AS(derive_params(Rat(1, 10), Mode::relaxed, {{"k0", "5/2"}}), domain_error);
  CHECK_THROWS_AS(derive_params(Rat(1, 10), Mode::relaxed, {{"count_target", "3/2"}}), domain_error);
}

TEST_CASE("relaxed overrides echo back, recompute the ladder, and leave notes") {
  std::map<std::string, std::string> ov = {
      {"r", "3/2"}, {"Mprime", "23/10"}, {"N", "4"}, {"Nprime", "3"}, {"k0", "6"}};
  ParamPack p = derive_params(Rat(1, 4), Mode::relaxed, ov);
  CHECK(p.tainted());
  CHECK(p.overrides.size() == 5);
  CHECK(p.overrides.at("r") == Rat(3, 2));
  CHECK(p.r == Rat(3, 2));
  CHECK(p.M == Rat(2));
  CHECK(p.rho == Rat(2));
  // delta is still derived, at the overridden r
  CHECK(p.delta == Rat(6, 25));
  CHECK(p.Mprime == Rat(23, 10));
  CHECK(p.N == Rat(4));
  CHECK(p.Nprime == Rat(3));
  CHECK(p.k0 == 6);
  // the three overridden ladder values each depart from their formulas
  // (here: M' formula gives 25/2, N formula 5589/320, N' formula 15)
  REQUIRE(p.notes.size() == 3);
  CHECK(p.notes[0].find("M'") != std::string::npos);
  CHECK(p.notes[1].find("N departs") != std::string::npos);
  CHECK(p.notes[2].find("N'") != std::string::npos);
  // the overridden r still satisfies the local-dimension inequality at eps=1/4
  CHECK(Rat(1) / (1 + p.r) > Rat(1, 2) - p.eps);
}

TEST_CASE("an override that breaks the local inequality is noted, not hidden") {
  ParamPack p = derive_params(Rat(1, 10), Mode::relaxed, {{"r", "8/5"}, {"delta", "1/10"}});
  // 1/(1+8/5) = 5/13 < 2/5: the r inequality fails
  REQUIRE_FALSE(p.notes.empty());
  CHECK(p.notes[0].find("active r") != std::string::npos);
}

TEST_CASE("the start-index bound at eps = 2/5 lands near 1e79.6") {
  ParamPack p = derive_params(Rat(2, 5));
  K0Requirement req = k0_requirement(p);
  CHECK(req.log10_bound.lo_double() > 79.55);
  CHECK(req.log10_bound.hi_double() < 79.68);
  // the dominating term is the second one
  CHECK(req.log10_terms[1].lo_double() > req.log10_terms[0].hi_double());
  CHECK(req.log10_terms[1].lo_double() > req.log10_terms[2].hi_double());
  CHECK(req.log10_terms[1].lo_double() > req.log10_terms[3].hi_double());
  CHECK(req.next_digits > 7250);
  CHECK(req.next_digits < 7350);

  CHECK(req.satisfied_by(Int(big_pow10(80))) == Tri::yes);
  CHECK(req.satisfied_by(Int(big_pow10(79))) == Tri::no);
  CHECK(req.satisfied_by(Int(1189)) == Tri::no);
}

TEST_CASE("a start-index search succeeds when the expansion carries the gaps") {
  ParamPack p = derive_params(Rat(2, 5));
  // q_1 = 5 is in the gap set but misses the bound; q_2 ~ 5e80 clears it and
  // q_3 ~ 5e7410 > q_2^N keeps k = 2 in the gap set.
  std::string spec = "cf:[0;5," + big_pow10(80) + "," + big_pow10(7330) + ",2,2]";
  StreamPtr s = make_stream(spec);
  K0Choice c = choose_k0(p, *s);
  CHECK(c.outcome == K0Choice::Outcome::found);
  CHECK(c.k0 == 2);
  CHECK(c.bound_ok == Tri::yes);
  CHECK(c.gap_ok == Tri::yes);
  CHECK(c.q_k0 == Int(big_pow10(80)) * 5 + 1);
}

TEST_CASE("the strict pack at eps = 1/10 refuses the search with a diagnostic") {
  ParamPack p = derive_params(Rat(1, 10));
  K0Requirement req = k0_requirement(p);
  CHECK(req.log10_bound.lo_double() > 924.0);
  CHECK(req.log10_bound.hi_double() < 924.3);
  CHECK(req.next_digits > 869000);
  CHECK(req.next_digits < 870500);

  StreamPtr s = make_stream("periodic:[0;(1,2)]");
  K0Choice c = choose_k0(p, *s);
  CHECK(c.outcome == K0Choice::Outcome::infeasible);
  CHECK(c.k0 == -1);
  CHECK(c.diagnostic.find("digit budget") != std::string::npos);
  CHECK(c.diagnostic.find("infeasible") != std::string::npos);
}

TEST_CASE("a preset start index is audited rather than searched") {
  ParamPack p = derive_params(
      Rat(1, 4), Mode::relaxed,
      {{"r", "3/2"}, {"Mprime", "23/10"}, {"N", "4"}, {"Nprime", "3"}, {"k0", "6"}});
  StreamPtr s = make_stream("cf:[0;3,3,3,3,3,3," + big_pow10(24) + ",3,3]");
  K0Choice c = choose_k0(p, *s);
  CHECK(c.outcome == K0Choice::Outcome::found);
  CHECK(c.k0 == 6);
  CHECK(c.q_k0 == 1189);
  // the toy constants do not clear the true bound, and the audit says so
  CHECK(c.bound_ok == Tri::no);
  CHECK(c.gap_ok == Tri::yes);
  CHECK(c.diagnostic.find("does not clear") != std::string::npos);

  // too short an expansion cannot even be audited
  StreamPtr short_s = make_stream("cf:[0;3,3,3]");
  K0Choice c2 = choose_k0(p, *short_s);
  CHECK(c2.outcome == K0Choice::Outcome::exhausted);
}

TEST_CASE("a search on a gapless expansion ends with its scan diagnostic") {
  ParamPack p = derive_params(Rat(2, 5));
  StreamPtr s = make_stream("cf:[0;2,3,2,3,2,3,2,3]");
  K0Choice c = choose_k0(p, *s, {Int(100000), 64});
  CHECK(c.outcome == K0Choice::Outcome::exhausted);
  CHECK_FALSE(c.diagnostic.empty());
}
