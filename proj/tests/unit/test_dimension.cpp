#include <catch2/catch_amalgamated.hpp>

#include "cantor/dimension.hpp"

using namespace cantor;

namespace {

struct Pair {
  CumulativeCache q, a;
  Pair(const std::string& qs, const std::string& as)
      : q(SequenceSpec::parse(qs, SeqTarget::Base)),
        a(SequenceSpec::parse(as, SeqTarget::Weight)) {}
};

}  // namespace

TEST_CASE("pressure of constant sequences is the affine formula") {
  Pair p("const:2", "const:0.75");
  for (double s : {0.0, 0.3, 0.5, 1.0}) {
    auto [value, profile] = pressure_estimate(p.q, p.a, s, 100, 0.5, true);
    double expect = (1 - s) * M_LN2 - s * 0.75;  // f_n(s) constant in n
    CHECK(value == Catch::Approx(expect).margin(1e-12));
    for (auto& [n, f] : profile.samples)
      CHECK(f == Catch::Approx(expect).margin(1e-12));
  }

  // s = 0 kills the alpha term: max log(Q_n)/n >= log 2
  Pair r("periodic:2,5", "expr:0.5*n");
  auto [v0, pr0] = pressure_estimate(r.q, r.a, 0.0, 200);
  CHECK(v0 >= M_LN2);

  // (const:2, alpha_n = log 2): f(1/2) = 0
  Pair h("const:2", "expr:log(2)");
  auto [vh, prh] = pressure_estimate(h.q, h.a, 0.5, 100);
  CHECK(vh == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("pressure is affine and strictly decreasing in s") {
  Pair p("expr:n+1", "expr:log(n+1)");
  auto [f0, a0] = pressure_estimate(p.q, p.a, 0.0, 500);
  auto [fh, ah] = pressure_estimate(p.q, p.a, 0.5, 500);
  auto [f1, a1] = pressure_estimate(p.q, p.a, 1.0, 500);
  CHECK(f0 > fh);
  CHECK(fh > f1);
  // per-sample affinity: f_n(1/2) = (f_n(0) + f_n(1)) / 2
  TailWindow w(p.q, p.a, 500, 0.5);
  for (long n = w.n_lo(); n <= w.n_hi(); n += 37)
    CHECK(w.f(n, 0.5) ==
          Catch::Approx((w.f(n, 0.0) + w.f(n, 1.0)) / 2).margin(1e-13));
}

TEST_CASE("bowen parameter solves the documented closed forms") {
  // (1-s) log 2 = s log 2  =>  s = 1/2
  Pair h("const:2", "expr:log(2)");
  DimensionEstimate b = bowen_parameter(h.q, h.a, 200, 1e-8);
  CHECK(b.value == Catch::Approx(0.5).margin(1e-7));

  // alpha == 0: pressure positive for all s < 1
  Pair z("periodic:3,7", "const:0");
  CHECK(bowen_parameter(z.q, z.a, 100).value == Catch::Approx(1.0).margin(1e-5));

  // periodic:2,3 with c = 1: log sqrt(6) / (log sqrt(6) + 1)
  Pair p("periodic:2,3", "const:1");
  double expect = std::log(std::sqrt(6.0)) / (std::log(std::sqrt(6.0)) + 1.0);
  CHECK(bowen_parameter(p.q, p.a, 2000).value ==
        Catch::Approx(expect).margin(1e-4));
}

TEST_CASE("dimension limsup matches the example families") {
  Pair z("periodic:3,7", "const:0");
  DimensionEstimate d0 = dimension_limsup(z.q, z.a, 100);
  CHECK(d0.value == 1.0);  // exactly
  CHECK(d0.residual == 0.0);

  // q_n = 2^n, alpha_n = n log 2: g_n = 1/2 for every n
  Pair e("expr:2^n", "expr:n*log(2)");
  DimensionEstimate de = dimension_limsup(e.q, e.a, 400);
  CHECK(de.value == Catch::Approx(0.5).margin(1e-12));

  // q_n = n+1, alpha_n = log n: slow approach to 1/2 from above
  Pair poly("expr:n+1", "expr:log(n)");
  DimensionEstimate dp = dimension_limsup(poly.q, poly.a, 20000);
  CHECK(dp.value > 0.5);
  CHECK(dp.value == Catch::Approx(0.5).margin(5e-3));
}

TEST_CASE("bowen and limsup agree within tolerances") {
  for (auto [qs, as] : {std::pair{"periodic:2,3", "const:1"},
                        std::pair{"expr:n+1", "expr:log(n)"},
                        std::pair{"expr:2^n", "expr:0.25*n"},
                        std::pair{"eventually:7|2,2,3", "periodic:0.5,1.5"}}) {
    Pair p(qs, as);
    DimensionEstimate b = bowen_parameter(p.q, p.a, 3000, 1e-6);
    DimensionEstimate d = dimension_limsup(p.q, p.a, 3000);
    CHECK(std::abs(b.value - d.value) <=
          std::max(1e-6, b.residual + d.residual) + 1e-12);
  }
}

TEST_CASE("corollary limit handles constants, divergence, and oscillation") {
  Pair c("const:3", "const:2");
  DimensionEstimate d = corollary_limit(c.q, c.a, 1000);
  double expect_l = 2.0 / std::log(3.0);
  CHECK(d.limit_estimate == Catch::Approx(expect_l).margin(1e-9));
  CHECK(d.value == Catch::Approx(std::log(3.0) / (std::log(3.0) + 2.0)).margin(1e-9));
  CHECK_FALSE(d.no_limit);
  CHECK_FALSE(d.diverged);

  // alpha_n = n over q_n = 2: ratio grows without bound
  Pair g("const:2", "expr:n");
  DimensionEstimate dg = corollary_limit(g.q, g.a, 10000);
  CHECK(dg.diverged);
  CHECK(dg.value == 0.0);

  // periodic base with constant alpha: ratio oscillates, flag no_limit
  Pair o("periodic:2,3", "const:1");
  DimensionEstimate dn = corollary_limit(o.q, o.a, 1000);
  CHECK(dn.no_limit);
  CHECK(dn.value > 0);  // value still reported
}

TEST_CASE("family formulas reproduce the closed-form dimensions") {
  FamilyDescriptor per;
  per.kind = FamilyDescriptor::Kind::EventuallyPeriodic;
  per.period = {2, 3};
  per.c = 1;
  double lg = std::log(std::sqrt(6.0));
  CHECK(family_formula(per).to_double() == Catch::Approx(lg / (lg + 1)).margin(1e-14));

  FamilyDescriptor poly;
  poly.kind = FamilyDescriptor::Kind::PolynomialGrowth;
  poly.k = mpq_class(1, 6);
  poly.c = 2;
  CHECK(family_formula(poly).to_double() ==
        Catch::Approx((1.0 / 6) / (1.0 / 6 + 2)).margin(1e-14));

  FamilyDescriptor ex;
  ex.kind = FamilyDescriptor::Kind::ExponentialGrowth;
  ex.b = 2;
  ex.c = 1;
  CHECK(family_formula(ex).to_double() ==
        Catch::Approx(M_LN2 / (M_LN2 + 1)).margin(1e-14));

  FamilyDescriptor bad;
  bad.kind = FamilyDescriptor::Kind::EventuallyPeriodic;
  CHECK_THROWS_AS(family_formula(bad), UnsupportedFamily);
  bad.period = {1};
  CHECK_THROWS_AS(family_formula(bad), UnsupportedFamily);
}

TEST_CASE("dimension estimates stay within [0, 1] and scale with c") {
  for (const char* as : {"const:0.25", "const:1", "const:4", "const:16"}) {
    Pair p("periodic:2,3", as);
    DimensionEstimate d = dimension_limsup(p.q, p.a, 500);
    CHECK(d.value >= 0.0);
    CHECK(d.value <= 1.0);
  }
  // value decreases as c grows
  double prev = 1.0;
  for (const char* as : {"const:0.5", "const:1", "const:2", "const:4"}) {
    Pair p("periodic:2,3", as);
    double v = dimension_limsup(p.q, p.a, 500).value;
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("sign bracketing around the dimension estimate") {
  Pair p("periodic:2,3", "const:1");
  DimensionEstimate d = dimension_limsup(p.q, p.a, 2000);
  auto [below, pb] = pressure_estimate(p.q, p.a, d.value - d.residual - 0.01, 2000);
  auto [above, pa] = pressure_estimate(p.q, p.a, d.value + d.residual + 0.01, 2000);
  CHECK(below > 0);
  CHECK(above < 0);
}

TEST_CASE("stolz report compares term and sum ratios") {
  CumulativeCache a1(SequenceSpec::parse("const:1", SeqTarget::Weight));
  CumulativeCache b1(SequenceSpec::parse("const:2", SeqTarget::Weight));
  StolzReport r1 = stolz_check(a1, b1, 500);
  CHECK(r1.term_ratio == Catch::Approx(0.5));
  CHECK(r1.sum_ratio == Catch::Approx(0.5));
  CHECK(r1.gap == Catch::Approx(0.0).margin(1e-12));

  CumulativeCache a2(SequenceSpec::parse("expr:n", SeqTarget::Weight));
  CumulativeCache b2(SequenceSpec::parse("expr:n", SeqTarget::Weight));
  StolzReport r2 = stolz_check(a2, b2, 500);
  CHECK(r2.term_ratio == Catch::Approx(1.0));
  CHECK(r2.sum_ratio == Catch::Approx(1.0));

  CumulativeCache a3(SequenceSpec::parse("expr:log(n)", SeqTarget::Weight));
  CumulativeCache b3(SequenceSpec::parse("const:1", SeqTarget::Weight));
  StolzReport r3 = stolz_check(a3, b3, 10000);
  CHECK(r3.term_ratio == Catch::Approx(std::log(10000.0)).epsilon(1e-6));
  CHECK(r3.sum_ratio < r3.term_ratio);  // partial-sum ratio lags behind
  CHECK(r3.gap == Catch::Approx(r3.term_ratio - r3.sum_ratio).margin(1e-9));
}

TEST_CASE("window preconditions are enforced") {
  Pair p("const:2", "const:1");
  CHECK_THROWS_AS(dimension_limsup(p.q, p.a, 5), DomainError);
  CHECK_THROWS_AS(pressure_estimate(p.q, p.a, 1.5, 100), DomainError);
  CHECK_THROWS_AS(bowen_parameter(p.q, p.a, 100, -1.0), DomainError);
  CHECK_THROWS_AS(TailWindow(p.q, p.a, 100, 1.5), DomainError);
}
