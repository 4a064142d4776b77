#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "cantor/sequences.hpp"

using namespace cantor;

TEST_CASE("spec grammar round trips the documented cases") {
  auto p = SequenceSpec::parse("periodic:2,3", SeqTarget::Base);
  CHECK(p.kind() == SpecKind::Periodic);
  CHECK(p.term_integer(1) == 2);
  CHECK(p.term_integer(2) == 3);
  CHECK(p.term_integer(3) == 2);  // period-2 indexing

  auto e = SequenceSpec::parse("expr:2^n", SeqTarget::Base);
  CHECK(e.term_integer(1) == 2);
  CHECK(e.term_integer(2) == 4);

  auto ev = SequenceSpec::parse("eventually:5|2,3", SeqTarget::Base);
  CHECK(ev.term_integer(1) == 5);
  CHECK(ev.term_integer(2) == 2);
  CHECK(ev.term_integer(3) == 3);
  CHECK(ev.term_integer(4) == 2);

  auto c = SequenceSpec::parse("const:0.25", SeqTarget::Weight);
  CHECK(c.term_rational(7) == mpq_class(1, 4));
}

TEST_CASE("spec validation rejects domain violations") {
  CHECK_THROWS_AS(SequenceSpec::parse("const:-1", SeqTarget::Weight), DomainError);
  CHECK_THROWS_AS(SequenceSpec::parse("const:1", SeqTarget::Base), DomainError);
  CHECK_THROWS_AS(SequenceSpec::parse("const:2.5", SeqTarget::Base), DomainError);
  CHECK_THROWS_AS(SequenceSpec::parse("expr:n", SeqTarget::Base), DomainError);  // n=1 -> 1 < 2
  CHECK_THROWS_AS(SequenceSpec::parse("expr:1-n", SeqTarget::Weight), DomainError);
  CHECK_THROWS_AS(SequenceSpec::parse("periodic:", SeqTarget::Base), ParseError);
  CHECK_THROWS_AS(SequenceSpec::parse("nosuch:1", SeqTarget::Base), ParseError);
  CHECK_THROWS_AS(SequenceSpec::parse("periodic", SeqTarget::Base), ParseError);
  CHECK_THROWS_AS(SequenceSpec::parse("eventually:2,3", SeqTarget::Base), ParseError);
}

TEST_CASE("expression term matches the documented polynomial case") {
  auto spec = SequenceSpec::parse("expr:n+1", SeqTarget::Base);
  CHECK(spec.term_integer(5) == 6);

  auto fancy = SequenceSpec::parse("expr:2+floor(sqrt(n+sqrt(n)*cos(n))/cbrt(n))",
                                   SeqTarget::Base);
  CHECK(fancy.term_integer(1) == 3);  // high-precision evaluation oracle
}

TEST_CASE("table specs read newline-delimited files") {
  std::string path = "seq_table_test.txt";
  {
    std::ofstream f(path);
    f << "2\n3\n\n5\n";
  }
  auto t = SequenceSpec::parse("table:" + path, SeqTarget::Base);
  CHECK(t.term_integer(1) == 2);
  CHECK(t.term_integer(2) == 3);
  CHECK(t.term_integer(3) == 5);
  CHECK_THROWS_AS(t.term_integer(4), DomainError);  // beyond the table
  CHECK_THROWS_AS(SequenceSpec::parse("table:no_such_file.txt", SeqTarget::Base),
                  ParseError);
  std::remove(path.c_str());
}

TEST_CASE("log partial products agree with exact products") {
  CumulativeCache q(SequenceSpec::parse("periodic:2,3", SeqTarget::Base));
  // oracle: exact product 36, then log
  CHECK(partial_product(q, 2) == 6);
  CHECK(partial_product(q, 4) == 36);
  LogReal l4 = log_partial_product(q, 4);
  double expect = 2 * std::log(6.0);
  CHECK(l4.to_double() == Catch::Approx(expect).epsilon(1e-14));

  CumulativeCache c2(SequenceSpec::parse("const:2", SeqTarget::Base));
  CHECK(log_partial_product(c2, 10).to_double() ==
        Catch::Approx(10 * M_LN2).epsilon(1e-15));

  CumulativeCache e(SequenceSpec::parse("expr:2^n", SeqTarget::Base));
  CHECK(partial_product(e, 4) == 1024);  // oracle: 2^{1+2+3+4}
  CHECK(log_partial_product(e, 4).to_double() ==
        Catch::Approx(10 * M_LN2).epsilon(1e-15));
}

TEST_CASE("exp(log Q_n) matches Q_n within the stated radius") {
  CumulativeCache q(SequenceSpec::parse("periodic:2,3,7", SeqTarget::Base));
  for (long n : {1L, 2L, 5L, 9L, 20L}) {
    mpz_class exact = partial_product(q, n);
    LogReal ball = log_partial_product(q, n);
    LogReal lg = LogReal::log_of_rational(mpq_class(exact), 256);
    lg.sub(ball);
    // |log(exact) - cached| <= combined radii
    Real gap = lg.value();
    mpfr_abs(gap.get(), gap.get(), MPFR_RNDU);
    Real rad = add(lg.radius(), ball.radius(), 64, MPFR_RNDU);
    CHECK(mpfr_cmp(gap.get(), rad.get()) <= 0);
    // log Q_n >= n log 2
    CHECK(ball.to_double() >= static_cast<double>(n) * M_LN2 - 1e-12);
  }
}

TEST_CASE("partial product respects the bit cap") {
  CumulativeCache e(SequenceSpec::parse("expr:2^n", SeqTarget::Base), 128, 1024);
  CHECK_THROWS_AS(partial_product(e, 60), CapExceeded);  // needs 1831 bits
  CHECK(partial_product(e, 10) == mpz_class(1) << 55);
}

TEST_CASE("alpha partial sums are exact for rational specs") {
  CumulativeCache a(SequenceSpec::parse("const:1", SeqTarget::Weight));
  CHECK(alpha_partial_sum(a, 7).to_double() == 7.0);
  CHECK(a.exact_sum(7) == 7);

  CumulativeCache z(SequenceSpec::parse("const:0", SeqTarget::Weight));
  CHECK(alpha_partial_sum(z, 100).to_double() == 0.0);
  CHECK(z.exact_sum(100) == 0);

  // expr:2*log(n): alpha(3) = 2 log 6 (oracle: high-precision summation)
  CumulativeCache l(SequenceSpec::parse("expr:2*log(n)", SeqTarget::Weight));
  CHECK(alpha_partial_sum(l, 3).to_double() ==
        Catch::Approx(2 * std::log(6.0)).epsilon(1e-14));
  CHECK_FALSE(l.has_exact_sums());
}

TEST_CASE("alpha partial sums are nondecreasing") {
  CumulativeCache a(SequenceSpec::parse("periodic:0.5,0,1.25", SeqTarget::Weight));
  double prev = 0;
  for (long n = 1; n <= 50; ++n) {
    double cur = a.log_sum_d(n);
    CHECK(cur >= prev);
    prev = cur;
  }
}

TEST_CASE("cached values reproduce bit-for-bit from scratch") {
  auto build = [] {
    CumulativeCache q(SequenceSpec::parse("expr:2+floor(log(n+1))", SeqTarget::Base));
    return q.log_sum(9000);  // crosses a checkpoint boundary
  };
  LogReal a = build();
  LogReal b = build();
  CHECK(mpfr_cmp(a.value().get(), b.value().get()) == 0);
  CHECK(mpfr_cmp(a.radius().get(), b.radius().get()) == 0);

  // reconstruction path equals the accumulation path
  CumulativeCache q(SequenceSpec::parse("expr:2+floor(log(n+1))", SeqTarget::Base));
  q.ensure(9000);
  LogReal direct = q.log_sum(9000);
  CHECK(mpfr_cmp(a.value().get(), direct.value().get()) == 0);
}

TEST_CASE("cumulative cache snapshots match the ball midpoints") {
  CumulativeCache q(SequenceSpec::parse("periodic:2,3", SeqTarget::Base));
  q.ensure(5000);
  for (long n : {1L, 17L, 4096L, 4097L, 5000L}) {
    CHECK(q.log_sum_d(n) == q.log_sum(n).to_double());
    CHECK(q.radius_bound_d(n) >= q.log_sum(n).radius_double());
  }
}
