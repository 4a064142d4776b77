#include <catch2/catch_amalgamated.hpp>

#include <thread>

#include "cantor/numeric.hpp"

using namespace cantor;

TEST_CASE("Real basic arithmetic and conversion") {
  Real a = Real::of(2L, 128);
  Real b = Real::of(3L, 128);
  CHECK(add(a, b, 128).to_double() == 5.0);
  CHECK(mul(a, b, 128).to_double() == 6.0);
  CHECK(div(a, b, 256).prec() == 256);
  CHECK(log(exp(a)).to_double() == Catch::Approx(2.0));

  Real q = Real::of(mpq_class(1, 3), 128);
  CHECK(q.to_double() == Catch::Approx(1.0 / 3.0));
  Real z = Real::of(mpz_class("123456789012345678901234567890"), 128);
  CHECK(z.integer_valued());
  CHECK(z.to_integer() == mpz_class("123456789012345678901234567890"));
}

TEST_CASE("LogReal radius propagation stays rigorous") {
  // log(2) + log(3) must enclose log(6)
  LogReal s = LogReal::log_of_rational(mpq_class(2), 128);
  s.add(LogReal::log_of_rational(mpq_class(3), 128));
  LogReal six = LogReal::log_of_rational(mpq_class(6), 256);
  LogReal d = sub(s, six);
  CHECK(d.compare_zero() == Cmp3::Ambiguous);  // enclosures overlap
  CHECK(std::abs(d.to_double()) < 1e-30);
  CHECK(d.radius_double() > 0);
  CHECK(d.radius_double() < 1e-30);
}

TEST_CASE("LogReal exact rational sums have zero radius") {
  LogReal s = LogReal::exact_rational(mpq_class(1, 2), 128);
  s.add_rational(mpq_class(1, 4));
  CHECK(s.radius_double() == 0.0);
  CHECK(s.to_double() == 0.75);
  CHECK(s.compare_zero() == Cmp3::Greater);
}

TEST_CASE("LogReal sign decisions") {
  LogReal zero(128);
  CHECK(zero.exact_zero());
  CHECK(zero.compare_zero() == Cmp3::Equal);

  LogReal neg = LogReal::log_of_rational(mpq_class(1, 2), 128);
  CHECK(neg.compare_zero() == Cmp3::Less);
  LogReal pos = LogReal::log_of_rational(mpq_class(3, 2), 128);
  CHECK(pos.compare_zero() == Cmp3::Greater);

  CHECK(LogReal::neg_infinity(64).compare_zero() == Cmp3::Less);
}

TEST_CASE("LogReal scale propagates radius") {
  LogReal l2 = LogReal::log2_const(128);
  double r0 = l2.radius_double();
  l2.scale(5);
  CHECK(l2.to_double() == Catch::Approx(5 * M_LN2));
  CHECK(l2.radius_double() >= 5 * r0);
}

TEST_CASE("circle helpers are exact") {
  CHECK(frac_mod1(mpq_class(7, 5)) == mpq_class(2, 5));
  CHECK(frac_mod1(mpq_class(-1, 5)) == mpq_class(4, 5));
  CHECK(nearest_integer_distance(mpq_class(1, 5)) == mpq_class(1, 5));
  CHECK(nearest_integer_distance(mpq_class(2, 3)) == mpq_class(1, 3));
  CHECK(nearest_integer_distance(mpq_class(1, 2)) == mpq_class(1, 2));
  CHECK(circle_distance(mpq_class(9, 10), mpq_class(1, 10)) == mpq_class(1, 5));
}

TEST_CASE("AppendLog supports one writer with concurrent readers") {
  AppendLog<double> log;
  std::atomic<bool> done{false};
  std::atomic<long> mismatches{0};
  std::thread reader([&] {
    while (!done.load(std::memory_order_acquire)) {
      std::size_t n = log.size();
      for (std::size_t i = 0; i < n; ++i)
        if (log[i] != static_cast<double>(i)) mismatches.fetch_add(1);
    }
  });
  for (int i = 0; i < 20000; ++i) log.push_back(static_cast<double>(i));
  done.store(true, std::memory_order_release);
  reader.join();
  CHECK(mismatches.load() == 0);
  CHECK(log.size() == 20000);
  CHECK(log[12345] == 12345.0);
}
