#pragma once

// Exact Q-Cantor series expansion and exact iteration of the non-autonomous
// maps T_{Q,n}(x) = q_n x (mod 1). Points are exact rationals on the circle;
// every operation here is exact rational arithmetic.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cantor/sequences.hpp"

namespace cantor {

// A point of R/Z represented by its exact rational value in [0, 1).
class ExactPoint {
 public:
  ExactPoint() : v_(0) {}
  explicit ExactPoint(const mpq_class& x) : v_(frac_mod1(x)) {}

  const mpq_class& value() const { return v_; }
  const mpz_class& num() const { return v_.get_num(); }
  const mpz_class& den() const { return v_.get_den(); }
  bool is_zero() const { return v_ == 0; }

  bool operator==(const ExactPoint& o) const { return v_ == o.v_; }

  std::string str() const { return v_.get_str(); }

 private:
  mpq_class v_;
};

struct DigitString {
  std::vector<mpz_class> digits;  // omega_1 .. omega_n
  ExactPoint remainder;           // T_Q^n(x), exactly
};

// T_Q^n(x) = Q_n x (mod 1), computed stepwise so only the individual terms
// q_i are ever materialized. iterate(x, Q, 0) = x.
inline ExactPoint iterate(const ExactPoint& x, CumulativeCache& q_cache, long n) {
  if (n < 0) throw DomainError("iteration count must be >= 0");
  mpq_class v = x.value();
  for (long i = 1; i <= n; ++i) {
    v *= q_cache.term_integer(i);
    v = frac_mod1(v);
  }
  return ExactPoint(v);
}

// Digits via omega_i = floor(q_i * T_Q^{i-1}(x)); yields the terminating
// expansion at Q-adic rationals.
inline DigitString cantor_digits(const ExactPoint& x, CumulativeCache& q_cache, long n) {
  if (n < 1) throw DomainError("digit count must be >= 1");
  DigitString out;
  out.digits.reserve(static_cast<std::size_t>(n));
  mpq_class v = x.value();
  for (long i = 1; i <= n; ++i) {
    mpz_class qi = q_cache.term_integer(i);
    mpq_class scaled = v * qi;
    mpz_class digit;
    mpz_fdiv_q(digit.get_mpz_t(), scaled.get_num().get_mpz_t(),
               scaled.get_den().get_mpz_t());
    out.digits.push_back(digit);
    v = scaled - mpq_class(digit);
    v.canonicalize();
  }
  out.remainder = ExactPoint(v);
  return out;
}

// sum_j omega_j / Q_j, exactly.
inline ExactPoint reconstruct(std::span<const mpz_class> digits,
                              CumulativeCache& q_cache) {
  mpq_class sum(0);
  mpz_class qprod(1);
  for (std::size_t j = 0; j < digits.size(); ++j) {
    mpz_class qj = q_cache.term_integer(static_cast<long>(j) + 1);
    if (digits[j] < 0 || digits[j] >= qj)
      throw InvalidDigit("digit " + digits[j].get_str() + " at position " +
                         std::to_string(j + 1) + " outside [0, " + qj.get_str() + ")");
    qprod *= qj;
    mpq_class term(digits[j], qprod);
    term.canonicalize();
    sum += term;
  }
  return ExactPoint(sum);
}

struct QadicNearest {
  mpz_class index;      // j in {0, ..., Q_n - 1}
  mpq_class distance;   // ||x - j/Q_n||, exactly
};

// Nearest order-n grid point j/Q_n in the circle metric; ties at the exact
// midpoint resolve to the smaller index. Requires the exact Q_n.
inline QadicNearest nearest_qadic(const ExactPoint& x, CumulativeCache& q_cache, long n) {
  mpz_class qn = q_cache.product(n);
  mpq_class scaled = x.value() * qn;  // in [0, Q_n)
  mpz_class j0;
  mpz_fdiv_q(j0.get_mpz_t(), scaled.get_num().get_mpz_t(), scaled.get_den().get_mpz_t());
  mpz_class j1 = j0 + 1;
  if (j1 == qn) j1 = 0;
  mpq_class d0 = circle_distance(x.value(), mpq_class(j0) / qn);
  mpq_class d1 = circle_distance(x.value(), mpq_class(j1) / qn);
  QadicNearest out;
  if (d0 < d1 || (d0 == d1 && j0 < j1)) {
    out.index = j0;
    out.distance = d0;
  } else {
    out.index = j1;
    out.distance = d1;
  }
  return out;
}

}  // namespace cantor
