#pragma once

// Shrinking-target geometry: level-n target families, three-valued hit tests
// for the orbit condition ||T_Q^n(x)|| <= e^{-alpha(n)}, and the Diophantine
// layer (heights, psi, witness search). Orbit distances are computed exactly
// through modular arithmetic on the denominator of x, so hit tests never need
// the full product Q_n.

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "cantor/expansion.hpp"
#include "cantor/sequences.hpp"

namespace cantor {

struct TargetLevel {
  long n = 0;
  LogReal log_qn;      // log Q_n
  LogReal alpha_n;     // alpha(n)
  LogReal log_radius;  // -(alpha(n) + log Q_n), the log of e^{-alpha(n)}/Q_n
};

inline TargetLevel make_level(CumulativeCache& q_cache, CumulativeCache& a_cache, long n) {
  if (n < 1) throw DomainError("target level must be >= 1");
  TargetLevel lvl;
  lvl.n = n;
  lvl.log_qn = q_cache.log_sum(n);
  lvl.alpha_n = a_cache.log_sum(n);
  lvl.log_radius = lvl.alpha_n;
  lvl.log_radius.add(lvl.log_qn);
  lvl.log_radius.negate();
  return lvl;
}

// log psi(n) = -(alpha(n) + log Q_n).
inline LogReal psi_log(CumulativeCache& q_cache, CumulativeCache& a_cache, long n) {
  return make_level(q_cache, a_cache, n).log_radius;
}

enum class HitStatus { Hit, Miss, Uncertain };

inline const char* to_string(HitStatus s) {
  switch (s) {
    case HitStatus::Hit: return "hit";
    case HitStatus::Miss: return "miss";
    case HitStatus::Uncertain: return "uncertain";
  }
  return "?";
}

struct HitVerdict {
  HitStatus status = HitStatus::Uncertain;
  bool exact_zero = false;  // orbit landed exactly on the grid
  LogReal margin;           // log||T_Q^n x|| + alpha(n); <= 0 means hit
};

namespace detail {

// ||T_Q^n(x)|| for x = p/q, via Q_n p mod q. Exact and cheap for any n.
inline mpq_class orbit_distance(const ExactPoint& x, CumulativeCache& q_cache, long n) {
  const mpz_class& den = x.den();
  if (den == 1) return mpq_class(0);
  mpz_class r = x.num() % den;
  for (long i = 1; i <= n; ++i) {
    mpz_class qi = q_cache.term_integer(i);
    r = (r * qi) % den;
  }
  mpq_class d(r, den);
  d.canonicalize();
  mpq_class other = 1 - d;
  return d <= other ? d : other;
}

// Decide sign(log(dist) + alpha(n)) with doubling precision.
inline HitVerdict classify_margin(const mpq_class& dist, CumulativeCache& a_cache,
                                  long n, mpfr_prec_t prec) {
  HitVerdict v;
  if (dist == 0) {
    v.status = HitStatus::Hit;
    v.exact_zero = true;
    v.margin = LogReal::neg_infinity(prec);
    return v;
  }
  for (mpfr_prec_t p = prec; p <= 1024; p *= 2) {
    LogReal margin = LogReal::log_of_rational(dist, p);
    if (a_cache.has_exact_sums())
      margin.add_rational(a_cache.exact_sum(n));
    else
      margin.add(a_cache.log_sum(n));  // cache precision bounds the ball
    v.margin = margin;
    switch (margin.compare_zero()) {
      case Cmp3::Less:
      case Cmp3::Equal:
        v.status = HitStatus::Hit;
        return v;
      case Cmp3::Greater:
        v.status = HitStatus::Miss;
        return v;
      case Cmp3::Ambiguous:
        break;
    }
  }
  v.status = HitStatus::Uncertain;
  return v;
}

}  // namespace detail

// Does the orbit hit the level-n target, i.e. ||T_Q^n x|| <= e^{-alpha(n)}?
inline HitVerdict hit_test(const ExactPoint& x, CumulativeCache& q_cache,
                           CumulativeCache& a_cache, long n,
                           mpfr_prec_t prec = kDefaultPrec) {
  if (n < 1) throw DomainError("hit level must be >= 1");
  mpq_class dist = detail::orbit_distance(x, q_cache, n);
  return detail::classify_margin(dist, a_cache, n, prec);
}

// All levels n = 1..N whose verdict is not Miss, in increasing n.
inline std::vector<std::pair<long, HitVerdict>> hit_levels(
    const ExactPoint& x, CumulativeCache& q_cache, CumulativeCache& a_cache,
    long n_max, mpfr_prec_t prec = kDefaultPrec) {
  if (n_max < 1) throw DomainError("n_max must be >= 1");
  std::vector<std::pair<long, HitVerdict>> out;
  const mpz_class& den = x.den();
  mpz_class r = den == 1 ? mpz_class(0) : mpz_class(x.num() % den);
  for (long n = 1; n <= n_max; ++n) {
    if (den != 1) r = (r * q_cache.term_integer(n)) % den;
    mpq_class d(r, den);
    d.canonicalize();
    mpq_class other = 1 - d;
    if (other < d) d = other;
    HitVerdict v = detail::classify_margin(d, a_cache, n, prec);
    if (v.status != HitStatus::Miss) out.emplace_back(n, v);
  }
  return out;
}

// Height H_Q(w): least n >= 1 with w * Q_n integral. denominator(w * Q_n) is
// den(w) reduced by gcd(den, q_i) once per step. For specs whose terms come
// from a finite value set, a denominator coprime to the product of those
// values can never be cleared, giving an exact NotQAdic answer; expression
// specs fall back to the scan horizon.
inline long height(const ExactPoint& w, CumulativeCache& q_cache, long n_scan = 10000) {
  mpz_class d = w.den();
  if (d == 1) return 1;  // w = 0 lies on every grid
  const SequenceSpec& spec = q_cache.spec();
  std::optional<mpz_class> support;
  if (spec.has_rational_terms() && spec.kind() != SpecKind::Table) {
    mpz_class p(1);
    for (const auto& v : spec.payload_values()) p *= v.get_num();
    support = p;
  }
  for (long n = 1; n <= n_scan; ++n) {
    if (support) {
      mpz_class g;
      mpz_gcd(g.get_mpz_t(), d.get_mpz_t(), support->get_mpz_t());
      if (g == 1)
        throw NotQAdic("denominator " + w.den().get_str() +
                       " has a prime outside the base sequence's support");
    }
    mpz_class qi = q_cache.term_integer(n);
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), d.get_mpz_t(), qi.get_mpz_t());
    d /= g;
    if (d == 1) return n;
  }
  throw NotQAdic("denominator " + w.den().get_str() +
                 " not cleared within scan horizon " + std::to_string(n_scan));
}

struct Witness {
  ExactPoint w;       // the grid point j/Q_n
  mpz_class index;    // j
  mpq_class distance; // |x - w| on the circle
  long order;         // n, an upper bound for H_Q(w)
};

struct WitnessResult {
  HitStatus status = HitStatus::Uncertain;
  std::optional<Witness> witness;  // present iff status == Hit
};

// Level-n witness: the nearest order-n grid point w = j/Q_n if
// ||x - w|| <= psi(n). Needs the exact Q_n.
inline WitnessResult witness_search(const ExactPoint& x, CumulativeCache& q_cache,
                                    CumulativeCache& a_cache, long n,
                                    mpfr_prec_t prec = kDefaultPrec) {
  if (n < 1) throw DomainError("witness level must be >= 1");
  QadicNearest near = nearest_qadic(x, q_cache, n);
  WitnessResult res;
  if (near.distance == 0) {
    res.status = HitStatus::Hit;
  } else {
    // ||x - j/Q_n|| <= e^{-alpha(n)}/Q_n  <=>  log(dist) + alpha(n) + log Q_n <= 0
    for (mpfr_prec_t p = prec; p <= 1024; p *= 2) {
      LogReal margin = LogReal::log_of_rational(near.distance, p);
      if (a_cache.has_exact_sums())
        margin.add_rational(a_cache.exact_sum(n));
      else
        margin.add(a_cache.log_sum(n));
      margin.add(q_cache.log_sum(n));
      Cmp3 c = margin.compare_zero();
      if (c == Cmp3::Less || c == Cmp3::Equal) {
        res.status = HitStatus::Hit;
        break;
      }
      if (c == Cmp3::Greater) {
        res.status = HitStatus::Miss;
        break;
      }
      res.status = HitStatus::Uncertain;
    }
  }
  if (res.status == HitStatus::Hit) {
    mpz_class qn = q_cache.product(n);
    Witness w;
    w.index = near.index;
    mpq_class val(near.index, qn);
    val.canonicalize();
    w.w = ExactPoint(val);
    w.distance = near.distance;
    w.order = n;
    res.witness = w;
  }
  return res;
}

}  // namespace cantor
