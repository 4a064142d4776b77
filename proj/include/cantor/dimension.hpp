#pragma once

// Pressure function, Bowen parameter, and the closed-form limsup dimension
// together with the corollary/example machinery. The limsup over n is
// replaced by a maximum over a tail window [window_fraction * N, N]; the
// residual compares that maximum against the maximum over the window's upper
// half, making non-convergence visible.

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cantor/sequences.hpp"

namespace cantor {

struct PressureProfile {
  double s = 0;
  long n_lo = 0, n_hi = 0;
  std::vector<std::pair<long, double>> samples;  // (n, f_n(s))
};

enum class DimMethod {
  ClosedFormLimsup,
  BowenBisection,
  CorollaryLimit,
  FamilyFormula,
};

inline const char* to_string(DimMethod m) {
  switch (m) {
    case DimMethod::ClosedFormLimsup: return "closed_form_limsup";
    case DimMethod::BowenBisection: return "bowen_bisection";
    case DimMethod::CorollaryLimit: return "corollary_limit";
    case DimMethod::FamilyFormula: return "family_formula";
  }
  return "?";
}

struct DimensionEstimate {
  double value = 0;
  DimMethod method = DimMethod::ClosedFormLimsup;
  long n_lo = 0, n_hi = 0;
  double residual = 0;
  bool no_limit = false;  // corollary: term ratio has no visible limit
  bool diverged = false;  // corollary: L = infinity convention applied
  double limit_estimate = 0;  // corollary: estimated L
};

// Double-precision snapshots of log Q_n and alpha(n) over a tail window,
// derived from the high-precision caches.
class TailWindow {
 public:
  TailWindow(CumulativeCache& q_cache, CumulativeCache& a_cache, long n_hi,
             double window_fraction) {
    if (n_hi < 10) throw DomainError("N_hi must be >= 10");
    if (!(window_fraction > 0.0 && window_fraction < 1.0))
      throw DomainError("window_fraction must lie in (0, 1)");
    n_hi_ = n_hi;
    n_lo_ = std::max(1L, static_cast<long>(std::ceil(window_fraction * static_cast<double>(n_hi))));
    q_cache.ensure(n_hi);
    a_cache.ensure(n_hi);
    std::size_t count = static_cast<std::size_t>(n_hi_ - n_lo_ + 1);
    log_q_.resize(count);
    alpha_.resize(count);
    for (long n = n_lo_; n <= n_hi_; ++n) {
      log_q_[static_cast<std::size_t>(n - n_lo_)] = q_cache.log_sum_d(n);
      alpha_[static_cast<std::size_t>(n - n_lo_)] = a_cache.log_sum_d(n);
    }
    err_bound_ = q_cache.radius_bound_d(n_hi) + a_cache.radius_bound_d(n_hi) + 1e-9;
  }

  long n_lo() const { return n_lo_; }
  long n_hi() const { return n_hi_; }
  long mid() const { return (n_lo_ + n_hi_ + 1) / 2; }
  double error_bound() const { return err_bound_; }

  double log_q(long n) const { return log_q_[static_cast<std::size_t>(n - n_lo_)]; }
  double alpha(long n) const { return alpha_[static_cast<std::size_t>(n - n_lo_)]; }

  // f_n(s) = (1/n) [(1-s) log Q_n - s alpha(n)]
  double f(long n, double s) const {
    return ((1.0 - s) * log_q(n) - s * alpha(n)) / static_cast<double>(n);
  }
  // g_n = log Q_n / (log Q_n + alpha(n))
  double g(long n) const {
    double u = log_q(n);
    return u / (u + alpha(n));
  }

  double max_f(double s, long lo, long hi) const {
    double m = -std::numeric_limits<double>::infinity();
    for (long n = lo; n <= hi; ++n) m = std::max(m, f(n, s));
    return m;
  }
  double max_f(double s) const { return max_f(s, n_lo_, n_hi_); }
  double max_g(long lo, long hi) const {
    double m = -std::numeric_limits<double>::infinity();
    for (long n = lo; n <= hi; ++n) m = std::max(m, g(n));
    return m;
  }

 private:
  long n_lo_ = 0, n_hi_ = 0;
  double err_bound_ = 0;
  std::vector<double> log_q_;
  std::vector<double> alpha_;
};

// Finite-horizon pressure: max over the tail window of f_n(s).
inline std::pair<double, PressureProfile> pressure_estimate(
    CumulativeCache& q_cache, CumulativeCache& a_cache, double s, long n_hi,
    double window_fraction = 0.5, bool with_samples = false) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("s must lie in [0, 1]");
  TailWindow w(q_cache, a_cache, n_hi, window_fraction);
  PressureProfile profile;
  profile.s = s;
  profile.n_lo = w.n_lo();
  profile.n_hi = w.n_hi();
  if (with_samples) {
    profile.samples.reserve(static_cast<std::size_t>(w.n_hi() - w.n_lo() + 1));
    for (long n = w.n_lo(); n <= w.n_hi(); ++n)
      profile.samples.emplace_back(n, w.f(n, s));
  }
  return {w.max_f(s), std::move(profile)};
}

// Bowen parameter via bisection on the sign of the windowed pressure.
// The bracket [0, 1] always contains the sign change: f_n(0) >= log 2 and
// f_n(1) = -alpha(n)/n <= 0.
inline DimensionEstimate bowen_parameter(CumulativeCache& q_cache,
                                         CumulativeCache& a_cache, long n_hi,
                                         double tol = 1e-6,
                                         double window_fraction = 0.5) {
  if (!(tol > 0)) throw DomainError("tol must be > 0");
  TailWindow w(q_cache, a_cache, n_hi, window_fraction);
  double lo = 0.0, hi = 1.0;
  for (int iter = 0; iter < 60 && (hi - lo) > tol; ++iter) {
    double mid = 0.5 * (lo + hi);
    if (w.max_f(mid) > 0)
      lo = mid;
    else
      hi = mid;
  }
  DimensionEstimate est;
  est.value = 0.5 * (lo + hi);
  est.method = DimMethod::BowenBisection;
  est.n_lo = w.n_lo();
  est.n_hi = w.n_hi();
  est.residual = 0.5 * (hi - lo);
  return est;
}

// Closed-form limsup surrogate: max over the tail window of
// g_n = log Q_n / (log Q_n + alpha(n)).
inline DimensionEstimate dimension_limsup(CumulativeCache& q_cache,
                                          CumulativeCache& a_cache, long n_hi,
                                          double window_fraction = 0.5) {
  TailWindow w(q_cache, a_cache, n_hi, window_fraction);
  DimensionEstimate est;
  est.method = DimMethod::ClosedFormLimsup;
  est.n_lo = w.n_lo();
  est.n_hi = w.n_hi();
  est.value = w.max_g(w.n_lo(), w.n_hi());
  est.residual = std::abs(est.value - w.max_g(w.mid(), w.n_hi()));
  return est;
}

// Corollary path: estimate L = lim alpha_n / log(q_n) from the term-ratio
// tail and return 1/(1+L). Divergence maps to value 0; an oscillating ratio
// is reported through the no_limit flag (value still returned).
inline DimensionEstimate corollary_limit(CumulativeCache& q_cache,
                                         CumulativeCache& a_cache, long n_hi,
                                         double window_fraction = 0.5) {
  TailWindow w(q_cache, a_cache, n_hi, window_fraction);
  double sum = 0, rmin = std::numeric_limits<double>::infinity(), rmax = -rmin;
  double first = 0, last = 0;
  long count = 0;
  for (long n = w.n_lo(); n <= w.n_hi(); ++n) {
    double log_qn = w.log_q(n) - (n == w.n_lo() ? q_cache.log_sum_d(n - 1) : w.log_q(n - 1));
    double alpha_n = w.alpha(n) - (n == w.n_lo() ? a_cache.log_sum_d(n - 1) : w.alpha(n - 1));
    double ratio = alpha_n / log_qn;
    if (count == 0) first = ratio;
    last = ratio;
    sum += ratio;
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
    ++count;
  }
  DimensionEstimate est;
  est.method = DimMethod::CorollaryLimit;
  est.n_lo = w.n_lo();
  est.n_hi = w.n_hi();
  double mean = sum / static_cast<double>(count);
  est.limit_estimate = mean;
  est.residual = rmax - rmin;
  est.no_limit = est.residual > 1e-3 * std::max(1.0, std::abs(mean));
  bool diverging = !std::isfinite(mean) || mean > 1e15 ||
                   (last > 1e3 && last > 1.5 * first);
  if (diverging) {
    est.diverged = true;
    est.value = 0.0;
  } else {
    est.value = 1.0 / (1.0 + mean);
  }
  return est;
}

// ---------------------------------------------------------------------------
// Closed forms for the example families
// ---------------------------------------------------------------------------

struct FamilyDescriptor {
  enum class Kind { EventuallyPeriodic, PolynomialGrowth, ExponentialGrowth };
  Kind kind = Kind::EventuallyPeriodic;
  std::vector<mpz_class> period;  // EventuallyPeriodic: the repeating block
  mpq_class k = 0;                // PolynomialGrowth: q_n ~ n^k
  mpq_class b = 0;                // ExponentialGrowth: q_n ~ b^n
  mpq_class c = 0;                // weight constant
};

// Exact dimension of the family, evaluated with high-precision constants:
//   eventually periodic, alpha_n = c:       log G / (log G + c)
//   q_n ~ n^k,           alpha_n = c log n: k / (k + c)
//   q_n ~ b^n,           alpha_n = c n:     log b / (log b + c)
inline Real family_formula(const FamilyDescriptor& fam, mpfr_prec_t prec = kDefaultPrec) {
  if (fam.c < 0) throw UnsupportedFamily("weight constant c must be >= 0");
  Real c = Real::of(fam.c, prec);
  switch (fam.kind) {
    case FamilyDescriptor::Kind::EventuallyPeriodic: {
      if (fam.period.empty()) throw UnsupportedFamily("empty period");
      Real log_g(prec);
      for (const auto& p : fam.period) {
        if (p < 2) throw UnsupportedFamily("period values must be >= 2");
        log_g = add(log_g, log(Real::of(p, prec), prec), prec);
      }
      log_g = div(log_g, Real::of(static_cast<long>(fam.period.size()), prec), prec);
      return div(log_g, add(log_g, c, prec), prec);
    }
    case FamilyDescriptor::Kind::PolynomialGrowth: {
      if (fam.k <= 0) throw UnsupportedFamily("polynomial exponent k must be > 0");
      Real k = Real::of(fam.k, prec);
      return div(k, add(k, c, prec), prec);
    }
    case FamilyDescriptor::Kind::ExponentialGrowth: {
      if (fam.b <= 1) throw UnsupportedFamily("exponential base b must be > 1");
      Real log_b = log(Real::of(fam.b, prec), prec);
      return div(log_b, add(log_b, c, prec), prec);
    }
  }
  throw UnsupportedFamily("unknown family kind");
}

// ---------------------------------------------------------------------------
// Stolz-style diagnostic
// ---------------------------------------------------------------------------

struct StolzReport {
  long n_hi = 0;
  double term_ratio = 0;  // a_N / b_N
  double sum_ratio = 0;   // (a_1 + ... + a_N) / (b_1 + ... + b_N)
  double gap = 0;
};

// Compares the term-ratio tail against the partial-sum ratio at N.
inline StolzReport stolz_check(CumulativeCache& a_cache, CumulativeCache& b_cache,
                               long n_hi) {
  if (n_hi < 1) throw DomainError("N_hi must be >= 1");
  a_cache.ensure(n_hi);
  b_cache.ensure(n_hi);
  StolzReport rep;
  rep.n_hi = n_hi;
  double a_term = a_cache.term_value(n_hi).to_double();
  double b_term = b_cache.term_value(n_hi).to_double();
  rep.term_ratio = b_term == 0 ? std::numeric_limits<double>::infinity()
                               : a_term / b_term;
  double b_sum = b_cache.log_sum_d(n_hi);
  rep.sum_ratio = b_sum == 0 ? std::numeric_limits<double>::infinity()
                             : a_cache.log_sum_d(n_hi) / b_sum;
  rep.gap = std::abs(rep.term_ratio - rep.sum_ratio);
  return rep;
}

}  // namespace cantor
