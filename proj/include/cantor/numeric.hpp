#pragma once

// Arbitrary-precision scalar layer: a thin RAII wrapper over MPFR reals and a
// midpoint/radius ball type (LogReal) used for log-domain quantities whose
// rounding error must stay accounted for. Radii are kept at low precision and
// always rounded upward, so every ball encloses the exact value it stands for.

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

namespace cantor {

inline constexpr mpfr_prec_t kDefaultPrec = 128;
inline constexpr mpfr_prec_t kExprPrec = 256;
inline constexpr mpfr_prec_t kRadiusPrec = 32;
inline constexpr mpfr_prec_t kMaxComparePrec = 16384;
inline constexpr long kDefaultCapBits = 1048576;

// ---------------------------------------------------------------------------
// Error taxonomy
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t position)
      : Error(msg + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class CapExceeded : public Error {
 public:
  using Error::Error;
};

class InvalidDigit : public Error {
 public:
  using Error::Error;
};

class NotQAdic : public Error {
 public:
  using Error::Error;
};

class ScheduleInfeasible : public Error {
 public:
  ScheduleInfeasible(const std::string& msg, std::string constraint)
      : Error(msg), constraint_(std::move(constraint)) {}
  const std::string& constraint() const { return constraint_; }

 private:
  std::string constraint_;
};

class UnsupportedFamily : public Error {
 public:
  using Error::Error;
};

class PreconditionUnmet : public Error {
 public:
  using Error::Error;
};

class PrecisionExhausted : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Real: RAII wrapper over mpfr_t
// ---------------------------------------------------------------------------

class Real {
 public:
  explicit Real(mpfr_prec_t prec = kDefaultPrec) {
    mpfr_init2(v_, prec);
    mpfr_set_zero(v_, 1);
  }
  Real(const Real& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Real(Real&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }
  Real& operator=(const Real& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    if (this != &o) mpfr_swap(v_, o.v_);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  static Real of(double x, mpfr_prec_t prec = kDefaultPrec) {
    Real r(prec);
    mpfr_set_d(r.v_, x, MPFR_RNDN);
    return r;
  }
  static Real of(long x, mpfr_prec_t prec = kDefaultPrec) {
    Real r(prec);
    mpfr_set_si(r.v_, x, MPFR_RNDN);
    return r;
  }
  static Real of(const mpz_class& z, mpfr_prec_t prec = kDefaultPrec) {
    Real r(prec);
    mpfr_set_z(r.v_, z.get_mpz_t(), MPFR_RNDN);
    return r;
  }
  static Real of(const mpq_class& q, mpfr_prec_t prec = kDefaultPrec) {
    Real r(prec);
    mpfr_set_q(r.v_, q.get_mpq_t(), MPFR_RNDN);
    return r;
  }
  static Real of_str(const std::string& s, mpfr_prec_t prec = kDefaultPrec) {
    Real r(prec);
    if (mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN) != 0)
      throw ParseError("invalid numeric literal '" + s + "'", 0);
    return r;
  }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  mpfr_prec_t prec() const { return mpfr_get_prec(v_); }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  int sgn() const { return mpfr_sgn(v_); }
  int cmp(const Real& o) const { return mpfr_cmp(v_, o.v_); }
  int cmp(long x) const { return mpfr_cmp_si(v_, x); }
  bool integer_valued() const { return mpfr_integer_p(v_) != 0; }

  // Exact conversion of an integer-valued float.
  mpz_class to_integer() const {
    mpz_class z;
    mpfr_get_z(z.get_mpz_t(), v_, MPFR_RNDZ);
    return z;
  }

  std::string str(int digits = 24) const {
    char* out = nullptr;
    mpfr_asprintf(&out, "%.*Rg", digits, v_);
    std::string s(out);
    mpfr_free_str(out);
    return s;
  }

 private:
  mpfr_t v_;
};

inline Real add(const Real& a, const Real& b, mpfr_prec_t prec, mpfr_rnd_t rnd = MPFR_RNDN) {
  Real r(prec);
  mpfr_add(r.get(), a.get(), b.get(), rnd);
  return r;
}
inline Real sub(const Real& a, const Real& b, mpfr_prec_t prec, mpfr_rnd_t rnd = MPFR_RNDN) {
  Real r(prec);
  mpfr_sub(r.get(), a.get(), b.get(), rnd);
  return r;
}
inline Real mul(const Real& a, const Real& b, mpfr_prec_t prec, mpfr_rnd_t rnd = MPFR_RNDN) {
  Real r(prec);
  mpfr_mul(r.get(), a.get(), b.get(), rnd);
  return r;
}
inline Real div(const Real& a, const Real& b, mpfr_prec_t prec, mpfr_rnd_t rnd = MPFR_RNDN) {
  Real r(prec);
  mpfr_div(r.get(), a.get(), b.get(), rnd);
  return r;
}

#define CANTOR_REAL_BINOP(op, fn)                              \
  inline Real operator op(const Real& a, const Real& b) {      \
    mpfr_prec_t p = std::max(a.prec(), b.prec());              \
    return fn(a, b, p);                                        \
  }
CANTOR_REAL_BINOP(+, add)
CANTOR_REAL_BINOP(-, sub)
CANTOR_REAL_BINOP(*, mul)
CANTOR_REAL_BINOP(/, div)
#undef CANTOR_REAL_BINOP

inline Real neg(const Real& a) {
  Real r(a.prec());
  mpfr_neg(r.get(), a.get(), MPFR_RNDN);
  return r;
}

#define CANTOR_REAL_UNARY(name, fn)                         \
  inline Real name(const Real& a, mpfr_prec_t prec) {       \
    Real r(prec);                                           \
    fn(r.get(), a.get(), MPFR_RNDN);                        \
    return r;                                               \
  }                                                         \
  inline Real name(const Real& a) { return name(a, a.prec()); }
CANTOR_REAL_UNARY(log, mpfr_log)
CANTOR_REAL_UNARY(exp, mpfr_exp)
CANTOR_REAL_UNARY(sqrt, mpfr_sqrt)
CANTOR_REAL_UNARY(cbrt, mpfr_cbrt)
CANTOR_REAL_UNARY(cos, mpfr_cos)
#undef CANTOR_REAL_UNARY

inline Real floor(const Real& a) {
  Real r(a.prec());
  mpfr_floor(r.get(), a.get());
  return r;
}
inline Real pow(const Real& a, const Real& b, mpfr_prec_t prec) {
  Real r(prec);
  mpfr_pow(r.get(), a.get(), b.get(), MPFR_RNDN);
  return r;
}
inline Real pow(const Real& a, const Real& b) {
  return pow(a, b, std::max(a.prec(), b.prec()));
}

// ---------------------------------------------------------------------------
// LogReal: midpoint/radius ball
// ---------------------------------------------------------------------------

enum class Cmp3 { Less, Equal, Greater, Ambiguous };

class LogReal {
 public:
  explicit LogReal(mpfr_prec_t prec = kDefaultPrec)
      : value_(prec), radius_(kRadiusPrec) {}

  // Exact value, radius zero.
  static LogReal exact(Real v) {
    LogReal b(v.prec());
    b.value_ = std::move(v);
    return b;
  }
  static LogReal exact_rational(const mpq_class& q, mpfr_prec_t prec) {
    LogReal b(prec);
    int t = mpfr_set_q(b.value_.get(), q.get_mpq_t(), MPFR_RNDN);
    if (t != 0) b.bump_ulp();
    return b;
  }
  // Round a Real (taken as exact) into a ball at the requested precision.
  static LogReal round_real(const Real& v, mpfr_prec_t prec) {
    LogReal b(prec);
    int t = mpfr_set(b.value_.get(), v.get(), MPFR_RNDN);
    if (t != 0) b.bump_ulp();
    return b;
  }
  // log of an exact positive rational; radius covers conversion and log rounding.
  static LogReal log_of_rational(const mpq_class& q, mpfr_prec_t prec) {
    if (sgn(q) <= 0) throw DomainError("log of nonpositive rational");
    LogReal b(prec);
    Real x = Real::of(q, prec);
    // relative conversion error <= 2^-prec turns into an absolute log error
    // bounded by 2^(1-prec)
    int t1 = mpfr_cmp_q(x.get(), q.get_mpq_t());
    int t2 = mpfr_log(b.value_.get(), x.get(), MPFR_RNDN);
    if (t1 != 0) b.add_radius_2exp(1 - prec);
    if (t2 != 0) b.bump_ulp();
    return b;
  }
  // log of a positive Real taken as exact (e.g. a floored expression value).
  static LogReal log_of_exact_real(const Real& x, mpfr_prec_t prec) {
    if (x.sgn() <= 0) throw DomainError("log of nonpositive value");
    LogReal b(prec);
    int t = mpfr_log(b.value_.get(), x.get(), MPFR_RNDN);
    if (t != 0) b.bump_ulp();
    return b;
  }
  static LogReal log2_const(mpfr_prec_t prec) {
    LogReal b(prec);
    int t = mpfr_const_log2(b.value_.get(), MPFR_RNDN);
    if (t != 0) b.bump_ulp();
    return b;
  }
  static LogReal neg_infinity(mpfr_prec_t prec) {
    LogReal b(prec);
    mpfr_set_inf(b.value_.get(), -1);
    return b;
  }

  const Real& value() const { return value_; }
  const Real& radius() const { return radius_; }
  mpfr_prec_t prec() const { return value_.prec(); }
  bool exact_zero() const { return value_.is_zero() && radius_.is_zero(); }

  double to_double() const { return value_.to_double(); }
  double radius_double() const { return mpfr_get_d(radius_.get(), MPFR_RNDU); }

  Real lower() const {
    Real r(value_.prec());
    mpfr_sub(r.get(), value_.get(), radius_.get(), MPFR_RNDD);
    return r;
  }
  Real upper() const {
    Real r(value_.prec());
    mpfr_add(r.get(), value_.get(), radius_.get(), MPFR_RNDU);
    return r;
  }

  LogReal& add(const LogReal& o) {
    int t = mpfr_add(value_.get(), value_.get(), o.value_.get(), MPFR_RNDN);
    mpfr_add(radius_.get(), radius_.get(), o.radius_.get(), MPFR_RNDU);
    if (t != 0) bump_ulp();
    return *this;
  }
  LogReal& sub(const LogReal& o) {
    int t = mpfr_sub(value_.get(), value_.get(), o.value_.get(), MPFR_RNDN);
    mpfr_add(radius_.get(), radius_.get(), o.radius_.get(), MPFR_RNDU);
    if (t != 0) bump_ulp();
    return *this;
  }
  LogReal& add_rational(const mpq_class& q) {
    int t = mpfr_add_q(value_.get(), value_.get(), q.get_mpq_t(), MPFR_RNDN);
    if (t != 0) bump_ulp();
    return *this;
  }
  LogReal& negate() {
    mpfr_neg(value_.get(), value_.get(), MPFR_RNDN);
    return *this;
  }
  LogReal& scale(long k) {
    int t = mpfr_mul_si(value_.get(), value_.get(), k, MPFR_RNDN);
    mpfr_mul_si(radius_.get(), radius_.get(), k < 0 ? -k : k, MPFR_RNDU);
    if (t != 0) bump_ulp();
    return *this;
  }

  // Sign of the enclosed value relative to zero.
  Cmp3 compare_zero() const {
    if (exact_zero()) return Cmp3::Equal;
    Real up = upper();
    if (up.sgn() < 0) return Cmp3::Less;
    Real lo = lower();
    if (lo.sgn() > 0) return Cmp3::Greater;
    return Cmp3::Ambiguous;
  }

 private:
  void bump_ulp() {
    if (!value_.is_finite() || value_.is_zero()) return;
    mpfr_exp_t e = mpfr_get_exp(value_.get());
    add_radius_2exp(e - value_.prec());
  }
  void add_radius_2exp(mpfr_exp_t e) {
    Real u(kRadiusPrec);
    mpfr_set_ui_2exp(u.get(), 1, e, MPFR_RNDU);
    mpfr_add(radius_.get(), radius_.get(), u.get(), MPFR_RNDU);
  }

  Real value_;
  Real radius_;
};

inline LogReal add(LogReal a, const LogReal& b) { return a.add(b); }
inline LogReal sub(LogReal a, const LogReal& b) { return a.sub(b); }
inline LogReal neg(LogReal a) { return a.negate(); }

// Compare two balls: Less/Greater when separated, Equal when both exact and
// bit-identical, Ambiguous otherwise.
inline Cmp3 compare(const LogReal& a, const LogReal& b) {
  LogReal d = sub(a, b);
  return d.compare_zero();
}

// ---------------------------------------------------------------------------
// Small exact-rational helpers on the circle R/Z
// ---------------------------------------------------------------------------

// Fractional part in [0, 1).
inline mpq_class frac_mod1(const mpq_class& x) {
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
  mpq_class r = x - mpq_class(fl);
  r.canonicalize();
  return r;
}

// Distance to the nearest integer, exactly.
inline mpq_class nearest_integer_distance(const mpq_class& y) {
  mpq_class f = frac_mod1(y);
  mpq_class g = 1 - f;
  return f <= g ? f : g;
}

// Circle distance between two points, exactly.
inline mpq_class circle_distance(const mpq_class& a, const mpq_class& b) {
  return nearest_integer_distance(a - b);
}

// ---------------------------------------------------------------------------
// AppendLog: append-only array, one writer, lock-free readers
// ---------------------------------------------------------------------------

template <typename T>
class AppendLog {
 public:
  static constexpr std::size_t kChunkShift = 12;
  static constexpr std::size_t kChunkSize = std::size_t{1} << kChunkShift;
  static constexpr std::size_t kMaxChunks = std::size_t{1} << 12;

  AppendLog() = default;
  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;
  ~AppendLog() {
    for (auto& c : chunks_) delete[] c.load(std::memory_order_relaxed);
  }

  std::size_t size() const { return size_.load(std::memory_order_acquire); }

  // Writer side only.
  void push_back(const T& v) {
    std::size_t i = size_.load(std::memory_order_relaxed);
    std::size_t ci = i >> kChunkShift;
    if (ci >= kMaxChunks) throw CapExceeded("append log full");
    T* chunk = chunks_[ci].load(std::memory_order_relaxed);
    if (chunk == nullptr) {
      chunk = new T[kChunkSize]();
      chunks_[ci].store(chunk, std::memory_order_release);
    }
    chunk[i & (kChunkSize - 1)] = v;
    size_.store(i + 1, std::memory_order_release);
  }

  // Valid for any index < a previously observed size().
  const T& operator[](std::size_t i) const {
    T* chunk = chunks_[i >> kChunkShift].load(std::memory_order_acquire);
    return chunk[i & (kChunkSize - 1)];
  }

 private:
  std::array<std::atomic<T*>, kMaxChunks> chunks_{};
  std::atomic<std::size_t> size_{0};
};

}  // namespace cantor
