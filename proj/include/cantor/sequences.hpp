#pragma once

// Base sequences Q = (q_n) and weight sequences alpha = (alpha_n): parsing of
// the spec grammar ("kind:payload"), term evaluation, and cumulative caches
// holding exact partial products Q_n (capped) together with rigorously
// error-bounded partial sums log Q_n and alpha(n).

#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cantor/expr.hpp"
#include "cantor/numeric.hpp"

namespace cantor {

enum class SeqTarget { Base, Weight };
enum class SpecKind { Constant, Periodic, EventuallyPeriodic, Expression, Table };

inline const char* to_string(SeqTarget t) {
  return t == SeqTarget::Base ? "base" : "weight";
}

class SequenceSpec {
 public:
  static SequenceSpec parse(std::string_view text, SeqTarget target,
                            mpfr_prec_t expr_prec = kExprPrec);

  SpecKind kind() const { return kind_; }
  SeqTarget target() const { return target_; }
  const std::string& text() const { return text_; }
  mpfr_prec_t expr_prec() const { return expr_prec_; }
  bool is_expression() const { return kind_ == SpecKind::Expression; }

  // Exact rational terms exist for every kind except expressions.
  bool has_rational_terms() const { return kind_ != SpecKind::Expression; }

  // Payload values for the finite kinds (const/periodic/eventually/table).
  const std::vector<mpq_class>& payload_values() const { return values_; }

  // q_n as an exact integer (base specs). Expression specs evaluate the AST
  // at the configured precision and floor; that floored value is the term.
  mpz_class term_integer(long n) const {
    require_index(n);
    if (target_ != SeqTarget::Base)
      throw DomainError("integer terms are only defined for base specs");
    if (kind_ == SpecKind::Expression) return eval_base_expr(n).to_integer();
    return mpz_class(rational_term(n).get_num());
  }

  // alpha_n as an exact rational (weight specs, non-expression kinds).
  mpq_class term_rational(long n) const {
    require_index(n);
    if (kind_ == SpecKind::Expression)
      throw DomainError("expression specs have no exact rational terms");
    return rational_term(n);
  }

  // Term as a high-precision real, valid for every kind.
  Real term_real(long n) const {
    require_index(n);
    if (kind_ == SpecKind::Expression) {
      if (target_ == SeqTarget::Base) return eval_base_expr(n);
      return eval_weight_expr(n);
    }
    return Real::of(rational_term(n), expr_prec_);
  }

 private:
  static void require_index(long n) {
    if (n < 1) throw DomainError("sequence index must be >= 1");
  }

  mpq_class rational_term(long n) const {
    switch (kind_) {
      case SpecKind::Constant:
        return values_[0];
      case SpecKind::Periodic:
        return values_[static_cast<std::size_t>((n - 1) % static_cast<long>(values_.size()))];
      case SpecKind::EventuallyPeriodic: {
        long pre = static_cast<long>(pre_len_);
        if (n <= pre) return values_[static_cast<std::size_t>(n - 1)];
        long m = static_cast<long>(values_.size()) - pre;
        return values_[static_cast<std::size_t>(pre + (n - 1 - pre) % m)];
      }
      case SpecKind::Table: {
        if (n > static_cast<long>(values_.size()))
          throw DomainError("table spec has no term " + std::to_string(n) +
                            " (table length " + std::to_string(values_.size()) + ")");
        return values_[static_cast<std::size_t>(n - 1)];
      }
      case SpecKind::Expression:
        break;
    }
    throw Error("unreachable spec kind");
  }

  Real eval_base_expr(long n) const {
    Real v = expr::evaluate(ast_, n, expr_prec_);
    if (!v.is_finite())
      throw DomainError("base expression not finite at n=" + std::to_string(n));
    Real f = floor(v);
    if (f.cmp(2) < 0)
      throw DomainError("base expression yields " + f.str(8) + " < 2 at n=" +
                        std::to_string(n));
    return f;
  }

  Real eval_weight_expr(long n) const {
    Real v = expr::evaluate(ast_, n, expr_prec_);
    if (!v.is_finite())
      throw DomainError("weight expression not finite at n=" + std::to_string(n));
    if (v.sgn() < 0)
      throw DomainError("weight expression yields " + v.str(8) + " < 0 at n=" +
                        std::to_string(n));
    return v;
  }

  SpecKind kind_{};
  SeqTarget target_{};
  std::string text_;
  mpfr_prec_t expr_prec_ = kExprPrec;
  std::vector<mpq_class> values_;  // const/periodic/eventually/table payload
  std::size_t pre_len_ = 0;        // eventually-periodic preperiod length
  expr::Ast ast_;                  // expression payload
};

namespace detail {

// Exact decimal-literal parsing: d fractional digits become denominator 10^d.
inline mpq_class parse_decimal(std::string_view s, std::size_t offset) {
  if (s.empty()) throw ParseError("empty number", offset);
  std::size_t i = 0;
  bool negative = false;
  if (s[i] == '-' || s[i] == '+') {
    negative = s[i] == '-';
    ++i;
  }
  std::string digits;
  long frac_digits = -1;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      if (frac_digits >= 0) ++frac_digits;
    } else if (c == '.' && frac_digits < 0) {
      frac_digits = 0;
    } else {
      throw ParseError(std::string("invalid character '") + c + "' in number",
                       offset + i);
    }
  }
  if (digits.empty()) throw ParseError("number has no digits", offset);
  mpz_class num(digits, 10);
  if (negative) num = -num;
  mpz_class den = 1;
  for (long k = 0; k < std::max(frac_digits, 0L); ++k) den *= 10;
  mpq_class q(num, den);
  q.canonicalize();
  return q;
}

inline std::vector<mpq_class> parse_number_list(std::string_view s, std::size_t offset) {
  std::vector<mpq_class> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.push_back(parse_decimal(s.substr(start, i - start), offset + start));
      start = i + 1;
    }
  }
  return out;
}

inline void validate_payload_value(const mpq_class& v, SeqTarget target) {
  if (target == SeqTarget::Base) {
    if (v.get_den() != 1)
      throw DomainError("base terms must be integers, got " + v.get_str());
    if (v < 2) throw DomainError("base terms must be >= 2, got " + v.get_str());
  } else {
    if (v < 0) throw DomainError("weight terms must be >= 0, got " + v.get_str());
  }
}

}  // namespace detail

inline SequenceSpec SequenceSpec::parse(std::string_view text, SeqTarget target,
                                        mpfr_prec_t expr_prec) {
  SequenceSpec spec;
  spec.target_ = target;
  spec.text_ = std::string(text);
  spec.expr_prec_ = expr_prec;

  std::size_t colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ParseError("expected 'kind:payload'", 0);
  std::string_view kind = text.substr(0, colon);
  std::string_view payload = text.substr(colon + 1);
  std::size_t poff = colon + 1;

  if (kind == "const") {
    spec.kind_ = SpecKind::Constant;
    spec.values_.push_back(detail::parse_decimal(payload, poff));
  } else if (kind == "periodic") {
    spec.kind_ = SpecKind::Periodic;
    spec.values_ = detail::parse_number_list(payload, poff);
  } else if (kind == "eventually") {
    spec.kind_ = SpecKind::EventuallyPeriodic;
    std::size_t bar = payload.find('|');
    if (bar == std::string_view::npos)
      throw ParseError("eventually payload needs 'preperiod|period'", poff);
    auto pre = detail::parse_number_list(payload.substr(0, bar), poff);
    auto per = detail::parse_number_list(payload.substr(bar + 1), poff + bar + 1);
    if (per.empty()) throw ParseError("empty period", poff + bar + 1);
    spec.pre_len_ = pre.size();
    spec.values_ = std::move(pre);
    spec.values_.insert(spec.values_.end(), per.begin(), per.end());
  } else if (kind == "expr") {
    spec.kind_ = SpecKind::Expression;
    spec.ast_ = expr::parse(payload, poff);
  } else if (kind == "table") {
    spec.kind_ = SpecKind::Table;
    std::ifstream in{std::string(payload)};
    if (!in) throw ParseError("cannot open table file '" + std::string(payload) + "'", poff);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      spec.values_.push_back(detail::parse_decimal(line, lineno));
    }
    if (spec.values_.empty())
      throw ParseError("table file '" + std::string(payload) + "' has no values", poff);
  } else {
    throw ParseError("unknown spec kind '" + std::string(kind) + "'", 0);
  }

  if (spec.kind_ == SpecKind::Expression) {
    // Probe the expression at small indices to surface domain violations early.
    for (long n = 1; n <= 16; ++n) spec.term_real(n);
  } else {
    for (const auto& v : spec.values_) detail::validate_payload_value(v, target);
  }
  return spec;
}

// ---------------------------------------------------------------------------
// CumulativeCache
// ---------------------------------------------------------------------------

// Append-only cache of partial sums (log Q_n for base specs, alpha(n) for
// weight specs) and, for base specs, exact partial products Q_n up to a bit
// cap. A single writer extends the cache; the double-precision snapshot path
// is lock-free for concurrent readers. LogReal reconstruction replays the
// accumulation from the nearest checkpoint and is bit-for-bit reproducible.
class CumulativeCache {
 public:
  explicit CumulativeCache(SequenceSpec spec, mpfr_prec_t prec = kDefaultPrec,
                           long cap_bits = kDefaultCapBits)
      : spec_(std::move(spec)), prec_(prec), cap_bits_(cap_bits), acc_(prec) {
    exact_ok_ = spec_.target() == SeqTarget::Weight && spec_.has_rational_terms();
  }

  CumulativeCache(const CumulativeCache&) = delete;
  CumulativeCache& operator=(const CumulativeCache&) = delete;

  const SequenceSpec& spec() const { return spec_; }
  mpfr_prec_t precision() const { return prec_; }
  long cap_bits() const { return cap_bits_; }
  bool has_exact_sums() const { return exact_ok_; }
  long committed() const { return static_cast<long>(sums_d_.size()); }

  void ensure(long n) {
    if (committed() >= n) return;
    std::lock_guard lock(writer_);
    ensure_locked(n);
  }

  // log Q_n (base) or alpha(n) (weight) as a double snapshot; n = 0 gives 0.
  double log_sum_d(long n) {
    if (n == 0) return 0.0;
    ensure(n);
    return sums_d_[static_cast<std::size_t>(n - 1)];
  }

  // Upper bound on the accumulated rounding radius of log_sum_d(n).
  double radius_bound_d(long n) {
    if (n == 0) return 0.0;
    ensure(n);
    std::size_t chunk = static_cast<std::size_t>(n - 1) >> kStrideShift;
    if (chunk < chunk_radius_.size()) return chunk_radius_[chunk];
    return final_radius_d_.load(std::memory_order_relaxed);
  }

  // Full-precision ball; replays the accumulation from the nearest checkpoint.
  LogReal log_sum(long n) {
    if (n == 0) return LogReal(prec_);
    std::lock_guard lock(writer_);
    ensure_locked(n);
    long c = n >> kStrideShift;  // checkpoints_[c-1] covers c*stride terms
    LogReal acc = c >= 1 ? checkpoints_[static_cast<std::size_t>(c - 1)] : LogReal(prec_);
    for (long i = (c << kStrideShift) + 1; i <= n; ++i) acc.add(term_ball(i));
    return acc;
  }

  // Exact alpha(n) for weight specs with rational terms.
  mpq_class exact_sum(long n) {
    if (!exact_ok_) throw DomainError("cache has no exact rational sums");
    if (n == 0) return mpq_class(0);
    std::lock_guard lock(writer_);
    ensure_locked(n);
    long c = n >> kStrideShift;
    mpq_class acc = c >= 1 ? exact_checkpoints_[static_cast<std::size_t>(c - 1)] : mpq_class(0);
    for (long i = (c << kStrideShift) + 1; i <= n; ++i) acc += spec_.term_rational(i);
    return acc;
  }

  // Exact Q_n; absent (CapExceeded) beyond the bit cap. n = 0 gives 1.
  mpz_class product(long n) {
    if (spec_.target() != SeqTarget::Base)
      throw DomainError("partial products are only defined for base specs");
    if (n == 0) return mpz_class(1);
    std::lock_guard lock(writer_);
    ensure_locked(n);
    double est_bits = sums_d_[static_cast<std::size_t>(n - 1)] / M_LN2;
    if (est_bits > static_cast<double>(cap_bits_) + 2)
      throw CapExceeded("Q_" + std::to_string(n) + " needs ~" +
                        std::to_string(static_cast<long>(est_bits)) +
                        " bits, cap is " + std::to_string(cap_bits_));
    auto it = products_.upper_bound(n);
    long start = 0;
    mpz_class q(1);
    if (it != products_.begin()) {
      --it;
      start = it->first;
      q = it->second;
    }
    for (long i = start + 1; i <= n; ++i) {
      q *= spec_.term_integer(i);
      if (static_cast<long>(mpz_sizeinbase(q.get_mpz_t(), 2)) > cap_bits_)
        throw CapExceeded("Q_" + std::to_string(i) + " exceeds cap of " +
                          std::to_string(cap_bits_) + " bits");
    }
    products_.emplace(n, q);
    return q;
  }

  Real term_value(long n) const { return spec_.term_real(n); }
  mpz_class term_integer(long n) const { return spec_.term_integer(n); }

 private:
  static constexpr long kStrideShift = 12;  // checkpoint every 4096 terms

  void ensure_locked(long n) {
    for (long i = committed() + 1; i <= n; ++i) {
      acc_.add(term_ball(i));
      if (exact_ok_) exact_acc_ += spec_.term_rational(i);
      final_radius_d_.store(acc_.radius_double(), std::memory_order_relaxed);
      sums_d_.push_back(acc_.to_double());
      if ((i & ((1L << kStrideShift) - 1)) == 0) {
        checkpoints_.push_back(acc_);
        chunk_radius_.push_back(acc_.radius_double());
        if (exact_ok_) exact_checkpoints_.push_back(exact_acc_);
      }
    }
  }

  LogReal term_ball(long i) const {
    if (spec_.target() == SeqTarget::Base) {
      if (spec_.is_expression())
        return LogReal::log_of_exact_real(spec_.term_real(i), prec_);
      return LogReal::log_of_rational(mpq_class(spec_.term_integer(i)), prec_);
    }
    if (spec_.has_rational_terms())
      return LogReal::exact_rational(spec_.term_rational(i), prec_);
    return LogReal::round_real(spec_.term_real(i), prec_);
  }

  SequenceSpec spec_;
  mpfr_prec_t prec_;
  long cap_bits_;
  bool exact_ok_ = false;

  std::mutex writer_;
  AppendLog<double> sums_d_;
  AppendLog<double> chunk_radius_;
  std::atomic<double> final_radius_d_{0.0};
  LogReal acc_;
  mpq_class exact_acc_{0};
  std::deque<LogReal> checkpoints_;
  std::deque<mpq_class> exact_checkpoints_;
  std::map<long, mpz_class> products_;
};

// Named per the exposed operations.
inline LogReal log_partial_product(CumulativeCache& cache, long n) {
  if (cache.spec().target() != SeqTarget::Base)
    throw DomainError("log_partial_product needs a base cache");
  return cache.log_sum(n);
}
inline mpz_class partial_product(CumulativeCache& cache, long n) {
  return cache.product(n);
}
inline LogReal alpha_partial_sum(CumulativeCache& cache, long n) {
  if (cache.spec().target() != SeqTarget::Weight)
    throw DomainError("alpha_partial_sum needs a weight cache");
  return cache.log_sum(n);
}

}  // namespace cantor
