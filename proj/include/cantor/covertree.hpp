#pragma once

// Desk-scale materialization of the mass-distribution construction behind the
// dimension lower bound: level schedules (n_l), the nested families S_l/R_l,
// the counting inequality, the recursive mass, cylinder-measure and Frostman
// ball checks, plus the Hausdorff sum identity used by the upper bound.
//
// Geometry is exact: nodes are circle balls with rational centers j/Q_{n_l}
// and radius e^{-alpha(n_l)}/Q_{n_l}. A ball Gamma is contained in a ball
// Delta iff the rational circle distance of their centers is at most the
// difference of the radii, so every containment decision reduces to comparing
// an exact rational against a radius difference enclosed in a directed
// interval. Radii are rational only when alpha(n) = 0 exactly; otherwise they
// are transcendental and the comparisons resolve at finite precision.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cantor/dimension.hpp"
#include "cantor/sequences.hpp"

namespace cantor {

// ---------------------------------------------------------------------------
// Radius representation and interval comparisons
// ---------------------------------------------------------------------------

struct RealInterval {
  Real lo, hi;
};

struct RadiusRep {
  LogReal log_ball;               // log of the radius, always present
  std::optional<mpq_class> exact; // the radius itself, when alpha(n) = 0

  RealInterval interval(mpfr_prec_t p) const {
    RealInterval out{Real(p), Real(p)};
    if (exact) {
      mpfr_set_q(out.lo.get(), exact->get_mpq_t(), MPFR_RNDD);
      mpfr_set_q(out.hi.get(), exact->get_mpq_t(), MPFR_RNDU);
      return out;
    }
    mpfr_exp(out.lo.get(), log_ball.lower().get(), MPFR_RNDD);
    mpfr_exp(out.hi.get(), log_ball.upper().get(), MPFR_RNDU);
    return out;
  }
};

namespace detail {

inline constexpr mpfr_prec_t kEscalationLimit = 2048;

// dist <= rho_parent - rho_child ?
inline bool ball_contained(const mpq_class& dist, const RadiusRep& parent,
                           const RadiusRep& child) {
  if (parent.exact && child.exact) return dist <= *parent.exact - *child.exact;
  for (mpfr_prec_t p = kDefaultPrec; p <= kEscalationLimit; p *= 2) {
    RealInterval pi = parent.interval(p);
    RealInterval ci = child.interval(p);
    Real diff_lo(p), diff_hi(p);
    mpfr_sub(diff_lo.get(), pi.lo.get(), ci.hi.get(), MPFR_RNDD);
    mpfr_sub(diff_hi.get(), pi.hi.get(), ci.lo.get(), MPFR_RNDU);
    if (mpfr_cmp_q(diff_lo.get(), dist.get_mpq_t()) >= 0) return true;
    if (mpfr_cmp_q(diff_hi.get(), dist.get_mpq_t()) < 0) return false;
  }
  throw PrecisionExhausted("containment undecided at maximum precision");
}

// dist <= r + rho ? (ball of radius rho around a node center meets B(x, r))
inline bool ball_intersects(const mpq_class& dist, const mpq_class& r,
                            const RadiusRep& rho) {
  if (dist <= r) return true;
  if (rho.exact) return dist <= r + *rho.exact;
  mpq_class excess = dist - r;
  for (mpfr_prec_t p = kDefaultPrec; p <= kEscalationLimit; p *= 2) {
    RealInterval i = rho.interval(p);
    if (mpfr_cmp_q(i.lo.get(), excess.get_mpq_t()) >= 0) return true;
    if (mpfr_cmp_q(i.hi.get(), excess.get_mpq_t()) < 0) return false;
  }
  throw PrecisionExhausted("intersection undecided at maximum precision");
}

// rho >= r ?
inline bool radius_at_least(const RadiusRep& rho, const mpq_class& r) {
  if (rho.exact) return *rho.exact >= r;
  for (mpfr_prec_t p = kDefaultPrec; p <= kEscalationLimit; p *= 2) {
    RealInterval i = rho.interval(p);
    if (mpfr_cmp_q(i.lo.get(), r.get_mpq_t()) >= 0) return true;
    if (mpfr_cmp_q(i.hi.get(), r.get_mpq_t()) < 0) return false;
  }
  throw PrecisionExhausted("radius comparison undecided at maximum precision");
}

// sign of log(q) - ball, for exact rational q > 0.
inline Cmp3 cmp_log_rational_vs_ball(const mpq_class& q, const LogReal& ball) {
  for (mpfr_prec_t p = kDefaultPrec; p <= kEscalationLimit; p *= 2) {
    LogReal lhs = LogReal::log_of_rational(q, p);
    lhs.sub(ball);
    Cmp3 c = lhs.compare_zero();
    if (c != Cmp3::Ambiguous) return c;
  }
  return Cmp3::Ambiguous;
}

// Outer dyadic upper bound of a radius at default precision.
inline mpq_class radius_upper_dyadic(const RadiusRep& rho) {
  if (rho.exact) return *rho.exact;
  RealInterval i = rho.interval(kDefaultPrec);
  mpq_class out;
  mpfr_get_q(out.get_mpq_t(), i.hi.get());
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Level schedules
// ---------------------------------------------------------------------------

struct ScheduleCheck {
  long level = 0;  // l, 1-based
  long n = 0;      // n_l
  std::string constraint;
  double lhs = 0, rhs = 0;
  bool satisfied = false;
};

struct LevelSchedule {
  double s = 0;
  double pressure_hat = 0;          // windowed pressure at s
  std::vector<long> levels;         // n_1 < n_2 < ... < n_L
  double log_c = 0;                 // Frostman constant (log); given or minimal
  bool c_given = false;
  double strong_count_margin = 4.0;
  std::vector<ScheduleCheck> witnesses;
  std::vector<std::pair<long, std::string>> rejected;  // sampled rejections
};

struct ChooseLevelsOptions {
  std::optional<double> log_c;      // enforce the Frostman-sum constraint with this C
  double strong_count_margin = 4.0; // require (Q_{n_{l+1}}/Q_{n_l}) e^{-alpha(n_l)} >= margin
  long pressure_n_hi = 10000;
  double window_fraction = 0.5;
  std::size_t max_rejected_records = 24;
};

namespace detail {

// alpha(n) > log 2, decided through balls (exact rational alpha never ties).
inline bool alpha_exceeds_log2(CumulativeCache& a_cache, long n) {
  for (mpfr_prec_t p = kDefaultPrec; p <= kEscalationLimit; p *= 2) {
    LogReal d = a_cache.has_exact_sums()
                    ? LogReal::exact_rational(a_cache.exact_sum(n), p)
                    : a_cache.log_sum(n);
    d.sub(LogReal::log2_const(p));
    Cmp3 c = d.compare_zero();
    if (c == Cmp3::Greater) return true;
    if (c == Cmp3::Less || c == Cmp3::Equal) return false;
    if (!a_cache.has_exact_sums()) return false;  // ball width is fixed; stay conservative
  }
  return false;
}

}  // namespace detail

// Greedily picks each n_l as the smallest integer <= n_cap satisfying the
// schedule constraints (direct constraint scan):
//   (1) alpha(n_1) > log 2,
//   (2) (1-s) log Q_{n_l} - s alpha(n_l) >= (1/2) P(s) n_l for every l,
//   (3) (1/2) P(s) n_l >= (l+1) log 2 + sum_{i<l} alpha(n_i) - log C  (l >= 2),
//   (4) (Q_{n_l}/Q_{n_{l-1}}) e^{-alpha(n_{l-1})} >= strong_count_margin (l >= 2),
// where (4) is the growth margin that makes the counting inequality's (1/2)
// form and a nonempty mass recursion possible. When C is not supplied, the
// levels are chosen under (1), (2), (4) and C is then set to the smallest
// constant satisfying (3), which exists for any finite schedule.
inline LevelSchedule choose_levels(CumulativeCache& q_cache, CumulativeCache& a_cache,
                                   double s, int level_count, long n_cap,
                                   const ChooseLevelsOptions& opts = {}) {
  if (level_count < 1) throw DomainError("level count must be >= 1");
  if (!(s >= 0.0 && s < 1.0)) throw DomainError("s must lie in [0, 1)");
  TailWindow w(q_cache, a_cache, opts.pressure_n_hi, opts.window_fraction);
  double p_hat = w.max_f(s);
  if (!(p_hat > 0))
    throw std::invalid_argument(
        "s = " + std::to_string(s) +
        " is not below the dimension estimate (windowed pressure <= 0)");

  q_cache.ensure(n_cap);
  a_cache.ensure(n_cap);

  LevelSchedule sched;
  sched.s = s;
  sched.pressure_hat = p_hat;
  sched.strong_count_margin = opts.strong_count_margin;
  sched.c_given = opts.log_c.has_value();
  sched.log_c = opts.log_c.value_or(0.0);

  const double ln2 = M_LN2;
  double alpha_sum_prev = 0;  // sum_{i<l} alpha(n_i)

  for (int l = 1; l <= level_count; ++l) {
    long start = l == 1 ? 1 : sched.levels.back() + 1;
    std::optional<long> chosen;
    for (long n = start; n <= n_cap; ++n) {
      std::string failed;
      if (l == 1 && !detail::alpha_exceeds_log2(a_cache, n)) {
        failed = "alpha(n_1) > log 2";
      } else {
        double u = q_cache.log_sum_d(n);
        double an = a_cache.log_sum_d(n);
        if (!((1.0 - s) * u - s * an >= 0.5 * p_hat * static_cast<double>(n))) {
          failed = "pressure growth";
        } else if (l >= 2) {
          long n_prev = sched.levels.back();
          double growth = u - q_cache.log_sum_d(n_prev) - a_cache.log_sum_d(n_prev);
          if (!(growth >= std::log(opts.strong_count_margin))) {
            failed = "strong count margin";
          } else if (opts.log_c &&
                     !(0.5 * p_hat * static_cast<double>(n) >=
                       (l + 1) * ln2 + alpha_sum_prev - *opts.log_c)) {
            failed = "frostman sum";
          }
        }
      }
      if (failed.empty()) {
        chosen = n;
        break;
      }
      if (sched.rejected.size() < opts.max_rejected_records)
        sched.rejected.emplace_back(n, failed);
    }
    if (!chosen)
      throw ScheduleInfeasible(
          "no admissible n_" + std::to_string(l) + " <= " + std::to_string(n_cap),
          l == 1 ? "alpha(n_1) > log 2" : "growth constraints");
    sched.levels.push_back(*chosen);
    alpha_sum_prev += a_cache.log_sum_d(*chosen);
  }

  // Minimal Frostman constant for this schedule when none was imposed.
  if (!opts.log_c) {
    double need = 0;
    double acc = 0;
    for (std::size_t l = 1; l <= sched.levels.size(); ++l) {
      if (l >= 2)
        need = std::max(need, (static_cast<double>(l) + 1) * ln2 + acc -
                                  0.5 * p_hat * static_cast<double>(sched.levels[l - 1]));
      acc += a_cache.log_sum_d(sched.levels[l - 1]);
    }
    sched.log_c = need;
  }

  // Witness rows: every invariant, re-evaluated against the final schedule.
  double acc = 0;
  for (std::size_t l = 1; l <= sched.levels.size(); ++l) {
    long n = sched.levels[l - 1];
    double u = q_cache.log_sum_d(n);
    double an = a_cache.log_sum_d(n);
    if (l == 1) {
      sched.witnesses.push_back({1, n, "alpha(n_1) > log 2", an, ln2, an > ln2});
    }
    double lhs = (1.0 - s) * u - s * an;
    double rhs = 0.5 * p_hat * static_cast<double>(n);
    sched.witnesses.push_back({static_cast<long>(l), n, "pressure growth", lhs, rhs, lhs >= rhs});
    if (l >= 2) {
      double f_lhs = rhs;
      double f_rhs = (static_cast<double>(l) + 1) * ln2 + acc - sched.log_c;
      // the minimal C makes this an equality at the binding level; allow for
      // the double rounding of the round trip
      bool sat = f_lhs >= f_rhs - 1e-9 * std::max(1.0, std::abs(f_rhs));
      sched.witnesses.push_back(
          {static_cast<long>(l), n, "frostman sum", f_lhs, f_rhs, sat});
      long n_prev = sched.levels[l - 2];
      double growth = u - q_cache.log_sum_d(n_prev) - a_cache.log_sum_d(n_prev);
      sched.witnesses.push_back({static_cast<long>(l), n, "strong count margin", growth,
                                 std::log(opts.strong_count_margin),
                                 growth >= std::log(opts.strong_count_margin)});
    }
    acc += an;
  }
  return sched;
}

// ---------------------------------------------------------------------------
// Cover tree
// ---------------------------------------------------------------------------

struct CoverNode {
  mpz_class index;      // center j, node is the ball around j/Q_{n_l}
  mpq_class center;     // j/Q_{n_l} in [0,1)
  mpq_class mass;       // m_l(node), exact
  long parent = -1;     // index into the previous level's node list
  long child_count = 0;
};

struct CoverLevel {
  long n = 0;           // n_l
  mpz_class qn;         // exact Q_{n_l}
  LogReal log_qn;
  LogReal alpha;        // alpha(n_l)
  RadiusRep radius;     // e^{-alpha(n_l)}/Q_{n_l}
  std::vector<CoverNode> nodes;  // sorted by index
};

class CoverTree {
 public:
  LevelSchedule schedule;
  std::vector<CoverLevel> levels;
  std::string q_text, alpha_text;

  std::size_t node_count() const {
    std::size_t c = 0;
    for (const auto& l : levels) c += l.nodes.size();
    return c;
  }
};

namespace detail {

inline RadiusRep make_radius(CumulativeCache& q_cache, CumulativeCache& a_cache, long n,
                             const LogReal& log_qn, const LogReal& alpha_n) {
  RadiusRep rep;
  rep.log_ball = alpha_n;
  rep.log_ball.add(log_qn);
  rep.log_ball.negate();
  if (a_cache.has_exact_sums() && a_cache.exact_sum(n) == 0) {
    mpq_class r(1, q_cache.product(n));
    r.canonicalize();
    rep.exact = r;
  }
  return rep;
}

}  // namespace detail

// Materializes R_1 = S_1 and then R_{l+1} = {elements of S_{l+1} contained in
// some interval of R_l}, with the recursive mass m_{l+1} = m_l / child_count.
inline CoverTree build_cover(CumulativeCache& q_cache, CumulativeCache& a_cache,
                             const LevelSchedule& schedule,
                             long enumeration_cap = 10000000) {
  if (schedule.levels.empty()) throw DomainError("schedule has no levels");
  CoverTree tree;
  tree.schedule = schedule;
  tree.q_text = q_cache.spec().text();
  tree.alpha_text = a_cache.spec().text();

  for (long n : schedule.levels) {
    CoverLevel lvl;
    lvl.n = n;
    lvl.qn = q_cache.product(n);
    lvl.log_qn = q_cache.log_sum(n);
    lvl.alpha = a_cache.log_sum(n);
    lvl.radius = detail::make_radius(q_cache, a_cache, n, lvl.log_qn, lvl.alpha);
    tree.levels.push_back(std::move(lvl));
  }

  // Level 1: the full grid, uniform mass.
  {
    CoverLevel& l0 = tree.levels.front();
    if (l0.qn > enumeration_cap)
      throw CapExceeded("level 1 has " + l0.qn.get_str() +
                        " intervals, enumeration cap is " + std::to_string(enumeration_cap));
    long count = static_cast<long>(l0.qn.get_si());
    l0.nodes.reserve(static_cast<std::size_t>(count));
    mpq_class mass(1, l0.qn);
    mass.canonicalize();
    for (long j = 0; j < count; ++j) {
      CoverNode node;
      node.index = j;
      node.center = mpq_class(j, l0.qn);
      node.center.canonicalize();
      node.mass = mass;
      l0.nodes.push_back(std::move(node));
    }
  }

  long enumerated = static_cast<long>(tree.levels.front().nodes.size());
  for (std::size_t l = 1; l < tree.levels.size(); ++l) {
    CoverLevel& parent_lvl = tree.levels[l - 1];
    CoverLevel& child_lvl = tree.levels[l];
    mpq_class delta_hi =
        detail::radius_upper_dyadic(parent_lvl.radius);  // window half-width bound
    for (std::size_t pi = 0; pi < parent_lvl.nodes.size(); ++pi) {
      CoverNode& parent = parent_lvl.nodes[pi];
      // Candidate centers j/Q with |j/Q - c| <= delta (superset window).
      mpq_class a = (parent.center - delta_hi) * child_lvl.qn;
      mpq_class b = (parent.center + delta_hi) * child_lvl.qn;
      mpz_class j_lo, j_hi;
      mpz_cdiv_q(j_lo.get_mpz_t(), a.get_num().get_mpz_t(), a.get_den().get_mpz_t());
      mpz_fdiv_q(j_hi.get_mpz_t(), b.get_num().get_mpz_t(), b.get_den().get_mpz_t());
      for (mpz_class j = j_lo; j <= j_hi; ++j) {
        if (++enumerated > enumeration_cap)
          throw CapExceeded("cover enumeration exceeds cap of " +
                            std::to_string(enumeration_cap));
        mpz_class jq = j % child_lvl.qn;
        if (jq < 0) jq += child_lvl.qn;
        mpq_class center(jq, child_lvl.qn);
        center.canonicalize();
        mpq_class dist = circle_distance(center, parent.center);
        if (!detail::ball_contained(dist, parent_lvl.radius, child_lvl.radius)) continue;
        CoverNode node;
        node.index = jq;
        node.center = std::move(center);
        node.parent = static_cast<long>(pi);
        ++parent.child_count;
        child_lvl.nodes.push_back(std::move(node));
      }
      if (parent.child_count == 0)
        throw ScheduleInfeasible(
            "level " + std::to_string(l + 1) + " leaves a level-" + std::to_string(l) +
                " node without children; the mass recursion cannot continue",
            "strong count margin");
    }
    for (CoverNode& node : child_lvl.nodes) {
      const CoverNode& parent = parent_lvl.nodes[static_cast<std::size_t>(node.parent)];
      node.mass = parent.mass / parent.child_count;
    }
    std::sort(child_lvl.nodes.begin(), child_lvl.nodes.end(),
              [](const CoverNode& x, const CoverNode& y) { return x.index < y.index; });
  }
  return tree;
}

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

struct CountingLevelStats {
  long level = 0;  // l: parents at level l, children at level l+1
  long n = 0, n_next = 0;
  long min_count = 0, max_count = 0;
  double expected = 0;  // (Q_{n_{l+1}}/Q_{n_l}) e^{-alpha(n_l)}
};

struct CountingReport {
  bool weak_ok = true;
  bool strong_ok = true;
  long weak_violations = 0;
  long strong_violations = 0;
  long ambiguous = 0;
  std::vector<CountingLevelStats> per_level;
};

// Per node: count >= (Q_{n_{l+1}}/Q_{n_l}) e^{-alpha(n_l)} - 2 (weak; it is
// unconditional geometry) and count >= (1/2) of the same quantity (strong;
// needs the growth margin).
inline CountingReport counting_inequality_check(const CoverTree& tree) {
  CountingReport rep;
  for (std::size_t l = 0; l + 1 < tree.levels.size(); ++l) {
    const CoverLevel& pl = tree.levels[l];
    const CoverLevel& cl = tree.levels[l + 1];
    LogReal log_e = cl.log_qn;  // log E = log Q_{l+1} - log Q_l - alpha(n_l)
    log_e.sub(pl.log_qn);
    log_e.sub(pl.alpha);
    bool rational_e = pl.alpha.exact_zero();
    mpq_class e_exact;
    if (rational_e) {
      e_exact = mpq_class(cl.qn, pl.qn);
      e_exact.canonicalize();
    }
    CountingLevelStats stats;
    stats.level = static_cast<long>(l + 1);
    stats.n = pl.n;
    stats.n_next = cl.n;
    stats.min_count = std::numeric_limits<long>::max();
    stats.max_count = 0;
    stats.expected = std::exp(log_e.to_double());
    for (const CoverNode& node : pl.nodes) {
      long count = node.child_count;
      stats.min_count = std::min(stats.min_count, count);
      stats.max_count = std::max(stats.max_count, count);
      bool weak, strong;
      if (rational_e) {
        weak = mpq_class(count + 2) >= e_exact;
        strong = mpq_class(2 * count) >= e_exact;
      } else {
        Cmp3 cw = detail::cmp_log_rational_vs_ball(mpq_class(count + 2), log_e);
        Cmp3 cs = detail::cmp_log_rational_vs_ball(mpq_class(2 * count), log_e);
        if (cw == Cmp3::Ambiguous || cs == Cmp3::Ambiguous) {
          ++rep.ambiguous;
          continue;
        }
        weak = cw != Cmp3::Less;
        strong = cs != Cmp3::Less;
      }
      if (!weak) {
        rep.weak_ok = false;
        ++rep.weak_violations;
      }
      if (!strong) {
        rep.strong_ok = false;
        ++rep.strong_violations;
      }
    }
    rep.per_level.push_back(stats);
  }
  return rep;
}

struct CylinderReport {
  bool skipped = false;      // strong counting bound failed; check not run
  std::string skip_reason;
  bool ok = true;
  long violations = 0;
  long ambiguous = 0;
  double worst_ratio = 0;    // max over nodes of mass / bound (double diagnostic)
};

// m(node at level l) <= 2^{l-1} exp(alpha(n_1)+...+alpha(n_{l-1})) / Q_{n_l}.
inline CylinderReport cylinder_estimate_check(const CoverTree& tree) {
  CylinderReport rep;
  CountingReport counting = counting_inequality_check(tree);
  if (!counting.strong_ok) {
    rep.skipped = true;
    rep.skip_reason = "strong counting bound fails at some node";
    return rep;
  }
  LogReal alpha_acc(tree.levels.front().alpha.prec());  // sum_{i<l} alpha(n_i)
  bool alpha_acc_zero = true;
  for (std::size_t l = 0; l < tree.levels.size(); ++l) {
    const CoverLevel& lvl = tree.levels[l];
    // log bound = (l-1) log 2 + sum_{i<l} alpha(n_i) - log Q_{n_l}
    LogReal log_bound = LogReal::log2_const(kDefaultPrec);
    log_bound.scale(static_cast<long>(l));  // l here is (level-1)
    log_bound.add(alpha_acc);
    log_bound.sub(lvl.log_qn);
    bool rational_bound = alpha_acc_zero;
    mpq_class bound_exact;
    if (rational_bound) {
      mpz_class two_l(1);
      two_l <<= l;
      bound_exact = mpq_class(two_l, lvl.qn);
      bound_exact.canonicalize();
    }
    for (const CoverNode& node : lvl.nodes) {
      bool ok;
      if (rational_bound) {
        ok = node.mass <= bound_exact;
      } else {
        Cmp3 c = detail::cmp_log_rational_vs_ball(node.mass, log_bound);
        if (c == Cmp3::Ambiguous) {
          ++rep.ambiguous;
          continue;
        }
        ok = c != Cmp3::Greater;
      }
      if (!ok) {
        rep.ok = false;
        ++rep.violations;
      }
      double ratio = std::exp(std::log(node.mass.get_d()) - log_bound.to_double());
      rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    }
    if (!lvl.alpha.exact_zero()) alpha_acc_zero = false;
    alpha_acc.add(lvl.alpha);
  }
  return rep;
}

struct FrostmanSample {
  double x = 0;
  double r = 0;
  long condition_level = 0;  // l from the radius condition
  double mass = 0;           // m(B(x, r)) by summing intersected node masses
  double stat = 0;           // mass / r^s
  bool sound = false;        // r Q_{n_{l+1}} >= 2, the covering-count premise
};

struct FrostmanReport {
  double s = 0;
  double c_observed = 0;   // max stat over samples meeting the covering premise
  double c_unsound = 0;    // max stat over the remaining samples
  long sound_count = 0;
  long unsound_count = 0;
  FrostmanSample worst_sound;
  FrostmanSample worst_unsound;
};

struct BallMass {
  mpq_class mass;                  // sum of masses of intersected cover nodes
  long condition_level = 0;        // largest l with rad_l >= r (0 if none)
  std::size_t cover_index = 0;     // 0-based index of the level used (l+1)
  bool sound = false;              // r Q_{n_{l+1}} >= 2, the covering premise
};

// m(B(x, r)) at the level the ball estimate prescribes: the cover is taken at
// level l+1 where l is the largest level with radius >= r.
inline BallMass cover_ball_mass(const CoverTree& tree, const mpq_class& x,
                                const mpq_class& r) {
  if (tree.levels.empty()) throw DomainError("empty tree");
  if (r <= 0) throw DomainError("ball radius must be > 0");
  BallMass out;
  for (std::size_t l = 0; l < tree.levels.size(); ++l) {
    if (detail::radius_at_least(tree.levels[l].radius, r))
      out.condition_level = static_cast<long>(l + 1);
    else
      break;
  }
  out.cover_index = std::min(static_cast<std::size_t>(out.condition_level),
                             tree.levels.size() - 1);
  const CoverLevel& cl = tree.levels[out.cover_index];
  out.sound = r * cl.qn >= 2;
  mpq_class reach = r + detail::radius_upper_dyadic(cl.radius);
  if (reach >= mpq_class(1, 2)) {
    for (const CoverNode& node : cl.nodes) out.mass += node.mass;
    return out;
  }
  // candidate index window around x
  mpq_class a = (x - reach) * cl.qn;
  mpq_class b = (x + reach) * cl.qn;
  mpz_class j_lo, j_hi;
  mpz_cdiv_q(j_lo.get_mpz_t(), a.get_num().get_mpz_t(), a.get_den().get_mpz_t());
  mpz_fdiv_q(j_hi.get_mpz_t(), b.get_num().get_mpz_t(), b.get_den().get_mpz_t());
  for (mpz_class j = j_lo; j <= j_hi; ++j) {
    mpz_class jq = j % cl.qn;
    if (jq < 0) jq += cl.qn;
    auto it = std::lower_bound(
        cl.nodes.begin(), cl.nodes.end(), jq,
        [](const CoverNode& node, const mpz_class& v) { return node.index < v; });
    if (it == cl.nodes.end() || it->index != jq) continue;
    mpq_class dist = circle_distance(it->center, x);
    if (detail::ball_intersects(dist, r, cl.radius)) out.mass += it->mass;
  }
  return out;
}

// Samples x from deepest-level node centers and radii on a fixed log grid
// anchored at the coarse end of (rad_L, rad_1); for each pair, the ball mass
// is computed by cover_ball_mass. Radii with r Q_{n_{l+1}} < 2 violate the
// covering-count premise of the ball estimate (the "+2" cover term is not
// absorbed), so they are tracked separately from c_observed.
inline FrostmanReport frostman_check(const CoverTree& tree, double s,
                                     int sample_count = 64, int radii_cap = 512) {
  if (tree.levels.empty()) throw DomainError("empty tree");
  FrostmanReport rep;
  rep.s = s;
  const CoverLevel& deepest = tree.levels.back();
  double log_r_top = tree.levels.front().radius.log_ball.to_double();
  double log_r_bot = deepest.radius.log_ball.to_double();

  std::vector<mpq_class> radii;
  const double step = 0.125;
  // The odd prime factor keeps sampled radii off the dyadic boundaries that
  // arise when e^{-alpha(n)} happens to be rational (e.g. alpha_n = log 2),
  // where the interval comparisons could never separate.
  const mpq_class tie_guard(262147, 262144);
  for (int k = 0; k < radii_cap; ++k) {
    double lr = log_r_top - (static_cast<double>(k) + 0.5) * step;
    if (lr <= log_r_bot) break;
    radii.push_back(mpq_class(std::exp(lr)) * tie_guard);
  }

  std::size_t stride = std::max<std::size_t>(
      1, deepest.nodes.size() / static_cast<std::size_t>(sample_count));
  for (std::size_t xi = 0; xi < deepest.nodes.size(); xi += stride) {
    const mpq_class& x = deepest.nodes[xi].center;
    for (const mpq_class& r : radii) {
      BallMass bm = cover_ball_mass(tree, x, r);
      FrostmanSample sample;
      sample.x = x.get_d();
      sample.r = r.get_d();
      sample.condition_level = bm.condition_level;
      sample.mass = bm.mass.get_d();
      sample.stat = sample.mass > 0
                        ? std::exp(std::log(sample.mass) - s * std::log(sample.r))
                        : 0.0;
      sample.sound = bm.sound;
      if (sample.sound) {
        ++rep.sound_count;
        if (sample.stat > rep.c_observed) {
          rep.c_observed = sample.stat;
          rep.worst_sound = sample;
        }
      } else {
        ++rep.unsound_count;
        if (sample.stat > rep.c_unsound) {
          rep.c_unsound = sample.stat;
          rep.worst_unsound = sample;
        }
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Hausdorff sum identity and the upper-bound series
// ---------------------------------------------------------------------------

struct HausdorffSum {
  Real direct;       // sum over j of |target interval|^t, literal summation
  Real closed_form;  // 2^t Q_n^{1-t} e^{-t alpha(n)}
};

// Both routes are evaluated at (prec + 64) working precision so the agreement
// tolerance 2^-(prec - 8) is dominated by the routes' algebra, not by the
// summation length.
inline HausdorffSum hausdorff_sum(CumulativeCache& q_cache, CumulativeCache& a_cache,
                                  double t, long n, mpfr_prec_t prec = kDefaultPrec,
                                  long direct_cap = 10000000) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("t must lie in [0, 1]");
  if (n < 1) throw DomainError("n must be >= 1");
  const mpfr_prec_t wp = prec + 64;
  mpz_class qn = q_cache.product(n);
  if (qn > direct_cap)
    throw CapExceeded("direct summation over " + qn.get_str() +
                      " targets exceeds cap " + std::to_string(direct_cap));
  Real alpha_n = a_cache.has_exact_sums()
                     ? Real::of(a_cache.exact_sum(n), wp)
                     : Real(a_cache.log_sum(n).value());
  Real tv = Real::of(t, wp);
  Real qv = Real::of(qn, wp);
  Real two = Real::of(2L, wp);

  // |Delta| = 2 e^{-alpha(n)} / Q_n, identical for every j.
  Real len = div(mul(two, exp(neg(alpha_n), wp), wp), qv, wp);
  Real len_t = pow(len, tv, wp);
  HausdorffSum out{Real(wp), Real(wp)};
  unsigned long reps = qn.get_ui();
  for (unsigned long j = 0; j < reps; ++j)
    out.direct = add(out.direct, len_t, wp);

  Real one_minus_t = sub(Real::of(1L, wp), tv, wp);
  out.closed_form = mul(
      mul(pow(two, tv, wp), pow(qv, one_minus_t, wp), wp),
      exp(neg(mul(tv, alpha_n, wp)), wp), wp);
  return out;
}

struct SeriesReport {
  double t = 0;
  double pressure_t = 0;  // windowed pressure at t (must be < 0)
  long n_lo = 0, n_hi = 0;
  bool bound_ok = true;   // sum_j |Delta_{n,j}|^t <= 2^t exp((1/2) P(t) n) on the window
  long violations = 0;
  double ratio = 0;       // e^{P(t)/2} < 1, geometric decay factor
  double log10_first = 0; // log10 of the bound at n = N_lo
  double log10_last = 0;  // log10 of the bound at n = N_hi
  double log10_tail_sum = 0;  // log10 of sum over the window of the bounds
};

// With P(t) < 0, checks 2^t Q_n^{1-t} e^{-t alpha(n)} <= 2^t exp((1/2) P(t) n)
// for every window n, and reports the geometric decay of the dominating tail.
inline SeriesReport upper_bound_series_check(CumulativeCache& q_cache,
                                             CumulativeCache& a_cache, double t,
                                             long n_hi, double window_fraction = 0.5) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("t must lie in [0, 1]");
  TailWindow w(q_cache, a_cache, n_hi, window_fraction);
  double p_t = w.max_f(t);
  if (p_t >= 0)
    throw PreconditionUnmet("windowed pressure at t = " + std::to_string(t) +
                            " is nonnegative; the series bound needs P(t) < 0");
  SeriesReport rep;
  rep.t = t;
  rep.pressure_t = p_t;
  rep.n_lo = w.n_lo();
  rep.n_hi = w.n_hi();
  rep.ratio = std::exp(0.5 * p_t);
  double log_sum = -std::numeric_limits<double>::infinity();
  for (long n = w.n_lo(); n <= w.n_hi(); ++n) {
    // log-domain: (1-t) log Q_n - t alpha(n) <= (1/2) P(t) n
    double lhs = (1.0 - t) * w.log_q(n) - t * w.alpha(n);
    double rhs = 0.5 * p_t * static_cast<double>(n);
    if (lhs > rhs + w.error_bound() + 1e-9) {
      rep.bound_ok = false;
      ++rep.violations;
    }
    double log_term = t * M_LN2 + rhs;
    double hi = std::max(log_sum, log_term);
    log_sum = hi + std::log1p(std::exp(std::min(log_sum, log_term) - hi));
  }
  rep.log10_first = (t * M_LN2 + 0.5 * p_t * static_cast<double>(w.n_lo())) / M_LN10;
  rep.log10_last = (t * M_LN2 + 0.5 * p_t * static_cast<double>(w.n_hi())) / M_LN10;
  rep.log10_tail_sum = log_sum / M_LN10;
  return rep;
}

// ---------------------------------------------------------------------------
// Tree export
// ---------------------------------------------------------------------------

// One node per line: level, n, center index, exact center, exact mass,
// child count, log radius. The format is versioned by the first line.
inline void dump_tree(const CoverTree& tree, std::ostream& out) {
  out << "cantordim-cover-dump v1\n";
  out << "# q=" << tree.q_text << " alpha=" << tree.alpha_text
      << " s=" << tree.schedule.s << " log_c=" << tree.schedule.log_c << " levels=";
  for (std::size_t i = 0; i < tree.schedule.levels.size(); ++i)
    out << (i ? "," : "") << tree.schedule.levels[i];
  out << "\n# level n index center mass child_count log_radius\n";
  for (std::size_t l = 0; l < tree.levels.size(); ++l) {
    const CoverLevel& lvl = tree.levels[l];
    std::string radius = lvl.radius.log_ball.value().str(24);
    for (const CoverNode& node : lvl.nodes) {
      out << (l + 1) << ' ' << lvl.n << ' ' << node.index.get_str() << ' '
          << node.center.get_str() << ' ' << node.mass.get_str() << ' '
          << node.child_count << ' ' << radius << '\n';
    }
  }
}

}  // namespace cantor
