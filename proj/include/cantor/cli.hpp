#pragma once

// Command-line surface. Subcommands map one-to-one onto the library
// operations; results stream as human text, CSV, or JSON lines. Identical
// configurations produce byte-identical output.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cantor/covertree.hpp"
#include "cantor/dimension.hpp"
#include "cantor/expansion.hpp"
#include "cantor/targets.hpp"

namespace cantor::cli {

using json = nlohmann::ordered_json;

enum class Format { Human, Csv, JsonLines };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline Format parse_format(const std::string& s) {
  if (s == "human") return Format::Human;
  if (s == "csv") return Format::Csv;
  if (s == "json-lines" || s == "jsonl") return Format::JsonLines;
  throw UsageError("unknown format '" + s + "' (human, csv, json-lines)");
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string scalar_str(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

inline void emit_records(const std::vector<json>& records, Format f, std::ostream& out) {
  switch (f) {
    case Format::JsonLines:
      for (const auto& r : records) out << r.dump() << '\n';
      break;
    case Format::Csv: {
      if (records.empty()) break;
      bool first = true;
      for (auto it = records.front().begin(); it != records.front().end(); ++it) {
        out << (first ? "" : ",") << csv_quote(it.key());
        first = false;
      }
      out << '\n';
      for (const auto& r : records) {
        first = true;
        for (auto it = r.begin(); it != r.end(); ++it) {
          out << (first ? "" : ",") << csv_quote(scalar_str(it.value()));
          first = false;
        }
        out << '\n';
      }
      break;
    }
    case Format::Human:
      for (const auto& r : records) {
        for (auto it = r.begin(); it != r.end(); ++it)
          out << it.key() << ": " << scalar_str(it.value()) << '\n';
        out << '\n';
      }
      break;
  }
}

// Exact point from "p/q" or a decimal literal (d digits -> denominator 10^d).
inline ExactPoint parse_point(const std::string& s) {
  try {
    if (s.find('/') != std::string::npos) {
      mpq_class q(s, 10);
      q.canonicalize();
      return ExactPoint(q);
    }
    return ExactPoint(cantor::detail::parse_decimal(s, 0));
  } catch (const std::exception& e) {
    throw UsageError("invalid point '" + s + "': " + e.what());
  }
}

inline SequenceSpec parse_spec_arg(const std::string& text, SeqTarget target) {
  try {
    return SequenceSpec::parse(text, target);
  } catch (const Error& e) {
    throw UsageError("invalid " + std::string(to_string(target)) + " spec '" +
                     text + "': " + e.what());
  }
}

inline std::vector<mpz_class> parse_int_list(const std::string& s) {
  std::vector<mpz_class> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      try {
        out.emplace_back(s.substr(start, i - start));
      } catch (const std::exception&) {
        throw UsageError("invalid integer list '" + s + "'");
      }
      start = i + 1;
    }
  }
  return out;
}

inline mpq_class parse_rational_arg(const std::string& s, const char* what) {
  try {
    if (s.find('/') != std::string::npos) {
      mpq_class q(s, 10);
      q.canonicalize();
      return q;
    }
    return cantor::detail::parse_decimal(s, 0);
  } catch (const std::exception&) {
    throw UsageError(std::string("invalid ") + what + " '" + s + "'");
  }
}

inline json margin_json(const LogReal& m) {
  json j;
  j["margin"] = m.to_double();
  j["margin_radius"] = m.radius_double();
  return j;
}

}  // namespace detail

struct RunConfig {
  std::string q_spec, alpha_spec;
  std::string x_text, a_spec, b_spec;
  long n = 0, n_max = 0, n_cap = 0, n_scan = 10000;
  int levels = 3;
  double s = 0, t = 0, tol = 1e-6, window = 0.5;
  long precision = kDefaultPrec;
  long cap_bits = kDefaultCapBits;
  long enum_cap = 10000000;
  int sample_count = 64, radii_cap = 512;
  std::optional<double> frostman_c;
  bool profile = false;
  std::string format = "human";
  std::string out_path;
  std::string family, period_text, k_text, b_text, c_text;
};

inline int run(const std::vector<std::string>& args, std::ostream& out_stream,
               std::ostream& err_stream) {
  RunConfig cfg;
  CLI::App app{"Cantor-series shrinking-target dimension toolkit"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* cmd, bool needs_alpha) {
    cmd->add_option("--q", cfg.q_spec, "base sequence spec (kind:payload)")->required();
    if (needs_alpha)
      cmd->add_option("--alpha", cfg.alpha_spec, "weight sequence spec")->required();
    cmd->add_option("--precision", cfg.precision, "working precision in bits");
    cmd->add_option("--cap-bits", cfg.cap_bits, "bit cap for exact products");
    cmd->add_option("--format", cfg.format, "output format: human|csv|json-lines");
    cmd->add_option("--out", cfg.out_path, "write output to this file");
  };

  CLI::App* expand = app.add_subcommand("expand", "Cantor-series digits of a point");
  add_common(expand, false);
  expand->add_option("--x", cfg.x_text, "point, 'p/q' or decimal")->required();
  expand->add_option("--n", cfg.n, "number of digits")->required();

  CLI::App* iterate_cmd = app.add_subcommand("iterate", "exact orbit point T_Q^n(x)");
  add_common(iterate_cmd, false);
  iterate_cmd->add_option("--x", cfg.x_text)->required();
  iterate_cmd->add_option("--n", cfg.n)->required();

  CLI::App* hits = app.add_subcommand("hits", "levels whose shrinking target is hit");
  add_common(hits, true);
  hits->add_option("--x", cfg.x_text)->required();
  hits->add_option("--n-max", cfg.n_max)->required();

  CLI::App* height_cmd = app.add_subcommand("height", "least n with x in the order-n grid");
  add_common(height_cmd, false);
  height_cmd->add_option("--x", cfg.x_text)->required();
  height_cmd->add_option("--n-scan", cfg.n_scan, "scan horizon");

  CLI::App* witness = app.add_subcommand("witness", "order-n rational witness for the target");
  add_common(witness, true);
  witness->add_option("--x", cfg.x_text)->required();
  witness->add_option("--n", cfg.n)->required();

  CLI::App* pressure = app.add_subcommand("pressure", "windowed pressure at s");
  add_common(pressure, true);
  pressure->add_option("--s", cfg.s)->required();
  pressure->add_option("--n-max", cfg.n_max)->required();
  pressure->add_option("--window", cfg.window, "window fraction in (0,1)");
  pressure->add_flag("--profile", cfg.profile, "emit per-n samples");

  CLI::App* bowen = app.add_subcommand("bowen", "Bowen parameter via pressure bisection");
  add_common(bowen, true);
  bowen->add_option("--n-max", cfg.n_max)->required();
  bowen->add_option("--tol", cfg.tol);
  bowen->add_option("--window", cfg.window);

  CLI::App* dimension = app.add_subcommand("dimension", "closed-form limsup dimension");
  add_common(dimension, true);
  dimension->add_option("--n-max", cfg.n_max)->required();
  dimension->add_option("--window", cfg.window);
  dimension->add_flag("--profile", cfg.profile, "emit per-n dimension samples");

  CLI::App* corollary = app.add_subcommand("corollary", "dimension via the term-ratio limit");
  add_common(corollary, true);
  corollary->add_option("--n-max", cfg.n_max)->required();
  corollary->add_option("--window", cfg.window);

  CLI::App* family = app.add_subcommand("family", "closed-form dimension of an example family");
  family->add_option("--family", cfg.family,
                     "periodic|polynomial|exponential")->required();
  family->add_option("--period", cfg.period_text, "period values, comma separated");
  family->add_option("--k", cfg.k_text, "polynomial growth exponent");
  family->add_option("--b", cfg.b_text, "exponential growth base");
  family->add_option("--c", cfg.c_text, "weight constant")->required();
  family->add_option("--precision", cfg.precision);
  family->add_option("--format", cfg.format);
  family->add_option("--out", cfg.out_path);

  CLI::App* cover_build = app.add_subcommand("cover-build", "build and dump a cover tree");
  add_common(cover_build, true);
  cover_build->add_option("--s", cfg.s)->required();
  cover_build->add_option("--levels", cfg.levels)->required();
  cover_build->add_option("--n-cap", cfg.n_cap, "schedule search cap");
  cover_build->add_option("--frostman-c", cfg.frostman_c, "impose this Frostman constant");
  cover_build->add_option("--enum-cap", cfg.enum_cap);

  CLI::App* cover_check = app.add_subcommand("cover-check",
                                             "build a cover tree and run its checks");
  add_common(cover_check, true);
  cover_check->add_option("--s", cfg.s)->required();
  cover_check->add_option("--levels", cfg.levels)->required();
  cover_check->add_option("--n-cap", cfg.n_cap);
  cover_check->add_option("--frostman-c", cfg.frostman_c);
  cover_check->add_option("--enum-cap", cfg.enum_cap);
  cover_check->add_option("--sample-count", cfg.sample_count);
  cover_check->add_option("--radii-cap", cfg.radii_cap);

  CLI::App* hsum = app.add_subcommand("hsum", "Hausdorff sum, direct vs closed form");
  add_common(hsum, true);
  hsum->add_option("--t", cfg.t)->required();
  hsum->add_option("--n", cfg.n)->required();

  CLI::App* series = app.add_subcommand("series-check", "upper-bound series decay check");
  add_common(series, true);
  series->add_option("--t", cfg.t)->required();
  series->add_option("--n-max", cfg.n_max)->required();
  series->add_option("--window", cfg.window);

  CLI::App* stolz = app.add_subcommand("stolz", "term ratio vs partial-sum ratio");
  stolz->add_option("--a", cfg.a_spec, "numerator sequence spec")->required();
  stolz->add_option("--b", cfg.b_spec, "denominator sequence spec")->required();
  stolz->add_option("--n-max", cfg.n_max)->required();
  stolz->add_option("--format", cfg.format);
  stolz->add_option("--out", cfg.out_path);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg;
    int code = app.exit(e, msg, msg);
    (code == 0 ? out_stream : err_stream) << msg.str();
    return code == 0 ? 0 : 1;
  }

  std::ofstream out_file;
  std::ostream* out = &out_stream;
  Format format = Format::Human;
  std::vector<json> records;

  try {
    format = detail::parse_format(cfg.format);
    if (!cfg.out_path.empty()) {
      out_file.open(cfg.out_path);
      if (!out_file) throw UsageError("cannot open output file '" + cfg.out_path + "'");
      out = &out_file;
    }

    auto q_cache = [&]() {
      return std::make_unique<CumulativeCache>(
          detail::parse_spec_arg(cfg.q_spec, SeqTarget::Base),
          static_cast<mpfr_prec_t>(cfg.precision), cfg.cap_bits);
    };
    auto a_cache = [&]() {
      return std::make_unique<CumulativeCache>(
          detail::parse_spec_arg(cfg.alpha_spec, SeqTarget::Weight),
          static_cast<mpfr_prec_t>(cfg.precision), cfg.cap_bits);
    };
    auto check_window = [&]() {
      if (cfg.n_max < 10) throw UsageError("--n-max must be >= 10");
      if (!(cfg.window > 0.0 && cfg.window < 1.0))
        throw UsageError("--window must lie in (0, 1)");
    };

    if (*expand) {
      auto q = q_cache();
      ExactPoint x = detail::parse_point(cfg.x_text);
      if (cfg.n < 1) throw UsageError("--n must be >= 1");
      DigitString d = cantor_digits(x, *q, cfg.n);
      json rec;
      rec["command"] = "expand";
      rec["q"] = cfg.q_spec;
      rec["x"] = x.str();
      rec["n"] = cfg.n;
      json digits = json::array();
      for (const auto& w : d.digits) digits.push_back(w.get_str());
      rec["digits"] = digits;
      rec["remainder"] = d.remainder.str();
      records.push_back(std::move(rec));
    } else if (*iterate_cmd) {
      auto q = q_cache();
      ExactPoint x = detail::parse_point(cfg.x_text);
      if (cfg.n < 0) throw UsageError("--n must be >= 0");
      json rec;
      rec["command"] = "iterate";
      rec["x"] = x.str();
      rec["n"] = cfg.n;
      rec["point"] = iterate(x, *q, cfg.n).str();
      records.push_back(std::move(rec));
    } else if (*hits) {
      auto q = q_cache();
      auto a = a_cache();
      ExactPoint x = detail::parse_point(cfg.x_text);
      if (cfg.n_max < 1) throw UsageError("--n-max must be >= 1");
      for (const auto& [n, verdict] :
           hit_levels(x, *q, *a, cfg.n_max, static_cast<mpfr_prec_t>(cfg.precision))) {
        json rec;
        rec["command"] = "hits";
        rec["n"] = n;
        rec["verdict"] = to_string(verdict.status);
        rec["exact_zero"] = verdict.exact_zero;
        rec.update(detail::margin_json(verdict.margin));
        records.push_back(std::move(rec));
      }
    } else if (*height_cmd) {
      auto q = q_cache();
      ExactPoint x = detail::parse_point(cfg.x_text);
      json rec;
      rec["command"] = "height";
      rec["x"] = x.str();
      try {
        rec["height"] = height(x, *q, cfg.n_scan);
        rec["status"] = "ok";
      } catch (const NotQAdic& e) {
        rec["height"] = nullptr;
        rec["status"] = "not-q-adic";
        rec["detail"] = e.what();
      }
      records.push_back(std::move(rec));
    } else if (*witness) {
      auto q = q_cache();
      auto a = a_cache();
      ExactPoint x = detail::parse_point(cfg.x_text);
      if (cfg.n < 1) throw UsageError("--n must be >= 1");
      WitnessResult res =
          witness_search(x, *q, *a, cfg.n, static_cast<mpfr_prec_t>(cfg.precision));
      json rec;
      rec["command"] = "witness";
      rec["x"] = x.str();
      rec["n"] = cfg.n;
      rec["verdict"] = to_string(res.status);
      if (res.witness) {
        rec["witness"] = res.witness->w.str();
        rec["index"] = res.witness->index.get_str();
        rec["distance"] = res.witness->distance.get_str();
      } else {
        rec["witness"] = nullptr;
      }
      records.push_back(std::move(rec));
    } else if (*pressure) {
      check_window();
      auto q = q_cache();
      auto a = a_cache();
      auto [value, profile] =
          pressure_estimate(*q, *a, cfg.s, cfg.n_max, cfg.window, cfg.profile);
      json rec;
      rec["command"] = "pressure";
      rec["s"] = cfg.s;
      rec["value"] = value;
      rec["n_lo"] = profile.n_lo;
      rec["n_hi"] = profile.n_hi;
      records.push_back(std::move(rec));
      for (const auto& [n, f] : profile.samples) {
        json row;
        row["command"] = "pressure-sample";
        row["n"] = n;
        row["value"] = f;
        records.push_back(std::move(row));
      }
    } else if (*bowen) {
      check_window();
      auto q = q_cache();
      auto a = a_cache();
      DimensionEstimate est = bowen_parameter(*q, *a, cfg.n_max, cfg.tol, cfg.window);
      json rec;
      rec["command"] = "bowen";
      rec["value"] = est.value;
      rec["method"] = to_string(est.method);
      rec["residual"] = est.residual;
      rec["n_lo"] = est.n_lo;
      rec["n_hi"] = est.n_hi;
      records.push_back(std::move(rec));
    } else if (*dimension) {
      check_window();
      auto q = q_cache();
      auto a = a_cache();
      DimensionEstimate est = dimension_limsup(*q, *a, cfg.n_max, cfg.window);
      json rec;
      rec["command"] = "dimension";
      rec["value"] = est.value;
      rec["method"] = to_string(est.method);
      rec["residual"] = est.residual;
      rec["n_lo"] = est.n_lo;
      rec["n_hi"] = est.n_hi;
      records.push_back(std::move(rec));
      if (cfg.profile) {
        TailWindow w(*q, *a, cfg.n_max, cfg.window);
        for (long n = w.n_lo(); n <= w.n_hi(); ++n) {
          json row;
          row["command"] = "dimension-sample";
          row["n"] = n;
          row["value"] = w.g(n);
          records.push_back(std::move(row));
        }
      }
    } else if (*corollary) {
      check_window();
      auto q = q_cache();
      auto a = a_cache();
      DimensionEstimate est = corollary_limit(*q, *a, cfg.n_max, cfg.window);
      json rec;
      rec["command"] = "corollary";
      rec["value"] = est.value;
      rec["limit_estimate"] = est.limit_estimate;
      rec["residual"] = est.residual;
      rec["no_limit"] = est.no_limit;
      rec["diverged"] = est.diverged;
      rec["n_lo"] = est.n_lo;
      rec["n_hi"] = est.n_hi;
      records.push_back(std::move(rec));
    } else if (*family) {
      FamilyDescriptor fam;
      fam.c = detail::parse_rational_arg(cfg.c_text, "--c");
      if (cfg.family == "periodic" || cfg.family == "eventually-periodic") {
        fam.kind = FamilyDescriptor::Kind::EventuallyPeriodic;
        if (cfg.period_text.empty()) throw UsageError("--period required for this family");
        fam.period = detail::parse_int_list(cfg.period_text);
      } else if (cfg.family == "polynomial") {
        fam.kind = FamilyDescriptor::Kind::PolynomialGrowth;
        if (cfg.k_text.empty()) throw UsageError("--k required for this family");
        fam.k = detail::parse_rational_arg(cfg.k_text, "--k");
      } else if (cfg.family == "exponential") {
        fam.kind = FamilyDescriptor::Kind::ExponentialGrowth;
        if (cfg.b_text.empty()) throw UsageError("--b required for this family");
        fam.b = detail::parse_rational_arg(cfg.b_text, "--b");
      } else {
        throw UsageError("unknown family '" + cfg.family + "'");
      }
      Real v = family_formula(fam, static_cast<mpfr_prec_t>(cfg.precision));
      json rec;
      rec["command"] = "family";
      rec["family"] = cfg.family;
      rec["value"] = v.to_double();
      rec["value_highprec"] = v.str(36);
      records.push_back(std::move(rec));
    } else if (*cover_build || *cover_check) {
      auto q = q_cache();
      auto a = a_cache();
      if (cfg.n_cap <= 0) cfg.n_cap = 100000;
      ChooseLevelsOptions opts;
      if (cfg.frostman_c) {
        if (*cfg.frostman_c <= 0) throw UsageError("--frostman-c must be > 0");
        opts.log_c = std::log(*cfg.frostman_c);
      }
      LevelSchedule sched = choose_levels(*q, *a, cfg.s, cfg.levels, cfg.n_cap, opts);
      CoverTree tree = build_cover(*q, *a, sched, cfg.enum_cap);
      if (*cover_build) {
        dump_tree(tree, *out);
        out->flush();
        return 0;
      }
      json srec;
      srec["command"] = "cover-schedule";
      srec["s"] = sched.s;
      srec["pressure_hat"] = sched.pressure_hat;
      json lv = json::array();
      for (long n : sched.levels) lv.push_back(n);
      srec["levels"] = lv;
      srec["log_c"] = sched.log_c;
      srec["nodes"] = tree.node_count();
      records.push_back(std::move(srec));
      CountingReport counting = counting_inequality_check(tree);
      json crec;
      crec["command"] = "counting-check";
      crec["weak_ok"] = counting.weak_ok;
      crec["strong_ok"] = counting.strong_ok;
      crec["weak_violations"] = counting.weak_violations;
      crec["strong_violations"] = counting.strong_violations;
      records.push_back(std::move(crec));
      CylinderReport cyl = cylinder_estimate_check(tree);
      json yrec;
      yrec["command"] = "cylinder-check";
      yrec["skipped"] = cyl.skipped;
      yrec["ok"] = cyl.ok;
      yrec["violations"] = cyl.violations;
      yrec["worst_ratio"] = cyl.worst_ratio;
      records.push_back(std::move(yrec));
      FrostmanReport fr = frostman_check(tree, sched.s, cfg.sample_count, cfg.radii_cap);
      json frec;
      frec["command"] = "frostman-check";
      frec["c_observed"] = fr.c_observed;
      frec["c_unsound"] = fr.c_unsound;
      frec["sound_samples"] = fr.sound_count;
      frec["unsound_samples"] = fr.unsound_count;
      records.push_back(std::move(frec));
    } else if (*hsum) {
      auto q = q_cache();
      auto a = a_cache();
      HausdorffSum hs = hausdorff_sum(*q, *a, cfg.t, cfg.n,
                                      static_cast<mpfr_prec_t>(cfg.precision));
      json rec;
      rec["command"] = "hsum";
      rec["t"] = cfg.t;
      rec["n"] = cfg.n;
      rec["direct"] = hs.direct.str(36);
      rec["closed_form"] = hs.closed_form.str(36);
      Real diff = sub(hs.direct, hs.closed_form, hs.direct.prec());
      double rel = hs.closed_form.is_zero()
                       ? 0.0
                       : std::abs(diff.to_double() / hs.closed_form.to_double());
      rec["rel_error"] = rel;
      records.push_back(std::move(rec));
    } else if (*series) {
      check_window();
      auto q = q_cache();
      auto a = a_cache();
      SeriesReport rep = upper_bound_series_check(*q, *a, cfg.t, cfg.n_max, cfg.window);
      json rec;
      rec["command"] = "series-check";
      rec["t"] = rep.t;
      rec["pressure_t"] = rep.pressure_t;
      rec["bound_ok"] = rep.bound_ok;
      rec["violations"] = rep.violations;
      rec["ratio"] = rep.ratio;
      rec["log10_first"] = rep.log10_first;
      rec["log10_last"] = rep.log10_last;
      rec["log10_tail_sum"] = rep.log10_tail_sum;
      records.push_back(std::move(rec));
    } else if (*stolz) {
      if (cfg.n_max < 1) throw UsageError("--n-max must be >= 1");
      CumulativeCache a(detail::parse_spec_arg(cfg.a_spec, SeqTarget::Weight));
      CumulativeCache b(detail::parse_spec_arg(cfg.b_spec, SeqTarget::Weight));
      StolzReport rep = stolz_check(a, b, cfg.n_max);
      json rec;
      rec["command"] = "stolz";
      rec["n"] = rep.n_hi;
      rec["term_ratio"] = rep.term_ratio;
      rec["sum_ratio"] = rep.sum_ratio;
      rec["gap"] = rep.gap;
      records.push_back(std::move(rec));
    }
  } catch (const UsageError& e) {
    err_stream << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err_stream << "computation error: " << e.what() << '\n';
    return 2;
  }

  detail::emit_records(records, format, *out);
  out->flush();
  return 0;
}

}  // namespace cantor::cli
