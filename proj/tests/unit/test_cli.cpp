#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "cantor/cli.hpp"

using cantor::cli::run;
using json = nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<json> parse_lines(const std::string& text) {
  std::vector<json> records;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) records.push_back(json::parse(line));
  return records;
}

}  // namespace

TEST_CASE("expand subcommand emits digits and remainder") {
  Result r = invoke({"expand", "--q", "periodic:2,3", "--x", "5/6", "--n", "2",
                     "--format", "json-lines"});
  REQUIRE(r.code == 0);
  auto recs = parse_lines(r.out);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0]["digits"] == json::array({"1", "2"}));
  CHECK(recs[0]["remainder"] == "0");
}

TEST_CASE("iterate accepts decimal points exactly") {
  Result r = invoke({"iterate", "--q", "const:2", "--x", "0.75", "--n", "0",
                     "--format", "json-lines"});
  REQUIRE(r.code == 0);
  auto recs = parse_lines(r.out);
  CHECK(recs[0]["point"] == "3/4");

  Result r2 = invoke({"iterate", "--q", "periodic:2,3", "--x", "1/5", "--n", "2",
                      "--format", "json-lines"});
  CHECK(parse_lines(r2.out)[0]["point"] == "1/5");
}

TEST_CASE("dimension of a zero weight sequence is exactly one") {
  Result r = invoke({"dimension", "--q", "periodic:2,3", "--alpha", "const:0",
                     "--n-max", "100", "--format", "json-lines"});
  REQUIRE(r.code == 0);
  auto recs = parse_lines(r.out);
  CHECK(recs[0]["value"] == 1.0);
}

TEST_CASE("hits lists non-miss levels with margins") {
  Result r = invoke({"hits", "--q", "periodic:2,3", "--alpha", "const:1", "--x",
                     "5/6", "--n-max", "4", "--format", "json-lines"});
  REQUIRE(r.code == 0);
  auto recs = parse_lines(r.out);
  REQUIRE(recs.size() == 4);
  CHECK(recs[0]["n"] == 1);
  CHECK(recs[0]["verdict"] == "hit");
  CHECK(recs[1]["exact_zero"] == true);
}

TEST_CASE("height reports non-q-adic denominators as a status") {
  Result r = invoke({"height", "--q", "periodic:2,3", "--x", "1/5",
                     "--format", "json-lines"});
  REQUIRE(r.code == 0);  // an answer, not an error
  auto recs = parse_lines(r.out);
  CHECK(recs[0]["status"] == "not-q-adic");
  CHECK(recs[0]["height"].is_null());

  Result ok = invoke({"height", "--q", "periodic:2,3", "--x", "1/3",
                      "--format", "json-lines"});
  CHECK(parse_lines(ok.out)[0]["height"] == 2);
}

TEST_CASE("witness emits the grid point or null") {
  Result hit = invoke({"witness", "--q", "periodic:2,3", "--alpha", "const:1",
                       "--x", "1/6", "--n", "2", "--format", "json-lines"});
  auto recs = parse_lines(hit.out);
  CHECK(recs[0]["verdict"] == "hit");
  CHECK(recs[0]["witness"] == "1/6");

  Result miss = invoke({"witness", "--q", "periodic:2,3", "--alpha", "const:1",
                        "--x", "1/4", "--n", "2", "--format", "json-lines"});
  auto mrecs = parse_lines(miss.out);
  CHECK(mrecs[0]["verdict"] == "miss");
  CHECK(mrecs[0]["witness"].is_null());
}

TEST_CASE("pressure profile of a constant pair is a constant column") {
  Result r = invoke({"pressure", "--q", "const:2", "--alpha", "const:1", "--s",
                     "0.3", "--n-max", "20", "--profile", "--format", "json-lines"});
  REQUIRE(r.code == 0);
  auto recs = parse_lines(r.out);
  REQUIRE(recs.size() > 5);
  double expect = 0.7 * M_LN2 - 0.3;
  for (std::size_t i = 1; i < recs.size(); ++i)
    CHECK(recs[i]["value"].get<double>() == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("family subcommand computes closed forms") {
  Result r = invoke({"family", "--family", "periodic", "--period", "2,3", "--c",
                     "1", "--format", "json-lines"});
  REQUIRE(r.code == 0);
  auto recs = parse_lines(r.out);
  double lg = std::log(std::sqrt(6.0));
  CHECK(recs[0]["value"].get<double>() == Catch::Approx(lg / (lg + 1)).margin(1e-12));
}

TEST_CASE("stolz subcommand reports both ratios") {
  Result r = invoke({"stolz", "--a", "const:1", "--b", "const:2", "--n-max",
                     "100", "--format", "json-lines"});
  auto recs = parse_lines(r.out);
  CHECK(recs[0]["term_ratio"].get<double>() == 0.5);
  CHECK(recs[0]["sum_ratio"].get<double>() == 0.5);
}

TEST_CASE("cover-build dumps a versioned tree") {
  Result r = invoke({"cover-build", "--q", "const:2", "--alpha", "const:1",
                     "--s", "0.3", "--levels", "2", "--n-cap", "1000"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("cantordim-cover-dump v1\n", 0) == 0);
}

TEST_CASE("cover-check emits one record per check") {
  Result r = invoke({"cover-check", "--q", "const:2", "--alpha", "const:1",
                     "--s", "0.3", "--levels", "2", "--n-cap", "1000",
                     "--format", "json-lines"});
  REQUIRE(r.code == 0);
  auto recs = parse_lines(r.out);
  REQUIRE(recs.size() == 4);
  CHECK(recs[0]["command"] == "cover-schedule");
  CHECK(recs[1]["weak_ok"] == true);
  CHECK(recs[2]["ok"] == true);
  CHECK(recs[3]["c_observed"].get<double>() > 0);
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(invoke({"expand", "--q", "periodic:2,3", "--n", "2"}).code == 1);  // no --x
  CHECK(invoke({"expand", "--q", "bad spec", "--x", "1/2", "--n", "2"}).code == 1);
  CHECK(invoke({"iterate", "--q", "const:2", "--x", "one half", "--n", "1"}).code == 1);
  CHECK(invoke({"dimension", "--q", "const:2", "--alpha", "const:1", "--n-max",
                "5"}).code == 1);  // window too small
  CHECK(invoke({"nosuch"}).code == 1);
  Result bad = invoke({"expand", "--q", "const:-3", "--x", "1/2", "--n", "1"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("error") != std::string::npos);
}

TEST_CASE("computation errors exit with code 2") {
  // exact product needed at n = 60 exceeds a tiny bit cap
  Result r = invoke({"hsum", "--q", "expr:2^n", "--alpha", "const:1", "--t",
                     "0.5", "--n", "60", "--cap-bits", "1024"});
  CHECK(r.code == 2);
  CHECK(r.err.find("computation error") != std::string::npos);
}

TEST_CASE("output is deterministic and format equivalent") {
  std::vector<std::string> args{"bowen",  "--q",     "periodic:2,3", "--alpha",
                                "const:1", "--n-max", "500",          "--format",
                                "json-lines"};
  Result a = invoke(args);
  Result b = invoke(args);
  CHECK(a.out == b.out);

  auto jrec = parse_lines(a.out)[0];
  std::vector<std::string> cargs = args;
  cargs.back() = "csv";
  Result c = invoke(cargs);
  std::istringstream in(c.out);
  std::string header, row;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, row));
  // csv carries the same value (shortest round-trip double form)
  std::string value = jrec["value"].dump();
  CHECK(row.find(value) != std::string::npos);
}

TEST_CASE("hsum reports near-zero relative error between routes") {
  Result r = invoke({"hsum", "--q", "periodic:2,3", "--alpha", "const:0.5",
                     "--t", "0.37", "--n", "6", "--format", "json-lines"});
  REQUIRE(r.code == 0);
  auto recs = parse_lines(r.out);
  CHECK(recs[0]["rel_error"].get<double>() <= std::ldexp(1.0, -120));
}
