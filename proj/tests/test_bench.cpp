#include <cmath>

#include "doctest.h"
#include "pllci/bench.hpp"

using namespace pllci;

namespace {

BenchConfig tiny() {
  BenchConfig c;
  c.test_counts = {5, 10};
  c.sample_sizes = {300};
  c.scenarios = {{{}}, {{2, 3}}};
  c.repetitions = 2;
  return c;
}

}  // namespace

TEST_CASE("scenario ids") {
  CHECK(BenchScenario{{2, 4, 4}}.id() == "z=2x4x4");
  CHECK(BenchScenario{{2}}.id() == "z=2");
  CHECK(BenchScenario{{}}.id() == "z=none");
}

TEST_CASE("run_bench emits one record per grid cell and method") {
  auto c = tiny();
  const auto records = run_bench(c);
  CHECK(records.size() == 2 * 1 * 2 * 2);
  for (const auto& r : records) {
    CHECK(r.mean_seconds > 0.0);
    if (r.method == "closed_form") CHECK(r.normalized == 1.0);
  }
  c.batch_workers = 2;
  CHECK(run_bench(c).size() == 2 * 1 * 2 * 3);
}

TEST_CASE("closed form alone normalizes to one") {
  auto c = tiny();
  c.methods = {Method::closed_form};
  const auto records = run_bench(c);
  CHECK(records.size() == 4);
  for (const auto& r : records) CHECK(r.normalized == 1.0);
}

TEST_CASE("ipf alone is still normalized against the closed form") {
  auto c = tiny();
  c.methods = {Method::ipf};
  const auto records = run_bench(c);
  CHECK(records.size() == 4);
  for (const auto& r : records) CHECK(r.method == "ipf");
}

TEST_CASE("validate rejects empty grids and zero counts") {
  auto c = tiny();
  c.test_counts.clear();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = tiny();
  c.repetitions = 0;
  CHECK_THROWS_AS(run_bench(c), std::invalid_argument);
  c = tiny();
  c.sample_sizes = {0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = tiny();
  c.methods.clear();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("TSV report round-trips at its printed precision") {
  std::vector<BenchRecord> records{
      {"z=2x4", 5000, 1000, "ipf", 1.234567e-3, 1.87654},
      {"z=2", 3000, 500, "closed_form", 4.5e-4, 1.0},
      {"z=2", 3000, 500, "ipf", 9.1e-4, 2.02222},
  };
  const auto text = emit_report(records, ReportFormat::tsv);
  CHECK(text.rfind("scenario\tn\tT\tmethod\tmean_seconds\tnormalized\n", 0) == 0);
  const auto back = parse_report_tsv(text);
  REQUIRE(back.size() == 3);
  // Sorted by scenario first.
  CHECK(back[0].scenario == "z=2");
  CHECK(back[0].method == "closed_form");
  CHECK(back[2].scenario == "z=2x4");
  CHECK(back[2].n == 5000);
  CHECK(back[2].tests == 1000);
  CHECK(std::fabs(back[2].mean_seconds - 1.235e-3) < 1e-12);
  CHECK(back[2].normalized == doctest::Approx(1.877));
  CHECK(emit_report(back, ReportFormat::tsv) == text);
}

TEST_CASE("markdown report has one row per grid cell") {
  std::vector<BenchRecord> records{
      {"z=2", 3000, 500, "closed_form", 4.5e-4, 1.0},
      {"z=2", 3000, 500, "ipf", 9.1e-4, 2.022},
  };
  const auto md = emit_report(records, ReportFormat::markdown);
  CHECK(md.find("ipf (norm)") != std::string::npos);
  CHECK(md.find("closed_form (s)") != std::string::npos);
  CHECK(std::count(md.begin(), md.end(), '\n') == 3);
  CHECK(md.find("2.022") != std::string::npos);
}

TEST_CASE("empty reports are rejected") {
  CHECK_THROWS_AS(emit_report({}, ReportFormat::tsv), std::invalid_argument);
  CHECK_THROWS_AS(parse_report_tsv("garbage\n1\t2\n"), DataError);
}

TEST_CASE("ipf costs more than the closed form on a large conditioning set") {
  BenchConfig c;
  c.test_counts = {200};
  c.sample_sizes = {10000};
  c.scenarios = {{{2, 4, 4}}};
  c.repetitions = 10;
  const auto records = run_bench(c);
  REQUIRE(records.size() == 2);
  CHECK(records[1].method == "ipf");
  CHECK(records[1].normalized > 1.0);
}

TEST_CASE("time grows roughly linearly in the test count") {
  BenchConfig c;
  c.test_counts = {200, 400};
  c.sample_sizes = {5000};
  c.scenarios = {{{2, 4}}};
  c.repetitions = 10;
  c.methods = {Method::closed_form};
  const auto records = run_bench(c);
  REQUIRE(records.size() == 2);
  const double ratio = records[1].mean_seconds / records[0].mean_seconds;
  CHECK(ratio > 1.4);
  CHECK(ratio < 2.8);
}
