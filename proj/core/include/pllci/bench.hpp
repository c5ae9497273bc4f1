#pragma once

// Timing harness: T back-to-back tests per (scenario, n), averaged over
// repetitions and normalized against the closed-form route.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pllci/core.hpp"

namespace pllci {

struct BenchScenario {
  /// Level counts of the conditioning variables; X and Y use
  /// BenchConfig::levels_x / levels_y.
  std::vector<Code> cs_levels;

  /// "z=2x4x4", or "z=none" without conditioning variables.
  std::string id() const;
};

struct BenchConfig {
  std::vector<std::size_t> test_counts{500, 1000, 2000, 3000, 5000};
  std::vector<std::size_t> sample_sizes{3000, 5000, 10000};
  std::vector<BenchScenario> scenarios{{{2}}, {{2, 4}}, {{2, 4, 4}}};
  std::size_t repetitions = 50;
  std::vector<Method> methods{Method::closed_form, Method::ipf};
  Code levels_x = 3;
  Code levels_y = 4;
  /// When nonzero, also time batch_screen over the T specs with this many
  /// workers, reported under the method label "batch".
  std::size_t batch_workers = 0;
  std::uint64_t seed = 2017;

  /// Throws std::invalid_argument if a list is empty or a count is zero.
  void validate() const;
};

struct BenchRecord {
  std::string scenario;
  std::size_t n = 0;
  std::size_t tests = 0;
  /// "closed_form", "ipf" or "batch".
  std::string method;
  double mean_seconds = 0.0;
  double normalized = 0.0;

  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

/// For every (scenario, n): one untimed warm-up pass, then per repetition a
/// fresh null dataset and, per T and method, the wall time of T
/// consecutive tests. The closed-form time is always measured since it is
/// the normalization baseline; it is reported only when requested.
std::vector<BenchRecord> run_bench(const BenchConfig& config);

enum class ReportFormat { tsv, markdown };

/// Records sorted by (scenario, n, T, method). TSV columns: scenario, n, T,
/// method, mean_seconds (%.3e), normalized (%.3f). The markdown table has
/// one row per (scenario, n, T) and a normalized-time column per method.
/// Throws std::invalid_argument on an empty record list.
std::string emit_report(std::vector<BenchRecord> records, ReportFormat format);

/// Parses the TSV form of emit_report.
std::vector<BenchRecord> parse_report_tsv(std::string_view text);

}  // namespace pllci
