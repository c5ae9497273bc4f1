#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "pllci/core.hpp"

namespace pllci::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDataError = 3,
  kSpecError = 4,
};

/// Runs the command line `args` (args[0] is the program name) and returns
/// the process exit code. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// One result as an ordered JSON object with the documented field names.
nlohmann::ordered_json result_json(const Dataset& data, const TestSpec& spec,
                                   const TestResult& result);

/// Header and row of the fixed-precision TSV form.
std::string result_tsv_header();
std::string result_tsv_row(const Dataset& data, const TestSpec& spec, const TestResult& result);

}  // namespace pllci::cli
