#pragma once

// G2 and Pearson tests of conditional independence between two categorical
// variables given a (possibly empty) conditioning set.

#include <cstdint>
#include <span>
#include <vector>

#include "pllci/chisq.hpp"
#include "pllci/core.hpp"
#include "pllci/tabulate.hpp"

namespace pllci {

/// 2 * sum N ln(N / E) over cells with N > 0. Throws std::invalid_argument
/// on a shape mismatch or when a cell has N > 0 and E = 0.
double g2_statistic(const ContingencyTable& observed, const MultiArray<double>& expected);

/// sum (N - E)^2 / E over cells with E > 0. Same errors as g2_statistic.
double chi2_statistic(const ContingencyTable& observed, const MultiArray<double>& expected);

/// Nominal degrees of freedom (|X|-1)(|Y|-1) prod |Z_i|.
std::uint64_t dof(std::uint64_t levels_x, std::uint64_t levels_y,
                  std::span<const std::uint64_t> levels_cs);

/// (|X|-1)(|Y|-1) times the number of occupied strata.
std::uint64_t dof_adjusted(std::uint64_t levels_x, std::uint64_t levels_y,
                           const SliceMarginals& marginals);

struct TestOptions {
  Method method = Method::closed_form;
  /// Use dof_adjusted rather than the nominal dof for the p-values.
  bool adjust_dof = false;
};

/// Single conditional-independence test. Throws SpecError for an invalid
/// spec and DataError for an empty dataset.
TestResult ci_test(const Dataset& data, const TestSpec& spec, const TestOptions& options = {});

/// Runs every spec with `workers` threads (0 means hardware concurrency).
/// Results come back in input order and match standalone ci_test calls.
/// All specs are validated first; the first invalid one is reported with its
/// position as a SpecError.
std::vector<TestResult> batch_screen(const Dataset& data, std::span<const TestSpec> specs,
                                     std::size_t workers, const TestOptions& options = {});

/// Every unordered pair of columns outside `cs`, in (i < j) order.
std::vector<TestSpec> all_pairs(const Dataset& data, const std::vector<std::size_t>& cs);

}  // namespace pllci
