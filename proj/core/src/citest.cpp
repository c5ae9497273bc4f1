#include "pllci/citest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "pllci/loglinear.hpp"

namespace pllci {

namespace {

void check_shapes(const ContingencyTable& observed, const MultiArray<double>& expected) {
  if (observed.dims() != expected.dims()) {
    throw std::invalid_argument("observed and expected tables differ in shape");
  }
}

[[noreturn]] void throw_zero_expected(std::uint64_t flat) {
  throw std::invalid_argument("cell " + std::to_string(flat) +
                              " has a positive count but zero expected frequency");
}

// Summing in sorted order makes the statistics independent of cell order, so
// relabeling levels reproduces them bit for bit.
double ordered_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

std::vector<double>& scratch() {
  thread_local std::vector<double> terms;
  terms.clear();
  return terms;
}

}  // namespace

double g2_statistic(const ContingencyTable& observed, const MultiArray<double>& expected) {
  check_shapes(observed, expected);
  auto& terms = scratch();
  const auto* n_dense = observed.cells().dense();
  const auto* e_dense = expected.dense();
  if (n_dense && e_dense) {
    for (std::size_t i = 0; i < n_dense->size(); ++i) {
      const auto n = (*n_dense)[i];
      if (n == 0) continue;
      const double e = (*e_dense)[i];
      if (!(e > 0.0)) throw_zero_expected(i);
      const double nd = static_cast<double>(n);
      terms.push_back(nd * std::log(nd / e));
    }
  } else {
    observed.cells().for_each_nonzero([&](std::uint64_t flat, Count n) {
      const double e = expected.get(flat);
      if (!(e > 0.0)) throw_zero_expected(flat);
      const double nd = static_cast<double>(n);
      terms.push_back(nd * std::log(nd / e));
    });
  }
  return std::max(0.0, 2.0 * ordered_sum(terms));
}

double chi2_statistic(const ContingencyTable& observed, const MultiArray<double>& expected) {
  check_shapes(observed, expected);
  auto& terms = scratch();
  const auto* n_dense = observed.cells().dense();
  const auto* e_dense = expected.dense();
  if (n_dense && e_dense) {
    for (std::size_t i = 0; i < n_dense->size(); ++i) {
      const double n = static_cast<double>((*n_dense)[i]);
      const double e = (*e_dense)[i];
      if (e > 0.0) {
        terms.push_back((n - e) * (n - e) / e);
      } else if (n > 0.0) {
        throw_zero_expected(i);
      }
    }
  } else {
    observed.cells().for_each_nonzero([&](std::uint64_t flat, Count) {
      if (!(expected.get(flat) > 0.0)) throw_zero_expected(flat);
    });
    expected.for_each_nonzero([&](std::uint64_t flat, double e) {
      if (!(e > 0.0)) return;
      const double n = static_cast<double>(observed.cells().get(flat));
      terms.push_back((n - e) * (n - e) / e);
    });
  }
  return ordered_sum(terms);
}

std::uint64_t dof(std::uint64_t levels_x, std::uint64_t levels_y,
                  std::span<const std::uint64_t> levels_cs) {
  std::uint64_t d = (levels_x - 1) * (levels_y - 1);
  for (auto l : levels_cs) d *= l;
  return d;
}

std::uint64_t dof_adjusted(std::uint64_t levels_x, std::uint64_t levels_y,
                           const SliceMarginals& marginals) {
  return (levels_x - 1) * (levels_y - 1) * marginals.occupied_count();
}

TestResult ci_test(const Dataset& data, const TestSpec& spec, const TestOptions& options) {
  validate_spec(spec, data);
  if (data.n_rows() == 0) throw DataError("dataset has no rows");

  const auto table = build_table(data, spec);
  const auto marginals = slice_marginals(table);

  TestResult r;
  r.method = options.method;
  if (options.method == Method::closed_form) {
    const auto expected = expected_ci(marginals);
    r.g2 = g2_statistic(table, expected);
    r.chi2 = chi2_statistic(table, expected);
  } else {
    const auto fit = ipf_fit(table, ci_model(spec.cs.size()));
    r.g2 = g2_statistic(table, fit.fitted);
    r.chi2 = chi2_statistic(table, fit.fitted);
  }

  const auto& dims = table.dims();
  r.dof = dof(dims[0], dims[1], std::span(dims).subspan(2));
  r.dof_adjusted = dof_adjusted(dims[0], dims[1], marginals);
  r.empty_strata = marginals.empty_count();

  const std::uint64_t used = options.adjust_dof ? r.dof_adjusted : r.dof;
  if (used == 0) {
    r.degenerate = true;
    r.log_p_g2 = 0.0;
    r.log_p_chi2 = 0.0;
  } else {
    r.log_p_g2 = log_sf_chisq(r.g2, used);
    r.log_p_chi2 = log_sf_chisq(r.chi2, used);
  }
  return r;
}

std::vector<TestResult> batch_screen(const Dataset& data, std::span<const TestSpec> specs,
                                     std::size_t workers, const TestOptions& options) {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    try {
      validate_spec(specs[i], data);
    } catch (const SpecError& e) {
      throw SpecError("spec #" + std::to_string(i) + ": " + e.what());
    }
  }
  if (specs.empty()) return {};
  if (data.n_rows() == 0) throw DataError("dataset has no rows");

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, specs.size());

  std::vector<TestResult> results(specs.size());
  std::vector<std::exception_ptr> errors(specs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next.fetch_add(1); i < specs.size(); i = next.fetch_add(1)) {
      try {
        results[i] = ci_test(data, specs[i], options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::vector<TestSpec> all_pairs(const Dataset& data, const std::vector<std::size_t>& cs) {
  std::vector<bool> conditioning(data.n_columns(), false);
  for (auto c : cs) {
    if (c < conditioning.size()) conditioning[c] = true;
  }
  std::vector<TestSpec> pairs;
  for (std::size_t i = 0; i < data.n_columns(); ++i) {
    if (conditioning[i]) continue;
    for (std::size_t j = i + 1; j < data.n_columns(); ++j) {
      if (conditioning[j]) continue;
      pairs.push_back({i, j, cs});
    }
  }
  return pairs;
}

}  // namespace pllci
