#pragma once

// Domain types shared by every module: datasets of categorical columns,
// test specifications, multi-way cell arrays and the result records.
// Everything here is immutable after construction.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace pllci {

using Code = std::uint32_t;
using Count = std::uint64_t;

/// Tables with at most this many cells use dense row-major storage.
inline constexpr std::uint64_t kDenseThreshold = std::uint64_t{1} << 24;

/// Malformed or inconsistent input data (ragged files, bad codes, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A test specification that does not fit the dataset.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CategoricalColumn {
  std::string name;
  Code levels = 0;
  std::vector<Code> codes;
  /// Original tokens, indexed by code. Empty when the column was built
  /// from raw codes.
  std::vector<std::string> labels;

  bool has_labels() const { return !labels.empty(); }
  /// Label of `code`, or its decimal form when the column carries no labels.
  std::string label_of(Code code) const;

  friend bool operator==(const CategoricalColumn&, const CategoricalColumn&) = default;
};

class Dataset {
 public:
  Dataset() = default;
  /// Throws DataError when a column violates the row-count, level or
  /// code-range invariants.
  explicit Dataset(std::vector<CategoricalColumn> columns);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_columns() const { return columns_.size(); }
  const std::vector<CategoricalColumn>& columns() const { return columns_; }
  const CategoricalColumn& column(std::size_t i) const { return columns_.at(i); }
  Code levels(std::size_t i) const { return columns_.at(i).levels; }

  /// Resolves a column reference given as a header name or a 0-based index.
  std::optional<std::size_t> find_column(std::string_view ref) const;

  /// Same names and the same decoded value in every cell.
  bool same_observations(const Dataset& other) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t n_rows_ = 0;
  std::vector<CategoricalColumn> columns_;
};

struct TestSpec {
  std::size_t x = 0;
  std::size_t y = 1;
  std::vector<std::size_t> cs;

  friend bool operator==(const TestSpec&, const TestSpec&) = default;
};

/// Throws SpecError naming the offending index when an index is out of
/// range or when x, y and cs overlap.
void validate_spec(const TestSpec& spec, const Dataset& data);

/// Mixed-radix multi-way array with the first dimension varying fastest.
/// Storage is a dense vector up to `dense_threshold` cells and a hash map
/// keyed by the flat cell index above it.
template <typename T>
class MultiArray {
 public:
  using Dense = std::vector<T>;
  using Sparse = std::unordered_map<std::uint64_t, T>;

  MultiArray() : MultiArray(std::vector<std::uint64_t>{}) {}
  explicit MultiArray(std::vector<std::uint64_t> dims,
                      std::uint64_t dense_threshold = kDenseThreshold);

  const std::vector<std::uint64_t>& dims() const { return dims_; }
  const std::vector<std::uint64_t>& strides() const { return strides_; }
  std::uint64_t cell_count() const { return cell_count_; }
  bool is_dense() const { return std::holds_alternative<Dense>(cells_); }

  T get(std::uint64_t flat) const {
    if (const auto* d = std::get_if<Dense>(&cells_)) return (*d)[flat];
    const auto& s = std::get<Sparse>(cells_);
    auto it = s.find(flat);
    return it == s.end() ? T{} : it->second;
  }
  void set(std::uint64_t flat, T value);
  void add(std::uint64_t flat, T value) {
    if (auto* d = std::get_if<Dense>(&cells_)) {
      (*d)[flat] += value;
    } else {
      std::get<Sparse>(cells_)[flat] += value;
    }
  }

  /// Direct access to dense storage; nullptr for sparse arrays.
  const Dense* dense() const { return std::get_if<Dense>(&cells_); }
  Dense* dense() { return std::get_if<Dense>(&cells_); }
  const Sparse* sparse() const { return std::get_if<Sparse>(&cells_); }

  /// Calls f(flat, value) for every nonzero cell. Sparse iteration order
  /// is unspecified.
  template <typename F>
  void for_each_nonzero(F&& f) const {
    if (const auto* d = std::get_if<Dense>(&cells_)) {
      for (std::uint64_t i = 0; i < d->size(); ++i) {
        if ((*d)[i] != T{}) f(i, (*d)[i]);
      }
    } else {
      for (const auto& [k, v] : std::get<Sparse>(cells_)) {
        if (v != T{}) f(k, v);
      }
    }
  }

  std::uint64_t flat_index(std::span<const std::uint64_t> coords) const;
  std::vector<std::uint64_t> coords_of(std::uint64_t flat) const;

  bool same_cells(const MultiArray& other) const;

 private:
  std::vector<std::uint64_t> dims_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t cell_count_ = 1;
  std::variant<Dense, Sparse> cells_;
};

/// Product of dims; throws DataError on 64-bit overflow.
std::uint64_t checked_cell_count(std::span<const std::uint64_t> dims);

class ContingencyTable {
 public:
  ContingencyTable() = default;
  /// Throws DataError if the stored counts do not sum to `total`.
  ContingencyTable(MultiArray<Count> cells, Count total);

  const std::vector<std::uint64_t>& dims() const { return cells_.dims(); }
  const MultiArray<Count>& cells() const { return cells_; }
  Count total() const { return total_; }
  Count at(std::span<const std::uint64_t> coords) const {
    return cells_.get(cells_.flat_index(coords));
  }

 private:
  MultiArray<Count> cells_;
  Count total_ = 0;
};

enum class Method { closed_form, ipf };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view s);

struct TestResult {
  double g2 = 0.0;
  double chi2 = 0.0;
  std::uint64_t dof = 0;
  std::uint64_t dof_adjusted = 0;
  double log_p_g2 = 0.0;
  double log_p_chi2 = 0.0;
  std::uint64_t empty_strata = 0;
  Method method = Method::closed_form;
  /// Zero degrees of freedom; the p-values are reported as 1.
  bool degenerate = false;

  friend bool operator==(const TestResult&, const TestResult&) = default;
};

/// Hierarchical log-linear model given by its maximal generating classes.
/// Variable indices refer to table dimensions.
class LogLinearModel {
 public:
  using Class = std::vector<std::size_t>;

  LogLinearModel() = default;
  /// Sorts each class. Throws std::invalid_argument on duplicates inside a
  /// class or when one class is contained in another.
  explicit LogLinearModel(std::vector<Class> generating_classes);

  const std::vector<Class>& generating_classes() const { return classes_; }
  /// Throws std::invalid_argument when an index is not below `n_dims`.
  void check_dims(std::size_t n_dims) const;

  friend bool operator==(const LogLinearModel&, const LogLinearModel&) = default;

 private:
  std::vector<Class> classes_;
};

struct FitResult {
  MultiArray<double> fitted;
  double deviance = 0.0;
  double pearson = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::uint64_t model_dof = 0;
  /// Largest absolute gap between fitted and observed class margins at exit.
  double max_margin_error = 0.0;
};

}  // namespace pllci
