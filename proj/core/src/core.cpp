#include "pllci/core.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <sstream>

namespace pllci {

std::string CategoricalColumn::label_of(Code code) const {
  if (has_labels()) return labels.at(code);
  return std::to_string(code);
}

Dataset::Dataset(std::vector<CategoricalColumn> columns) : columns_(std::move(columns)) {
  n_rows_ = columns_.empty() ? 0 : columns_.front().codes.size();
  for (const auto& col : columns_) {
    if (col.codes.size() != n_rows_) {
      throw DataError("column '" + col.name + "' has " + std::to_string(col.codes.size()) +
                      " rows, expected " + std::to_string(n_rows_));
    }
    if (col.levels < 1) throw DataError("column '" + col.name + "' has no levels");
    if (col.has_labels() && col.labels.size() != col.levels) {
      throw DataError("column '" + col.name + "' has " + std::to_string(col.labels.size()) +
                      " labels for " + std::to_string(col.levels) + " levels");
    }
    Code max_code = 0;
    for (std::size_t r = 0; r < col.codes.size(); ++r) {
      if (col.codes[r] >= col.levels) {
        throw DataError("column '" + col.name + "' row " + std::to_string(r) + ": code " +
                        std::to_string(col.codes[r]) + " outside [0, " +
                        std::to_string(col.levels) + ")");
      }
      max_code = std::max(max_code, col.codes[r]);
    }
    // Unused top codes need labels to give them meaning.
    if (!col.has_labels() && n_rows_ > 0 && max_code + 1 != col.levels) {
      throw DataError("column '" + col.name + "' declares " + std::to_string(col.levels) +
                      " levels but only codes up to " + std::to_string(max_code) +
                      " occur and no labels are given");
    }
  }
}

std::optional<std::size_t> Dataset::find_column(std::string_view ref) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == ref) return i;
  }
  std::size_t idx = 0;
  auto [ptr, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), idx);
  if (ec == std::errc{} && ptr == ref.data() + ref.size() && idx < columns_.size()) return idx;
  return std::nullopt;
}

bool Dataset::same_observations(const Dataset& other) const {
  if (n_rows_ != other.n_rows_ || columns_.size() != other.columns_.size()) return false;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const auto& a = columns_[c];
    const auto& b = other.columns_[c];
    if (a.name != b.name) return false;
    for (std::size_t r = 0; r < n_rows_; ++r) {
      if (a.label_of(a.codes[r]) != b.label_of(b.codes[r])) return false;
    }
  }
  return true;
}

void validate_spec(const TestSpec& spec, const Dataset& data) {
  const std::size_t p = data.n_columns();
  auto check_range = [p](std::size_t idx, const char* role) {
    if (idx >= p) {
      throw SpecError(std::string(role) + " index " + std::to_string(idx) +
                      " is out of range (dataset has " + std::to_string(p) + " columns)");
    }
  };
  check_range(spec.x, "x");
  check_range(spec.y, "y");
  for (auto c : spec.cs) check_range(c, "cs");

  if (spec.x == spec.y) {
    throw SpecError("overlapping indices: " + std::to_string(spec.x) + " is used for both x and y");
  }
  std::vector<bool> seen(p, false);
  seen[spec.x] = true;
  seen[spec.y] = true;
  for (auto c : spec.cs) {
    if (seen[c]) {
      throw SpecError("overlapping indices: conditioning index " + std::to_string(c) +
                      " repeats x, y or another conditioning variable");
    }
    seen[c] = true;
  }
}

std::uint64_t checked_cell_count(std::span<const std::uint64_t> dims) {
  std::uint64_t n = 1;
  for (auto d : dims) {
    if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d) {
      throw DataError("table has more than 2^64 cells");
    }
    n *= d;
  }
  return n;
}

template <typename T>
MultiArray<T>::MultiArray(std::vector<std::uint64_t> dims, std::uint64_t dense_threshold)
    : dims_(std::move(dims)) {
  cell_count_ = checked_cell_count(dims_);
  strides_.resize(dims_.size());
  std::uint64_t stride = 1;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    strides_[i] = stride;
    stride *= dims_[i];
  }
  if (cell_count_ <= dense_threshold) {
    cells_ = Dense(cell_count_, T{});
  } else {
    cells_ = Sparse{};
  }
}

template <typename T>
void MultiArray<T>::set(std::uint64_t flat, T value) {
  if (auto* d = std::get_if<Dense>(&cells_)) {
    (*d)[flat] = value;
    return;
  }
  auto& s = std::get<Sparse>(cells_);
  if (value == T{}) {
    s.erase(flat);
  } else {
    s[flat] = value;
  }
}

template <typename T>
std::uint64_t MultiArray<T>::flat_index(std::span<const std::uint64_t> coords) const {
  if (coords.size() != dims_.size()) throw std::invalid_argument("coordinate rank mismatch");
  std::uint64_t flat = 0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] >= dims_[i]) throw std::out_of_range("coordinate out of range");
    flat += coords[i] * strides_[i];
  }
  return flat;
}

template <typename T>
std::vector<std::uint64_t> MultiArray<T>::coords_of(std::uint64_t flat) const {
  std::vector<std::uint64_t> out(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    out[i] = flat % dims_[i];
    flat /= dims_[i];
  }
  return out;
}

template <typename T>
bool MultiArray<T>::same_cells(const MultiArray& other) const {
  if (dims_ != other.dims_) return false;
  bool same = true;
  for_each_nonzero([&](std::uint64_t k, T v) { same = same && other.get(k) == v; });
  other.for_each_nonzero([&](std::uint64_t k, T v) { same = same && get(k) == v; });
  return same;
}

template class MultiArray<Count>;
template class MultiArray<double>;

ContingencyTable::ContingencyTable(MultiArray<Count> cells, Count total)
    : cells_(std::move(cells)), total_(total) {
  Count sum = 0;
  cells_.for_each_nonzero([&](std::uint64_t, Count v) { sum += v; });
  if (sum != total_) {
    throw DataError("cell counts sum to " + std::to_string(sum) + ", expected total " +
                    std::to_string(total_));
  }
}

std::string_view to_string(Method m) {
  return m == Method::closed_form ? "closed_form" : "ipf";
}

std::optional<Method> parse_method(std::string_view s) {
  if (s == "closed_form" || s == "closed") return Method::closed_form;
  if (s == "ipf") return Method::ipf;
  return std::nullopt;
}

LogLinearModel::LogLinearModel(std::vector<Class> generating_classes)
    : classes_(std::move(generating_classes)) {
  for (auto& c : classes_) {
    std::sort(c.begin(), c.end());
    if (std::adjacent_find(c.begin(), c.end()) != c.end()) {
      throw std::invalid_argument("generating class repeats a variable");
    }
  }
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    for (std::size_t j = 0; j < classes_.size(); ++j) {
      if (i == j) continue;
      if (std::includes(classes_[j].begin(), classes_[j].end(), classes_[i].begin(),
                        classes_[i].end())) {
        throw std::invalid_argument("generating class " + std::to_string(i) +
                                    " is contained in class " + std::to_string(j));
      }
    }
  }
}

void LogLinearModel::check_dims(std::size_t n_dims) const {
  for (const auto& c : classes_) {
    for (auto v : c) {
      if (v >= n_dims) {
        throw std::invalid_argument("model variable " + std::to_string(v) +
                                    " is not a table dimension (table has " +
                                    std::to_string(n_dims) + ")");
      }
    }
  }
}

}  // namespace pllci
