#include "pllci/loglinear.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <iterator>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace pllci {

LogLinearModel ci_model(std::size_t k) {
  LogLinearModel::Class with_x{0};
  LogLinearModel::Class with_y{1};
  for (std::size_t i = 0; i < k; ++i) {
    with_x.push_back(i + 2);
    with_y.push_back(i + 2);
  }
  return LogLinearModel({std::move(with_x), std::move(with_y)});
}

LogLinearModel saturated_model(std::size_t n_dims) {
  LogLinearModel::Class all(n_dims);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return LogLinearModel({std::move(all)});
}

namespace {

// Projection of table cells onto the margin of one generating class.
struct ClassMargin {
  std::vector<std::size_t> vars;
  std::vector<std::uint64_t> margin_strides;
  std::uint64_t margin_size = 1;
  // Key -> slot compression, used only when the margin is too large to
  // index directly.
  bool compressed = false;
  std::unordered_map<std::uint64_t, std::uint32_t> slot_of_key;
  std::size_t slot_count = 0;

  std::vector<double> observed;
  std::vector<double> fitted;
  std::vector<std::uint32_t> slot;  // per support cell
};

std::uint64_t margin_key(const ClassMargin& cm, const MultiArray<Count>& cells,
                         std::uint64_t flat) {
  std::uint64_t key = 0;
  for (std::size_t j = 0; j < cm.vars.size(); ++j) {
    const auto v = cm.vars[j];
    key += (flat / cells.strides()[v]) % cells.dims()[v] * cm.margin_strides[j];
  }
  return key;
}

// Observed margin of one class, as (key, count) pairs with positive count.
std::unordered_map<std::uint64_t, Count> positive_margin(const ClassMargin& cm,
                                                         const MultiArray<Count>& cells) {
  std::unordered_map<std::uint64_t, Count> out;
  cells.for_each_nonzero(
      [&](std::uint64_t flat, Count v) { out[margin_key(cm, cells, flat)] += v; });
  return out;
}

// Cells on which every class margin is positive, enumerated by joining the
// positive margins class by class. Variables outside every class range over
// all their levels.
std::vector<std::uint64_t> joined_support(const std::vector<ClassMargin>& margins,
                                          const MultiArray<Count>& cells) {
  const auto& dims = cells.dims();
  const auto& strides = cells.strides();
  std::vector<bool> assigned(dims.size(), false);
  std::vector<std::uint64_t> partial{0};

  for (const auto& cm : margins) {
    std::vector<std::size_t> shared;
    std::vector<std::size_t> fresh;
    for (auto v : cm.vars) (assigned[v] ? shared : fresh).push_back(v);

    // shared-variable key -> flat contributions of the fresh variables
    std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> extensions;
    for (const auto& [key, count] : positive_margin(cm, cells)) {
      std::uint64_t shared_key = 0;
      std::uint64_t fresh_flat = 0;
      for (std::size_t j = 0; j < cm.vars.size(); ++j) {
        const auto v = cm.vars[j];
        const std::uint64_t code = key / cm.margin_strides[j] % dims[v];
        if (assigned[v]) {
          shared_key += code * strides[v];
        } else {
          fresh_flat += code * strides[v];
        }
      }
      extensions[shared_key].push_back(fresh_flat);
    }

    std::vector<std::uint64_t> next;
    for (auto p : partial) {
      std::uint64_t shared_key = 0;
      for (auto v : shared) shared_key += (p / strides[v]) % dims[v] * strides[v];
      auto it = extensions.find(shared_key);
      if (it == extensions.end()) continue;
      for (auto f : it->second) next.push_back(p + f);
    }
    partial = std::move(next);
    for (auto v : fresh) assigned[v] = true;
  }

  for (std::size_t v = 0; v < dims.size(); ++v) {
    if (assigned[v]) continue;
    std::vector<std::uint64_t> next;
    next.reserve(partial.size() * dims[v]);
    for (auto p : partial) {
      for (std::uint64_t c = 0; c < dims[v]; ++c) next.push_back(p + c * strides[v]);
    }
    partial = std::move(next);
  }
  std::sort(partial.begin(), partial.end());
  return partial;
}

void accumulate_fitted(ClassMargin& cm, const std::vector<double>& fitted) {
  std::fill(cm.fitted.begin(), cm.fitted.end(), 0.0);
  for (std::size_t i = 0; i < fitted.size(); ++i) cm.fitted[cm.slot[i]] += fitted[i];
}

}  // namespace

FitResult ipf_fit(const ContingencyTable& table, const LogLinearModel& model,
                  const IpfOptions& options) {
  if (table.total() == 0) throw DataError("cannot fit a log-linear model to an empty table");
  const auto& cells = table.cells();
  const auto& dims = cells.dims();
  model.check_dims(dims.size());

  std::vector<ClassMargin> margins(model.generating_classes().size());
  for (std::size_t c = 0; c < margins.size(); ++c) {
    auto& cm = margins[c];
    cm.vars = model.generating_classes()[c];
    cm.margin_strides.resize(cm.vars.size());
    for (std::size_t j = 0; j < cm.vars.size(); ++j) {
      cm.margin_strides[j] = cm.margin_size;
      cm.margin_size *= dims[cm.vars[j]];
    }
    cm.compressed = cm.margin_size > kDenseThreshold;
  }

  // Support: every cell for dense tables (structural zeros are cleared
  // below), the positive-margin join otherwise.
  const bool full_support = cells.is_dense();
  std::vector<std::uint64_t> support;
  if (!full_support) support = joined_support(margins, cells);
  const std::size_t support_size = full_support ? cells.cell_count() : support.size();
  auto flat_at = [&](std::size_t i) -> std::uint64_t {
    return full_support ? i : support[i];
  };

  for (auto& cm : margins) {
    cm.slot.resize(support_size);
    for (std::size_t i = 0; i < support_size; ++i) {
      const auto key = margin_key(cm, cells, flat_at(i));
      if (cm.compressed) {
        auto [it, inserted] =
            cm.slot_of_key.try_emplace(key, static_cast<std::uint32_t>(cm.slot_of_key.size()));
        cm.slot[i] = it->second;
      } else {
        cm.slot[i] = static_cast<std::uint32_t>(key);
      }
    }
    cm.slot_count = cm.compressed ? cm.slot_of_key.size() : cm.margin_size;
    cm.observed.assign(cm.slot_count, 0.0);
    cm.fitted.assign(cm.slot_count, 0.0);
  }

  // Observed counts aligned with the support.
  std::vector<double> observed(support_size, 0.0);
  if (full_support) {
    const auto& dense = *cells.dense();
    for (std::size_t i = 0; i < support_size; ++i) observed[i] = static_cast<double>(dense[i]);
  } else {
    for (std::size_t i = 0; i < support_size; ++i) {
      observed[i] = static_cast<double>(cells.get(support[i]));
    }
  }
  for (auto& cm : margins) {
    for (std::size_t i = 0; i < support_size; ++i) cm.observed[cm.slot[i]] += observed[i];
  }

  std::vector<double> fitted(support_size, 1.0);
  for (const auto& cm : margins) {
    for (std::size_t i = 0; i < support_size; ++i) {
      if (cm.observed[cm.slot[i]] == 0.0) fitted[i] = 0.0;
    }
  }

  FitResult result;
  auto max_gap = [&]() {
    double gap = 0.0;
    for (auto& cm : margins) {
      accumulate_fitted(cm, fitted);
      for (std::size_t s = 0; s < cm.slot_count; ++s) {
        gap = std::max(gap, std::fabs(cm.fitted[s] - cm.observed[s]));
      }
    }
    return gap;
  };

  do {
    for (auto& cm : margins) {
      accumulate_fitted(cm, fitted);
      for (std::size_t i = 0; i < support_size; ++i) {
        const double f = cm.fitted[cm.slot[i]];
        fitted[i] = f > 0.0 ? fitted[i] * (cm.observed[cm.slot[i]] / f) : 0.0;
      }
    }
    ++result.iterations;
    result.max_margin_error = max_gap();
    result.converged = result.max_margin_error < options.tol;
  } while (!result.converged && result.iterations < options.max_iter);

  double deviance = 0.0;
  double pearson = 0.0;
  for (std::size_t i = 0; i < support_size; ++i) {
    const double n = observed[i];
    const double f = fitted[i];
    if (n > 0.0) {
      deviance += f > 0.0 ? n * std::log(n / f) : std::numeric_limits<double>::infinity();
    }
    if (f > 0.0) pearson += (n - f) * (n - f) / f;
  }
  // Observed cells outside the support cannot occur: their class margins
  // are all positive by construction.
  result.deviance = std::max(0.0, 2.0 * deviance);
  result.pearson = pearson;

  result.fitted = MultiArray<double>(dims, full_support ? kDenseThreshold : 0);
  if (auto* dense = result.fitted.dense()) {
    *dense = std::move(fitted);
  } else {
    for (std::size_t i = 0; i < support_size; ++i) result.fitted.set(flat_at(i), fitted[i]);
  }
  result.model_dof = model_dof(dims, model);
  return result;
}

std::uint64_t model_dof(std::span<const std::uint64_t> dims, const LogLinearModel& model) {
  model.check_dims(dims.size());
  const auto& classes = model.generating_classes();
  if (classes.size() > 30) {
    throw std::invalid_argument("model_dof supports at most 30 generating classes");
  }
  const std::uint64_t cells = checked_cell_count(dims);

  // The distinct subsets of class C contribute prod_{v in C} d_v in total,
  // and the subsets common to several classes are exactly the subsets of
  // their intersection, so the union is counted by inclusion-exclusion over
  // sets of classes.
  std::uint64_t plus = 0;
  std::uint64_t minus = 0;
  const std::uint32_t n = static_cast<std::uint32_t>(classes.size());
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
    std::vector<std::size_t> common;
    bool first = true;
    for (std::uint32_t c = 0; c < n; ++c) {
      if (!(mask & (std::uint32_t{1} << c))) continue;
      if (first) {
        common = classes[c];
        first = false;
      } else {
        std::vector<std::size_t> meet;
        std::set_intersection(common.begin(), common.end(), classes[c].begin(),
                              classes[c].end(), std::back_inserter(meet));
        common = std::move(meet);
      }
    }
    std::uint64_t weight = 1;
    for (auto v : common) weight *= dims[v];
    (std::popcount(mask) % 2 == 1 ? plus : minus) += weight;
  }
  return cells - (plus - minus);
}

}  // namespace pllci
