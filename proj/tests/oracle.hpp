#pragma once

// Independent reference implementations used only by the tests. Nothing in
// here calls into the tabulation, statistic or special-function code it is
// checked against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pllci/core.hpp"

namespace oracle {

using pllci::Code;
using pllci::Dataset;

/// Dataset of independent uniform columns with the given level counts.
/// Every level is forced to appear at least once so the no-label invariant
/// holds.
inline Dataset random_dataset(std::mt19937_64& rng, std::size_t n, const std::vector<Code>& levels) {
  std::vector<pllci::CategoricalColumn> cols(levels.size());
  for (std::size_t c = 0; c < levels.size(); ++c) {
    cols[c].name = "c" + std::to_string(c);
    cols[c].levels = levels[c];
    std::uniform_int_distribution<Code> pick(0, levels[c] - 1);
    for (std::size_t r = 0; r < n; ++r) {
      cols[c].codes.push_back(r < levels[c] ? static_cast<Code>(r) : pick(rng));
    }
    std::shuffle(cols[c].codes.begin(), cols[c].codes.end(), rng);
  }
  return Dataset(std::move(cols));
}

/// Dense multi-way table stored as a nested-loop friendly map from the full
/// coordinate tuple to its count.
using Cells = std::map<std::vector<std::uint64_t>, std::uint64_t>;

/// Enumerates every coordinate tuple of `dims` in lexicographic order.
inline std::vector<std::vector<std::uint64_t>> all_coords(const std::vector<std::uint64_t>& dims) {
  std::vector<std::vector<std::uint64_t>> out{{}};
  for (auto d : dims) {
    std::vector<std::vector<std::uint64_t>> next;
    for (const auto& prefix : out) {
      for (std::uint64_t v = 0; v < d; ++v) {
        auto c = prefix;
        c.push_back(v);
        next.push_back(std::move(c));
      }
    }
    out = std::move(next);
  }
  return out;
}

/// Per-cell recount: for every cell, scan all rows and count the matches.
inline Cells recount(const Dataset& data, const std::vector<std::size_t>& vars) {
  std::vector<std::uint64_t> dims;
  for (auto v : vars) dims.push_back(data.levels(v));
  Cells cells;
  for (const auto& coord : all_coords(dims)) {
    std::uint64_t count = 0;
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
      bool match = true;
      for (std::size_t i = 0; i < vars.size() && match; ++i) {
        match = data.column(vars[i]).codes[r] == coord[i];
      }
      count += match;
    }
    cells[coord] = count;
  }
  return cells;
}

struct Slice {
  std::vector<std::uint64_t> n_x;
  std::vector<std::uint64_t> n_y;
  std::uint64_t n = 0;
};

/// Slice margins keyed by the z part of the coordinate.
inline std::map<std::vector<std::uint64_t>, Slice> slices(const Cells& cells,
                                                          std::uint64_t dx, std::uint64_t dy) {
  std::map<std::vector<std::uint64_t>, Slice> out;
  for (const auto& [coord, count] : cells) {
    std::vector<std::uint64_t> z(coord.begin() + 2, coord.end());
    auto& s = out[z];
    if (s.n_x.empty()) {
      s.n_x.assign(dx, 0);
      s.n_y.assign(dy, 0);
    }
    s.n_x[coord[0]] += count;
    s.n_y[coord[1]] += count;
    s.n += count;
  }
  return out;
}

inline std::map<std::vector<std::uint64_t>, double> expected(const Cells& cells, std::uint64_t dx,
                                                             std::uint64_t dy) {
  const auto sl = slices(cells, dx, dy);
  std::map<std::vector<std::uint64_t>, double> e;
  for (const auto& [coord, count] : cells) {
    std::vector<std::uint64_t> z(coord.begin() + 2, coord.end());
    const auto& s = sl.at(z);
    e[coord] = s.n == 0 ? 0.0
                        : static_cast<double>(s.n_x[coord[0]]) * static_cast<double>(s.n_y[coord[1]]) /
                              static_cast<double>(s.n);
  }
  return e;
}

inline double g2(const Cells& cells, const std::map<std::vector<std::uint64_t>, double>& e) {
  long double s = 0;
  for (const auto& [coord, count] : cells) {
    if (count > 0) s += count * std::log(static_cast<long double>(count) / e.at(coord));
  }
  return static_cast<double>(2 * s);
}

inline double chi2(const Cells& cells, const std::map<std::vector<std::uint64_t>, double>& e) {
  long double s = 0;
  for (const auto& [coord, count] : cells) {
    const long double ev = e.at(coord);
    if (ev > 0) s += (count - ev) * (count - ev) / ev;
  }
  return static_cast<double>(s);
}

/// ln P(chi2_dof > stat) by adaptive Gauss-Kronrod quadrature of the
/// density after the substitution t = u^2, which removes the t^(-1/2)
/// singularity at 0. The integrand is scaled by its maximum over the range
/// so the result stays representable far into the tail.
inline double log_sf_quadrature(double stat, unsigned dof) {
  const double k = dof;
  const double log_c = -(k / 2) * std::log(2.0) - std::lgamma(k / 2) + std::log(2.0);
  auto log_g = [&](double u) { return log_c + (k - 1) * std::log(u) - u * u / 2; };
  const double lo = std::sqrt(stat);
  const double mode = std::sqrt(std::max(k - 1, 0.0));
  const double peak = std::max(lo, mode);
  const double log_scale = lo == 0.0 && dof == 1 ? log_c : log_g(std::max(peak, 1e-300));
  const double hi = peak + 40.0 + 10.0 * std::sqrt(k);
  auto f = [&](double u) { return u <= 0.0 ? (dof == 1 ? 1.0 : 0.0) : std::exp(log_g(u) - log_scale); };
  double err = 0;
  double pieces = 0.0;
  // Split at the mode so each panel is unimodal.
  if (lo < mode) {
    pieces += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, mode, 15, 1e-13, &err);
    pieces += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, mode, hi, 15, 1e-13, &err);
  } else {
    pieces += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-13, &err);
  }
  return std::log(pieces) + log_scale;
}

/// Free-parameter count by explicit enumeration of the distinct subsets of
/// every generating class.
inline std::uint64_t enumerated_model_dof(const std::vector<std::uint64_t>& dims,
                                          const std::vector<std::vector<std::size_t>>& classes) {
  std::set<std::vector<std::size_t>> subsets;
  for (const auto& c : classes) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << c.size()); ++mask) {
      std::vector<std::size_t> s;
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (mask >> i & 1) s.push_back(c[i]);
      }
      std::sort(s.begin(), s.end());
      subsets.insert(s);
    }
  }
  std::uint64_t params = 0;
  for (const auto& s : subsets) {
    std::uint64_t w = 1;
    for (auto v : s) w *= dims[v] - 1;
    params += w;
  }
  std::uint64_t cells = 1;
  for (auto d : dims) cells *= d;
  return cells - params;
}

inline bool rel_close(double a, double b, double rel, double abs_floor = 1e-12) {
  return std::fabs(a - b) <= std::max(rel * std::max(std::fabs(a), std::fabs(b)), abs_floor);
}

}  // namespace oracle
