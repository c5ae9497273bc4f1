#include "pllci/tabulate.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace pllci {

std::ptrdiff_t SliceMarginals::find(std::uint64_t key) const {
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return -1;
  return it - keys_.begin();
}

ContingencyTable build_table(const Dataset& data, std::span<const std::size_t> vars,
                             std::uint64_t dense_threshold) {
  std::vector<std::uint64_t> dims;
  dims.reserve(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i] >= data.n_columns()) {
      throw SpecError("variable index " + std::to_string(vars[i]) + " is out of range");
    }
    if (std::find(vars.begin(), vars.begin() + i, vars[i]) != vars.begin() + i) {
      throw SpecError("variable index " + std::to_string(vars[i]) + " is repeated");
    }
    dims.push_back(data.levels(vars[i]));
  }

  MultiArray<Count> cells(dims, dense_threshold);
  const std::size_t n = data.n_rows();

  // Column-wise accumulation of the mixed-radix cell index keeps each pass
  // over a single contiguous code array.
  std::vector<std::uint64_t> flat(n, 0);
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const auto stride = cells.strides()[i];
    const auto& codes = data.column(vars[i]).codes;
    for (std::size_t r = 0; r < n; ++r) flat[r] += codes[r] * stride;
  }

  if (auto* dense = cells.dense()) {
    for (auto f : flat) ++(*dense)[f];
  } else {
    for (auto f : flat) cells.add(f, 1);
  }
  return ContingencyTable(std::move(cells), n);
}

ContingencyTable build_table(const Dataset& data, const TestSpec& spec,
                             std::uint64_t dense_threshold) {
  std::vector<std::size_t> vars;
  vars.reserve(spec.cs.size() + 2);
  vars.push_back(spec.x);
  vars.push_back(spec.y);
  vars.insert(vars.end(), spec.cs.begin(), spec.cs.end());
  return build_table(data, vars, dense_threshold);
}

SliceMarginals slice_marginals(const ContingencyTable& table) {
  const auto& dims = table.dims();
  if (dims.size() < 2) {
    throw std::invalid_argument("slice marginals need a table with at least two dimensions");
  }
  SliceMarginals m;
  m.dims_ = dims;
  m.dx_ = dims[0];
  m.dy_ = dims[1];
  m.total_ = table.total();
  m.dense_ = table.cells().is_dense();
  const std::uint64_t block = m.dx_ * m.dy_;
  m.slice_count_ = block == 0 ? 0 : table.cells().cell_count() / block;

  auto push_slice = [&m](std::uint64_t key) {
    m.keys_.push_back(key);
    m.n_xz_.resize(m.n_xz_.size() + m.dx_, 0);
    m.n_yz_.resize(m.n_yz_.size() + m.dy_, 0);
    m.n_z_.push_back(0);
  };

  if (const auto* dense = table.cells().dense()) {
    for (std::uint64_t z = 0; z < m.slice_count_; ++z) {
      const Count* cell = dense->data() + z * block;
      Count nz = 0;
      for (std::uint64_t c = 0; c < block; ++c) nz += cell[c];
      if (nz == 0) continue;
      push_slice(z);
      Count* nx = m.n_xz_.data() + (m.keys_.size() - 1) * m.dx_;
      Count* ny = m.n_yz_.data() + (m.keys_.size() - 1) * m.dy_;
      for (std::uint64_t y = 0; y < m.dy_; ++y) {
        for (std::uint64_t x = 0; x < m.dx_; ++x) {
          const Count v = cell[y * m.dx_ + x];
          nx[x] += v;
          ny[y] += v;
        }
      }
      m.n_z_.back() = nz;
    }
    return m;
  }

  // Sparse: group occupied cells by stratum, then emit in key order.
  std::map<std::uint64_t, std::vector<std::pair<std::uint64_t, Count>>> by_slice;
  table.cells().for_each_nonzero([&](std::uint64_t flat, Count v) {
    by_slice[flat / block].emplace_back(flat % block, v);
  });
  for (const auto& [z, cells] : by_slice) {
    push_slice(z);
    const std::size_t i = m.keys_.size() - 1;
    for (const auto& [within, v] : cells) {
      m.n_xz_[i * m.dx_ + within % m.dx_] += v;
      m.n_yz_[i * m.dy_ + within / m.dx_] += v;
      m.n_z_[i] += v;
    }
  }
  return m;
}

MultiArray<double> expected_ci(const SliceMarginals& m) {
  MultiArray<double> e(m.table_dims(), m.dense_table() ? kDenseThreshold : 0);
  const std::uint64_t dx = m.x_levels();
  const std::uint64_t dy = m.y_levels();
  const std::uint64_t block = dx * dy;
  for (std::size_t i = 0; i < m.occupied_count(); ++i) {
    const auto nx = m.n_xz(i);
    const auto ny = m.n_yz(i);
    const double nz = static_cast<double>(m.n_z(i));
    const std::uint64_t base = m.key(i) * block;
    if (auto* dense = e.dense()) {
      double* out = dense->data() + base;
      for (std::uint64_t y = 0; y < dy; ++y) {
        const double fy = static_cast<double>(ny[y]);
        for (std::uint64_t x = 0; x < dx; ++x) {
          out[y * dx + x] = static_cast<double>(nx[x]) * fy / nz;
        }
      }
    } else {
      for (std::uint64_t y = 0; y < dy; ++y) {
        for (std::uint64_t x = 0; x < dx; ++x) {
          e.set(base + y * dx + x, static_cast<double>(nx[x]) * static_cast<double>(ny[y]) / nz);
        }
      }
    }
  }
  return e;
}

}  // namespace pllci
