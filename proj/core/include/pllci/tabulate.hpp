#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pllci/core.hpp"

namespace pllci {

/// Per-stratum margins of a table laid out as (x, y, z_1..z_k). Only
/// occupied strata (n_z > 0) are stored; the stratum key is the
/// mixed-radix index of the z combination.
class SliceMarginals {
 public:
  std::uint64_t x_levels() const { return dx_; }
  std::uint64_t y_levels() const { return dy_; }
  /// Number of z combinations, occupied or not. 1 when k = 0.
  std::uint64_t slice_count() const { return slice_count_; }
  std::size_t occupied_count() const { return keys_.size(); }
  std::uint64_t empty_count() const { return slice_count_ - keys_.size(); }
  Count total() const { return total_; }
  const std::vector<std::uint64_t>& table_dims() const { return dims_; }
  bool dense_table() const { return dense_; }

  /// Key of the i-th occupied stratum (ascending).
  std::uint64_t key(std::size_t i) const { return keys_[i]; }
  std::span<const Count> n_xz(std::size_t i) const { return {n_xz_.data() + i * dx_, dx_}; }
  std::span<const Count> n_yz(std::size_t i) const { return {n_yz_.data() + i * dy_, dy_}; }
  Count n_z(std::size_t i) const { return n_z_[i]; }

  /// Position of stratum `key` among the occupied ones, or -1 when empty.
  std::ptrdiff_t find(std::uint64_t key) const;

 private:
  friend SliceMarginals slice_marginals(const ContingencyTable& table);

  std::vector<std::uint64_t> dims_;
  std::uint64_t dx_ = 0;
  std::uint64_t dy_ = 0;
  std::uint64_t slice_count_ = 0;
  Count total_ = 0;
  bool dense_ = true;
  std::vector<std::uint64_t> keys_;
  std::vector<Count> n_xz_;
  std::vector<Count> n_yz_;
  std::vector<Count> n_z_;
};

/// Cross-tabulates `vars` in a single pass over the rows. Cell
/// (v_1..v_m) counts the rows whose codes match; the first variable varies
/// fastest. An empty variable list yields a scalar table holding n_rows.
ContingencyTable build_table(const Dataset& data, std::span<const std::size_t> vars,
                             std::uint64_t dense_threshold = kDenseThreshold);

/// Table over (x, y, cs...) for a test specification.
ContingencyTable build_table(const Dataset& data, const TestSpec& spec,
                             std::uint64_t dense_threshold = kDenseThreshold);

/// Requires at least two dimensions; the first two are x and y.
SliceMarginals slice_marginals(const ContingencyTable& table);

/// E[x,y,z] = n_xz[x] * n_yz[y] / n_z on occupied strata, 0 elsewhere.
/// Storage follows the source table (dense or sparse).
MultiArray<double> expected_ci(const SliceMarginals& marginals);

}  // namespace pllci
