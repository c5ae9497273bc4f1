#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "pllci/core.hpp"

namespace pllci {

/// Conditional-independence model for a table laid out as
/// (x, y, z_1..z_k): generating classes {x, z...} and {y, z...}. For k = 0
/// this is the main-effects independence model.
LogLinearModel ci_model(std::size_t k);

/// Single class containing every variable.
LogLinearModel saturated_model(std::size_t n_dims);

struct IpfOptions {
  double tol = 1e-8;
  std::size_t max_iter = 50;
};

/// Fits a hierarchical Poisson log-linear model by iterative proportional
/// fitting, starting from all-ones on the cells whose class margins are all
/// positive. A cycle rescales once per generating class; the fit converges
/// when every fitted class margin is within `tol` (absolute) of the
/// observed one. A non-converged fit is returned with converged = false.
///
/// Throws DataError on an empty table and std::invalid_argument when the
/// model refers to a variable the table does not have.
FitResult ipf_fit(const ContingencyTable& table, const LogLinearModel& model,
                  const IpfOptions& options = {});

/// Residual degrees of freedom: cells minus free parameters, where the
/// parameter count sums prod(d_i - 1) over every distinct subset of some
/// generating class (the empty subset is the intercept).
std::uint64_t model_dof(std::span<const std::uint64_t> dims, const LogLinearModel& model);

}  // namespace pllci
