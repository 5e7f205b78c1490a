#pragma once

#include "ftsvd/tensor.hpp"

namespace ftsvd {

inline constexpr double default_pseudocount = 0.5;

/// Log-composition over mode 2:
/// y(i, j, k) = log((c(i, j, k) + pc) / sum_j' (c(i, j', k) + pc)).
/// Counts must be non-negative integers (DataError otherwise).
Tensor3 log_composition(const Tensor3& counts, double pseudocount = default_pseudocount);

}  // namespace ftsvd
