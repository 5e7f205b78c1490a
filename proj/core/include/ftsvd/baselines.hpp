#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ftsvd/rkhs_function.hpp"
#include "ftsvd/tensor.hpp"

namespace ftsvd {

/// Tabular CP component: the time mode is a plain unit vector on the grid.
struct CpComponent {
    double lambda = 0.0;
    Vector a;
    Vector b;
    Vector v;
};

struct CpConfig {
    std::size_t rank = 1;
    std::size_t n_init = 20;
    std::size_t iters = 20;
    std::uint64_t seed = 0;
};

/// Classic tensor power iteration with random restarts and projection
/// deflation. Each restart draws unit (a0, b0), sets v0 from y x1 a0 x2 b0,
/// then alternates normalized mode products; the restart with the largest
/// |y x1 a x2 b x3 v| wins (lowest index on ties).
std::vector<CpComponent> cp_decompose(const Tensor3& y, const CpConfig& cfg);

/// Minimal H-norm interpolant: beta = (K + jitter I)^{-1} values.
RkhsFunction interpolate_min_hnorm(const Vector& values, const TimeGrid& grid, double jitter = 1e-10);

}  // namespace ftsvd
