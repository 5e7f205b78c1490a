#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ftsvd/metrics.hpp"
#include "ftsvd/rng.hpp"
#include "ftsvd/tensor.hpp"

namespace ftsvd {

struct SimConfig {
    std::size_t p1 = 20;
    std::size_t p2 = 20;
    std::size_t n = 50;
    std::size_t r = 1;
    double lambda_min = 20.0;
    double sigma = 0.0;   ///< remainder amplitude
    double tau = 1.0;     ///< observation noise sd
    std::uint64_t seed = 0;
    std::size_t n_basis = 10;

    void validate() const;
};

/// u_1(s) = 1, u_i(s) = sqrt(2) cos((i - 1) pi s); i is 1-based.
double basis_eval(std::size_t i, double s, std::size_t n_basis = 10);

/// A function sum_i coeffs[i] u_{i+1}(s) in the cosine basis.
struct CosineFunction {
    std::vector<double> coeffs;

    double operator()(double s) const;
    /// Exact L2 norm (the basis is orthonormal).
    double l2_norm() const;
};

struct TrueComponent {
    double lambda = 0.0;
    Vector a;
    Vector b;
    CosineFunction xi;   ///< L2-unit
};

struct GroundTruth {
    std::vector<TrueComponent> components;
    /// Remainder Z_{ij.}, row-major over (i, j); each L2-unit.
    std::vector<CosineFunction> remainder;
    std::size_t p1 = 0;
    std::size_t p2 = 0;

    const CosineFunction& remainder_at(std::size_t i, std::size_t j) const { return remainder[i * p2 + j]; }
};

/// Independent named substreams of one seed, one per simulation role.
struct SimStreams {
    CounterRng vectors;
    CounterRng functions;
    CounterRng remainder;
    CounterRng grid;
    CounterRng noise;

    explicit SimStreams(std::uint64_t seed);
};

/// Coefficients x_i ~ Unif[-1/i, 1/i], i = 1..n_basis, scaled to unit L2 norm.
CosineFunction random_unit_function(CounterRng& rng, std::size_t n_basis);

/// Uniform draw on the unit sphere (Gaussian, then normalize).
Vector random_unit_vector(CounterRng& rng, std::size_t p);

/// Singular vectors, singular functions (lambda_l = lambda_min (r - l + 1))
/// and, when sigma > 0, the remainder functions.
GroundTruth gen_truth(const SimConfig& cfg, SimStreams& streams);
GroundTruth gen_truth(const SimConfig& cfg);

struct Dataset {
    Tensor3 y;
    TimeGrid grid;
};

/// Sorted Unif(0,1) grid; y = X(grid) + sigma Z(grid) + tau N(0,1).
/// Noise is drawn in (k, i, j) storage order.
Dataset gen_dataset(const SimConfig& cfg, const GroundTruth& truth, SimStreams& streams);

/// Truth and data from `cfg.seed` in one go.
struct Simulation {
    GroundTruth truth;
    Dataset data;
};
Simulation simulate(const SimConfig& cfg);

/// The noiseless signal X on `grid`.
Tensor3 signal_on_grid(const GroundTruth& truth, const TimeGrid& grid);

/// sigma * Z on the points of `grid`.
Tensor3 remainder_on_grid(const GroundTruth& truth, double sigma, const TimeGrid& grid);

/// sup_s ||sigma Z(s)|| over the grid points plus a uniform refinement grid
/// of `refine` points (0 disables refinement).
double remainder_sup_norm(const GroundTruth& truth, double sigma, const TimeGrid& grid, std::size_t refine = 512);

ScoredComponent scored(const TrueComponent& c, std::size_t quad_m = default_quadrature_size);
std::vector<ScoredComponent> scored(const std::vector<TrueComponent>& truth, std::size_t quad_m = default_quadrature_size);

}  // namespace ftsvd
