#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ftsvd/kernel.hpp"
#include "ftsvd/rkhs_function.hpp"
#include "ftsvd/tensor.hpp"

namespace ftsvd {

/// One singular triple (lambda, a, b, xi) with ||a|| = ||b|| = ||xi||_L2 = 1.
///
/// lambda is on the continuous scale: it is the projection coefficient of
/// the data onto a (x) b (x) xi_n, which for an L2-unit xi is close to the
/// coefficient in front of a (x) b (x) xi.
struct Component {
    double lambda = 0.0;
    Vector a;
    Vector b;
    RkhsFunction xi;

    /// a, b and the discretized xi packed for tensor arithmetic.
    Rank1Term discretized() const;
};

struct FitConfig {
    std::size_t rank = 1;
    std::size_t iters = 20;
    double c_lambda = default_c_lambda;
    /// Early stop once every successive sine distance drops below tol.
    double tol = 1e-8;
    std::size_t quad_m = default_quadrature_size;
    /// Keep every iterate in the trace (needed for error-vs-truth curves).
    bool keep_iterates = false;

    /// Throws ArgumentError unless all fields are positive and rank <= min(p1, p2).
    void validate(std::size_t p1, std::size_t p2) const;
};

/// One power-iteration step as seen by the trace. Iteration 0 is the
/// initialization (spectral a0, b0 and the first ridge fit).
struct IterationRecord {
    std::size_t iteration = 0;
    double step_a = 0.0;   ///< dist(a^(t), a^(t-1)); 0 at t = 0
    double step_b = 0.0;
    double step_xi = 0.0;
    double lambda = 0.0;   ///< projection coefficient at this iterate
    std::optional<Vector> a;
    std::optional<Vector> b;
    std::optional<Vector> beta;
};

struct ComponentTrace {
    std::vector<IterationRecord> iterations;
    bool early_stopped = false;
};

struct Decomposition {
    std::vector<Component> components;
    double residual_frob = 0.0;
    /// Residual Frobenius norm after each deflation.
    std::vector<double> residual_after;
    std::optional<double> bic;
    std::vector<ComponentTrace> trace;
    /// Set when a component vanished and the list was cut short.
    bool truncated = false;
    std::string truncation_reason;
    FitConfig config;
};

struct InitVectors {
    Vector a;
    Vector b;
};

/// Top left singular vectors of M1(y) and M2(y), via the eigen-decomposition
/// of M M' (p x p). Largest-magnitude entry made positive.
InitVectors spectral_init(const Tensor3& y);

/// Top left singular vector of `m` via the Gram route, sign fixed.
Vector top_left_singular_vector(const Matrix& m);

/// Regularized power iteration for one component from (a0, b0).
Component power_iteration(const Tensor3& y, const TimeGrid& grid, const Vector& a0, const Vector& b0,
                          const FitConfig& cfg, ComponentTrace* trace = nullptr);
Component power_iteration(const Tensor3& y, const RkhsBasis& basis, const Vector& a0, const Vector& b0,
                          const FitConfig& cfg, ComponentTrace* trace = nullptr);

/// Spectral init + power iteration + projection deflation, cfg.rank times.
Decomposition sequential_decompose(const Tensor3& y, const TimeGrid& grid, const FitConfig& cfg);

/// Residual sum of squares of y against the components discretized on grid.
double rss(const Tensor3& y, std::span<const Component> components, const TimeGrid& grid);

/// Multiply back the components on `grid`.
Tensor3 reconstruct(std::span<const Component> components, const TimeGrid& grid, std::size_t p1, std::size_t p2);

struct BicPenalty {
    double p_h = 0.0;        ///< effective dimension used in the penalty
    bool p_h_empirical = false;
};

struct RankSelection {
    std::size_t r_hat = 1;
    std::vector<double> bic;   ///< bic[r - 1]
    std::vector<double> rss;
    bool perfect_fit = false;
    BicPenalty penalty;
    Decomposition decomposition;  ///< the r_max fit the curve was read from
};

/// BIC(r) = 2 log RSS_r + log(p1 p2 n) / (p1 p2 n) * (p1 + p2 + p_H) r.
double bic_value(double rss, std::size_t p1, std::size_t p2, std::size_t n, double p_h, std::size_t r);

/// Sweep r = 1..r_max; ties go to the smaller r. `p_h` overrides the
/// effective dimension otherwise taken from the Bernoulli kernel spectrum.
RankSelection select_rank(const Tensor3& y, const TimeGrid& grid, std::size_t r_max, const FitConfig& cfg,
                          std::optional<double> p_h = std::nullopt);

/// max over pairs of |<a_i,a_j>|, |<b_i,b_j>|, |<xi_i,xi_j>_L2|.
double incoherence(std::span<const Component> components, std::size_t quad_m = default_quadrature_size);

}  // namespace ftsvd
