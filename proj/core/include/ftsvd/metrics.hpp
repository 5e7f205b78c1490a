#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ftsvd/ftsvd.hpp"
#include "ftsvd/tensor.hpp"

namespace ftsvd {

/// sqrt(1 - cos^2(u, v)), clamped to [0, 1]. Throws on a zero vector.
double dist_vec(const Vector& u, const Vector& v);

/// Sine distance of two functions given by their values on a shared
/// midpoint quadrature grid.
double dist_sampled(const Vector& f_on_quad, const Vector& g_on_quad);

double dist_fun(const RkhsFunction& f, const RkhsFunction& g, std::size_t quad_m = default_quadrature_size);
double dist_fun(const std::function<double(double)>& f, const std::function<double(double)>& g,
                std::size_t quad_m = default_quadrature_size);

/// Function values at the midpoint quadrature nodes.
Vector sample_on_quadrature(const RkhsFunction& f, std::size_t quad_m = default_quadrature_size);
Vector sample_on_quadrature(const std::function<double(double)>& f, std::size_t quad_m = default_quadrature_size);

/// What the scorer needs from a component: both vectors and the function on
/// the quadrature grid.
struct ScoredComponent {
    Vector a;
    Vector b;
    Vector xi_on_quad;
};

ScoredComponent scored(const Component& c, std::size_t quad_m = default_quadrature_size);

struct ComponentErrors {
    double dist_a = 0.0;
    double dist_b = 0.0;
    double dist_xi = 0.0;
};

struct EvalReport {
    /// errors[l] compares truth l with estimate matching[l].
    std::vector<ComponentErrors> errors;
    std::vector<std::size_t> matching;
    ComponentErrors mean;
    ComponentErrors sd;
};

/// Greedy matching on mode-1 |cos| (largest pair first, ties to the lowest
/// indices), then all three distances per pair.
EvalReport match_and_score(std::span<const ScoredComponent> estimated, std::span<const ScoredComponent> truth);
EvalReport match_and_score(std::span<const Component> estimated, std::span<const Component> truth,
                           std::size_t quad_m = default_quadrature_size);

/// Mean and sample sd of the per-component errors, in a fixed order.
EvalReport summarize(std::vector<ComponentErrors> errors, std::vector<std::size_t> matching);

/// Largest singular value of a matrix.
double spectral_norm(const Matrix& m);

/// max over time slices of the slice spectral norm (grid proxy for the sup).
double remainder_sup_norm(const Tensor3& z);

/// T(i, k) = sum_j b_j y(i, j, k).
Matrix aggregate_trajectories(const Tensor3& y, const Vector& b);

struct TrajectoryBand {
    std::size_t time_index = 0;
    std::string group;
    double mean = 0.0;
    double low = 0.0;
    double high = 0.0;
};

inline constexpr double band_multiplier = 1.64;

/// Per (group, time index): mean and mean -/+ 1.64 * SEM over the rows of
/// `trajectories` that carry that label. Groups appear in first-seen order.
std::vector<TrajectoryBand> trajectory_bands(const Matrix& trajectories, std::span<const std::string> labels);

}  // namespace ftsvd
