#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ftsvd/tensor.hpp"

namespace ftsvd {

enum class KernelKind { bernoulli_w22, eigen_list };

/// Which reproducing kernel is in use, plus (optionally) its eigenvalues.
///
/// `bernoulli_w22` is the rescaled Bernoulli-polynomial kernel of the
/// Sobolev space W^{2,2}[0,1]; it is the only kind that can be evaluated
/// pointwise. `eigen_list` carries just a non-increasing eigenvalue list and
/// is used for the spectral diagnostics (effective dimension, Q_n, zeta_n).
struct KernelSpec {
    KernelKind kind = KernelKind::bernoulli_w22;
    std::vector<double> eigenvalues;

    static KernelSpec bernoulli() { return {}; }
    /// Validates the list: finite, non-negative, non-increasing, mu_1 <= 1.
    static KernelSpec from_eigenvalues(std::vector<double> mu);

    /// Explicit eigenvalues if present, otherwise (for the Bernoulli kernel)
    /// the empirical estimate from `empirical_eigenvalues()`.
    std::vector<double> spectrum() const;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

const char* to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& s);

/// K(x, y) = 1 + k1(x)k1(y) + k2(x)k2(y) - k4(|x - y|).
double kernel_eval(double x, double y);

/// Gram matrix K(s_u, s_v) of the Bernoulli kernel.
Matrix gram(const TimeGrid& grid);

/// Kernel cross-matrix K(x_u, s_v), rows over `points`, columns over `grid`.
Matrix cross_gram(std::span<const double> points, const TimeGrid& grid);

/// Nystrom estimate of the Bernoulli kernel eigenvalues: eigenvalues of
/// Gram / m on the m-point midpoint grid, descending, truncated below
/// 1e-14 * mu_1. Approximate by construction.
std::vector<double> empirical_eigenvalues(std::size_t m = 512);

/// p_H = sum_k mu_k^2 / mu_1^2.
double effective_dimension(const KernelSpec& spec);

/// Q_n(delta) = ( sum_k min(delta^2, mu_k) / n )^{1/2} over the stored list.
double q_n(double delta, const KernelSpec& spec, std::size_t n);

/// Smallest zeta >= sqrt(log n / n) with Q_n(delta) <= zeta delta + zeta^2
/// for every delta in {2^-m : m = 0..40}, by bisection to 1e-10.
double zeta_n(const KernelSpec& spec, std::size_t n);

/// The dyadic delta lattice used by `zeta_n`.
std::vector<double> zeta_check_lattice();

}  // namespace ftsvd
