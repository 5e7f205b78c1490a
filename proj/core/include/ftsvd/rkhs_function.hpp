#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "ftsvd/kernel.hpp"
#include "ftsvd/tensor.hpp"

namespace ftsvd {

inline constexpr std::size_t default_quadrature_size = 1024;
inline constexpr double default_c_lambda = 1e-5;

/// f(.) = sum_k beta_k K(., s_k) anchored on `grid`.
struct RkhsFunction {
    TimeGrid grid;
    Vector beta;
    KernelSpec spec;

    static RkhsFunction zero(const TimeGrid& grid) { return {grid, Vector::Zero(Eigen::Index(grid.size())), {}}; }
};

/// Midpoints (u + 1/2) / m, u = 0..m-1.
std::vector<double> quadrature_points(std::size_t m = default_quadrature_size);

/// Everything the ridge update needs for one grid: the Gram matrix, the
/// Cholesky factor of K + c_lambda I, and the kernel cross-matrix at the
/// quadrature nodes. Immutable once built; share it across threads freely.
class RkhsBasis {
public:
    RkhsBasis(TimeGrid grid, double c_lambda, std::size_t quad_m = default_quadrature_size);

    static std::shared_ptr<const RkhsBasis> make(TimeGrid grid, double c_lambda,
                                                 std::size_t quad_m = default_quadrature_size) {
        return std::make_shared<const RkhsBasis>(std::move(grid), c_lambda, quad_m);
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    double c_lambda() const noexcept { return c_lambda_; }
    std::size_t quad_m() const noexcept { return quad_m_; }
    const Matrix& gram() const noexcept { return gram_; }

    /// (K + c_lambda I)^{-1} rhs.
    Vector solve(const Vector& rhs) const;

    /// f evaluated at the quadrature nodes.
    Vector on_quadrature(const Vector& beta) const { return quad_cross_ * beta; }
    double l2_norm(const Vector& beta) const;
    double integral(const Vector& beta) const;

private:
    TimeGrid grid_;
    double c_lambda_;
    std::size_t quad_m_;
    Matrix gram_;
    Eigen::LLT<Matrix> factor_;
    Matrix quad_cross_;
};

/// Ridge fit of the weighted mean function:
/// beta = (K + c_lambda I)^{-1} M3(y) (a (x) b). a and b must be unit vectors.
RkhsFunction fit_weighted_mean(const Tensor3& y, const Vector& a, const Vector& b, const TimeGrid& grid,
                               double c_lambda = default_c_lambda);
RkhsFunction fit_weighted_mean(const Tensor3& y, const Vector& a, const Vector& b, const RkhsBasis& basis);

/// f at arbitrary points in [0, 1].
Vector evaluate(const RkhsFunction& f, std::span<const double> points);

/// (f(s_1), ..., f(s_n)) on `grid`.
Vector discretize(const RkhsFunction& f, const TimeGrid& grid);

/// Midpoint-rule L2 norm on m subintervals of [0, 1].
double l2_norm(const RkhsFunction& f, std::size_t m = default_quadrature_size);

struct NormalizedFunction {
    RkhsFunction unit;
    double norm = 0.0;
};

/// Scale to unit L2 norm and fix the sign: integral of f non-negative, or if
/// |integral| < 1e-10, the largest-magnitude beta entry positive.
/// Throws DegenerateError when the norm is below 1e-12.
NormalizedFunction normalize(const RkhsFunction& f, std::size_t m = default_quadrature_size);

/// Same rule applied to a raw coefficient vector using a prepared basis.
/// Returns the norm; `beta` is rescaled in place.
double normalize_in_place(Vector& beta, const RkhsBasis& basis);

/// ||f||_H^2 = beta' K beta.
double h_norm_sq(const RkhsFunction& f);

}  // namespace ftsvd
