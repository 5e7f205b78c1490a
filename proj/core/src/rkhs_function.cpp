#include "ftsvd/rkhs_function.hpp"

#include <cmath>

#include "ftsvd/error.hpp"

namespace ftsvd {

namespace {

constexpr double unit_tolerance = 1e-8;
constexpr double degenerate_norm = 1e-12;
constexpr double zero_integral = 1e-10;

void check_same_grid(const RkhsFunction& f) {
    if (std::size_t(f.beta.size()) != f.grid.size()) throw ArgumentError("RkhsFunction: beta length does not match grid");
}

// Sign rule shared by both normalize entry points.
double orientation(const Vector& beta, double integral) {
    if (std::abs(integral) >= zero_integral) return integral < 0.0 ? -1.0 : 1.0;
    Eigen::Index arg = 0;
    beta.cwiseAbs().maxCoeff(&arg);
    return beta(arg) < 0.0 ? -1.0 : 1.0;
}

}  // namespace

std::vector<double> quadrature_points(std::size_t m) {
    if (m < 2) throw ArgumentError("quadrature size must be >= 2");
    std::vector<double> pts(m);
    for (std::size_t u = 0; u < m; ++u) pts[u] = (double(u) + 0.5) / double(m);
    return pts;
}

RkhsBasis::RkhsBasis(TimeGrid grid, double c_lambda, std::size_t quad_m)
    : grid_(std::move(grid)), c_lambda_(c_lambda), quad_m_(quad_m) {
    if (grid_.empty()) throw ArgumentError("RkhsBasis: empty grid");
    if (!(c_lambda_ > 0.0)) throw ArgumentError("c_lambda must be positive");
    gram_ = ftsvd::gram(grid_);
    Matrix shifted = gram_;
    shifted.diagonal().array() += c_lambda_;
    factor_.compute(shifted);
    if (factor_.info() != Eigen::Success) throw NumericError("Cholesky factorization of K + c_lambda I failed");
    const auto pts = quadrature_points(quad_m_);
    quad_cross_ = cross_gram(pts, grid_);
}

Vector RkhsBasis::solve(const Vector& rhs) const {
    if (rhs.size() != gram_.rows()) throw ArgumentError("RkhsBasis::solve: length mismatch");
    return factor_.solve(rhs);
}

double RkhsBasis::l2_norm(const Vector& beta) const {
    return std::sqrt(on_quadrature(beta).squaredNorm() / double(quad_m_));
}

double RkhsBasis::integral(const Vector& beta) const { return on_quadrature(beta).sum() / double(quad_m_); }

RkhsFunction fit_weighted_mean(const Tensor3& y, const Vector& a, const Vector& b, const RkhsBasis& basis) {
    if (std::abs(a.norm() - 1.0) > unit_tolerance || std::abs(b.norm() - 1.0) > unit_tolerance) {
        throw ArgumentError("fit_weighted_mean: a and b must be unit vectors");
    }
    if (basis.grid().size() != y.n()) throw ArgumentError("fit_weighted_mean: grid length does not match tensor");
    const Vector rhs = contract_ab(y, a, b);
    Vector beta = basis.solve(rhs);
    if (!beta.allFinite()) throw NumericError("fit_weighted_mean: non-finite solution");
    return {basis.grid(), std::move(beta), {}};
}

RkhsFunction fit_weighted_mean(const Tensor3& y, const Vector& a, const Vector& b, const TimeGrid& grid,
                               double c_lambda) {
    // Only the Cholesky factor is needed here; skip the quadrature matrix.
    return fit_weighted_mean(y, a, b, RkhsBasis(grid, c_lambda, 2));
}

Vector evaluate(const RkhsFunction& f, std::span<const double> points) {
    check_same_grid(f);
    return cross_gram(points, f.grid) * f.beta;
}

Vector discretize(const RkhsFunction& f, const TimeGrid& grid) { return evaluate(f, grid.points()); }

double l2_norm(const RkhsFunction& f, std::size_t m) {
    const auto pts = quadrature_points(m);
    const Vector values = evaluate(f, pts);
    return std::sqrt(values.squaredNorm() / double(m));
}

NormalizedFunction normalize(const RkhsFunction& f, std::size_t m) {
    const auto pts = quadrature_points(m);
    const Vector values = evaluate(f, pts);
    const double norm = std::sqrt(values.squaredNorm() / double(m));
    if (!(norm > degenerate_norm)) throw DegenerateError("normalize: function has (near) zero L2 norm");
    const double sign = orientation(f.beta, values.sum() / double(m));
    RkhsFunction unit = f;
    unit.beta *= sign / norm;
    return {std::move(unit), norm};
}

double normalize_in_place(Vector& beta, const RkhsBasis& basis) {
    const Vector values = basis.on_quadrature(beta);
    const double norm = std::sqrt(values.squaredNorm() / double(basis.quad_m()));
    if (!(norm > degenerate_norm)) throw DegenerateError("normalize: function has (near) zero L2 norm");
    beta *= orientation(beta, values.sum() / double(basis.quad_m())) / norm;
    return norm;
}

double h_norm_sq(const RkhsFunction& f) {
    check_same_grid(f);
    return f.beta.dot(gram(f.grid) * f.beta);
}

}  // namespace ftsvd
