#include "ftsvd/ftsvd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ftsvd/error.hpp"
#include "ftsvd/metrics.hpp"

namespace ftsvd {

namespace {

constexpr double vanish_threshold = 1e-12;
// Residual norm at or below this fraction of ||y|| counts as a perfect fit.
constexpr double perfect_fit_relative = 1e-10;

Vector normalized_or_throw(Vector x, std::size_t iteration, const char* step) {
    const double norm = x.norm();
    if (!(norm >= vanish_threshold)) {
        throw DegenerateError("component vanished at iteration " + std::to_string(iteration) + " (" + step +
                              " update has norm " + std::to_string(norm) + ")");
    }
    return x / norm;
}

void fix_max_entry_positive(Vector& x) {
    Eigen::Index arg = 0;
    x.cwiseAbs().maxCoeff(&arg);
    if (x(arg) < 0.0) x = -x;
}

double projection_lambda(const Tensor3& y, const Vector& a, const Vector& b, const Vector& xi_n) {
    const double denom = xi_n.squaredNorm();
    if (denom == 0.0) throw DegenerateError("discretized singular function is zero on the grid");
    return contract_abv(y, a, b, xi_n) / denom;
}

// Fit + normalize the singular function for the pair (a, b).
Vector fit_unit_beta(const Tensor3& y, const Vector& a, const Vector& b, const RkhsBasis& basis, std::size_t iteration) {
    Vector beta = basis.solve(contract_ab(y, a, b));
    try {
        normalize_in_place(beta, basis);
    } catch (const DegenerateError&) {
        throw DegenerateError("component vanished at iteration " + std::to_string(iteration) +
                              " (singular function update has zero L2 norm)");
    }
    return beta;
}

}  // namespace

Rank1Term Component::discretized() const { return {lambda, a, b, discretize(xi, xi.grid)}; }

void FitConfig::validate(std::size_t p1, std::size_t p2) const {
    if (rank < 1) throw ArgumentError("rank must be >= 1");
    if (rank > std::min(p1, p2)) {
        throw ArgumentError("rank " + std::to_string(rank) + " exceeds min(p1, p2) = " + std::to_string(std::min(p1, p2)));
    }
    if (iters < 1) throw ArgumentError("iteration count must be >= 1");
    if (!(c_lambda > 0.0)) throw ArgumentError("c_lambda must be positive");
    if (!(tol > 0.0)) throw ArgumentError("tol must be positive");
    if (quad_m < 2) throw ArgumentError("quadrature size must be >= 2");
}

Vector top_left_singular_vector(const Matrix& m) {
    if (m.rows() == 0) throw ArgumentError("top_left_singular_vector: empty matrix");
    const Matrix g = m * m.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    if (es.info() != Eigen::Success) throw NumericError("eigen-solver did not converge in spectral initialization");
    // Eigenvalues ascend; the last column is the leading direction.
    Vector u = es.eigenvectors().col(g.cols() - 1);
    fix_max_entry_positive(u);
    return u;
}

InitVectors spectral_init(const Tensor3& y) {
    if (frob_norm(y) == 0.0) throw DegenerateError("spectral_init: tensor is identically zero");
    const auto p1 = Eigen::Index(y.p1()), p2 = Eigen::Index(y.p2());
    // M1 M1' = sum_k S_k S_k' and M2 M2' = sum_k S_k' S_k without unfolding.
    Matrix g1 = Matrix::Zero(p1, p1);
    Matrix g2 = Matrix::Zero(p2, p2);
    for (std::size_t k = 0; k < y.n(); ++k) {
        const auto s = y.slice(k);
        g1.noalias() += s * s.transpose();
        g2.noalias() += s.transpose() * s;
    }
    auto leading = [](const Matrix& g) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(g);
        if (es.info() != Eigen::Success) throw NumericError("eigen-solver did not converge in spectral initialization");
        Vector u = es.eigenvectors().col(g.cols() - 1);
        fix_max_entry_positive(u);
        return u;
    };
    return {leading(g1), leading(g2)};
}

Component power_iteration(const Tensor3& y, const TimeGrid& grid, const Vector& a0, const Vector& b0,
                          const FitConfig& cfg, ComponentTrace* trace) {
    return power_iteration(y, RkhsBasis(grid, cfg.c_lambda, cfg.quad_m), a0, b0, cfg, trace);
}

Component power_iteration(const Tensor3& y, const RkhsBasis& basis, const Vector& a0, const Vector& b0,
                          const FitConfig& cfg, ComponentTrace* trace) {
    if (basis.grid().size() != y.n()) throw ArgumentError("power_iteration: grid length does not match tensor");
    if (std::size_t(a0.size()) != y.p1() || std::size_t(b0.size()) != y.p2()) {
        throw ArgumentError("power_iteration: initial vectors do not match tensor dims");
    }
    if (std::abs(a0.norm() - 1.0) > 1e-8 || std::abs(b0.norm() - 1.0) > 1e-8) {
        throw ArgumentError("power_iteration: initial vectors must be unit");
    }

    Vector a = a0;
    Vector b = b0;
    Vector beta = fit_unit_beta(y, a, b, basis, 0);
    Vector xi_n = basis.gram() * beta;

    auto record = [&](std::size_t t, double da, double db, double dxi) {
        if (!trace) return;
        IterationRecord rec{t, da, db, dxi, projection_lambda(y, a, b, xi_n), {}, {}, {}};
        if (cfg.keep_iterates) {
            rec.a = a;
            rec.b = b;
            rec.beta = beta;
        }
        trace->iterations.push_back(std::move(rec));
    };
    if (trace) *trace = {};
    record(0, 0.0, 0.0, 0.0);

    Vector xi_quad = basis.on_quadrature(beta);
    for (std::size_t t = 0; t < cfg.iters; ++t) {
        // Every update reads the iterate (a, b, xi) from step t.
        Vector a_next = normalized_or_throw(contract_bv(y, b, xi_n), t + 1, "mode-1");
        Vector b_next = normalized_or_throw(contract_av(y, a, xi_n), t + 1, "mode-2");
        Vector beta_next = fit_unit_beta(y, a, b, basis, t + 1);
        Vector xi_quad_next = basis.on_quadrature(beta_next);

        const double da = dist_vec(a_next, a);
        const double db = dist_vec(b_next, b);
        const double dxi = dist_sampled(xi_quad_next, xi_quad);

        a = std::move(a_next);
        b = std::move(b_next);
        beta = std::move(beta_next);
        xi_quad = std::move(xi_quad_next);
        xi_n = basis.gram() * beta;
        record(t + 1, da, db, dxi);

        if (da < cfg.tol && db < cfg.tol && dxi < cfg.tol) {
            if (trace) trace->early_stopped = t + 1 < cfg.iters;
            break;
        }
    }

    fix_max_entry_positive(a);
    double lambda = projection_lambda(y, a, b, xi_n);
    if (lambda < 0.0) {
        b = -b;
        lambda = -lambda;
    }
    return {lambda, std::move(a), std::move(b), RkhsFunction{basis.grid(), std::move(beta), {}}};
}

Decomposition sequential_decompose(const Tensor3& y, const TimeGrid& grid, const FitConfig& cfg) {
    cfg.validate(y.p1(), y.p2());
    if (grid.size() != y.n()) throw ArgumentError("sequential_decompose: grid length does not match tensor");
    const RkhsBasis basis(grid, cfg.c_lambda, cfg.quad_m);

    Decomposition out;
    out.config = cfg;
    Tensor3 residual = y;
    for (std::size_t l = 0; l < cfg.rank; ++l) {
        ComponentTrace trace;
        Component comp;
        try {
            if (frob_norm(residual) == 0.0) throw DegenerateError("residual is identically zero");
            const auto init = spectral_init(residual);
            comp = power_iteration(residual, basis, init.a, init.b, cfg, &trace);
        } catch (const DegenerateError& e) {
            out.truncated = true;
            out.truncation_reason = "component " + std::to_string(l + 1) + ": " + e.what();
            break;
        }
        const Vector xi_n = basis.gram() * comp.xi.beta;
        subtract_rank1_inplace(residual, comp.lambda, comp.a, comp.b, xi_n);
        out.residual_after.push_back(frob_norm(residual));
        out.components.push_back(std::move(comp));
        out.trace.push_back(std::move(trace));
    }
    out.residual_frob = frob_norm(residual);
    return out;
}

double rss(const Tensor3& y, std::span<const Component> components, const TimeGrid& grid) {
    if (grid.size() != y.n()) throw ArgumentError("rss: grid length does not match tensor");
    std::vector<Rank1Term> terms;
    terms.reserve(components.size());
    for (const auto& c : components) terms.push_back({c.lambda, c.a, c.b, discretize(c.xi, grid)});
    return rss(y, std::span<const Rank1Term>(terms));
}

Tensor3 reconstruct(std::span<const Component> components, const TimeGrid& grid, std::size_t p1, std::size_t p2) {
    Tensor3 out(p1, p2, grid.size());
    for (const auto& c : components) subtract_rank1_inplace(out, -c.lambda, c.a, c.b, discretize(c.xi, grid));
    return out;
}

double bic_value(double rss, std::size_t p1, std::size_t p2, std::size_t n, double p_h, std::size_t r) {
    const double total = double(p1) * double(p2) * double(n);
    return 2.0 * std::log(rss) + std::log(total) / total * (double(p1) + double(p2) + p_h) * double(r);
}

RankSelection select_rank(const Tensor3& y, const TimeGrid& grid, std::size_t r_max, const FitConfig& cfg,
                          std::optional<double> p_h) {
    if (r_max < 1 || r_max > std::min(y.p1(), y.p2())) throw ArgumentError("r_max must lie in [1, min(p1, p2)]");
    FitConfig sweep = cfg;
    sweep.rank = r_max;

    RankSelection out;
    out.penalty.p_h_empirical = !p_h.has_value();
    out.penalty.p_h = p_h ? *p_h : effective_dimension(KernelSpec::bernoulli());

    // Deflation is sequential, so the rank-r fit is the first r components
    // of the rank-r_max fit.
    out.decomposition = sequential_decompose(y, grid, sweep);
    const auto& comps = out.decomposition.components;
    const double y_norm = frob_norm(y);
    const double perfect = (perfect_fit_relative * y_norm) * (perfect_fit_relative * y_norm);

    double best = 0.0;
    for (std::size_t r = 1; r <= comps.size(); ++r) {
        const double rss_r = rss(y, std::span<const Component>(comps.data(), r), grid);
        out.rss.push_back(rss_r);
        if (rss_r <= perfect) {
            out.perfect_fit = true;
            out.bic.push_back(-std::numeric_limits<double>::infinity());
            out.r_hat = r;
            return out;
        }
        const double value = bic_value(rss_r, y.p1(), y.p2(), y.n(), out.penalty.p_h, r);
        out.bic.push_back(value);
        if (r == 1 || value < best) {
            best = value;
            out.r_hat = r;
        }
    }
    if (comps.empty()) throw DegenerateError("select_rank: no component could be extracted");
    return out;
}

double incoherence(std::span<const Component> components, std::size_t quad_m) {
    if (components.size() < 2) throw ArgumentError("incoherence needs at least two components");
    const auto pts = quadrature_points(quad_m);
    std::vector<Vector> samples;
    samples.reserve(components.size());
    for (const auto& c : components) samples.push_back(evaluate(c.xi, pts));

    auto abs_cos = [](const Vector& u, const Vector& v) {
        const double denom = u.norm() * v.norm();
        if (denom == 0.0) throw DegenerateError("incoherence: zero vector or function");
        return std::min(1.0, std::abs(u.dot(v)) / denom);
    };
    double mu = 0.0;
    for (std::size_t i = 0; i < components.size(); ++i) {
        for (std::size_t j = i + 1; j < components.size(); ++j) {
            mu = std::max({mu, abs_cos(components[i].a, components[j].a), abs_cos(components[i].b, components[j].b),
                           abs_cos(samples[i], samples[j])});
        }
    }
    return mu;
}

}  // namespace ftsvd
