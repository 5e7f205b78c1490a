#include "ftsvd/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ftsvd/error.hpp"

namespace ftsvd {

void SimConfig::validate() const {
    if (p1 < 1 || p2 < 1 || n < 1 || r < 1) throw ArgumentError("simulation dims and rank must be >= 1");
    if (r > std::min(p1, p2)) throw ArgumentError("simulation rank exceeds min(p1, p2)");
    if (!(lambda_min >= 0.0) || !std::isfinite(lambda_min)) throw ArgumentError("lambda_min must be finite and >= 0");
    if (!(sigma >= 0.0) || !(tau >= 0.0)) throw ArgumentError("sigma and tau must be >= 0");
    if (n_basis < 1) throw ArgumentError("n_basis must be >= 1");
}

double basis_eval(std::size_t i, double s, std::size_t n_basis) {
    if (i < 1 || i > n_basis) throw ArgumentError("basis index out of range");
    if (!(s >= 0.0 && s <= 1.0)) throw ArgumentError("basis argument outside [0, 1]");
    if (i == 1) return 1.0;
    return std::numbers::sqrt2 * std::cos(double(i - 1) * std::numbers::pi * s);
}

double CosineFunction::operator()(double s) const {
    double acc = coeffs.empty() ? 0.0 : coeffs[0];
    for (std::size_t i = 1; i < coeffs.size(); ++i) acc += coeffs[i] * std::numbers::sqrt2 * std::cos(double(i) * std::numbers::pi * s);
    return acc;
}

double CosineFunction::l2_norm() const {
    double acc = 0.0;
    for (double c : coeffs) acc += c * c;
    return std::sqrt(acc);
}

SimStreams::SimStreams(std::uint64_t seed)
    : vectors(CounterRng::stream(seed, "vectors")),
      functions(CounterRng::stream(seed, "functions")),
      remainder(CounterRng::stream(seed, "remainder")),
      grid(CounterRng::stream(seed, "grid")),
      noise(CounterRng::stream(seed, "noise")) {}

CosineFunction random_unit_function(CounterRng& rng, std::size_t n_basis) {
    for (;;) {
        CosineFunction f;
        f.coeffs.resize(n_basis);
        for (std::size_t i = 0; i < n_basis; ++i) {
            const double half_width = 1.0 / double(i + 1);
            f.coeffs[i] = rng.uniform(-half_width, half_width);
        }
        const double norm = f.l2_norm();
        if (norm == 0.0) continue;
        for (double& c : f.coeffs) c /= norm;
        return f;
    }
}

Vector random_unit_vector(CounterRng& rng, std::size_t p) {
    for (;;) {
        Vector v(static_cast<Eigen::Index>(p));
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
        const double norm = v.norm();
        if (norm > 0.0) return v / norm;
    }
}

GroundTruth gen_truth(const SimConfig& cfg, SimStreams& streams) {
    cfg.validate();
    GroundTruth truth;
    truth.p1 = cfg.p1;
    truth.p2 = cfg.p2;
    for (std::size_t l = 0; l < cfg.r; ++l) {
        TrueComponent c;
        c.lambda = cfg.lambda_min * double(cfg.r - l);
        c.a = random_unit_vector(streams.vectors, cfg.p1);
        c.b = random_unit_vector(streams.vectors, cfg.p2);
        c.xi = random_unit_function(streams.functions, cfg.n_basis);
        truth.components.push_back(std::move(c));
    }
    if (cfg.sigma > 0.0) {
        truth.remainder.reserve(cfg.p1 * cfg.p2);
        for (std::size_t ij = 0; ij < cfg.p1 * cfg.p2; ++ij) {
            truth.remainder.push_back(random_unit_function(streams.remainder, cfg.n_basis));
        }
    }
    return truth;
}

GroundTruth gen_truth(const SimConfig& cfg) {
    SimStreams streams(cfg.seed);
    return gen_truth(cfg, streams);
}

namespace {

// Basis values u_i(s_k) as an n_basis x n matrix.
Matrix basis_matrix(std::size_t n_basis, std::span<const double> points) {
    Matrix u(Eigen::Index(n_basis), Eigen::Index(points.size()));
    for (std::size_t k = 0; k < points.size(); ++k)
        for (std::size_t i = 1; i <= n_basis; ++i) u(Eigen::Index(i - 1), Eigen::Index(k)) = basis_eval(i, points[k], n_basis);
    return u;
}

void add_remainder(Tensor3& y, const GroundTruth& truth, double sigma, std::span<const double> points) {
    if (truth.remainder.empty() || sigma == 0.0) return;
    const std::size_t n_basis = truth.remainder.front().coeffs.size();
    const Matrix u = basis_matrix(n_basis, points);
    for (std::size_t i = 0; i < truth.p1; ++i) {
        for (std::size_t j = 0; j < truth.p2; ++j) {
            const auto& coeffs = truth.remainder_at(i, j).coeffs;
            const Vector values = u.transpose() * Eigen::Map<const Vector>(coeffs.data(), Eigen::Index(coeffs.size()));
            for (std::size_t k = 0; k < points.size(); ++k) y(i, j, k) += sigma * values(Eigen::Index(k));
        }
    }
}

Vector sample_points(const CosineFunction& f, std::span<const double> points) {
    Vector v(Eigen::Index(points.size()));
    for (std::size_t k = 0; k < points.size(); ++k) v(Eigen::Index(k)) = f(points[k]);
    return v;
}

}  // namespace

Tensor3 signal_on_grid(const GroundTruth& truth, const TimeGrid& grid) {
    Tensor3 x(truth.p1, truth.p2, grid.size());
    for (const auto& c : truth.components) subtract_rank1_inplace(x, -c.lambda, c.a, c.b, sample_points(c.xi, grid.points()));
    return x;
}

Tensor3 remainder_on_grid(const GroundTruth& truth, double sigma, const TimeGrid& grid) {
    Tensor3 z(truth.p1, truth.p2, grid.size());
    add_remainder(z, truth, sigma, grid.points());
    return z;
}

Dataset gen_dataset(const SimConfig& cfg, const GroundTruth& truth, SimStreams& streams) {
    cfg.validate();
    if (truth.p1 != cfg.p1 || truth.p2 != cfg.p2 || truth.components.size() != cfg.r) {
        throw ArgumentError("gen_dataset: ground truth does not match config");
    }
    std::vector<double> points(cfg.n);
    for (double& s : points) s = streams.grid.uniform();
    TimeGrid grid(std::move(points));

    Tensor3 y = signal_on_grid(truth, grid);
    add_remainder(y, truth, cfg.sigma, grid.points());
    if (cfg.tau > 0.0) {
        for (double& x : y.data()) x += cfg.tau * streams.noise.normal();
    }
    return {std::move(y), std::move(grid)};
}

Simulation simulate(const SimConfig& cfg) {
    SimStreams streams(cfg.seed);
    GroundTruth truth = gen_truth(cfg, streams);
    Dataset data = gen_dataset(cfg, truth, streams);
    return {std::move(truth), std::move(data)};
}

double remainder_sup_norm(const GroundTruth& truth, double sigma, const TimeGrid& grid, std::size_t refine) {
    std::vector<double> points(grid.points().begin(), grid.points().end());
    for (std::size_t u = 0; u < refine; ++u) points.push_back(refine == 1 ? 0.5 : double(u) / double(refine - 1));
    const Tensor3 z = remainder_on_grid(truth, sigma, TimeGrid(std::move(points)));
    return remainder_sup_norm(z);
}

ScoredComponent scored(const TrueComponent& c, std::size_t quad_m) {
    const auto pts = quadrature_points(quad_m);
    return {c.a, c.b, sample_points(c.xi, pts)};
}

std::vector<ScoredComponent> scored(const std::vector<TrueComponent>& truth, std::size_t quad_m) {
    std::vector<ScoredComponent> out;
    out.reserve(truth.size());
    for (const auto& c : truth) out.push_back(scored(c, quad_m));
    return out;
}

}  // namespace ftsvd
