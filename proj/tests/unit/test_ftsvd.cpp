#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ftsvd/baselines.hpp"
#include "ftsvd/error.hpp"
#include "ftsvd/ftsvd.hpp"
#include "ftsvd/metrics.hpp"
#include "ftsvd/simulate.hpp"
#include "oracles.hpp"

using namespace ftsvd;

namespace {

Vector sample(double (*f)(double), const TimeGrid& grid) {
    Vector v(Eigen::Index(grid.size()));
    for (std::size_t k = 0; k < grid.size(); ++k) v(Eigen::Index(k)) = f(grid[k]);
    return v;
}

double smooth_xi(double s) { return std::numbers::sqrt2 * std::cos(std::numbers::pi * s); }

struct Planted {
    Tensor3 y;
    TimeGrid grid;
    Vector a, b;
};

Planted planted_rank1(std::size_t p1, std::size_t p2, std::size_t n, double lam, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    TimeGrid grid(oracle::random_points(n, gen));
    Vector a = oracle::random_unit(p1, gen), b = oracle::random_unit(p2, gen);
    Tensor3 y = rank1(lam, a, b, sample(smooth_xi, grid));
    return {std::move(y), std::move(grid), std::move(a), std::move(b)};
}

}  // namespace

TEST_SUITE("ftsvd") {

TEST_CASE("spectral init recovers a planted rank-1 tensor") {
    const auto p = planted_rank1(6, 7, 20, 3.0, 1);
    const auto init = spectral_init(p.y);
    Eigen::JacobiSVD<Matrix> svd1(oracle::loop_matricize(p.y, 1), Eigen::ComputeThinU);
    Eigen::JacobiSVD<Matrix> svd2(oracle::loop_matricize(p.y, 2), Eigen::ComputeThinU);
    CHECK(dist_vec(init.a, svd1.matrixU().col(0)) <= 1e-8);
    CHECK(dist_vec(init.b, svd2.matrixU().col(0)) <= 1e-8);
    CHECK(dist_vec(init.a, p.a) <= 1e-8);
    CHECK(std::abs(init.a.norm() - 1.0) <= 1e-12);
    CHECK(std::abs(init.b.norm() - 1.0) <= 1e-12);
    Eigen::Index arg = 0;
    init.a.cwiseAbs().maxCoeff(&arg);
    CHECK(init.a(arg) > 0.0);

    Tensor3 scaled = p.y;
    scaled *= 7.0;
    const auto init7 = spectral_init(scaled);
    CHECK((init7.a - init.a).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((init7.b - init.b).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK_THROWS_AS(spectral_init(Tensor3(2, 2, 2)), DegenerateError);
}

TEST_CASE("top singular vector of a 1 x m matrix is the scalar 1") {
    Matrix m(1, 4);
    m << -1.0, 2.0, 0.5, 3.0;
    const Vector u = top_left_singular_vector(m);
    REQUIRE(u.size() == 1);
    CHECK(u(0) == doctest::Approx(1.0));
}

TEST_CASE("power iteration recovers a smooth noiseless rank-1 component") {
    const auto p = planted_rank1(10, 10, 50, 5.0, 3);
    FitConfig cfg;
    cfg.iters = 5;
    ComponentTrace trace;
    std::mt19937_64 gen(4);
    const Component c = power_iteration(p.y, p.grid, oracle::random_unit(10, gen), oracle::random_unit(10, gen), cfg, &trace);
    CHECK(dist_vec(c.a, p.a) <= 1e-6);
    CHECK(dist_vec(c.b, p.b) <= 1e-6);
    // the limit is the ridge fit at the true (a, b)
    const auto at_truth = fit_weighted_mean(p.y, p.a, p.b, p.grid, cfg.c_lambda);
    CHECK(dist_sampled(sample_on_quadrature(c.xi), sample_on_quadrature(at_truth)) <= 1e-6);
    CHECK(c.lambda == doctest::Approx(5.0).epsilon(1e-3));
    CHECK(trace.iterations.front().iteration == 0);
    CHECK(trace.iterations.size() <= 6);
}

TEST_CASE("component invariants and sign conventions") {
    SimConfig sc;
    sc.p1 = 8;
    sc.p2 = 9;
    sc.n = 30;
    sc.r = 2;
    sc.lambda_min = 10.0;
    sc.sigma = 0.3;
    sc.tau = 0.5;
    sc.seed = 5;
    const auto s = simulate(sc);
    FitConfig cfg;
    cfg.rank = 2;
    const auto d = sequential_decompose(s.data.y, s.data.grid, cfg);
    REQUIRE(d.components.size() == 2);
    for (const auto& c : d.components) {
        CHECK(std::abs(c.a.norm() - 1.0) <= 1e-9);
        CHECK(std::abs(c.b.norm() - 1.0) <= 1e-9);
        CHECK(std::abs(l2_norm(c.xi) - 1.0) <= 1e-6);
        CHECK(c.lambda >= 0.0);
        Eigen::Index arg = 0;
        c.a.cwiseAbs().maxCoeff(&arg);
        CHECK(c.a(arg) > 0.0);
        CHECK(evaluate(c.xi, quadrature_points()).sum() >= 0.0);
    }
    CHECK(d.residual_frob >= 0.0);
}

TEST_CASE("flipping the initial signs gives the identical component") {
    const auto p = planted_rank1(5, 6, 25, 4.0, 8);
    Tensor3 y = p.y;
    std::mt19937_64 gen(9);
    const Tensor3 noise = oracle::random_tensor(5, 6, 25, gen);
    for (std::size_t q = 0; q < y.size(); ++q) y.data()[q] += 0.1 * noise.data()[q];
    const Vector a0 = oracle::random_unit(5, gen), b0 = oracle::random_unit(6, gen);
    FitConfig cfg;
    const Component c1 = power_iteration(y, p.grid, a0, b0, cfg);
    const Component c2 = power_iteration(y, p.grid, Vector(-a0), Vector(-b0), cfg);
    CHECK((c1.a - c2.a).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((c1.b - c2.b).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((c1.xi.beta - c2.xi.beta).cwiseAbs().maxCoeff() <= 1e-12 * c1.xi.beta.cwiseAbs().maxCoeff());
    CHECK(c1.lambda == doctest::Approx(c2.lambda).epsilon(1e-12));
}

TEST_CASE("rank-1 decomposition is spectral init plus power iteration") {
    SimConfig sc;
    sc.p1 = 6;
    sc.p2 = 7;
    sc.n = 20;
    sc.lambda_min = 8.0;
    sc.seed = 2;
    const auto s = simulate(sc);
    FitConfig cfg;
    const auto d = sequential_decompose(s.data.y, s.data.grid, cfg);
    const auto init = spectral_init(s.data.y);
    const Component c = power_iteration(s.data.y, s.data.grid, init.a, init.b, cfg);
    REQUIRE(d.components.size() == 1);
    CHECK(d.components[0].a == c.a);
    CHECK(d.components[0].b == c.b);
    CHECK(d.components[0].xi.beta == c.xi.beta);
    CHECK(d.components[0].lambda == c.lambda);
}

TEST_CASE("noiseless rank-2 recovery") {
    SimConfig sc;
    sc.p1 = 20;
    sc.p2 = 20;
    sc.n = 50;
    sc.r = 2;
    sc.lambda_min = 20.0;
    sc.sigma = 0.0;
    sc.tau = 0.0;
    sc.seed = 1;
    const auto s = simulate(sc);
    CHECK(s.truth.components[0].lambda == 40.0);
    FitConfig cfg;
    cfg.rank = 2;
    const auto d = sequential_decompose(s.data.y, s.data.grid, cfg);
    std::vector<ScoredComponent> est;
    for (const auto& c : d.components) est.push_back(scored(c));
    const auto rep = match_and_score(est, scored(s.truth.components));
    for (const auto& e : rep.errors) {
        CHECK(e.dist_a <= 0.05);
        CHECK(e.dist_b <= 0.05);
        CHECK(e.dist_xi <= 0.05);
    }
}

TEST_CASE("deflation bookkeeping") {
    SimConfig sc;
    sc.p1 = 10;
    sc.p2 = 12;
    sc.n = 30;
    sc.r = 3;
    sc.lambda_min = 15.0;
    sc.sigma = 0.5;
    sc.tau = 1.0;
    sc.seed = 13;
    const auto s = simulate(sc);
    FitConfig cfg;
    cfg.rank = 3;
    const auto d = sequential_decompose(s.data.y, s.data.grid, cfg);
    REQUIRE(d.components.size() == 3);
    Tensor3 residual = s.data.y;
    for (const auto& c : d.components) {
        const Vector xi_n = discretize(c.xi, s.data.grid);
        subtract_rank1_inplace(residual, c.lambda, c.a, c.b, xi_n);
        CHECK(std::abs(contract_abv(residual, c.a, c.b, xi_n)) <= 1e-8 * xi_n.squaredNorm());
    }
    const double r2 = d.residual_frob * d.residual_frob;
    CHECK(rss(s.data.y, d.components, s.data.grid) == doctest::Approx(r2).epsilon(1e-6));
    CHECK(d.residual_after.back() == doctest::Approx(d.residual_frob).epsilon(1e-12));
    CHECK(frob_norm(residual) == doctest::Approx(d.residual_frob).epsilon(1e-9));
}

TEST_CASE("permutation and scale equivariance") {
    SimConfig sc;
    sc.p1 = 9;
    sc.p2 = 8;
    sc.n = 25;
    sc.r = 2;
    sc.lambda_min = 12.0;
    sc.sigma = 0.5;
    sc.tau = 0.5;
    sc.seed = 21;
    const auto s = simulate(sc);
    FitConfig cfg;
    cfg.rank = 2;
    const auto base = sequential_decompose(s.data.y, s.data.grid, cfg);

    std::vector<std::size_t> perm{3, 0, 8, 1, 7, 2, 6, 4, 5};
    Tensor3 yp(9, 8, 25);
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            for (std::size_t k = 0; k < 25; ++k) yp(i, j, k) = s.data.y(perm[i], j, k);
    const auto permuted = sequential_decompose(yp, s.data.grid, cfg);

    Tensor3 ys = s.data.y;
    ys *= 3.0;
    const auto scaled = sequential_decompose(ys, s.data.grid, cfg);

    for (std::size_t l = 0; l < 2; ++l) {
        const auto& c = base.components[l];
        const auto& cp = permuted.components[l];
        for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(cp.a(Eigen::Index(i)) - c.a(Eigen::Index(perm[i]))) <= 1e-9);
        CHECK((cp.b - c.b).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK((cp.xi.beta - c.xi.beta).cwiseAbs().maxCoeff() <= 1e-9 * c.xi.beta.cwiseAbs().maxCoeff());
        CHECK(std::abs(cp.lambda - c.lambda) <= 1e-9 * c.lambda);

        const auto& cs = scaled.components[l];
        CHECK((cs.a - c.a).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK((cs.b - c.b).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK((cs.xi.beta - c.xi.beta).cwiseAbs().maxCoeff() <= 1e-9 * c.xi.beta.cwiseAbs().maxCoeff());
        CHECK(std::abs(cs.lambda - 3.0 * c.lambda) <= 1e-9 * 3.0 * c.lambda);
    }
}

TEST_CASE("vanished components truncate the decomposition") {
    // Rank-1 slice structure at n = 1: the first projection empties the tensor.
    Tensor3 y(3, 3, 1);
    const Vector a = Vector::Unit(3, 0), b = Vector::Unit(3, 1);
    subtract_rank1_inplace(y, -2.0, a, b, Vector::Ones(1));
    FitConfig cfg;
    cfg.rank = 3;
    const auto d = sequential_decompose(y, TimeGrid({0.4}), cfg);
    CHECK(d.components.size() < 3);
    CHECK(d.truncated);
    CHECK_FALSE(d.truncation_reason.empty());
}

TEST_CASE("config validation") {
    FitConfig cfg;
    cfg.rank = 4;
    CHECK_THROWS_AS(cfg.validate(3, 5), ArgumentError);
    cfg.rank = 1;
    cfg.iters = 0;
    CHECK_THROWS_AS(cfg.validate(3, 5), ArgumentError);
    cfg.iters = 2;
    cfg.c_lambda = -1.0;
    CHECK_THROWS_AS(cfg.validate(3, 5), ArgumentError);
}

TEST_CASE("trace records every iterate when asked") {
    auto p = planted_rank1(6, 6, 20, 3.0, 2);
    std::mt19937_64 gen(8);
    const Tensor3 noise = oracle::random_tensor(6, 6, 20, gen);
    for (std::size_t q = 0; q < p.y.size(); ++q) p.y.data()[q] += noise.data()[q];
    FitConfig cfg;
    cfg.iters = 4;
    cfg.keep_iterates = true;
    cfg.tol = 1e-300;
    ComponentTrace trace;
    const auto init = spectral_init(p.y);
    power_iteration(p.y, p.grid, init.a, init.b, cfg, &trace);
    REQUIRE(trace.iterations.size() == 5);
    for (std::size_t t = 0; t < 5; ++t) {
        CHECK(trace.iterations[t].iteration == t);
        CHECK(trace.iterations[t].a.has_value());
        CHECK(trace.iterations[t].beta.has_value());
    }
    CHECK_FALSE(trace.early_stopped);
}

TEST_CASE("BIC penalty and rank selection edge cases") {
    for (std::size_t r = 1; r < 5; ++r) {
        CHECK(bic_value(1.0, 20, 20, 50, 1.3, r + 1) > bic_value(1.0, 20, 20, 50, 1.3, r));
    }
    const double total = 20.0 * 20.0 * 50.0;
    CHECK(bic_value(2.0, 20, 20, 50, 1.5, 2) == doctest::Approx(2.0 * std::log(2.0) + std::log(total) / total * 41.5 * 2.0));

    SimConfig sc;
    sc.p1 = 10;
    sc.p2 = 10;
    sc.n = 20;
    sc.seed = 3;
    const auto s = simulate(sc);
    const auto one = select_rank(s.data.y, s.data.grid, 1, FitConfig{});
    CHECK(one.r_hat == 1);
    CHECK(one.bic.size() == 1);
    CHECK(one.penalty.p_h_empirical);
    CHECK_THROWS_AS(select_rank(s.data.y, s.data.grid, 11, FitConfig{}), ArgumentError);

    const auto fixed = select_rank(s.data.y, s.data.grid, 2, FitConfig{}, 4.0);
    CHECK_FALSE(fixed.penalty.p_h_empirical);
    CHECK(fixed.penalty.p_h == 4.0);

    Tensor3 exact(3, 3, 1);
    subtract_rank1_inplace(exact, -2.0, Vector::Unit(3, 0), Vector::Unit(3, 1), Vector::Ones(1));
    const auto perfect = select_rank(exact, TimeGrid({0.4}), 3, FitConfig{});
    CHECK(perfect.perfect_fit);
    CHECK(perfect.r_hat == 1);
}

TEST_CASE("BIC picks the planted rank for orthogonal components under white noise") {
    int hits1 = 0, hits2 = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 gen(600 + seed);
        const std::size_t p = 20, n = 50;
        const TimeGrid grid(oracle::random_points(n, gen));
        // orthonormal a, b pairs via QR; cosine singular functions
        auto orthonormal_pair = [&] {
            Matrix m(Eigen::Index(p), 2);
            m.col(0) = oracle::random_vector(p, gen);
            m.col(1) = oracle::random_vector(p, gen);
            return Matrix(Eigen::HouseholderQR<Matrix>(m).householderQ() * Matrix::Identity(Eigen::Index(p), 2));
        };
        const Matrix qa = orthonormal_pair(), qb = orthonormal_pair();
        Vector v1(static_cast<Eigen::Index>(n)), v2(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k) {
            v1(Eigen::Index(k)) = basis_eval(2, grid[k]);
            v2(Eigen::Index(k)) = basis_eval(3, grid[k]);
        }
        Tensor3 one = oracle::random_tensor(p, p, n, gen);
        Tensor3 two = one;
        subtract_rank1_inplace(one, -160.0, qa.col(0), qb.col(0), v1);
        subtract_rank1_inplace(two, -160.0, qa.col(0), qb.col(0), v1);
        subtract_rank1_inplace(two, -80.0, qa.col(1), qb.col(1), v2);
        hits1 += select_rank(one, grid, 5, FitConfig{}).r_hat == 1;
        hits2 += select_rank(two, grid, 5, FitConfig{}).r_hat == 2;
    }
    CHECK(hits1 >= 8);
    CHECK(hits2 >= 8);
}

TEST_CASE("pure noise: BIC curve non-decreasing") {
    int monotone = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SimConfig sc;
        sc.lambda_min = 0.0;
        sc.sigma = 0.0;
        sc.tau = 1.0;
        sc.seed = 900 + seed;
        const auto s = simulate(sc);
        const auto sel = select_rank(s.data.y, s.data.grid, 5, FitConfig{});
        bool ok = true;
        for (std::size_t r = 1; r < sel.bic.size(); ++r) ok = ok && sel.bic[r] >= sel.bic[r - 1];
        monotone += ok;
    }
    CHECK(monotone >= 8);
}

TEST_CASE("incoherence") {
    const auto fine = quadrature_points(200);
    const TimeGrid grid(fine);
    auto lift = [&](double (*f)(double)) {
        Vector v(200);
        for (Eigen::Index k = 0; k < 200; ++k) v(k) = f(fine[std::size_t(k)]);
        return interpolate_min_hnorm(v, grid);
    };
    Component c1{1.0, Vector::Unit(3, 0), Vector::Unit(3, 0), lift(+[](double s) { return std::cos(std::numbers::pi * s); })};
    Component c2{1.0, Vector::Unit(3, 1), Vector::Unit(3, 1), lift(+[](double s) { return std::cos(2.0 * std::numbers::pi * s); })};
    const std::vector<Component> orth{c1, c2};
    CHECK(incoherence(orth) <= 1e-3);
    const std::vector<Component> dup{c1, c1};
    CHECK(incoherence(dup) == doctest::Approx(1.0));
    const std::vector<Component> single{c1};
    CHECK_THROWS_AS(incoherence(single), ArgumentError);

    SimConfig sc;
    sc.r = 3;
    sc.seed = 4;
    const auto s = simulate(sc);
    FitConfig cfg;
    cfg.rank = 3;
    const auto d = sequential_decompose(s.data.y, s.data.grid, cfg);
    const double mu = incoherence(d.components);
    CHECK(mu >= 0.0);
    CHECK(mu <= 1.0);
}

}  // TEST_SUITE
