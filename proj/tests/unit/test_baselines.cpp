#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ftsvd/baselines.hpp"
#include "ftsvd/metrics.hpp"
#include "ftsvd/simulate.hpp"
#include "oracles.hpp"

using namespace ftsvd;

TEST_SUITE("baselines") {

TEST_CASE("noiseless rank-1 CP recovery") {
    SimConfig cfg;
    cfg.p1 = 10;
    cfg.p2 = 12;
    cfg.n = 30;
    cfg.lambda_min = 5.0;
    cfg.sigma = 0.0;
    cfg.tau = 0.0;
    cfg.seed = 6;
    const auto s = simulate(cfg);
    const auto& t = s.truth.components[0];
    Vector xi_n(30);
    for (Eigen::Index k = 0; k < 30; ++k) xi_n(k) = t.xi(s.data.grid[std::size_t(k)]);
    const auto cp = cp_decompose(s.data.y, CpConfig{});
    REQUIRE(cp.size() == 1);
    CHECK(dist_vec(cp[0].a, t.a) <= 1e-6);
    CHECK(dist_vec(cp[0].b, t.b) <= 1e-6);
    CHECK(dist_vec(cp[0].v, xi_n) <= 1e-6);
    CHECK(std::abs(cp[0].a.norm() - 1.0) <= 1e-9);
    CHECK(std::abs(cp[0].v.norm() - 1.0) <= 1e-9);
    CHECK(cp[0].lambda >= 0.0);
    CHECK(cp[0].lambda == doctest::Approx(5.0 * xi_n.norm()).epsilon(1e-9));
}

TEST_CASE("fixed seed gives bitwise identical output") {
    SimConfig cfg;
    cfg.r = 2;
    cfg.sigma = 0.5;
    cfg.seed = 2;
    const auto s = simulate(cfg);
    CpConfig cc;
    cc.rank = 2;
    cc.seed = 99;
    const auto x = cp_decompose(s.data.y, cc);
    const auto y = cp_decompose(s.data.y, cc);
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(x[l].lambda == y[l].lambda);
        CHECK(x[l].a == y[l].a);
        CHECK(x[l].v == y[l].v);
    }
    // deflation leaves each residual orthogonal to its term
    Tensor3 r = s.data.y;
    for (const auto& c : x) {
        subtract_rank1_inplace(r, c.lambda, c.a, c.b, c.v);
        CHECK(std::abs(contract_abv(r, c.a, c.b, c.v)) <= 1e-8 * frob_norm(s.data.y));
    }
}

TEST_CASE("symmetric planted roles give symmetric errors") {
    double da = 0.0, db = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 gen(seed);
        const Vector a = oracle::random_unit(8, gen);
        const Vector v = oracle::random_unit(20, gen);
        Tensor3 y = rank1(6.0, a, a, v);
        const Tensor3 noise = oracle::random_tensor(8, 8, 20, gen);
        for (std::size_t q = 0; q < y.size(); ++q) y.data()[q] += 0.3 * noise.data()[q];
        CpConfig cc;
        cc.seed = seed;
        const auto cp = cp_decompose(y, cc);
        da += dist_vec(cp[0].a, a) / 10.0;
        db += dist_vec(cp[0].b, a) / 10.0;
    }
    CHECK(std::abs(da - db) <= 0.05);
}

TEST_CASE("minimal H-norm interpolation") {
    std::mt19937_64 gen(3);
    const auto pts = oracle::random_points(15, gen);
    const TimeGrid grid(pts);
    CHECK(interpolate_min_hnorm(Vector::Zero(15), grid).beta.cwiseAbs().maxCoeff() == 0.0);

    // values of K(., 0.3) on a grid that contains 0.3
    std::vector<double> with{0.05, 0.18, 0.3, 0.47, 0.66, 0.81, 0.95};
    const TimeGrid g2(with);
    Vector vals(7);
    for (Eigen::Index k = 0; k < 7; ++k) vals(k) = oracle::bernoulli_kernel(with[std::size_t(k)], 0.3);
    const auto f = interpolate_min_hnorm(vals, g2);
    CHECK(std::abs(f.beta(2) - 1.0) <= 1e-4);
    for (Eigen::Index k = 0; k < 7; ++k)
        if (k != 2) CHECK(std::abs(f.beta(k)) <= 1e-4);
    CHECK((discretize(f, g2) - vals).cwiseAbs().maxCoeff() <= 1e-6);

    const auto one = interpolate_min_hnorm(Vector::Ones(15), grid);
    CHECK(std::abs(l2_norm(one) - 1.0) <= 1e-3);
    // jittered solve: the miss is jitter * beta, bounded through the condition number
    const Vector rnd = oracle::random_vector(15, gen);
    const auto fr = interpolate_min_hnorm(rnd, grid);
    const Vector miss = discretize(fr, grid) - rnd;
    CHECK((miss + 1e-10 * fr.beta).cwiseAbs().maxCoeff() <= 1e-12 * fr.beta.lpNorm<1>());
    const Matrix k = oracle::loop_gram(pts);
    Eigen::SelfAdjointEigenSolver<Matrix> es(k);
    const double cond = es.eigenvalues().maxCoeff() / (es.eigenvalues().minCoeff() + 1e-10);
    CHECK(miss.norm() <= 10.0 * 1e-10 * cond * rnd.norm());

    // smooth values: identity to 1e-5
    Vector smooth(15);
    for (Eigen::Index k = 0; k < 15; ++k) smooth(k) = std::cos(2.0 * std::numbers::pi * grid[std::size_t(k)]) + grid[std::size_t(k)];
    CHECK((discretize(interpolate_min_hnorm(smooth, grid), grid) - smooth).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK_THROWS(interpolate_min_hnorm(Vector::Ones(3), grid));
}

}  // TEST_SUITE
