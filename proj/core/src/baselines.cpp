#include "ftsvd/baselines.hpp"

#include <cmath>
#include <string>

#include "ftsvd/error.hpp"
#include "ftsvd/kernel.hpp"
#include "ftsvd/rng.hpp"
#include "ftsvd/simulate.hpp"

namespace ftsvd {

namespace {

Vector unit_or_throw(const Vector& x, const char* step) {
    const double norm = x.norm();
    if (!(norm >= 1e-12)) throw DegenerateError(std::string("CP component vanished in the ") + step + " update");
    return x / norm;
}

struct Candidate {
    double objective = -1.0;
    Vector a, b, v;
};

Candidate run_restart(const Tensor3& y, CounterRng& rng, std::size_t iters) {
    Vector a = random_unit_vector(rng, y.p1());
    Vector b = random_unit_vector(rng, y.p2());
    Vector v = unit_or_throw(contract_ab(y, a, b), "mode-3");
    for (std::size_t t = 0; t < iters; ++t) {
        Vector a_next = unit_or_throw(contract_bv(y, b, v), "mode-1");
        Vector b_next = unit_or_throw(contract_av(y, a, v), "mode-2");
        Vector v_next = unit_or_throw(contract_ab(y, a, b), "mode-3");
        a = std::move(a_next);
        b = std::move(b_next);
        v = std::move(v_next);
    }
    const double objective = std::abs(contract_abv(y, a, b, v));
    return {objective, std::move(a), std::move(b), std::move(v)};
}

}  // namespace

std::vector<CpComponent> cp_decompose(const Tensor3& y, const CpConfig& cfg) {
    if (cfg.rank < 1) throw ArgumentError("cp_decompose: rank must be >= 1");
    if (cfg.n_init < 1) throw ArgumentError("cp_decompose: n_init must be >= 1");
    CounterRng rng = CounterRng::stream(cfg.seed, "cp-restarts");

    std::vector<CpComponent> out;
    Tensor3 residual = y;
    for (std::size_t l = 0; l < cfg.rank; ++l) {
        Candidate best;
        for (std::size_t s = 0; s < cfg.n_init; ++s) {
            Candidate c = run_restart(residual, rng, cfg.iters);
            if (c.objective > best.objective) best = std::move(c);
        }
        // Same orientation rule as the functional estimator.
        Eigen::Index arg = 0;
        best.a.cwiseAbs().maxCoeff(&arg);
        if (best.a(arg) < 0.0) best.a = -best.a;
        if (best.v.sum() < 0.0) best.v = -best.v;
        double lambda = contract_abv(residual, best.a, best.b, best.v);
        if (lambda < 0.0) {
            best.b = -best.b;
            lambda = -lambda;
        }
        subtract_rank1_inplace(residual, lambda, best.a, best.b, best.v);
        out.push_back({lambda, std::move(best.a), std::move(best.b), std::move(best.v)});
    }
    return out;
}

RkhsFunction interpolate_min_hnorm(const Vector& values, const TimeGrid& grid, double jitter) {
    if (std::size_t(values.size()) != grid.size()) throw ArgumentError("interpolate_min_hnorm: length mismatch");
    if (!(jitter >= 0.0)) throw ArgumentError("interpolate_min_hnorm: jitter must be >= 0");
    Matrix k = gram(grid);
    k.diagonal().array() += jitter;
    Eigen::LDLT<Matrix> ldlt(k);
    if (ldlt.info() != Eigen::Success) throw NumericError("interpolate_min_hnorm: factorization failed");
    Vector beta = ldlt.solve(values);
    if (!beta.allFinite()) throw NumericError("interpolate_min_hnorm: non-finite solution");
    return {grid, std::move(beta), {}};
}

}  // namespace ftsvd
