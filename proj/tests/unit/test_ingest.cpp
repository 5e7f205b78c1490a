#include <doctest.h>

#include <cmath>

#include "ftsvd/error.hpp"
#include "ftsvd/ingest.hpp"
#include "oracles.hpp"

using namespace ftsvd;

TEST_SUITE("ingest") {

TEST_CASE("two-feature row with the default pseudocount") {
    const Tensor3 c(1, 2, 1, {1.0, 3.0});
    const Tensor3 y = log_composition(c);
    CHECK(std::abs(y(0, 0, 0) - std::log(1.5 / 5.0)) <= 1e-12);
    CHECK(std::abs(y(0, 1, 0) - std::log(3.5 / 5.0)) <= 1e-12);
}

TEST_CASE("all-zero row gives the uniform composition") {
    const Tensor3 y = log_composition(Tensor3(2, 7, 3));
    for (double v : y.data()) CHECK(std::abs(v + std::log(7.0)) <= 1e-12);
}

TEST_CASE("each (i, k) fibre exponentiates to a composition") {
    std::mt19937_64 gen(9);
    std::uniform_int_distribution<int> draw(0, 40);
    Tensor3 c(5, 8, 4);
    for (double& v : c.data()) v = double(draw(gen));
    const double pc = 0.25;
    const Tensor3 y = log_composition(c, pc);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t k = 0; k < 4; ++k) {
            double total = 0.0, denom = 0.0;
            for (std::size_t j = 0; j < 8; ++j) {
                total += std::exp(y(i, j, k));
                denom += c(i, j, k) + pc;
            }
            CHECK(std::abs(total - 1.0) <= 1e-12);
            for (std::size_t j = 0; j < 8; ++j) CHECK(std::abs(y(i, j, k) - std::log((c(i, j, k) + pc) / denom)) <= 1e-12);
        }
}

TEST_CASE("invalid counts are rejected") {
    CHECK_THROWS_AS(log_composition(Tensor3(1, 2, 1, {1.0, -1.0})), DataError);
    CHECK_THROWS_AS(log_composition(Tensor3(1, 2, 1, {1.5, 2.0})), DataError);
    CHECK_THROWS_AS(log_composition(Tensor3(1, 2, 1, {1.0, NAN})), DataError);
    CHECK_THROWS(log_composition(Tensor3(1, 2, 1, {1.0, 2.0}), 0.0));
}

}  // TEST_SUITE
