#include <doctest.h>

#include <fstream>
#include <sstream>

#include "ftsvd/error.hpp"
#include "ftsvd/io.hpp"
#include "oracles.hpp"
#include "scratch_dir.hpp"

using namespace ftsvd;
namespace fs = std::filesystem;

TEST_SUITE("io") {

TEST_CASE("tensor CSV round trip is lossless") {
    std::mt19937_64 gen(1);
    Tensor3 t = oracle::random_tensor(3, 4, 5, gen);
    t(0, 0, 0) = 0.1;
    t(1, 2, 3) = 1.0 / 3.0;
    t(2, 3, 4) = -1e-300;
    std::stringstream ss;
    io::write_tensor_csv(ss, t);
    CHECK(io::read_tensor_csv(ss) == t);
}

TEST_CASE("tensor CSV accepts any row order") {
    std::istringstream in("i,j,k,value\n2,1,1,4\n1,1,1,1\n1,1,2,5\n2,1,2,8\n");
    const Tensor3 t = io::read_tensor_csv(in);
    CHECK(t.p1() == 2);
    CHECK(t.p2() == 1);
    CHECK(t.n() == 2);
    CHECK(t(1, 0, 1) == 8.0);
}

TEST_CASE("malformed tensor CSV reports the line") {
    std::istringstream bad_value("i,j,k,value\n1,1,1,0.5\n1,1,2,abc\n");
    try {
        io::read_tensor_csv(bad_value);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::istringstream bad_header("a,b,c,d\n1,1,1,0\n");
    CHECK_THROWS_AS(io::read_tensor_csv(bad_header), ParseError);
    std::istringstream zero_index("i,j,k,value\n0,1,1,0\n");
    CHECK_THROWS_AS(io::read_tensor_csv(zero_index), ParseError);
    std::istringstream fields("i,j,k,value\n1,1,1\n");
    CHECK_THROWS_AS(io::read_tensor_csv(fields), ParseError);
    std::istringstream nan_value("i,j,k,value\n1,1,1,nan\n");
    CHECK_THROWS_AS(io::read_tensor_csv(nan_value), ParseError);
}

TEST_CASE("missing or duplicate entries are schema errors") {
    std::istringstream missing("i,j,k,value\n1,1,1,0\n2,2,1,0\n");
    CHECK_THROWS_AS(io::read_tensor_csv(missing), SchemaError);
    std::istringstream dup("i,j,k,value\n1,1,1,0\n1,1,1,2\n");
    CHECK_THROWS_AS(io::read_tensor_csv(dup), SchemaError);
    std::istringstream empty("i,j,k,value\n");
    CHECK_THROWS_AS(io::read_tensor_csv(empty), SchemaError);
}

TEST_CASE("grid files") {
    std::istringstream in("0.5\n\n0.25\n1\n");
    CHECK(io::read_grid_values(in) == std::vector<double>{0.5, 0.25, 1.0});
    std::istringstream outside("0.5\n1.5\n");
    CHECK_THROWS_AS(io::read_grid_values(outside), ParseError);
    const TimeGrid g({0.125, 0.3, 0.7});
    std::stringstream ss;
    io::write_grid(ss, g);
    CHECK(TimeGrid(io::read_grid_values(ss)) == g);
}

TEST_CASE("dataset with an unsorted grid is re-ordered on load") {
    test_support::ScratchDir dir("io_dataset");
    Tensor3 t(1, 1, 3, {30.0, 10.0, 20.0});
    io::write_tensor_csv(dir.path() / "t.csv", t);
    {
        std::ofstream g(dir.path() / "g.csv");
        g << "0.9\n0.1\n0.5\n";
    }
    const Dataset d = io::read_dataset(dir.path() / "t.csv", dir.path() / "g.csv");
    CHECK(d.grid[0] == 0.1);
    CHECK(d.y(0, 0, 0) == 10.0);
    CHECK(d.y(0, 0, 1) == 20.0);
    CHECK(d.y(0, 0, 2) == 30.0);

    {
        std::ofstream g(dir.path() / "short.csv");
        g << "0.9\n0.1\n";
    }
    CHECK_THROWS_AS(io::read_dataset(dir.path() / "t.csv", dir.path() / "short.csv"), SchemaError);
    CHECK_THROWS_AS(io::read_dataset(dir.path() / "t.csv", dir.path() / "nope.csv"), IoError);
}

TEST_CASE("JSON forms") {
    const auto spec = KernelSpec::from_eigenvalues({1.0, 0.5, 0.125});
    CHECK(io::kernel_spec_from_json(io::to_json(spec)) == spec);
    CHECK(io::to_json(spec)["kind"] == "eigen_list");
    CHECK(io::kernel_spec_from_json(io::to_json(KernelSpec::bernoulli())) == KernelSpec::bernoulli());

    RkhsFunction f{TimeGrid({0.1, 0.4, 0.8}), Vector(3), {}};
    f.beta << 0.1, -2.0 / 3.0, 1e-17;
    const auto back = io::rkhs_function_from_json(io::to_json(f));
    CHECK(back.grid == f.grid);
    CHECK(back.beta == f.beta);

    SimConfig sc;
    sc.p1 = 7;
    sc.sigma = 0.25;
    sc.seed = 123456789012345ull;
    const auto sc2 = io::sim_config_from_json(io::to_json(sc));
    CHECK(sc2.p1 == 7);
    CHECK(sc2.sigma == 0.25);
    CHECK(sc2.seed == sc.seed);

    sc.sigma = 1.0;
    sc.r = 2;
    const auto truth = gen_truth(sc);
    const auto t2 = io::ground_truth_from_json(io::to_json(truth, sc));
    CHECK(t2.components[1].a == truth.components[1].a);
    CHECK(t2.components[0].xi.coeffs == truth.components[0].xi.coeffs);
    CHECK(t2.remainder[5].coeffs == truth.remainder[5].coeffs);
}

TEST_CASE("decomposition directory round trip") {
    test_support::ScratchDir dir("io_decomp");
    SimConfig sc;
    sc.p1 = 6;
    sc.p2 = 5;
    sc.n = 15;
    sc.r = 2;
    sc.seed = 4;
    const auto s = simulate(sc);
    FitConfig cfg;
    cfg.rank = 2;
    const auto d = sequential_decompose(s.data.y, s.data.grid, cfg);
    const auto manifest = io::write_decomposition(dir.path(), d, 64, {{"note", "x"}});
    CHECK(manifest["note"] == "x");
    CHECK(manifest["lambdas"].size() == 2);
    CHECK(fs::exists(dir.path() / "trace.csv"));
    CHECK(fs::exists(dir.path() / "component_2_xi_sampled.csv"));

    const auto back = io::read_decomposition(dir.path());
    REQUIRE(back.components.size() == 2);
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(back.components[l].lambda == d.components[l].lambda);
        CHECK(back.components[l].a == d.components[l].a);
        CHECK(back.components[l].b == d.components[l].b);
        CHECK(back.components[l].xi.beta == d.components[l].xi.beta);
        CHECK(back.components[l].xi.grid == d.components[l].xi.grid);
    }
    CHECK(back.residual_frob == d.residual_frob);
    CHECK(back.config.rank == 2);

    std::ifstream sample(dir.path() / "component_1_xi_sampled.csv");
    std::string line;
    std::size_t rows = 0;
    std::getline(sample, line);
    CHECK(line == "t,value");
    while (std::getline(sample, line)) ++rows;
    CHECK(rows == 64);
}

TEST_CASE("format_double keeps 17 significant digits") {
    CHECK(io::format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

}  // TEST_SUITE
