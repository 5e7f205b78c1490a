#pragma once

// Subcommand implementations behind the `ftsvd` executable. Every cmd_*
// throws ftsvd errors; run() maps them onto exit codes.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ftsvd/baselines.hpp"
#include "ftsvd/ftsvd.hpp"
#include "ftsvd/metrics.hpp"
#include "ftsvd/simulate.hpp"

namespace ftsvd::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
    exit_ok = 0,
    exit_internal = 1,
    exit_config = 2,
    exit_io = 3,
    exit_numeric = 4,
};

int exit_code_for(const std::exception& e);

/// Worker count for `jobs` independent tasks: hardware concurrency, capped by
/// FTSVD_THREADS when set. Throws ArgumentError on a malformed FTSVD_THREADS.
std::size_t worker_threads(std::size_t jobs);

struct SimulateOptions {
    SimConfig sim;
    fs::path out_dir = ".";
    std::size_t reps = 0;  ///< 0: single run with sim.seed; else rep_001.. with seed_base + rep - 1
    std::uint64_t seed_base = 0;
};
/// Writes tensor.csv, grid.csv, truth.json (per rep directory when reps > 0).
void cmd_simulate(const SimulateOptions& opt);

struct DecomposeOptions {
    fs::path input;
    fs::path grid;
    fs::path out_dir = ".";
    FitConfig fit;
    std::size_t plot_grid = 512;
};
Decomposition cmd_decompose(const DecomposeOptions& opt);

struct RankSelectOptions {
    fs::path input;
    fs::path grid;
    fs::path out_dir = ".";
    std::size_t rank_max = 5;
    FitConfig fit;
    std::optional<double> p_h;
    std::size_t plot_grid = 512;
};
/// Writes bic.csv (`r,bic`) and the selected-rank decomposition with
/// r_hat / perfect_fit / p_h in its manifest.
RankSelection cmd_rank_select(const RankSelectOptions& opt);

struct EvalOptions {
    fs::path estimated;  ///< decomposition directory or truth JSON
    fs::path truth;      ///< truth JSON or decomposition directory
    fs::path out = "report.json";
    std::size_t quad_m = default_quadrature_size;
};
EvalReport cmd_eval(const EvalOptions& opt);

/// Components of a decomposition directory or truth JSON, sampled on the
/// quadrature midpoints.
std::vector<ScoredComponent> load_scored(const fs::path& source, std::size_t quad_m = default_quadrature_size);

struct IngestOptions {
    fs::path input;
    fs::path out_dir = ".";
    double pseudocount = 0.5;
};
/// counts CSV -> out_dir/tensor.csv of log-compositions.
Tensor3 cmd_ingest_counts(const IngestOptions& opt);

struct TrajectoryOptions {
    fs::path input;
    fs::path grid;
    fs::path component;          ///< decomposition directory
    std::size_t component_index = 1;
    fs::path labels;             ///< one group label per mode-1 index; empty: single group "all"
    fs::path out_dir = ".";
};
/// Writes trajectories.csv (`i,k,value`) and bands.csv.
std::vector<TrajectoryBand> cmd_trajectories(const TrajectoryOptions& opt);

struct SampleOptions {
    fs::path input;  ///< decomposition directory or truth JSON
    fs::path out_dir = ".";
    std::size_t plot_grid = 512;
};
/// Writes xi_<l>.csv on a uniform plot grid for every component.
void cmd_sample(const SampleOptions& opt);

struct SweepOptions {
    SimConfig sim;
    FitConfig fit;
    std::size_t reps = 20;
    std::uint64_t seed_base = 0;
    bool with_cp = false;
    CpConfig cp;
    fs::path out_dir = ".";
};
struct SweepRow {
    std::size_t rep = 0;
    std::uint64_t seed = 0;
    ComponentErrors ftsvd;
    std::optional<ComponentErrors> cp;
};
/// Simulate, fit and score `reps` seeds on worker threads. Rows come back in
/// rep order whatever the thread count. Writes sweep.csv and summary.json.
std::vector<SweepRow> cmd_sweep(const SweepOptions& opt);

/// Parse argv, dispatch, and map failures to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ftsvd::cli
