#pragma once

// File formats.
//
//   tensor CSV   header `i,j,k,value`, 1-based indices, one row per entry;
//                k indexes the grid file's line order.
//   grid file    one time value per line.
//   vector CSV   header `index,value`, 1-based.
//   beta CSV     header `k,s,beta`.
//   sample CSV   header `t,value` on a uniform plotting grid over [0, 1].
//   trace CSV    header `component,iteration,step_a,step_b,step_xi,lambda`.
//   bands CSV    header `time_index,group,mean,low,high`.
//
// Floats are written with 17 significant digits so that write-then-read is
// lossless.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ftsvd/baselines.hpp"
#include "ftsvd/ftsvd.hpp"
#include "ftsvd/metrics.hpp"
#include "ftsvd/simulate.hpp"

namespace ftsvd::io {

namespace fs = std::filesystem;
using nlohmann::json;

/// printf("%.17g").
std::string format_double(double x);

void write_tensor_csv(std::ostream& os, const Tensor3& t);
void write_tensor_csv(const fs::path& path, const Tensor3& t);
/// Dims are the largest indices seen; every (i, j, k) must appear exactly once.
Tensor3 read_tensor_csv(std::istream& is);
Tensor3 read_tensor_csv(const fs::path& path);

void write_grid(std::ostream& os, const TimeGrid& grid);
void write_grid(const fs::path& path, const TimeGrid& grid);
/// Raw values in file order (not sorted).
std::vector<double> read_grid_values(std::istream& is);
std::vector<double> read_grid_values(const fs::path& path);

/// Tensor plus grid, re-ordered to ascending time if the grid file was not sorted.
Dataset read_dataset(const fs::path& tensor_path, const fs::path& grid_path);

void write_vector_csv(const fs::path& path, const Vector& v);
Vector read_vector_csv(const fs::path& path);

void write_beta_csv(const fs::path& path, const RkhsFunction& f);
/// Grid and beta back from a beta CSV.
RkhsFunction read_beta_csv(const fs::path& path);

/// f on `points` uniform points of [0, 1] (endpoints included).
void write_function_sample(const fs::path& path, const std::function<double(double)>& f, std::size_t points = 512);
void write_function_sample(const fs::path& path, const RkhsFunction& f, std::size_t points = 512);

void write_trace_csv(const fs::path& path, const Decomposition& d);
void write_bands_csv(const fs::path& path, std::span<const TrajectoryBand> bands);

/// Long `i,j,k,count` file; same layout rules as the tensor CSV.
Tensor3 read_count_csv(const fs::path& path);

json to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const json& j);

json to_json(const RkhsFunction& f);
RkhsFunction rkhs_function_from_json(const json& j);

json to_json(const FitConfig& cfg);
FitConfig fit_config_from_json(const json& j);

json to_json(const SimConfig& cfg);
SimConfig sim_config_from_json(const json& j);

json to_json(const GroundTruth& truth, const SimConfig& cfg);
GroundTruth ground_truth_from_json(const json& j);

json to_json(const EvalReport& report);

/// Manifest + per-component CSVs + sampled functions + trace under `dir`.
/// Returns the manifest that was written to `dir/manifest.json`.
json write_decomposition(const fs::path& dir, const Decomposition& d, std::size_t plot_points = 512,
                         const json& extra = json::object());
Decomposition read_decomposition(const fs::path& dir);

json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& j);

}  // namespace ftsvd::io
