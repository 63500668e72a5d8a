#pragma once

#include "d3l/decomposition.hpp"
#include "d3l/kernel.hpp"
#include "d3l/schwarz.hpp"
#include "d3l/synthetic.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace d3l::perf {

/// (1/p) * t_global / t_local. Throws InvalidArgument on nonpositive input.
[[nodiscard]] double scale_up(double t_global, double t_local, int p);

/// t_serial / t_parallel.
[[nodiscard]] double speed_up(double t_serial, double t_parallel);

/// Polynomial cost model T(n) = sum_k a_k n^k of the reduced kernel.
struct ComplexityModel {
    std::vector<double> coefficients;  // a_0 .. a_d

    [[nodiscard]] int degree() const noexcept { return static_cast<int>(coefficients.size()) - 1; }
    /// a_d = 1, every lower coefficient 0, d = 4.
    [[nodiscard]] static ComplexityModel leading_only(int degree = 4);
};

void validate(const ComplexityModel& model);

// alpha(N_loc, p) = (sum_k a_{d-k} / N^k) / (sum_k a_{d-k} p^k / N_loc^k),
// k = 0..d, N = N_loc * p.
[[nodiscard]] double alpha_factor(const ComplexityModel& model, Eigen::Index n_loc, int p);

/// alpha(N_loc, p) * p^(d-1), the lower bound on the scale-up factor.
[[nodiscard]] double scale_up_lower_bound(const ComplexityModel& model, Eigen::Index n_loc, int p);

// Shared indices per adjacency edge over the work touching those edges:
//   sum_edges |Omega_ij| / sum_edges (vol_i + vol_j),  vol_i = sum_{k in Omega_i} 1/multiplicity(k).
// Zero without edges. For uniform decompositions this is about w / (2 N_loc).
[[nodiscard]] double surface_to_volume(const dd::Decomposition& dec);

struct PerfReport {
    std::string mode = "strong";
    Eigen::Index n = 0;
    int p = 1;
    Eigen::Index n_loc = 0;
    Eigen::Index overlap = 0;
    std::uint64_t seed = 0;
    std::string kernel_hash;
    double t_global_s = 0.0;
    std::vector<double> t_local_s;
    double t_parallel_s = 0.0;
    double speed_up = 0.0;
    double scale_up = 0.0;
    double surface_to_volume = 0.0;
    int outer_iterations = 0;
    int workers = 1;

    friend bool operator==(const PerfReport&, const PerfReport&) = default;
};

[[nodiscard]] nlohmann::json to_json(const PerfReport& r);
[[nodiscard]] PerfReport report_from_json(const nlohmann::json& j);

/// Header plus one row per report; t_local_s is ';'-joined in one cell.
[[nodiscard]] std::string to_csv(const std::vector<PerfReport>& reports);

struct BenchSpec {
    data::SyntheticSpec data;
    kernel::KernelSpec kernel = kernel::KernelSpec::gaussian(1.0);
    schwarz::D3LConfig solver;
    Eigen::Index overlap_width = 2;
    int repetitions = 3;
};

void validate(const BenchSpec& spec, const std::vector<int>& p_list);

/// Fixed N, each p in p_list. t_global is the p = 1 run on the same data.
/// Every timing is the median of `repetitions` runs.
[[nodiscard]] std::vector<PerfReport> bench_strong(const BenchSpec& spec, Eigen::Index n,
                                                   const std::vector<int>& p_list);

/// Fixed local size: N = n_loc * p for each p.
[[nodiscard]] std::vector<PerfReport> bench_weak(const BenchSpec& spec, Eigen::Index n_loc,
                                                 const std::vector<int>& p_list);

/// Writes reports.json and reports.csv into `dir`, returning the JSON path.
std::filesystem::path write_reports(const std::vector<PerfReport>& reports, const std::filesystem::path& dir,
                                    const nlohmann::json& provenance);

} // namespace d3l::perf
