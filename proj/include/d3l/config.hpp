#pragma once

#include "d3l/decomposition.hpp"
#include "d3l/errors.hpp"
#include "d3l/kernel.hpp"
#include "d3l/schwarz.hpp"
#include "d3l/synthetic.hpp"
#include "d3l/tikhonov.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace d3l::config {

inline constexpr const char* kToolVersion = "d3l 0.1.0";

/// Invalid configuration value; `field` is the dotted path, e.g. "solver.lambda".
class ConfigError : public InvalidArgument {
public:
    ConfigError(const std::string& field, const std::string& message)
        : InvalidArgument(field + ": " + message), field_(field) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct DatasetSource {
    std::optional<std::filesystem::path> csv_path;
    std::string target_column = "y";
    std::optional<data::SyntheticSpec> synthetic;
};

struct DecompositionSpec {
    int p = 1;
    Eigen::Index overlap_width = 2;
    /// Explicit ranges override p and overlap_width when nonempty.
    std::vector<dd::Range> ranges;
};

enum class SolverMethod { d3l, global };

struct SolverSpec {
    SolverMethod method = SolverMethod::d3l;
    /// lambda lives in d3l.lambda and is mirrored into global.lambda.
    tikhonov::TikhonovConfig global;
    schwarz::D3LConfig d3l;
};

struct BenchSection {
    std::string mode = "strong";
    std::vector<int> p_list{1, 2, 4, 8};
    Eigen::Index n = 1024;
    Eigen::Index n_loc = 256;
    Eigen::Index overlap_width = 2;
    int repetitions = 3;
};

struct RunConfig {
    DatasetSource dataset;
    kernel::KernelSpec kernel = kernel::KernelSpec::gaussian(1.0);
    DecompositionSpec decomposition;
    SolverSpec solver;
    BenchSection bench;
    std::filesystem::path out_dir = "d3l_out";
};

[[nodiscard]] nlohmann::json to_json(const kernel::KernelSpec& spec);
[[nodiscard]] kernel::KernelSpec kernel_from_json(const nlohmann::json& j, const std::string& field = "kernel");

[[nodiscard]] nlohmann::json to_json(const data::SyntheticSpec& spec);
[[nodiscard]] data::SyntheticSpec synthetic_from_json(const nlohmann::json& j,
                                                      const std::string& field = "dataset.synthetic");

[[nodiscard]] nlohmann::json to_json(const RunConfig& cfg);
/// Parses and validates. Throws ConfigError naming the field at fault;
/// unknown keys are rejected.
[[nodiscard]] RunConfig run_config_from_json(const nlohmann::json& j);
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);

/// Semantic checks across sections; throws ConfigError.
void validate(const RunConfig& cfg);

/// 64-bit FNV-1a of the compact JSON form, as 16 hex digits.
[[nodiscard]] std::string hash_json(const nlohmann::json& j);
[[nodiscard]] std::string kernel_hash(const kernel::KernelSpec& spec);
[[nodiscard]] std::string config_hash(const RunConfig& cfg);

/// Dataset named by the config (CSV file or synthetic generator).
[[nodiscard]] data::Dataset load_dataset(const RunConfig& cfg);

/// Decomposition named by the config for a domain of size n.
[[nodiscard]] dd::Decomposition make_decomposition(const RunConfig& cfg, Eigen::Index n);

} // namespace d3l::config
