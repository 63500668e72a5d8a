#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace d3l::data {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Training samples: one row of `points` per observation. The index set
// {0..N-1} of the rows is the domain that gets decomposed.
struct Dataset {
    Matrix points;
    Vector targets;
    std::vector<std::string> feature_names;
    std::string target_name = "y";
    /// Set by the kernel-planted generator: y = A * planted (+ noise).
    std::optional<Vector> planted;

    [[nodiscard]] Eigen::Index size() const noexcept { return points.rows(); }
    [[nodiscard]] Eigen::Index dim() const noexcept { return points.cols(); }
    /// M with |y_i| <= M for all i.
    [[nodiscard]] double target_bound() const;
};

/// Checks shape and finiteness; throws InvalidArgument on violation.
void validate(const Dataset& data);

/// Builds a dataset from raw arrays and validates it.
[[nodiscard]] Dataset make_dataset(Matrix points, Vector targets);

/// Reads a comma-separated file with a header row. Every column other than
/// `target_column` becomes a feature, in file order. Accepts LF and CRLF.
[[nodiscard]] Dataset load_csv(const std::filesystem::path& path, const std::string& target_column);

/// Writes features then the target column, 17 significant digits.
void write_csv(const Dataset& data, const std::filesystem::path& path);

} // namespace d3l::data
