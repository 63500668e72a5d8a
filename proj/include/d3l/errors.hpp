#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace d3l {

/// Invalid input: bad sizes, out-of-range ids, violated preconditions.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input file (CSV) with the offending location.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t row, std::string column)
        : std::runtime_error(what), row_(row), column_(std::move(column)) {}

    [[nodiscard]] std::size_t row() const noexcept { return row_; }
    [[nodiscard]] const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

/// Matrix too close to singular for the requested factorization.
class IllConditioned : public std::runtime_error {
public:
    IllConditioned(const std::string& what, double pivot)
        : std::runtime_error(what), pivot_(pivot) {}

    [[nodiscard]] double pivot() const noexcept { return pivot_; }

private:
    double pivot_;
};

/// Iterative method stopped at its cap. Carries the residual trace.
class NotConverged : public std::runtime_error {
public:
    NotConverged(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), history_(std::move(history)) {}

    [[nodiscard]] const std::vector<double>& history() const noexcept { return history_; }
    [[nodiscard]] double final_residual() const noexcept {
        return history_.empty() ? 0.0 : history_.back();
    }

private:
    std::vector<double> history_;
};

/// Decomposition sizing problem (infeasible split, oversized shift).
class SizingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Disconnected adjacency graph in the load balancer.
class DisconnectedGraph : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace d3l
