#include "d3l/dataset.hpp"

#include "d3l/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace d3l::data {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::optional<double> parse_real(std::string_view cell) {
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (ec != std::errc{} || ptr != end || cell.empty() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

} // namespace

double Dataset::target_bound() const {
    return targets.size() == 0 ? 0.0 : targets.cwiseAbs().maxCoeff();
}

void validate(const Dataset& data) {
    if (data.points.rows() < 1 || data.points.cols() < 1) {
        throw InvalidArgument("dataset needs N >= 1 rows and D >= 1 features");
    }
    if (data.targets.size() != data.points.rows()) {
        throw InvalidArgument("dataset has " + std::to_string(data.points.rows()) + " points but "
                              + std::to_string(data.targets.size()) + " targets");
    }
    if (!data.points.allFinite() || !data.targets.allFinite()) {
        throw InvalidArgument("dataset contains non-finite values");
    }
}

Dataset make_dataset(Matrix points, Vector targets) {
    Dataset data;
    data.points = std::move(points);
    data.targets = std::move(targets);
    for (Eigen::Index j = 0; j < data.points.cols(); ++j) {
        data.feature_names.push_back("x" + std::to_string(j + 1));
    }
    validate(data);
    return data;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidArgument("cannot open CSV file '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) {
        throw ParseError("CSV file '" + path.string() + "' is empty", 1, "");
    }
    // Strip a UTF-8 byte order mark.
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    std::vector<std::string> header;
    for (auto cell : split(line)) header.emplace_back(cell);

    std::size_t target_idx = header.size();
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == target_column) target_idx = j;
    }
    if (target_idx == header.size()) {
        throw InvalidArgument("target column '" + target_column + "' not found in header of '"
                              + path.string() + "'");
    }
    if (header.size() < 2) {
        throw InvalidArgument("CSV file needs at least one feature column besides the target");
    }

    std::vector<std::vector<double>> rows;
    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw ParseError("row " + std::to_string(row_number) + " has " + std::to_string(cells.size())
                                 + " cells, header has " + std::to_string(header.size()),
                             row_number, "");
        }
        std::vector<double> values(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const auto value = parse_real(cells[j]);
            if (!value) {
                throw ParseError("cannot parse '" + std::string(cells[j]) + "' as a finite real at row "
                                     + std::to_string(row_number) + ", column \"" + header[j] + "\"",
                                 row_number, header[j]);
            }
            values[j] = *value;
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) {
        throw ParseError("CSV file '" + path.string() + "' has no data rows", row_number, "");
    }

    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = static_cast<Eigen::Index>(header.size() - 1);
    Dataset data;
    data.points.resize(n, d);
    data.targets.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index col = 0;
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (j == target_idx) {
                data.targets(i) = rows[i][j];
            } else {
                data.points(i, col++) = rows[i][j];
            }
        }
    }
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j != target_idx) data.feature_names.push_back(header[j]);
    }
    data.target_name = target_column;
    validate(data);
    return data;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
    validate(data);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidArgument("cannot write CSV file '" + path.string() + "'");
    }
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
        const auto j_u = static_cast<std::size_t>(j);
        out << (j_u < data.feature_names.size() ? data.feature_names[j_u] : "x" + std::to_string(j + 1)) << ',';
    }
    out << data.target_name << '\n';
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < data.dim(); ++j) out << data.points(i, j) << ',';
        out << data.targets(i) << '\n';
    }
}

} // namespace d3l::data
