#pragma once

#include "d3l/dataset.hpp"
#include "d3l/kernel.hpp"
#include "d3l/synthetic.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <unistd.h>

namespace d3l::test {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
    return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0,
                            double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    }
    return m;
}

inline data::Dataset random_dataset(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
    return data::make_dataset(random_matrix(rng, n, d, 0.0, 1.0), random_vector(rng, n));
}

// Points in clusters that match uniform_decompose(n, p, overlap); with the
// truncated kernel below the kernel matrix is block diagonal over
// E_1, O_12, E_2, ..., E_p.
inline data::SyntheticSpec segmented_spec(Eigen::Index n, int p, Eigen::Index overlap, std::uint64_t seed) {
    data::SyntheticSpec s;
    s.n = n;
    s.d = 2;
    s.seed = seed;
    s.noise_sd = 0.01;
    s.generator = data::Generator::smooth_sine;
    s.layout = data::Layout::segmented;
    s.segments_p = p;
    s.segments_overlap = overlap;
    return s;
}

inline kernel::KernelSpec truncated_gaussian() {
    return kernel::KernelSpec::gaussian(1.0, 3.0);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto dir = std::filesystem::temp_directory_path()
                     / ("d3l_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace d3l::test
