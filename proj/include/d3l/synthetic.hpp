#pragma once

#include "d3l/dataset.hpp"
#include "d3l/kernel.hpp"

#include <cstdint>
#include <string>

namespace d3l::data {

enum class Generator { smooth_sine, piecewise_linear, kernel_planted };

[[nodiscard]] std::string to_string(Generator g);
[[nodiscard]] Generator generator_from_string(const std::string& name);

// How the input points are placed.
//  uniform:   every coordinate ~ U[0, 1).
//  segmented: the index range is cut into the 2p - 1 segments
//             E_1, O_12, E_2, ..., E_p of uniform_decompose(n, p, overlap_width).
//             Each segment is a chain of points `spacing` apart along the first
//             coordinate, and consecutive segments are `gap` apart. Remaining
//             coordinates ~ U[0, 1). A truncated gaussian with radius < gap then
//             yields a kernel matrix that is block diagonal over the segments.
enum class Layout { uniform, segmented };

[[nodiscard]] std::string to_string(Layout l);
[[nodiscard]] Layout layout_from_string(const std::string& name);

struct SyntheticSpec {
    Eigen::Index n = 100;
    Eigen::Index d = 1;
    Generator generator = Generator::smooth_sine;
    double noise_sd = 0.0;
    std::uint64_t seed = 0;
    /// Kernel used by the kernel-planted generator.
    kernel::KernelSpec kernel = kernel::KernelSpec::gaussian(1.0);

    Layout layout = Layout::uniform;
    int segments_p = 1;
    Eigen::Index segments_overlap = 1;
    double spacing = 1.5;
    double gap = 5.0;
};

void validate(const SyntheticSpec& spec);

/// Pure function of `spec`: draws points, then (kernel-planted) the planted
/// coefficients, then the noise, from one mt19937_64 stream seeded by `seed`.
///   smooth-sine:      y = (1/d) sum_j sin(2 pi x_j) + noise
///   piecewise-linear: y = 1 - |2 mean(x) - 1| + noise
///   kernel-planted:   a* ~ N(0, 1), y = A a* + noise
[[nodiscard]] Dataset generate(const SyntheticSpec& spec);

} // namespace d3l::data
