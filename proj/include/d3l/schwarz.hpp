#pragma once

#include "d3l/dataset.hpp"
#include "d3l/decomposition.hpp"
#include "d3l/kernel.hpp"
#include "d3l/linalg.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace d3l::schwarz {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using dd::Decomposition;
using dd::LocalFunctional;
using dd::Range;

enum class Gather { partition_of_unity, best_local_objective };

[[nodiscard]] std::string to_string(Gather g);
[[nodiscard]] Gather gather_from_string(const std::string& name);

struct Execution {
    enum class Mode { sequential, parallel };
    Mode mode = Mode::sequential;
    int workers = 1;  // parallel only; 0 picks the hardware thread count

    [[nodiscard]] static Execution sequential() { return {}; }
    [[nodiscard]] static Execution parallel(int workers) { return {Mode::parallel, workers}; }
};

struct D3LConfig {
    double lambda = 0.0;
    /// Overlap-penalty weight per subdomain; empty means 1.0 everywhere.
    std::vector<double> omega;
    double eps = 1e-8;
    int max_outer = 1000;
    Execution execution;
    Gather gather = Gather::partition_of_unity;
    /// Local solves stop refining once ||grad F_i|| <= inner_tol * max(1, ||grad F_i(0)||).
    double inner_tol = 1e-12;
    int max_inner = 3;
    /// Global starting vector, restricted to each subdomain; zero when absent.
    std::optional<Vector> initial_coeffs;
};

/// Throws InvalidArgument naming the offending field.
void validate(const D3LConfig& cfg, int p);

/// Neighbor coefficients on one shared region, as last received.
struct Halo {
    int from = 0;
    Range overlap;
    Vector values;
};

struct LocalState {
    int subdomain = 0;
    Range range;
    Vector coeffs;
    std::vector<Halo> halo_in;
    double objective = 0.0;
    int iteration = 0;

    [[nodiscard]] const Halo* halo_from(int j) const;
};

/// One halo transfer, recorded by exchange().
struct Message {
    int iteration = 0;
    int from = 0;
    int to = 0;
    Index payload = 0;  // number of coefficients sent

    friend bool operator==(const Message&, const Message&) = default;
};

[[nodiscard]] nlohmann::json to_json(const Message& m);
/// One JSON object per line.
[[nodiscard]] std::string to_jsonl(const std::vector<Message>& trace);

/// F_i(v) = J_i(v) + omega_i * sum_j ||v on Omega_ij - halo_j||^2 over every
/// adjacent j. Throws InvalidArgument when a neighbor's halo is missing.
[[nodiscard]] double local_objective(const LocalState& state, const Vector& v, const LocalFunctional& problem,
                                     double omega_i, const Decomposition& dec);

// Factored local normal equations of F_i:
//   (A^T W A + lambda W + omega D) v = A^T W y + omega h,
// with D the overlap indicator and h the halo values placed on their overlaps.
class LocalSolver {
public:
    /// Throws IllConditioned when the local Hessian is not positive definite.
    LocalSolver(const LocalFunctional& problem, double omega, std::vector<Range> overlaps);

    [[nodiscard]] Index size() const noexcept { return base_rhs_.size(); }
    [[nodiscard]] const linalg::SpdSystem& system() const noexcept { return system_; }

    [[nodiscard]] Vector rhs(const LocalState& state) const;

    /// Incremental update u += M^{-1}(rhs - M u) from the current iterate until
    /// the gradient test passes or max_inner updates were applied.
    [[nodiscard]] Vector solve(const LocalState& state, double inner_tol, int max_inner) const;

private:
    Range range_;
    double omega_;
    std::vector<Range> overlaps_;
    Vector base_rhs_;
    linalg::SpdSystem system_;
};

/// Minimizer of local_objective for the frozen halo of `state`.
[[nodiscard]] Vector local_solve(const LocalFunctional& problem, const LocalState& state, double omega_i,
                                 double inner_tol, const Decomposition& dec);

/// For every adjacency edge (i, j) sends state i's coefficients on Omega_ij
/// to j and vice versa. Only halo_in changes. Returns the message log.
/// Throws InvalidArgument when states are at different iterations.
std::vector<Message> exchange(std::vector<LocalState>& states, const Decomposition& dec);

struct Timings {
    double setup_s = 0.0;     // local block assembly and factorization
    double sweeps_s = 0.0;    // all local solve phases
    double exchange_s = 0.0;
    double gather_s = 0.0;
    double total_s = 0.0;
    std::vector<double> local_s;  // per subdomain: setup plus its local solves
};

struct D3LResult {
    Vector alpha;
    int outer_iterations = 0;
    std::vector<double> per_iteration_residuals;
    /// Set when p = 1: the single local solve is already the fixed point.
    bool fixed_point = false;
    std::vector<double> local_objectives;  // final J_i values
    std::vector<LocalState> states;
    std::vector<Message> trace;
    int gathered_from = -1;  // best_local_objective only
    Timings timings;
};

/// Algorithm driver on an assembled kernel matrix.
[[nodiscard]] D3LResult run(const Matrix& a, const Vector& y, const Decomposition& dec, const D3LConfig& cfg);

/// Same, assembling only the diagonal blocks A[Omega_i, Omega_i] inside the
/// workers. Block assembly counts toward setup time.
[[nodiscard]] D3LResult run(const kernel::KernelSpec& spec, const data::Dataset& data, const Decomposition& dec,
                            const D3LConfig& cfg);

} // namespace d3l::schwarz
