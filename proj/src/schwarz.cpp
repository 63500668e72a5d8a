#include "d3l/schwarz.hpp"

#include "d3l/errors.hpp"
#include "worker_team.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

namespace d3l::schwarz {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double omega_of(const D3LConfig& cfg, int i) {
    return cfg.omega.empty() ? 1.0 : cfg.omega[static_cast<std::size_t>(i)];
}

std::vector<Range> overlaps_of(const Decomposition& dec, int i) {
    std::vector<Range> out;
    for (const int j : dec.neighbors(i)) out.push_back(dec.overlap(i, j));
    return out;
}

// Runs fn(i) for every subdomain, on the team when present.
void for_each_subdomain(detail::WorkerTeam* team, int p, const std::function<void(int)>& fn) {
    if (team == nullptr) {
        for (int i = 0; i < p; ++i) fn(i);
    } else {
        team->run(p, fn);
    }
}

using FunctionalFactory = std::function<LocalFunctional(int)>;
// Global objective J(EO_i(v)) of an extended local vector.
using ExtensionObjective = std::function<double(int, const Vector&)>;

D3LResult run_impl(const FunctionalFactory& make_functional, const ExtensionObjective& extension_objective,
                   const Decomposition& dec, const D3LConfig& cfg) {
    const auto start = Clock::now();
    validate(cfg, dec.p());
    if (cfg.initial_coeffs && cfg.initial_coeffs->size() != dec.n()) {
        throw InvalidArgument("initial_coeffs has length " + std::to_string(cfg.initial_coeffs->size())
                              + ", domain has " + std::to_string(dec.n()));
    }
    const int p = dec.p();

    std::optional<detail::WorkerTeam> team;
    if (cfg.execution.mode == Execution::Mode::parallel) {
        int workers = cfg.execution.workers;
        if (workers == 0) workers = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
        team.emplace(std::min(workers, p));
    }
    detail::WorkerTeam* team_ptr = team ? &*team : nullptr;

    D3LResult result;
    result.timings.local_s.assign(static_cast<std::size_t>(p), 0.0);
    std::vector<std::optional<LocalFunctional>> functionals(static_cast<std::size_t>(p));
    std::vector<std::optional<LocalSolver>> solvers(static_cast<std::size_t>(p));
    auto& states = result.states;
    states.resize(static_cast<std::size_t>(p));

    // Setup: each worker assembles and factors its own local problems.
    auto phase = Clock::now();
    for_each_subdomain(team_ptr, p, [&](int i) {
        const auto t0 = Clock::now();
        const auto k = static_cast<std::size_t>(i);
        functionals[k].emplace(make_functional(i));
        solvers[k].emplace(*functionals[k], omega_of(cfg, i), overlaps_of(dec, i));
        auto& s = states[k];
        s.subdomain = i;
        s.range = dec.subdomain(i);
        s.coeffs = cfg.initial_coeffs ? dd::restrict(*cfg.initial_coeffs, i, dec) : Vector::Zero(s.range.size());
        s.iteration = 0;
        result.timings.local_s[k] += seconds_since(t0);
    });
    result.timings.setup_s = seconds_since(phase);

    phase = Clock::now();
    result.trace = exchange(states, dec);
    result.timings.exchange_s += seconds_since(phase);

    const bool has_edges = p > 1;
    std::vector<double> deltas(static_cast<std::size_t>(p), 0.0);
    bool converged = false;
    for (int l = 1; l <= cfg.max_outer; ++l) {
        phase = Clock::now();
        for_each_subdomain(team_ptr, p, [&](int i) {
            const auto t0 = Clock::now();
            const auto k = static_cast<std::size_t>(i);
            auto& s = states[k];
            Vector next = solvers[k]->solve(s, cfg.inner_tol, cfg.max_inner);
            deltas[k] = (next - s.coeffs).norm();
            s.coeffs = std::move(next);
            s.objective = local_objective(s, s.coeffs, *functionals[k], omega_of(cfg, i), dec);
            s.iteration = l;
            result.timings.local_s[k] += seconds_since(t0);
        });
        result.timings.sweeps_s += seconds_since(phase);

        phase = Clock::now();
        auto messages = exchange(states, dec);
        result.trace.insert(result.trace.end(), messages.begin(), messages.end());
        result.timings.exchange_s += seconds_since(phase);

        double residual = 0.0;
        for (const double d : deltas) residual = std::max(residual, d);
        result.per_iteration_residuals.push_back(residual);
        result.outer_iterations = l;
        if (!has_edges) {
            result.fixed_point = true;
            converged = true;
            break;
        }
        if (residual < cfg.eps) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        const double last = result.per_iteration_residuals.back();
        throw NotConverged("D3L did not converge in " + std::to_string(cfg.max_outer)
                               + " outer iterations (last residual " + std::to_string(last) + ", eps "
                               + std::to_string(cfg.eps) + ")",
                           result.per_iteration_residuals);
    }

    for (int i = 0; i < p; ++i) {
        const auto k = static_cast<std::size_t>(i);
        result.local_objectives.push_back((*functionals[k])(states[k].coeffs));
    }

    phase = Clock::now();
    if (cfg.gather == Gather::partition_of_unity) {
        std::vector<Vector> locals;
        for (const auto& s : states) locals.push_back(s.coeffs);
        result.alpha = dd::reconstruct(locals, dec);
    } else {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < p; ++i) {
            const double value = extension_objective(i, states[static_cast<std::size_t>(i)].coeffs);
            if (value < best) {
                best = value;
                result.gathered_from = i;
            }
        }
        result.alpha = dd::extend(states[static_cast<std::size_t>(result.gathered_from)].coeffs,
                                  result.gathered_from, dec);
    }
    result.timings.gather_s = seconds_since(phase);
    result.timings.total_s = seconds_since(start);
    return result;
}

} // namespace

std::string to_string(Gather g) {
    return g == Gather::partition_of_unity ? "partition_of_unity" : "best_local_objective";
}

Gather gather_from_string(const std::string& name) {
    if (name == "partition_of_unity") return Gather::partition_of_unity;
    if (name == "best_local_objective") return Gather::best_local_objective;
    throw InvalidArgument("unknown gather mode '" + name + "'");
}

void validate(const D3LConfig& cfg, int p) {
    if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) throw InvalidArgument("solver.lambda must be >= 0");
    if (!(cfg.eps > 0.0)) throw InvalidArgument("solver.eps must be > 0");
    if (cfg.max_outer < 1) throw InvalidArgument("solver.max_outer must be >= 1");
    if (cfg.max_inner < 1) throw InvalidArgument("solver.max_inner must be >= 1");
    if (!(cfg.inner_tol >= 0.0)) throw InvalidArgument("solver.inner_tol must be >= 0");
    if (!cfg.omega.empty() && static_cast<int>(cfg.omega.size()) != p) {
        throw InvalidArgument("solver.omega has " + std::to_string(cfg.omega.size()) + " entries, expected "
                              + std::to_string(p));
    }
    for (const double w : cfg.omega) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("solver.omega entries must be >= 0");
    }
    if (cfg.execution.mode == Execution::Mode::parallel && cfg.execution.workers < 0) {
        throw InvalidArgument("solver.threads must be >= 0");
    }
}

const Halo* LocalState::halo_from(int j) const {
    for (const auto& h : halo_in) {
        if (h.from == j) return &h;
    }
    return nullptr;
}

nlohmann::json to_json(const Message& m) {
    return {{"iteration", m.iteration}, {"from", m.from}, {"to", m.to}, {"edge", {std::min(m.from, m.to),
                                                                                 std::max(m.from, m.to)}},
            {"payload", m.payload}};
}

std::string to_jsonl(const std::vector<Message>& trace) {
    std::ostringstream out;
    for (const auto& m : trace) out << to_json(m).dump() << '\n';
    return out.str();
}

double local_objective(const LocalState& state, const Vector& v, const LocalFunctional& problem, double omega_i,
                       const Decomposition& dec) {
    double value = problem(v);
    for (const int j : dec.neighbors(state.subdomain)) {
        const Halo* halo = state.halo_from(j);
        if (halo == nullptr) {
            throw InvalidArgument("subdomain " + std::to_string(state.subdomain) + " has no halo from neighbor "
                                  + std::to_string(j));
        }
        const auto offset = halo->overlap.begin - problem.range.begin;
        value += omega_i * (v.segment(offset, halo->overlap.size()) - halo->values).squaredNorm();
    }
    return value;
}

namespace {

Matrix local_hessian(const LocalFunctional& problem, double omega, const std::vector<Range>& overlaps) {
    Matrix m = problem.normal_matrix();
    for (const auto& ov : overlaps) {
        const auto offset = ov.begin - problem.range.begin;
        m.diagonal().segment(offset, ov.size()).array() += omega;
    }
    return m;
}

} // namespace

LocalSolver::LocalSolver(const LocalFunctional& problem, double omega, std::vector<Range> overlaps)
    : range_(problem.range),
      omega_(omega),
      overlaps_(std::move(overlaps)),
      base_rhs_(problem.normal_rhs()),
      system_(local_hessian(problem, omega, overlaps_)) {}

Vector LocalSolver::rhs(const LocalState& state) const {
    Vector b = base_rhs_;
    if (omega_ == 0.0) return b;
    for (const auto& ov : overlaps_) {
        const Halo* halo = nullptr;
        for (const auto& h : state.halo_in) {
            if (h.overlap == ov) halo = &h;
        }
        if (halo == nullptr) {
            throw InvalidArgument("subdomain " + std::to_string(state.subdomain) + " is missing a halo on ["
                                  + std::to_string(ov.begin) + ", " + std::to_string(ov.end) + ")");
        }
        b.segment(ov.begin - range_.begin, ov.size()) += omega_ * halo->values;
    }
    return b;
}

Vector LocalSolver::solve(const LocalState& state, double inner_tol, int max_inner) const {
    const Vector b = rhs(state);
    const double scale = std::max(1.0, b.norm());
    Vector u = state.coeffs;
    for (int step = 0; step < max_inner; ++step) {
        const Vector r = b - system_.matrix() * u;
        if (r.norm() <= inner_tol * scale) break;
        u += system_.solve(r);
    }
    return u;
}

Vector local_solve(const LocalFunctional& problem, const LocalState& state, double omega_i, double inner_tol,
                   const Decomposition& dec) {
    const LocalSolver solver(problem, omega_i, overlaps_of(dec, problem.subdomain));
    return solver.solve(state, inner_tol, 3);
}

std::vector<Message> exchange(std::vector<LocalState>& states, const Decomposition& dec) {
    if (static_cast<int>(states.size()) != dec.p()) {
        throw InvalidArgument("expected " + std::to_string(dec.p()) + " local states, got "
                              + std::to_string(states.size()));
    }
    for (const auto& s : states) {
        if (s.iteration != states.front().iteration) {
            throw InvalidArgument("local states are at different outer iterations (" + std::to_string(s.iteration)
                                  + " vs " + std::to_string(states.front().iteration) + ")");
        }
    }
    std::vector<Message> log;
    const auto send = [&](int from, int to) {
        const auto ov = dec.overlap(from, to);
        const auto& src = states[static_cast<std::size_t>(from)];
        auto& dst = states[static_cast<std::size_t>(to)];
        Vector values = src.coeffs.segment(ov.begin - src.range.begin, ov.size());
        bool stored = false;
        for (auto& h : dst.halo_in) {
            if (h.from == from) {
                h.overlap = ov;
                h.values = values;
                stored = true;
            }
        }
        if (!stored) dst.halo_in.push_back({from, ov, std::move(values)});
        log.push_back({src.iteration, from, to, ov.size()});
    };
    for (const auto& [i, j] : dec.edges()) {
        send(i, j);
        send(j, i);
    }
    return log;
}

D3LResult run(const Matrix& a, const Vector& y, const Decomposition& dec, const D3LConfig& cfg) {
    if (a.rows() != dec.n() || a.cols() != dec.n() || y.size() != dec.n()) {
        throw InvalidArgument("kernel matrix/targets do not match the decomposed domain of size "
                              + std::to_string(dec.n()));
    }
    const auto make = [&](int i) { return dd::restrict_functional(a, y, cfg.lambda, i, dec); };
    const auto objective = [&](int i, const Vector& v) {
        const auto& r = dec.subdomain(i);
        return (a.middleCols(r.begin, r.size()) * v - y).squaredNorm() + cfg.lambda * v.squaredNorm();
    };
    return run_impl(make, objective, dec, cfg);
}

D3LResult run(const kernel::KernelSpec& spec, const data::Dataset& data, const Decomposition& dec,
              const D3LConfig& cfg) {
    kernel::validate(spec, data.dim());
    if (data.size() != dec.n()) {
        throw InvalidArgument("dataset size " + std::to_string(data.size()) + " does not match the decomposed domain "
                              + std::to_string(dec.n()));
    }
    const auto make = [&](int i) { return dd::restrict_functional(spec, data, cfg.lambda, i, dec); };
    const auto objective = [&](int i, const Vector& v) {
        const auto& r = dec.subdomain(i);
        const Matrix cols = kernel::assemble_block(spec, data, 0, data.size(), r.begin, r.size());
        return (cols * v - data.targets).squaredNorm() + cfg.lambda * v.squaredNorm();
    };
    return run_impl(make, objective, dec, cfg);
}

} // namespace d3l::schwarz
