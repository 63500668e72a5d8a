#include "d3l/perf.hpp"

#include "d3l/config.hpp"
#include "d3l/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

namespace d3l::perf {

double scale_up(double t_global, double t_local, int p) {
    if (!(t_global > 0.0) || !(t_local > 0.0)) throw InvalidArgument("scale_up needs positive timings");
    if (p < 1) throw InvalidArgument("scale_up needs p >= 1");
    return t_global / t_local / static_cast<double>(p);
}

double speed_up(double t_serial, double t_parallel) {
    if (!(t_serial > 0.0) || !(t_parallel > 0.0)) throw InvalidArgument("speed_up needs positive timings");
    return t_serial / t_parallel;
}

ComplexityModel ComplexityModel::leading_only(int degree) {
    ComplexityModel m;
    m.coefficients.assign(static_cast<std::size_t>(degree) + 1, 0.0);
    m.coefficients.back() = 1.0;
    return m;
}

void validate(const ComplexityModel& model) {
    if (model.degree() < 1) throw InvalidArgument("complexity model needs degree >= 1");
    bool any = false;
    for (const double a : model.coefficients) {
        if (!std::isfinite(a)) throw InvalidArgument("complexity model coefficients must be finite");
        any = any || a != 0.0;
    }
    if (!any) throw InvalidArgument("complexity model is degenerate: all coefficients are zero");
    if (!(model.coefficients.back() > 0.0)) throw InvalidArgument("complexity model needs a_d > 0");
}

double alpha_factor(const ComplexityModel& model, Eigen::Index n_loc, int p) {
    validate(model);
    if (n_loc < 1 || p < 1) throw InvalidArgument("alpha_factor needs n_loc >= 1 and p >= 1");
    const int d = model.degree();
    const double nl = static_cast<double>(n_loc);
    const double n = nl * p;
    double num = 0.0;
    double den = 0.0;
    for (int k = 0; k <= d; ++k) {
        const double a = model.coefficients[static_cast<std::size_t>(d - k)];
        num += a / std::pow(n, k);
        den += a * std::pow(static_cast<double>(p) / nl, k);
    }
    return num / den;
}

double scale_up_lower_bound(const ComplexityModel& model, Eigen::Index n_loc, int p) {
    return alpha_factor(model, n_loc, p) * std::pow(static_cast<double>(p), model.degree() - 1);
}

double surface_to_volume(const dd::Decomposition& dec) {
    const auto edges = dec.edges();
    if (edges.empty()) return 0.0;
    std::vector<double> volume;
    for (int i = 0; i < dec.p(); ++i) volume.push_back(dec.weights(i).sum());
    double surface = 0.0;
    double work = 0.0;
    for (const auto& [i, j] : edges) {
        surface += static_cast<double>(dec.overlap(i, j).size());
        work += volume[static_cast<std::size_t>(i)] + volume[static_cast<std::size_t>(j)];
    }
    return surface / work;
}

nlohmann::json to_json(const PerfReport& r) {
    return {{"mode", r.mode},
            {"n", r.n},
            {"p", r.p},
            {"n_loc", r.n_loc},
            {"overlap", r.overlap},
            {"seed", r.seed},
            {"kernel_hash", r.kernel_hash},
            {"t_global_s", r.t_global_s},
            {"t_local_s", r.t_local_s},
            {"t_parallel_s", r.t_parallel_s},
            {"speed_up", r.speed_up},
            {"scale_up", r.scale_up},
            {"surface_to_volume", r.surface_to_volume},
            {"outer_iterations", r.outer_iterations},
            {"workers", r.workers}};
}

PerfReport report_from_json(const nlohmann::json& j) {
    PerfReport r;
    r.mode = j.at("mode").get<std::string>();
    r.n = j.at("n").get<Eigen::Index>();
    r.p = j.at("p").get<int>();
    r.n_loc = j.at("n_loc").get<Eigen::Index>();
    r.overlap = j.at("overlap").get<Eigen::Index>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.kernel_hash = j.at("kernel_hash").get<std::string>();
    r.t_global_s = j.at("t_global_s").get<double>();
    r.t_local_s = j.at("t_local_s").get<std::vector<double>>();
    r.t_parallel_s = j.at("t_parallel_s").get<double>();
    r.speed_up = j.at("speed_up").get<double>();
    r.scale_up = j.at("scale_up").get<double>();
    r.surface_to_volume = j.at("surface_to_volume").get<double>();
    r.outer_iterations = j.at("outer_iterations").get<int>();
    r.workers = j.value("workers", 1);
    return r;
}

std::string to_csv(const std::vector<PerfReport>& reports) {
    std::ostringstream out;
    out.precision(17);
    out << "mode,n,p,n_loc,overlap,seed,kernel_hash,t_global_s,t_local_s,t_parallel_s,speed_up,scale_up,"
           "surface_to_volume,outer_iterations,workers\n";
    for (const auto& r : reports) {
        out << r.mode << ',' << r.n << ',' << r.p << ',' << r.n_loc << ',' << r.overlap << ',' << r.seed << ','
            << r.kernel_hash << ',' << r.t_global_s << ',';
        for (std::size_t i = 0; i < r.t_local_s.size(); ++i) out << (i ? ";" : "") << r.t_local_s[i];
        out << ',' << r.t_parallel_s << ',' << r.speed_up << ',' << r.scale_up << ',' << r.surface_to_volume << ','
            << r.outer_iterations << ',' << r.workers << '\n';
    }
    return out.str();
}

void validate(const BenchSpec& spec, const std::vector<int>& p_list) {
    if (p_list.empty()) throw InvalidArgument("bench.p_list must not be empty");
    for (const int p : p_list) {
        if (p < 1) throw InvalidArgument("bench.p_list entries must be >= 1, got " + std::to_string(p));
    }
    if (spec.repetitions < 1) throw InvalidArgument("bench.repetitions must be >= 1");
    if (spec.overlap_width < 1) throw InvalidArgument("bench.overlap_width must be >= 1");
}

namespace {

struct Timed {
    double t_parallel = 0.0;
    std::vector<double> t_local;
    int outer_iterations = 0;
    int workers = 1;
};

// Median over repetitions; per-subdomain timings come from the median run.
Timed time_runs(const kernel::KernelSpec& kernel, const data::Dataset& data, const dd::Decomposition& dec,
                const schwarz::D3LConfig& cfg, int repetitions) {
    std::vector<Timed> runs;
    for (int rep = 0; rep < repetitions; ++rep) {
        const auto result = schwarz::run(kernel, data, dec, cfg);
        Timed t;
        t.t_parallel = result.timings.total_s;
        t.t_local = result.timings.local_s;
        t.outer_iterations = result.outer_iterations;
        runs.push_back(std::move(t));
    }
    std::sort(runs.begin(), runs.end(), [](const Timed& a, const Timed& b) { return a.t_parallel < b.t_parallel; });
    Timed median = runs[runs.size() / 2];
    if (cfg.execution.mode == schwarz::Execution::Mode::parallel) {
        const int requested = cfg.execution.workers == 0
                                  ? static_cast<int>(std::max(1U, std::thread::hardware_concurrency()))
                                  : cfg.execution.workers;
        median.workers = std::min(requested, dec.p());
    }
    return median;
}

data::SyntheticSpec data_for(const BenchSpec& spec, Eigen::Index n, int p) {
    auto d = spec.data;
    d.n = n;
    if (d.layout == data::Layout::segmented) {
        d.segments_p = p;
        d.segments_overlap = spec.overlap_width;
    }
    return d;
}

PerfReport make_report(const std::string& mode, const BenchSpec& spec, const data::Dataset& data, int p,
                       double t_global) {
    const auto dec = dd::uniform_decompose(data.size(), p, spec.overlap_width);
    const auto timed = time_runs(spec.kernel, data, dec, spec.solver, spec.repetitions);
    PerfReport r;
    r.mode = mode;
    r.n = data.size();
    r.p = p;
    r.n_loc = (data.size() + p - 1) / p;
    r.overlap = p > 1 ? spec.overlap_width : 0;
    r.seed = spec.data.seed;
    r.kernel_hash = config::kernel_hash(spec.kernel);
    r.t_global_s = p == 1 ? timed.t_parallel : t_global;
    r.t_local_s = timed.t_local;
    r.t_parallel_s = timed.t_parallel;
    r.outer_iterations = timed.outer_iterations;
    r.workers = timed.workers;
    r.surface_to_volume = surface_to_volume(dec);
    if (p == 1) {
        // The single local problem is the global problem.
        r.t_local_s = {r.t_global_s};
        r.speed_up = 1.0;
        r.scale_up = 1.0;
    } else {
        r.speed_up = speed_up(r.t_global_s, r.t_parallel_s);
        r.scale_up = scale_up(r.t_global_s, *std::max_element(r.t_local_s.begin(), r.t_local_s.end()), p);
    }
    return r;
}

double global_time(const BenchSpec& spec, const data::Dataset& data) {
    const auto dec = dd::uniform_decompose(data.size(), 1, 0);
    return time_runs(spec.kernel, data, dec, spec.solver, spec.repetitions).t_parallel;
}

} // namespace

std::vector<PerfReport> bench_strong(const BenchSpec& spec, Eigen::Index n, const std::vector<int>& p_list) {
    validate(spec, p_list);
    for (const int p : p_list) (void)dd::uniform_decompose(n, p, spec.overlap_width);
    // Uniform layouts give every p the same dataset, so one global timing serves all.
    const bool shared_data = spec.data.layout == data::Layout::uniform;
    std::optional<double> shared_global;
    std::vector<PerfReport> out;
    for (const int p : p_list) {
        const auto data = data::generate(data_for(spec, n, p));
        double t_global = 0.0;
        if (p != 1) {
            if (shared_data && shared_global) {
                t_global = *shared_global;
            } else {
                t_global = global_time(spec, data);
                if (shared_data) shared_global = t_global;
            }
        }
        auto report = make_report("strong", spec, data, p, t_global);
        if (p == 1 && shared_data) shared_global = report.t_global_s;
        out.push_back(std::move(report));
    }
    return out;
}

std::vector<PerfReport> bench_weak(const BenchSpec& spec, Eigen::Index n_loc, const std::vector<int>& p_list) {
    validate(spec, p_list);
    if (n_loc < 1) throw InvalidArgument("bench.n_loc must be >= 1");
    std::vector<PerfReport> out;
    for (const int p : p_list) {
        const Eigen::Index n = n_loc * p;
        (void)dd::uniform_decompose(n, p, spec.overlap_width);
        const auto data = data::generate(data_for(spec, n, p));
        const double t_global = p == 1 ? 0.0 : global_time(spec, data);
        out.push_back(make_report("weak", spec, data, p, t_global));
    }
    return out;
}

std::filesystem::path write_reports(const std::vector<PerfReport>& reports, const std::filesystem::path& dir,
                                    const nlohmann::json& provenance) {
    std::filesystem::create_directories(dir);
    nlohmann::json doc = provenance;
    doc["reports"] = nlohmann::json::array();
    for (const auto& r : reports) doc["reports"].push_back(to_json(r));
    const auto json_path = dir / "reports.json";
    std::ofstream(json_path) << doc.dump(2) << '\n';
    std::ofstream(dir / "reports.csv") << to_csv(reports);
    return json_path;
}

} // namespace d3l::perf
