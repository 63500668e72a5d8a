#include "d3l/cli.hpp"

#include "d3l/balance.hpp"
#include "d3l/config.hpp"
#include "d3l/perf.hpp"
#include "d3l/schwarz.hpp"
#include "d3l/tikhonov.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <thread>

namespace d3l::cli {

namespace {

using nlohmann::json;
using config::ConfigError;
using config::RunConfig;

struct Options {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::string> mode;
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> loads;
};

std::vector<long long> parse_loads(const std::string& text) {
    std::vector<long long> loads;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto end = comma == std::string::npos ? text.size() : comma;
        auto begin = pos;
        auto stop = end;
        while (begin < stop && text[begin] == ' ') ++begin;
        while (stop > begin && text[stop - 1] == ' ') --stop;
        long long value = 0;
        const auto [ptr, ec] = std::from_chars(text.data() + begin, text.data() + stop, value);
        if (begin == stop || ec != std::errc() || ptr != text.data() + stop) {
            throw ConfigError("--loads", "cannot parse '" + text.substr(begin, stop - begin) + "' as an integer");
        }
        if (value < 0) throw ConfigError("--loads", "loads must be nonnegative");
        loads.push_back(value);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return loads;
}

RunConfig load_config(const Options& opt) {
    if (opt.config_path.empty()) throw ConfigError("--config", "a config file is required for this command");
    RunConfig cfg = config::load_run_config(opt.config_path);
    // Flags take precedence over the file.
    if (opt.out_dir) cfg.out_dir = *opt.out_dir;
    if (opt.mode) cfg.bench.mode = *opt.mode;
    if (opt.threads) {
        cfg.solver.d3l.execution = schwarz::Execution::parallel(*opt.threads);
    }
    if (opt.seed) {
        if (!cfg.dataset.synthetic) throw ConfigError("--seed", "applies only to synthetic datasets");
        cfg.dataset.synthetic->seed = *opt.seed;
    }
    config::validate(cfg);
    return cfg;
}

json provenance(const RunConfig& cfg, const std::string& command) {
    return {{"tool_version", config::kToolVersion}, {"config_hash", config::config_hash(cfg)}, {"command", command}};
}

std::filesystem::path prepare_out_dir(const RunConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec || !std::filesystem::is_directory(cfg.out_dir)) {
        throw ConfigError("output.dir", "cannot create directory '" + cfg.out_dir.string() + "'");
    }
    return cfg.out_dir;
}

void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

std::string sci(double v) {
    std::ostringstream s;
    s << std::scientific << std::setprecision(6) << v;
    return s.str();
}

tikhonov::Solution global_solve(const RunConfig& cfg, const kernel::KernelMatrix& a, const data::Dataset& data) {
    auto tc = cfg.solver.global;
    tc.lambda = cfg.solver.d3l.lambda;
    return tikhonov::solve_tikhonov(a, data.targets, tc);
}

int cmd_solve(const Options& opt, std::ostream& out) {
    const auto cfg = load_config(opt);
    const auto dir = prepare_out_dir(cfg);
    const auto data = config::load_dataset(cfg);
    const auto a = kernel::assemble(cfg.kernel, data);
    const double lambda = cfg.solver.d3l.lambda;

    json doc = provenance(cfg, "solve");
    doc["n"] = data.size();
    doc["lambda"] = lambda;
    if (cfg.solver.method == config::SolverMethod::global) {
        const auto s = global_solve(cfg, a, data);
        doc["method"] = "global";
        doc["p"] = 1;
        doc["objective"] = s.objective;
        doc["residual_norm"] = s.residual_norm;
        doc["reg_norm"] = s.reg_norm;
        doc["iterations"] = s.iterations;
        doc["residual_history"] = json::array();
        doc["alpha"] = to_std(s.alpha);
        out << "solve method=global n=" << data.size() << " objective=" << sci(s.objective) << '\n';
    } else {
        const auto dec = config::make_decomposition(cfg, data.size());
        const auto r = schwarz::run(cfg.kernel, data, dec, cfg.solver.d3l);
        const double objective = tikhonov::objective(a.entries, data.targets, r.alpha, lambda);
        doc["method"] = "d3l";
        doc["p"] = dec.p();
        doc["decomposition"] = dd::to_json(dec);
        doc["objective"] = objective;
        doc["residual_norm"] = (a.entries * r.alpha - data.targets).norm();
        doc["reg_norm"] = r.alpha.norm();
        doc["outer_iterations"] = r.outer_iterations;
        doc["fixed_point"] = r.fixed_point;
        doc["residual_history"] = r.per_iteration_residuals;
        doc["local_objectives"] = r.local_objectives;
        doc["gather"] = schwarz::to_string(cfg.solver.d3l.gather);
        doc["alpha"] = to_std(r.alpha);
        std::ofstream(dir / "trace.jsonl") << schwarz::to_jsonl(r.trace);
        out << "solve method=d3l n=" << data.size() << " p=" << dec.p() << " objective=" << sci(objective)
            << " outer_iterations=" << r.outer_iterations << '\n';
    }
    write_json(dir / "solution.json", doc);
    out << "wrote " << (dir / "solution.json").string() << '\n';
    return kExitOk;
}

int cmd_compare(const Options& opt, std::ostream& out) {
    const auto cfg = load_config(opt);
    const auto dir = prepare_out_dir(cfg);
    const auto data = config::load_dataset(cfg);
    const auto a = kernel::assemble(cfg.kernel, data);
    const double lambda = cfg.solver.d3l.lambda;
    const auto dec = config::make_decomposition(cfg, data.size());

    const auto g = global_solve(cfg, a, data);
    const auto r = schwarz::run(cfg.kernel, data, dec, cfg.solver.d3l);
    const double d3l_objective = tikhonov::objective(a.entries, data.targets, r.alpha, lambda);
    const double scale = g.alpha.norm();
    const double diff = scale > 0.0 ? (r.alpha - g.alpha).norm() / scale : (r.alpha - g.alpha).norm();

    json doc = provenance(cfg, "compare");
    doc["n"] = data.size();
    doc["p"] = dec.p();
    doc["lambda"] = lambda;
    doc["relative_difference"] = diff;
    doc["global_objective"] = g.objective;
    doc["d3l_objective"] = d3l_objective;
    doc["global_iterations"] = g.iterations;
    doc["d3l_outer_iterations"] = r.outer_iterations;
    doc["d3l_residual_history"] = r.per_iteration_residuals;
    write_json(dir / "compare.json", doc);
    out << "compare n=" << data.size() << " p=" << dec.p() << " relative_difference=" << sci(diff)
        << " global_objective=" << sci(g.objective) << " d3l_objective=" << sci(d3l_objective)
        << " d3l_outer_iterations=" << r.outer_iterations << '\n';
    out << "wrote " << (dir / "compare.json").string() << '\n';
    return kExitOk;
}

int cmd_bench(const Options& opt, std::ostream& out) {
    const auto cfg = load_config(opt);
    if (!cfg.dataset.synthetic) throw ConfigError("dataset", "bench needs a synthetic dataset");
    const auto dir = prepare_out_dir(cfg);
    perf::BenchSpec spec;
    spec.data = *cfg.dataset.synthetic;
    spec.kernel = cfg.kernel;
    spec.solver = cfg.solver.d3l;
    spec.overlap_width = cfg.bench.overlap_width;
    spec.repetitions = cfg.bench.repetitions;
    const auto reports = cfg.bench.mode == "strong" ? perf::bench_strong(spec, cfg.bench.n, cfg.bench.p_list)
                                                    : perf::bench_weak(spec, cfg.bench.n_loc, cfg.bench.p_list);
    auto prov = provenance(cfg, "bench");
    prov["mode"] = cfg.bench.mode;
    prov["hardware_threads"] = std::thread::hardware_concurrency();
    const auto path = perf::write_reports(reports, dir, prov);
    for (const auto& r : reports) {
        out << "bench mode=" << r.mode << " n=" << r.n << " p=" << r.p << " t_parallel_s=" << sci(r.t_parallel_s)
            << " speed_up=" << sci(r.speed_up) << " scale_up=" << sci(r.scale_up)
            << " surface_to_volume=" << sci(r.surface_to_volume) << " outer_iterations=" << r.outer_iterations
            << '\n';
    }
    out << "wrote " << path.string() << '\n';
    return kExitOk;
}

int cmd_balance(const Options& opt, std::ostream& out) {
    if (!opt.loads) throw ConfigError("--loads", "balance needs --loads");
    const auto loads = parse_loads(*opt.loads);
    int p = static_cast<int>(loads.size());
    if (!opt.config_path.empty()) {
        const auto cfg = load_config(opt);
        p = cfg.decomposition.p;
    }
    if (static_cast<int>(loads.size()) != p) {
        throw ConfigError("--loads", "got " + std::to_string(loads.size()) + " loads for p = " + std::to_string(p));
    }
    dd::Graph path{p, {}};
    for (int i = 0; i + 1 < p; ++i) path.edges.emplace_back(i, i + 1);
    const auto schedule = dd::balance(path, loads);
    if (schedule.moves.empty()) {
        out << "schedule: empty\n";
    } else {
        out << "schedule: " << schedule.moves.size() << " move(s)\n";
        for (const auto& m : schedule.moves) {
            out << "move " << m.count << ": " << m.from + 1 << "→" << m.to + 1 << '\n';
        }
    }
    out << "sizes:";
    for (const auto s : schedule.resulting_sizes) out << ' ' << s;
    out << '\n';
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Domain-decomposed Tikhonov kernel learning", "d3l"};
    app.set_version_flag("--version", std::string(config::kToolVersion));
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    app.add_option("--config", opt.config_path, "JSON run configuration");
    app.add_option("--out", opt.out_dir, "Output directory (overrides output.dir)");
    app.add_option("--mode", opt.mode, "Benchmark mode")->check(CLI::IsMember({"strong", "weak"}));
    app.add_option("--threads", opt.threads, "Run the decomposed solver in parallel with n workers (0 = all)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--seed", opt.seed, "Synthetic dataset seed");
    app.add_option("--loads", opt.loads, "Comma-separated per-subdomain loads");

    auto* solve = app.add_subcommand("solve", "Run the global or decomposed solve");
    auto* compare = app.add_subcommand("compare", "Compare decomposed and global solutions");
    auto* bench = app.add_subcommand("bench", "Strong or weak scaling benchmark");
    auto* balance = app.add_subcommand("balance", "Diffusion load-balancing schedule");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (solve->parsed()) return cmd_solve(opt, out);
        if (compare->parsed()) return cmd_compare(opt, out);
        if (bench->parsed()) return cmd_bench(opt, out);
        if (balance->parsed()) return cmd_balance(opt, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitConfig;
}

} // namespace d3l::cli
