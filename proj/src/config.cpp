#include "d3l/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>

namespace d3l::config {

using nlohmann::json;

namespace {

// Typed access to one JSON object with field-path error messages and a
// check for unrecognized keys.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_, "must be a JSON object");
    }

    [[nodiscard]] bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    [[nodiscard]] const json& at(const std::string& key) {
        if (!has(key)) throw ConfigError(field(key), "is required");
        return j_.at(key);
    }

    template <typename T>
    [[nodiscard]] T get(const std::string& key, T fallback) {
        if (!has(key)) return fallback;
        return convert<T>(j_.at(key), field(key));
    }

    template <typename T>
    [[nodiscard]] T require(const std::string& key) {
        return convert<T>(at(key), field(key));
    }

    [[nodiscard]] std::string field(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError(field(key), "unknown key");
        }
    }

    template <typename T>
    [[nodiscard]] static T convert(const json& v, const std::string& where) {
        try {
            if constexpr (std::is_arithmetic_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number()) throw ConfigError(where, "expected a number");
            }
            if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_integer()) throw ConfigError(where, "expected an integer");
                if constexpr (std::is_unsigned_v<T>) {
                    if (v.is_number_integer() && !v.is_number_unsigned()) {
                        throw ConfigError(where, "expected a nonnegative integer");
                    }
                }
            }
            return v.get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where, std::string("invalid value: ") + e.what());
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

// Wraps module validation errors with the config field they came from.
template <typename F>
void checked(const std::string& field, F&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError(field, e.what());
    }
}

json layer_to_json(const kernel::LayerMap& layer) {
    json weight = json::array();
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) row.push_back(layer.weight(r, c));
        weight.push_back(row);
    }
    json bias = json::array();
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) bias.push_back(layer.bias(r));
    return {{"weight", weight}, {"bias", bias}, {"activation", kernel::to_string(layer.activation)}};
}

kernel::LayerMap layer_from_json(const json& j, const std::string& field) {
    Section s(j, field);
    kernel::LayerMap layer;
    const auto rows = Section::convert<std::vector<std::vector<double>>>(s.at("weight"), s.field("weight"));
    const auto bias = Section::convert<std::vector<double>>(s.at("bias"), s.field("bias"));
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    layer.weight.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw ConfigError(s.field("weight"), "rows must have equal length");
        for (std::size_t c = 0; c < cols; ++c) {
            layer.weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    layer.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
    checked(s.field("activation"), [&] {
        layer.activation = kernel::activation_from_string(s.get<std::string>("activation", "identity"));
    });
    s.finish();
    return layer;
}

} // namespace

json to_json(const kernel::KernelSpec& spec) {
    json layers = json::array();
    for (const auto& l : spec.layers) layers.push_back(layer_to_json(l));
    json j = {{"outer", kernel::to_string(spec.outer)},
              {"sigma", spec.sigma},
              {"degree", spec.degree},
              {"offset", spec.offset},
              {"layers", layers}};
    j["truncation_radius"] = spec.truncation_radius ? json(*spec.truncation_radius) : json(nullptr);
    return j;
}

kernel::KernelSpec kernel_from_json(const json& j, const std::string& field) {
    Section s(j, field);
    kernel::KernelSpec spec;
    checked(s.field("outer"), [&] { spec.outer = kernel::outer_from_string(s.get<std::string>("outer", "gaussian")); });
    spec.sigma = s.get<double>("sigma", 1.0);
    spec.degree = s.get<int>("degree", 2);
    spec.offset = s.get<double>("offset", 0.0);
    if (s.has("truncation_radius")) spec.truncation_radius = s.require<double>("truncation_radius");
    if (s.has("layers")) {
        const auto& layers = s.at("layers");
        if (!layers.is_array()) throw ConfigError(s.field("layers"), "must be an array");
        for (std::size_t k = 0; k < layers.size(); ++k) {
            spec.layers.push_back(layer_from_json(layers[k], s.field("layers") + "[" + std::to_string(k) + "]"));
        }
    }
    s.finish();
    checked(field, [&] { kernel::validate(spec); });
    return spec;
}

json to_json(const data::SyntheticSpec& spec) {
    return {{"n", spec.n},
            {"d", spec.d},
            {"generator", data::to_string(spec.generator)},
            {"noise_sd", spec.noise_sd},
            {"seed", spec.seed},
            {"kernel", to_json(spec.kernel)},
            {"layout", data::to_string(spec.layout)},
            {"segments",
             {{"p", spec.segments_p},
              {"overlap_width", spec.segments_overlap},
              {"spacing", spec.spacing},
              {"gap", spec.gap}}}};
}

data::SyntheticSpec synthetic_from_json(const json& j, const std::string& field) {
    Section s(j, field);
    data::SyntheticSpec spec;
    spec.n = s.get<Eigen::Index>("n", spec.n);
    spec.d = s.get<Eigen::Index>("d", spec.d);
    checked(s.field("generator"), [&] {
        spec.generator = data::generator_from_string(s.get<std::string>("generator", "smooth-sine"));
    });
    spec.noise_sd = s.get<double>("noise_sd", 0.0);
    spec.seed = s.get<std::uint64_t>("seed", 0);
    if (s.has("kernel")) spec.kernel = kernel_from_json(s.at("kernel"), s.field("kernel"));
    checked(s.field("layout"), [&] { spec.layout = data::layout_from_string(s.get<std::string>("layout", "uniform")); });
    if (s.has("segments")) {
        Section seg(s.at("segments"), s.field("segments"));
        spec.segments_p = seg.get<int>("p", spec.segments_p);
        spec.segments_overlap = seg.get<Eigen::Index>("overlap_width", spec.segments_overlap);
        spec.spacing = seg.get<double>("spacing", spec.spacing);
        spec.gap = seg.get<double>("gap", spec.gap);
        seg.finish();
    }
    s.finish();
    if (spec.n < 1) throw ConfigError(s.field("n"), "must be >= 1");
    if (spec.d < 1) throw ConfigError(s.field("d"), "must be >= 1");
    if (!(spec.noise_sd >= 0.0)) throw ConfigError(s.field("noise_sd"), "must be >= 0");
    checked(field, [&] { data::validate(spec); });
    return spec;
}

json to_json(const RunConfig& cfg) {
    json dataset;
    if (cfg.dataset.csv_path) {
        dataset["csv"] = {{"path", cfg.dataset.csv_path->string()}, {"target_column", cfg.dataset.target_column}};
    }
    if (cfg.dataset.synthetic) dataset["synthetic"] = to_json(*cfg.dataset.synthetic);

    json decomposition;
    if (cfg.decomposition.ranges.empty()) {
        decomposition = {{"p", cfg.decomposition.p}, {"overlap_width", cfg.decomposition.overlap_width}};
    } else {
        json ranges = json::array();
        for (const auto& r : cfg.decomposition.ranges) ranges.push_back({r.begin, r.end});
        decomposition = {{"ranges", ranges}};
    }

    const auto& d = cfg.solver.d3l;
    const json omega = d.omega.empty() ? json(1.0) : json(d.omega);
    const json solver = {
        {"method", cfg.solver.method == SolverMethod::d3l ? "d3l" : "global"},
        {"lambda", d.lambda},
        {"reg_matrix", tikhonov::to_string(cfg.solver.global.reg_matrix)},
        {"global_method", tikhonov::to_string(cfg.solver.global.method)},
        {"cg_tol", cfg.solver.global.tol},
        {"cg_max_iter", cfg.solver.global.max_iter},
        {"omega", omega},
        {"eps", d.eps},
        {"max_outer", d.max_outer},
        {"execution", d.execution.mode == schwarz::Execution::Mode::parallel ? "parallel" : "sequential"},
        {"threads", d.execution.workers},
        {"gather", schwarz::to_string(d.gather)},
        {"inner_tol", d.inner_tol},
        {"max_inner", d.max_inner}};

    const json bench = {{"mode", cfg.bench.mode},
                        {"p_list", cfg.bench.p_list},
                        {"n", cfg.bench.n},
                        {"n_loc", cfg.bench.n_loc},
                        {"overlap_width", cfg.bench.overlap_width},
                        {"repetitions", cfg.bench.repetitions}};

    return {{"dataset", dataset},
            {"kernel", to_json(cfg.kernel)},
            {"decomposition", decomposition},
            {"solver", solver},
            {"bench", bench},
            {"output", {{"dir", cfg.out_dir.string()}}}};
}

RunConfig run_config_from_json(const json& j) {
    Section root(j, "");
    RunConfig cfg;

    {
        Section ds(root.at("dataset"), "dataset");
        if (ds.has("csv")) {
            Section csv(ds.at("csv"), "dataset.csv");
            cfg.dataset.csv_path = csv.require<std::string>("path");
            cfg.dataset.target_column = csv.get<std::string>("target_column", "y");
            csv.finish();
        }
        if (ds.has("synthetic")) cfg.dataset.synthetic = synthetic_from_json(ds.at("synthetic"), "dataset.synthetic");
        ds.finish();
    }

    if (root.has("kernel")) cfg.kernel = kernel_from_json(root.at("kernel"), "kernel");

    if (root.has("decomposition")) {
        Section dec(root.at("decomposition"), "decomposition");
        cfg.decomposition.p = dec.get<int>("p", 1);
        cfg.decomposition.overlap_width = dec.get<Eigen::Index>("overlap_width", 2);
        if (dec.has("ranges")) {
            const auto ranges = Section::convert<std::vector<std::vector<Eigen::Index>>>(dec.at("ranges"),
                                                                                      "decomposition.ranges");
            for (const auto& r : ranges) {
                if (r.size() != 2) throw ConfigError("decomposition.ranges", "each range must be [begin, end]");
                cfg.decomposition.ranges.push_back({r[0], r[1]});
            }
            cfg.decomposition.p = static_cast<int>(cfg.decomposition.ranges.size());
        }
        dec.finish();
    }

    if (root.has("solver")) {
        Section s(root.at("solver"), "solver");
        auto& sv = cfg.solver;
        const auto method = s.get<std::string>("method", "d3l");
        if (method == "d3l") {
            sv.method = SolverMethod::d3l;
        } else if (method == "global") {
            sv.method = SolverMethod::global;
        } else {
            throw ConfigError("solver.method", "expected \"d3l\" or \"global\", got \"" + method + "\"");
        }
        sv.d3l.lambda = s.get<double>("lambda", 0.0);
        sv.global.lambda = sv.d3l.lambda;
        checked("solver.reg_matrix", [&] {
            sv.global.reg_matrix = tikhonov::reg_matrix_from_string(s.get<std::string>("reg_matrix", "identity"));
        });
        checked("solver.global_method", [&] {
            sv.global.method = tikhonov::method_from_string(s.get<std::string>("global_method", "direct"));
        });
        sv.global.tol = s.get<double>("cg_tol", sv.global.tol);
        sv.global.max_iter = s.get<int>("cg_max_iter", sv.global.max_iter);
        if (s.has("omega")) {
            const auto& w = s.at("omega");
            if (w.is_array()) {
                sv.d3l.omega = Section::convert<std::vector<double>>(w, "solver.omega");
            } else {
                const double value = Section::convert<double>(w, "solver.omega");
                if (value != 1.0) sv.d3l.omega.assign(static_cast<std::size_t>(std::max(cfg.decomposition.p, 1)), value);
                if (!(value >= 0.0)) throw ConfigError("solver.omega", "must be >= 0");
            }
        }
        sv.d3l.eps = s.get<double>("eps", sv.d3l.eps);
        sv.d3l.max_outer = s.get<int>("max_outer", sv.d3l.max_outer);
        const auto execution = s.get<std::string>("execution", "sequential");
        if (execution == "sequential") {
            sv.d3l.execution.mode = schwarz::Execution::Mode::sequential;
        } else if (execution == "parallel") {
            sv.d3l.execution.mode = schwarz::Execution::Mode::parallel;
        } else {
            throw ConfigError("solver.execution", "expected \"sequential\" or \"parallel\"");
        }
        sv.d3l.execution.workers = s.get<int>("threads", 1);
        checked("solver.gather", [&] {
            sv.d3l.gather = schwarz::gather_from_string(s.get<std::string>("gather", "partition_of_unity"));
        });
        sv.d3l.inner_tol = s.get<double>("inner_tol", sv.d3l.inner_tol);
        sv.d3l.max_inner = s.get<int>("max_inner", sv.d3l.max_inner);
        s.finish();
    }

    if (root.has("bench")) {
        Section b(root.at("bench"), "bench");
        cfg.bench.mode = b.get<std::string>("mode", cfg.bench.mode);
        cfg.bench.p_list = b.get<std::vector<int>>("p_list", cfg.bench.p_list);
        cfg.bench.n = b.get<Eigen::Index>("n", cfg.bench.n);
        cfg.bench.n_loc = b.get<Eigen::Index>("n_loc", cfg.bench.n_loc);
        cfg.bench.overlap_width = b.get<Eigen::Index>("overlap_width", cfg.bench.overlap_width);
        cfg.bench.repetitions = b.get<int>("repetitions", cfg.bench.repetitions);
        b.finish();
    }

    if (root.has("output")) {
        Section o(root.at("output"), "output");
        cfg.out_dir = o.get<std::string>("dir", cfg.out_dir.string());
        o.finish();
    }
    root.finish();
    validate(cfg);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open config file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", "malformed JSON in '" + path.string() + "': " + e.what());
    }
    return run_config_from_json(j);
}

void validate(const RunConfig& cfg) {
    const bool csv = cfg.dataset.csv_path.has_value();
    const bool synthetic = cfg.dataset.synthetic.has_value();
    if (csv == synthetic) throw ConfigError("dataset", "exactly one of \"csv\" or \"synthetic\" must be given");
    if (csv && cfg.dataset.target_column.empty()) throw ConfigError("dataset.csv.target_column", "must not be empty");
    checked("kernel", [&] { kernel::validate(cfg.kernel); });

    const auto& dec = cfg.decomposition;
    if (dec.ranges.empty()) {
        if (dec.p < 1) throw ConfigError("decomposition.p", "must be >= 1");
        if (dec.p > 1 && dec.overlap_width < 1) {
            throw ConfigError("decomposition.overlap_width", "must be >= 1 when p > 1");
        }
    }

    const auto& sv = cfg.solver;
    if (!(sv.d3l.lambda >= 0.0) || !std::isfinite(sv.d3l.lambda)) {
        throw ConfigError("solver.lambda", "must be a finite value >= 0");
    }
    if (!(sv.d3l.eps > 0.0)) throw ConfigError("solver.eps", "must be > 0");
    if (sv.d3l.max_outer < 1) throw ConfigError("solver.max_outer", "must be >= 1");
    if (sv.d3l.max_inner < 1) throw ConfigError("solver.max_inner", "must be >= 1");
    if (!(sv.d3l.inner_tol >= 0.0)) throw ConfigError("solver.inner_tol", "must be >= 0");
    if (sv.d3l.execution.workers < 0) throw ConfigError("solver.threads", "must be >= 0");
    for (const double w : sv.d3l.omega) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("solver.omega", "entries must be finite and >= 0");
    }
    if (!sv.d3l.omega.empty() && static_cast<int>(sv.d3l.omega.size()) != dec.p) {
        throw ConfigError("solver.omega", "has " + std::to_string(sv.d3l.omega.size()) + " entries for "
                                              + std::to_string(dec.p) + " subdomains");
    }
    if (!(sv.global.tol > 0.0)) throw ConfigError("solver.cg_tol", "must be > 0");
    if (sv.global.max_iter < 1) throw ConfigError("solver.cg_max_iter", "must be >= 1");
    if (sv.method == SolverMethod::d3l && sv.global.reg_matrix != tikhonov::RegMatrix::identity) {
        throw ConfigError("solver.reg_matrix", "the decomposed solver supports only \"identity\"");
    }

    const auto& b = cfg.bench;
    if (b.mode != "strong" && b.mode != "weak") throw ConfigError("bench.mode", "expected \"strong\" or \"weak\"");
    if (b.p_list.empty()) throw ConfigError("bench.p_list", "must not be empty");
    for (const int p : b.p_list) {
        if (p < 1) throw ConfigError("bench.p_list", "entries must be >= 1, got " + std::to_string(p));
    }
    if (b.n < 1) throw ConfigError("bench.n", "must be >= 1");
    if (b.n_loc < 1) throw ConfigError("bench.n_loc", "must be >= 1");
    if (b.overlap_width < 1) throw ConfigError("bench.overlap_width", "must be >= 1");
    if (b.repetitions < 1) throw ConfigError("bench.repetitions", "must be >= 1");
    if (cfg.out_dir.empty()) throw ConfigError("output.dir", "must not be empty");
}

std::string hash_json(const json& j) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : j.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string kernel_hash(const kernel::KernelSpec& spec) {
    return hash_json(to_json(spec));
}

std::string config_hash(const RunConfig& cfg) {
    return hash_json(to_json(cfg));
}

data::Dataset load_dataset(const RunConfig& cfg) {
    if (cfg.dataset.csv_path) return data::load_csv(*cfg.dataset.csv_path, cfg.dataset.target_column);
    return data::generate(*cfg.dataset.synthetic);
}

dd::Decomposition make_decomposition(const RunConfig& cfg, Eigen::Index n) {
    if (!cfg.decomposition.ranges.empty()) return dd::Decomposition(n, cfg.decomposition.ranges);
    const int p = cfg.decomposition.p;
    return dd::uniform_decompose(n, p, p > 1 ? cfg.decomposition.overlap_width : 0);
}

} // namespace d3l::config
