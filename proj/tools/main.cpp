// Command-line front end: gen / train / extract / eval / sweep / pipeline.
// Progress goes to stderr; machine-readable artifacts only to files.
// Exit codes: 0 success, 2 configuration error, 1 runtime error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "elmrules/dataset.hpp"
#include "elmrules/elm.hpp"
#include "elmrules/eval.hpp"
#include "elmrules/extraction.hpp"
#include "elmrules/miner.hpp"
#include "elmrules/rng.hpp"
#include "elmrules/swinggen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace elmrules;

namespace {

// Generation settings: the fixture's generator block is the base; only
// explicitly given keys override it. The resolved config echoes the
// effective values, so a rerun from it needs no fixture defaults.
struct GenSettings {
    std::string fixture;
    std::optional<int> n_samples;
    std::optional<std::pair<double, double>> load_range;
    std::optional<std::pair<double, double>> tcl_range;
    std::optional<double> pm_jitter;
    std::optional<FeatureSet> feature_set;
    GeneratorConfig effective;  // filled once the fixture is resolved
    bool resolved = false;
};

struct BaselineRef {
    std::string name;
    std::string path;
};

// Fully resolved run settings; config.resolved.json serializes this, and
// a run is reproducible from that file alone.
struct RunConfig {
    std::uint64_t seed = 1;
    int jobs = 1;
    std::string data;  // input CSV (optional when gen is configured)
    std::string model; // input model for `extract`
    GenSettings gen;
    PipelineConfig pipeline;
    int folds = 5;
    std::vector<double> rho_grid;
    std::vector<int> ants_grid;
    std::vector<BaselineRef> baselines;
};

void ensure_keys(const json& j, const std::vector<std::string>& allowed,
                 const std::string& context) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("unknown key '" + it.key() + "' in " + context);
    }
}

RunConfig parse_config(const json& j) {
    RunConfig rc;
    ensure_keys(j, {"seed", "jobs", "data", "model", "fixture", "gen", "elm", "miner",
                    "extraction", "eval", "sweep", "baselines"},
                "config");
    try {
        rc.seed = j.value("seed", rc.seed);
        rc.jobs = j.value("jobs", rc.jobs);
        rc.data = j.value("data", rc.data);
        rc.model = j.value("model", rc.model);
        rc.gen.fixture = j.value("fixture", rc.gen.fixture);

        if (j.contains("gen")) {
            const json& g = j.at("gen");
            ensure_keys(g, {"n_samples", "load_range", "tcl_range", "pm_jitter", "feature_set"},
                        "gen");
            if (g.contains("n_samples")) rc.gen.n_samples = g.at("n_samples").get<int>();
            if (g.contains("load_range"))
                rc.gen.load_range = {{g.at("load_range").at(0).get<double>(),
                                      g.at("load_range").at(1).get<double>()}};
            if (g.contains("tcl_range"))
                rc.gen.tcl_range = {{g.at("tcl_range").at(0).get<double>(),
                                     g.at("tcl_range").at(1).get<double>()}};
            if (g.contains("pm_jitter")) rc.gen.pm_jitter = g.at("pm_jitter").get<double>();
            if (g.contains("feature_set"))
                rc.gen.feature_set =
                    feature_set_from_string(g.at("feature_set").get<std::string>());
        }
        if (j.contains("elm")) {
            const json& e = j.at("elm");
            ensure_keys(e, {"hidden_nodes", "activation", "rank_tol"}, "elm");
            rc.pipeline.hidden_nodes = e.value("hidden_nodes", rc.pipeline.hidden_nodes);
            if (e.contains("activation"))
                rc.pipeline.activation = activation_from_string(e.at("activation"));
            rc.pipeline.rank_tol = e.value("rank_tol", rc.pipeline.rank_tol);
        }
        if (j.contains("miner")) {
            const json& m = j.at("miner");
            ensure_keys(m, {"n_ants", "max_uncovered", "min_cases_per_rule", "max_iterations",
                            "convergence_window", "heuristic", "evaporation",
                            "normalize_pheromone", "reinit_pheromone"},
                        "miner");
            MinerConfig& mc = rc.pipeline.miner;
            mc.n_ants = m.value("n_ants", mc.n_ants);
            mc.max_uncovered = m.value("max_uncovered", mc.max_uncovered);
            mc.min_cases_per_rule = m.value("min_cases_per_rule", mc.min_cases_per_rule);
            mc.max_iterations = m.value("max_iterations", mc.max_iterations);
            mc.convergence_window = m.value("convergence_window", mc.convergence_window);
            if (m.contains("heuristic"))
                mc.heuristic = heuristic_from_string(m.at("heuristic"));
            if (m.contains("evaporation")) {
                const json& ev = m.at("evaporation");
                ensure_keys(ev, {"mode", "rho", "rho_min"}, "miner.evaporation");
                if (ev.contains("mode"))
                    mc.evaporation.mode = evaporation_mode_from_string(ev.at("mode"));
                mc.evaporation.rho = ev.value("rho", mc.evaporation.rho);
                mc.evaporation.rho_min = ev.value("rho_min", mc.evaporation.rho_min);
            }
            mc.normalize_pheromone = m.value("normalize_pheromone", mc.normalize_pheromone);
            mc.reinit_pheromone = m.value("reinit_pheromone", mc.reinit_pheromone);
        }
        if (j.contains("extraction")) {
            const json& x = j.at("extraction");
            ensure_keys(x, {"n_examples", "probe_size", "fidelity_threshold", "bins_per_feature",
                            "strategy", "exact_match_prepass"},
                        "extraction");
            SamplingConfig& sc = rc.pipeline.sampling;
            sc.n_examples = x.value("n_examples", sc.n_examples);
            sc.probe_size = x.value("probe_size", sc.probe_size);
            sc.fidelity_threshold = x.value("fidelity_threshold", sc.fidelity_threshold);
            sc.bins_per_feature = x.value("bins_per_feature", sc.bins_per_feature);
            if (x.contains("strategy"))
                sc.strategy = bin_strategy_from_string(x.at("strategy"));
            sc.exact_match_prepass = x.value("exact_match_prepass", sc.exact_match_prepass);
        }
        if (j.contains("eval")) {
            const json& e = j.at("eval");
            ensure_keys(e, {"folds", "positive_class"}, "eval");
            rc.folds = e.value("folds", rc.folds);
            rc.pipeline.positive_class = e.value("positive_class", rc.pipeline.positive_class);
            if (rc.pipeline.positive_class != -1 && rc.pipeline.positive_class != 1)
                throw ConfigError("eval.positive_class must be -1 or 1");
        }
        if (j.contains("sweep")) {
            const json& s = j.at("sweep");
            ensure_keys(s, {"rho_grid", "ants_grid"}, "sweep");
            if (s.contains("rho_grid")) rc.rho_grid = s.at("rho_grid").get<std::vector<double>>();
            if (s.contains("ants_grid")) rc.ants_grid = s.at("ants_grid").get<std::vector<int>>();
        }
        if (j.contains("baselines")) {
            for (const json& b : j.at("baselines")) {
                ensure_keys(b, {"name", "path"}, "baselines[]");
                rc.baselines.push_back({b.at("name").get<std::string>(),
                                        b.at("path").get<std::string>()});
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config schema violation: ") + e.what());
    }
    return rc;
}

RunConfig load_config(const std::string& path) {
    if (path.empty()) return RunConfig{};
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config JSON parse failure: ") + e.what());
    }
    return parse_config(j);
}

ordered_json resolved_config(const RunConfig& rc) {
    ordered_json j;
    j["seed"] = rc.seed;
    j["jobs"] = rc.jobs;
    if (!rc.data.empty()) j["data"] = rc.data;
    if (!rc.model.empty()) j["model"] = rc.model;
    if (!rc.gen.fixture.empty() && rc.gen.resolved) {
        const GeneratorConfig& gc = rc.gen.effective;
        j["fixture"] = rc.gen.fixture;
        j["gen"] = {{"n_samples", gc.n_samples},
                    {"load_range", {gc.load_range.first, gc.load_range.second}},
                    {"tcl_range", {gc.tcl_range.first, gc.tcl_range.second}},
                    {"pm_jitter", gc.pm_jitter},
                    {"feature_set", to_string(gc.feature_set)}};
    }
    j["elm"] = {{"hidden_nodes", rc.pipeline.hidden_nodes},
                {"activation", to_string(rc.pipeline.activation)},
                {"rank_tol", rc.pipeline.rank_tol}};
    const MinerConfig& mc = rc.pipeline.miner;
    j["miner"] = {{"n_ants", mc.n_ants},
                  {"max_uncovered", mc.max_uncovered},
                  {"min_cases_per_rule", mc.min_cases_per_rule},
                  {"max_iterations", mc.max_iterations},
                  {"convergence_window", mc.convergence_window},
                  {"heuristic", to_string(mc.heuristic)},
                  {"evaporation",
                   {{"mode", to_string(mc.evaporation.mode)},
                    {"rho", mc.evaporation.rho},
                    {"rho_min", mc.evaporation.rho_min}}},
                  {"normalize_pheromone", mc.normalize_pheromone},
                  {"reinit_pheromone", mc.reinit_pheromone}};
    const SamplingConfig& sc = rc.pipeline.sampling;
    j["extraction"] = {{"n_examples", sc.n_examples},
                       {"probe_size", sc.probe_size},
                       {"fidelity_threshold", sc.fidelity_threshold},
                       {"bins_per_feature", sc.bins_per_feature},
                       {"strategy", to_string(sc.strategy)},
                       {"exact_match_prepass", sc.exact_match_prepass}};
    j["eval"] = {{"folds", rc.folds}, {"positive_class", rc.pipeline.positive_class}};
    if (!rc.rho_grid.empty() || !rc.ants_grid.empty())
        j["sweep"] = {{"rho_grid", rc.rho_grid}, {"ants_grid", rc.ants_grid}};
    if (!rc.baselines.empty()) {
        j["baselines"] = ordered_json::array();
        for (const auto& b : rc.baselines)
            j["baselines"].push_back({{"name", b.name}, {"path", b.path}});
    }
    return j;
}

// Artifact sink with atomic writes; on failure every file written so far
// is removed.
class RunDir {
public:
    explicit RunDir(const fs::path& dir) : dir_(dir) {
        created_ = !fs::exists(dir_);
        fs::create_directories(dir_);
    }

    const fs::path& path() const { return dir_; }

    fs::path write(const std::string& name, const std::string& content) {
        const fs::path target = dir_ / name;
        const fs::path tmp = dir_ / (name + ".tmp");
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) throw Error("cannot write '" + tmp.string() + "'");
            out << content;
        }
        fs::rename(tmp, target);
        written_.push_back(target);
        return target;
    }

    void discard() {
        std::error_code ec;
        for (const fs::path& p : written_) fs::remove(p, ec);
        if (created_) fs::remove(dir_, ec);  // only removes when empty
    }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool created_ = false;
};

std::string default_run_dir(const std::string& subcommand) {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    return "runs/" + subcommand + "-" + std::to_string(ms);
}

std::string slurp(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + what + " '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ordered_json preprocessing_json(const ZScore& z, const ConstantFilter& filter,
                                const std::vector<std::string>& names,
                                const Discretizer* disc) {
    ordered_json j;
    j["means"] = z.means;
    j["stds"] = z.stds;
    ordered_json edges = ordered_json::array();
    ordered_json fit_min = ordered_json::array(), fit_max = ordered_json::array();
    if (disc) {
        for (const auto& e : disc->edges) edges.push_back(e);
        fit_min = disc->fit_min;
        fit_max = disc->fit_max;
    } else {
        for (std::size_t i = 0; i < names.size(); ++i) edges.push_back(ordered_json::array());
    }
    j["bin_edges"] = edges;
    if (disc) {
        j["fit_min"] = fit_min;
        j["fit_max"] = fit_max;
    }
    j["feature_names"] = names;
    j["dropped_features"] = filter.dropped;
    return j;
}

struct LoadedPreprocessing {
    ZScore zscore;
    std::vector<std::string> feature_names;
    std::vector<std::string> dropped;
};

LoadedPreprocessing load_preprocessing(const std::string& path) {
    json j;
    try {
        j = json::parse(slurp(path, "preprocessing sidecar"));
    } catch (const json::exception& e) {
        throw Error(std::string("preprocessing JSON parse failure: ") + e.what());
    }
    LoadedPreprocessing lp;
    lp.zscore.means = j.at("means").get<std::vector<double>>();
    lp.zscore.stds = j.at("stds").get<std::vector<double>>();
    lp.feature_names = j.value("feature_names", std::vector<std::string>{});
    lp.dropped = j.value("dropped_features", std::vector<std::string>{});
    return lp;
}

// Applies the recorded feature drop by name, then the stored z-score.
Dataset standardize_like(const Dataset& ds, const LoadedPreprocessing& lp) {
    std::vector<int> keep;
    for (int c = 0; c < ds.n_features(); ++c) {
        const std::string& name = ds.specs[c].name;
        if (std::find(lp.dropped.begin(), lp.dropped.end(), name) == lp.dropped.end())
            keep.push_back(c);
    }
    ConstantFilter filter;
    filter.kept = keep;
    Eigen::MatrixXd rows = filter.apply(ds.rows);
    std::vector<FeatureSpec> specs;
    for (int c : keep) specs.push_back(ds.specs[c]);
    Dataset reduced = make_dataset(std::move(specs), std::move(rows), ds.labels);
    return lp.zscore.apply(reduced);
}

RuleDisplay display_in_real_units(const ExtractionResult& res, const ZScore& z,
                                  const std::vector<std::string>& names) {
    RuleDisplay d;
    d.names = names;
    const Discretizer& disc = res.discretizer;
    for (std::size_t c = 0; c < disc.edges.size(); ++c) {
        std::vector<double> edges;
        for (double e : disc.edges[c]) edges.push_back(z.inverse(static_cast<int>(c), e));
        d.edges.push_back(std::move(edges));
        d.lo.push_back(z.inverse(static_cast<int>(c), disc.fit_min[c]));
        d.hi.push_back(z.inverse(static_cast<int>(c), disc.fit_max[c]));
    }
    return d;
}

Dataset generate_from_fixture(RunConfig& rc, GenerationStats* stats) {
    if (rc.gen.fixture.empty())
        throw ConfigError("gen requires a swing fixture ('fixture' key or --fixture)");
    SwingFixture fx = load_swing_fixture(rc.gen.fixture);
    GeneratorConfig gc = fx.generator;
    if (rc.gen.n_samples) gc.n_samples = *rc.gen.n_samples;
    if (rc.gen.load_range) gc.load_range = *rc.gen.load_range;
    if (rc.gen.tcl_range) gc.tcl_range = *rc.gen.tcl_range;
    if (rc.gen.pm_jitter) gc.pm_jitter = *rc.gen.pm_jitter;
    if (rc.gen.feature_set) gc.feature_set = *rc.gen.feature_set;
    gc.seed = derive_seed(rc.seed, "gen");
    rc.gen.effective = gc;
    rc.gen.resolved = true;
    return generate_dataset(fx.machines, fx.network, fx.scenario, gc, stats);
}

struct TrainOutput {
    FoldArtifacts artifacts;  // extraction part unused by `train`
    Dataset standardized;
    std::vector<std::string> names;
};

TrainOutput train_model(const Dataset& ds, const RunConfig& rc) {
    TrainOutput out;
    auto [filtered, filter] = drop_constant_features(ds);
    if (filtered.n_features() == 0) throw Error("every feature is constant");
    if (!filter.dropped.empty()) {
        std::cerr << "dropped constant features:";
        for (const auto& n : filter.dropped) std::cerr << ' ' << n;
        std::cerr << '\n';
    }
    auto [standardized, zscore] = zscore_fit_apply(filtered);
    out.artifacts.filter = std::move(filter);
    out.artifacts.zscore = std::move(zscore);
    out.artifacts.model = elm_train(standardized, rc.pipeline.hidden_nodes,
                                    rc.pipeline.activation, derive_seed(rc.seed, "train"),
                                    rc.pipeline.rank_tol);
    for (const auto& spec : standardized.specs) out.names.push_back(spec.name);
    out.standardized = std::move(standardized);
    return out;
}

void write_extraction_artifacts(RunDir& run, const ExtractionResult& res, const ZScore& z,
                                const ConstantFilter& filter,
                                const std::vector<std::string>& names) {
    run.write("rules.json", rule_list_to_json(res.rules));
    run.write("rules.txt", render_rule_list(res.rules, display_in_real_units(res, z, names)));
    run.write("result.json", extraction_result_to_json(res));
    run.write("preprocessing.json",
              preprocessing_json(z, filter, names, &res.discretizer).dump(2));
}

void write_eval_artifacts(RunDir& run, const CvReport& report, const RunConfig& rc) {
    run.write("metrics.json", cv_report_to_json(report));
    if (report.pooled_roc_valid) run.write("roc.csv", roc_csv(report.pooled_roc));

    std::vector<MethodRow> rows = {method_row_from_cv("ELM-rules", report)};
    for (const auto& b : rc.baselines)
        rows.push_back(evaluate_external_csv(b.name, b.path, rc.pipeline.positive_class));
    run.write("comparison.txt", render_comparison_table(rows));
    run.write("comparison.csv", comparison_table_csv(rows));
    std::cerr << render_comparison_table(rows);
}

int cmd_gen(RunConfig& rc, const std::string& out_csv) {
    GenerationStats stats;
    Dataset ds = generate_from_fixture(rc, &stats);
    const fs::path target = out_csv.empty() ? "data.csv" : out_csv;
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    save_csv(ds, target.string());
    {
        std::ofstream echo(target.string() + ".resolved.json");
        echo << resolved_config(rc).dump(2) << '\n';
    }
    int unstable = 0;
    for (int l : ds.labels)
        if (l < 0) ++unstable;
    std::cerr << "wrote " << target.string() << ": " << ds.n_samples() << " samples, "
              << ds.n_features() << " features, " << unstable << " unstable ("
              << stats.rejected << " scenario redraws)\n";
    return 0;
}

int cmd_train(const RunConfig& rc, RunDir& run) {
    if (rc.data.empty()) throw ConfigError("train requires --data");
    Dataset ds = load_csv(rc.data);
    TrainOutput t = train_model(ds, rc);
    run.write("preprocessing.json",
              preprocessing_json(t.artifacts.zscore, t.artifacts.filter, t.names, nullptr).dump(2));
    run.write("model.json", elm_to_json(t.artifacts.model, "preprocessing.json"));
    std::cerr << "trained ELM: L=" << t.artifacts.model.hidden_nodes()
              << " inputs=" << t.artifacts.model.inputs() << " -> "
              << (run.path() / "model.json").string() << '\n';
    return 0;
}

int cmd_extract(const RunConfig& rc, RunDir& run) {
    if (rc.model.empty()) throw ConfigError("extract requires --model");
    if (rc.data.empty()) throw ConfigError("extract requires --data");

    std::string prep_ref;
    ElmModel model = elm_from_json(slurp(rc.model, "model"), &prep_ref);
    if (prep_ref.empty()) throw Error("model JSON lacks a preprocessing reference");
    const fs::path prep_path = fs::path(rc.model).parent_path() / prep_ref;
    LoadedPreprocessing lp = load_preprocessing(prep_path.string());

    Dataset ds = load_csv(rc.data);
    Dataset standardized = standardize_like(ds, lp);
    if (standardized.n_features() != model.inputs())
        throw DimensionMismatch("model expects " + std::to_string(model.inputs()) +
                                " features, data provides " +
                                std::to_string(standardized.n_features()));

    SamplingConfig sc = rc.pipeline.sampling;
    sc.seed = derive_seed(rc.seed, "extract");
    ExtractionResult res = extract(model, standardized, sc, rc.pipeline.miner);

    ConstantFilter recorded;
    recorded.dropped = lp.dropped;
    std::vector<std::string> names;
    for (const auto& spec : standardized.specs) names.push_back(spec.name);
    write_extraction_artifacts(run, res, lp.zscore, recorded, names);
    std::cerr << "extracted " << res.rules.rules.size() << " rules, fidelity "
              << res.fidelity << " -> " << (run.path() / "rules.txt").string() << '\n';
    return 0;
}

int cmd_eval(const RunConfig& rc, RunDir& run) {
    if (rc.data.empty()) throw ConfigError("eval requires --data");
    Dataset ds = load_csv(rc.data);
    CvReport report =
        cross_validate(rc.pipeline, ds, rc.folds, derive_seed(rc.seed, "eval"), rc.jobs);
    write_eval_artifacts(run, report, rc);
    return 0;
}

int cmd_sweep(const RunConfig& rc, RunDir& run) {
    if (rc.data.empty()) throw ConfigError("sweep requires --data");
    if (rc.rho_grid.empty() || rc.ants_grid.empty())
        throw ConfigError("sweep requires sweep.rho_grid and sweep.ants_grid");
    Dataset ds = load_csv(rc.data);
    const auto cells = parameter_sweep(rc.pipeline, ds, rc.rho_grid, rc.ants_grid, rc.folds,
                                       derive_seed(rc.seed, "sweep"), rc.jobs);
    run.write("surface.csv", sweep_csv(cells));
    std::cerr << "swept " << cells.size() << " cells -> "
              << (run.path() / "surface.csv").string() << '\n';
    return 0;
}

int cmd_pipeline(RunConfig& rc, RunDir& run) {
    Dataset ds = [&] {
        if (!rc.gen.fixture.empty()) {
            GenerationStats stats;
            Dataset generated = generate_from_fixture(rc, &stats);
            std::cerr << "generated " << generated.n_samples() << " samples ("
                      << stats.rejected << " redraws)\n";
            return generated;
        }
        if (rc.data.empty())
            throw ConfigError("pipeline requires either a 'fixture' (gen) or 'data'");
        return load_csv(rc.data);
    }();
    run.write("data.csv", to_csv(ds));

    TrainOutput t = train_model(ds, rc);
    run.write("model.json", elm_to_json(t.artifacts.model, "preprocessing.json"));

    SamplingConfig sc = rc.pipeline.sampling;
    sc.seed = derive_seed(rc.seed, "extract");
    ExtractionResult res = extract(t.artifacts.model, t.standardized, sc, rc.pipeline.miner);
    write_extraction_artifacts(run, res, t.artifacts.zscore, t.artifacts.filter, t.names);
    std::cerr << "extraction: " << res.rules.rules.size() << " rules, fidelity "
              << res.fidelity << '\n';

    CvReport report =
        cross_validate(rc.pipeline, ds, rc.folds, derive_seed(rc.seed, "eval"), rc.jobs);
    write_eval_artifacts(run, report, rc);

    if (!rc.rho_grid.empty() && !rc.ants_grid.empty()) {
        const auto cells = parameter_sweep(rc.pipeline, ds, rc.rho_grid, rc.ants_grid, rc.folds,
                                           derive_seed(rc.seed, "sweep"), rc.jobs);
        run.write("surface.csv", sweep_csv(cells));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ELM classifier distillation into IF-THEN rules via an improved "
                 "ant-colony rule miner, with a swing-equation dataset generator"};
    app.require_subcommand(1);

    std::string config_path, out_path, data_path, model_path, fixture_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
    int folds = 0;
    int n_samples = 0;
    int hidden_nodes = 0;

    auto add_common = [&](CLI::App* cmd, bool with_data) {
        cmd->add_option("--config", config_path,
                        "JSON config; keys: seed(1), jobs(1), data, model, fixture, "
                        "gen{n_samples(2000), load_range([0.75,1.3]), tcl_range([0.1,0.3]), "
                        "pm_jitter(0.1), feature_set(newengland7)}, "
                        "elm{hidden_nodes(50), activation(sigmoid), rank_tol(1e-10)}, "
                        "miner{n_ants(400), max_uncovered(10), min_cases_per_rule(5), "
                        "max_iterations(100), convergence_window(10), heuristic(density), "
                        "evaporation{mode(adaptive), rho(0.85), rho_min(0.05)}, "
                        "normalize_pheromone(false), reinit_pheromone(true)}, "
                        "extraction{n_examples(0=auto), probe_size(0=auto), "
                        "fidelity_threshold(0.95), bins_per_feature(6), "
                        "strategy(equal_frequency), exact_match_prepass(false)}, "
                        "eval{folds(5), positive_class(-1)}, "
                        "sweep{rho_grid, ants_grid}, baselines[{name,path}]");
        cmd->add_option("--seed", seed, "global seed; module streams derive from it (default 1)")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--jobs", jobs, "fold/sweep/scenario parallelism (default 1)");
        cmd->add_option("--out", out_path, "output directory (default runs/<cmd>-<timestamp>)");
        if (with_data) cmd->add_option("--data", data_path, "input dataset CSV");
    };

    CLI::App* gen = app.add_subcommand("gen", "generate a labeled TSA dataset CSV");
    add_common(gen, false);
    gen->add_option("--fixture", fixture_path, "swing fixture JSON (machines + networks)");
    gen->add_option("--samples", n_samples, "sample count override (default 2000)");

    CLI::App* train = app.add_subcommand("train", "train the ELM black box");
    add_common(train, true);
    train->add_option("--hidden-nodes", hidden_nodes, "hidden layer size override (default 50)");

    CLI::App* extract_cmd = app.add_subcommand("extract", "distill a trained model into rules");
    add_common(extract_cmd, true);
    extract_cmd->add_option("--model", model_path, "trained model JSON");

    CLI::App* eval_cmd = app.add_subcommand("eval", "cross-validated metrics and ROC");
    add_common(eval_cmd, true);
    eval_cmd->add_option("--folds", folds, "fold count override (default 5)");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "rho x ants accuracy surface");
    add_common(sweep_cmd, true);

    CLI::App* pipeline_cmd =
        app.add_subcommand("pipeline", "gen (optional) + train + extract + eval in one run dir");
    add_common(pipeline_cmd, true);
    pipeline_cmd->add_option("--fixture", fixture_path, "swing fixture JSON for generation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig rc = load_config(config_path);
        if (seed_set) rc.seed = seed;
        if (jobs > 0) rc.jobs = jobs;
        if (folds > 0) rc.folds = folds;
        if (n_samples > 0) rc.gen.n_samples = n_samples;
        if (hidden_nodes > 0) rc.pipeline.hidden_nodes = hidden_nodes;
        if (!data_path.empty()) rc.data = data_path;
        if (!model_path.empty()) rc.model = model_path;
        if (!fixture_path.empty()) rc.gen.fixture = fixture_path;
        rc.pipeline.miner.validate();
        if (rc.folds < 2) throw BadFoldSpec("eval.folds must be >= 2");
        if (rc.jobs < 1) throw ConfigError("jobs must be >= 1");

        const std::string sub = app.get_subcommands().front()->get_name();
        if (sub == "gen") {
            // gen writes a single CSV; --out names the file
            return cmd_gen(rc, out_path);
        }

        RunDir run(out_path.empty() ? default_run_dir(sub) : out_path);
        try {
            int code = 1;
            if (sub == "train")
                code = cmd_train(rc, run);
            else if (sub == "extract")
                code = cmd_extract(rc, run);
            else if (sub == "eval")
                code = cmd_eval(rc, run);
            else if (sub == "sweep")
                code = cmd_sweep(rc, run);
            else if (sub == "pipeline")
                code = cmd_pipeline(rc, run);
            run.write("config.resolved.json", resolved_config(rc).dump(2));
            return code;
        } catch (...) {
            run.discard();
            throw;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
