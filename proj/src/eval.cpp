#include "elmrules/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "elmrules/rng.hpp"

namespace elmrules {

namespace {

std::string shortest(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

// Sample mean and standard deviation, NaN entries skipped (folds whose
// ROC was degenerate).
std::pair<double, double> mean_std(const std::vector<double>& xs) {
    std::vector<double> v;
    for (double x : xs)
        if (!std::isnan(x)) v.push_back(x);
    if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(),
                           std::numeric_limits<double>::quiet_NaN()};
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    if (v.size() < 2) return {mean, 0.0};
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return {mean, std::sqrt(acc / (v.size() - 1))};
}

// Run one job per item in waves of `jobs` threads, preserving order.
template <typename R, typename Fn>
std::vector<R> run_jobs(int count, int jobs, Fn&& fn) {
    std::vector<R> results(count);
    if (jobs <= 1) {
        for (int i = 0; i < count; ++i) results[i] = fn(i);
        return results;
    }
    int next = 0;
    while (next < count) {
        const int batch = std::min(jobs, count - next);
        std::vector<std::future<R>> futures;
        futures.reserve(batch);
        for (int b = 0; b < batch; ++b)
            futures.push_back(std::async(std::launch::async, fn, next + b));
        for (int b = 0; b < batch; ++b) results[next + b] = futures[b].get();
        next += batch;
    }
    return results;
}

}  // namespace

FoldArtifacts fit_fold(const Dataset& train_part, const PipelineConfig& cfg, std::uint64_t seed) {
    FoldArtifacts art;
    auto [filtered, filter] = drop_constant_features(train_part);
    if (filtered.n_features() == 0) throw ConstantFeature("every feature is constant");
    art.filter = std::move(filter);

    auto [standardized, zscore] = zscore_fit_apply(filtered);
    art.zscore = std::move(zscore);

    art.model = elm_train(standardized, cfg.hidden_nodes, cfg.activation,
                          derive_seed(seed, "elm"), cfg.rank_tol);

    SamplingConfig sampling = cfg.sampling;
    sampling.seed = derive_seed(seed, "extract");
    art.extraction = extract(art.model, standardized, sampling, cfg.miner);
    return art;
}

namespace {

FoldResult evaluate_fold(const FoldArtifacts& art, const Dataset& validation,
                         int positive_class) {
    FoldResult res;
    const Eigen::MatrixXd rows = art.zscore.apply(art.filter.apply(validation.rows));
    std::vector<int> predictions;
    predictions.reserve(validation.n_samples());
    res.scores.reserve(validation.n_samples());
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        const auto binned = art.extraction.discretizer.apply_row(rows.row(r));
        predictions.push_back(art.extraction.rules.classify(binned).label);
        res.scores.push_back(art.extraction.rules.score(binned));
    }
    res.labels = validation.labels;
    res.metrics = compute_metrics(res.scores, predictions, validation.labels, positive_class,
                                  &res.degenerate_roc);
    res.metrics.n_rules = static_cast<double>(art.extraction.rules.rules.size());
    res.metrics.terms_per_rule = art.extraction.rules.terms_per_rule();
    res.fidelity = art.extraction.fidelity;
    res.rules_json = rule_list_to_json(art.extraction.rules);
    return res;
}

}  // namespace

CvReport cross_validate(const PipelineConfig& cfg, const Dataset& ds, int k, std::uint64_t seed,
                        int jobs) {
    const std::vector<FoldSplit> splits = stratified_kfold(ds, k, seed);

    CvReport report;
    report.positive_class = cfg.positive_class;
    report.folds = run_jobs<FoldResult>(k, jobs, [&](int f) {
        const FoldArtifacts art =
            fit_fold(ds.subset(splits[f].train), cfg, derive_seed(seed, "fold", f));
        return evaluate_fold(art, ds.subset(splits[f].validation), cfg.positive_class);
    });

    auto collect = [&](auto pick) {
        std::vector<double> xs;
        for (const FoldResult& fr : report.folds) xs.push_back(pick(fr.metrics));
        return xs;
    };
    std::tie(report.mean.acc, report.stddev.acc) = mean_std(collect([](const Metrics& m) { return m.acc; }));
    std::tie(report.mean.prec, report.stddev.prec) = mean_std(collect([](const Metrics& m) { return m.prec; }));
    std::tie(report.mean.auc, report.stddev.auc) = mean_std(collect([](const Metrics& m) { return m.auc; }));
    std::tie(report.mean.eta, report.stddev.eta) = mean_std(collect([](const Metrics& m) { return m.eta; }));
    std::tie(report.mean.n_rules, report.stddev.n_rules) =
        mean_std(collect([](const Metrics& m) { return m.n_rules; }));
    std::tie(report.mean.terms_per_rule, report.stddev.terms_per_rule) =
        mean_std(collect([](const Metrics& m) { return m.terms_per_rule; }));
    for (const FoldResult& fr : report.folds)
        if (!fr.degenerate_roc) ++report.valid_auc_folds;

    std::vector<double> pooled_scores;
    std::vector<int> pooled_labels;
    for (const FoldResult& fr : report.folds) {
        pooled_scores.insert(pooled_scores.end(), fr.scores.begin(), fr.scores.end());
        pooled_labels.insert(pooled_labels.end(), fr.labels.begin(), fr.labels.end());
    }
    try {
        if (cfg.positive_class == -1)
            for (double& s : pooled_scores) s = -s;
        report.pooled_roc = roc_auc(pooled_scores, pooled_labels, cfg.positive_class);
        report.pooled_roc_valid = true;
    } catch (const DegenerateRoc&) {
        report.pooled_roc_valid = false;
    }
    return report;
}

std::vector<SweepCell> parameter_sweep(const PipelineConfig& cfg, const Dataset& ds,
                                       const std::vector<double>& rho_grid,
                                       const std::vector<int>& ants_grid, int k,
                                       std::uint64_t seed, int jobs) {
    if (rho_grid.empty() || ants_grid.empty()) throw ConfigError("sweep grids must be nonempty");
    std::vector<SweepCell> cells;
    for (double rho : rho_grid)
        for (int ants : ants_grid) cells.push_back({rho, ants, 0.0});

    std::vector<double> accs = run_jobs<double>(static_cast<int>(cells.size()), jobs, [&](int i) {
        PipelineConfig cell_cfg = cfg;
        cell_cfg.miner.evaporation.rho = cells[i].rho;
        cell_cfg.miner.n_ants = cells[i].n_ants;
        // folds run serially inside each cell job
        return cross_validate(cell_cfg, ds, k, seed, 1).mean.acc;
    });
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i].acc = accs[i];
    return cells;
}

MethodRow method_row_from_cv(const std::string& name, const CvReport& report) {
    MethodRow row;
    row.method = name;
    row.mean = report.mean;
    row.stddev = report.stddev;
    row.has_std = true;
    row.has_rule_stats = true;
    return row;
}

MethodRow evaluate_external_csv(const std::string& name, const std::string& path,
                                int positive_class) {
    std::ifstream in(path);
    if (!in) throw MalformedCsv("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw MalformedCsv("empty file '" + path + "'");

    auto columns = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cell.erase(0, cell.find_first_not_of(" \t\r\n"));
            cell.erase(cell.find_last_not_of(" \t\r\n") + 1);
            cells.push_back(cell);
        }
        return cells;
    };
    const auto header = columns(line);
    int score_col = -1, label_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "score") score_col = static_cast<int>(i);
        if (header[i] == "label") label_col = static_cast<int>(i);
    }
    if (score_col < 0) throw MalformedCsv("'" + path + "' lacks a 'score' column");
    if (label_col < 0) throw MalformedCsv("'" + path + "' lacks a 'label' column");

    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<int> predictions;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const auto cells = columns(line);
        if (static_cast<int>(cells.size()) <= std::max(score_col, label_col))
            throw RaggedRow("row on line " + std::to_string(line_no) + " is too short");
        double score = 0.0;
        const auto& sc = cells[score_col];
        auto [p, ec] = std::from_chars(sc.data(), sc.data() + sc.size(), score);
        if (ec != std::errc() || p != sc.data() + sc.size())
            throw MalformedCsv("non-numeric score on line " + std::to_string(line_no));
        const auto& lc = cells[label_col];
        if (lc != "-1" && lc != "1" && lc != "+1")
            throw InvalidLabel("label '" + lc + "' on line " + std::to_string(line_no));
        scores.push_back(score);
        labels.push_back(lc == "-1" ? -1 : 1);
        predictions.push_back(score > 0.0 ? 1 : -1);
    }
    if (scores.empty()) throw MalformedCsv("'" + path + "' has no data rows");

    MethodRow row;
    row.method = name;
    bool degenerate = false;
    row.mean = compute_metrics(scores, predictions, labels, positive_class, &degenerate);
    return row;
}

namespace {

std::string pm(double mean, double std, int mean_digits, int std_digits, bool has_std) {
    if (std::isnan(mean)) return "n/a";
    if (!has_std) return fixed(mean, mean_digits);
    return fixed(mean, mean_digits) + "±" + fixed(std, std_digits);
}

}  // namespace

std::string render_comparison_table(const std::vector<MethodRow>& rows) {
    // Column layout mirrors the result tables: percentages for Acc/Prec,
    // fractions for AUC and eta.
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"Method", "Acc (%)", "Prec (%)", "AUC", "#R", "#T/R", "eta"});
    for (const MethodRow& r : rows) {
        cells.push_back({
            r.method,
            pm(r.mean.acc * 100.0, r.stddev.acc, 2, 4, r.has_std),
            pm(r.mean.prec * 100.0, r.stddev.prec, 2, 4, r.has_std),
            pm(r.mean.auc, r.stddev.auc, 4, 4, r.has_std),
            r.has_rule_stats ? pm(r.mean.n_rules, r.stddev.n_rules, 1, 2, r.has_std) : "-",
            r.has_rule_stats ? fixed(r.mean.terms_per_rule, 2) : "-",
            pm(r.mean.eta, r.stddev.eta, 4, 4, r.has_std),
        });
    }
    std::vector<std::size_t> width(cells[0].size(), 0);
    for (const auto& row : cells)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    std::ostringstream out;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << row[c];
            if (c + 1 < row.size()) out << std::string(width[c] - row[c].size() + 2, ' ');
        }
        out << '\n';
    }
    return out.str();
}

std::string comparison_table_csv(const std::vector<MethodRow>& rows) {
    std::ostringstream out;
    out << "method,acc,acc_std,prec,prec_std,auc,auc_std,n_rules,n_rules_std,terms_per_rule,eta,"
           "eta_std\n";
    for (const MethodRow& r : rows) {
        auto opt = [&](double v, bool present) { return present && !std::isnan(v) ? shortest(v) : ""; };
        out << r.method << ',' << opt(r.mean.acc, true) << ',' << opt(r.stddev.acc, r.has_std)
            << ',' << opt(r.mean.prec, true) << ',' << opt(r.stddev.prec, r.has_std) << ','
            << opt(r.mean.auc, true) << ',' << opt(r.stddev.auc, r.has_std) << ','
            << opt(r.mean.n_rules, r.has_rule_stats) << ','
            << opt(r.stddev.n_rules, r.has_rule_stats && r.has_std) << ','
            << opt(r.mean.terms_per_rule, r.has_rule_stats) << ',' << opt(r.mean.eta, true) << ','
            << opt(r.stddev.eta, r.has_std) << '\n';
    }
    return out.str();
}

std::string cv_report_to_json(const CvReport& report) {
    nlohmann::ordered_json j;
    j["folds"] = report.folds.size();
    j["positive_class"] = report.positive_class;
    auto block = [](const Metrics& m) {
        nlohmann::ordered_json b;
        // Table-3 column order
        b["acc"] = m.acc;
        b["prec"] = m.prec;
        b["auc"] = m.auc;
        b["n_rules"] = m.n_rules;
        b["terms_per_rule"] = m.terms_per_rule;
        b["eta"] = m.eta;
        return b;
    };
    j["mean"] = block(report.mean);
    j["std"] = block(report.stddev);
    j["valid_auc_folds"] = report.valid_auc_folds;
    j["per_fold"] = nlohmann::ordered_json::array();
    for (const FoldResult& fr : report.folds) {
        nlohmann::ordered_json f;
        f["metrics"] = block(fr.metrics);
        f["degenerate_roc"] = fr.degenerate_roc;
        f["fidelity"] = fr.fidelity;
        j["per_fold"].push_back(std::move(f));
    }
    return j.dump(2);
}

std::string roc_csv(const RocCurve& curve) {
    std::ostringstream out;
    out << "threshold,fpr,tpr\n";
    for (const RocPoint& p : curve.points)
        out << shortest(p.threshold) << ',' << shortest(p.fpr) << ',' << shortest(p.tpr) << '\n';
    return out.str();
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
    std::ostringstream out;
    out << "rho,n_ants,acc\n";
    for (const SweepCell& c : cells)
        out << shortest(c.rho) << ',' << c.n_ants << ',' << shortest(c.acc) << '\n';
    return out.str();
}

}  // namespace elmrules
