#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "elmrules/eval.hpp"
#include "elmrules/rng.hpp"

using namespace elmrules;

namespace {

PipelineConfig light_pipeline() {
    PipelineConfig cfg;
    cfg.hidden_nodes = 25;
    cfg.miner.n_ants = 40;
    cfg.miner.max_iterations = 15;
    cfg.miner.convergence_window = 3;
    cfg.sampling.n_examples = 1500;
    return cfg;
}

// Continuous data whose label is a one-feature threshold at the median.
Dataset threshold_dataset(int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd rows(n, 2);
    std::vector<int> labels(n);
    for (int r = 0; r < n; ++r) {
        rows(r, 0) = rng.uniform(-2.0, 2.0);
        rows(r, 1) = rng.uniform(-1.0, 1.0);
        labels[r] = rows(r, 0) > 0.0 ? 1 : -1;
    }
    return make_dataset({FeatureSpec{"x0"}, FeatureSpec{"x1"}}, rows, labels);
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& content, const std::string& name) : path(name) {
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("cross validation learns a threshold rule") {
    Dataset ds = threshold_dataset(600, 3);
    CvReport report = cross_validate(light_pipeline(), ds, 3, 17);

    CHECK(report.folds.size() == 3);
    CHECK(report.mean.acc >= 0.90);  // pilot runs sit well above this
    CHECK(report.mean.n_rules >= 1.0);
    CHECK(report.valid_auc_folds == 3);
    CHECK(report.pooled_roc_valid);
    CHECK(report.pooled_roc.auc >= 0.90);
    // eta stays the mean of its three inputs fold by fold
    for (const FoldResult& fr : report.folds) {
        if (!fr.degenerate_roc)
            CHECK(fr.metrics.eta ==
                  doctest::Approx((fr.metrics.acc + fr.metrics.prec + fr.metrics.auc) / 3.0)
                      .epsilon(1e-12));
    }
}

TEST_CASE("cross validation is deterministic, also under parallel folds") {
    Dataset ds = threshold_dataset(300, 5);
    PipelineConfig cfg = light_pipeline();
    cfg.sampling.n_examples = 600;

    const CvReport a = cross_validate(cfg, ds, 3, 9, 1);
    const CvReport b = cross_validate(cfg, ds, 3, 9, 1);
    const CvReport c = cross_validate(cfg, ds, 3, 9, 2);
    CHECK(cv_report_to_json(a) == cv_report_to_json(b));
    CHECK(cv_report_to_json(a) == cv_report_to_json(c));
}

TEST_CASE("constant-label data cross-validates with degenerate ROC recorded") {
    Dataset ds = threshold_dataset(120, 7);
    for (int& l : ds.labels) l = 1;
    CvReport report = cross_validate(light_pipeline(), ds, 3, 21);
    CHECK(report.mean.acc == doctest::Approx(1.0));
    CHECK(report.valid_auc_folds == 0);
    for (const FoldResult& fr : report.folds) CHECK(fr.degenerate_roc);
    CHECK(std::isnan(report.mean.auc));
    CHECK_FALSE(report.pooled_roc_valid);
}

TEST_CASE("validation rows cannot influence fitted artifacts") {
    Dataset ds = threshold_dataset(200, 11);
    const auto splits = stratified_kfold(ds, 4, 33);
    const Dataset train_part = ds.subset(splits[0].train);

    // permute labels outside the training part; the fitted artifacts and
    // their serializations must not change
    Dataset tampered = ds;
    for (int idx : splits[0].validation) tampered.labels[idx] *= -1;
    const Dataset train_part_tampered = tampered.subset(splits[0].train);

    PipelineConfig cfg = light_pipeline();
    cfg.sampling.n_examples = 400;
    const FoldArtifacts a = fit_fold(train_part, cfg, 77);
    const FoldArtifacts b = fit_fold(train_part_tampered, cfg, 77);

    CHECK(elm_to_json(a.model) == elm_to_json(b.model));
    CHECK(rule_list_to_json(a.extraction.rules) == rule_list_to_json(b.extraction.rules));
    CHECK(a.extraction.fidelity == b.extraction.fidelity);
}

TEST_CASE("parameter sweep") {
    Dataset ds = threshold_dataset(200, 13);
    PipelineConfig cfg = light_pipeline();
    cfg.sampling.n_examples = 400;
    cfg.miner.n_ants = 30;

    SUBCASE("a 1x1 grid equals the direct cross validation") {
        const auto cells = parameter_sweep(cfg, ds, {0.85}, {30}, 3, 19);
        REQUIRE(cells.size() == 1);
        PipelineConfig direct = cfg;
        direct.miner.evaporation.rho = 0.85;
        direct.miner.n_ants = 30;
        CHECK(cells[0].acc == cross_validate(direct, ds, 3, 19).mean.acc);
    }
    SUBCASE("identical configurations give identical cells") {
        const auto cells = parameter_sweep(cfg, ds, {0.85, 0.85}, {30}, 3, 19);
        REQUIRE(cells.size() == 2);
        CHECK(cells[0].acc == cells[1].acc);
    }
    SUBCASE("parallel cells match serial cells") {
        const auto serial = parameter_sweep(cfg, ds, {0.7, 0.85}, {20, 30}, 3, 19, 1);
        const auto parallel = parameter_sweep(cfg, ds, {0.7, 0.85}, {20, 30}, 3, 19, 2);
        REQUIRE(serial.size() == parallel.size());
        for (std::size_t i = 0; i < serial.size(); ++i) {
            CHECK(serial[i].acc == parallel[i].acc);
            CHECK(serial[i].rho == parallel[i].rho);
            CHECK(serial[i].n_ants == parallel[i].n_ants);
        }
    }
    SUBCASE("empty grids are rejected") {
        CHECK_THROWS_AS(parameter_sweep(cfg, ds, {}, {30}, 3, 19), ConfigError);
    }
}

TEST_CASE("external baseline CSV evaluation") {
    SUBCASE("well-formed scores") {
        TempFile f("score,label\n0.9,1\n0.8,1\n-0.5,-1\n-0.2,-1\n", "ext_ok.csv");
        MethodRow row = evaluate_external_csv("Baseline", f.path, -1);
        CHECK(row.method == "Baseline");
        CHECK(row.mean.acc == doctest::Approx(1.0));
        CHECK(row.mean.auc == doctest::Approx(1.0));
        CHECK_FALSE(row.has_rule_stats);
        CHECK_FALSE(row.has_std);
    }
    SUBCASE("missing label column") {
        TempFile f("score,other\n0.9,1\n", "ext_nolabel.csv");
        CHECK_THROWS_AS(evaluate_external_csv("X", f.path), MalformedCsv);
    }
    SUBCASE("bad label value") {
        TempFile f("score,label\n0.9,2\n", "ext_badlabel.csv");
        CHECK_THROWS_AS(evaluate_external_csv("X", f.path), InvalidLabel);
    }
    SUBCASE("non-numeric score") {
        TempFile f("score,label\nabc,1\n", "ext_badscore.csv");
        CHECK_THROWS_AS(evaluate_external_csv("X", f.path), MalformedCsv);
    }
}

TEST_CASE("comparison table rendering") {
    Dataset ds = threshold_dataset(200, 23);
    PipelineConfig cfg = light_pipeline();
    cfg.sampling.n_examples = 400;
    CvReport report = cross_validate(cfg, ds, 3, 29);

    TempFile f("score,label\n0.9,1\n0.8,-1\n-0.5,-1\n-0.2,1\n", "ext_row.csv");
    std::vector<MethodRow> rows = {method_row_from_cv("ELM-rules", report),
                                   evaluate_external_csv("Baseline", f.path)};
    const std::string table = render_comparison_table(rows);
    CHECK(table.find("Method") != std::string::npos);
    CHECK(table.find("Acc (%)") != std::string::npos);
    CHECK(table.find("#T/R") != std::string::npos);
    CHECK(table.find("ELM-rules") != std::string::npos);
    CHECK(table.find("Baseline") != std::string::npos);
    // externals carry no rule-list size statistics
    const auto baseline_line = table.substr(table.find("Baseline"));
    CHECK(baseline_line.find(" - ") != std::string::npos);

    const std::string csv = comparison_table_csv(rows);
    CHECK(csv.rfind("method,acc,acc_std", 0) == 0);
    CHECK(csv.find("ELM-rules,") != std::string::npos);
}

TEST_CASE("CV report JSON keeps the result-table column order") {
    Dataset ds = threshold_dataset(150, 31);
    PipelineConfig cfg = light_pipeline();
    cfg.sampling.n_examples = 300;
    const std::string text = cv_report_to_json(cross_validate(cfg, ds, 3, 37));
    const auto j = nlohmann::ordered_json::parse(text);
    std::vector<std::string> keys;
    for (auto it = j.at("mean").begin(); it != j.at("mean").end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"acc", "prec", "auc", "n_rules", "terms_per_rule",
                                           "eta"});
}

TEST_CASE("CSV artifact formats") {
    RocCurve curve;
    curve.points = {{std::numeric_limits<double>::infinity(), 0.0, 0.0}, {0.5, 0.25, 1.0}};
    curve.auc = 1.0;
    const std::string roc = roc_csv(curve);
    CHECK(roc.rfind("threshold,fpr,tpr\n", 0) == 0);
    CHECK(roc.find("inf,0,0") != std::string::npos);
    CHECK(roc.find("0.5,0.25,1") != std::string::npos);

    const std::string sweep = sweep_csv({{0.85, 400, 0.97}});
    CHECK(sweep.rfind("rho,n_ants,acc\n", 0) == 0);
    CHECK(sweep.find("0.85,400,0.97") != std::string::npos);
}
