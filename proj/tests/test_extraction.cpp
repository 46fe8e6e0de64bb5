#include "doctest.h"

#include <cmath>

#include "elmrules/extraction.hpp"
#include "test_helpers.hpp"

using namespace elmrules;

namespace {

MinerConfig light_miner(std::uint64_t seed = 0) {
    MinerConfig cfg;
    cfg.n_ants = 60;
    cfg.max_iterations = 25;
    cfg.convergence_window = 4;
    cfg.min_cases_per_rule = 5;
    cfg.max_uncovered = 10;
    cfg.seed = seed;
    return cfg;
}

// Labeled continuous data whose classes are an axis-aligned step.
Dataset step_dataset(int n, double threshold, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd rows(n, 2);
    std::vector<int> labels(n);
    for (int r = 0; r < n; ++r) {
        rows(r, 0) = rng.uniform(-2.0, 2.0);
        rows(r, 1) = rng.uniform(-1.0, 1.0);
        labels[r] = rows(r, 0) > threshold ? 1 : -1;
    }
    return make_dataset({FeatureSpec{"x0"}, FeatureSpec{"x1"}}, rows, labels);
}

ElmModel constant_positive_model() {
    ElmModel m;
    m.input_weights = Eigen::MatrixXd::Zero(1, 2);
    m.thresholds = Eigen::VectorXd::Zero(1);
    m.output_weights = Eigen::MatrixXd::Ones(1, 1);  // sigmoid(0) * 1 = 0.5 > 0
    m.activation = Activation::Sigmoid;
    return m;
}

}  // namespace

TEST_CASE("generate_inputs honors ranges, seeds and degenerate cases") {
    SamplingConfig cfg;
    cfg.ranges = {{-1.0, 3.0}, {5.0, 5.0}};
    cfg.n_examples = 200;
    cfg.seed = 7;

    const Eigen::MatrixXd rows = generate_inputs(cfg);
    CHECK(rows.rows() == 200);
    CHECK(rows.cols() == 2);
    CHECK(rows.col(0).minCoeff() >= -1.0);
    CHECK(rows.col(0).maxCoeff() <= 3.0);
    CHECK((rows.col(1).array() - 5.0).abs().maxCoeff() == 0.0);  // min==max pins the column

    const Eigen::MatrixXd again = generate_inputs(cfg);
    CHECK((rows - again).cwiseAbs().maxCoeff() == 0.0);

    cfg.n_examples = 0;
    CHECK(generate_inputs(cfg).rows() == 0);

    cfg.ranges = {{2.0, 1.0}};
    cfg.n_examples = 1;
    CHECK_THROWS_AS(generate_inputs(cfg), ConfigError);
}

TEST_CASE("label_with_model uses the model outputs") {
    Dataset train = step_dataset(100, 0.0, 3);
    SUBCASE("constant model labels everything +1") {
        const ElmModel m = constant_positive_model();
        Dataset b = label_with_model(m, train.rows, train.specs);
        for (int l : b.labels) CHECK(l == 1);
    }
    SUBCASE("relabeling the training inputs reproduces training predictions") {
        auto [std_train, z] = zscore_fit_apply(train);
        ElmModel m = elm_train(std_train, 25, Activation::Sigmoid, 5);
        Dataset b = label_with_model(m, std_train.rows, std_train.specs);
        const std::vector<int> direct = elm_predict_batch(m, std_train.rows);
        CHECK(b.labels == direct);
        for (int l : b.labels) CHECK((l == 1 || l == -1));
    }
}

TEST_CASE("fidelity extremes") {
    Dataset train = step_dataset(400, 0.0, 11);
    auto [std_train, z] = zscore_fit_apply(train);
    ElmModel model = elm_train(std_train, 30, Activation::Sigmoid, 17);

    Discretizer disc = discretizer_fit(std_train, 6, BinStrategy::EqualFrequency);

    // a list that mirrors the model on every probe row: classify each row
    // with the model itself and count agreement of that "perfect" answer
    SUBCASE("agreeing everywhere gives 1, disagreeing gives 0") {
        // single catch-all rule +1 vs a constant model
        const ElmModel constant = constant_positive_model();
        RuleList all_pos;
        all_pos.n_attributes = 2;
        all_pos.default_class = 1;
        RuleList all_neg;
        all_neg.n_attributes = 2;
        all_neg.default_class = -1;
        Eigen::MatrixXd probe = std_train.rows.topRows(50);
        CHECK(fidelity(all_pos, constant, probe, disc) == doctest::Approx(1.0));
        CHECK(fidelity(all_neg, constant, probe, disc) == doctest::Approx(0.0));
    }
    SUBCASE("default-only list scores the model's majority-output rate") {
        const std::vector<int> outputs = elm_predict_batch(model, std_train.rows);
        long long pos = 0;
        for (int l : outputs)
            if (l > 0) ++pos;
        RuleList default_only;
        default_only.n_attributes = 2;
        default_only.default_class = 1;
        const double expected = static_cast<double>(pos) / outputs.size();
        CHECK(fidelity(default_only, model, std_train.rows, disc) ==
              doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("empty probe is rejected") {
        Eigen::MatrixXd empty(0, 2);
        CHECK_THROWS_AS(fidelity(RuleList{.n_attributes = 2}, model, empty, disc), Error);
    }
}

TEST_CASE("extraction recovers a step-function ELM with high fidelity") {
    // the ELM is fitted to labels of a one-feature step at the feature
    // median, so a short rule list over the binned feature can reproduce
    // it almost everywhere
    Dataset train = step_dataset(4000, 0.0, 23);
    auto [std_train, z] = zscore_fit_apply(train);
    ElmModel model = elm_train(std_train, 50, Activation::Sigmoid, 29);

    SamplingConfig cfg;
    cfg.seed = 31;  // n_examples stays at the default 10x train, capped at 20000
    ExtractionResult res = extract(model, std_train, cfg, light_miner());

    CHECK(res.fidelity >= 0.99);
    CHECK(res.rules.n_attributes == 2);
    CHECK(!res.rules.rules.empty());
    CHECK(res.probe_metrics.acc == doctest::Approx(res.fidelity));
}

TEST_CASE("extraction ignores true training labels") {
    Dataset train = step_dataset(300, 0.2, 41);
    auto [std_train, z] = zscore_fit_apply(train);
    ElmModel model = elm_train(std_train, 20, Activation::Sigmoid, 43);

    SamplingConfig cfg;
    cfg.seed = 47;
    cfg.n_examples = 1500;

    ExtractionResult a = extract(model, std_train, cfg, light_miner());

    Dataset permuted = std_train;
    std::reverse(permuted.labels.begin(), permuted.labels.end());
    ExtractionResult b = extract(model, permuted, cfg, light_miner());

    CHECK(a.fidelity == b.fidelity);
    CHECK(rule_list_to_json(a.rules) == rule_list_to_json(b.rules));
    CHECK(extraction_result_to_json(a) == extraction_result_to_json(b));
}

TEST_CASE("extraction is deterministic in its seed") {
    Dataset train = step_dataset(300, -0.4, 51);
    auto [std_train, z] = zscore_fit_apply(train);
    ElmModel model = elm_train(std_train, 20, Activation::Sigmoid, 53);

    SamplingConfig cfg;
    cfg.seed = 59;
    cfg.n_examples = 1200;
    ExtractionResult a = extract(model, std_train, cfg, light_miner());
    ExtractionResult b = extract(model, std_train, cfg, light_miner());
    CHECK(extraction_result_to_json(a) == extraction_result_to_json(b));

    cfg.seed = 60;
    ExtractionResult c = extract(model, std_train, cfg, light_miner());
    CHECK(extraction_result_to_json(a) != extraction_result_to_json(c));
}

TEST_CASE("zero fidelity threshold keeps every mined rule") {
    Dataset train = step_dataset(300, 0.0, 61);
    auto [std_train, z] = zscore_fit_apply(train);
    ElmModel model = elm_train(std_train, 20, Activation::Sigmoid, 67);

    SamplingConfig cfg;
    cfg.seed = 71;
    cfg.n_examples = 1200;
    cfg.fidelity_threshold = 0.0;
    ExtractionResult res = extract(model, std_train, cfg, light_miner());
    CHECK(res.rejected_rules == 0);
    CHECK(res.accepted_rules == static_cast<int>(res.rules.rules.size()));
}

TEST_CASE("constant model collapses to a default-only list") {
    Dataset train = step_dataset(200, 0.0, 73);
    const ElmModel constant = constant_positive_model();

    SamplingConfig cfg;
    cfg.seed = 79;
    cfg.n_examples = 800;
    ExtractionResult res = extract(constant, train, cfg, light_miner());
    CHECK(res.rules.rules.empty());
    CHECK(res.rules.default_class == 1);
    CHECK(res.fidelity == doctest::Approx(1.0));
}

TEST_CASE("larger example sets do not hurt fidelity on average") {
    Dataset train = step_dataset(300, 0.0, 83);
    auto [std_train, z] = zscore_fit_apply(train);
    ElmModel model = elm_train(std_train, 25, Activation::Sigmoid, 89);

    double small_sum = 0.0, large_sum = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SamplingConfig cfg;
        cfg.seed = 100 + seed;
        cfg.n_examples = 80;  // undersampled mining set
        small_sum += extract(model, std_train, cfg, light_miner()).fidelity;
        cfg.n_examples = 1600;
        large_sum += extract(model, std_train, cfg, light_miner()).fidelity;
    }
    CHECK(large_sum / 10.0 >= small_sum / 10.0 - 1e-9);
}

TEST_CASE("exact-match pre-pass on a small term space") {
    Dataset train = step_dataset(600, 0.0, 97);
    auto [std_train, z] = zscore_fit_apply(train);
    ElmModel model = elm_train(std_train, 25, Activation::Sigmoid, 101);

    SamplingConfig cfg;
    cfg.seed = 103;
    cfg.n_examples = 3000;
    cfg.bins_per_feature = 4;  // 16 distinct cells only
    cfg.exact_match_prepass = true;
    ExtractionResult res = extract(model, std_train, cfg, light_miner());
    CHECK(res.fidelity >= 0.9);
    CHECK(res.accepted_rules >= 1);
}

TEST_CASE("extraction result JSON carries the headline numbers") {
    Dataset train = step_dataset(200, 0.0, 107);
    auto [std_train, z] = zscore_fit_apply(train);
    ElmModel model = elm_train(std_train, 15, Activation::Sigmoid, 109);
    SamplingConfig cfg;
    cfg.seed = 113;
    cfg.n_examples = 600;
    ExtractionResult res = extract(model, std_train, cfg, light_miner());
    const std::string j = extraction_result_to_json(res);
    CHECK(j.find("\"fidelity\"") != std::string::npos);
    CHECK(j.find("\"n_rules\"") != std::string::npos);
    CHECK(j.find("\"terms_per_rule\"") != std::string::npos);
    CHECK(j.find("\"rules\"") != std::string::npos);
}
