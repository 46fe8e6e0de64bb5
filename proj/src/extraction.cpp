#include "elmrules/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "elmrules/rng.hpp"

namespace elmrules {

namespace {

// Proposals that keep failing the fidelity gate eventually mean no
// acceptable rule exists on the current residual.
constexpr int kMaxConsecutiveRejections = 5;

int majority_label(const std::vector<int>& labels, const std::vector<int>& idx) {
    long long pos = 0, neg = 0;
    for (int s : idx) (labels[s] > 0 ? pos : neg)++;
    return pos > neg ? 1 : -1;
}

Eigen::MatrixXd draw_rows(const std::vector<std::pair<double, double>>& ranges, int n_rows,
                          Rng& rng) {
    Eigen::MatrixXd rows(n_rows, static_cast<Eigen::Index>(ranges.size()));
    for (int r = 0; r < n_rows; ++r)
        for (std::size_t c = 0; c < ranges.size(); ++c)
            rows(r, static_cast<Eigen::Index>(c)) = rng.uniform(ranges[c].first, ranges[c].second);
    return rows;
}

struct FidelityProbe {
    const ElmModel& model;
    const Discretizer& disc;
    Eigen::MatrixXd rows;
    std::vector<int> model_labels;

    FidelityProbe(const ElmModel& m, const Discretizer& d,
                  const std::vector<std::pair<double, double>>& ranges, int size, Rng& rng)
        : model(m), disc(d), rows(draw_rows(ranges, size, rng)),
          model_labels(elm_predict_batch(m, rows)) {}

    double agreement(const RuleList& rules) const {
        long long agree = 0;
        for (Eigen::Index r = 0; r < rows.rows(); ++r) {
            const auto binned = disc.apply_row(rows.row(r));
            if (rules.classify(binned).label == model_labels[r]) ++agree;
        }
        return static_cast<double>(agree) / static_cast<double>(rows.rows());
    }
};

}  // namespace

Eigen::MatrixXd generate_inputs(const SamplingConfig& cfg) {
    if (cfg.n_examples < 0) throw ConfigError("n_examples must be >= 0");
    for (const auto& [lo, hi] : cfg.ranges) {
        if (!(std::isfinite(lo) && std::isfinite(hi)) || lo > hi)
            throw ConfigError("sampling ranges must be finite with min <= max");
    }
    Rng rng(derive_seed(cfg.seed, "sample"));
    return draw_rows(cfg.ranges, cfg.n_examples, rng);
}

Dataset label_with_model(const ElmModel& model, const Eigen::MatrixXd& rows,
                         const std::vector<FeatureSpec>& specs) {
    return make_dataset(specs, rows, elm_predict_batch(model, rows));
}

double fidelity(const RuleList& rules, const ElmModel& model, const Eigen::MatrixXd& probe,
                const Discretizer& disc) {
    if (probe.rows() == 0) throw Error("fidelity requires a nonempty probe set");
    const std::vector<int> model_labels = elm_predict_batch(model, probe);
    long long agree = 0;
    for (Eigen::Index r = 0; r < probe.rows(); ++r) {
        const auto binned = disc.apply_row(probe.row(r));
        if (rules.classify(binned).label == model_labels[r]) ++agree;
    }
    return static_cast<double>(agree) / static_cast<double>(probe.rows());
}

ExtractionResult extract(const ElmModel& model, const Dataset& train, SamplingConfig cfg,
                         MinerConfig miner_cfg) {
    miner_cfg.validate();
    if (model.inputs() != train.n_features())
        throw DimensionMismatch("model expects " + std::to_string(model.inputs()) +
                                " features, training set has " +
                                std::to_string(train.n_features()));
    if (train.n_samples() < 1) throw Error("extraction requires a nonempty training set");

    if (cfg.n_examples <= 0) cfg.n_examples = std::min(10 * train.n_samples(), 20000);
    if (cfg.probe_size <= 0) cfg.probe_size = train.n_samples();
    if (cfg.ranges.empty()) {
        for (int c = 0; c < train.n_features(); ++c)
            cfg.ranges.emplace_back(train.specs[c].min, train.specs[c].max);
    }
    if (static_cast<int>(cfg.ranges.size()) != train.n_features())
        throw ConfigError("sampling range count does not match feature count");

    // Example set B: fresh uniform inputs labeled by the model.
    const Eigen::MatrixXd inputs = generate_inputs(cfg);
    const Dataset example_set = label_with_model(model, inputs, train.specs);
    Discretizer disc = discretizer_fit(example_set, cfg.bins_per_feature, cfg.strategy);
    const DiscretizedDataset dd = disc.apply(example_set);

    Rng probe_rng(derive_seed(cfg.seed, "probe"));
    auto fresh_probe = [&]() { return FidelityProbe(model, disc, cfg.ranges, cfg.probe_size, probe_rng); };

    std::vector<int> remaining(dd.n_samples());
    std::iota(remaining.begin(), remaining.end(), 0);

    ExtractionResult result;
    RuleList& list = result.rules;
    list.n_attributes = dd.n;

    auto provisional = [&](const Rule* candidate, const std::vector<int>& residual) {
        RuleList trial = list;
        if (candidate) trial.rules.push_back(*candidate);
        const std::vector<int>* basis = &residual;
        std::vector<int> all;
        if (residual.empty()) {
            all.resize(dd.n_samples());
            std::iota(all.begin(), all.end(), 0);
            basis = &all;
        }
        trial.default_class = majority_label(dd.labels, *basis);
        long long match = 0;
        for (int s : residual)
            if (dd.labels[s] == trial.default_class) ++match;
        trial.default_match = match;
        trial.default_total = static_cast<long long>(residual.size());
        return trial;
    };

    double prev_fidelity = fresh_probe().agreement(provisional(nullptr, remaining));

    auto uncovered_after = [&](const Rule& rule) {
        std::vector<int> keep;
        keep.reserve(remaining.size());
        for (int s : remaining)
            if (!rule.matches(dd, s)) keep.push_back(s);
        return keep;
    };

    // Shared accept/reject gate: a rule stays only if fidelity on a fresh
    // probe set improves or holds at threshold * previous.
    auto try_accept = [&](Rule&& candidate) {
        std::vector<int> residual = uncovered_after(candidate);
        if (residual.size() == remaining.size()) return false;  // covers nothing here
        const double fid = fresh_probe().agreement(provisional(&candidate, residual));
        if (fid > prev_fidelity || fid >= cfg.fidelity_threshold * prev_fidelity) {
            list.rules.push_back(std::move(candidate));
            remaining = std::move(residual);
            prev_fidelity = fid;
            ++result.accepted_rules;
            return true;
        }
        ++result.rejected_rules;
        return false;
    };

    if (cfg.exact_match_prepass) {
        // Groups of identical binned rows that the model labels uniformly
        // become full-conjunction rule candidates, largest group first.
        std::map<std::vector<std::uint8_t>, std::pair<int, int>> groups;  // key -> (pos, neg)
        for (int s = 0; s < dd.n_samples(); ++s) {
            std::vector<std::uint8_t> key(dd.bins.begin() + static_cast<std::size_t>(s) * dd.n,
                                          dd.bins.begin() + static_cast<std::size_t>(s + 1) * dd.n);
            auto& g = groups[key];
            (dd.labels[s] > 0 ? g.first : g.second)++;
        }
        std::vector<std::pair<std::vector<std::uint8_t>, int>> pure;
        for (const auto& [key, g] : groups) {
            const int size = g.first + g.second;
            if ((g.first == 0 || g.second == 0) && size >= miner_cfg.min_cases_per_rule)
                pure.emplace_back(key, size);
        }
        std::stable_sort(pure.begin(), pure.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        for (const auto& [key, size] : pure) {
            if (static_cast<int>(remaining.size()) <= miner_cfg.max_uncovered) break;
            Rule seedling;
            for (int a = 0; a < dd.n; ++a) seedling.antecedent.push_back({a, key[a]});
            long long pos = 0, neg = 0, cov_pos = 0, cov_neg = 0;
            for (int s : remaining) {
                (dd.labels[s] > 0 ? pos : neg)++;
                if (seedling.matches(dd, s)) (dd.labels[s] > 0 ? cov_pos : cov_neg)++;
            }
            if (cov_pos + cov_neg < miner_cfg.min_cases_per_rule) continue;
            seedling.consequent = cov_pos > cov_neg ? 1 : -1;
            seedling.counts =
                seedling.consequent > 0
                    ? ConfusionCounts{cov_pos, cov_neg, pos - cov_pos, neg - cov_neg}
                    : ConfusionCounts{cov_neg, cov_pos, neg - cov_neg, pos - cov_pos};
            seedling.quality = rule_quality(seedling.counts);
            if (seedling.quality <= 0.0) continue;
            try_accept(prune_rule(seedling, dd, remaining));
        }
    }

    int round = 0;
    int consecutive_rejects = 0;
    PheromoneTable carry;
    while (static_cast<int>(remaining.size()) > miner_cfg.max_uncovered) {
        const std::uint64_t round_seed = derive_seed(cfg.seed, "extract-round", round++);
        Rule candidate = mine_one_rule(dd, remaining, miner_cfg, round_seed,
                                       miner_cfg.reinit_pheromone ? nullptr : &carry);
        if (candidate.antecedent.empty() || candidate.quality <= 0.0) break;
        if (try_accept(std::move(candidate))) {
            consecutive_rejects = 0;
        } else if (++consecutive_rejects >= kMaxConsecutiveRejections) {
            break;  // no acceptable rule exists on this residual
        }
    }

    // Close the list with the final default and grade it.
    list = provisional(nullptr, remaining);

    const FidelityProbe final_probe = fresh_probe();
    result.fidelity = final_probe.agreement(list);
    result.discretizer = std::move(disc);

    auto grade = [&](const Eigen::MatrixXd& rows, const std::vector<int>& model_labels) {
        std::vector<double> scores;
        std::vector<int> predictions;
        scores.reserve(rows.rows());
        predictions.reserve(rows.rows());
        for (Eigen::Index r = 0; r < rows.rows(); ++r) {
            const auto binned = result.discretizer.apply_row(rows.row(r));
            scores.push_back(list.score(binned));
            predictions.push_back(list.classify(binned).label);
        }
        Metrics m = compute_metrics(scores, predictions, model_labels);
        m.n_rules = static_cast<double>(list.rules.size());
        m.terms_per_rule = list.terms_per_rule();
        return m;
    };
    result.train_metrics = grade(train.rows, elm_predict_batch(model, train.rows));
    result.probe_metrics = grade(final_probe.rows, final_probe.model_labels);
    return result;
}

std::string extraction_result_to_json(const ExtractionResult& result) {
    nlohmann::ordered_json j;
    j["fidelity"] = result.fidelity;
    j["n_rules"] = result.rules.rules.size();
    j["terms_per_rule"] = result.rules.terms_per_rule();
    j["accepted_rules"] = result.accepted_rules;
    j["rejected_rules"] = result.rejected_rules;
    j["rules"] = nlohmann::ordered_json::parse(rule_list_to_json(result.rules));
    return j.dump(2);
}

}  // namespace elmrules
