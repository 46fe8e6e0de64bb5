#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "elmrules/dataset.hpp"
#include "elmrules/elm.hpp"
#include "elmrules/metrics.hpp"
#include "elmrules/miner.hpp"

namespace elmrules {

// Pedagogical extraction settings. Rule mining sees only the model's
// outputs, never true labels.
struct SamplingConfig {
    int n_examples = 0;  // 0 = 10x train size, capped at 20000
    std::vector<std::pair<double, double>> ranges;  // filled from train when empty
    std::uint64_t seed = 0;
    double fidelity_threshold = 0.95;  // accepted rules must keep fidelity >= threshold * previous
    int probe_size = 0;                // 0 = train size
    int bins_per_feature = 6;
    BinStrategy strategy = BinStrategy::EqualFrequency;
    bool exact_match_prepass = false;  // propose pure identical-row groups first
};

struct ExtractionResult {
    RuleList rules;
    double fidelity = 0.0;         // agreement with the model on the final probe set
    Metrics train_metrics;         // rule list vs model outputs on the training inputs
    Metrics probe_metrics;         // rule list vs model outputs on the final probe set
    Discretizer discretizer;       // fitted on the mining set B
    int accepted_rules = 0;
    int rejected_rules = 0;
};

// Random input modes (B1): each feature i.i.d. uniform on its range.
Eigen::MatrixXd generate_inputs(const SamplingConfig& cfg);

// Labels rows with the model's predictions, producing the example set B.
Dataset label_with_model(const ElmModel& model, const Eigen::MatrixXd& rows,
                         const std::vector<FeatureSpec>& specs);

// Agreement rate between the rule list and the model on probe rows.
double fidelity(const RuleList& rules, const ElmModel& model, const Eigen::MatrixXd& probe,
                const Discretizer& disc);

// Full pedagogical pipeline: sample B from the training ranges, label it
// with the model, mine rules, and keep each candidate only while fidelity
// on a freshly drawn probe set holds up.
ExtractionResult extract(const ElmModel& model, const Dataset& train, SamplingConfig cfg,
                         MinerConfig miner_cfg);

std::string extraction_result_to_json(const ExtractionResult& result);

}  // namespace elmrules
