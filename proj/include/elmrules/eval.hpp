#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "elmrules/dataset.hpp"
#include "elmrules/elm.hpp"
#include "elmrules/extraction.hpp"
#include "elmrules/metrics.hpp"
#include "elmrules/miner.hpp"

namespace elmrules {

// Everything one fold fit needs; validation rows are never an input.
struct PipelineConfig {
    int hidden_nodes = 50;
    Activation activation = Activation::Sigmoid;
    double rank_tol = 1e-10;
    MinerConfig miner;
    SamplingConfig sampling;  // carries the discretization settings
    int positive_class = -1;  // unstable is the operationally critical class
};

struct FoldArtifacts {
    ConstantFilter filter;
    ZScore zscore;
    ElmModel model;
    ExtractionResult extraction;
};

// Fits preprocessing, ELM and extraction on the given training part
// alone. Keeping validation data out of the signature is what makes the
// cross-validation leakage-free.
FoldArtifacts fit_fold(const Dataset& train_part, const PipelineConfig& cfg, std::uint64_t seed);

struct FoldResult {
    Metrics metrics;  // rule list vs true labels on the validation part
    bool degenerate_roc = false;
    double fidelity = 0.0;
    std::string rules_json;
    std::vector<double> scores;  // +1-oriented validation scores
    std::vector<int> labels;     // true validation labels
};

struct CvReport {
    std::vector<FoldResult> folds;
    Metrics mean;
    Metrics stddev;  // sample standard deviation across folds
    int valid_auc_folds = 0;
    int positive_class = -1;
    RocCurve pooled_roc;  // over all validation scores, when both classes appear
    bool pooled_roc_valid = false;
};

CvReport cross_validate(const PipelineConfig& cfg, const Dataset& ds, int k, std::uint64_t seed,
                        int jobs = 1);

struct SweepCell {
    double rho = 0.0;
    int n_ants = 0;
    double acc = 0.0;
};

// CV accuracy per (rho, n_ants) grid cell; the shared seed keeps every
// cell on identical folds.
std::vector<SweepCell> parameter_sweep(const PipelineConfig& cfg, const Dataset& ds,
                                       const std::vector<double>& rho_grid,
                                       const std::vector<int>& ants_grid, int k,
                                       std::uint64_t seed, int jobs = 1);

struct MethodRow {
    std::string method;
    Metrics mean;
    Metrics stddev;
    bool has_std = false;
    bool has_rule_stats = false;
};

MethodRow method_row_from_cv(const std::string& name, const CvReport& report);

// Scores an external baseline from a CSV with `score,label` columns;
// predictions are sign(score) with ties unstable.
MethodRow evaluate_external_csv(const std::string& name, const std::string& path,
                                int positive_class = -1);

std::string render_comparison_table(const std::vector<MethodRow>& rows);
std::string comparison_table_csv(const std::vector<MethodRow>& rows);

std::string cv_report_to_json(const CvReport& report);
std::string roc_csv(const RocCurve& curve);
std::string sweep_csv(const std::vector<SweepCell>& cells);

}  // namespace elmrules
