#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "elmrules/errors.hpp"

namespace elmrules {

// Per-feature statistics and fitted bin edges.
struct FeatureSpec {
    std::string name;
    int index = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0;
    std::vector<double> bin_edges;  // interior cut points, strictly ascending
};

// Labeled continuous samples. Labels are always in {-1, +1}.
struct Dataset {
    std::vector<FeatureSpec> specs;
    Eigen::MatrixXd rows;    // N x n
    std::vector<int> labels; // length N

    int n_samples() const { return static_cast<int>(rows.rows()); }
    int n_features() const { return static_cast<int>(rows.cols()); }

    Dataset subset(const std::vector<int>& idx) const;
};

// Binned (nominal) counterpart of a Dataset for rule mining.
struct DiscretizedDataset {
    std::vector<FeatureSpec> specs;
    std::vector<std::uint8_t> bins;  // row-major N x n bin indices
    std::vector<int> b;              // bin count per feature
    std::vector<int> labels;
    int n = 0;  // features

    int n_samples() const { return n == 0 ? 0 : static_cast<int>(bins.size()) / n; }
    std::uint8_t bin(int row, int col) const { return bins[static_cast<std::size_t>(row) * n + col]; }
};

// CSV ingestion: header row, final column `label` with values -1/1.
Dataset load_csv(const std::string& path);
std::string to_csv(const Dataset& ds);
void save_csv(const Dataset& ds, const std::string& path);

// Assembles a dataset and recomputes the per-feature statistics.
Dataset make_dataset(std::vector<FeatureSpec> specs, Eigen::MatrixXd rows,
                     std::vector<int> labels);

// Fitted z-score transform (Eq. f' = (f - mean)/std per feature).
struct ZScore {
    std::vector<double> means;
    std::vector<double> stds;

    Dataset apply(const Dataset& ds) const;
    Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
    double inverse(int feature, double standardized) const {
        return standardized * stds[feature] + means[feature];
    }
};

// Throws ConstantFeature when a feature has zero variance.
ZScore zscore_fit(const Dataset& ds);
std::pair<Dataset, ZScore> zscore_fit_apply(const Dataset& ds);

enum class BinStrategy { EqualFrequency, EqualWidth };

BinStrategy bin_strategy_from_string(const std::string& s);
std::string to_string(BinStrategy s);

// Maps continuous values to bin indices. A feature with fewer distinct
// values than requested bins gets a reduced bin count, never an error;
// apply-time values outside the fitted range land in the boundary bins.
struct Discretizer {
    std::vector<std::vector<double>> edges;  // interior edges per feature
    std::vector<double> fit_min;
    std::vector<double> fit_max;

    int n_features() const { return static_cast<int>(edges.size()); }
    std::vector<int> bin_counts() const;
    int bin_of(int feature, double value) const;
    std::vector<std::uint8_t> apply_row(const Eigen::RowVectorXd& row) const;
    DiscretizedDataset apply(const Dataset& ds) const;
};

Discretizer discretizer_fit(const Dataset& ds, int bins_per_feature, BinStrategy strategy);
DiscretizedDataset discretize(const Dataset& ds, int bins_per_feature, BinStrategy strategy,
                              Discretizer* fitted = nullptr);

struct FoldSplit {
    std::vector<int> train;
    std::vector<int> validation;
};

// Deterministic stratified k-fold split; throws BadFoldSpec when k < 2 or
// a class has fewer than k members.
std::vector<FoldSplit> stratified_kfold(const Dataset& ds, int k, std::uint64_t seed);

// Zero-variance feature removal; the filter reapplies the same column
// selection to new rows.
struct ConstantFilter {
    std::vector<int> kept;
    std::vector<std::string> dropped;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
};

std::pair<Dataset, ConstantFilter> drop_constant_features(const Dataset& ds);

}  // namespace elmrules
