#pragma once

#include <vector>

#include "elmrules/errors.hpp"

namespace elmrules {

struct ConfusionCounts {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long tn = 0;

    long long total() const { return tp + fp + fn + tn; }
};

// Standard confusion counts with a configurable positive class; -1
// (unstable) is the operationally critical class and the default.
ConfusionCounts confusion(const std::vector<int>& predictions, const std::vector<int>& labels,
                          int positive_class = -1);

double accuracy(const ConfusionCounts& c);

// TP/(TP+FP); 0 with the flag set when no positive predictions exist.
double precision(const ConfusionCounts& c, bool* undefined = nullptr);

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0.0;
};

// Threshold sweep over the distinct score values (ties grouped), AUC by
// the trapezoid rule; scores must rank the positive class higher.
// Throws DegenerateRoc when only one class is present.
RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels,
                 int positive_class = 1);

// Mean of Acc, Prec and AUC.
double composite_eta(double acc, double prec, double auc);

// One evaluation row: predictive quality plus rule-list size statistics.
struct Metrics {
    double acc = 0.0;
    double prec = 0.0;
    double auc = 0.0;
    double eta = 0.0;
    double n_rules = 0.0;
    double terms_per_rule = 0.0;
};

// Acc/Prec/AUC/eta in one shot. `scores` must rank +1 higher; they are
// flipped internally when the positive class is -1. A single-class label
// vector sets the degenerate flag and leaves auc/eta as NaN.
Metrics compute_metrics(const std::vector<double>& scores, const std::vector<int>& predictions,
                        const std::vector<int>& labels, int positive_class = -1,
                        bool* degenerate_roc = nullptr);

}  // namespace elmrules
