#include "elmrules/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace elmrules {

ConfusionCounts confusion(const std::vector<int>& predictions, const std::vector<int>& labels,
                          int positive_class) {
    if (predictions.size() != labels.size())
        throw DimensionMismatch("predictions/labels length mismatch");
    if (predictions.empty()) throw Error("confusion requires at least one sample");
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool actual = labels[i] == positive_class;
        const bool predicted = predictions[i] == positive_class;
        if (actual && predicted)
            ++c.tp;
        else if (!actual && predicted)
            ++c.fp;
        else if (actual && !predicted)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

double accuracy(const ConfusionCounts& c) {
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double precision(const ConfusionCounts& c, bool* undefined) {
    if (undefined) *undefined = false;
    if (c.tp + c.fp == 0) {
        if (undefined) *undefined = true;
        return 0.0;
    }
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels,
                 int positive_class) {
    if (scores.size() != labels.size())
        throw DimensionMismatch("scores/labels length mismatch");
    long long n_pos = 0, n_neg = 0;
    for (int l : labels) (l == positive_class ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw DegenerateRoc("ROC is undefined with a single class present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    long long tp = 0, fp = 0;
    std::size_t i = 0;
    double auc = 0.0;
    double prev_fpr = 0.0, prev_tpr = 0.0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        // group tied scores so ties get half credit via the trapezoid
        while (i < order.size() && scores[order[i]] == threshold) {
            (labels[order[i]] == positive_class ? tp : fp)++;
            ++i;
        }
        const double fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
        const double tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        curve.points.push_back({threshold, fpr, tpr});
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    curve.auc = auc;
    return curve;
}

double composite_eta(double acc, double prec, double auc) {
    return (acc + prec + auc) / 3.0;
}

Metrics compute_metrics(const std::vector<double>& scores, const std::vector<int>& predictions,
                        const std::vector<int>& labels, int positive_class,
                        bool* degenerate_roc) {
    Metrics m;
    const ConfusionCounts c = confusion(predictions, labels, positive_class);
    m.acc = accuracy(c);
    m.prec = precision(c);
    if (degenerate_roc) *degenerate_roc = false;
    try {
        std::vector<double> oriented = scores;
        if (positive_class == -1)
            for (double& s : oriented) s = -s;
        m.auc = roc_auc(oriented, labels, positive_class).auc;
        m.eta = composite_eta(m.acc, m.prec, m.auc);
    } catch (const DegenerateRoc&) {
        if (degenerate_roc) *degenerate_roc = true;
        m.auc = std::numeric_limits<double>::quiet_NaN();
        m.eta = std::numeric_limits<double>::quiet_NaN();
    }
    return m;
}

}  // namespace elmrules
