#include "elmrules/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "elmrules/rng.hpp"

namespace elmrules {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& cell, int line_no) {
    const std::string t = trim(cell);
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) {
        throw MalformedCsv("non-numeric cell '" + t + "' on line " + std::to_string(line_no));
    }
    return v;
}

void recompute_stats(Dataset& ds) {
    const int n = ds.n_features();
    const int N = ds.n_samples();
    for (int i = 0; i < n; ++i) {
        auto col = ds.rows.col(i);
        FeatureSpec& spec = ds.specs[i];
        spec.index = i;
        spec.min = col.minCoeff();
        spec.max = col.maxCoeff();
        spec.mean = col.mean();
        spec.std = N > 0 ? std::sqrt((col.array() - spec.mean).square().sum() / N) : 0.0;
    }
}

// Deterministic shortest round-trip formatting, so rewritten files are
// byte-identical across runs.
std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

}  // namespace

Dataset Dataset::subset(const std::vector<int>& idx) const {
    Dataset out;
    out.specs = specs;
    out.rows.resize(static_cast<Eigen::Index>(idx.size()), rows.cols());
    out.labels.reserve(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out.rows.row(static_cast<Eigen::Index>(r)) = rows.row(idx[r]);
        out.labels.push_back(labels[idx[r]]);
    }
    recompute_stats(out);
    return out;
}

Dataset make_dataset(std::vector<FeatureSpec> specs, Eigen::MatrixXd rows,
                     std::vector<int> labels) {
    if (static_cast<Eigen::Index>(specs.size()) != rows.cols())
        throw DimensionMismatch("spec count does not match row width");
    if (static_cast<Eigen::Index>(labels.size()) != rows.rows())
        throw DimensionMismatch("label count does not match row count");
    Dataset ds;
    ds.specs = std::move(specs);
    ds.rows = std::move(rows);
    ds.labels = std::move(labels);
    recompute_stats(ds);
    return ds;
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedCsv("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw MalformedCsv("empty file '" + path + "'");
    auto header = split_csv_line(line);
    if (header.size() < 2) throw MalformedCsv("header must name at least one feature and 'label'");
    if (trim(header.back()) != "label") throw MalformedCsv("final column must be named 'label'");

    const int n = static_cast<int>(header.size()) - 1;
    std::vector<double> values;
    std::vector<int> labels;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != n + 1) {
            throw RaggedRow("row on line " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(n + 1));
        }
        for (int i = 0; i < n; ++i) values.push_back(parse_double(cells[i], line_no));
        const double raw = parse_double(cells[n], line_no);
        const int label = static_cast<int>(raw);
        if (raw != static_cast<double>(label) || (label != -1 && label != 1)) {
            throw InvalidLabel("label '" + trim(cells[n]) + "' on line " + std::to_string(line_no) +
                               " is not -1 or 1");
        }
        labels.push_back(label);
    }
    const int N = static_cast<int>(labels.size());
    if (N == 0) throw MalformedCsv("file '" + path + "' has no data rows");

    Dataset ds;
    ds.specs.resize(n);
    for (int i = 0; i < n; ++i) ds.specs[i].name = trim(header[i]);
    ds.rows.resize(N, n);
    for (int r = 0; r < N; ++r)
        for (int c = 0; c < n; ++c) ds.rows(r, c) = values[static_cast<std::size_t>(r) * n + c];
    ds.labels = std::move(labels);
    recompute_stats(ds);
    return ds;
}

std::string to_csv(const Dataset& ds) {
    std::ostringstream out;
    for (const auto& spec : ds.specs) out << spec.name << ',';
    out << "label\n";
    for (int r = 0; r < ds.n_samples(); ++r) {
        for (int c = 0; c < ds.n_features(); ++c) out << format_double(ds.rows(r, c)) << ',';
        out << ds.labels[r] << '\n';
    }
    return out.str();
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << to_csv(ds);
}

Dataset ZScore::apply(const Dataset& ds) const {
    if (static_cast<int>(means.size()) != ds.n_features())
        throw DimensionMismatch("z-score fitted on " + std::to_string(means.size()) +
                                " features, dataset has " + std::to_string(ds.n_features()));
    Dataset out = ds;
    out.rows = apply(ds.rows);
    recompute_stats(out);
    return out;
}

Eigen::MatrixXd ZScore::apply(const Eigen::MatrixXd& rows) const {
    Eigen::MatrixXd out = rows;
    for (int c = 0; c < out.cols(); ++c)
        out.col(c) = (out.col(c).array() - means[c]) / stds[c];
    return out;
}

ZScore zscore_fit(const Dataset& ds) {
    ZScore z;
    const int N = ds.n_samples();
    for (int c = 0; c < ds.n_features(); ++c) {
        const double mean = ds.rows.col(c).mean();
        const double sd = std::sqrt((ds.rows.col(c).array() - mean).square().sum() / N);
        if (sd <= 0.0)
            throw ConstantFeature("feature '" + ds.specs[c].name + "' has zero variance");
        z.means.push_back(mean);
        z.stds.push_back(sd);
    }
    return z;
}

std::pair<Dataset, ZScore> zscore_fit_apply(const Dataset& ds) {
    ZScore z = zscore_fit(ds);
    return {z.apply(ds), std::move(z)};
}

BinStrategy bin_strategy_from_string(const std::string& s) {
    if (s == "equal_frequency") return BinStrategy::EqualFrequency;
    if (s == "equal_width") return BinStrategy::EqualWidth;
    throw ConfigError("unknown bin strategy '" + s + "'");
}

std::string to_string(BinStrategy s) {
    return s == BinStrategy::EqualFrequency ? "equal_frequency" : "equal_width";
}

std::vector<int> Discretizer::bin_counts() const {
    std::vector<int> b;
    b.reserve(edges.size());
    for (const auto& e : edges) b.push_back(static_cast<int>(e.size()) + 1);
    return b;
}

int Discretizer::bin_of(int feature, double value) const {
    // Interior edges only, so out-of-range values clamp to the boundary
    // bins for free: bin = number of edges <= value.
    const auto& e = edges[feature];
    return static_cast<int>(std::upper_bound(e.begin(), e.end(), value) - e.begin());
}

std::vector<std::uint8_t> Discretizer::apply_row(const Eigen::RowVectorXd& row) const {
    if (row.size() != n_features())
        throw DimensionMismatch("discretizer fitted on " + std::to_string(n_features()) +
                                " features, row has " + std::to_string(row.size()));
    std::vector<std::uint8_t> out(edges.size());
    for (int c = 0; c < n_features(); ++c) out[c] = static_cast<std::uint8_t>(bin_of(c, row(c)));
    return out;
}

DiscretizedDataset Discretizer::apply(const Dataset& ds) const {
    if (ds.n_features() != n_features())
        throw DimensionMismatch("discretizer/dataset feature count mismatch");
    DiscretizedDataset dd;
    dd.specs = ds.specs;
    dd.n = ds.n_features();
    dd.b = bin_counts();
    dd.labels = ds.labels;
    dd.bins.resize(static_cast<std::size_t>(ds.n_samples()) * dd.n);
    for (int r = 0; r < ds.n_samples(); ++r)
        for (int c = 0; c < dd.n; ++c)
            dd.bins[static_cast<std::size_t>(r) * dd.n + c] =
                static_cast<std::uint8_t>(bin_of(c, ds.rows(r, c)));
    for (int c = 0; c < dd.n; ++c) dd.specs[c].bin_edges = edges[c];
    return dd;
}

Discretizer discretizer_fit(const Dataset& ds, int bins_per_feature, BinStrategy strategy) {
    if (bins_per_feature < 2) throw ConfigError("bins_per_feature must be >= 2");
    if (bins_per_feature > 250) throw ConfigError("bins_per_feature must be <= 250");
    const int N = ds.n_samples();
    Discretizer d;
    for (int c = 0; c < ds.n_features(); ++c) {
        std::vector<double> vals(N);
        for (int r = 0; r < N; ++r) vals[r] = ds.rows(r, c);
        std::sort(vals.begin(), vals.end());
        d.fit_min.push_back(vals.front());
        d.fit_max.push_back(vals.back());

        std::vector<double> e;
        if (strategy == BinStrategy::EqualFrequency) {
            for (int k = 1; k < bins_per_feature; ++k) {
                const double cut = vals[static_cast<std::size_t>(k) * N / bins_per_feature];
                if (e.empty() || cut > e.back()) {
                    // skip a cut equal to the feature minimum: it would
                    // create an empty leading bin
                    if (cut > vals.front()) e.push_back(cut);
                }
            }
        } else {
            const double lo = vals.front(), hi = vals.back();
            for (int k = 1; k < bins_per_feature; ++k) {
                const double cut = lo + (hi - lo) * k / bins_per_feature;
                if ((e.empty() || cut > e.back()) && cut > lo) e.push_back(cut);
            }
        }
        d.edges.push_back(std::move(e));
    }
    return d;
}

DiscretizedDataset discretize(const Dataset& ds, int bins_per_feature, BinStrategy strategy,
                              Discretizer* fitted) {
    Discretizer d = discretizer_fit(ds, bins_per_feature, strategy);
    DiscretizedDataset dd = d.apply(ds);
    if (fitted) *fitted = std::move(d);
    return dd;
}

std::vector<FoldSplit> stratified_kfold(const Dataset& ds, int k, std::uint64_t seed) {
    if (k < 2) throw BadFoldSpec("k must be >= 2, got " + std::to_string(k));

    std::vector<int> pos, neg;
    for (int i = 0; i < ds.n_samples(); ++i) (ds.labels[i] > 0 ? pos : neg).push_back(i);
    // an absent class imposes nothing; a present one needs >= k members
    for (const auto* cls : {&pos, &neg}) {
        if (!cls->empty() && static_cast<int>(cls->size()) < k)
            throw BadFoldSpec("a class has " + std::to_string(cls->size()) +
                              " members, fewer than k=" + std::to_string(k));
    }

    Rng rng(derive_seed(seed, "kfold"));
    rng.shuffle(pos);
    rng.shuffle(neg);

    std::vector<FoldSplit> folds(k);
    std::vector<std::vector<int>> members(k);
    for (std::size_t i = 0; i < pos.size(); ++i) members[i % k].push_back(pos[i]);
    for (std::size_t i = 0; i < neg.size(); ++i) members[i % k].push_back(neg[i]);
    for (auto& m : members) std::sort(m.begin(), m.end());

    for (int f = 0; f < k; ++f) {
        folds[f].validation = members[f];
        for (int g = 0; g < k; ++g) {
            if (g == f)
                continue;
            folds[f].train.insert(folds[f].train.end(), members[g].begin(), members[g].end());
        }
        std::sort(folds[f].train.begin(), folds[f].train.end());
    }
    return folds;
}

Eigen::MatrixXd ConstantFilter::apply(const Eigen::MatrixXd& rows) const {
    Eigen::MatrixXd out(rows.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = rows.col(kept[i]);
    return out;
}

std::pair<Dataset, ConstantFilter> drop_constant_features(const Dataset& ds) {
    ConstantFilter filter;
    for (int c = 0; c < ds.n_features(); ++c) {
        const double mean = ds.rows.col(c).mean();
        const double var = (ds.rows.col(c).array() - mean).square().sum();
        if (var > 0.0)
            filter.kept.push_back(c);
        else
            filter.dropped.push_back(ds.specs[c].name);
    }
    if (filter.dropped.empty()) return {ds, filter};

    Dataset out;
    out.labels = ds.labels;
    out.rows = filter.apply(ds.rows);
    for (int c : filter.kept) out.specs.push_back(ds.specs[c]);
    recompute_stats(out);
    return {out, filter};
}

}  // namespace elmrules
