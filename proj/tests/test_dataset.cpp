#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <set>

#include "elmrules/dataset.hpp"
#include "elmrules/rng.hpp"

using namespace elmrules;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& content) {
        static int counter = 0;
        path = "elmrules_test_" + std::to_string(counter++) + ".csv";
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

Dataset random_dataset(int n_samples, int n_features, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd rows(n_samples, n_features);
    std::vector<int> labels(n_samples);
    for (int r = 0; r < n_samples; ++r) {
        for (int c = 0; c < n_features; ++c) rows(r, c) = rng.uniform(-3.0, 7.0);
        labels[r] = rng.uniform01() < 0.5 ? -1 : 1;
    }
    std::vector<FeatureSpec> specs(n_features);
    for (int c = 0; c < n_features; ++c) specs[c].name = "f" + std::to_string(c);
    return make_dataset(specs, rows, labels);
}

}  // namespace

TEST_CASE("load_csv parses a small file") {
    TempFile f("a,b,label\n1,2,1\n3,4,-1\n5,6,1\n");
    Dataset ds = load_csv(f.path);
    CHECK(ds.n_samples() == 3);
    CHECK(ds.n_features() == 2);
    CHECK(ds.labels == std::vector<int>{1, -1, 1});
    CHECK(ds.specs[0].name == "a");
    CHECK(ds.rows(1, 1) == doctest::Approx(4.0));
}

TEST_CASE("load_csv rejects bad input") {
    SUBCASE("label outside -1/1") {
        TempFile f("a,label\n1,0\n");
        CHECK_THROWS_AS(load_csv(f.path), InvalidLabel);
    }
    SUBCASE("ragged row names the line") {
        TempFile f("a,b,label\n1,2,1\n3,1\n");
        try {
            load_csv(f.path);
            FAIL("expected RaggedRow");
        } catch (const RaggedRow& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    SUBCASE("empty file") {
        TempFile f("");
        CHECK_THROWS_AS(load_csv(f.path), MalformedCsv);
    }
    SUBCASE("non-numeric cell") {
        TempFile f("a,label\nfoo,1\n");
        CHECK_THROWS_AS(load_csv(f.path), MalformedCsv);
    }
    SUBCASE("header only") {
        TempFile f("a,label\n");
        CHECK_THROWS_AS(load_csv(f.path), MalformedCsv);
    }
}

TEST_CASE("save/load round trip is faithful") {
    Dataset ds = random_dataset(23, 4, 99);
    TempFile f("");
    save_csv(ds, f.path);
    Dataset back = load_csv(f.path);
    CHECK((back.rows - ds.rows).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.labels == ds.labels);
}

TEST_CASE("z-score arithmetic") {
    ZScore z{{5.0}, {2.0}};
    Eigen::MatrixXd rows(2, 1);
    rows << 5.0, 7.0;
    Eigen::MatrixXd out = z.apply(rows);
    CHECK(out(0, 0) == doctest::Approx(0.0));
    CHECK(out(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("z-score fit standardizes and round trips") {
    Dataset ds = random_dataset(200, 3, 7);
    auto [std_ds, z] = zscore_fit_apply(ds);

    for (int c = 0; c < 3; ++c) {
        CHECK(std::abs(std_ds.rows.col(c).mean()) <= 1e-10);
        const double sd = std::sqrt(
            (std_ds.rows.col(c).array() - std_ds.rows.col(c).mean()).square().sum() / 200.0);
        CHECK(sd == doctest::Approx(1.0).epsilon(1e-10));
    }
    for (int r = 0; r < ds.n_samples(); ++r)
        for (int c = 0; c < 3; ++c) {
            const double back = z.inverse(c, std_ds.rows(r, c));
            CHECK(back == doctest::Approx(ds.rows(r, c)).epsilon(1e-12));
        }
}

TEST_CASE("z-score rejects constant features") {
    Eigen::MatrixXd rows(3, 1);
    rows << 2.0, 2.0, 2.0;
    Dataset ds = make_dataset({FeatureSpec{"c"}}, rows, {1, -1, 1});
    CHECK_THROWS_AS(zscore_fit(ds), ConstantFeature);
}

TEST_CASE("equal-frequency discretization matches thirds") {
    Eigen::MatrixXd rows(6, 1);
    rows << 1, 2, 3, 4, 5, 6;
    Dataset ds = make_dataset({FeatureSpec{"v"}}, rows, {1, 1, 1, -1, -1, -1});
    Discretizer d;
    DiscretizedDataset dd = discretize(ds, 3, BinStrategy::EqualFrequency, &d);
    CHECK(dd.b == std::vector<int>{3});
    std::vector<int> got;
    for (int r = 0; r < 6; ++r) got.push_back(dd.bin(r, 0));
    CHECK(got == std::vector<int>{0, 0, 1, 1, 2, 2});

    SUBCASE("apply-time clamping") {
        Eigen::RowVectorXd high(1), low(1);
        high << 100.0;
        low << -100.0;
        CHECK(d.apply_row(high)[0] == 2);
        CHECK(d.apply_row(low)[0] == 0);
    }
}

TEST_CASE("constant feature discretizes to one bin") {
    Eigen::MatrixXd rows(4, 1);
    rows << 3, 3, 3, 3;
    Dataset ds = make_dataset({FeatureSpec{"v"}}, rows, {1, -1, 1, -1});
    DiscretizedDataset dd = discretize(ds, 4, BinStrategy::EqualFrequency);
    CHECK(dd.b == std::vector<int>{1});
    for (int r = 0; r < 4; ++r) CHECK(dd.bin(r, 0) == 0);
}

TEST_CASE("equal-frequency bin populations differ by at most one on distinct values") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        Rng rng(seed);
        const int n = 40 + static_cast<int>(rng.index(30));
        Eigen::MatrixXd rows(n, 1);
        for (int r = 0; r < n; ++r) rows(r, 0) = rng.uniform01() + 10.0 * r;  // strictly increasing
        Dataset ds = make_dataset({FeatureSpec{"v"}}, rows, std::vector<int>(n, 1));
        for (int bins : {2, 3, 5, 7}) {
            DiscretizedDataset dd = discretize(ds, bins, BinStrategy::EqualFrequency);
            std::vector<int> pop(bins, 0);
            for (int r = 0; r < n; ++r) pop[dd.bin(r, 0)]++;
            const auto [lo, hi] = std::minmax_element(pop.begin(), pop.end());
            CHECK(*hi - *lo <= 1);
        }
    }
}

TEST_CASE("equal-width bins cover the range") {
    Eigen::MatrixXd rows(5, 1);
    rows << 0.0, 1.0, 2.0, 3.0, 4.0;
    Dataset ds = make_dataset({FeatureSpec{"v"}}, rows, {1, 1, 1, 1, -1});
    Discretizer d;
    DiscretizedDataset dd = discretize(ds, 4, BinStrategy::EqualWidth, &d);
    CHECK(dd.b == std::vector<int>{4});
    CHECK(dd.bin(0, 0) == 0);
    CHECK(dd.bin(4, 0) == 3);
}

TEST_CASE("stratified k-fold keeps proportions and partitions indices") {
    Rng rng(4);
    Eigen::MatrixXd rows(100, 1);
    std::vector<int> labels(100);
    for (int r = 0; r < 100; ++r) {
        rows(r, 0) = rng.uniform01();
        labels[r] = r < 50 ? 1 : -1;
    }
    Dataset ds = make_dataset({FeatureSpec{"v"}}, rows, labels);

    auto folds = stratified_kfold(ds, 5, 11);
    REQUIRE(folds.size() == 5);
    std::set<int> all;
    for (const auto& f : folds) {
        CHECK(f.validation.size() == 20);
        int pos = 0;
        for (int i : f.validation) {
            CHECK(all.insert(i).second);  // pairwise disjoint
            if (ds.labels[i] > 0) ++pos;
        }
        CHECK(pos == 10);
        CHECK(f.train.size() == 80);
    }
    CHECK(all.size() == 100);  // union is the full index set

    auto again = stratified_kfold(ds, 5, 11);
    for (int f = 0; f < 5; ++f) {
        CHECK(again[f].validation == folds[f].validation);
        CHECK(again[f].train == folds[f].train);
    }
}

TEST_CASE("k-fold contract violations") {
    Dataset ds = random_dataset(20, 2, 5);
    CHECK_THROWS_AS(stratified_kfold(ds, 1, 0), BadFoldSpec);

    Eigen::MatrixXd rows(8, 1);
    rows.setRandom();
    Dataset small = make_dataset({FeatureSpec{"v"}}, rows, {1, 1, 1, 1, 1, -1, -1, -1});
    CHECK_THROWS_AS(stratified_kfold(small, 5, 0), BadFoldSpec);
}

TEST_CASE("drop_constant_features keeps the informative columns") {
    Eigen::MatrixXd rows(4, 3);
    rows << 1, 7, 0, 2, 7, 1, 3, 7, 0, 4, 7, 1;
    Dataset ds = make_dataset({FeatureSpec{"a"}, FeatureSpec{"b"}, FeatureSpec{"c"}}, rows,
                              {1, -1, 1, -1});
    auto [out, filter] = drop_constant_features(ds);
    CHECK(out.n_features() == 2);
    CHECK(filter.dropped == std::vector<std::string>{"b"});
    CHECK(filter.kept == std::vector<int>{0, 2});
    Eigen::MatrixXd applied = filter.apply(ds.rows);
    CHECK(applied.cols() == 2);
    CHECK(applied(2, 0) == doctest::Approx(3.0));
}
