#include "elmrules/elm.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "elmrules/rng.hpp"

namespace elmrules {

namespace {

double activate(Activation a, double z) {
    return a == Activation::Sigmoid ? 1.0 / (1.0 + std::exp(-z)) : std::tanh(z);
}

}  // namespace

Activation activation_from_string(const std::string& s) {
    if (s == "sigmoid") return Activation::Sigmoid;
    if (s == "tanh") return Activation::Tanh;
    throw ConfigError("unknown activation '" + s + "'");
}

std::string to_string(Activation a) { return a == Activation::Sigmoid ? "sigmoid" : "tanh"; }

Eigen::MatrixXd hidden_matrix(const ElmModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.inputs())
        throw DimensionMismatch("model expects " + std::to_string(model.inputs()) +
                                " inputs, got " + std::to_string(X.cols()));
    Eigen::MatrixXd H = X * model.input_weights.transpose();
    H.rowwise() += model.thresholds.transpose();
    for (Eigen::Index r = 0; r < H.rows(); ++r)
        for (Eigen::Index c = 0; c < H.cols(); ++c) H(r, c) = activate(model.activation, H(r, c));
    return H;
}

Eigen::MatrixXd min_norm_lstsq(const Eigen::MatrixXd& H, const Eigen::MatrixXd& Y,
                               double rank_tol) {
    if (H.rows() != Y.rows()) throw DimensionMismatch("H and Y row counts differ");
    if (!H.allFinite() || !Y.allFinite()) throw NonFiniteInput("non-finite entries in H or Y");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? rank_tol * sv(0) : 0.0;

    // beta = V * diag(1/sigma_i) * U^T * Y, dropping directions below the
    // cutoff; this is the pseudoinverse, hence the minimal-norm minimizer.
    Eigen::MatrixXd UtY = svd.matrixU().transpose() * Y;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff)
            UtY.row(i) /= sv(i);
        else
            UtY.row(i).setZero();
    }
    return svd.matrixV() * UtY;
}

ElmModel elm_train(const Dataset& ds, int hidden_nodes, Activation activation,
                   std::uint64_t seed, double rank_tol) {
    if (hidden_nodes < 1) throw ConfigError("hidden_nodes must be >= 1");
    if (ds.n_samples() < 1) throw Error("cannot train on an empty dataset");

    const int n = ds.n_features();
    ElmModel model;
    model.activation = activation;
    model.seed = seed;
    model.input_weights.resize(hidden_nodes, n);
    model.thresholds.resize(hidden_nodes);

    Rng rng(seed);
    for (int i = 0; i < hidden_nodes; ++i) {
        for (int j = 0; j < n; ++j) model.input_weights(i, j) = rng.uniform(-1.0, 1.0);
        model.thresholds(i) = rng.uniform(-1.0, 1.0);
    }

    Eigen::MatrixXd targets(ds.n_samples(), 1);
    for (int r = 0; r < ds.n_samples(); ++r) targets(r, 0) = static_cast<double>(ds.labels[r]);

    const Eigen::MatrixXd H = hidden_matrix(model, ds.rows);
    model.output_weights = min_norm_lstsq(H, targets, rank_tol);
    return model;
}

double elm_decision(const ElmModel& model, const Eigen::RowVectorXd& x) {
    if (x.size() != model.inputs())
        throw DimensionMismatch("model expects " + std::to_string(model.inputs()) +
                                " inputs, got " + std::to_string(x.size()));
    double score = 0.0;
    for (int i = 0; i < model.hidden_nodes(); ++i) {
        const double z = model.input_weights.row(i).dot(x) + model.thresholds(i);
        score += model.output_weights(i, 0) * activate(model.activation, z);
    }
    return score;
}

Eigen::VectorXd elm_decision_batch(const ElmModel& model, const Eigen::MatrixXd& X) {
    return hidden_matrix(model, X) * model.output_weights.col(0);
}

int elm_predict(const ElmModel& model, const Eigen::RowVectorXd& x) {
    return elm_decision(model, x) > 0.0 ? 1 : -1;
}

std::vector<int> elm_predict_batch(const ElmModel& model, const Eigen::MatrixXd& X) {
    const Eigen::VectorXd scores = elm_decision_batch(model, X);
    std::vector<int> labels(scores.size());
    for (Eigen::Index i = 0; i < scores.size(); ++i) labels[i] = scores(i) > 0.0 ? 1 : -1;
    return labels;
}

std::string elm_to_json(const ElmModel& model, const std::string& preprocessing_ref) {
    nlohmann::ordered_json j;
    j["L"] = model.hidden_nodes();
    j["activation"] = to_string(model.activation);
    j["seed"] = model.seed;
    auto matrix_rows = [](const Eigen::MatrixXd& m) {
        std::vector<std::vector<double>> rows(m.rows());
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            rows[r].resize(m.cols());
            for (Eigen::Index c = 0; c < m.cols(); ++c) rows[r][c] = m(r, c);
        }
        return rows;
    };
    j["W"] = matrix_rows(model.input_weights);
    j["d"] = std::vector<double>(model.thresholds.data(),
                                 model.thresholds.data() + model.thresholds.size());
    j["beta"] = matrix_rows(model.output_weights);
    if (!preprocessing_ref.empty()) j["preprocessing"] = preprocessing_ref;
    return j.dump(2);
}

ElmModel elm_from_json(const std::string& text, std::string* preprocessing_ref) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("model JSON parse failure: ") + e.what());
    }
    ElmModel model;
    model.activation = activation_from_string(j.at("activation").get<std::string>());
    model.seed = j.at("seed").get<std::uint64_t>();
    const auto& W = j.at("W");
    const auto& beta = j.at("beta");
    const auto& d = j.at("d");
    const int L = static_cast<int>(W.size());
    if (L == 0 || L != j.at("L").get<int>()) throw Error("model JSON: inconsistent L");
    const int n = static_cast<int>(W.at(0).size());
    const int m = static_cast<int>(beta.at(0).size());
    model.input_weights.resize(L, n);
    model.thresholds.resize(L);
    model.output_weights.resize(L, m);
    for (int r = 0; r < L; ++r) {
        for (int c = 0; c < n; ++c) model.input_weights(r, c) = W.at(r).at(c).get<double>();
        for (int c = 0; c < m; ++c) model.output_weights(r, c) = beta.at(r).at(c).get<double>();
        model.thresholds(r) = d.at(r).get<double>();
    }
    if (preprocessing_ref)
        *preprocessing_ref = j.value("preprocessing", std::string());
    return model;
}

}  // namespace elmrules
