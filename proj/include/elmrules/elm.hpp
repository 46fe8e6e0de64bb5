#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elmrules/dataset.hpp"

namespace elmrules {

enum class Activation { Sigmoid, Tanh };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

// Extreme learning machine: random hidden layer, least-squares output
// weights. Immutable after training.
struct ElmModel {
    Eigen::MatrixXd input_weights;   // L x n, hidden node weight vectors w_i as rows
    Eigen::VectorXd thresholds;      // L, hidden node offsets d_i
    Eigen::MatrixXd output_weights;  // L x m (m = 1 for the binary stability label)
    Activation activation = Activation::Sigmoid;
    std::uint64_t seed = 0;

    int hidden_nodes() const { return static_cast<int>(input_weights.rows()); }
    int inputs() const { return static_cast<int>(input_weights.cols()); }
    int outputs() const { return static_cast<int>(output_weights.cols()); }
};

// H[j][i] = G(w_i . x_j + d_i) for every sample row x_j.
Eigen::MatrixXd hidden_matrix(const ElmModel& model, const Eigen::MatrixXd& X);

// Minimal-norm least-squares solution of H beta = Y via SVD; singular
// values below rank_tol * sigma_max are treated as zero.
Eigen::MatrixXd min_norm_lstsq(const Eigen::MatrixXd& H, const Eigen::MatrixXd& Y,
                               double rank_tol = 1e-10);

// Hidden parameters drawn i.i.d. uniform on [-1, 1] from the seeded
// generator, then output weights solved against the +/-1 label targets.
ElmModel elm_train(const Dataset& ds, int hidden_nodes, Activation activation,
                   std::uint64_t seed, double rank_tol = 1e-10);

// Raw network output, used for ROC ranking.
double elm_decision(const ElmModel& model, const Eigen::RowVectorXd& x);
Eigen::VectorXd elm_decision_batch(const ElmModel& model, const Eigen::MatrixXd& X);

// Sign thresholding; an exact zero is flagged unstable (-1).
int elm_predict(const ElmModel& model, const Eigen::RowVectorXd& x);
std::vector<int> elm_predict_batch(const ElmModel& model, const Eigen::MatrixXd& X);

std::string elm_to_json(const ElmModel& model, const std::string& preprocessing_ref = "");
ElmModel elm_from_json(const std::string& text, std::string* preprocessing_ref = nullptr);

}  // namespace elmrules
