#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "elmrules/dataset.hpp"

namespace elmrules {

// Classical (second-order) machine model parameters, per-unit.
struct MachineParams {
    double inertia = 0.0;     // M, s^2/rad on the system base
    double damping = 0.0;     // D
    double emf = 1.0;         // internal EMF magnitude E
    double mech_power = 0.0;  // Pm
};

// Reduced admittances among machine internal nodes for one network phase.
struct PhasePair {
    Eigen::MatrixXd conductance;  // G
    Eigen::MatrixXd susceptance;  // B
};

struct ReducedNetwork {
    PhasePair prefault;
    PhasePair fault_on;
    PhasePair postfault;

    void validate(int n_machines) const;  // square, symmetric, right size
};

struct Scenario {
    double t0 = 0.1;    // fault inception (s)
    double tcl = 0.2;   // clearing time (s)
    double t_end = 5.0;
    double dt = 1e-3;
    double cycle = 0.02;  // 50 Hz
    double load_scale = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Uniform-grid rotor trajectory plus the COI series. mech_power/emf hold
// the per-machine values the run actually used (after load scaling and
// slack rebalancing), which the feature extractor reads back.
struct Trajectory {
    std::vector<double> time;
    Eigen::MatrixXd angles;  // T x M, rad
    Eigen::MatrixXd speeds;  // T x M, rad/s deviation from synchronous
    std::vector<double> coi_angle;
    std::vector<double> coi_speed;
    std::vector<double> mech_power;
    std::vector<double> emf;

    int n_machines() const { return static_cast<int>(angles.cols()); }
    int n_steps() const { return static_cast<int>(angles.rows()); }
    int index_of(double t) const;  // nearest grid point
};

// Pe_i = sum_j E_i E_j (G_ij cos(d_i - d_j) + B_ij sin(d_i - d_j)).
Eigen::VectorXd electrical_power(const PhasePair& phase, const Eigen::VectorXd& emf,
                                 const Eigen::VectorXd& delta);

// Fixed-step RK4 over the three network phases, starting from the
// prefault equilibrium (damped Newton with machine 1 as angle reference
// and slack: its Pm absorbs the prefault mismatch).
Trajectory simulate(const std::vector<MachineParams>& machines, const ReducedNetwork& net,
                    const Scenario& scn);

// Feature catalog over the post-clearing sampling instants
// t_cl + {3,6,9} cycles, nearest-grid-point sampling.
struct FeatureCatalog {
    double mean_mech_power = 0.0;   // prefault Pm average
    double mean_accel_power = 0.0;  // Pm - Pe average at fault inception
    double coi_angle_3c = 0.0;      // COI-relative angle of the extreme machine
    double coi_speed_3c = 0.0;      // its COI-relative speed
    double coi_angle_6c = 0.0;
    double coi_speed_6c = 0.0;
    double coi_angle_9c = 0.0;
    double coi_speed_9c = 0.0;
    double max_angle_diff_3c = 0.0;  // widest pairwise rotor-angle gap
    double max_angle_diff_6c = 0.0;
    double max_angle_diff_9c = 0.0;
    double max_kinetic_tcl = 0.0;      // max over machines of 0.5 M w^2 at t_cl
    double kinetic_max_angle_3c = 0.0; // kinetic energy of the max-angle machine
};

FeatureCatalog coi_features(const Trajectory& traj, const std::vector<MachineParams>& machines,
                            const ReducedNetwork& net, const Scenario& scn);

// Which catalog subset a generated dataset exposes, mirroring the two
// case-study feature lists (7 and 11 inputs) plus the full catalog.
enum class FeatureSet { NewEngland7, Hebei11, Full13 };

FeatureSet feature_set_from_string(const std::string& s);
std::string to_string(FeatureSet fs);
std::vector<std::string> feature_names(FeatureSet fs);
std::vector<double> select_features(const FeatureCatalog& c, FeatureSet fs);

// Unstable (-1) iff the widest pairwise rotor-angle gap ever exceeds
// 360 degrees, strictly.
int stability_label(const Trajectory& traj);

struct GeneratorConfig {
    int n_samples = 2000;
    std::pair<double, double> load_range{0.75, 1.30};
    std::pair<double, double> tcl_range{0.10, 0.30};
    double pm_jitter = 0.10;  // +/- fraction applied per machine
    FeatureSet feature_set = FeatureSet::NewEngland7;
    std::uint64_t seed = 0;
};

struct GenerationStats {
    int attempts = 0;
    int rejected = 0;
};

// Monte-Carlo scenario sampling: uniform load level and clearing time,
// per-machine mechanical power jitter; scenarios without a prefault
// equilibrium are redrawn and counted.
Dataset generate_dataset(const std::vector<MachineParams>& machines, const ReducedNetwork& net,
                         const Scenario& base, const GeneratorConfig& cfg,
                         GenerationStats* stats = nullptr);

struct SwingFixture {
    std::vector<MachineParams> machines;
    ReducedNetwork network;
    Scenario scenario;
    GeneratorConfig generator;
};

SwingFixture load_swing_fixture(const std::string& path);

}  // namespace elmrules
