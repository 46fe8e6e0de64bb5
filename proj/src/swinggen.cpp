#include "elmrules/swinggen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "elmrules/rng.hpp"

namespace elmrules {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_phase(const PhasePair& p, int n, const char* name) {
    for (const Eigen::MatrixXd* m : {&p.conductance, &p.susceptance}) {
        if (m->rows() != n || m->cols() != n)
            throw ConfigError(std::string(name) + " matrices must be " + std::to_string(n) + "x" +
                              std::to_string(n));
        if ((*m - m->transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw ConfigError(std::string(name) + " matrices must be symmetric");
    }
}

// Jacobian of Pe w.r.t. the rotor angles.
Eigen::MatrixXd power_jacobian(const PhasePair& phase, const Eigen::VectorXd& emf,
                               const Eigen::VectorXd& delta) {
    const int n = static_cast<int>(delta.size());
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = delta(i) - delta(j);
            const double coupling =
                emf(i) * emf(j) *
                (-phase.conductance(i, j) * std::sin(d) + phase.susceptance(i, j) * std::cos(d));
            jac(i, j) = -coupling;
            jac(i, i) += coupling;
        }
    }
    return jac;
}

// Damped Newton on Pm_i = Pe_i(delta) for machines 2..n with delta_1 = 0.
// Machine 1 is the slack: the caller overwrites its Pm with Pe_1(delta*).
Eigen::VectorXd solve_equilibrium(const PhasePair& phase, const Eigen::VectorXd& emf,
                                  const Eigen::VectorXd& pm) {
    const int n = static_cast<int>(emf.size());
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
    if (n == 1) return delta;

    auto residual = [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
        const Eigen::VectorXd pe = electrical_power(phase, emf, d);
        return (pm - pe).tail(n - 1);
    };

    Eigen::VectorXd r = residual(delta);
    for (int iter = 0; iter < 200; ++iter) {
        if (r.cwiseAbs().maxCoeff() < 1e-11) return delta;
        const Eigen::MatrixXd jac_full = power_jacobian(phase, emf, delta);
        // residual rows 2..n, unknowns delta_2..delta_n
        const Eigen::MatrixXd jac = -jac_full.bottomRightCorner(n - 1, n - 1);
        const Eigen::VectorXd step = jac.fullPivLu().solve(-r);
        if (!step.allFinite()) throw NoEquilibrium("singular Jacobian in equilibrium search");

        double alpha = 1.0;
        const double r_norm = r.norm();
        for (int halving = 0; halving < 40; ++halving) {
            Eigen::VectorXd trial = delta;
            trial.tail(n - 1) += alpha * step;
            Eigen::VectorXd r_trial = residual(trial);
            if (r_trial.norm() < r_norm) {
                delta = std::move(trial);
                r = std::move(r_trial);
                break;
            }
            alpha *= 0.5;
            if (halving == 39) throw NoEquilibrium("line search stalled in equilibrium search");
        }
    }
    throw NoEquilibrium("Newton iteration did not converge within 200 steps");
}

}  // namespace

void ReducedNetwork::validate(int n_machines) const {
    check_phase(prefault, n_machines, "prefault");
    check_phase(fault_on, n_machines, "fault_on");
    check_phase(postfault, n_machines, "postfault");
}

void Scenario::validate() const {
    if (!(0.0 <= t0 && t0 <= tcl && tcl <= t_end))
        throw ConfigError("scenario requires 0 <= t0 <= tcl <= t_end");
    if (dt <= 0.0) throw ConfigError("scenario requires dt > 0");
    if (cycle <= 0.0) throw ConfigError("scenario requires cycle > 0");
    if (load_scale <= 0.0) throw ConfigError("scenario requires load_scale > 0");
}

int Trajectory::index_of(double t) const {
    if (time.empty()) throw Error("empty trajectory");
    const double dt = time.size() > 1 ? time[1] - time[0] : 1.0;
    const int idx = static_cast<int>(std::lround(t / dt));
    return std::clamp(idx, 0, static_cast<int>(time.size()) - 1);
}

Eigen::VectorXd electrical_power(const PhasePair& phase, const Eigen::VectorXd& emf,
                                 const Eigen::VectorXd& delta) {
    const int n = static_cast<int>(delta.size());
    Eigen::VectorXd pe(n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const double d = delta(i) - delta(j);
            acc += emf(i) * emf(j) *
                   (phase.conductance(i, j) * std::cos(d) + phase.susceptance(i, j) * std::sin(d));
        }
        pe(i) = acc;
    }
    return pe;
}

Trajectory simulate(const std::vector<MachineParams>& machines, const ReducedNetwork& net,
                    const Scenario& scn) {
    const int n = static_cast<int>(machines.size());
    if (n < 1) throw ConfigError("at least one machine required");
    net.validate(n);
    scn.validate();

    Eigen::VectorXd inertia(n), damping(n), emf(n), pm(n);
    for (int i = 0; i < n; ++i) {
        if (machines[i].inertia <= 0.0) throw ConfigError("machine inertia must be positive");
        if (machines[i].damping < 0.0) throw ConfigError("machine damping must be >= 0");
        if (machines[i].emf <= 0.0) throw ConfigError("machine EMF must be positive");
        inertia(i) = machines[i].inertia;
        damping(i) = machines[i].damping;
        emf(i) = machines[i].emf * scn.load_scale;
        pm(i) = machines[i].mech_power * scn.load_scale;
    }

    const Eigen::VectorXd delta0 = solve_equilibrium(net.prefault, emf, pm);
    // slack absorption keeps the prefault state an exact equilibrium
    pm(0) = electrical_power(net.prefault, emf, delta0)(0);

    const int steps = static_cast<int>(std::lround(scn.t_end / scn.dt));
    Trajectory traj;
    traj.time.resize(steps + 1);
    traj.angles.resize(steps + 1, n);
    traj.speeds.resize(steps + 1, n);
    traj.coi_angle.resize(steps + 1);
    traj.coi_speed.resize(steps + 1);
    traj.mech_power.assign(pm.data(), pm.data() + n);
    traj.emf.assign(emf.data(), emf.data() + n);

    const double total_inertia = inertia.sum();
    auto record = [&](int k, double t, const Eigen::VectorXd& delta, const Eigen::VectorXd& omega) {
        traj.time[k] = t;
        traj.angles.row(k) = delta.transpose();
        traj.speeds.row(k) = omega.transpose();
        traj.coi_angle[k] = inertia.dot(delta) / total_inertia;
        traj.coi_speed[k] = inertia.dot(omega) / total_inertia;
    };

    auto phase_at = [&](double t) -> const PhasePair& {
        if (t < scn.t0) return net.prefault;
        if (t < scn.tcl) return net.fault_on;
        return net.postfault;
    };

    Eigen::VectorXd delta = delta0;
    Eigen::VectorXd omega = Eigen::VectorXd::Zero(n);
    record(0, 0.0, delta, omega);

    Eigen::VectorXd kd1(n), kd2(n), kd3(n), kd4(n), kw1(n), kw2(n), kw3(n), kw4(n);
    auto accel = [&](const PhasePair& phase, const Eigen::VectorXd& d,
                     const Eigen::VectorXd& w) -> Eigen::VectorXd {
        const Eigen::VectorXd pe = electrical_power(phase, emf, d);
        return (pm - pe - damping.cwiseProduct(w)).cwiseQuotient(inertia);
    };

    const double h = scn.dt;
    for (int k = 0; k < steps; ++k) {
        const double t = k * h;
        // the network phase is frozen across the step; switching instants
        // aligned to the grid integrate each phase exactly
        const PhasePair& phase = phase_at(t);

        kd1 = omega;
        kw1 = accel(phase, delta, omega);
        kd2 = omega + 0.5 * h * kw1;
        kw2 = accel(phase, delta + 0.5 * h * kd1, omega + 0.5 * h * kw1);
        kd3 = omega + 0.5 * h * kw2;
        kw3 = accel(phase, delta + 0.5 * h * kd2, omega + 0.5 * h * kw2);
        kd4 = omega + h * kw3;
        kw4 = accel(phase, delta + h * kd3, omega + h * kw3);

        delta += h / 6.0 * (kd1 + 2.0 * kd2 + 2.0 * kd3 + kd4);
        omega += h / 6.0 * (kw1 + 2.0 * kw2 + 2.0 * kw3 + kw4);
        record(k + 1, (k + 1) * h, delta, omega);
    }
    return traj;
}

FeatureCatalog coi_features(const Trajectory& traj, const std::vector<MachineParams>& machines,
                            const ReducedNetwork& net, const Scenario& scn) {
    const int n = traj.n_machines();
    if (static_cast<int>(machines.size()) != n)
        throw DimensionMismatch("machine count does not match trajectory");
    const double t9 = scn.tcl + 9.0 * scn.cycle;
    if (traj.time.back() + 0.5 * scn.dt < t9)
        throw HorizonTooShort("trajectory ends before t_cl + 9 cycles");

    Eigen::VectorXd inertia(n);
    for (int i = 0; i < n; ++i) inertia(i) = machines[i].inertia;

    FeatureCatalog cat;
    cat.mean_mech_power =
        std::accumulate(traj.mech_power.begin(), traj.mech_power.end(), 0.0) / n;

    {
        const int k0 = traj.index_of(scn.t0);
        const Eigen::VectorXd delta = traj.angles.row(k0).transpose();
        const Eigen::VectorXd emf =
            Eigen::Map<const Eigen::VectorXd>(traj.emf.data(), n);
        const Eigen::VectorXd pe = electrical_power(net.fault_on, emf, delta);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += traj.mech_power[i] - pe(i);
        cat.mean_accel_power = acc / n;
    }

    // COI-relative angle/speed of the machine farthest from the COI, and
    // the widest pairwise angle gap, at one sampling instant.
    auto at_instant = [&](double t, double* angle, double* speed, double* spread) {
        const int k = traj.index_of(t);
        const double coi_a = traj.coi_angle[k];
        const double coi_w = traj.coi_speed[k];
        int extreme = 0;
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
            const double rel = std::abs(traj.angles(k, i) - coi_a);
            if (rel > best) {
                best = rel;
                extreme = i;
            }
        }
        *angle = traj.angles(k, extreme) - coi_a;
        *speed = traj.speeds(k, extreme) - coi_w;
        *spread = traj.angles.row(k).maxCoeff() - traj.angles.row(k).minCoeff();
    };
    at_instant(scn.tcl + 3.0 * scn.cycle, &cat.coi_angle_3c, &cat.coi_speed_3c,
               &cat.max_angle_diff_3c);
    at_instant(scn.tcl + 6.0 * scn.cycle, &cat.coi_angle_6c, &cat.coi_speed_6c,
               &cat.max_angle_diff_6c);
    at_instant(scn.tcl + 9.0 * scn.cycle, &cat.coi_angle_9c, &cat.coi_speed_9c,
               &cat.max_angle_diff_9c);

    {
        const int k = traj.index_of(scn.tcl);
        double best = 0.0;
        for (int i = 0; i < n; ++i)
            best = std::max(best, 0.5 * inertia(i) * traj.speeds(k, i) * traj.speeds(k, i));
        cat.max_kinetic_tcl = best;
    }
    {
        const int k = traj.index_of(scn.tcl + 3.0 * scn.cycle);
        int arg = 0;
        for (int i = 1; i < n; ++i)
            if (traj.angles(k, i) > traj.angles(k, arg)) arg = i;
        cat.kinetic_max_angle_3c = 0.5 * inertia(arg) * traj.speeds(k, arg) * traj.speeds(k, arg);
    }
    return cat;
}

FeatureSet feature_set_from_string(const std::string& s) {
    if (s == "newengland7") return FeatureSet::NewEngland7;
    if (s == "hebei11") return FeatureSet::Hebei11;
    if (s == "full13") return FeatureSet::Full13;
    throw ConfigError("unknown feature set '" + s + "'");
}

std::string to_string(FeatureSet fs) {
    switch (fs) {
        case FeatureSet::NewEngland7: return "newengland7";
        case FeatureSet::Hebei11: return "hebei11";
        default: return "full13";
    }
}

std::vector<std::string> feature_names(FeatureSet fs) {
    switch (fs) {
        case FeatureSet::NewEngland7:
            return {"Tz1", "Tz2", "Tz3", "Tz4", "Tz5", "Tz6", "Tz7"};
        case FeatureSet::Hebei11:
            return {"Tz1", "Tz2", "Tz3", "Tz4", "Tz5", "Tz6", "Tz7", "Tz8", "Tz9", "Tz10", "Tz11"};
        default:
            return {"mean_pm",          "mean_pacc",        "coi_angle_3c",  "coi_speed_3c",
                    "coi_angle_6c",     "coi_speed_6c",     "coi_angle_9c",  "coi_speed_9c",
                    "max_angle_diff_3c", "max_angle_diff_6c", "max_angle_diff_9c",
                    "max_ke_tcl",       "ke_max_angle_3c"};
    }
}

std::vector<double> select_features(const FeatureCatalog& c, FeatureSet fs) {
    switch (fs) {
        case FeatureSet::NewEngland7:
            return {c.mean_mech_power, c.mean_accel_power, c.coi_speed_3c, c.coi_angle_6c,
                    c.coi_speed_6c,    c.coi_angle_9c,     c.coi_speed_9c};
        case FeatureSet::Hebei11:
            return {c.mean_accel_power, c.max_kinetic_tcl,   c.coi_angle_3c,
                    c.max_angle_diff_3c, c.kinetic_max_angle_3c, c.coi_angle_6c,
                    c.max_angle_diff_6c, c.coi_speed_6c,     c.coi_angle_9c,
                    c.max_angle_diff_9c, c.coi_speed_9c};
        default:
            return {c.mean_mech_power,  c.mean_accel_power, c.coi_angle_3c,  c.coi_speed_3c,
                    c.coi_angle_6c,     c.coi_speed_6c,     c.coi_angle_9c,  c.coi_speed_9c,
                    c.max_angle_diff_3c, c.max_angle_diff_6c, c.max_angle_diff_9c,
                    c.max_kinetic_tcl,  c.kinetic_max_angle_3c};
    }
}

int stability_label(const Trajectory& traj) {
    double widest = 0.0;
    for (int k = 0; k < traj.n_steps(); ++k)
        widest = std::max(widest, traj.angles.row(k).maxCoeff() - traj.angles.row(k).minCoeff());
    return widest > kTwoPi ? -1 : 1;  // "exceeded 360 degrees" read strictly
}

Dataset generate_dataset(const std::vector<MachineParams>& machines, const ReducedNetwork& net,
                         const Scenario& base, const GeneratorConfig& cfg,
                         GenerationStats* stats) {
    if (cfg.n_samples < 1) throw ConfigError("n_samples must be positive");
    if (cfg.load_range.first > cfg.load_range.second ||
        cfg.tcl_range.first > cfg.tcl_range.second)
        throw ConfigError("load/tcl ranges must have min <= max");
    if (cfg.tcl_range.first < base.t0)
        throw ConfigError("tcl range must not start before the fault inception t0");

    const std::vector<std::string> names = feature_names(cfg.feature_set);
    Eigen::MatrixXd rows(cfg.n_samples, static_cast<Eigen::Index>(names.size()));
    std::vector<int> labels(cfg.n_samples);

    GenerationStats local;
    GenerationStats& st = stats ? *stats : local;
    st = {};

    for (int i = 0; i < cfg.n_samples; ++i) {
        Rng rng(derive_seed(cfg.seed, "scenario", i));
        bool done = false;
        for (int attempt = 0; attempt < 100 && !done; ++attempt) {
            ++st.attempts;
            Scenario scn = base;
            scn.load_scale = rng.uniform(cfg.load_range.first, cfg.load_range.second);
            scn.tcl = rng.uniform(cfg.tcl_range.first, cfg.tcl_range.second);
            std::vector<MachineParams> drawn = machines;
            for (auto& m : drawn)
                m.mech_power *= rng.uniform(1.0 - cfg.pm_jitter, 1.0 + cfg.pm_jitter);
            try {
                const Trajectory traj = simulate(drawn, net, scn);
                const FeatureCatalog cat = coi_features(traj, drawn, net, scn);
                const std::vector<double> feats = select_features(cat, cfg.feature_set);
                for (std::size_t c = 0; c < feats.size(); ++c)
                    rows(i, static_cast<Eigen::Index>(c)) = feats[c];
                labels[i] = stability_label(traj);
                done = true;
            } catch (const NoEquilibrium&) {
                ++st.rejected;
                if (st.rejected > cfg.n_samples)
                    throw BadScenarioSpace("more than half of the drawn scenarios lack an equilibrium");
            }
        }
        if (!done) throw BadScenarioSpace("scenario redraw limit reached");
    }

    std::vector<FeatureSpec> specs(names.size());
    for (std::size_t c = 0; c < names.size(); ++c) specs[c].name = names[c];
    return make_dataset(std::move(specs), std::move(rows), std::move(labels));
}

SwingFixture load_swing_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open fixture '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("fixture JSON parse failure: ") + e.what());
    }

    SwingFixture fx;
    const auto& jm = j.at("machines");
    const auto M = jm.at("M").get<std::vector<double>>();
    const auto D = jm.at("D").get<std::vector<double>>();
    const auto E = jm.at("E").get<std::vector<double>>();
    const auto Pm = jm.at("Pm").get<std::vector<double>>();
    if (M.size() != D.size() || M.size() != E.size() || M.size() != Pm.size())
        throw ConfigError("machine arrays must have equal length");
    for (std::size_t i = 0; i < M.size(); ++i)
        fx.machines.push_back({M[i], D[i], E[i], Pm[i]});

    auto matrix = [](const nlohmann::json& rows) {
        const int n = static_cast<int>(rows.size());
        Eigen::MatrixXd m(n, n);
        for (int r = 0; r < n; ++r) {
            if (static_cast<int>(rows.at(r).size()) != n)
                throw ConfigError("network matrices must be square");
            for (int c = 0; c < n; ++c) m(r, c) = rows.at(r).at(c).get<double>();
        }
        return m;
    };
    auto phase = [&](const nlohmann::json& jp) {
        return PhasePair{matrix(jp.at("G")), matrix(jp.at("B"))};
    };
    const auto& jn = j.at("networks");
    fx.network.prefault = phase(jn.at("prefault"));
    fx.network.fault_on = phase(jn.at("fault_on"));
    fx.network.postfault =
        jn.contains("postfault") ? phase(jn.at("postfault")) : fx.network.prefault;

    if (j.contains("scenario")) {
        const auto& js = j.at("scenario");
        fx.scenario.t0 = js.value("t0", fx.scenario.t0);
        fx.scenario.tcl = js.value("tcl", fx.scenario.tcl);
        fx.scenario.t_end = js.value("t_end", fx.scenario.t_end);
        fx.scenario.dt = js.value("dt", fx.scenario.dt);
        fx.scenario.cycle = js.value("cycle", fx.scenario.cycle);
    }
    if (j.contains("generator")) {
        const auto& jg = j.at("generator");
        fx.generator.n_samples = jg.value("n_samples", fx.generator.n_samples);
        if (jg.contains("load_range")) {
            fx.generator.load_range = {jg.at("load_range").at(0).get<double>(),
                                       jg.at("load_range").at(1).get<double>()};
        }
        if (jg.contains("tcl_range")) {
            fx.generator.tcl_range = {jg.at("tcl_range").at(0).get<double>(),
                                      jg.at("tcl_range").at(1).get<double>()};
        }
        fx.generator.pm_jitter = jg.value("pm_jitter", fx.generator.pm_jitter);
        if (jg.contains("feature_set"))
            fx.generator.feature_set =
                feature_set_from_string(jg.at("feature_set").get<std::string>());
    }

    fx.network.validate(static_cast<int>(fx.machines.size()));
    fx.scenario.validate();
    return fx;
}

}  // namespace elmrules
