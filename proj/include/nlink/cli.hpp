/**
 * @file cli.hpp
 * @brief The sim / converge / audit subcommands behind the command-line tool.
 *
 * Exit codes: 0 success, 2 invalid config or input file, 3 solver failure.
 * The output directory resolves as: --out-dir flag, else NLINK_OUT_DIR
 * environment variable, else the config's output.out_dir.
 */

#ifndef NLINK_CLI_HPP
#define NLINK_CLI_HPP

#include "nlink/io.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>

namespace nlink {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitSolverFailure = 3;

/// Command-line overrides that beat the config file.
struct CliOptions {
    std::string out_dir;  ///< empty: fall back to env / config
    std::string format;   ///< empty: config value
    int threads = 0;      ///< 0: config value
};

namespace detail {

inline std::string resolve_out_dir(const ExperimentConfig& cfg, const CliOptions& opt) {
    if (!opt.out_dir.empty()) return opt.out_dir;
    if (const char* env = std::getenv("NLINK_OUT_DIR"); env && *env) return env;
    return cfg.out_dir;
}

inline json base_manifest(const ExperimentConfig& cfg, double wall_seconds) {
    json m;
    m["config"] = config_to_json(cfg);
    m["version"] = kVersion;
    m["wall_time_seconds"] = wall_seconds;
    return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// sim
// ---------------------------------------------------------------------------

inline int cmd_simulate(const std::string& config_path, const CliOptions& opt = {}) {
    ExperimentConfig cfg;
    Configuration initial;
    try {
        cfg = parse_config(config_path);
        if (cfg.N < 1) throw ConfigError("sim requires physics.N >= 1");
        cfg.integrator.validate();
        initial = cfg.build_initial(cfg.N);
        initial.validate();
    } catch (const ConfigError& e) {
        std::cerr << "error: invalid config: " << e.what() << "\n";
        return kExitInvalidConfig;
    }

    const auto t0 = std::chrono::steady_clock::now();
    Trajectory traj;
    try {
        traj = simulate(cfg.params, initial, cfg.integrator);
    } catch (const SingularSystem& e) {
        std::cerr << "error: solver failure in reduce/solve_velocity: " << e.what() << "\n";
        return kExitSolverFailure;
    } catch (const StepSizeUnderflow& e) {
        std::cerr << "error: solver failure in the adaptive integrator: " << e.what() << "\n";
        return kExitSolverFailure;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::string out_dir = detail::resolve_out_dir(cfg, opt);
    std::filesystem::create_directories(out_dir);
    const std::string format = opt.format.empty() ? cfg.format : opt.format;
    const std::filesystem::path base = std::filesystem::path(out_dir) / "trajectory";

    try {
        if (format == "json") {
            json j = detail::base_manifest(cfg, wall);
            j["trajectory"] = trajectory_to_json(traj);
            j["total_dissipated"] = traj.total_dissipated;
            write_manifest(j, (base.string() + ".json"));
            std::cout << "wrote " << base.string() + ".json" << "\n";
        } else {
            write_trajectory_csv(traj, base.string() + ".csv");
            json m = detail::base_manifest(cfg, wall);
            m["total_dissipated"] = traj.total_dissipated;
            m["samples"] = traj.samples.size();
            write_manifest(m, base.string() + ".manifest.json");
            std::cout << "wrote " << base.string() + ".csv"
                      << " and " << base.string() + ".manifest.json" << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidConfig;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// converge
// ---------------------------------------------------------------------------

inline int cmd_converge(const std::string& config_path, const CliOptions& opt = {}) {
    ExperimentConfig cfg;
    std::function<double(double)> theta0;
    try {
        cfg = parse_config(config_path);
        if (cfg.Ns.empty()) throw ConfigError("converge requires physics.Ns");
        if (cfg.N_ref < 1) throw ConfigError("converge requires physics.N_ref");
        cfg.integrator.validate();
        theta0 = cfg.initial.profile(cfg.params.L);
    } catch (const ConfigError& e) {
        std::cerr << "error: invalid config: " << e.what() << "\n";
        return kExitInvalidConfig;
    }

    const int threads = (opt.threads > 0) ? opt.threads : cfg.threads;
    const auto t0 = std::chrono::steady_clock::now();
    ConvergenceReport rep;
    try {
        rep = self_convergence(theta0, cfg.params, cfg.integrator, cfg.Ns, cfg.N_ref, cfg.bc,
                               threads);
    } catch (const ConfigError& e) {
        std::cerr << "error: invalid config: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const SingularSystem& e) {
        std::cerr << "error: solver failure in self_convergence: " << e.what() << "\n";
        return kExitSolverFailure;
    } catch (const StepSizeUnderflow& e) {
        std::cerr << "error: solver failure in self_convergence: " << e.what() << "\n";
        return kExitSolverFailure;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::string out_dir = detail::resolve_out_dir(cfg, opt);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path base = std::filesystem::path(out_dir) / "convergence";
    try {
        write_convergence_csv(rep, base.string() + ".csv");
        json m = detail::base_manifest(cfg, wall);
        m["N_ref"] = rep.N_ref;
        m["fitted_orders"] = rep.fitted_orders;
        // the study shows self-convergence; it cannot certify that the limit
        // is unique
        m["note"] = "self-convergence against a finer discretization; uniqueness of the limit "
                    "is not certified";
        write_manifest(m, base.string() + ".manifest.json");
        std::cout << "wrote " << base.string() + ".csv" << "\n";
        for (const auto& [name, order] : rep.fitted_orders)
            std::cout << "fitted order " << name << ": " << order << "\n";
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidConfig;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// audit
// ---------------------------------------------------------------------------

inline int cmd_audit(const std::string& trajectory_path, const CliOptions& = {}) {
    TrajectoryFile tf;
    try {
        tf = read_trajectory_csv(trajectory_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidConfig;
    }

    // physical context comes from the sibling manifest when present
    PhysParams p;
    BoundaryCondition bc = BoundaryCondition::Free;
    bool have_manifest = false;
    if (const auto m = sibling_manifest(trajectory_path)) {
        try {
            const json& ph = m->at("config").at("physics");
            p.L = ph.at("L").get<double>();
            p.E = ph.at("E").get<double>();
            p.c_par = ph.at("c_par").get<double>();
            p.c_perp = ph.at("c_perp").get<double>();
            bc = bc_from_string(ph.at("bc").get<std::string>());
            have_manifest = true;
        } catch (const std::exception&) {
        }
    }
    if (!have_manifest)
        std::cout << "note: no run manifest found next to the trajectory; assuming unit "
                     "parameters and free ends\n";

    int failures = 0;
    auto report = [&](const char* name, bool ok, double measured) {
        std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "  (measured " << measured << ")\n";
        if (!ok) ++failures;
    };

    // energy monotone non-increasing within a rounding tolerance
    double worst_increase = 0.0, e_scale = 0.0;
    for (size_t j = 0; j < tf.energy.size(); ++j) {
        e_scale = std::max(e_scale, std::abs(tf.energy[j]));
        if (j > 0) worst_increase = std::max(worst_increase, tf.energy[j] - tf.energy[j - 1]);
    }
    report("energy monotone non-increasing", worst_increase <= 1e-9 * (e_scale + 1e-30),
           worst_increase);

    // dissipation identity residual against the recorded rate
    double worst_identity = 0.0;
    for (size_t j = 0; j < tf.t.size(); ++j) {
        const double scale = std::max(std::abs(tf.dissipation_rate[j]), 1e-30);
        worst_identity = std::max(worst_identity, std::abs(tf.identity_residual[j]) / scale);
    }
    report("dissipation identity residual", worst_identity <= 1e-9, worst_identity);

    // total hydrodynamic force/torque vanish only for free ends
    if (bc == BoundaryCondition::Free) {
        double worst_force = 0.0, worst_torque = 0.0, f_scale = 0.0;
        for (size_t j = 0; j < tf.t.size(); ++j) {
            // force scale from the dissipation rate: rate ~ force * velocity
            f_scale = std::max(f_scale, std::sqrt(std::abs(tf.dissipation_rate[j])));
            worst_force = std::max(worst_force, tf.total_force[j].norm());
            worst_torque = std::max(worst_torque, std::abs(tf.total_torque[j]));
        }
        const double tol = 1e-10 * (f_scale + 1.0);
        report("total drag force vanishes", worst_force <= tol, worst_force);
        report("total drag torque vanishes", worst_torque <= tol, worst_torque);
    } else {
        std::cout << "SKIP  force/torque totals (boundary condition is " << to_string(bc) << ")\n";
    }

    // sqrt(T) growth fit on the reconstructed configurations
    Trajectory traj;
    traj.params = p;
    for (size_t j = 0; j < tf.t.size(); ++j) {
        TrajectorySample s;
        s.time = tf.t[j];
        s.config = Configuration(tf.N, tf.theta[j], tf.r1[j], bc, tf.t[j]);
        traj.samples.push_back(std::move(s));
    }
    const BoundsReport br = audit_bounds(traj);
    if (br.stationary) {
        std::cout << "PASS  growth audit: stationary\n";
    } else {
        // deviations grow no faster than sqrt(T) (fitted exponent <= 0.5 with
        // slack for the coarse prefix fit)
        const bool ok = br.theta_exponent <= 0.75 && br.r_exponent <= 0.75;
        report("growth bounded by sqrt(T)", ok, std::max(br.theta_exponent, br.r_exponent));
        std::cout << "      theta growth constant " << br.theta_constant << ", r growth constant "
                  << br.r_constant << "\n";
    }

    return failures == 0 ? 0 : 1;
}

}  // namespace nlink

#endif  // NLINK_CLI_HPP
