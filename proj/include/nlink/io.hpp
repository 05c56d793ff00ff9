/**
 * @file io.hpp
 * @brief Experiment-config parsing and the on-disk formats: trajectory CSV,
 *        convergence CSV, JSON run manifests.
 *
 * Config files are flat INI-style text (key = value under [section] headers).
 * CSV values are written with 17 significant digits so that downstream audits
 * see the same numbers the simulation produced.
 */

#ifndef NLINK_IO_HPP
#define NLINK_IO_HPP

#include "nlink/analysis.hpp"
#include "nlink/dynamics.hpp"
#include "nlink/types.hpp"

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace nlink {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

/// Named initial angle profiles. `Explicit` carries the raw theta list.
struct InitialCurve {
    enum class Kind { Straight, Arc, Sine, Explicit } kind = Kind::Straight;
    double amplitude = 0.0;
    double wavenumber = 1.0;
    std::vector<double> theta;  ///< only for Explicit

    std::function<double(double)> profile(double L) const {
        switch (kind) {
            case Kind::Straight: return [](double) { return 0.0; };
            case Kind::Arc: {
                const double a = amplitude;
                return [a, L](double s) { return a * s / L; };
            }
            case Kind::Sine: {
                const double a = amplitude, k = wavenumber;
                return [a, k, L](double s) { return a * std::sin(k * M_PI * s / L); };
            }
            case Kind::Explicit:
                throw ConfigError("explicit theta lists have no continuous profile");
        }
        throw std::logic_error("unreachable");
    }
};

struct ExperimentConfig {
    PhysParams params;
    BoundaryCondition bc = BoundaryCondition::Free;
    int N = 0;                ///< sim runs
    std::vector<int> Ns;      ///< convergence runs
    int N_ref = 0;            ///< convergence reference
    InitialCurve initial;
    Vec2 r1 = Vec2::Zero();
    IntegratorSpec integrator;
    std::string out_dir = ".";
    std::string format = "csv";  ///< csv or json
    int threads = 1;
    unsigned seed = 0;

    Configuration build_initial(int n) const {
        if (initial.kind == InitialCurve::Kind::Explicit) {
            if (static_cast<int>(initial.theta.size()) != n)
                throw ConfigError("explicit theta list length does not match N");
            VecX th(n);
            for (int i = 0; i < n; ++i) th(i) = initial.theta[static_cast<size_t>(i)];
            return Configuration(n, std::move(th), r1, bc, 0.0);
        }
        return init_from_curve(initial.profile(params.L), r1, n, params, bc);
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& s) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (detail::trim(s.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("config key '" + key + "': cannot parse number from '" + s + "'");
}

inline int parse_int(const std::string& key, const std::string& s) {
    try {
        size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (detail::trim(s.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("config key '" + key + "': cannot parse integer from '" + s + "'");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream iss(s);
    while (std::getline(iss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    return out;
}

}  // namespace detail

/// Parses a [section] / key = value experiment config. Unknown keys are
/// rejected so typos fail loudly.
inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");

    ExperimentConfig cfg;
    std::string section, line;
    int lineno = 0;
    bool scheme_set = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        const std::string full = section.empty() ? key : section + "." + key;

        if (full == "physics.L") cfg.params.L = detail::parse_double(full, val);
        else if (full == "physics.E") cfg.params.E = detail::parse_double(full, val);
        else if (full == "physics.c_par") cfg.params.c_par = detail::parse_double(full, val);
        else if (full == "physics.c_perp") cfg.params.c_perp = detail::parse_double(full, val);
        else if (full == "physics.bc") cfg.bc = bc_from_string(val);
        else if (full == "physics.N") cfg.N = detail::parse_int(full, val);
        else if (full == "physics.Ns") {
            for (double d : detail::parse_list(full, val)) cfg.Ns.push_back(static_cast<int>(d));
        } else if (full == "physics.N_ref") cfg.N_ref = detail::parse_int(full, val);
        else if (full == "initial.curve") {
            if (val == "straight") cfg.initial.kind = InitialCurve::Kind::Straight;
            else if (val == "arc") cfg.initial.kind = InitialCurve::Kind::Arc;
            else if (val == "sine") cfg.initial.kind = InitialCurve::Kind::Sine;
            else if (val == "explicit") cfg.initial.kind = InitialCurve::Kind::Explicit;
            else throw ConfigError("initial.curve: unknown curve '" + val + "'");
        } else if (full == "initial.amplitude") cfg.initial.amplitude = detail::parse_double(full, val);
        else if (full == "initial.wavenumber") cfg.initial.wavenumber = detail::parse_double(full, val);
        else if (full == "initial.theta") cfg.initial.theta = detail::parse_list(full, val);
        else if (full == "initial.r1x") cfg.r1.x() = detail::parse_double(full, val);
        else if (full == "initial.r1y") cfg.r1.y() = detail::parse_double(full, val);
        else if (full == "integrator.scheme") {
            cfg.integrator.scheme = scheme_from_string(val);
            scheme_set = true;
        } else if (full == "integrator.dt") cfg.integrator.dt = detail::parse_double(full, val);
        else if (full == "integrator.rtol") cfg.integrator.rtol = detail::parse_double(full, val);
        else if (full == "integrator.atol") cfg.integrator.atol = detail::parse_double(full, val);
        else if (full == "integrator.t_end") cfg.integrator.t_end = detail::parse_double(full, val);
        else if (full == "integrator.samples") cfg.integrator.samples = detail::parse_int(full, val);
        else if (full == "output.out_dir") cfg.out_dir = val;
        else if (full == "output.format") {
            if (val != "csv" && val != "json")
                throw ConfigError("output.format must be csv or json, got '" + val + "'");
            cfg.format = val;
        } else if (full == "output.threads") cfg.threads = detail::parse_int(full, val);
        else if (full == "output.seed") cfg.seed = static_cast<unsigned>(detail::parse_int(full, val));
        else throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + full + "'");
    }

    (void)scheme_set;
    cfg.params.validate();
    if (cfg.threads < 1) throw ConfigError("output.threads must be >= 1");
    return cfg;
}

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

/// Shortest decimal string that round-trips the double (17 significant
/// digits at most).
inline std::string format_full(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Trajectory files
// ---------------------------------------------------------------------------

inline void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    const int N = traj.samples.empty() ? 0 : traj.samples.front().config.N;
    out << "t";
    for (int i = 1; i <= N; ++i) out << ",theta_" << i;
    out << ",r1x,r1y,energy,dissipation_rate,identity_residual,total_force_x,total_force_y,"
           "total_torque\n";
    for (const TrajectorySample& s : traj.samples) {
        out << format_full(s.time);
        for (int i = 0; i < N; ++i) out << ',' << format_full(s.config.theta(i));
        out << ',' << format_full(s.config.r1.x()) << ',' << format_full(s.config.r1.y()) << ','
            << format_full(s.diag.energy) << ',' << format_full(s.diag.dissipation_rate) << ','
            << format_full(s.diag.identity_residual) << ',' << format_full(s.diag.total_force.x())
            << ',' << format_full(s.diag.total_force.y()) << ',' << format_full(s.diag.total_torque)
            << '\n';
    }
}

inline json trajectory_to_json(const Trajectory& traj) {
    json rows = json::array();
    for (const TrajectorySample& s : traj.samples) {
        json row;
        row["t"] = s.time;
        row["theta"] = std::vector<double>(s.config.theta.data(),
                                           s.config.theta.data() + s.config.theta.size());
        row["r1"] = {s.config.r1.x(), s.config.r1.y()};
        row["energy"] = s.diag.energy;
        row["dissipation_rate"] = s.diag.dissipation_rate;
        row["identity_residual"] = s.diag.identity_residual;
        row["total_force"] = {s.diag.total_force.x(), s.diag.total_force.y()};
        row["total_torque"] = s.diag.total_torque;
        rows.push_back(std::move(row));
    }
    return rows;
}

/// What cmd_audit can recover from a trajectory CSV alone.
struct TrajectoryFile {
    int N = 0;
    std::vector<double> t, energy, dissipation_rate, identity_residual, total_torque;
    std::vector<Vec2> r1, total_force;
    std::vector<VecX> theta;
};

inline TrajectoryFile read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open trajectory file '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw ConfigError("empty trajectory file '" + path + "'");

    std::vector<std::string> cols;
    {
        std::istringstream iss(header);
        std::string c;
        while (std::getline(iss, c, ',')) cols.push_back(detail::trim(c));
    }
    int N = 0;
    while (N + 1 < static_cast<int>(cols.size()) &&
           cols[static_cast<size_t>(N) + 1] == "theta_" + std::to_string(N + 1))
        ++N;
    const std::vector<std::string> tail = {"r1x", "r1y", "energy", "dissipation_rate",
                                           "identity_residual", "total_force_x", "total_force_y",
                                           "total_torque"};
    if (cols.empty() || cols[0] != "t" || cols.size() != static_cast<size_t>(N) + 1 + tail.size())
        throw ConfigError("trajectory file '" + path + "' does not match the simulate schema");
    for (size_t k = 0; k < tail.size(); ++k)
        if (cols[static_cast<size_t>(N) + 1 + k] != tail[k])
            throw ConfigError("trajectory file '" + path + "' does not match the simulate schema");

    TrajectoryFile tf;
    tf.N = N;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        std::vector<double> vals;
        std::istringstream iss(line);
        std::string cell;
        while (std::getline(iss, cell, ','))
            vals.push_back(detail::parse_double("row " + std::to_string(lineno), cell));
        if (vals.size() != cols.size())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": wrong column count");
        size_t k = 0;
        tf.t.push_back(vals[k++]);
        VecX th(N);
        for (int i = 0; i < N; ++i) th(i) = vals[k++];
        tf.theta.push_back(std::move(th));
        tf.r1.emplace_back(vals[k], vals[k + 1]);
        k += 2;
        tf.energy.push_back(vals[k++]);
        tf.dissipation_rate.push_back(vals[k++]);
        tf.identity_residual.push_back(vals[k++]);
        tf.total_force.emplace_back(vals[k], vals[k + 1]);
        k += 2;
        tf.total_torque.push_back(vals[k++]);
    }
    if (tf.t.empty()) throw ConfigError("trajectory file '" + path + "' has no data rows");
    return tf;
}

// ---------------------------------------------------------------------------
// Convergence files
// ---------------------------------------------------------------------------

inline void write_convergence_csv(const ConvergenceReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << "N,h,err_r_L2QT,err_m_L2QT,err_n_L2QT\n";
    for (size_t k = 0; k < rep.Ns.size(); ++k) {
        out << rep.Ns[k] << ',' << format_full(rep.hs[k]) << ','
            << format_full(rep.errors.at("r_L2QT")[k]) << ','
            << format_full(rep.errors.at("m_L2QT")[k]) << ','
            << format_full(rep.errors.at("n_L2QT")[k]) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

inline json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["physics"] = {{"L", cfg.params.L},
                    {"E", cfg.params.E},
                    {"c_par", cfg.params.c_par},
                    {"c_perp", cfg.params.c_perp},
                    {"bc", to_string(cfg.bc)}};
    if (cfg.N > 0) j["physics"]["N"] = cfg.N;
    if (!cfg.Ns.empty()) j["physics"]["Ns"] = cfg.Ns;
    if (cfg.N_ref > 0) j["physics"]["N_ref"] = cfg.N_ref;
    switch (cfg.initial.kind) {
        case InitialCurve::Kind::Straight: j["initial"] = {{"curve", "straight"}}; break;
        case InitialCurve::Kind::Arc:
            j["initial"] = {{"curve", "arc"}, {"amplitude", cfg.initial.amplitude}};
            break;
        case InitialCurve::Kind::Sine:
            j["initial"] = {{"curve", "sine"},
                            {"amplitude", cfg.initial.amplitude},
                            {"wavenumber", cfg.initial.wavenumber}};
            break;
        case InitialCurve::Kind::Explicit:
            j["initial"] = {{"curve", "explicit"}, {"theta", cfg.initial.theta}};
            break;
    }
    j["initial"]["r1"] = {cfg.r1.x(), cfg.r1.y()};
    j["integrator"] = {{"scheme", to_string(cfg.integrator.scheme)},
                       {"dt", cfg.integrator.dt},
                       {"rtol", cfg.integrator.rtol},
                       {"atol", cfg.integrator.atol},
                       {"t_end", cfg.integrator.t_end},
                       {"samples", cfg.integrator.samples}};
    j["seed"] = cfg.seed;
    return j;
}

inline void write_manifest(const json& manifest, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << manifest.dump(2) << '\n';
}

/// Looks for the run manifest next to a trajectory file (written by
/// cmd_simulate as <stem>.manifest.json).
inline std::optional<json> sibling_manifest(const std::string& trajectory_path) {
    std::filesystem::path p(trajectory_path);
    p.replace_extension();
    p += ".manifest.json";
    std::ifstream in(p);
    if (!in) return std::nullopt;
    try {
        json j;
        in >> j;
        return j;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace nlink

#endif  // NLINK_IO_HPP
