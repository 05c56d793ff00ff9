/**
 * @file types.hpp
 * @brief Core value types for the planar N-link filament model: physical
 *        parameters, configurations, internal loads and trajectories.
 */

#ifndef NLINK_TYPES_HPP
#define NLINK_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlink {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Reduced matrix failed to factorize with a usable condition estimate.
struct SingularSystem : std::runtime_error {
    explicit SingularSystem(const std::string& what) : std::runtime_error(what) {}
};

/// Adaptive step size fell below the representable resolution of the run.
struct StepSizeUnderflow : std::runtime_error {
    explicit StepSizeUnderflow(const std::string& what) : std::runtime_error(what) {}
};

/// A space-time norm was requested on a trajectory with too few samples.
struct InsufficientSampling : std::runtime_error {
    explicit InsufficientSampling(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid experiment configuration (CLI front end).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Physical parameters
// ---------------------------------------------------------------------------

/// Filament length, bending stiffness and the two drag coefficients.
/// All strictly positive, and c_par != c_perp.
struct PhysParams {
    double L = 1.0;       ///< filament length
    double E = 1.0;       ///< bending stiffness
    double c_par = 1.0;   ///< parallel drag coefficient
    double c_perp = 2.0;  ///< perpendicular drag coefficient

    void validate() const {
        if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("PhysParams: L must be positive");
        if (!(E > 0.0) || !std::isfinite(E)) throw ConfigError("PhysParams: E must be positive");
        if (!(c_par > 0.0) || !std::isfinite(c_par))
            throw ConfigError("PhysParams: c_par must be positive");
        if (!(c_perp > 0.0) || !std::isfinite(c_perp))
            throw ConfigError("PhysParams: c_perp must be positive");
        if (c_par == c_perp)
            throw ConfigError("PhysParams: c_par must differ from c_perp (anisotropic drag)");
    }
};

enum class BoundaryCondition { Free, Pinned, Clamped };

inline const char* to_string(BoundaryCondition bc) {
    switch (bc) {
        case BoundaryCondition::Free: return "free";
        case BoundaryCondition::Pinned: return "pinned";
        case BoundaryCondition::Clamped: return "clamped";
    }
    return "?";
}

inline BoundaryCondition bc_from_string(const std::string& s) {
    if (s == "free") return BoundaryCondition::Free;
    if (s == "pinned") return BoundaryCondition::Pinned;
    if (s == "clamped") return BoundaryCondition::Clamped;
    throw ConfigError("unknown boundary condition '" + s + "'");
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// State of the chain: link angles plus the first vertex position.
///
/// Angles are stored as unwrapped real representatives and are never reduced
/// modulo 2*pi; the elastic moments depend on the chosen representatives.
/// Vertex positions are derived quantities, so the inextensibility constraint
/// holds by construction.
struct Configuration {
    int N = 0;                                     ///< link count (>= 1)
    VecX theta;                                    ///< N link angles (radians)
    Vec2 r1 = Vec2::Zero();                        ///< proximal vertex position
    BoundaryCondition bc = BoundaryCondition::Free;
    double time = 0.0;

    Configuration() = default;
    Configuration(int n, VecX th, Vec2 r, BoundaryCondition b = BoundaryCondition::Free,
                  double t = 0.0)
        : N(n), theta(std::move(th)), r1(r), bc(b), time(t) {}

    void validate() const {
        if (N < 1) throw ConfigError("Configuration: N must be >= 1");
        if (theta.size() != N) throw ConfigError("Configuration: theta must have N entries");
        if (!theta.allFinite() || !r1.allFinite() || !std::isfinite(time))
            throw ConfigError("Configuration: entries must be finite");
    }
};

/// Link length h = L/N.
inline double link_length(const PhysParams& p, const Configuration& c) {
    return p.L / static_cast<double>(c.N);
}

// ---------------------------------------------------------------------------
// Internal loads
// ---------------------------------------------------------------------------

/// Contact forces and moment z-components at the N+1 joints.
///
/// Index k in [0, N] holds the load transmitted across joint k+1 (paper
/// numbering): n[0] is the proximal end load, n[N] the distal one. The distal
/// entries are always exactly zero (free distal end).
struct InternalLoads {
    std::vector<Vec2> n;  ///< N+1 contact forces
    VecX m;               ///< N+1 contact-moment z-components

    InternalLoads() = default;
    explicit InternalLoads(int N) : n(static_cast<size_t>(N) + 1, Vec2::Zero()), m(VecX::Zero(N + 1)) {}
};

// ---------------------------------------------------------------------------
// Diagnostics / trajectory
// ---------------------------------------------------------------------------

/// Per-state energy and balance diagnostics.
struct StepDiagnostics {
    double energy = 0.0;             ///< elastic bending energy
    double dissipation_rate = 0.0;   ///< xdot' M xdot >= 0
    double identity_residual = 0.0;  ///< dE/dt + xdot' M xdot (analytic dE/dt)
    Vec2 total_force = Vec2::Zero(); ///< summed hydrodynamic drag force
    double total_torque = 0.0;       ///< summed hydrodynamic torque about origin
};

struct TrajectorySample {
    double time = 0.0;
    Configuration config;
    InternalLoads loads;
    VecX xdot;  ///< full N+2 velocity vector, zeros in constrained slots
    StepDiagnostics diag;
};

/// Time-sampled solution with integrator metadata.
struct Trajectory {
    PhysParams params;
    std::string scheme;
    double dt = 0.0;                 ///< base step used by the integrator
    double total_dissipated = 0.0;   ///< integral of xdot' M xdot over the run
    std::vector<TrajectorySample> samples;
};

}  // namespace nlink

#endif  // NLINK_TYPES_HPP
