/**
 * @file interpolants.hpp
 * @brief Arclength-continuous reconstructions of the discrete variables:
 *        piecewise-affine r^h, n^h, m^{h,z}, theta^h, piecewise-constant
 *        theta-bar and m-bar, and the integrated curve r-hat.
 *
 * Spatial integrals of the piecewise-polynomial reconstructions are evaluated
 * in closed form per cell.
 */

#ifndef NLINK_INTERPOLANTS_HPP
#define NLINK_INTERPOLANTS_HPP

#include "nlink/dynamics.hpp"
#include "nlink/geometry.hpp"
#include "nlink/types.hpp"

namespace nlink {

/// One time slice of a trajectory with everything the interpolants need.
struct Snapshot {
    PhysParams params;
    Configuration config;
    InternalLoads loads;
    VecX xdot;  ///< full N+2 velocity (may be zero if only static kinds are used)

    static Snapshot from_sample(const PhysParams& p, const TrajectorySample& s) {
        return Snapshot{p, s.config, s.loads, s.xdot};
    }
};

/// Vertex velocities rdot_1..rdot_{N+1} from the generalized velocity.
inline std::vector<Vec2> vertex_velocities(const PhysParams& p, const Configuration& c,
                                           const VecX& xdot) {
    const double h = link_length(p, c);
    std::vector<Vec2> v(static_cast<size_t>(c.N) + 1);
    v[0] = Vec2(xdot(c.N), xdot(c.N + 1));
    for (int i = 0; i < c.N; ++i)
        v[static_cast<size_t>(i) + 1] = v[static_cast<size_t>(i)] + h * xdot(i) * unit_normal(c.theta(i));
    return v;
}

// ---------------------------------------------------------------------------
// Piecewise families on [0, L]
// ---------------------------------------------------------------------------

/// Continuous piecewise-affine function with d components and N+1 nodes.
struct PiecewiseLinear {
    double h = 0.0;
    MatX nodes;  ///< d x (N+1)

    int cells() const { return static_cast<int>(nodes.cols()) - 1; }
    int cell_of(double s) const {
        return std::clamp(static_cast<int>(s / h), 0, cells() - 1);
    }
    VecX eval(double s) const {
        const int i = cell_of(s);
        const double w = s / h - i;
        return (1.0 - w) * nodes.col(i) + w * nodes.col(i + 1);
    }
    VecX deriv(int cell) const { return (nodes.col(cell + 1) - nodes.col(cell)) / h; }
    VecX deriv_at(double s) const { return deriv(cell_of(s)); }

    double l2_sq() const {
        double acc = 0.0;
        for (int i = 0; i < cells(); ++i) {
            const auto a = nodes.col(i), b = nodes.col(i + 1);
            acc += h / 3.0 * (a.squaredNorm() + a.dot(b) + b.squaredNorm());
        }
        return acc;
    }
    double deriv_l2_sq() const {
        double acc = 0.0;
        for (int i = 0; i < cells(); ++i)
            acc += (nodes.col(i + 1) - nodes.col(i)).squaredNorm() / h;
        return acc;
    }
    double linf() const {
        double m = 0.0;
        for (int i = 0; i < nodes.cols(); ++i) m = std::max(m, nodes.col(i).norm());
        return m;
    }
};

/// Cell-constant function with d components and N cells.
struct PiecewiseConstant {
    double h = 0.0;
    MatX cells_data;  ///< d x N

    int cells() const { return static_cast<int>(cells_data.cols()); }
    int cell_of(double s) const {
        return std::clamp(static_cast<int>(s / h), 0, cells() - 1);
    }
    VecX eval(double s) const { return cells_data.col(cell_of(s)); }

    double l2_sq() const {
        double acc = 0.0;
        for (int i = 0; i < cells(); ++i) acc += h * cells_data.col(i).squaredNorm();
        return acc;
    }
    double linf() const {
        double m = 0.0;
        for (int i = 0; i < cells(); ++i) m = std::max(m, cells_data.col(i).norm());
        return m;
    }
};

// ---------------------------------------------------------------------------
// Interpolant kinds
// ---------------------------------------------------------------------------

enum class InterpKind {
    RLinear,      ///< piecewise-affine position r^h
    NLinear,      ///< piecewise-affine contact force n^h
    MLinear,      ///< piecewise-affine moment m^{h,z}
    ThetaPC,      ///< cell-constant angle theta-bar
    ThetaLinear,  ///< continuous piecewise-affine angle theta^h
    MPC,          ///< cell-constant moment m-bar
    RHat          ///< integrated curve with tangent (cos theta^h, sin theta^h)
};

namespace detail {

/// Nodes of theta^h: value theta_1 at s=0, theta_i at s=ih.
inline VecX theta_linear_nodes(const Configuration& c) {
    VecX nodes(c.N + 1);
    nodes(0) = c.theta(0);
    nodes.tail(c.N) = c.theta;
    return nodes;
}

}  // namespace detail

/// The curve r-hat: r^h(t,0) plus the running integral of the unit tangent of
/// theta^h. Differentiable in s with |d/ds r-hat| = 1 exactly.
struct RHatCurve {
    double h = 0.0;
    Vec2 base = Vec2::Zero();
    VecX theta_nodes;          ///< N+1 nodes of theta^h
    std::vector<Vec2> r_nodes; ///< r-hat at the grid points (closed-form cumsum)

    static RHatCurve build(const PhysParams& p, const Configuration& c) {
        RHatCurve rh;
        rh.h = link_length(p, c);
        rh.base = c.r1;
        rh.theta_nodes = detail::theta_linear_nodes(c);
        rh.r_nodes.resize(static_cast<size_t>(c.N) + 1);
        rh.r_nodes[0] = rh.base;
        for (int i = 0; i < c.N; ++i)
            rh.r_nodes[static_cast<size_t>(i) + 1] =
                rh.r_nodes[static_cast<size_t>(i)] +
                rh.segment_integral(i, rh.h);
        return rh;
    }

    /// Integral of the unit tangent over [ih, ih + ds], ds in [0, h].
    Vec2 segment_integral(int cell, double ds) const {
        const double a = theta_nodes(cell);
        const double b = theta_nodes(cell + 1);
        const double slope = (b - a) / h;
        if (std::abs(slope) * h < 1e-12) {
            // nearly constant angle on the cell
            const double mid = a + slope * 0.5 * ds;
            return ds * unit_tangent(mid);
        }
        const double t0 = a, t1 = a + slope * ds;
        return Vec2((std::sin(t1) - std::sin(t0)) / slope, (std::cos(t0) - std::cos(t1)) / slope);
    }

    int cell_of(double s) const {
        return std::clamp(static_cast<int>(s / h),
                          0, static_cast<int>(r_nodes.size()) - 2);
    }
    double theta_at(double s) const {
        const int i = cell_of(s);
        const double w = s / h - i;
        return (1.0 - w) * theta_nodes(i) + w * theta_nodes(i + 1);
    }
    Vec2 eval(double s) const {
        const int i = cell_of(s);
        return r_nodes[static_cast<size_t>(i)] + segment_integral(i, s - i * h);
    }
    Vec2 deriv(double s) const { return unit_tangent(theta_at(s)); }
    Vec2 second_deriv(double s) const {
        const int i = cell_of(s);
        const double slope = (theta_nodes(i + 1) - theta_nodes(i)) / h;
        return slope * unit_normal(theta_at(s));
    }
};

/// Tagged union over the interpolant families; `build` fills the member that
/// matches the kind.
struct Interpolant {
    InterpKind kind = InterpKind::RLinear;
    PiecewiseLinear pl;
    PiecewiseConstant pc;
    RHatCurve rhat;

    static Interpolant build(InterpKind kind, const Snapshot& snap) {
        const Configuration& c = snap.config;
        const int N = c.N;
        const double h = link_length(snap.params, c);
        Interpolant out;
        out.kind = kind;
        switch (kind) {
            case InterpKind::RLinear: {
                const std::vector<Vec2> r = vertices(snap.params, c);
                out.pl.h = h;
                out.pl.nodes.resize(2, N + 1);
                for (int i = 0; i <= N; ++i) out.pl.nodes.col(i) = r[static_cast<size_t>(i)];
                break;
            }
            case InterpKind::NLinear: {
                out.pl.h = h;
                out.pl.nodes.resize(2, N + 1);
                for (int i = 0; i <= N; ++i) out.pl.nodes.col(i) = snap.loads.n[static_cast<size_t>(i)];
                break;
            }
            case InterpKind::MLinear: {
                out.pl.h = h;
                out.pl.nodes = snap.loads.m.transpose();
                break;
            }
            case InterpKind::ThetaLinear: {
                out.pl.h = h;
                out.pl.nodes = detail::theta_linear_nodes(c).transpose();
                break;
            }
            case InterpKind::ThetaPC: {
                out.pc.h = h;
                out.pc.cells_data = c.theta.transpose();
                break;
            }
            case InterpKind::MPC: {
                out.pc.h = h;
                out.pc.cells_data = snap.loads.m.head(N).transpose();
                break;
            }
            case InterpKind::RHat: {
                out.rhat = RHatCurve::build(snap.params, c);
                break;
            }
        }
        return out;
    }

    bool piecewise_constant() const {
        return kind == InterpKind::ThetaPC || kind == InterpKind::MPC;
    }

    /// Pointwise value (d components, d = 1 or 2 depending on the kind).
    VecX eval(double s) const {
        if (kind == InterpKind::RHat) return rhat.eval(s);
        return piecewise_constant() ? pc.eval(s) : pl.eval(s);
    }
};

}  // namespace nlink

#endif  // NLINK_INTERPOLANTS_HPP
