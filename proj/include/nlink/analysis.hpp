/**
 * @file analysis.hpp
 * @brief Space-time norms of the interpolants, initial-data construction by
 *        cell averaging, self-convergence studies and weak-form residuals.
 */

#ifndef NLINK_ANALYSIS_HPP
#define NLINK_ANALYSIS_HPP

#include "nlink/interpolants.hpp"

#include <array>
#include <functional>
#include <future>
#include <map>
#include <numeric>

namespace nlink {

// ---------------------------------------------------------------------------
// Quadrature helpers
// ---------------------------------------------------------------------------

namespace quad {

/// 5-point Gauss-Legendre nodes/weights on [-1, 1].
inline const std::array<double, 5>& gl5_nodes() {
    static const std::array<double, 5> x = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
    return x;
}
inline const std::array<double, 5>& gl5_weights() {
    static const std::array<double, 5> w = {0.2369268850561891, 0.4786286704993665,
                                            0.5688888888888889, 0.4786286704993665,
                                            0.2369268850561891};
    return w;
}

/// Integral of f over [a, b] with 5-point Gauss-Legendre.
template <typename F>
double gl5(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int q = 0; q < 5; ++q) acc += gl5_weights()[q] * f(mid + half * gl5_nodes()[q]);
    return half * acc;
}

/// Trapezoid rule over sampled values (t_j, v_j).
inline double trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
    double acc = 0.0;
    for (size_t j = 0; j + 1 < t.size(); ++j)
        acc += 0.5 * (t[j + 1] - t[j]) * (v[j] + v[j + 1]);
    return acc;
}

/// Trapezoid rule with a left-open first cell: the first interval uses only
/// its right endpoint. Initial data that is incompatible with the boundary
/// conditions produces an O(h^-3) velocity/load layer at t = 0 whose true
/// time integral is O(h) (the layer decays on the O(h^4) stiff timescale, far
/// below any sample spacing); weighting the t = 0 sample like an interior one
/// would replace that O(h) contribution by O(dt_sample * h^-3). Dropping the
/// left endpoint of one cell keeps second-order accuracy for smooth data.
inline double trapezoid_open_left(const std::vector<double>& t, const std::vector<double>& v) {
    if (t.size() < 2) return 0.0;
    double acc = (t[1] - t[0]) * v[1];
    for (size_t j = 1; j + 1 < t.size(); ++j)
        acc += 0.5 * (t[j + 1] - t[j]) * (v[j] + v[j + 1]);
    return acc;
}

}  // namespace quad

// ---------------------------------------------------------------------------
// Space-time norms
// ---------------------------------------------------------------------------

enum class Quantity { Value, SpaceDeriv, TimeDeriv };
enum class QtNorm { L2_QT, L2_H1, L2_Linf };

namespace detail {

/// Builds the interpolant of the requested quantity at one sample.
inline Interpolant quantity_interpolant(const PhysParams& p, const TrajectorySample& s,
                                        InterpKind kind, Quantity q) {
    const Snapshot snap = Snapshot::from_sample(p, s);
    if (q != Quantity::TimeDeriv) return Interpolant::build(kind, snap);

    // time-derivative nodal data from the recorded generalized velocity
    Interpolant out;
    out.kind = kind;
    const Configuration& c = s.config;
    const double h = link_length(p, c);
    switch (kind) {
        case InterpKind::RLinear: {
            const std::vector<Vec2> v = vertex_velocities(p, c, s.xdot);
            out.pl.h = h;
            out.pl.nodes.resize(2, c.N + 1);
            for (int i = 0; i <= c.N; ++i) out.pl.nodes.col(i) = v[static_cast<size_t>(i)];
            break;
        }
        case InterpKind::ThetaPC: {
            out.pc.h = h;
            out.pc.cells_data = s.xdot.head(c.N).transpose();
            break;
        }
        case InterpKind::ThetaLinear: {
            VecX nodes(c.N + 1);
            nodes(0) = s.xdot(0);
            nodes.tail(c.N) = s.xdot.head(c.N);
            out.pl.h = h;
            out.pl.nodes = nodes.transpose();
            break;
        }
        default:
            throw std::invalid_argument("time derivative not available for this interpolant kind");
    }
    return out;
}

inline double spatial_norm_sq(const Interpolant& it, Quantity q, QtNorm norm) {
    const bool pc = it.piecewise_constant();
    if (it.kind == InterpKind::RHat)
        throw std::invalid_argument("qt_norms: use RLinear/ThetaLinear for norm evaluation");
    double value_sq = pc ? it.pc.l2_sq() : it.pl.l2_sq();
    double deriv_sq = pc ? 0.0 : it.pl.deriv_l2_sq();
    double sup = pc ? it.pc.linf() : it.pl.linf();
    switch (norm) {
        case QtNorm::L2_QT: return (q == Quantity::SpaceDeriv) ? deriv_sq : value_sq;
        case QtNorm::L2_H1: return value_sq + deriv_sq;
        case QtNorm::L2_Linf: return sup * sup;
    }
    return 0.0;
}

}  // namespace detail

/// Space-time norm over Q_T: exact per-cell spatial integrals, trapezoid in
/// time over the trajectory samples.
inline double qt_norms(const Trajectory& traj, InterpKind kind, Quantity quantity, QtNorm norm) {
    if (traj.samples.size() < 3)
        throw InsufficientSampling("qt_norms: need at least 3 samples for the time quadrature");
    std::vector<double> t, v;
    t.reserve(traj.samples.size());
    v.reserve(traj.samples.size());
    for (const TrajectorySample& s : traj.samples) {
        Quantity build_q = (quantity == Quantity::TimeDeriv) ? Quantity::TimeDeriv : Quantity::Value;
        const Interpolant it = detail::quantity_interpolant(traj.params, s, kind, build_q);
        const Quantity norm_q = (quantity == Quantity::SpaceDeriv) ? Quantity::SpaceDeriv : Quantity::Value;
        t.push_back(s.time);
        v.push_back(detail::spatial_norm_sq(it, norm_q, norm));
    }
    return std::sqrt(quad::trapezoid_open_left(t, v));
}

/// Spatial-only norm of one snapshot (L2 of value or derivative on [0, L]).
inline double snapshot_l2(const Interpolant& it, Quantity q = Quantity::Value) {
    return std::sqrt(detail::spatial_norm_sq(it, q, QtNorm::L2_QT));
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

/// Discretizes a continuous angle profile by cell averaging,
/// theta_i = (1/h) int_{L_i} theta0, with 5-point Gauss-Legendre per cell.
inline Configuration init_from_curve(const std::function<double(double)>& theta0,
                                     const Vec2& r0_start, int N, const PhysParams& p,
                                     BoundaryCondition bc = BoundaryCondition::Free) {
    if (N < 1) throw ConfigError("init_from_curve: N must be >= 1");
    const double h = p.L / static_cast<double>(N);
    VecX theta(N);
    for (int i = 0; i < N; ++i)
        theta(i) = quad::gl5(theta0, i * h, (i + 1) * h) / h;
    return Configuration(N, std::move(theta), r0_start, bc, 0.0);
}

/// The discrete initial-energy constant, (E/2) sum h ((th_{i+1}-th_i)/h)^2.
inline double initial_energy_constant(const PhysParams& p, const Configuration& c) {
    return elastic_energy(p, c);
}

// ---------------------------------------------------------------------------
// Self-convergence study
// ---------------------------------------------------------------------------

struct ConvergenceReport {
    std::vector<int> Ns;
    int N_ref = 0;
    std::vector<double> hs;
    std::map<std::string, std::vector<double>> errors;  ///< per-norm error at each N
    std::map<std::string, double> fitted_orders;        ///< log-log slope vs h
};

namespace detail {

/// Least-squares slope of log(err) against log(h).
inline double fit_order(const std::vector<double>& hs, const std::vector<double>& errs) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t k = 0; k < hs.size(); ++k) {
        if (!(errs[k] > 0.0)) continue;
        const double lx = std::log(hs[k]), ly = std::log(errs[k]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++n;
    }
    if (n < 2) return 0.0;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// L2(Q_T) distance between the same interpolant kind on two trajectories,
/// evaluated on a common fine arclength grid (2-point Gauss per fine cell)
/// and trapezoid in time over the shared sample times.
inline double l2_qt_distance(const Trajectory& a, const Trajectory& b, InterpKind kind,
                             int fine_cells) {
    if (a.samples.size() != b.samples.size())
        throw std::invalid_argument("l2_qt_distance: trajectories must share sample times");
    const double L = a.params.L;
    const double hf = L / static_cast<double>(fine_cells);
    const double g = 0.5 / std::sqrt(3.0);  // 2-point Gauss offsets at mid +- g*hf

    std::vector<double> t, v;
    t.reserve(a.samples.size());
    v.reserve(a.samples.size());
    for (size_t j = 0; j < a.samples.size(); ++j) {
        const Interpolant fa = Interpolant::build(kind, Snapshot::from_sample(a.params, a.samples[j]));
        const Interpolant fb = Interpolant::build(kind, Snapshot::from_sample(b.params, b.samples[j]));
        double acc = 0.0;
        for (int cell = 0; cell < fine_cells; ++cell) {
            const double mid = (cell + 0.5) * hf;
            for (const double off : {-g * hf, g * hf}) {
                const double s = mid + off;
                acc += 0.5 * hf * (fa.eval(s) - fb.eval(s)).squaredNorm();
            }
        }
        t.push_back(a.samples[j].time);
        v.push_back(acc);
    }
    return std::sqrt(quad::trapezoid_open_left(t, v));
}

}  // namespace detail

/// Simulates the same initial profile at each N and at a much finer N_ref,
/// then reports L2(Q_T) errors of r^h, m^{h,z} and n^h against the reference
/// together with fitted orders in h.
inline ConvergenceReport self_convergence(const std::function<double(double)>& theta0,
                                          const PhysParams& p, const IntegratorSpec& spec,
                                          const std::vector<int>& Ns, int N_ref,
                                          BoundaryCondition bc = BoundaryCondition::Free,
                                          int threads = 1) {
    if (Ns.empty()) throw ConfigError("self_convergence: empty N list");
    for (size_t k = 0; k + 1 < Ns.size(); ++k)
        if (Ns[k] >= Ns[k + 1]) throw ConfigError("self_convergence: Ns must be strictly increasing");
    if (N_ref < 4 * Ns.back())
        throw ConfigError("self_convergence: N_ref must be at least 4x the largest N");

    auto run = [&](int N) {
        return simulate(p, init_from_curve(theta0, Vec2::Zero(), N, p, bc), spec);
    };

    std::vector<Trajectory> trajs(Ns.size());
    Trajectory ref;
    if (threads > 1) {
        std::vector<std::future<Trajectory>> futs;
        futs.reserve(Ns.size());
        for (int N : Ns) futs.push_back(std::async(std::launch::async, run, N));
        ref = run(N_ref);
        for (size_t k = 0; k < Ns.size(); ++k) trajs[k] = futs[k].get();
    } else {
        for (size_t k = 0; k < Ns.size(); ++k) trajs[k] = run(Ns[k]);
        ref = run(N_ref);
    }

    ConvergenceReport rep;
    rep.Ns = Ns;
    rep.N_ref = N_ref;
    const int fine_cells = 4 * N_ref;
    std::vector<double> er, em, en;
    for (size_t k = 0; k < Ns.size(); ++k) {
        rep.hs.push_back(p.L / static_cast<double>(Ns[k]));
        er.push_back(detail::l2_qt_distance(trajs[k], ref, InterpKind::RLinear, fine_cells));
        em.push_back(detail::l2_qt_distance(trajs[k], ref, InterpKind::MLinear, fine_cells));
        en.push_back(detail::l2_qt_distance(trajs[k], ref, InterpKind::NLinear, fine_cells));
    }
    rep.errors["r_L2QT"] = er;
    rep.errors["m_L2QT"] = em;
    rep.errors["n_L2QT"] = en;
    for (const auto& [name, errs] : rep.errors)
        rep.fitted_orders[name] = detail::fit_order(rep.hs, errs);
    return rep;
}

// ---------------------------------------------------------------------------
// Weak-form residuals
// ---------------------------------------------------------------------------

/// How the spatial test function enters: smooth phi everywhere (continuous
/// weak form) or the cell-averaged phi-bar with the finite-h torque term
/// (the discrete system, which holds exactly).
enum class TestFunctionMode { Smooth, CellAveraged };

struct WeakFormResiduals {
    double force = 0.0;         ///< force balance equation
    double moment = 0.0;        ///< moment balance equation
    double constitutive = 0.0;  ///< moment-angle relation
};

namespace detail {

struct TestFunction {
    std::function<double(double)> phi;  ///< compactly supported on (0, L)
    std::function<double(double)> psi;  ///< compactly supported on (0, T), arg relative to start
    double phi_l2 = 1.0;
    double psi_l2 = 1.0;
};

/// Fixed test family: one polynomial bump in each variable plus two
/// sine-modulated variants.
inline std::vector<TestFunction> test_family(double L, double T) {
    auto bump_s = [L](double s) { const double u = s * (L - s); return u * u; };
    auto bump_t = [T](double t) { const double u = t * (T - t); return u * u; };
    std::vector<TestFunction> fam;
    fam.push_back({bump_s, bump_t, 1.0, 1.0});
    fam.push_back({[L, bump_s](double s) { return bump_s(s) * std::sin(2.0 * M_PI * s / L); },
                   bump_t, 1.0, 1.0});
    fam.push_back({bump_s,
                   [T, bump_t](double t) { return bump_t(t) * std::sin(2.0 * M_PI * t / T); },
                   1.0, 1.0});
    for (TestFunction& f : fam) {
        double acc_s = 0.0, acc_t = 0.0;
        const int n = 200;
        for (int i = 0; i < n; ++i) {
            acc_s += quad::gl5([&](double s) { const double v = f.phi(s); return v * v; },
                               i * L / n, (i + 1) * L / n);
            acc_t += quad::gl5([&](double t) { const double v = f.psi(t); return v * v; },
                               i * T / n, (i + 1) * T / n);
        }
        f.phi_l2 = std::sqrt(acc_s);
        f.psi_l2 = std::sqrt(acc_t);
    }
    return fam;
}

}  // namespace detail

/// Residuals of the three weak-form equations evaluated with the interpolants
/// in place of (r, n, m), maximized over the fixed test family and normalized
/// by the L2 norms of the test functions.
inline WeakFormResiduals weak_form_residual(const Trajectory& traj,
                                            TestFunctionMode mode = TestFunctionMode::Smooth) {
    if (traj.samples.size() < 3)
        throw InsufficientSampling("weak_form_residual: need at least 3 samples");
    const PhysParams& p = traj.params;
    const double L = p.L;
    const double t0 = traj.samples.front().time;
    const double T = traj.samples.back().time - t0;
    const int N = traj.samples.front().config.N;
    const double h = L / static_cast<double>(N);

    const std::vector<detail::TestFunction> family = detail::test_family(L, T);
    WeakFormResiduals out;

    for (const detail::TestFunction& tf : family) {
        // cell averages of phi
        VecX phi_bar(N);
        for (int i = 0; i < N; ++i)
            phi_bar(i) = quad::gl5(tf.phi, i * h, (i + 1) * h) / h;

        std::vector<double> times;
        std::vector<Vec2> I1;
        std::vector<double> I2, I3;
        for (const TrajectorySample& s : traj.samples) {
            const Snapshot snap = Snapshot::from_sample(p, s);
            const Interpolant n_lin = Interpolant::build(InterpKind::NLinear, snap);
            const Interpolant m_lin = Interpolant::build(InterpKind::MLinear, snap);
            const std::vector<Vec2> rdot = vertex_velocities(p, s.config, s.xdot);

            Vec2 acc1 = Vec2::Zero();
            double acc2 = 0.0, acc3 = 0.0;
            for (int i = 0; i < N; ++i) {
                const double a = i * h, b = (i + 1) * h;
                const Mat2 C = drag_matrix(p, s.config.theta(i));
                const Vec2 ns = n_lin.pl.deriv(i);
                const double ms = m_lin.pl.deriv(i)(0);
                const Vec2 epar = unit_tangent(s.config.theta(i));
                const double theta_s =
                    (i >= 1) ? (s.config.theta(i) - s.config.theta(i - 1)) / h : 0.0;
                const Vec2 ra = rdot[static_cast<size_t>(i)], rb = rdot[static_cast<size_t>(i) + 1];

                auto rdot_at = [&](double ss) {
                    const double w = (ss - a) / h;
                    return Vec2((1.0 - w) * ra + w * rb);
                };
                auto n_at = [&](double ss) { return Vec2(n_lin.pl.eval(ss)); };
                auto m_at = [&](double ss) { return m_lin.pl.eval(ss)(0); };

                if (mode == TestFunctionMode::Smooth) {
                    acc1.x() += quad::gl5([&](double ss) {
                        return (C * rdot_at(ss) + ns).x() * tf.phi(ss); }, a, b);
                    acc1.y() += quad::gl5([&](double ss) {
                        return (C * rdot_at(ss) + ns).y() * tf.phi(ss); }, a, b);
                    acc2 += quad::gl5([&](double ss) {
                        return (ms + cross_z(epar, n_at(ss))) * tf.phi(ss); }, a, b);
                    acc3 += quad::gl5([&](double ss) {
                        return (m_at(ss) - p.E * theta_s) * tf.phi(ss); }, a, b);
                } else {
                    // cell-averaged phi where the discrete identity uses it,
                    // finite-h torque term included
                    acc1.x() += quad::gl5([&](double ss) {
                        return (C * rdot_at(ss) + ns).x() * phi_bar(i); }, a, b);
                    acc1.y() += quad::gl5([&](double ss) {
                        return (C * rdot_at(ss) + ns).y() * phi_bar(i); }, a, b);
                    acc2 += quad::gl5([&](double ss) {
                        return (-h * h / 12.0 * p.c_perp * s.xdot(i) + ms) * tf.phi(ss) +
                               cross_z(epar, n_at(ss)) * phi_bar(i); }, a, b);
                    const double m_bar = s.loads.m(i);
                    acc3 += quad::gl5([&](double ss) {
                        return (m_bar - p.E * theta_s) * tf.phi(ss); }, a, b);
                }
            }
            times.push_back(s.time - t0);
            I1.push_back(acc1);
            I2.push_back(acc2);
            I3.push_back(acc3);
        }

        auto time_integral = [&](const std::vector<double>& vals) {
            std::vector<double> weighted(vals.size());
            for (size_t j = 0; j < vals.size(); ++j) weighted[j] = vals[j] * tf.psi(times[j]);
            return quad::trapezoid(times, weighted);
        };
        std::vector<double> i1x(I1.size()), i1y(I1.size());
        for (size_t j = 0; j < I1.size(); ++j) { i1x[j] = I1[j].x(); i1y[j] = I1[j].y(); }

        const double scale = tf.phi_l2 * tf.psi_l2;
        out.force = std::max(out.force,
                             std::hypot(time_integral(i1x), time_integral(i1y)) / scale);
        out.moment = std::max(out.moment, std::abs(time_integral(I2)) / scale);
        out.constitutive = std::max(out.constitutive, std::abs(time_integral(I3)) / scale);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Finite-h torque term
// ---------------------------------------------------------------------------

/// L2(Q_T) magnitude of the finite-h hydrodynamic torque coefficient,
/// (h^2/12) c_perp d/dt theta-bar. Vanishes under refinement.
inline double torque_term_magnitude(const Trajectory& traj) {
    if (traj.samples.empty()) throw InsufficientSampling("torque_term_magnitude: empty trajectory");
    const int N = traj.samples.front().config.N;
    const double h = traj.params.L / static_cast<double>(N);
    std::vector<double> t, v;
    for (const TrajectorySample& s : traj.samples) {
        t.push_back(s.time);
        v.push_back(h * s.xdot.head(N).squaredNorm());
    }
    return h * h / 12.0 * traj.params.c_perp * std::sqrt(quad::trapezoid_open_left(t, v));
}

}  // namespace nlink

#endif  // NLINK_ANALYSIS_HPP
