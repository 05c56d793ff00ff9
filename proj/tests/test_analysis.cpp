#include <nlink/analysis.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace nlink;

namespace {

Trajectory relax_arc(const PhysParams& p, int N, double amplitude, double T, int samples,
                     double dt = 1e-4) {
    const Configuration c =
        init_from_curve([&](double s) { return amplitude * s / p.L; }, Vec2::Zero(), N, p);
    IntegratorSpec spec;
    spec.scheme = Scheme::BackwardEuler;
    spec.dt = dt;
    spec.t_end = T;
    spec.samples = samples;
    return simulate(p, c, spec);
}

Snapshot make_snapshot(const PhysParams& p, const Configuration& c) {
    const VelocitySolution sol = solve_velocity(p, c);
    return Snapshot{p, c, sol.loads, sol.xdot};
}

}  // namespace

TEST_CASE("interpolants reproduce their nodal data") {
    PhysParams p;
    p.L = 1.5;
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> ang(-1.0, 1.0);
    VecX th(6);
    for (int i = 0; i < 6; ++i) th(i) = ang(rng);
    const Configuration c(6, th, Vec2(0.2, -0.1));
    const Snapshot snap = make_snapshot(p, c);
    const double h = link_length(p, c);

    const Interpolant r = Interpolant::build(InterpKind::RLinear, snap);
    const auto verts = vertices(p, c);
    for (int i = 0; i <= 6; ++i)
        REQUIRE((r.eval(i * h) - VecX(verts[static_cast<size_t>(i)])).norm() < 1e-13);

    const Interpolant n = Interpolant::build(InterpKind::NLinear, snap);
    for (int i = 0; i <= 6; ++i)
        REQUIRE((n.eval(i * h) - VecX(snap.loads.n[static_cast<size_t>(i)])).norm() < 1e-12);

    const Interpolant tpc = Interpolant::build(InterpKind::ThetaPC, snap);
    for (int i = 0; i < 6; ++i) REQUIRE(tpc.eval((i + 0.5) * h)(0) == c.theta(i));
}

TEST_CASE("theta interpolant: hand-evaluated midcell value") {
    PhysParams p;  // L = 1
    VecX th(2);
    th << 0.0, M_PI / 2.0;
    const Configuration c(2, th, Vec2::Zero());
    const Snapshot snap = make_snapshot(p, c);
    const Interpolant tl = Interpolant::build(InterpKind::ThetaLinear, snap);
    // nodes carry theta_1 at s = 0 and h, theta_2 at s = 2h, so the value
    // halfway through the second cell is the plain average of the two angles
    REQUIRE(tl.eval(0.75)(0) == Catch::Approx(M_PI / 4.0).epsilon(1e-14));
    // first cell is constant at theta_1
    REQUIRE(tl.eval(0.0)(0) == 0.0);
    REQUIRE(tl.eval(0.25)(0) == 0.0);
}

TEST_CASE("r_hat: unit-speed curve that matches r_linear when straight") {
    PhysParams p;
    const Configuration straight(4, VecX::Constant(4, 0.9), Vec2(1.0, 1.0));
    const Snapshot s1 = make_snapshot(p, straight);
    const Interpolant rh = Interpolant::build(InterpKind::RHat, s1);
    const Interpolant rl = Interpolant::build(InterpKind::RLinear, s1);
    for (double s = 0.0; s <= 1.0; s += 0.05)
        REQUIRE((rh.eval(s) - rl.eval(s)).norm() < 1e-13);

    std::mt19937 rng(9);
    std::uniform_real_distribution<double> ang(-2.0, 2.0);
    VecX th(5);
    for (int i = 0; i < 5; ++i) th(i) = ang(rng);
    const Snapshot s2 = make_snapshot(p, Configuration(5, th, Vec2::Zero()));
    const Interpolant rh2 = Interpolant::build(InterpKind::RHat, s2);
    for (double s = 0.01; s < 1.0; s += 0.07)
        REQUIRE(rh2.rhat.deriv(s).norm() == Catch::Approx(1.0).epsilon(1e-13));
    // derivative is the unit tangent of the angle interpolant
    for (double s = 0.01; s < 1.0; s += 0.07)
        REQUIRE((rh2.rhat.deriv(s) - unit_tangent(rh2.rhat.theta_at(s))).norm() < 1e-13);
}

TEST_CASE("moment interpolant equals E times the angle slope inside cells") {
    PhysParams p;
    p.E = 2.0;
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> ang(-1.0, 1.0);
    VecX th(8);
    for (int i = 0; i < 8; ++i) th(i) = ang(rng);
    const Configuration c(8, th, Vec2::Zero());
    const Snapshot snap = make_snapshot(p, c);
    const Interpolant mpc = Interpolant::build(InterpKind::MPC, snap);
    const Interpolant tl = Interpolant::build(InterpKind::ThetaLinear, snap);
    const double h = link_length(p, c);
    double scale = 0.0;
    for (int i = 0; i < 8; ++i) scale = std::max(scale, std::abs(snap.loads.m(i)));
    for (int i = 0; i < 8; ++i) {
        const double s = (i + 0.5) * h;
        REQUIRE(std::abs(mpc.eval(s)(0) - p.E * tl.pl.deriv_at(s)(0)) <= 1e-12 * (1.0 + scale));
    }
}

TEST_CASE("frozen spatial norms") {
    PhysParams p;  // E = 1, L = 1
    VecX th(3);
    th << 0.0, 0.1, 0.3;
    const Configuration c(3, th, Vec2::Zero());
    const Snapshot snap = make_snapshot(p, c);
    // the squared L2 norm of the angle slope equals twice the elastic energy
    const Interpolant tl = Interpolant::build(InterpKind::ThetaLinear, snap);
    REQUIRE(tl.pl.deriv_l2_sq() == Catch::Approx(0.15).epsilon(1e-13));
    REQUIRE(tl.pl.deriv_l2_sq() ==
            Catch::Approx(2.0 * elastic_energy(p, c) / p.E).epsilon(1e-13));
}

TEST_CASE("qt_norms: unit tangent and stationary chain") {
    PhysParams p;
    const double T = 0.1;
    Trajectory traj = relax_arc(p, 5, 0.8, T, 11, 1e-3);
    // |d/ds r^h| = 1 exactly, so its L2(Q_T) norm is sqrt(L T)
    REQUIRE(qt_norms(traj, InterpKind::RLinear, Quantity::SpaceDeriv, QtNorm::L2_QT) ==
            Catch::Approx(std::sqrt(p.L * T)).epsilon(1e-12));

    IntegratorSpec spec;
    spec.scheme = Scheme::BackwardEuler;
    spec.dt = 1e-3;
    spec.t_end = T;
    spec.samples = 11;
    const Trajectory stat = simulate(p, Configuration(5, VecX::Zero(5), Vec2::Zero()), spec);
    REQUIRE(qt_norms(stat, InterpKind::RLinear, Quantity::TimeDeriv, QtNorm::L2_QT) <= 1e-12);

    Trajectory tiny = traj;
    tiny.samples.resize(2);
    REQUIRE_THROWS_AS(qt_norms(tiny, InterpKind::RLinear, Quantity::Value, QtNorm::L2_QT),
                      InsufficientSampling);
}

TEST_CASE("per-snapshot interpolation inequalities") {
    PhysParams p;
    p.E = 1.3;
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> ang(-1.2, 1.2);
    for (int N : {6, 12, 24}) {
        VecX th(N);
        for (int i = 0; i < N; ++i) th(i) = ang(rng);
        const Configuration c(N, th, Vec2::Zero());
        const Snapshot snap = make_snapshot(p, c);
        const double h = link_length(p, c);

        const Interpolant tpc = Interpolant::build(InterpKind::ThetaPC, snap);
        const Interpolant tl = Interpolant::build(InterpKind::ThetaLinear, snap);
        const Interpolant mpc = Interpolant::build(InterpKind::MPC, snap);
        const Interpolant ml = Interpolant::build(InterpKind::MLinear, snap);

        // || theta_bar - theta^h || <= (h / sqrt(3) E) || m_bar ||
        double diff_sq = 0.0;
        for (int i = 0; i < N; ++i) {
            // on cell i the difference is affine with values (theta_i - node_i, theta_i - node_{i+1})
            const double a = c.theta(i) - tl.pl.nodes(0, i);
            const double b = c.theta(i) - tl.pl.nodes(0, i + 1);
            diff_sq += h / 3.0 * (a * a + a * b + b * b);
        }
        REQUIRE(std::sqrt(diff_sq) <=
                h / (std::sqrt(3.0) * p.E) * std::sqrt(mpc.pc.l2_sq()) + 1e-14);

        // || m_bar - m^h || <= sqrt(h/3) || d/ds m^h ||
        double mdiff_sq = 0.0;
        for (int i = 0; i < N; ++i) {
            const double a = mpc.pc.cells_data(0, i) - ml.pl.nodes(0, i);
            const double b = mpc.pc.cells_data(0, i) - ml.pl.nodes(0, i + 1);
            mdiff_sq += h / 3.0 * (a * a + a * b + b * b);
        }
        REQUIRE(std::sqrt(mdiff_sq) <=
                std::sqrt(h / 3.0) * std::sqrt(ml.pl.deriv_l2_sq()) + 1e-14);
    }
}

TEST_CASE("init_from_curve: exact cell averages") {
    PhysParams p;
    const Configuration cc = init_from_curve([](double) { return 0.4; }, Vec2::Zero(), 7, p);
    for (int i = 0; i < 7; ++i) REQUIRE(cc.theta(i) == Catch::Approx(0.4).epsilon(1e-14));

    const Configuration cl = init_from_curve([](double s) { return s; }, Vec2::Zero(), 2, p);
    REQUIRE(cl.theta(0) == Catch::Approx(0.25).epsilon(1e-14));
    REQUIRE(cl.theta(1) == Catch::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("init_from_curve: energy constant bounded uniformly in N") {
    PhysParams p;
    const double bound = 0.5 * p.E * M_PI * M_PI * p.L;  // (E/2) L ||theta0_s||_inf^2
    for (int N : {10, 20, 40}) {
        const Configuration c =
            init_from_curve([](double s) { return M_PI * s; }, Vec2::Zero(), N, p);
        REQUIRE(elastic_energy(p, c) <= bound * 1.0000001);
    }
}

TEST_CASE("self_convergence: constant profile gives zero errors, bad input throws") {
    PhysParams p;
    IntegratorSpec spec;
    spec.scheme = Scheme::BackwardEuler;
    spec.dt = 1e-3;
    spec.t_end = 0.01;
    spec.samples = 6;
    const auto theta0 = [](double) { return 0.3; };

    const ConvergenceReport rep = self_convergence(theta0, p, spec, {4, 8}, 32);
    for (const auto& [name, errs] : rep.errors)
        for (double e : errs) REQUIRE(e <= 1e-12);

    REQUIRE_THROWS_AS(self_convergence(theta0, p, spec, {8, 4}, 64), ConfigError);
    REQUIRE_THROWS_AS(self_convergence(theta0, p, spec, {4, 8}, 16), ConfigError);
}

TEST_CASE("weak-form residuals: exact for cell-averaged tests, zero when stationary") {
    PhysParams p;
    IntegratorSpec spec;
    spec.scheme = Scheme::BackwardEuler;
    spec.dt = 1e-3;
    spec.t_end = 0.05;
    spec.samples = 11;
    const Trajectory stat = simulate(p, Configuration(6, VecX::Zero(6), Vec2::Zero()), spec);
    const WeakFormResiduals rs = weak_form_residual(stat, TestFunctionMode::Smooth);
    REQUIRE(rs.force <= 1e-12);
    REQUIRE(rs.moment <= 1e-12);
    REQUIRE(rs.constitutive <= 1e-12);

    const Trajectory traj = relax_arc(p, 8, 1.0, 0.02, 21, 2e-4);
    const WeakFormResiduals rd = weak_form_residual(traj, TestFunctionMode::CellAveraged);
    // the discrete balance laws hold exactly in space; what remains is the
    // time-quadrature error of the trapezoid rule
    const WeakFormResiduals rsm = weak_form_residual(traj, TestFunctionMode::Smooth);
    REQUIRE(rd.force <= 1e-6);
    REQUIRE(rd.moment <= 1e-6);
    REQUIRE(rd.constitutive <= 1e-12);
    REQUIRE(rd.force <= 0.5 * std::max(rsm.force, 1e-12));
}

TEST_CASE("torque term magnitude vanishes for stationary chains") {
    PhysParams p;
    IntegratorSpec spec;
    spec.scheme = Scheme::BackwardEuler;
    spec.dt = 1e-3;
    spec.t_end = 0.01;
    spec.samples = 5;
    const Trajectory stat = simulate(p, Configuration(4, VecX::Zero(4), Vec2::Zero()), spec);
    REQUIRE(torque_term_magnitude(stat) == 0.0);

    const Trajectory traj = relax_arc(p, 8, 1.0, 0.01, 11, 2e-4);
    REQUIRE(torque_term_magnitude(traj) > 0.0);
}
