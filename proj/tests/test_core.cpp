#include <nlink/geometry.hpp>
#include <nlink/types.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace nlink;

namespace {

Configuration random_config(std::mt19937& rng, int N, double angle_range = M_PI) {
    std::uniform_real_distribution<double> ang(-angle_range, angle_range);
    std::uniform_real_distribution<double> pos(-2.0, 2.0);
    VecX theta(N);
    for (int i = 0; i < N; ++i) theta(i) = ang(rng);
    return Configuration(N, std::move(theta), Vec2(pos(rng), pos(rng)));
}

}  // namespace

TEST_CASE("parameter validation rejects non-physical values") {
    PhysParams p;
    REQUIRE_NOTHROW(p.validate());
    p.L = 0.0;
    REQUIRE_THROWS_AS(p.validate(), ConfigError);
    p.L = 1.0;
    p.c_par = p.c_perp;
    REQUIRE_THROWS_AS(p.validate(), ConfigError);
    p.c_par = -1.0;
    REQUIRE_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("configuration validation") {
    Configuration c(3, VecX::Zero(3), Vec2::Zero());
    REQUIRE_NOTHROW(c.validate());
    c.N = 0;
    REQUIRE_THROWS_AS(c.validate(), ConfigError);
    c.N = 4;  // theta length mismatch
    REQUIRE_THROWS_AS(c.validate(), ConfigError);
    c.N = 3;
    c.theta(1) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("drag matrix eigenvalues and periodicity") {
    PhysParams p;
    p.c_par = 0.7;
    p.c_perp = 1.9;
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> ang(-10.0, 10.0);
    for (int k = 0; k < 50; ++k) {
        const double th = ang(rng);
        const Mat2 C = drag_matrix(p, th);
        REQUIRE((C - C.transpose()).norm() < 1e-15);
        Eigen::SelfAdjointEigenSolver<Mat2> es(C);
        REQUIRE(es.eigenvalues()(0) == Catch::Approx(-1.9).margin(1e-13));
        REQUIRE(es.eigenvalues()(1) == Catch::Approx(-0.7).margin(1e-13));
        REQUIRE((C - drag_matrix(p, th + M_PI)).norm() < 1e-12);
        // action on the local frame
        REQUIRE((C * unit_tangent(th) + p.c_par * unit_tangent(th)).norm() < 1e-13);
        REQUIRE((C * unit_normal(th) + p.c_perp * unit_normal(th)).norm() < 1e-13);
    }
}

TEST_CASE("vertices: equal link lengths and nodal formula") {
    PhysParams p;
    p.L = 2.0;
    std::mt19937 rng(7);
    const Configuration c = random_config(rng, 9);
    const auto r = vertices(p, c);
    REQUIRE(r.size() == 10);
    REQUIRE(r[0] == c.r1);
    const double h = link_length(p, c);
    for (size_t i = 0; i + 1 < r.size(); ++i)
        REQUIRE((r[i + 1] - r[i]).norm() == Catch::Approx(h).epsilon(1e-14));
    // midpoints bisect
    const auto mid = midpoints(p, c);
    for (size_t i = 0; i < mid.size(); ++i)
        REQUIRE((mid[i] - 0.5 * (r[i] + r[i + 1])).norm() < 1e-14);
}

TEST_CASE("elastic energy: frozen value and straight-chain zero") {
    PhysParams p;  // E = 1, L = 1
    VecX th(3);
    th << 0.0, 0.1, 0.3;
    const Configuration c(3, th, Vec2::Zero());
    // (1/2)(E/h)[(0.1)^2 + (0.2)^2] with h = 1/3
    REQUIRE(elastic_energy(p, c) == Catch::Approx(0.075).epsilon(1e-14));

    const Configuration straight(5, VecX::Constant(5, 0.4), Vec2::Zero());
    REQUIRE(elastic_energy(p, straight) == 0.0);
}

TEST_CASE("energy gradient matches central finite differences") {
    PhysParams p;
    p.E = 2.5;
    p.L = 1.7;
    std::mt19937 rng(2024);
    std::uniform_int_distribution<int> nd(2, 20);
    const double delta = 1e-5;
    for (int rep = 0; rep < 100; ++rep) {
        Configuration c = random_config(rng, nd(rng));
        const VecX g = elastic_energy_gradient(p, c);
        REQUIRE(g.size() == c.N + 2);
        REQUIRE(g(c.N) == 0.0);
        REQUIRE(g(c.N + 1) == 0.0);
        double gnorm = g.norm();
        for (int i = 0; i < c.N; ++i) {
            Configuration cp = c, cm = c;
            cp.theta(i) += delta;
            cm.theta(i) -= delta;
            const double fd = (elastic_energy(p, cp) - elastic_energy(p, cm)) / (2.0 * delta);
            REQUIRE(std::abs(g(i) - fd) <= 1e-6 * std::max(1.0, gnorm));
        }
    }
}

TEST_CASE("energy hessian is the gradient's Jacobian") {
    PhysParams p;
    p.E = 0.8;
    std::mt19937 rng(11);
    const Configuration c = random_config(rng, 8);
    const MatX H = elastic_energy_hessian(p, c);
    REQUIRE((H - H.transpose()).norm() < 1e-14);
    const double delta = 1e-6;
    for (int i = 0; i < c.N; ++i) {
        Configuration cp = c, cm = c;
        cp.theta(i) += delta;
        cm.theta(i) -= delta;
        const VecX fd =
            (elastic_energy_gradient(p, cp) - elastic_energy_gradient(p, cm)) / (2.0 * delta);
        REQUIRE((H.col(i) - fd).norm() < 1e-6 * (1.0 + H.norm()));
    }
}
