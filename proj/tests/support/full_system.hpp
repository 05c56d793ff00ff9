// Independent oracle: assembles and solves the complete block system in all
// its unknowns (contact forces, generalized velocity, contact moments) with a
// generic dense LU, straight from the per-link balance laws. Shares no
// assembly code with the library's reduced solver.

#ifndef NLINK_TESTS_FULL_SYSTEM_HPP
#define NLINK_TESTS_FULL_SYSTEM_HPP

#include <nlink/types.hpp>

#include <Eigen/Dense>

namespace nlink_tests {

struct FullSolution {
    nlink::VecX xdot;            // N+2, zeros in constrained slots
    std::vector<nlink::Vec2> n;  // N+1 joints, proximal first
    nlink::VecX m;               // N+1 joint moments
};

// Midpoint velocity of link i as an explicit linear map of the velocity
// unknowns, written out from the kinematics (not via the library's G).
inline void midpoint_velocity_row(const nlink::PhysParams& p, const nlink::Configuration& c, int i,
                                  Eigen::Matrix<double, 2, Eigen::Dynamic>& row) {
    const int N = c.N;
    const double h = p.L / static_cast<double>(N);
    row.setZero(2, N + 2);
    for (int k = 0; k < i; ++k) {
        row(0, k) = -h * std::sin(c.theta(k));
        row(1, k) = h * std::cos(c.theta(k));
    }
    row(0, i) = -0.5 * h * std::sin(c.theta(i));
    row(1, i) = 0.5 * h * std::cos(c.theta(i));
    row(0, N) = 1.0;
    row(1, N + 1) = 1.0;
}

inline FullSolution solve_full_system(const nlink::PhysParams& p, const nlink::Configuration& c) {
    using nlink::Vec2;
    using nlink::VecX;
    const int N = c.N;
    const double h = p.L / static_cast<double>(N);
    const bool pinned = c.bc == nlink::BoundaryCondition::Pinned;
    const bool clamped = c.bc == nlink::BoundaryCondition::Clamped;

    // velocity unknowns kept, by boundary condition
    std::vector<int> vel;
    for (int k = clamped ? 1 : 0; k < N; ++k) vel.push_back(k);
    if (!pinned && !clamped) {
        vel.push_back(N);
        vel.push_back(N + 1);
    }
    const int nv = static_cast<int>(vel.size());

    // unknown layout: n at joints 0..N-1 (2N), velocities (nv), m at joints 1..N (N)
    const int off_v = 2 * N;
    const int off_m = 2 * N + nv;
    const int dim = 2 * N + nv + N;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    VecX b = VecX::Zero(dim);
    int row = 0;

    Eigen::Matrix<double, 2, Eigen::Dynamic> vel_row;
    auto drag = [&](int i) {
        const double ct = std::cos(c.theta(i)), st = std::sin(c.theta(i));
        Eigen::Matrix2d C;
        C(0, 0) = -(p.c_par * ct * ct + p.c_perp * st * st);
        C(1, 1) = -(p.c_par * st * st + p.c_perp * ct * ct);
        C(0, 1) = C(1, 0) = -(p.c_par - p.c_perp) * ct * st;
        return C;
    };

    // force balance of each link: n_{i+1} - n_i + h C_i rdot_{i+1/2} = 0
    for (int i = 0; i < N; ++i) {
        midpoint_velocity_row(p, c, i, vel_row);
        const Eigen::Matrix<double, 2, Eigen::Dynamic> hCv = h * drag(i) * vel_row;
        for (int a = 0; a < nv; ++a) A.block<2, 1>(row, off_v + a) = hCv.col(vel[a]);
        A.block<2, 2>(row, 2 * i) -= Eigen::Matrix2d::Identity();
        if (i + 1 < N) A.block<2, 2>(row, 2 * (i + 1)) += Eigen::Matrix2d::Identity();
        row += 2;
    }

    // moment balance of each link:
    //   m_{i+1} - m_i + (h/2) e_perp_i . (n_i + n_{i+1}) - (h^3/12) c_perp thetadot_i = 0
    // (skipped for the clamped first link, whose proximal moment is a reaction)
    for (int i = clamped ? 1 : 0; i < N; ++i) {
        const Vec2 ep(-std::sin(c.theta(i)), std::cos(c.theta(i)));
        A.block<1, 2>(row, 2 * i) += 0.5 * h * ep.transpose();
        if (i + 1 < N) A.block<1, 2>(row, 2 * (i + 1)) += 0.5 * h * ep.transpose();
        A(row, off_m + i) += 1.0;            // m at joint i+1
        if (i >= 1) A(row, off_m + i - 1) -= 1.0;  // m at joint i (boundary value 0 for i = 0)
        for (int a = 0; a < nv; ++a)
            if (vel[a] == i) A(row, off_v + a) -= h * h * h / 12.0 * p.c_perp;
        ++row;
    }

    // constitutive law at the interior joints, zero moment at the distal tip
    for (int k = 1; k <= N; ++k) {
        A(row, off_m + k - 1) = 1.0;
        if (k < N) b(row) = p.E / h * (c.theta(k) - c.theta(k - 1));
        ++row;
    }

    // free proximal end: zero proximal contact force
    if (!pinned && !clamped) {
        A(row, 0) = 1.0;
        A(row + 1, 1) = 1.0;
        row += 2;
    }

    if (row != dim) throw std::logic_error("full system row count mismatch");

    const VecX z = A.partialPivLu().solve(b);

    FullSolution sol;
    sol.xdot = VecX::Zero(N + 2);
    for (int a = 0; a < nv; ++a) sol.xdot(vel[a]) = z(off_v + a);
    sol.n.assign(static_cast<size_t>(N) + 1, Vec2::Zero());
    for (int j = 0; j < N; ++j) sol.n[static_cast<size_t>(j)] = z.segment<2>(2 * j);
    sol.m = VecX::Zero(N + 1);
    for (int k = 1; k <= N; ++k) sol.m(k) = z(off_m + k - 1);
    if (clamped) {
        // proximal reaction moment from the skipped balance row
        const Vec2 ep(-std::sin(c.theta(0)), std::cos(c.theta(0)));
        sol.m(0) = sol.m(1) + 0.5 * h * ep.dot(sol.n[0] + sol.n[1]);
    }
    return sol;
}

}  // namespace nlink_tests

#endif  // NLINK_TESTS_FULL_SYSTEM_HPP
