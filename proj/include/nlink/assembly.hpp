/**
 * @file assembly.hpp
 * @brief Assembly of the kinematic matrix G(X), the block system of the
 *        differential-algebraic formulation, its reduction to B(X) Xdot = F,
 *        and the mobility form M(X).
 *
 * Unknown ordering follows X = (theta_1..theta_N, r1x, r1y). The force
 * unknowns are eliminated by block back-substitution: the bidiagonal force
 * block is inverted as a suffix sum, never as a dense inverse.
 */

#ifndef NLINK_ASSEMBLY_HPP
#define NLINK_ASSEMBLY_HPP

#include "nlink/geometry.hpp"
#include "nlink/types.hpp"

#include <limits>

namespace nlink {

// ---------------------------------------------------------------------------
// Kinematic matrix
// ---------------------------------------------------------------------------

/// Dense (2N) x (N+2) map from Xdot to the segment midpoint velocities.
struct KinematicMatrix {
    MatX entries;

    /// Midpoint velocity of segment i (0-based) under generalized velocity w.
    Vec2 apply(const VecX& w, int i) const { return entries.middleRows(2 * i, 2) * w; }
};

/// Row pair i of G maps W to
///   (W_{N+1}, W_{N+2})' + h sum_{k<i} e_perp(theta_k) W_k + (h/2) e_perp(theta_i) W_i,
/// i.e. the Jacobian of the segment midpoints with respect to X.
inline KinematicMatrix assemble_G(const PhysParams& p, const Configuration& c) {
    const int N = c.N;
    const double h = link_length(p, c);
    MatX G = MatX::Zero(2 * N, N + 2);
    for (int i = 0; i < N; ++i) {
        for (int k = 0; k < i; ++k) G.block<2, 1>(2 * i, k) = h * unit_normal(c.theta(k));
        G.block<2, 1>(2 * i, i) = 0.5 * h * unit_normal(c.theta(i));
        G(2 * i, N) = 1.0;
        G(2 * i + 1, N + 1) = 1.0;
    }
    return KinematicMatrix{std::move(G)};
}

// ---------------------------------------------------------------------------
// Block system
// ---------------------------------------------------------------------------

/// The matrices of the full differential-algebraic block system. Mostly used
/// by tests and diagnostics; the reduction below exploits structure instead.
struct Blocks {
    MatX A11;  ///< 2N x 2N, bidiagonal blocks -I2 / +I2 (force differences)
    MatX A12;  ///< 2N x (N+2), h * blockdiag(C(theta_i)) * G
    MatX A21;  ///< (N+2) x 2N, (h/2) e_perp rows plus the proximal I2 rows
    MatX A22;  ///< (N+2) x (N+2), -(h^3/12) c_perp on the theta diagonal
    MatX A23;  ///< (N+2) x N, moment difference stencil
    VecX F3;   ///< N elastic moments (E/h)(0, th2-th1, ..., thN-th_{N-1})
};

inline Blocks assemble_blocks(const PhysParams& p, const Configuration& c) {
    const int N = c.N;
    const double h = link_length(p, c);
    Blocks b;

    b.A11 = MatX::Zero(2 * N, 2 * N);
    for (int i = 0; i < N; ++i) {
        b.A11.block<2, 2>(2 * i, 2 * i) = -Mat2::Identity();
        if (i + 1 < N) b.A11.block<2, 2>(2 * i, 2 * (i + 1)) = Mat2::Identity();
    }

    const KinematicMatrix G = assemble_G(p, c);
    b.A12.resize(2 * N, N + 2);
    for (int i = 0; i < N; ++i)
        b.A12.middleRows(2 * i, 2) = h * drag_matrix(p, c.theta(i)) * G.entries.middleRows(2 * i, 2);

    b.A21 = MatX::Zero(N + 2, 2 * N);
    for (int i = 0; i < N; ++i) {
        const Vec2 np = 0.5 * h * unit_normal(c.theta(i));
        b.A21.block<1, 2>(i, 2 * i) = np.transpose();
        if (i + 1 < N) b.A21.block<1, 2>(i, 2 * (i + 1)) = np.transpose();
    }
    // proximal force rows (n_1 = 0 under free boundary conditions)
    b.A21(N, 0) = 1.0;
    b.A21(N + 1, 1) = 1.0;

    b.A22 = MatX::Zero(N + 2, N + 2);
    const double torque_coeff = h * h * h / 12.0 * p.c_perp;
    for (int i = 0; i < N; ++i) b.A22(i, i) = -torque_coeff;

    b.A23 = MatX::Zero(N + 2, N);
    for (int i = 0; i < N; ++i) {
        b.A23(i, i) = -1.0;
        if (i + 1 < N) b.A23(i, i + 1) = 1.0;
    }

    b.F3 = VecX::Zero(N);
    for (int i = 1; i < N; ++i) b.F3(i) = p.E / h * (c.theta(i) - c.theta(i - 1));

    return b;
}

// ---------------------------------------------------------------------------
// Reduction
// ---------------------------------------------------------------------------

/// Indices of the free velocity unknowns for a boundary condition. Pinned
/// removes r1, clamped additionally removes theta_1, matching the unknown
/// removal used in the well-posedness argument.
inline std::vector<int> free_velocity_indices(BoundaryCondition bc, int N) {
    std::vector<int> idx;
    switch (bc) {
        case BoundaryCondition::Free:
            idx.resize(static_cast<size_t>(N) + 2);
            for (int i = 0; i < N + 2; ++i) idx[static_cast<size_t>(i)] = i;
            break;
        case BoundaryCondition::Pinned:
            idx.resize(static_cast<size_t>(N));
            for (int i = 0; i < N; ++i) idx[static_cast<size_t>(i)] = i;
            break;
        case BoundaryCondition::Clamped:
            idx.resize(static_cast<size_t>(N) - 1);
            for (int i = 1; i < N; ++i) idx[static_cast<size_t>(i - 1)] = i;
            break;
    }
    return idx;
}

/// Square reduced system B(X) Xdot = rhs, already restricted to the free
/// unknowns of the boundary condition. Keeps the LU factorization for solves.
struct ReducedSystem {
    MatX B;
    VecX rhs;
    BoundaryCondition bc = BoundaryCondition::Free;
    double cond_estimate = 0.0;
    Eigen::PartialPivLU<MatX> lu;

    /// Solution of B x = rhs in reduced coordinates.
    VecX solve() const { return lu.solve(rhs); }
    VecX solve(const VecX& b) const { return lu.solve(b); }
};

namespace detail {

/// B and rhs over the full N+2 unknown set (free boundary conditions),
/// built columnwise with the suffix-sum elimination of the force block.
inline void reduce_full(const PhysParams& p, const Configuration& c, MatX& B, VecX& rhs) {
    const int N = c.N;
    const double h = link_length(p, c);
    const KinematicMatrix G = assemble_G(p, c);

    // A12 = h C G, blockwise
    MatX A12(2 * N, N + 2);
    for (int i = 0; i < N; ++i)
        A12.middleRows(2 * i, 2).noalias() =
            h * drag_matrix(p, c.theta(i)) * G.entries.middleRows(2 * i, 2);

    // S = A11^{-1} A12: block back-substitution, S_i = -sum_{k>=i} (A12)_k
    MatX S(2 * N, N + 2);
    S.middleRows(2 * (N - 1), 2) = -A12.middleRows(2 * (N - 1), 2);
    for (int i = N - 2; i >= 0; --i)
        S.middleRows(2 * i, 2) = S.middleRows(2 * (i + 1), 2) - A12.middleRows(2 * i, 2);

    // B = A22 - A21 S
    B = MatX::Zero(N + 2, N + 2);
    const double torque_coeff = h * h * h / 12.0 * p.c_perp;
    for (int i = 0; i < N; ++i) {
        const Vec2 np = unit_normal(c.theta(i));
        Eigen::RowVectorXd pair = S.row(2 * i) * np.x() + S.row(2 * i + 1) * np.y();
        if (i + 1 < N)
            pair += S.row(2 * (i + 1)) * np.x() + S.row(2 * (i + 1) + 1) * np.y();
        B.row(i) = -0.5 * h * pair;
        B(i, i) -= torque_coeff;
    }
    B.row(N) = -S.row(0);
    B.row(N + 1) = -S.row(1);

    // rhs = -A23 F3, with F3 the elastic moments
    rhs = VecX::Zero(N + 2);
    const double k = p.E / h;
    for (int i = 0; i < N; ++i) {
        const double mi = (i >= 1) ? k * (c.theta(i) - c.theta(i - 1)) : 0.0;
        const double mip1 = (i + 1 < N) ? k * (c.theta(i + 1) - c.theta(i)) : 0.0;
        rhs(i) = mi - mip1;
    }
}

}  // namespace detail

/// Builds the reduced system for the configuration's boundary condition.
/// With factorize (the default) the LU factorization and a condition estimate
/// are computed, throwing SingularSystem if the estimate exceeds 1/(64 eps);
/// factorize = false assembles only B and rhs (solve() is then unusable),
/// which is what iterative callers evaluating many trial states need.
inline ReducedSystem reduce(const PhysParams& p, const Configuration& c, bool factorize = true) {
    c.validate();
    p.validate();

    MatX Bfull;
    VecX rhs_full;
    detail::reduce_full(p, c, Bfull, rhs_full);

    ReducedSystem sys;
    sys.bc = c.bc;
    const std::vector<int> idx = free_velocity_indices(c.bc, c.N);
    const int n = static_cast<int>(idx.size());
    sys.B.resize(n, n);
    sys.rhs.resize(n);
    for (int a = 0; a < n; ++a) {
        sys.rhs(a) = rhs_full(idx[static_cast<size_t>(a)]);
        for (int bcol = 0; bcol < n; ++bcol)
            sys.B(a, bcol) = Bfull(idx[static_cast<size_t>(a)], idx[static_cast<size_t>(bcol)]);
    }
    if (!factorize) return sys;

    sys.lu.compute(sys.B);
    const double rc = sys.lu.rcond();
    sys.cond_estimate = (rc > 0.0) ? 1.0 / rc : std::numeric_limits<double>::infinity();
    const double eps = std::numeric_limits<double>::epsilon();
    if (!(sys.cond_estimate < 1.0 / (64.0 * eps)))
        throw SingularSystem("reduce: condition estimate " + std::to_string(sys.cond_estimate) +
                             " exceeds 1/(64 eps)");
    return sys;
}

/// Scatters a reduced velocity vector back to the full N+2 layout, zeros in
/// the constrained slots.
inline VecX embed_velocity(BoundaryCondition bc, int N, const VecX& reduced) {
    VecX full = VecX::Zero(N + 2);
    const std::vector<int> idx = free_velocity_indices(bc, N);
    for (size_t a = 0; a < idx.size(); ++a) full(idx[a]) = reduced(static_cast<Eigen::Index>(a));
    return full;
}

// ---------------------------------------------------------------------------
// Mobility
// ---------------------------------------------------------------------------

/// Symmetric positive semidefinite quadratic form of the dissipation rate,
/// M = (h^3/12) c_perp diag(1..1,0,0) - h G' C G.
struct MobilityMatrix {
    MatX M;
};

inline MobilityMatrix mobility(const PhysParams& p, const Configuration& c) {
    const int N = c.N;
    const double h = link_length(p, c);
    const KinematicMatrix G = assemble_G(p, c);

    MatX CG(2 * N, N + 2);
    for (int i = 0; i < N; ++i)
        CG.middleRows(2 * i, 2).noalias() =
            drag_matrix(p, c.theta(i)) * G.entries.middleRows(2 * i, 2);

    MatX M = -h * G.entries.transpose() * CG;
    const double torque_coeff = h * h * h / 12.0 * p.c_perp;
    for (int i = 0; i < N; ++i) M(i, i) += torque_coeff;
    return MobilityMatrix{std::move(M)};
}

}  // namespace nlink

#endif  // NLINK_ASSEMBLY_HPP
