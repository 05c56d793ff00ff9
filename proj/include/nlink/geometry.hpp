/**
 * @file geometry.hpp
 * @brief Discrete geometry of the chain: drag operator, vertex
 *        reconstruction, elastic energy and its derivatives.
 */

#ifndef NLINK_GEOMETRY_HPP
#define NLINK_GEOMETRY_HPP

#include "nlink/types.hpp"

namespace nlink {

inline Vec2 unit_tangent(double theta) { return Vec2(std::cos(theta), std::sin(theta)); }
inline Vec2 unit_normal(double theta) { return Vec2(-std::sin(theta), std::cos(theta)); }

/// Scalar z-component of the planar cross product a x b.
inline double cross_z(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Local anisotropic drag operator
///   C(theta) = -[c_perp e_perp e_perp' + c_par e_par e_par'],
/// symmetric with eigenvalues exactly {-c_par, -c_perp} and pi-periodic.
inline Mat2 drag_matrix(const PhysParams& p, double theta) {
    const Vec2 t = unit_tangent(theta);
    Mat2 C = -p.c_perp * Mat2::Identity();
    C.noalias() -= (p.c_par - p.c_perp) * t * t.transpose();
    return C;
}

/// Vertex positions r_1..r_{N+1} from the first vertex and the angles.
/// Consecutive distances equal h by construction.
inline std::vector<Vec2> vertices(const PhysParams& p, const Configuration& c) {
    const double h = link_length(p, c);
    std::vector<Vec2> r(static_cast<size_t>(c.N) + 1);
    r[0] = c.r1;
    for (int i = 0; i < c.N; ++i) r[i + 1] = r[i] + h * unit_tangent(c.theta(i));
    return r;
}

/// Segment midpoints r_{i+1/2}, i = 1..N.
inline std::vector<Vec2> midpoints(const PhysParams& p, const Configuration& c) {
    const double h = link_length(p, c);
    std::vector<Vec2> mid(static_cast<size_t>(c.N));
    Vec2 r = c.r1;
    for (int i = 0; i < c.N; ++i) {
        const Vec2 step = h * unit_tangent(c.theta(i));
        mid[i] = r + 0.5 * step;
        r += step;
    }
    return mid;
}

/// Bending energy (E/2) sum_i h ((theta_{i+1}-theta_i)/h)^2.
/// Zero iff all angles are equal (straight chain).
inline double elastic_energy(const PhysParams& p, const Configuration& c) {
    const double h = link_length(p, c);
    double acc = 0.0;
    for (int i = 0; i + 1 < c.N; ++i) {
        const double d = c.theta(i + 1) - c.theta(i);
        acc += d * d;
    }
    return 0.5 * p.E / h * acc;
}

/// Gradient of the bending energy with respect to X = (theta, r1); the two
/// r1 slots are identically zero.
inline VecX elastic_energy_gradient(const PhysParams& p, const Configuration& c) {
    const double h = link_length(p, c);
    const double k = p.E / h;
    VecX g = VecX::Zero(c.N + 2);
    for (int i = 0; i + 1 < c.N; ++i) {
        const double d = c.theta(i + 1) - c.theta(i);
        g(i) -= k * d;
        g(i + 1) += k * d;
    }
    return g;
}

/// Constant Hessian of the bending energy (second-difference stencil in the
/// theta block, zero elsewhere). Used by the implicit integrator.
inline MatX elastic_energy_hessian(const PhysParams& p, const Configuration& c) {
    const double h = link_length(p, c);
    const double k = p.E / h;
    MatX H = MatX::Zero(c.N + 2, c.N + 2);
    for (int i = 0; i + 1 < c.N; ++i) {
        H(i, i) += k;
        H(i + 1, i + 1) += k;
        H(i, i + 1) -= k;
        H(i + 1, i) -= k;
    }
    return H;
}

}  // namespace nlink

#endif  // NLINK_GEOMETRY_HPP
