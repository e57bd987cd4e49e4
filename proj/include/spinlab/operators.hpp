#pragma once

#include <stdexcept>
#include <string>

#include "spinlab/types.hpp"

namespace spinlab {

enum class Axis { x, y, z };

inline const char* axis_name(Axis a) {
    switch (a) {
        case Axis::x: return "Jx";
        case Axis::y: return "Jy";
        case Axis::z: return "Jz";
    }
    return "?";
}

enum class OperatorLabel { Jx, Jy, Jz, custom };

/// Collective spin observable on the symmetric subspace, (N+1)x(N+1) Hermitian.
struct CollectiveOperator {
    int n_particles = 0;
    OperatorLabel label = OperatorLabel::custom;
    CMatrix matrix;

    int dim() const { return n_particles + 1; }
};

inline void require_hermitian(const CMatrix& m, double tol = 1e-12) {
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("operator is not Hermitian");
}

inline CollectiveOperator custom_operator(int n_particles, CMatrix m) {
    if (m.rows() != n_particles + 1 || m.cols() != n_particles + 1)
        throw std::invalid_argument("operator dimension does not match N+1");
    require_hermitian(m);
    return {n_particles, OperatorLabel::custom, std::move(m)};
}

/// J+|k> = c_k |k+1> with c_k = sqrt(j(j+1) - m_k(m_k+1)), j = N/2.
inline Vector ladder_coefficients(int n_particles) {
    const double j = n_particles / 2.0;
    Vector c(n_particles);
    for (int k = 0; k < n_particles; ++k) {
        const double m = k - j;
        c[k] = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    return c;
}

/// Jx, Jy, Jz in the Jz eigenbasis (k = 0..N ascending in m).
inline CollectiveOperator make_collective_operator(int n_particles, Axis axis) {
    if (n_particles < 1)
        throw std::invalid_argument("make_collective_operator: N must be >= 1");
    const int d = n_particles + 1;
    CMatrix m = CMatrix::Zero(d, d);
    if (axis == Axis::z) {
        const Vector lat = spin_lattice(n_particles);
        for (int k = 0; k < d; ++k) m(k, k) = lat[k];
        return {n_particles, OperatorLabel::Jz, std::move(m)};
    }
    const Vector c = ladder_coefficients(n_particles);
    for (int k = 0; k < n_particles; ++k) {
        if (axis == Axis::x) {
            m(k + 1, k) = c[k] / 2.0;
            m(k, k + 1) = c[k] / 2.0;
        } else {
            m(k + 1, k) = -imag_unit * c[k] / 2.0;
            m(k, k + 1) = imag_unit * c[k] / 2.0;
        }
    }
    return {n_particles, axis == Axis::x ? OperatorLabel::Jx : OperatorLabel::Jy, std::move(m)};
}

} // namespace spinlab
