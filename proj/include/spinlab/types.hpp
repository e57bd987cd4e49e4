#pragma once

#include <complex>
#include <Eigen/Dense>

namespace spinlab {

using real = double;
using complex = std::complex<double>;

using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr complex imag_unit{0.0, 1.0};
inline constexpr double pi = 3.14159265358979323846;

/// Dimensionless spin projections m_k = k - N/2 for k = 0..N.
inline Vector spin_lattice(int n_particles) {
    Vector m(n_particles + 1);
    for (int k = 0; k <= n_particles; ++k) m[k] = k - n_particles / 2.0;
    return m;
}

} // namespace spinlab
