#pragma once

#include <cmath>

#include "spinlab/eigenbasis.hpp"
#include "spinlab/state.hpp"

namespace spinlab {

/// exp(-i angle J_axis) |psi>, via the cached eigendecomposition of the generator.
inline DickeState rotate(const DickeState& state, Axis axis, double angle) {
    if (!std::isfinite(angle)) throw std::invalid_argument("rotate: angle must be finite");
    const int n = state.n_particles;
    if (axis == Axis::z) {
        const Vector lat = spin_lattice(n);
        CVector amps = state.amplitudes;
        for (int k = 0; k <= n; ++k) amps[k] *= std::exp(-imag_unit * angle * lat[k]);
        return DickeState::from_amplitudes(n, std::move(amps));
    }
    auto basis = axis_basis(n, axis);
    CVector c = basis->eigenvectors.adjoint() * state.amplitudes;
    for (int k = 0; k <= n; ++k) c[k] *= std::exp(-imag_unit * angle * basis->eigenvalues[k]);
    return DickeState::from_amplitudes(n, basis->eigenvectors * c);
}

/// One-axis-twisting phase factor exp(-i chi_t Jz^2): a_k -> a_k exp(-i chi_t m_k^2).
inline DickeState oat_phase(const DickeState& state, double chi_t) {
    if (!std::isfinite(chi_t)) throw std::invalid_argument("oat_phase: chi_t must be finite");
    const Vector lat = spin_lattice(state.n_particles);
    CVector amps = state.amplitudes;
    for (int k = 0; k < amps.size(); ++k)
        amps[k] *= std::exp(-imag_unit * chi_t * lat[k] * lat[k]);
    return DickeState(state.n_particles, std::move(amps));
}

/// Maximal (+) or minimal (-) eigenstate of J_axis.
inline DickeState coherent_state(int n_particles, Axis axis, int sign = +1) {
    if (n_particles < 1) throw std::invalid_argument("coherent_state: N must be >= 1");
    if (sign != +1 && sign != -1) throw std::invalid_argument("coherent_state: sign must be +-1");
    CVector amps = CVector::Zero(n_particles + 1);
    amps[sign > 0 ? n_particles : 0] = 1.0;
    DickeState pole(n_particles, std::move(amps));
    switch (axis) {
        case Axis::z: return pole;
        case Axis::x: return rotate(pole, Axis::y, pi / 2);
        case Axis::y: return rotate(pole, Axis::x, -pi / 2);
    }
    throw std::invalid_argument("coherent_state: bad axis");
}

} // namespace spinlab
