#pragma once

#include <stdexcept>

#include "spinlab/types.hpp"

namespace spinlab {

/// Pure state over the Dicke basis of N two-mode bosons.
/// amplitudes[k] multiplies |j, m_k> with m_k = k - N/2, j = N/2.
struct DickeState {
    int n_particles = 0;
    CVector amplitudes;

    DickeState() = default;
    DickeState(int n, CVector amps) : n_particles(n), amplitudes(std::move(amps)) {
        if (n_particles < 1) throw std::invalid_argument("DickeState: N must be >= 1");
        if (amplitudes.size() != n_particles + 1)
            throw std::invalid_argument("DickeState: amplitude vector must have length N+1");
        const double nrm = amplitudes.norm();
        if (std::abs(nrm - 1.0) > 1e-9)
            throw std::invalid_argument("DickeState: amplitudes are not normalized");
        amplitudes /= nrm;
    }

    int dim() const { return n_particles + 1; }
    double norm() const { return amplitudes.norm(); }

    static DickeState from_amplitudes(int n, CVector amps) {
        const double nrm = amps.norm();
        if (nrm <= 0.0) throw std::invalid_argument("DickeState: zero amplitude vector");
        return DickeState(n, amps / nrm);
    }
};

inline complex overlap(const DickeState& a, const DickeState& b) {
    if (a.n_particles != b.n_particles)
        throw std::invalid_argument("overlap: particle numbers differ");
    return a.amplitudes.dot(b.amplitudes);
}

/// Physical (global-phase-insensitive) equality check.
inline bool same_up_to_phase(const DickeState& a, const DickeState& b, double tol = 1e-10) {
    return std::abs(1.0 - std::abs(overlap(a, b))) < tol;
}

} // namespace spinlab
