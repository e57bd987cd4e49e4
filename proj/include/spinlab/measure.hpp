#pragma once

#include <utility>

#include "spinlab/eigenbasis.hpp"
#include "spinlab/state.hpp"

namespace spinlab {

/// Probabilities over the N+1 integer-spaced outcomes of a basis measurement.
struct OutcomeDistribution {
    int n_particles = 0;
    Vector probabilities;

    int dim() const { return n_particles + 1; }
    Vector lattice() const { return spin_lattice(n_particles); }
    double total() const { return probabilities.sum(); }
};

inline OutcomeDistribution measurement_distribution(const DickeState& state,
                                                    const BasisSpec& basis) {
    if (basis.dim() != state.dim())
        throw std::invalid_argument("measurement_distribution: dimension mismatch");
    CVector c = basis.eigenvectors.adjoint() * state.amplitudes;
    Vector p = c.cwiseAbs2();
    for (int k = 0; k < p.size(); ++k)
        if (p[k] < 0) p[k] = 0;  // clamp -0.0 / rounding dust
    return {state.n_particles, std::move(p)};
}

/// (<G>, Var G) as exact quadratic forms.
inline std::pair<double, double> expectation_and_variance(const DickeState& state,
                                                          const CollectiveOperator& op) {
    if (op.dim() != state.dim())
        throw std::invalid_argument("expectation_and_variance: dimension mismatch");
    CVector gpsi = op.matrix * state.amplitudes;
    const double mean = state.amplitudes.dot(gpsi).real();
    const double second = gpsi.squaredNorm();
    return {mean, second - mean * mean};
}

struct ParityResult {
    bool is_eigenstate = false;
    int p = 0;  // sign exponent: Pi |psi> = (-1)^p |psi>
};

/// Tests Pi |psi> = +-|psi> with Pi applying (-1)^(k + offset) in `basis`.
inline ParityResult parity_check(const DickeState& state, const BasisSpec& basis,
                                 double tol = 1e-10) {
    if (tol <= 0) throw std::invalid_argument("parity_check: tol must be positive");
    if (basis.dim() != state.dim())
        throw std::invalid_argument("parity_check: dimension mismatch");
    CVector c = basis.eigenvectors.adjoint() * state.amplitudes;
    double even_mass = 0, odd_mass = 0;
    for (int k = 0; k < c.size(); ++k)
        ((k + basis.parity_index_offset) % 2 == 0 ? even_mass : odd_mass) += std::norm(c[k]);
    if (odd_mass < tol) return {true, 0};
    if (even_mass < tol) return {true, 1};
    return {false, 0};
}

/// True iff Pi G Pi = -G entrywise in `basis` (G connects only opposite-parity outcomes).
inline bool generator_flips_parity(const CollectiveOperator& g, const BasisSpec& basis,
                                   double tol = 1e-10) {
    if (tol <= 0) throw std::invalid_argument("generator_flips_parity: tol must be positive");
    if (g.dim() != basis.dim())
        throw std::invalid_argument("generator_flips_parity: dimension mismatch");
    CMatrix gb = basis.eigenvectors.adjoint() * g.matrix * basis.eigenvectors;
    const double scale = std::max(1.0, gb.cwiseAbs().maxCoeff());
    for (int r = 0; r < gb.rows(); ++r)
        for (int s = 0; s < gb.cols(); ++s)
            if ((r + s) % 2 == 0 && std::abs(gb(r, s)) > tol * scale) return false;
    return true;
}

} // namespace spinlab
