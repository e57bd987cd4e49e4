#pragma once

#include <cmath>
#include <stdexcept>

#include "spinlab/measure.hpp"

namespace spinlab {

inline constexpr double cfi_probability_floor = 1e-12;

/// Raised when a CFI term hits P_k ~ 0 with a non-negligible derivative:
/// the phase point is ill-conditioned for the plain sum.
struct singularity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Squared Hellinger distance 1 - sum_k sqrt(P_k Q_k), in [0, 1].
inline double hellinger_sq(const OutcomeDistribution& p, const OutcomeDistribution& q) {
    if (p.n_particles != q.n_particles)
        throw std::invalid_argument("hellinger_sq: lattice mismatch");
    double affinity = 0;
    for (int k = 0; k < p.dim(); ++k) {
        const double a = std::max(0.0, p.probabilities[k]);
        const double b = std::max(0.0, q.probabilities[k]);
        affinity += std::sqrt(a * b);
    }
    double d = 1.0 - affinity;
    if (d < 0) d = 0;
    if (d > 1) d = 1;
    return d;
}

/// F_C = sum_k dP_k^2 / P_k. Terms with P_k below the floor are skipped when
/// the derivative vanishes with them (exact zeros of the parity structure);
/// a surviving large derivative over a vanishing probability is an error.
inline double cfi_from_distribution_pair(const OutcomeDistribution& p, const Vector& dp) {
    if (dp.size() != p.dim())
        throw std::invalid_argument("cfi_from_distribution_pair: size mismatch");
    if (std::abs(dp.sum()) > 1e-10)
        throw std::invalid_argument("cfi_from_distribution_pair: dP must sum to 0");
    const double droot = std::sqrt(cfi_probability_floor);
    double total = 0;
    for (int k = 0; k < p.dim(); ++k) {
        const double pk = p.probabilities[k];
        const double dk = dp[k];
        if (pk < cfi_probability_floor) {
            if (std::abs(dk) < droot) continue;
            throw singularity_error("cfi: vanishing probability with non-vanishing derivative");
        }
        total += dk * dk / pk;
    }
    return total;
}

/// CFI of a pure-state phase family at the evaluation point itself, as the
/// phi -> 0 limit. Outcomes with P_m = 0 contribute 4 |<m|G psi>|^2 (the
/// 0/0 limit of dP^2/P); everything else is the plain quotient. This is what
/// the plain sum cannot produce at a parity point, where dP vanishes
/// identically alongside the odd-sector probabilities.
inline double cfi_pure_at_point(const CVector& state_in_basis, const CVector& gstate_in_basis,
                                double floor = cfi_probability_floor) {
    if (state_in_basis.size() != gstate_in_basis.size())
        throw std::invalid_argument("cfi_pure_at_point: size mismatch");
    double total = 0;
    for (int k = 0; k < state_in_basis.size(); ++k) {
        const complex c = state_in_basis[k];
        const complex g = gstate_in_basis[k];
        const double pk = std::norm(c);
        if (pk <= floor) {
            total += 4.0 * std::norm(g);
        } else {
            const double dpk = 2.0 * std::imag(g * std::conj(c));
            total += dpk * dpk / pk;
        }
    }
    return total;
}

/// F_C(0) for state `psi` with generator `g`, measured in `basis`.
inline double cfi_at_zero(const DickeState& psi, const CollectiveOperator& g,
                          const BasisSpec& basis) {
    if (g.dim() != psi.dim() || basis.dim() != psi.dim())
        throw std::invalid_argument("cfi_at_zero: dimension mismatch");
    CVector c = basis.eigenvectors.adjoint() * psi.amplitudes;
    CVector gp = basis.eigenvectors.adjoint() * (g.matrix * psi.amplitudes);
    return cfi_pure_at_point(c, gp);
}

/// Quantum Fisher information of a pure state under exp(-i phi G): 4 Var(G).
inline double qfi_pure(const DickeState& state_after_entangler, const CollectiveOperator& g) {
    auto [mean, var] = expectation_and_variance(state_after_entangler, g);
    (void)mean;
    return 4.0 * var;
}

} // namespace spinlab
