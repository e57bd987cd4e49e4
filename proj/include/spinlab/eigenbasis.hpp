#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "spinlab/operators.hpp"

namespace spinlab {

/// Orthonormal measurement basis: columns of `eigenvectors` ordered by
/// ascending eigenvalue of `basis_operator`. Outcome k carries m_k = k - N/2
/// and parity sign (-1)^(k + parity_index_offset).
struct BasisSpec {
    int n_particles = 0;
    OperatorLabel label = OperatorLabel::custom;
    CMatrix eigenvectors;  // columns
    Vector eigenvalues;    // ascending
    int parity_index_offset = 0;

    int dim() const { return n_particles + 1; }
};

namespace detail {

inline BasisSpec build_basis(const CollectiveOperator& op, int parity_offset) {
    BasisSpec b;
    b.n_particles = op.n_particles;
    b.label = op.label;
    b.parity_index_offset = parity_offset;
    if (op.label == OperatorLabel::Jz) {
        // Jz is already diagonal with ascending m; keep the identity frame exactly.
        b.eigenvectors = CMatrix::Identity(op.dim(), op.dim());
        b.eigenvalues = spin_lattice(op.n_particles);
        return b;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(op.matrix);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed");
    b.eigenvectors = solver.eigenvectors();
    b.eigenvalues = solver.eigenvalues();
    // Collective spin components on the symmetric subspace have the
    // nondegenerate spectrum m = -j..j; a repeated eigenvalue means the
    // operator handed in was not one of them.
    for (int k = 0; k + 1 < b.eigenvalues.size(); ++k) {
        if (b.eigenvalues[k + 1] - b.eigenvalues[k] < 0.5)
            throw std::runtime_error("degenerate spectrum in basis construction");
    }
    return b;
}

struct BasisCache {
    std::mutex mtx;
    std::map<std::pair<int, Axis>, std::shared_ptr<const BasisSpec>> entries;
};

inline BasisCache& basis_cache() {
    static BasisCache cache;
    return cache;
}

} // namespace detail

/// Shared, lazily built eigenbasis of Jx/Jy/Jz. Read-only after construction.
inline std::shared_ptr<const BasisSpec> axis_basis(int n_particles, Axis axis,
                                                   int parity_offset = 0) {
    if (parity_offset != 0 && parity_offset != 1)
        throw std::invalid_argument("parity_index_offset must be 0 or 1");
    auto& cache = detail::basis_cache();
    std::lock_guard<std::mutex> lock(cache.mtx);
    auto key = std::make_pair(n_particles, axis);
    auto it = cache.entries.find(key);
    if (it == cache.entries.end()) {
        auto op = make_collective_operator(n_particles, axis);
        it = cache.entries.emplace(key, std::make_shared<BasisSpec>(detail::build_basis(op, 0)))
                 .first;
    }
    if (parity_offset == 0) return it->second;
    auto shifted = std::make_shared<BasisSpec>(*it->second);
    shifted->parity_index_offset = parity_offset;
    return shifted;
}

inline BasisSpec make_basis(const CollectiveOperator& op, int parity_offset = 0) {
    return detail::build_basis(op, parity_offset);
}

} // namespace spinlab
