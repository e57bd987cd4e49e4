#pragma once

#include <cmath>
#include <stdexcept>

#include "spinlab/measure.hpp"

namespace spinlab {

/// Discrete Gaussian detection-noise channel. Column k' holds
/// C_{k'} G_{k-k'}(sigma) with C_{k'} normalizing over the physical outcome
/// range 0..N, so the induced matrix is column-stochastic. sigma = 0 is the
/// identity channel exactly.
struct NoiseKernel {
    int n_particles = 0;
    double sigma = 0.0;
    Matrix channel;  // (N+1)x(N+1), column-stochastic

    static NoiseKernel make(int n_particles, double sigma) {
        if (sigma < 0) throw std::invalid_argument("NoiseKernel: sigma must be >= 0");
        NoiseKernel k;
        k.n_particles = n_particles;
        k.sigma = sigma;
        const int d = n_particles + 1;
        if (sigma == 0.0) {
            k.channel = Matrix::Identity(d, d);
            return k;
        }
        k.channel.resize(d, d);
        for (int src = 0; src < d; ++src) {
            double colsum = 0;
            for (int dst = 0; dst < d; ++dst) {
                const double diff = dst - src;
                k.channel(dst, src) = std::exp(-diff * diff / (2 * sigma * sigma));
                colsum += k.channel(dst, src);
            }
            k.channel.col(src) /= colsum;
        }
        return k;
    }

    bool is_identity() const { return sigma == 0.0; }
};

inline OutcomeDistribution convolve_noise(const OutcomeDistribution& p, const NoiseKernel& k) {
    if (k.n_particles != p.n_particles)
        throw std::invalid_argument("convolve_noise: lattice mismatch");
    if (k.is_identity()) return p;
    return {p.n_particles, k.channel * p.probabilities};
}

inline OutcomeDistribution convolve_noise(const OutcomeDistribution& p, double sigma) {
    return convolve_noise(p, NoiseKernel::make(p.n_particles, sigma));
}

} // namespace spinlab
