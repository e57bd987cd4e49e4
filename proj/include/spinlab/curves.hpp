#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "spinlab/protocol.hpp"

namespace spinlab {

enum class CurveKind { cfi, sensitivity };

/// Scan of CFI (best = max) or moment sensitivity dphi^2 (best = min) over a
/// phase grid.
struct FisherCurve {
    CurveKind kind = CurveKind::cfi;
    Vector phase_grid;
    Vector values;
    double best_value = 0;
    double best_phase = 0;
    std::vector<int> skipped;  // grid indices dropped as singular

    double max_value() const { return best_value; }
    double argmax_phase() const { return best_phase; }
};

/// Uniform grid of `points` phases on [-pi/2, pi/2). 721 points never lands
/// on phi = 0, where the noisy CFI has a removable-looking but genuine zero.
inline Vector default_phase_grid(int points = 721) {
    if (points < 1) throw std::invalid_argument("phase grid must be nonempty");
    Vector g(points);
    for (int i = 0; i < points; ++i) g[i] = -pi / 2 + i * (pi / points);
    return g;
}

namespace detail {

inline double golden_max(const std::function<double(double)>& f, double a, double b,
                         double tol) {
    const double gr = (std::sqrt(5.0) - 1) / 2;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a); fd = f(d);
        }
    }
    return (a + b) / 2;
}

} // namespace detail

/// max_phi F_C for a staged protocol: grid scan, the exact phi = 0 candidate,
/// and one golden-section refinement pass (1e-4 rad) around the grid argmax.
inline FisherCurve max_cfi_over_phase(const ProtocolEngine& engine, double sigma,
                                      const Vector& phase_grid) {
    if (phase_grid.size() == 0) throw std::invalid_argument("max_cfi_over_phase: empty grid");
    const NoiseKernel kernel = NoiseKernel::make(engine.spec().n_particles, sigma);
    const bool pure = kernel.is_identity();
    FisherCurve curve;
    curve.kind = CurveKind::cfi;
    curve.phase_grid = phase_grid;
    curve.values.resize(phase_grid.size());
    ProtocolEngine::Batch batch = engine.evaluate(phase_grid, kernel);
    int best_i = -1;
    for (int i = 0; i < phase_grid.size(); ++i) {
        double v;
        try {
            v = engine.cfi_column(batch, i, pure);
        } catch (const singularity_error&) {
            curve.skipped.push_back(i);
            curve.values[i] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        curve.values[i] = v;
        if (best_i < 0 || v > curve.best_value) {
            curve.best_value = v;
            best_i = i;
        }
    }
    if (best_i < 0) throw std::runtime_error("max_cfi_over_phase: every grid point singular");
    curve.best_phase = phase_grid[best_i];

    const double h =
        phase_grid.size() > 1 ? std::abs(phase_grid[1] - phase_grid[0]) : pi / 721;
    auto safe_cfi = [&](double phi) {
        try {
            return engine.cfi_at(phi, kernel);
        } catch (const singularity_error&) {
            return -1.0;
        }
    };
    const double refined = detail::golden_max(safe_cfi, curve.best_phase - h,
                                              curve.best_phase + h, 1e-4);
    const double fr = safe_cfi(refined);
    if (fr > curve.best_value) {
        curve.best_value = fr;
        curve.best_phase = refined;
    }
    // phi = 0: the parity-protected point. Exact limit when noiseless; with
    // noise the derivative vanishes there and the candidate never wins.
    const double f0 = pure ? engine.cfi_zero_phase() : safe_cfi(0.0);
    if (f0 > curve.best_value) {
        curve.best_value = f0;
        curve.best_phase = 0.0;
    }
    return curve;
}

inline FisherCurve max_cfi_over_phase(const ProtocolSpec& spec, double sigma,
                                      const Vector& phase_grid) {
    ProtocolEngine engine(spec);
    return max_cfi_over_phase(engine, sigma, phase_grid);
}

inline FisherCurve max_cfi_over_phase(const ProtocolSpec& spec, double sigma) {
    return max_cfi_over_phase(spec, sigma, default_phase_grid());
}

inline constexpr double moment_slope_floor = 1e-9;

/// Method-of-moments sensitivity dphi^2(phi) = Var[S] / (d<S>/dphi)^2 with
/// moments taken from the noisy outcome distribution in the signal eigenbasis.
/// Grid points with |d<S>/dphi| below the floor are marked infinite rather
/// than failing. phi = 0 is a regular point for moments and is always scanned.
inline FisherCurve moment_sensitivity(const ProtocolSpec& spec, Axis signal, double sigma,
                                      const Vector& phase_grid) {
    if (phase_grid.size() == 0) throw std::invalid_argument("moment_sensitivity: empty grid");
    ProtocolSpec moment_spec = spec;
    moment_spec.signal = signal;
    ProtocolEngine engine(moment_spec, axis_basis(spec.n_particles, signal));
    const NoiseKernel kernel = NoiseKernel::make(spec.n_particles, sigma);

    Vector grid(phase_grid.size() + 1);
    grid[0] = 0.0;
    for (int i = 0; i < phase_grid.size(); ++i) grid[i + 1] = phase_grid[i];

    ProtocolEngine::Batch batch = engine.evaluate(grid, kernel);
    const Vector lattice = spin_lattice(spec.n_particles);
    FisherCurve curve;
    curve.kind = CurveKind::sensitivity;
    curve.phase_grid = grid;
    curve.values.resize(grid.size());
    bool any = false;
    for (int i = 0; i < grid.size(); ++i) {
        const Vector p = batch.probabilities.col(i);
        const Vector dp = batch.derivatives.col(i);
        const double mean = lattice.dot(p);
        const double second = lattice.cwiseAbs2().dot(p);
        const double var = std::max(0.0, second - mean * mean);
        const double slope = lattice.dot(dp);
        if (std::abs(slope) < moment_slope_floor) {
            curve.values[i] = std::numeric_limits<double>::infinity();
            continue;
        }
        curve.values[i] = var / (slope * slope);
        if (!any || curve.values[i] < curve.best_value) {
            curve.best_value = curve.values[i];
            curve.best_phase = grid[i];
            any = true;
        }
    }
    if (!any) {
        curve.best_value = std::numeric_limits<double>::infinity();
        curve.best_phase = 0.0;
    }
    return curve;
}

inline FisherCurve moment_sensitivity(const ProtocolSpec& spec, Axis signal, double sigma) {
    return moment_sensitivity(spec, signal, sigma, default_phase_grid());
}

} // namespace spinlab
