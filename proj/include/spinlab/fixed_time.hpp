#pragma once

#include <algorithm>
#include <vector>

#include "spinlab/curves.hpp"
#include "spinlab/threading.hpp"

namespace spinlab {

enum class ReadoutFamily { asymmetric_reversed, pseudo_forward };

inline const char* family_name(ReadoutFamily f) {
    return f == ReadoutFamily::asymmetric_reversed ? "asymmetric-reversed" : "pseudo-forward";
}

/// Fixed total twisting strength T split as t1 + t2.
struct TimeBudget {
    double total = 0;
    double t1 = 0;
    double t2 = 0;

    TimeBudget(double total_, double t1_) : total(total_), t1(t1_), t2(total_ - t1_) {
        if (t1 < -1e-12 || t2 < -1e-12) throw std::invalid_argument("TimeBudget: t1 in [0, T]");
        if (t1 < 0) t1 = 0;
        if (t2 < 0) t2 = 0;
    }
};

/// U1 = U_OAT(t1); U2 = U_OAT^dag(t2) (asymmetric-reversed, echo at t1 = t2)
/// or U_OAT(t2) (pseudo-forward, pseudo-echo at t1 = t2).
inline ProtocolSpec fixed_T_protocol(int n_particles, const TimeBudget& budget,
                                     ReadoutFamily family) {
    ProtocolSpec spec;
    spec.n_particles = n_particles;
    spec.u1_steps = oat_entangler(n_particles, budget.t1);
    std::vector<Step> readout = oat_entangler(n_particles, budget.t2);
    spec.u2_steps = family == ReadoutFamily::asymmetric_reversed ? inverse_steps(readout)
                                                                 : readout;
    spec.generator = GeneratorChoice::automatic;
    spec.measurement_basis = BasisChoice::automatic;
    return spec;
}

struct FixedTScan {
    double total = 0;
    double sigma = 0;
    ReadoutFamily family = ReadoutFamily::asymmetric_reversed;
    Vector t1_grid;
    Vector max_cfi;      // max_phi F_C per t1
    Vector argmax_phase; // maximizing phi per t1
    double best_t1 = 0;
    double best_max_cfi = 0;
};

/// Uniform t1 grid on [0, T]; the endpoints and the echo split T/2 are
/// always present.
inline Vector default_t1_grid(double total, int points = 101) {
    if (points < 2) throw std::invalid_argument("t1 grid needs at least 2 points");
    std::vector<double> ts;
    ts.reserve(points + 2);
    for (int i = 0; i < points; ++i) ts.push_back(total * i / (points - 1));
    ts.push_back(total / 2);
    ts.push_back(total);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end(),
                         [&](double a, double b) { return std::abs(a - b) < 1e-12 * (1 + total); }),
             ts.end());
    Vector out(ts.size());
    for (size_t i = 0; i < ts.size(); ++i) out[i] = ts[i];
    return out;
}

/// Scans the t1/t2 split of a fixed budget; best t1 maximizes max_phi F_C,
/// ties (within 1e-6 relative) resolved toward the smallest t1.
inline FixedTScan fixed_T_scan(int n_particles, double total, double sigma, ReadoutFamily family,
                               const Vector& t1_grid, const Vector& phase_grid, int threads = 0) {
    std::vector<double> ts;
    for (int i = 0; i < t1_grid.size(); ++i) {
        if (t1_grid[i] < -1e-12 || t1_grid[i] > total + 1e-12)
            throw std::invalid_argument("fixed_T_scan: t1 grid outside [0, T]");
        ts.push_back(t1_grid[i]);
    }
    // the no-readout endpoint and the echo/pseudo-echo split are always scanned
    ts.push_back(total);
    ts.push_back(total / 2);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end(),
                         [&](double a, double b) { return std::abs(a - b) < 1e-12 * (1 + total); }),
             ts.end());
    FixedTScan scan;
    scan.total = total;
    scan.sigma = sigma;
    scan.family = family;
    scan.t1_grid.resize(ts.size());
    for (size_t i = 0; i < ts.size(); ++i) scan.t1_grid[i] = ts[i];
    scan.max_cfi.resize(scan.t1_grid.size());
    scan.argmax_phase.resize(scan.t1_grid.size());
    parallel_for(
        static_cast<int>(scan.t1_grid.size()),
        [&](int i) {
            const TimeBudget budget(total, std::clamp(scan.t1_grid[i], 0.0, total));
            const ProtocolSpec spec = fixed_T_protocol(n_particles, budget, family);
            const FisherCurve curve = max_cfi_over_phase(spec, sigma, phase_grid);
            scan.max_cfi[i] = curve.best_value;
            scan.argmax_phase[i] = curve.best_phase;
        },
        threads);
    int best = 0;
    for (int i = 1; i < scan.t1_grid.size(); ++i)
        if (scan.max_cfi[i] > scan.max_cfi[best]) best = i;
    // smallest t1 within the tie window
    for (int i = 0; i < scan.t1_grid.size(); ++i) {
        if (scan.max_cfi[i] >= scan.max_cfi[best] * (1 - 1e-6)) {
            best = i;
            break;
        }
    }
    scan.best_t1 = scan.t1_grid[best];
    scan.best_max_cfi = scan.max_cfi[best];
    return scan;
}

inline FixedTScan fixed_T_scan(int n_particles, double total, double sigma, ReadoutFamily family,
                               int t1_points = 101, int threads = 0) {
    return fixed_T_scan(n_particles, total, sigma, family, default_t1_grid(total, t1_points),
                        default_phase_grid(), threads);
}

} // namespace spinlab
