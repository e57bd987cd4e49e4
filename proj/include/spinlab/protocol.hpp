#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "spinlab/estimation.hpp"
#include "spinlab/evolve.hpp"
#include "spinlab/noise.hpp"

namespace spinlab {

// ---------------------------------------------------------------------------
// Protocol steps
// ---------------------------------------------------------------------------

enum class StepKind { oat, rotation };

struct Step {
    StepKind kind = StepKind::oat;
    Axis axis = Axis::x;    // rotation only
    double parameter = 0.0; // chi_t or angle

    static Step oat(double chi_t) { return {StepKind::oat, Axis::z, chi_t}; }
    static Step rotation(Axis axis, double angle) { return {StepKind::rotation, axis, angle}; }
};

inline Step inverse_step(const Step& s) { return {s.kind, s.axis, -s.parameter}; }

inline std::vector<Step> inverse_steps(const std::vector<Step>& steps) {
    std::vector<Step> out;
    out.reserve(steps.size());
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) out.push_back(inverse_step(*it));
    return out;
}

inline DickeState apply_steps(const DickeState& state, const std::vector<Step>& steps) {
    DickeState psi = state;
    for (const Step& s : steps) {
        if (!std::isfinite(s.parameter))
            throw std::invalid_argument("protocol step parameter must be finite");
        psi = s.kind == StepKind::oat ? oat_phase(psi, s.parameter)
                                      : rotate(psi, s.axis, s.parameter);
    }
    return psi;
}

/// Dense unitary of a step sequence (applied left to right on kets).
inline CMatrix steps_to_matrix(int n_particles, const std::vector<Step>& steps) {
    const int d = n_particles + 1;
    CMatrix u = CMatrix::Identity(d, d);
    const Vector lat = spin_lattice(n_particles);
    for (const Step& s : steps) {
        if (s.kind == StepKind::oat) {
            for (int c = 0; c < d; ++c)
                u.row(c) *= std::exp(-imag_unit * s.parameter * lat[c] * lat[c]);
        } else {
            auto b = axis_basis(n_particles, s.axis);
            CVector ph(d);
            for (int k = 0; k < d; ++k)
                ph[k] = std::exp(-imag_unit * s.parameter * b->eigenvalues[k]);
            u = b->eigenvectors * ph.asDiagonal() * (b->eigenvectors.adjoint() * u);
        }
    }
    return u;
}

// ---------------------------------------------------------------------------
// Protocol description
// ---------------------------------------------------------------------------

enum class GeneratorChoice { Jx, Jy, Jz, automatic };
enum class BasisChoice { Jx, Jy, Jz, automatic };

inline Axis generator_axis(GeneratorChoice g) {
    switch (g) {
        case GeneratorChoice::Jx: return Axis::x;
        case GeneratorChoice::Jy: return Axis::y;
        case GeneratorChoice::Jz: return Axis::z;
        default: throw std::logic_error("generator not resolved");
    }
}

/// Declarative interferometry pipeline |psi_phi> = U2 U_phi U1 |psi_0>.
struct ProtocolSpec {
    int n_particles = 0;
    Axis initial_axis = Axis::x;
    int initial_sign = +1;
    std::vector<Step> u1_steps;
    std::vector<Step> u2_steps;  // empty encodes U2 = 1
    GeneratorChoice generator = GeneratorChoice::Jy;
    BasisChoice measurement_basis = BasisChoice::automatic;
    std::optional<Axis> signal;  // moment-method observable
};

enum class ProtocolKind { trivial, echo, pseudo_echo, asymmetric, ghz_readout };

inline const char* protocol_kind_name(ProtocolKind k) {
    switch (k) {
        case ProtocolKind::trivial: return "trivial";
        case ProtocolKind::echo: return "echo";
        case ProtocolKind::pseudo_echo: return "pseudo-echo";
        case ProtocolKind::asymmetric: return "asymmetric";
        case ProtocolKind::ghz_readout: return "ghz";
    }
    return "?";
}

inline std::optional<ProtocolKind> parse_protocol_kind(const std::string& s) {
    if (s == "trivial") return ProtocolKind::trivial;
    if (s == "echo") return ProtocolKind::echo;
    if (s == "pseudo-echo" || s == "pseudo_echo") return ProtocolKind::pseudo_echo;
    if (s == "asymmetric") return ProtocolKind::asymmetric;
    if (s == "ghz" || s == "ghz-readout") return ProtocolKind::ghz_readout;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Squeezing angle
// ---------------------------------------------------------------------------

namespace detail {

struct SqueezingAngle {
    double theta = 0.0;
    bool degenerate = false;  // Var(Jz) flat in theta
};

inline SqueezingAngle squeezing_angle_impl(int n_particles, double chi_t) {
    if (chi_t < 0) throw std::invalid_argument("squeezing_angle: chi_t must be >= 0");
    const DickeState twisted = oat_phase(coherent_state(n_particles, Axis::x, +1), chi_t);
    const CollectiveOperator jz = make_collective_operator(n_particles, Axis::z);
    auto var_of = [&](double theta) {
        return expectation_and_variance(rotate(twisted, Axis::x, theta), jz).second;
    };
    // Var is pi-periodic in theta (a sinusoid in 2*theta); coarse grid, then
    // golden-section around the bracket.
    const int coarse = 192;
    double vmin = 0, vmax = 0;
    int imin = 0;
    std::vector<double> vals(coarse);
    for (int i = 0; i < coarse; ++i) {
        vals[i] = var_of(i * pi / coarse);
        if (i == 0 || vals[i] < vmin) { vmin = vals[i]; imin = i; }
        if (i == 0 || vals[i] > vmax) vmax = vals[i];
    }
    if (vmax - vmin <= 1e-10 * std::max(1.0, vmax)) return {0.0, true};
    double a = (imin - 1) * pi / coarse;
    double b = (imin + 1) * pi / coarse;
    const double gr = (std::sqrt(5.0) - 1) / 2;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = var_of(c), fd = var_of(d);
    while (b - a > 1e-10) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a); fc = var_of(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a); fd = var_of(d);
        }
    }
    double theta = std::fmod((a + b) / 2, pi);
    if (theta < 0) theta += pi;
    if (theta > pi - 1e-9) theta = 0.0;  // wrap: minimizer at the seam
    return {theta, false};
}

} // namespace detail

/// Rotation angle about x minimizing Var(Jz) after OAT; 0 when the variance
/// is flat in theta (chi_t = 0, and the cat point chi_t = pi/2 for N > 4).
inline double squeezing_angle(int n_particles, double chi_t) {
    return detail::squeezing_angle_impl(n_particles, chi_t).theta;
}

// ---------------------------------------------------------------------------
// Stock protocols
// ---------------------------------------------------------------------------

inline std::vector<Step> oat_entangler(int n_particles, double chi_t) {
    return {Step::oat(chi_t), Step::rotation(Axis::x, squeezing_angle(n_particles, chi_t))};
}

inline ProtocolSpec build_protocol(ProtocolKind kind, int n_particles, double chi_t1,
                                   double chi_t2 = 0.0) {
    if (n_particles < 2) throw std::invalid_argument("build_protocol: N must be >= 2");
    if (chi_t1 < 0) throw std::invalid_argument("build_protocol: chi_t1 must be >= 0");
    ProtocolSpec spec;
    spec.n_particles = n_particles;
    spec.u1_steps = oat_entangler(n_particles, chi_t1);
    spec.generator = GeneratorChoice::automatic;
    spec.measurement_basis = BasisChoice::automatic;
    switch (kind) {
        case ProtocolKind::trivial:
            break;
        case ProtocolKind::echo:
            spec.u2_steps = inverse_steps(spec.u1_steps);
            break;
        case ProtocolKind::pseudo_echo:
            spec.u2_steps = spec.u1_steps;
            break;
        case ProtocolKind::asymmetric:
            if (chi_t2 < 0) throw std::invalid_argument("build_protocol: chi_t2 must be >= 0");
            spec.u2_steps = inverse_steps(oat_entangler(n_particles, chi_t2));
            break;
        case ProtocolKind::ghz_readout:
            spec.u2_steps = oat_entangler(n_particles, pi / 2);
            break;
    }
    return spec;
}

/// GHZ state: OAT at chi_t = pi/2 plus the x-rotation convention. At the cat
/// point Var(Jz) is flat in theta for N > 4; the angle pi/(2N) is then the
/// one that aligns the two branch phases, making the state a parity
/// eigenstate in every transverse basis (alternate outcomes vanish).
inline DickeState ghz_state(int n_particles) {
    if (n_particles < 2) throw std::invalid_argument("ghz_state: N must be >= 2");
    const DickeState cat = oat_phase(coherent_state(n_particles, Axis::x, +1), pi / 2);
    const auto sq = detail::squeezing_angle_impl(n_particles, pi / 2);
    const double theta = sq.degenerate ? pi / (2.0 * n_particles) : sq.theta;
    return rotate(cat, Axis::x, theta);
}

// ---------------------------------------------------------------------------
// Optimal-basis discovery
// ---------------------------------------------------------------------------

inline std::vector<std::shared_ptr<const BasisSpec>> default_basis_candidates(int n_particles) {
    return {axis_basis(n_particles, Axis::x), axis_basis(n_particles, Axis::y),
            axis_basis(n_particles, Axis::z)};
}

/// First candidate basis in which the prepared state is a parity eigenstate
/// and the generator flips parity; nullptr when no candidate qualifies.
inline std::shared_ptr<const BasisSpec> find_optimal_basis(
    const DickeState& initial_state, const std::vector<Step>& u1_steps,
    const CollectiveOperator& g,
    const std::vector<std::shared_ptr<const BasisSpec>>& candidates) {
    const DickeState prepared = apply_steps(initial_state, u1_steps);
    for (const auto& basis : candidates) {
        if (parity_check(prepared, *basis).is_eigenstate && generator_flips_parity(g, *basis))
            return basis;
    }
    return nullptr;
}

inline std::shared_ptr<const BasisSpec> find_optimal_basis(const DickeState& initial_state,
                                                           const std::vector<Step>& u1_steps,
                                                           const CollectiveOperator& g) {
    return find_optimal_basis(initial_state, u1_steps, g,
                              default_basis_candidates(initial_state.n_particles));
}

// ---------------------------------------------------------------------------
// Protocol engine
// ---------------------------------------------------------------------------

struct ProtocolPoint {
    DickeState final_state;
    OutcomeDistribution distribution;  // noise-convolved when sigma > 0
    Vector derivative;                 // dP/dphi, same channel applied
};

/// Staged evaluator for one protocol. Resolves the generator and measurement
/// basis once, then evaluates outcome distributions, derivatives and Fisher
/// information over phase batches.
///
/// Generator "auto" picks the axis maximizing 4 Var on the entangled state
/// (ties favor Jy, the Mach-Zehnder default). Basis "auto" first looks for a
/// candidate satisfying the parity conditions on the measurement-time state
/// (sigma_0 = U2 U1 psi_0 at phi = 0, with the conjugated generator
/// U2 G U2^dag); when no candidate qualifies - the echo family projects onto
/// a basis vector instead of a parity superposition - it falls back to the
/// candidate whose phi = 0 CFI saturates the QFI.
class ProtocolEngine {
  public:
    explicit ProtocolEngine(const ProtocolSpec& spec,
                            std::shared_ptr<const BasisSpec> forced_basis = nullptr)
        : spec_(spec), n_(spec.n_particles) {
        psi0_ = coherent_state(n_, spec.initial_axis, spec.initial_sign);
        psi1_ = apply_steps(psi0_, spec.u1_steps);
        resolve_generator();
        u2_identity_ = spec.u2_steps.empty();
        if (!u2_identity_) u2_ = steps_to_matrix(n_, spec.u2_steps);
        sigma0_ = u2_identity_ ? psi1_
                               : DickeState::from_amplitudes(n_, u2_ * psi1_.amplitudes);
        if (forced_basis) {
            basis_ = std::move(forced_basis);
            basis_mode_ = "forced";
        } else {
            resolve_basis();
        }
        stage();
    }

    const ProtocolSpec& spec() const { return spec_; }
    const DickeState& initial_state() const { return psi0_; }
    const DickeState& entangled_state() const { return psi1_; }
    const DickeState& measurement_time_state() const { return sigma0_; }
    const CollectiveOperator& generator() const { return gen_; }
    const BasisSpec& basis() const { return *basis_; }
    const std::string& basis_resolution() const { return basis_mode_; }

    double qfi() const { return qfi_pure(psi1_, gen_); }

    /// Exact phi = 0 CFI of the full pipeline (limit form; see cfi_at_zero).
    /// Uses (U2 G U2^dag) sigma_0 = U2 (G psi_1), no operator conjugation.
    double cfi_zero_phase() const {
        CVector c = basis_->eigenvectors.adjoint() * sigma0_.amplitudes;
        CVector gp = basis_->eigenvectors.adjoint() * apply_u2(gen_.matrix * psi1_.amplitudes);
        return cfi_pure_at_point(c, gp);
    }

    struct Batch {
        Matrix probabilities;  // (N+1) x n_phi
        Matrix derivatives;
        CMatrix amplitudes;    // pre-channel, in measurement basis
        CMatrix damplitudes;
    };

    Batch evaluate(const Vector& phis, const NoiseKernel& kernel) const {
        const int d = n_ + 1;
        const int np = static_cast<int>(phis.size());
        CMatrix phased(d, np), dphased(d, np);
        for (int jcol = 0; jcol < np; ++jcol) {
            for (int k = 0; k < d; ++k) {
                const complex e = std::exp(-imag_unit * phis[jcol] * gen_evals_[k]);
                phased(k, jcol) = e * u_coeff_[k];
                dphased(k, jcol) = e * du_coeff_[k];
            }
        }
        Batch out;
        out.amplitudes = w_ * phased;
        out.damplitudes = w_ * dphased;
        out.probabilities = out.amplitudes.cwiseAbs2();
        out.derivatives =
            2.0 * (out.damplitudes.array() * out.amplitudes.array().conjugate()).real();
        if (!kernel.is_identity()) {
            out.probabilities = kernel.channel * out.probabilities;
            out.derivatives = kernel.channel * out.derivatives;
        }
        return out;
    }

    ProtocolPoint evaluate_point(double phi, const NoiseKernel& kernel) const {
        Vector one(1);
        one[0] = phi;
        Batch b = evaluate(one, kernel);
        DickeState final_state =
            DickeState::from_amplitudes(n_, basis_->eigenvectors * b.amplitudes.col(0));
        OutcomeDistribution dist{n_, b.probabilities.col(0)};
        for (int k = 0; k <= n_; ++k)
            if (dist.probabilities[k] < 0) dist.probabilities[k] = 0;
        return {std::move(final_state), std::move(dist), b.derivatives.col(0)};
    }

    /// CFI of one batch column. With the identity channel the pure-state
    /// limit form is used, so vanishing-probability outcomes contribute
    /// their 4|<m|dpsi>|^2 limit instead of 0/0.
    double cfi_column(const Batch& b, int col, bool pure) const {
        if (pure) {
            double total = 0;
            for (int k = 0; k <= n_; ++k) {
                const complex c = b.amplitudes(k, col);
                const complex g = b.damplitudes(k, col);
                const double pk = std::norm(c);
                if (pk <= cfi_probability_floor) {
                    total += 4.0 * std::norm(g);
                } else {
                    const double dpk = 2.0 * (g * std::conj(c)).real();
                    total += dpk * dpk / pk;
                }
            }
            return total;
        }
        const double droot = std::sqrt(cfi_probability_floor);
        double total = 0;
        for (int k = 0; k <= n_; ++k) {
            const double pk = b.probabilities(k, col);
            const double dk = b.derivatives(k, col);
            if (pk < cfi_probability_floor) {
                if (std::abs(dk) < droot) continue;
                throw singularity_error("cfi: vanishing probability with non-vanishing derivative");
            }
            total += dk * dk / pk;
        }
        return total;
    }

    double cfi_at(double phi, const NoiseKernel& kernel) const {
        Vector one(1);
        one[0] = phi;
        Batch b = evaluate(one, kernel);
        return cfi_column(b, 0, kernel.is_identity());
    }

  private:
    void resolve_generator() {
        Axis axis = Axis::y;
        if (spec_.generator == GeneratorChoice::automatic) {
            double best = -1, vy = 0;
            Axis best_axis = Axis::y;
            for (Axis a : {Axis::x, Axis::y, Axis::z}) {
                const double v =
                    expectation_and_variance(psi1_, make_collective_operator(n_, a)).second;
                if (a == Axis::y) vy = v;
                if (v > best) { best = v; best_axis = a; }
            }
            axis = best <= vy * (1 + 1e-9) ? Axis::y : best_axis;
        } else {
            axis = generator_axis(spec_.generator);
        }
        gen_ = make_collective_operator(n_, axis);
    }

    CVector apply_u2(const CVector& v) const { return u2_identity_ ? v : CVector(u2_ * v); }

    void resolve_basis() {
        if (spec_.measurement_basis != BasisChoice::automatic) {
            Axis a = spec_.measurement_basis == BasisChoice::Jx   ? Axis::x
                     : spec_.measurement_basis == BasisChoice::Jy ? Axis::y
                                                                  : Axis::z;
            basis_ = axis_basis(n_, a);
            basis_mode_ = "fixed";
            return;
        }
        const CMatrix geff = u2_identity_
                                 ? gen_.matrix
                                 : CMatrix(u2_ * gen_.matrix * u2_.adjoint());
        const CollectiveOperator geff_op = {n_, OperatorLabel::custom, geff};
        auto candidates = default_basis_candidates(n_);
        for (const auto& cand : candidates) {
            if (parity_check(sigma0_, *cand).is_eigenstate &&
                generator_flips_parity(geff_op, *cand)) {
                basis_ = cand;
                basis_mode_ = "conditions";
                return;
            }
        }
        const double fq = qfi();
        if (fq > 1e-9) {
            const CVector gsigma0 = apply_u2(gen_.matrix * psi1_.amplitudes);
            double best = -1;
            std::shared_ptr<const BasisSpec> best_cand;
            for (const auto& cand : candidates) {
                CVector c = cand->eigenvectors.adjoint() * sigma0_.amplitudes;
                CVector gp = cand->eigenvectors.adjoint() * gsigma0;
                const double fc = cfi_pure_at_point(c, gp);
                if (fc >= (1 - 1e-6) * fq) {
                    basis_ = cand;
                    basis_mode_ = "saturation";
                    return;
                }
                if (fc > best) {
                    best = fc;
                    best_cand = cand;
                }
            }
            // No candidate is optimal here (a mismatched echo, say); scans
            // still need a value, so take the most informative candidate.
            basis_ = best_cand;
            basis_mode_ = "best-effort";
            return;
        }
        throw std::runtime_error(
            "measurement basis discovery failed: the protocol carries no phase "
            "information at phi = 0 in any candidate basis");
    }

    void stage() {
        if (gen_.label == OperatorLabel::custom) {
            Eigen::SelfAdjointEigenSolver<CMatrix> solver(gen_.matrix);
            gen_evals_ = solver.eigenvalues();
            gen_evecs_ = solver.eigenvectors();
        } else {
            Axis a = gen_.label == OperatorLabel::Jx   ? Axis::x
                     : gen_.label == OperatorLabel::Jy ? Axis::y
                                                       : Axis::z;
            auto b = axis_basis(n_, a);
            gen_evals_ = b->eigenvalues;
            gen_evecs_ = b->eigenvectors;
        }
        w_ = u2_identity_ ? CMatrix(basis_->eigenvectors.adjoint() * gen_evecs_)
                          : CMatrix(basis_->eigenvectors.adjoint() * (u2_ * gen_evecs_));
        u_coeff_ = gen_evecs_.adjoint() * psi1_.amplitudes;
        du_coeff_ = (-imag_unit * gen_evals_.array()).matrix().asDiagonal() * u_coeff_;
    }

    ProtocolSpec spec_;
    int n_;
    bool u2_identity_ = true;
    DickeState psi0_, psi1_, sigma0_;
    CollectiveOperator gen_;
    CMatrix u2_;
    std::shared_ptr<const BasisSpec> basis_;
    std::string basis_mode_;
    Vector gen_evals_;
    CMatrix gen_evecs_, w_;
    CVector u_coeff_, du_coeff_;
};

/// |psi_phi> = U2 U_phi U1 |psi_0>, with the noisy outcome distribution and
/// its analytic phi-derivative.
inline ProtocolPoint evaluate_protocol(const ProtocolSpec& spec, double phi, double sigma) {
    ProtocolEngine engine(spec);
    return engine.evaluate_point(phi, NoiseKernel::make(spec.n_particles, sigma));
}

/// Analytic dP/dphi from |dpsi> = U2 U_phi (-iG) U1 |psi_0>; the same noise
/// channel as the distribution is applied (the channel is linear).
inline Vector state_phase_derivative(const ProtocolSpec& spec, double phi, double sigma = 0.0) {
    return evaluate_protocol(spec, phi, sigma).derivative;
}

} // namespace spinlab
