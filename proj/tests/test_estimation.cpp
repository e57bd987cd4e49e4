#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "spinlab/spinlab.hpp"

using namespace spinlab;
using Catch::Approx;

TEST_CASE("noise channel") {
    SECTION("sigma = 0 is the identity map") {
        auto k = NoiseKernel::make(12, 0.0);
        REQUIRE(k.is_identity());
        OutcomeDistribution d{12, Vector::Zero(13)};
        d.probabilities[3] = 1.0;
        auto out = convolve_noise(d, k);
        REQUIRE((out.probabilities - d.probabilities).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("delta spreads into the renormalized discrete Gaussian") {
        const int n = 20;
        const double sigma = 2.0;
        OutcomeDistribution d{n, Vector::Zero(n + 1)};
        d.probabilities[n / 2] = 1.0;
        auto out = convolve_noise(d, sigma);
        const Matrix ref = oracle::noise_matrix(n, sigma);
        for (int k = 0; k <= n; ++k)
            REQUIRE(out.probabilities[k] == Approx(ref(k, n / 2)).margin(1e-13));
        REQUIRE(out.total() == Approx(1.0).epsilon(1e-10));
        // symmetric about the center site
        for (int k = 0; k <= n; ++k)
            REQUIRE(out.probabilities[k] == Approx(out.probabilities[n - k]).margin(1e-13));
    }
    SECTION("channel is column-stochastic") {
        for (double sigma : {0.3, 1.0, 5.0, 20.0}) {
            auto k = NoiseKernel::make(15, sigma);
            for (int src = 0; src <= 15; ++src)
                REQUIRE(k.channel.col(src).sum() == Approx(1.0).epsilon(1e-12));
            REQUIRE(k.channel.minCoeff() >= 0.0);
        }
    }
    SECTION("normalization preserved for random distributions") {
        RandomStream rng(3);
        for (int rep = 0; rep < 5; ++rep) {
            Vector p(11);
            for (int k = 0; k <= 10; ++k) p[k] = rng.uniform();
            p /= p.sum();
            auto out = convolve_noise(OutcomeDistribution{10, p}, 1.7);
            REQUIRE(out.total() == Approx(1.0).epsilon(1e-10));
        }
    }
    SECTION("negative sigma rejected") {
        REQUIRE_THROWS_AS(NoiseKernel::make(5, -1.0), std::invalid_argument);
    }
}

TEST_CASE("Hellinger distance") {
    const int n = 6;
    Vector p(n + 1), q(n + 1);
    for (int k = 0; k <= n; ++k) p[k] = oracle::binomial_pmf(n, k);
    SECTION("identical distributions") {
        REQUIRE(hellinger_sq({n, p}, {n, p}) == Approx(0.0).margin(1e-12));
    }
    SECTION("disjoint supports") {
        Vector a = Vector::Zero(n + 1), b = Vector::Zero(n + 1);
        a[0] = 1.0;
        b[n] = 1.0;
        REQUIRE(hellinger_sq({n, a}, {n, b}) == Approx(1.0));
    }
    SECTION("binomial against its one-site shift") {
        q.setZero();
        for (int k = 1; k <= n; ++k) q[k] = oracle::binomial_pmf(n, k - 1);
        q /= q.sum();
        const double expected = oracle::hellinger(p, q);  // direct summation
        REQUIRE(hellinger_sq({n, p}, {n, q}) == Approx(expected).margin(1e-13));
        REQUIRE(expected > 0.01);
        REQUIRE(expected < 0.2);
        // symmetry
        REQUIRE(hellinger_sq({n, q}, {n, p}) == Approx(expected).margin(1e-13));
    }
    SECTION("lattice mismatch rejected") {
        REQUIRE_THROWS_AS(hellinger_sq({n, p}, {4, Vector::Ones(5) / 5.0}),
                          std::invalid_argument);
    }
}

TEST_CASE("classical Fisher information") {
    SECTION("zero derivative gives zero information") {
        Vector p = Vector::Ones(5) / 5.0;
        REQUIRE(cfi_from_distribution_pair({4, p}, Vector::Zero(5)) == 0.0);
    }
    SECTION("coherent-state Mach-Zehnder carries F_C = N in the Jz basis") {
        const int n = 6;
        auto spec = build_protocol(ProtocolKind::trivial, n, 0.0);
        spec.measurement_basis = BasisChoice::Jz;
        for (double phi : {0.0, 0.2, -0.6}) {
            auto point = evaluate_protocol(spec, phi, 0.0);
            const double fc = cfi_from_distribution_pair(point.distribution, point.derivative);
            REQUIRE(fc == Approx(double(n)).epsilon(1e-9));
        }
        // cross-check against the dense brute-force pipeline at phi = 0.2
        auto bp = oracle::DensePipeline::trivial(n, 0.0, 0.0);
        const CMatrix eye = CMatrix::Identity(n + 1, n + 1);
        const double ref =
            oracle::plain_cfi(bp.probabilities(0.2, eye), bp.fd_derivative(0.2, eye));
        REQUIRE(ref == Approx(double(n)).epsilon(1e-7));
    }
    SECTION("derivative must sum to zero") {
        Vector p = Vector::Ones(3) / 3.0;
        Vector dp(3);
        dp << 0.1, 0.1, 0.1;
        REQUIRE_THROWS_AS(cfi_from_distribution_pair({2, p}, dp), std::invalid_argument);
    }
    SECTION("vanishing probability with a live derivative is singular") {
        Vector p(3), dp(3);
        p << 0.5, 0.5, 0.0;
        dp << -1e-3, 0.0, 1e-3;
        REQUIRE_THROWS_AS(cfi_from_distribution_pair({2, p}, dp), singularity_error);
    }
    SECTION("parity eigenstates saturate F_C(0) = 4 Var(G)") {
        for (int i = 0; i < 50; ++i) {
            auto c = spinlab::detail::random_theorem_case(mix_seed(99, i), true, true);
            const double fq = qfi_pure(c.state, c.generator);
            const double fc = cfi_at_zero(c.state, c.generator, *c.basis);
            REQUIRE(std::abs(fc - fq) <= 1e-8 * fq);
        }
    }
}

TEST_CASE("analytic phase derivative") {
    SECTION("matches central finite differences") {
        const int n = 8;
        const double theta = squeezing_angle(n, 0.15);
        for (auto kind : {ProtocolKind::trivial, ProtocolKind::echo}) {
            auto spec = build_protocol(kind, n, 0.15);
            ProtocolEngine engine(spec);
            auto bp = kind == ProtocolKind::trivial ? oracle::DensePipeline::trivial(n, 0.15, theta)
                                                    : oracle::DensePipeline::echo(n, 0.15, theta);
            for (double phi : {0.05, 0.4, -0.3}) {
                auto point = engine.evaluate_point(phi, NoiseKernel::make(n, 0.0));
                const Vector fd = bp.fd_derivative(phi, engine.basis().eigenvectors);
                for (int k = 0; k <= n; ++k)
                    REQUIRE(point.derivative[k] == Approx(fd[k]).margin(1e-6));
                REQUIRE(std::abs(point.derivative.sum()) < 1e-12);
            }
        }
    }
    SECTION("parity conditions force dP(0) = 0") {
        for (auto kind : {ProtocolKind::trivial, ProtocolKind::echo, ProtocolKind::pseudo_echo}) {
            auto spec = build_protocol(kind, 12, 0.2);
            auto point = evaluate_protocol(spec, 0.0, 0.0);
            REQUIRE(point.derivative.cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SECTION("noise channel applies to the derivative by linearity") {
        auto spec = build_protocol(ProtocolKind::trivial, 10, 0.1);
        ProtocolEngine engine(spec);
        const double sigma = 1.3;
        auto clean = engine.evaluate_point(0.2, NoiseKernel::make(10, 0.0));
        auto noisy = engine.evaluate_point(0.2, NoiseKernel::make(10, sigma));
        const Matrix chan = oracle::noise_matrix(10, sigma);
        const Vector expected = chan * clean.derivative;
        for (int k = 0; k <= 10; ++k)
            REQUIRE(noisy.derivative[k] == Approx(expected[k]).margin(1e-12));
    }
}

TEST_CASE("quantum Fisher information") {
    SECTION("coherent state gives the shot-noise limit") {
        const int n = 6;
        const double fq = qfi_pure(coherent_state(n, Axis::x, +1),
                                   make_collective_operator(n, Axis::y));
        REQUIRE(fq == Approx(double(n)).epsilon(1e-10));
        // brute force: 4 (<Jy^2> - <Jy>^2) with dense matrices
        const CMatrix jy = oracle::jmat(n, 'y');
        const CVector psi = oracle::css_x(n);
        const double mean = std::real(psi.dot(jy * psi));
        const double second = (jy * psi).squaredNorm();
        REQUIRE(fq == Approx(4 * (second - mean * mean)).epsilon(1e-10));
    }
    SECTION("GHZ state reaches the Heisenberg limit") {
        for (int n : {2, 10}) {
            auto ghz = ghz_state(n);
            double best = 0;
            for (Axis a : {Axis::x, Axis::y, Axis::z})
                best = std::max(best, qfi_pure(ghz, make_collective_operator(n, a)));
            REQUIRE(best == Approx(double(n) * n).epsilon(1e-8));
        }
    }
    SECTION("readout leaves the QFI of the entangled state unchanged") {
        for (auto kind : {ProtocolKind::echo, ProtocolKind::pseudo_echo, ProtocolKind::ghz_readout}) {
            ProtocolEngine trivial(build_protocol(ProtocolKind::trivial, 14, 0.2));
            ProtocolEngine with_readout(build_protocol(kind, 14, 0.2));
            REQUIRE(with_readout.qfi() == Approx(trivial.qfi()).epsilon(1e-12));
        }
    }
}

TEST_CASE("estimation-level properties") {
    const int n = 40;
    SECTION("Hellinger expansion matches the zero-phase CFI") {
        const double phi = 1e-3;
        for (auto kind : {ProtocolKind::trivial, ProtocolKind::echo, ProtocolKind::pseudo_echo}) {
            ProtocolEngine engine(build_protocol(kind, n, 0.1));
            const auto clean = NoiseKernel::make(n, 0.0);
            Vector phis(2);
            phis << 0.0, phi;
            auto batch = engine.evaluate(phis, clean);
            OutcomeDistribution p0{n, batch.probabilities.col(0).cwiseMax(0.0)};
            OutcomeDistribution p1{n, batch.probabilities.col(1).cwiseMax(0.0)};
            const double dh = hellinger_sq(p0, p1);
            const double fc0 = engine.cfi_zero_phase();
            REQUIRE(std::abs(8 * dh / (phi * phi) - fc0) <= 0.01 * fc0);
        }
    }
    SECTION("readout invariance of the zero-noise CFI") {
        ProtocolEngine a(build_protocol(ProtocolKind::trivial, n, 0.15));
        ProtocolEngine b(build_protocol(ProtocolKind::echo, n, 0.15));
        ProtocolEngine c(build_protocol(ProtocolKind::pseudo_echo, n, 0.15));
        const double fa = a.cfi_zero_phase();
        REQUIRE(std::abs(b.cfi_zero_phase() - fa) <= 1e-8 * fa);
        REQUIRE(std::abs(c.cfi_zero_phase() - fa) <= 1e-8 * fa);
        REQUIRE(fa == Approx(a.qfi()).epsilon(1e-8));
    }
    SECTION("information bounds") {
        ProtocolEngine engine(build_protocol(ProtocolKind::echo, 30, 0.12));
        const double fq = engine.qfi();
        const Vector grid = default_phase_grid(121);
        auto curve0 = max_cfi_over_phase(engine, 0.0, grid);
        for (int i = 0; i < curve0.values.size(); ++i)
            if (std::isfinite(curve0.values[i])) REQUIRE(curve0.values[i] <= fq * (1 + 1e-8));
        REQUIRE(curve0.best_value <= fq * (1 + 1e-8));
        for (double sigma : {0.5, 3.0}) {
            auto noisy = max_cfi_over_phase(engine, sigma, grid);
            REQUIRE(noisy.best_value <= curve0.best_value * (1 + 1e-8));
        }
    }
    SECTION("breaking either condition opens a strict gap") {
        int gaps1 = 0, gaps2 = 0;
        const int draws = 40;
        for (int i = 0; i < draws; ++i) {
            auto c1 = spinlab::detail::random_theorem_case(mix_seed(7, i), false, true);
            const double fq1 = qfi_pure(c1.state, c1.generator);
            if (fq1 - cfi_at_zero(c1.state, c1.generator, *c1.basis) > 1e-3 * fq1) ++gaps1;
            auto c2 = spinlab::detail::random_theorem_case(mix_seed(8, i), true, false);
            const double fq2 = qfi_pure(c2.state, c2.generator);
            if (fq2 < 1e-9) continue;
            if (fq2 - cfi_at_zero(c2.state, c2.generator, *c2.basis) > 1e-3 * fq2) ++gaps2;
        }
        REQUIRE(gaps1 >= 0.9 * draws);
        REQUIRE(gaps2 >= 0.9 * draws);
    }
}

TEST_CASE("optimal basis discovery") {
    SECTION("OAT-squeezed CSS with a Mach-Zehnder generator wants the Jx basis") {
        const int n = 20;
        auto basis = find_optimal_basis(coherent_state(n, Axis::x, +1), oat_entangler(n, 0.1),
                                        make_collective_operator(n, Axis::y));
        REQUIRE(basis != nullptr);
        REQUIRE(basis->label == OperatorLabel::Jx);
    }
    SECTION("no candidate qualifies for a commuting generator") {
        const int n = 10;
        auto basis = find_optimal_basis(coherent_state(n, Axis::z, +1), {},
                                        make_collective_operator(n, Axis::z));
        REQUIRE(basis == nullptr);
    }
}
