#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "spinlab/spinlab.hpp"

using namespace spinlab;
using Catch::Approx;

namespace {

DickeState random_state(RandomStream& rng, int n) {
    CVector c(n + 1);
    for (int k = 0; k <= n; ++k) c[k] = rng.complex_normal();
    return DickeState::from_amplitudes(n, std::move(c));
}

} // namespace

TEST_CASE("collective operators") {
    SECTION("Jz is the defining diagonal") {
        auto jz = make_collective_operator(2, Axis::z);
        REQUIRE(jz.matrix(0, 0).real() == Approx(-1.0));
        REQUIRE(jz.matrix(1, 1).real() == Approx(0.0).margin(1e-15));
        REQUIRE(jz.matrix(2, 2).real() == Approx(1.0));
    }
    SECTION("Jx off-diagonals at N=2 are 1/sqrt(2)") {
        auto jx = make_collective_operator(2, Axis::x);
        REQUIRE(std::abs(jx.matrix(1, 0)) == Approx(1.0 / std::sqrt(2.0)));
        REQUIRE(std::abs(jx.matrix(2, 1)) == Approx(1.0 / std::sqrt(2.0)));
        REQUIRE(std::abs(jx.matrix(2, 0)) == Approx(0.0).margin(1e-15));
    }
    SECTION("N = 0 rejected") {
        REQUIRE_THROWS_AS(make_collective_operator(0, Axis::x), std::invalid_argument);
    }
    SECTION("su(2) algebra and Casimir for N up to 32") {
        for (int n : {1, 2, 3, 4, 7, 12, 32}) {
            auto jx = make_collective_operator(n, Axis::x).matrix;
            auto jy = make_collective_operator(n, Axis::y).matrix;
            auto jz = make_collective_operator(n, Axis::z).matrix;
            const double j = n / 2.0;
            REQUIRE((jx * jy - jy * jx - imag_unit * jz).cwiseAbs().maxCoeff() < 1e-10);
            REQUIRE((jy * jz - jz * jy - imag_unit * jx).cwiseAbs().maxCoeff() < 1e-10);
            REQUIRE((jz * jx - jx * jz - imag_unit * jy).cwiseAbs().maxCoeff() < 1e-10);
            CMatrix casimir = jx * jx + jy * jy + jz * jz;
            casimir -= j * (j + 1) * CMatrix::Identity(n + 1, n + 1);
            REQUIRE(casimir.cwiseAbs().maxCoeff() < 1e-10);
        }
    }
    SECTION("hermiticity gate on custom operators") {
        CMatrix bad = CMatrix::Zero(3, 3);
        bad(0, 1) = 1.0;
        REQUIRE_THROWS_AS(custom_operator(2, bad), std::invalid_argument);
    }
}

TEST_CASE("coherent states") {
    SECTION("z pole is a basis vector") {
        auto s = coherent_state(4, Axis::z, +1);
        REQUIRE(std::abs(s.amplitudes[4]) == Approx(1.0));
        REQUIRE(s.amplitudes.head(4).norm() < 1e-14);
    }
    SECTION("maximal eigenstates of each axis") {
        for (Axis a : {Axis::x, Axis::y, Axis::z}) {
            for (int sign : {+1, -1}) {
                auto s = coherent_state(6, a, sign);
                auto [mean, var] = expectation_and_variance(s, make_collective_operator(6, a));
                REQUIRE(mean == Approx(sign * 3.0).epsilon(1e-12));
                REQUIRE(var < 1e-10);
            }
        }
    }
    SECTION("transverse variance is N/4") {
        auto s = coherent_state(100, Axis::x, +1);
        auto [mean, var] = expectation_and_variance(s, make_collective_operator(100, Axis::y));
        REQUIRE(mean == Approx(0.0).margin(1e-10));
        REQUIRE(var == Approx(25.0).epsilon(1e-10));
    }
}

TEST_CASE("rotations") {
    RandomStream rng(41);
    SECTION("zero angle is the identity") {
        auto s = random_state(rng, 9);
        REQUIRE(same_up_to_phase(rotate(s, Axis::y, 0.0), s, 1e-14));
    }
    SECTION("pole rotated to the equator") {
        auto s = rotate(coherent_state(10, Axis::z, +1), Axis::y, pi / 2);
        auto [mean, var] = expectation_and_variance(s, make_collective_operator(10, Axis::x));
        REQUIRE(mean == Approx(5.0).epsilon(1e-12));
        (void)var;
    }
    SECTION("eigenstate of the generator only picks up a phase") {
        auto s = coherent_state(4, Axis::x, +1);
        auto r = rotate(s, Axis::x, 1.234);
        REQUIRE(std::abs(overlap(r, s)) == Approx(1.0).epsilon(1e-12));
    }
    SECTION("norm preservation and additive composition") {
        auto s = random_state(rng, 14);
        for (Axis a : {Axis::x, Axis::y, Axis::z}) {
            auto r = rotate(s, a, 0.8333);
            REQUIRE(r.norm() == Approx(1.0).epsilon(1e-12));
            auto two_step = rotate(rotate(s, a, 0.31), a, 0.52);
            auto one_step = rotate(s, a, 0.83);
            REQUIRE(same_up_to_phase(two_step, one_step, 1e-10));
            // amplitude-wise as well: same generator, no global phase ambiguity
            REQUIRE((two_step.amplitudes - one_step.amplitudes).norm() < 1e-10);
        }
    }
}

TEST_CASE("one-axis twisting phase") {
    RandomStream rng(7);
    auto s = random_state(rng, 12);
    SECTION("chi_t = 0 is the identity") {
        REQUIRE((oat_phase(s, 0.0).amplitudes - s.amplitudes).norm() < 1e-15);
    }
    SECTION("2 pi is the identity on an even-N integer lattice") {
        auto c = coherent_state(4, Axis::x, +1);
        REQUIRE(same_up_to_phase(oat_phase(c, 2 * pi), c, 1e-12));
    }
    SECTION("amplitude magnitudes are invariant") {
        auto t = oat_phase(s, 0.7219);
        for (int k = 0; k <= 12; ++k)
            REQUIRE(std::abs(t.amplitudes[k]) == Approx(std::abs(s.amplitudes[k])).margin(1e-14));
    }
    SECTION("multiplies exactly exp(-i chi_t m^2)") {
        auto t = oat_phase(s, 0.4);
        const Vector lat = spin_lattice(12);
        for (int k = 0; k <= 12; ++k) {
            const complex expected = s.amplitudes[k] * std::exp(-imag_unit * 0.4 * lat[k] * lat[k]);
            REQUIRE(std::abs(t.amplitudes[k] - expected) < 1e-14);
        }
    }
}

TEST_CASE("measurement distributions") {
    SECTION("pole state is a delta in the Jz basis") {
        auto d = measurement_distribution(coherent_state(8, Axis::z, +1), *axis_basis(8, Axis::z));
        REQUIRE(d.probabilities[8] == Approx(1.0));
        REQUIRE(d.probabilities.head(8).cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("CSS(x) in the Jz basis is binomial(N, 1/2)") {
        const int n = 6;
        auto d = measurement_distribution(coherent_state(n, Axis::x, +1), *axis_basis(n, Axis::z));
        for (int k = 0; k <= n; ++k)
            REQUIRE(d.probabilities[k] == Approx(oracle::binomial_pmf(n, k)).margin(1e-12));
    }
    SECTION("normalization across random states and bases") {
        RandomStream rng(11);
        for (int rep = 0; rep < 5; ++rep) {
            auto s = random_state(rng, 17);
            for (Axis a : {Axis::x, Axis::y, Axis::z}) {
                auto d = measurement_distribution(s, *axis_basis(17, a));
                REQUIRE(d.total() == Approx(1.0).epsilon(1e-10));
                REQUIRE(d.probabilities.minCoeff() >= 0.0);
            }
        }
    }
    SECTION("dimension mismatch rejected") {
        REQUIRE_THROWS_AS(
            measurement_distribution(coherent_state(4, Axis::z, +1), *axis_basis(6, Axis::z)),
            std::invalid_argument);
    }
}

TEST_CASE("expectation and variance") {
    SECTION("maximal eigenstate has zero variance") {
        auto s = coherent_state(10, Axis::x, +1);
        auto [mean, var] = expectation_and_variance(s, make_collective_operator(10, Axis::x));
        REQUIRE(mean == Approx(5.0));
        REQUIRE(var == Approx(0.0).margin(1e-10));
        REQUIRE(var >= -1e-12);
    }
    SECTION("identity-like custom operator") {
        auto s = coherent_state(5, Axis::y, -1);
        auto id = custom_operator(5, CMatrix::Identity(6, 6));
        auto [mean, var] = expectation_and_variance(s, id);
        REQUIRE(mean == Approx(1.0).epsilon(1e-12));
        REQUIRE(var == Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("basis construction") {
    SECTION("eigenvectors orthonormal, eigenvalues the spin ladder") {
        for (Axis a : {Axis::x, Axis::y, Axis::z}) {
            auto b = axis_basis(12, a);
            CMatrix gram = b->eigenvectors.adjoint() * b->eigenvectors;
            REQUIRE((gram - CMatrix::Identity(13, 13)).cwiseAbs().maxCoeff() < 1e-10);
            const Vector lat = spin_lattice(12);
            for (int k = 0; k <= 12; ++k)
                REQUIRE(b->eigenvalues[k] == Approx(lat[k]).margin(1e-10));
            auto op = make_collective_operator(12, a);
            CMatrix resid = op.matrix * b->eigenvectors -
                            b->eigenvectors * b->eigenvalues.asDiagonal();
            REQUIRE(resid.cwiseAbs().maxCoeff() < 1e-10);
        }
    }
    SECTION("degenerate spectrum fails loudly") {
        REQUIRE_THROWS_AS(make_basis(custom_operator(3, CMatrix::Identity(4, 4))),
                          std::runtime_error);
    }
}

TEST_CASE("parity") {
    SECTION("CSS(x) is a parity eigenstate of its own basis") {
        const int n = 7;
        auto res = parity_check(coherent_state(n, Axis::x, +1), *axis_basis(n, Axis::x));
        REQUIRE(res.is_eigenstate);
        REQUIRE(res.p == n % 2);
    }
    SECTION("adjacent superposition mixes parities") {
        CVector c = CVector::Zero(7);
        c[3] = c[4] = 1.0 / std::sqrt(2.0);
        auto s = DickeState(6, std::move(c));
        REQUIRE_FALSE(parity_check(s, *axis_basis(6, Axis::z)).is_eigenstate);
    }
    SECTION("index offset flips the reported sign only") {
        auto s = coherent_state(6, Axis::x, +1);
        auto p0 = parity_check(s, *axis_basis(6, Axis::x, 0));
        auto p1 = parity_check(s, *axis_basis(6, Axis::x, 1));
        REQUIRE(p0.is_eigenstate);
        REQUIRE(p1.is_eigenstate);
        REQUIRE(p0.p != p1.p);
    }
    SECTION("OAT preserves Jx-basis parity") {
        auto s = coherent_state(20, Axis::x, +1);
        auto before = parity_check(s, *axis_basis(20, Axis::x));
        auto after = parity_check(oat_phase(s, 0.1), *axis_basis(20, Axis::x));
        REQUIRE(before.is_eigenstate);
        REQUIRE(after.is_eigenstate);
        REQUIRE(before.p == after.p);
    }
    SECTION("parity expectation invariant under OAT for random states") {
        RandomStream rng(5);
        auto basis = axis_basis(10, Axis::x);
        Vector signs(11);
        for (int k = 0; k <= 10; ++k) signs[k] = k % 2 == 0 ? 1.0 : -1.0;
        for (int rep = 0; rep < 20; ++rep) {
            auto s = random_state(rng, 10);
            auto d0 = measurement_distribution(s, *basis);
            auto d1 = measurement_distribution(oat_phase(s, rng.uniform(0, 2 * pi)), *basis);
            REQUIRE(signs.dot(d0.probabilities) ==
                    Approx(signs.dot(d1.probabilities)).margin(1e-10));
        }
    }
}

TEST_CASE("generator parity flips") {
    SECTION("Jy flips parity in the Jx eigenbasis (and vice versa)") {
        for (int n : {5, 6}) {
            REQUIRE(generator_flips_parity(make_collective_operator(n, Axis::y),
                                           *axis_basis(n, Axis::x)));
            REQUIRE(generator_flips_parity(make_collective_operator(n, Axis::x),
                                           *axis_basis(n, Axis::y)));
            REQUIRE(generator_flips_parity(make_collective_operator(n, Axis::y),
                                           *axis_basis(n, Axis::z)));
        }
    }
    SECTION("diagonal generators never flip their own basis parity") {
        REQUIRE_FALSE(generator_flips_parity(make_collective_operator(6, Axis::x),
                                             *axis_basis(6, Axis::x)));
        REQUIRE_FALSE(generator_flips_parity(make_collective_operator(6, Axis::z),
                                             *axis_basis(6, Axis::z)));
    }
}
