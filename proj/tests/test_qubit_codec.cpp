#include <doctest.h>

#include <numbers>
#include <random>

#include "qst/analysis.hpp"
#include "qst/qubit_codec.hpp"

using namespace qst;

namespace {

constexpr double kPi = std::numbers::pi;

QubitInput random_qubit(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    cplx c0(g(rng), g(rng)), c1(g(rng), g(rng));
    const double n = std::sqrt(std::norm(c0) + std::norm(c1));
    return {c0 / n, c1 / n};
}

/// Rung-1 reduced 2^L vector of a product state whose other rungs are
/// polarized: read the amplitudes straight out of the sector vector.
Eigen::VectorXcd rung1_vector(const SectorState& state, const SpinLattice& lattice) {
    const int L = lattice.sites_per_rung();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(1 << L);
    for (int p = 0; p < (1 << L); ++p) {
        std::uint64_t c = 0;
        for (int j = 1; j <= L; ++j)
            if ((p >> (L - j)) & 1) c |= 1ULL << lattice.site_index(1, j);
        const int idx = state.basis->index_of(c);
        if (idx >= 0) out[p] = state.amplitudes[idx];
    }
    return out;
}

double qubit_fidelity(const SectorState& state, const SpinLattice& lattice, int rung, int j,
                      const QubitInput& q) {
    const Eigen::MatrixXcd rho = reduced_density_matrix(state, {lattice.site_index(rung, j)});
    Eigen::Vector2cd v(q.c0, q.c1);
    return (v.adjoint() * rho * v)(0, 0).real();
}

}  // namespace

TEST_CASE("embed_qubit") {
    SpinLattice lattice(3, 2, Boundary::open, Boundary::open);
    const auto basis = build_basis(6, 1);
    const QubitInput q{cplx(0.6, 0.0), cplx(0.0, 0.8)};
    const SectorState psi = embed_qubit(basis, lattice, q, 2);
    CHECK(std::abs(psi.amplitudes[0] - q.c0) <= 1e-15);
    CHECK(std::abs(psi.amplitudes[basis->index_of(1ULL << lattice.site_index(1, 2))] - q.c1) <=
          1e-15);
    CHECK_THROWS_AS(embed_qubit(basis, lattice, {cplx(1.0), cplx(1.0)}, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(embed_qubit(basis, lattice, q, 3), std::domain_error);
}

TEST_CASE("two-leg encoding lands in the ground doublet with the e^{5i pi/4} phase") {
    SpinLattice lattice(3, 2, Boundary::open, Boundary::open);
    const auto basis = build_basis(6, 1);
    const RungGroundPair pair = find_critical_field(2, Boundary::open);
    std::mt19937_64 rng(31);

    for (int trial = 0; trial < 10; ++trial) {
        const QubitInput q = random_qubit(rng);
        for (int j : {1, 2}) {
            const SectorState enc = encode_two_leg(embed_qubit(basis, lattice, q, j), lattice, j);
            const Eigen::VectorXcd rung = rung1_vector(enc, lattice);
            CHECK(high_energy_overlap(rung, pair) <= 1e-12);

            // Up to one global phase: (<0|rung>, <1|rung>) = (c0, c1 e^{5i pi/4})
            // for sender leg 1; the antisymmetry of |1> flips the sign for leg 2.
            const cplx z0 = pair.ket0.dot(rung);
            const cplx z1 = pair.ket1.dot(rung);
            Eigen::Vector2cd got(z0, z1);
            const double sign = (j == 1) ? 1.0 : -1.0;
            Eigen::Vector2cd want(q.c0, sign * q.c1 * std::exp(cplx(0.0, 5.0 * kPi / 4.0)));
            CHECK(std::abs(std::abs(want.dot(got)) - 1.0) <= 1e-12);
        }
    }

    SUBCASE("c1 = 0 leaves the polarized state fixed up to phase") {
        const SectorState enc =
            encode_two_leg(embed_qubit(basis, lattice, {cplx(1.0), cplx(0.0)}, 1), lattice, 1);
        CHECK(std::abs(std::abs(enc.amplitudes[0]) - 1.0) <= 1e-12);
    }
    SUBCASE("c0 = 0, j = 1 maps onto ket1 up to phase") {
        const SectorState enc =
            encode_two_leg(embed_qubit(basis, lattice, {cplx(0.0), cplx(1.0)}, 1), lattice, 1);
        const Eigen::VectorXcd rung = rung1_vector(enc, lattice);
        CHECK(std::abs(std::abs(pair.ket1.dot(rung)) - 1.0) <= 1e-12);
    }
}

TEST_CASE("four-leg encoding lands in the ground doublet") {
    SpinLattice lattice(3, 4, Boundary::periodic, Boundary::open);
    const auto basis = build_basis(12, 1);
    const RungGroundPair pair = find_critical_field(4, Boundary::periodic);
    std::mt19937_64 rng(37);

    for (int trial = 0; trial < 10; ++trial) {
        const QubitInput q = random_qubit(rng);
        const SectorState enc = encode_four_leg(embed_qubit(basis, lattice, q, 1), lattice);
        const Eigen::VectorXcd rung = rung1_vector(enc, lattice);
        CHECK(high_energy_overlap(rung, pair) <= 1e-12);
        // Encoded rung = c0|0> + c1 e^{-i pi/2}|1> up to a global phase.
        Eigen::Vector2cd got(pair.ket0.dot(rung), pair.ket1.dot(rung));
        Eigen::Vector2cd want(q.c0, q.c1 * std::exp(cplx(0.0, -kPi / 2.0)));
        CHECK(std::abs(std::abs(want.dot(got)) - 1.0) <= 1e-12);
    }

    SUBCASE("c0 = 0 reproduces the alternating one-magnon pattern") {
        const SectorState enc =
            encode_four_leg(embed_qubit(basis, lattice, {cplx(0.0), cplx(1.0)}, 1), lattice);
        const Eigen::VectorXcd rung = rung1_vector(enc, lattice);
        Eigen::VectorXcd want = Eigen::VectorXcd::Zero(16);
        want[1] = 0.5, want[2] = -0.5, want[4] = 0.5, want[8] = -0.5;  // (|0001>-|0010>+|0100>-|1000>)/2
        CHECK(std::abs(std::abs(want.dot(rung)) - 1.0) <= 1e-12);
    }
    SUBCASE("protocol requires periodic four-site rungs") {
        SpinLattice wrong(3, 4, Boundary::open, Boundary::open);
        const auto b = build_basis(12, 1);
        CHECK_THROWS_AS(encode_four_leg(embed_qubit(b, wrong, {cplx(1.0), cplx(0.0)}, 1), wrong),
                        std::invalid_argument);
    }
}

TEST_CASE("codec roundtrips without a transfer step") {
    std::mt19937_64 rng(41);

    SUBCASE("two-leg, every target leg, critical and arbitrary w") {
        SpinLattice lattice(2, 2, Boundary::open, Boundary::open);
        const auto basis = build_basis(4, 1);
        for (int trial = 0; trial < 25; ++trial) {
            const QubitInput q = random_qubit(rng);
            for (int tj : {1, 2}) {
                // Encoded |1> is delocalized over the rung, so decoding on
                // either leg recovers the qubit.
                SectorState s = encode_two_leg(embed_qubit(basis, lattice, q, 1), lattice, 1);
                s = decode_two_leg(s, lattice, 1, tj);
                CHECK(qubit_fidelity(s, lattice, 1, tj, q) >= 1.0 - 1e-10);
                for (double w : {1.37, 0.8}) {
                    SectorState a =
                        encode_two_leg(embed_qubit(basis, lattice, q, 1), lattice, 1, w);
                    a = decode_two_leg(a, lattice, 1, tj, w);
                    CHECK(qubit_fidelity(a, lattice, 1, tj, q) >= 1.0 - 1e-10);
                }
            }
        }
    }
    SUBCASE("four-leg, every target leg") {
        SpinLattice lattice(2, 4, Boundary::periodic, Boundary::open);
        const auto basis = build_basis(8, 1);
        for (int trial = 0; trial < 25; ++trial) {
            const QubitInput q = random_qubit(rng);
            for (int tj : {1, 2, 3, 4}) {
                SectorState s = encode_four_leg(embed_qubit(basis, lattice, q, 1), lattice);
                s = decode_four_leg(s, lattice, 1, tj);
                CHECK(qubit_fidelity(s, lattice, 1, tj, q) >= 1.0 - 1e-10);
            }
            SectorState s = encode_four_leg(embed_qubit(basis, lattice, q, 1), lattice, 2.2);
            s = decode_four_leg(s, lattice, 1, 3, 2.2);
            CHECK(qubit_fidelity(s, lattice, 1, 3, q) >= 1.0 - 1e-10);
        }
    }
}

TEST_CASE("single-qubit transfer pipeline") {
    SpinLattice lattice(5, 2, Boundary::open, Boundary::open);
    const ModelParams params{0.05, 0.0, 0.0};
    const std::vector<double> grid = default_time_grid(40.0, 0.4);

    SUBCASE("c1 = 0 transfers perfectly") {
        SingleQubitTransfer sim(lattice, params, {cplx(1.0), cplx(0.0)}, 3, 1,
                                Protocol::two_leg);
        for (double t : {0.0, 11.0, 39.6}) CHECK(std::abs(sim.fidelity(t) - 1.0) <= 1e-10);
    }
    SUBCASE("f' equals f of the encoded rung-to-rung run") {
        std::mt19937_64 rng(43);
        for (int trial = 0; trial < 3; ++trial) {
            const QubitInput q = random_qubit(rng);
            SingleQubitTransfer sq(lattice, params, q, 3, 1, Protocol::two_leg);
            RungInput in;
            in.a1 = std::abs(q.c0);
            const RungGroundPair pair = find_critical_field(2, Boundary::open);
            RungTransfer rr(lattice, params, prepare_rung_input(pair, in), 1, 3);
            for (double t : grid) CHECK(std::abs(sq.fidelity(t) - rr.fidelity(t)) <= 1e-6);
        }
    }
    SUBCASE("f' is independent of the target leg") {
        const QubitInput q{cplx(0.6, 0.0), cplx(0.48, 0.64)};
        SingleQubitTransfer a(lattice, params, q, 2, 1, Protocol::two_leg);
        SingleQubitTransfer b(lattice, params, q, 2, 2, Protocol::two_leg);
        for (double t : grid) CHECK(std::abs(a.fidelity(t) - b.fidelity(t)) <= 1e-9);
    }
    SUBCASE("bare baseline depends on the target leg and is beaten at c1 = 0 trivially") {
        const QubitInput q{cplx(0.6, 0.0), cplx(0.48, 0.64)};
        BareTransfer a(lattice, params, q, 2, 1);
        BareTransfer b(lattice, params, q, 2, 2);
        double max_gap = 0.0;
        for (double t : grid) max_gap = std::max(max_gap, std::abs(a.fidelity(t) - b.fidelity(t)));
        CHECK(max_gap > 1e-6);
        BareTransfer triv(lattice, params, {cplx(1.0), cplx(0.0)}, 2, 1);
        CHECK(std::abs(triv.fidelity(17.0) - 1.0) <= 1e-12);
    }
    SUBCASE("four-leg pipeline transfers and matches rung-to-rung") {
        SpinLattice ladder(3, 4, Boundary::periodic, Boundary::open);
        const QubitInput q{cplx(0.6, 0.0), cplx(0.48, 0.64)};
        SingleQubitTransfer sq(ladder, params, q, 2, 2, Protocol::four_leg);
        RungInput in;
        in.a1 = std::abs(q.c0);
        const RungGroundPair pair = find_critical_field(4, Boundary::periodic);
        RungTransfer rr(ladder, params, prepare_rung_input(pair, in), 1, 2);
        for (double t : grid) CHECK(std::abs(sq.fidelity(t) - rr.fidelity(t)) <= 1e-6);
    }
    SUBCASE("protocol/lattice mismatch") {
        CHECK_THROWS_AS(
            SingleQubitTransfer(lattice, params, {cplx(1.0), cplx(0.0)}, 1, 1, Protocol::four_leg),
            std::invalid_argument);
    }
}

TEST_CASE("haar-averaged single-qubit transfer is deterministic") {
    SpinLattice lattice(4, 2, Boundary::open, Boundary::open);
    const ModelParams params{0.05, 0.0, 0.0};
    const std::vector<double> grid = default_time_grid(20.0, 1.0);
    const HaarResult a = haar_average_single_qubit(lattice, params, 2, 1, Protocol::two_leg, grid,
                                                   64, 7, 1);
    const HaarResult b = haar_average_single_qubit(lattice, params, 2, 1, Protocol::two_leg, grid,
                                                   64, 7, 3);
    CHECK(a.mean_f == b.mean_f);
    const HaarResult bare = haar_average_bare(lattice, params, 2, 1, grid, 64, 7, 2);
    CHECK(bare.mean_f_max <= 1.0 + 1e-12);
}
