#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <numbers>
#include <random>

#include "oracle.hpp"
#include "qst/analysis.hpp"

using namespace qst;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXcd random_pure(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = cplx(g(rng), g(rng));
    return v / v.norm();
}

/// Independent GGM: largest marginal eigenvalue over all bipartitions via
/// the dense partial trace.
double ggm_oracle(const Eigen::VectorXcd& state, int n) {
    double max_ev = 0.0;
    for (int mask = 1; mask < (1 << n) - 1; ++mask) {
        // ggm's qubit 1 is the MSB; dense_rdm sites are plain bit positions,
        // which only permutes the marginal -- eigenvalues are unaffected.
        std::vector<int> subset;
        for (int b = 0; b < n; ++b)
            if ((mask >> b) & 1) subset.push_back(b);
        const Eigen::MatrixXcd rho = oracle::dense_rdm(state, n, subset);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
        max_ev = std::max(max_ev, es.eigenvalues().maxCoeff());
    }
    return 1.0 - max_ev;
}

}  // namespace

TEST_CASE("ggm closed-form points") {
    SUBCASE("product state") {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(8);
        v[0] = 1.0;
        CHECK(ggm(v, 3) <= 1e-14);
    }
    SUBCASE("two-qubit Bell state") {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
        v[1] = 1.0 / std::sqrt(2.0);
        v[2] = -1.0 / std::sqrt(2.0);
        CHECK(ggm(v, 2) == doctest::Approx(0.5).epsilon(1e-13));
    }
    SUBCASE("three-qubit one-magnon state") {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(8);
        v[1] = 1.0 / std::sqrt(6.0);
        v[2] = -2.0 / std::sqrt(6.0);
        v[4] = 1.0 / std::sqrt(6.0);
        CHECK(ggm(v, 3) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
    }
    SUBCASE("errors") {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
        v[0] = 2.0;
        CHECK_THROWS_AS(ggm(v, 2), std::invalid_argument);
        CHECK_THROWS_AS(ggm(v, 3), std::invalid_argument);
    }
}

TEST_CASE("ggm agrees with the partial-trace oracle and local-phase invariance") {
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXcd v = random_pure(16, rng);
        CHECK(ggm(v, 4) == doctest::Approx(ggm_oracle(v, 4)).epsilon(1e-10));

        // Single-site phase gates leave G unchanged.
        Eigen::VectorXcd w = v;
        std::uniform_real_distribution<double> ang(0.0, 2 * kPi);
        for (int q = 0; q < 4; ++q) {
            const double a = ang(rng);
            for (int c = 0; c < 16; ++c)
                w[c] *= std::exp(cplx(0.0, ((c >> q) & 1) ? a : -a));
        }
        CHECK(std::abs(ggm(w, 4) - ggm(v, 4)) <= 1e-10);
    }
}

TEST_CASE("ggm_curve endpoints and range for the doublet family") {
    const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
    for (auto [L, bc] : {std::pair{2, Boundary::open}, std::pair{3, Boundary::open},
                         std::pair{4, Boundary::periodic}}) {
        const auto curve = ggm_curve(L, bc, grid);
        REQUIRE(curve.size() == grid.size());
        CHECK(curve.back().second <= 1e-12);  // a1 = 1 is a product state
        for (const auto& [a1, G] : curve) {
            CHECK(G >= -1e-12);
            CHECK(G <= 0.5 + 1e-12);
        }
    }
    // L=2 Bell endpoint.
    const auto bell = ggm_curve(2, Boundary::open, {0.0});
    CHECK(bell[0].second == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("high-energy scans") {
    SpinLattice lattice(3, 2, Boundary::open, Boundary::open);
    const ModelParams params{0.05, 0.0, 0.0};
    const std::vector<double> grid = default_time_grid(30.0, 0.3);

    SUBCASE("xi scan hits D = 0 on the low-energy ray") {
        const double b0 = 1.0 / std::sqrt(2.0);
        const auto pts =
            high_energy_scan_L2(lattice, params, 0.1, 0.0, {b0, -b0}, {kPi}, 1, 2, grid);
        REQUIRE(pts.size() == 2);
        for (const auto& p : pts) {
            CHECK(p.D <= 1e-14);
            CHECK(p.eps <= 1e-6);
        }
        const auto high =
            high_energy_scan_L2(lattice, params, 0.1, 0.0, {b0}, {0.0}, 1, 2, grid);
        CHECK(high[0].D == doctest::Approx(0.99).epsilon(1e-12));
    }
    SUBCASE("W-class slice hits D = 0 at the ket1 point") {
        SpinLattice l3(3, 3, Boundary::open, Boundary::open);
        const auto pts = high_energy_scan_L3(
            l3, params, 0.1, 0.0, WAxis::b2, {2.0 / std::sqrt(6.0)}, WAxis::theta1, {kPi},
            1.0 / std::sqrt(6.0), 0.0, 0.0, 0.0, 1, 2, grid);
        REQUIRE(pts.size() == 1);
        CHECK(pts[0].D <= 1e-13);
        CHECK_THROWS_AS(
            high_energy_scan_L3(l3, params, 0.1, 0.0, WAxis::b1, {0.9}, WAxis::b2, {0.9}, 0.0,
                                0.0, 0.0, 0.0, 1, 2, grid),
            std::invalid_argument);
        CHECK_THROWS_AS(
            high_energy_scan_L3(l3, params, 0.1, 0.0, WAxis::b1, {0.1}, WAxis::b1, {0.2}, 0.0,
                                0.0, 0.0, 0.0, 1, 2, grid),
            std::invalid_argument);
    }
}

TEST_CASE("sweep_r") {
    SpinLattice lattice(5, 2, Boundary::open, Boundary::open);
    const ModelParams params{0.05, 0.0, 0.0};
    const std::vector<double> grid = default_time_grid(50.0, 0.5);

    RungInput in;
    in.a1 = 1.0;
    const auto rows = sweep_r(lattice, params, in, {1, 2, 3, 4}, grid);
    REQUIRE(rows.size() == 4);
    for (const auto& row : rows) {
        CHECK(row.f_m == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::isnan(row.mean_f_m));
    }

    RungInput bell;
    bell.a1 = 0.0;
    const auto hrows = sweep_r(lattice, params, bell, {1, 3}, grid, 1, 32, 5, 2);
    CHECK_FALSE(std::isnan(hrows[0].mean_f_m));
    CHECK(hrows[0].mean_f_m <= 1.0 + 1e-12);
}

TEST_CASE("optimize_fm") {
    SpinLattice lattice(4, 2, Boundary::open, Boundary::open);
    const std::vector<double> grid = default_time_grid(50.0, 0.5);

    SUBCASE("trivial input is already optimal") {
        RungInput in;
        in.a1 = 1.0;
        const OptimizeResult res = optimize_fm(lattice, in, 1, 2, grid, 0.1, 3);
        CHECK(res.f_m == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(res.u >= 0.0);
        CHECK(res.u <= 0.1);
    }
    SUBCASE("optimum dominates the reference point") {
        RungInput bell;
        bell.a1 = 0.0;
        const OptimizeResult res = optimize_fm(lattice, bell, 1, 1, grid, 0.1, 3);
        const RungGroundPair pair = find_critical_field(2, Boundary::open);
        RungTransfer ref(lattice, ModelParams{0.05, 0.0, 0.0},
                         prepare_rung_input(pair, bell), 1, 1);
        const auto [f_ref, t_ref] = max_fidelity(ref.run(grid));
        CHECK(res.f_m >= f_ref - 1e-9);
        CHECK(res.evaluations > 27);
    }
}

TEST_CASE("spearman rank correlation") {
    CHECK(spearman_rank_correlation({1, 2, 3, 4}, {2, 4, 6, 8}) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(spearman_rank_correlation({1, 2, 3, 4}, {9, 7, 5, 1}) ==
          doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(std::abs(spearman_rank_correlation({1, 2, 3, 4, 5}, {3, 1, 4, 2, 5})) < 1.0);
    CHECK_THROWS_AS(spearman_rank_correlation({1.0}, {2.0}), std::invalid_argument);
}
