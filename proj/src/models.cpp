#include "qst/models.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <iostream>
#include <set>

namespace qst {

namespace {

constexpr double kDegeneracyTol = 1e-8;

/// Closed-form ket1 for the four supported (L, bc_rung) pairs; ket-string
/// indexing with qubit j at bit L-j.
std::optional<Eigen::VectorXcd> closed_form_ket1(int L, Boundary bc) {
    auto vec = [L](std::initializer_list<std::pair<int, double>> entries, double norm) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(1 << L);
        for (auto [idx, amp] : entries) v[idx] = amp / norm;
        return v;
    };
    if (L == 2) return vec({{1, 1.0}, {2, -1.0}}, std::sqrt(2.0));
    if (L == 3 && bc == Boundary::open) return vec({{1, 1.0}, {2, -2.0}, {4, 1.0}}, std::sqrt(6.0));
    if (L == 4 && bc == Boundary::open) {
        const double a = 1.0 + std::sqrt(2.0);
        return vec({{1, -1.0}, {2, a}, {4, -a}, {8, 1.0}}, std::sqrt(2.0 + 2.0 * a * a));
    }
    if (L == 4 && bc == Boundary::periodic)
        return vec({{1, 1.0}, {2, -1.0}, {4, 1.0}, {8, -1.0}}, 2.0);
    return std::nullopt;
}

std::vector<std::pair<Bond, double>> weighted_lattice_bonds(const SpinLattice& lattice,
                                                            double rung_coef, double leg_coef,
                                                            double diag_coef) {
    std::vector<std::pair<Bond, double>> out;
    auto add = [&](BondKind kind, double coef) {
        if (coef == 0.0) return;
        for (const Bond& b : lattice.bonds(kind)) out.emplace_back(b, coef);
    };
    add(BondKind::rung, rung_coef);
    add(BondKind::leg, leg_coef);
    add(BondKind::diagonal, diag_coef);
    return out;
}

}  // namespace

Eigen::MatrixXcd build_rung_hamiltonian(int L, Boundary bc_rung, double w) {
    if (L < 2 || L > 12) throw std::invalid_argument("build_rung_hamiltonian: L must be in 2..12");
    if (L == 2) bc_rung = Boundary::open;
    const int dim = 1 << L;
    const int jmax = (bc_rung == Boundary::periodic) ? L : L - 1;

    auto bit_of = [L](int j) { return L - j; };  // qubit j = bit L-j
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) {
        double diag = 0.0;
        for (int j = 1; j <= L; ++j)
            diag -= 0.5 * w * (((n >> bit_of(j)) & 1) ? -1.0 : 1.0);
        for (int j = 1; j <= jmax; ++j) {
            const int ba = bit_of(j), bb = bit_of(j % L + 1);
            const bool za = (n >> ba) & 1, zb = (n >> bb) & 1;
            diag += 0.25 * (za == zb ? 1.0 : -1.0);
            if (za != zb) H(n ^ ((1 << ba) | (1 << bb)), n) += 0.5;
        }
        H(n, n) += diag;
    }
    return H;
}

RungGroundPair find_critical_field(int L, Boundary bc_rung) {
    if (L == 2) bc_rung = Boundary::open;
    const Eigen::MatrixXcd H0 = build_rung_hamiltonian(L, bc_rung, 0.0);
    const double e0 = H0(0, 0).real();  // polarized state |0...0>

    // One-magnon block; magnon at qubit j sits at index 2^(L-j).
    Eigen::MatrixXcd block(L, L);
    for (int j = 1; j <= L; ++j)
        for (int k = 1; k <= L; ++k) block(j - 1, k - 1) = H0(1 << (L - j), 1 << (L - k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> magnon(block);
    const double e1 = magnon.eigenvalues()[0];
    if (L > 1 && magnon.eigenvalues()[1] - e1 < kDegeneracyTol)
        throw std::runtime_error(
            "find_critical_field: no effective qubit (lowest one-magnon level is degenerate)");

    // The field shifts the 0- and 1-magnon sectors at relative rate 1.
    const double w_c = e0 - e1;
    Eigen::VectorXcd ket1 = Eigen::VectorXcd::Zero(1 << L);
    for (int j = 1; j <= L; ++j) ket1[1 << (L - j)] = magnon.eigenvectors()(j - 1, 0);

    // Phase convention: match the closed forms where they exist, otherwise
    // make the first nonzero amplitude in numeric config order real positive.
    if (auto cf = closed_form_ket1(L, bc_rung)) {
        const cplx z = cf->dot(ket1);
        if (std::abs(z) < 1.0 - 1e-8)
            throw std::logic_error("find_critical_field: numeric ket1 deviates from closed form");
        ket1 *= std::conj(z) / std::abs(z);
    } else {
        for (int n = 0; n < ket1.size(); ++n)
            if (std::abs(ket1[n]) > 1e-10) {
                ket1 *= std::conj(ket1[n]) / std::abs(ket1[n]);
                break;
            }
    }

    RungGroundPair pair;
    pair.L = L;
    pair.bc_rung = bc_rung;
    pair.w_c = w_c;
    pair.ket0 = Eigen::VectorXcd::Zero(1 << L);
    pair.ket0[0] = 1.0;
    pair.ket1 = ket1;
    pair.E_g = e0 - 0.5 * w_c * L;

    // Verify the doublet against the full spectrum at w_c.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> full(build_rung_hamiltonian(L, bc_rung, w_c));
    const auto& ev = full.eigenvalues();
    if (std::abs(ev[0] - pair.E_g) > 1e-10 || std::abs(ev[1] - pair.E_g) > 1e-10)
        throw std::logic_error("find_critical_field: ground doublet residual too large");
    pair.gap = ev[2] - ev[0];
    if (pair.gap < kDegeneracyTol)
        throw std::runtime_error("find_critical_field: degeneracy exceeds two at the crossing");
    return pair;
}

EffectiveCouplings effective_couplings(int L, Boundary bc_rung, double u, double v, double dw) {
    if (L == 2) bc_rung = Boundary::open;
    const double s2 = std::sqrt(2.0);
    if (L == 2)
        return {(u - v) / 4.0, (u + v) / 8.0, (u + v - 2.0 * dw) / 4.0, -(u + v) / 8.0};
    if (L == 3 && bc_rung == Boundary::open)
        return {(3.0 * u - 4.0 * v) / 12.0, (9.0 * u + 8.0 * v) / 72.0,
                (9.0 * u + 22.0 * v - 18.0 * dw) / 36.0, -(9.0 * u + 22.0 * v) / 72.0};
    if (L == 4 && bc_rung == Boundary::open)
        return {(4.0 * u - (2.0 + 3.0 * s2) * v) / 16.0, (6.0 * u + (2.0 * s2 + 5.0) * v) / 64.0,
                (10.0 * u + (2.0 * s2 + 19.0) * v - 16.0 * dw) / 32.0,
                -(10.0 * u + (2.0 * s2 + 19.0) * v) / 64.0};
    if (L == 4 && bc_rung == Boundary::periodic)
        return {(u - 2.0 * v) / 4.0, (u + 2.0 * v) / 16.0,
                (3.0 * (u + 2.0 * v) - 4.0 * dw) / 8.0, -3.0 * (u + 2.0 * v) / 16.0};
    throw std::invalid_argument(
        "effective_couplings: no closed form for this (L, bc_rung); use the projection oracle");
}

EffectiveCouplings effective_couplings_or_fitted(int L, Boundary bc_rung, Boundary bc_leg,
                                                 double u, double v, double dw) {
    try {
        EffectiveCouplings c = effective_couplings(L, bc_rung, u, v, dw);
        if (bc_leg == Boundary::periodic) c.h_boundary = 0.0;
        return c;
    } catch (const std::invalid_argument&) {
        std::cerr << "warning: no closed-form couplings for L=" << L << " bc_rung="
                  << to_string(bc_rung) << "; fitting from the projection oracle\n";
        SpinLattice lattice(3, L, bc_rung, bc_leg);
        ModelParams params{u, v, dw};
        const auto fitted = fit_xxz_couplings(projected_hamiltonian_oracle(lattice, params), 3,
                                              bc_leg);
        return fitted.couplings;
    }
}

SectorOperator build_full_hamiltonian(const SpinLattice& lattice, const ModelParams& params,
                                      const BasisPtr& basis) {
    const double w_c = find_critical_field(lattice.sites_per_rung(), lattice.bc_rung()).w_c;
    return heisenberg_operator(basis, weighted_lattice_bonds(lattice, 1.0, params.u, params.v),
                               w_c + params.dw);
}

SectorOperator build_perturbation_hamiltonian(const SpinLattice& lattice,
                                              const ModelParams& params, const BasisPtr& basis) {
    return heisenberg_operator(basis, weighted_lattice_bonds(lattice, 0.0, params.u, params.v),
                               params.dw);
}

SectorOperator build_transfer_generator(const SpinLattice& lattice, const ModelParams& params,
                                        const BasisPtr& basis) {
    return params.generator == TransferGenerator::full
               ? build_full_hamiltonian(lattice, params, basis)
               : build_perturbation_hamiltonian(lattice, params, basis);
}

SectorOperator build_effective_xxz(int N, const EffectiveCouplings& couplings, Boundary bc_leg,
                                   const BasisPtr& basis) {
    if (basis->num_sites() != N)
        throw std::invalid_argument("build_effective_xxz: basis must cover N effective sites");
    const double h_b = (bc_leg == Boundary::periodic) ? 0.0 : couplings.h_boundary;

    std::set<std::pair<int, int>> pairs;
    const int imax = (bc_leg == Boundary::periodic) ? N : N - 1;
    for (int i = 1; i <= imax; ++i) {
        int a = i - 1, b = i % N;
        pairs.insert({std::min(a, b), std::max(a, b)});
    }

    const int dim = basis->dimension();
    std::vector<Eigen::Triplet<cplx>> trips;
    for (int idx = 0; idx < dim; ++idx) {
        const std::uint64_t c = basis->config(idx);
        auto tz = [&](int s) { return ((c >> s) & 1) ? -1.0 : 1.0; };
        double diag = 0.0;
        for (auto [a, b] : pairs) {
            diag += couplings.Jzz * tz(a) * tz(b);
            if (tz(a) != tz(b)) {
                const std::uint64_t flipped = c ^ ((1ULL << a) | (1ULL << b));
                const int jdx = basis->index_of(flipped);
                if (jdx < 0) throw std::logic_error("build_effective_xxz: sector not closed");
                // tau^x tau^x + tau^y tau^y is 2 between |01> and |10>
                trips.emplace_back(jdx, idx, cplx(2.0 * couplings.Jxy, 0.0));
            }
        }
        for (int s = 0; s < N; ++s) diag += couplings.h * tz(s);
        diag += h_b * (tz(0) + tz(N - 1));
        if (diag != 0.0) trips.emplace_back(idx, idx, cplx(diag, 0.0));
    }
    Eigen::SparseMatrix<cplx> m(dim, dim);
    m.setFromTriplets(trips.begin(), trips.end());
    return SectorOperator(basis, std::move(m));
}

Eigen::MatrixXcd projected_hamiltonian_oracle(const SpinLattice& lattice,
                                              const ModelParams& params) {
    const int N = lattice.num_rungs(), L = lattice.sites_per_rung();
    if (N > 10) throw std::invalid_argument("projected_hamiltonian_oracle: N must be <= 10");
    const RungGroundPair pair = find_critical_field(L, lattice.bc_rung());
    const BasisPtr basis = build_basis(lattice.num_sites(), N);
    const SectorOperator pert = build_perturbation_hamiltonian(lattice, params, basis);

    // Tensor products of rung ground-pair states; ket0 is exactly |0...0>,
    // ket1 is a one-magnon state, so each product has popcount(l) magnons.
    const int manifold = 1 << N;
    std::vector<Eigen::VectorXcd> states(manifold);
    for (int l = 0; l < manifold; ++l) {
        std::vector<std::pair<std::uint64_t, cplx>> partial{{0ULL, cplx(1.0, 0.0)}};
        for (int i = 1; i <= N; ++i) {
            if (!((l >> (i - 1)) & 1)) continue;
            const auto sites = lattice.rung_sites(i);
            std::vector<std::pair<std::uint64_t, cplx>> next;
            next.reserve(partial.size() * L);
            for (const auto& [c, amp] : partial)
                for (int j = 1; j <= L; ++j) {
                    const cplx a = pair.ket1[1 << (L - j)];
                    if (a != cplx(0.0, 0.0)) next.emplace_back(c | (1ULL << sites[j - 1]), amp * a);
                }
            partial = std::move(next);
        }
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(basis->dimension());
        for (const auto& [c, amp] : partial) v[basis->index_of(c)] = amp;
        states[l] = std::move(v);
    }

    Eigen::MatrixXcd out(manifold, manifold);
    for (int lp = 0; lp < manifold; ++lp) {
        const Eigen::VectorXcd hv = pert.matrix() * states[lp];
        for (int l = 0; l < manifold; ++l) out(l, lp) = states[l].dot(hv);
    }
    return out;
}

FittedCouplings fit_xxz_couplings(const Eigen::MatrixXcd& matrix, int N, Boundary bc_leg) {
    const int manifold = 1 << N;
    if (matrix.rows() != manifold || matrix.cols() != manifold)
        throw std::invalid_argument("fit_xxz_couplings: matrix must be 2^N x 2^N");
    const bool separable = (bc_leg == Boundary::open) && N >= 3;

    std::set<std::pair<int, int>> pairs;
    const int imax = (bc_leg == Boundary::periodic) ? N : N - 1;
    for (int i = 1; i <= imax; ++i) {
        int a = i - 1, b = i % N;
        pairs.insert({std::min(a, b), std::max(a, b)});
    }

    // Off-diagonal: every nearest-neighbor flip-flop element equals 2 Jxy.
    double jxy_sum = 0.0;
    int jxy_count = 0;
    for (int l = 0; l < manifold; ++l)
        for (auto [a, b] : pairs) {
            const bool za = (l >> a) & 1, zb = (l >> b) & 1;
            if (za == zb) continue;
            jxy_sum += matrix(l ^ ((1 << a) | (1 << b)), l).real();
            ++jxy_count;
        }
    const double Jxy = jxy_count ? jxy_sum / (2.0 * jxy_count) : 0.0;

    // Diagonal: least squares over [sum tz tz, sum tz, tz_1 + tz_N, 1].
    const int ncols = separable ? 4 : 3;
    Eigen::MatrixXd A(manifold, ncols);
    Eigen::VectorXd d(manifold);
    for (int l = 0; l < manifold; ++l) {
        auto tz = [&](int s) { return ((l >> s) & 1) ? -1.0 : 1.0; };
        double zz = 0.0, z = 0.0;
        for (auto [a, b] : pairs) zz += tz(a) * tz(b);
        for (int s = 0; s < N; ++s) z += tz(s);
        int col = 0;
        A(l, col++) = zz;
        A(l, col++) = z;
        if (separable) A(l, col++) = tz(0) + tz(N - 1);
        A(l, col++) = 1.0;
        d[l] = matrix(l, l).real();
    }
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(d);

    FittedCouplings fit;
    fit.couplings.Jxy = Jxy;
    fit.couplings.Jzz = coef[0];
    fit.couplings.h = coef[1];
    fit.couplings.h_boundary = separable ? coef[2] : 0.0;
    fit.offset = coef[ncols - 1];
    fit.boundary_separable = separable;

    // Reconstruction residual over the whole matrix.
    Eigen::MatrixXcd tmpl = Eigen::MatrixXcd::Zero(manifold, manifold);
    for (int l = 0; l < manifold; ++l) {
        tmpl(l, l) = A.row(l).dot(coef);
        for (auto [a, b] : pairs) {
            const bool za = (l >> a) & 1, zb = (l >> b) & 1;
            if (za != zb) tmpl(l ^ ((1 << a) | (1 << b)), l) = 2.0 * Jxy;
        }
    }
    fit.residual = (matrix - tmpl).cwiseAbs().maxCoeff();
    return fit;
}

}  // namespace qst
