#include "qst/sector_space.hpp"

#include <bit>
#include <map>
#include <stdexcept>

namespace qst {

namespace {

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

SectorBasis::SectorBasis(int num_sites, int max_excitations)
    : num_sites_(num_sites), max_excitations_(max_excitations) {
    if (num_sites_ < 1 || num_sites_ > 62)
        throw std::invalid_argument("SectorBasis: site count must be in 1..62");
    if (max_excitations_ < 0 || max_excitations_ > num_sites_)
        throw std::invalid_argument("SectorBasis: k_max must be in 0..M");
    std::uint64_t dim = 0;
    for (int k = 0; k <= max_excitations_; ++k) {
        dim += binomial(num_sites_, k);
        if (dim > 4'000'000) throw std::invalid_argument("SectorBasis: dimension too large");
    }

    configs_.reserve(dim);
    lookup_.reserve(dim);
    const std::uint64_t limit = (num_sites_ == 62) ? ~0ULL : (1ULL << num_sites_);
    for (int k = 0; k <= max_excitations_; ++k) {
        if (k == 0) {
            configs_.push_back(0);
            continue;
        }
        // Gosper's hack enumerates k-bit configurations in numeric order.
        std::uint64_t v = (1ULL << k) - 1;
        while (v < limit) {
            configs_.push_back(v);
            std::uint64_t c = v & -v, r = v + c;
            std::uint64_t next = (((r ^ v) >> 2) / c) | r;
            if (next <= v) break;
            v = next;
        }
    }
    for (int i = 0; i < static_cast<int>(configs_.size()); ++i) lookup_[configs_[i]] = i;
}

int SectorBasis::index_of(std::uint64_t config) const {
    auto it = lookup_.find(config);
    return it == lookup_.end() ? -1 : it->second;
}

BasisPtr build_basis(int num_sites, int max_excitations) {
    return std::make_shared<SectorBasis>(num_sites, max_excitations);
}

SectorOperator::SectorOperator(BasisPtr basis, Eigen::SparseMatrix<cplx> matrix)
    : basis_(std::move(basis)), matrix_(std::move(matrix)) {
    if (matrix_.rows() != basis_->dimension() || matrix_.cols() != basis_->dimension())
        throw std::invalid_argument("SectorOperator: matrix/basis dimension mismatch");
}

SectorState SectorOperator::apply(const SectorState& state) const {
    if (state.basis.get() != basis_.get())
        throw std::invalid_argument("SectorOperator::apply: basis mismatch");
    return {state.basis, matrix_ * state.amplitudes};
}

SectorOperator heisenberg_operator(const BasisPtr& basis,
                                   const std::vector<std::pair<Bond, double>>& weighted_bonds,
                                   const std::vector<double>& field_per_site) {
    const int M = basis->num_sites();
    const int dim = basis->dimension();
    if (static_cast<int>(field_per_site.size()) != M)
        throw std::invalid_argument("heisenberg_operator: field size mismatch");
    for (const auto& [bond, coef] : weighted_bonds)
        if (bond.b >= M) throw std::domain_error("heisenberg_operator: bond endpoint outside basis");

    std::vector<Eigen::Triplet<cplx>> trips;
    for (int idx = 0; idx < dim; ++idx) {
        const std::uint64_t c = basis->config(idx);
        double diag = 0.0;
        for (int s = 0; s < M; ++s)
            diag -= 0.5 * field_per_site[s] * (((c >> s) & 1) ? -1.0 : 1.0);
        for (const auto& [bond, coef] : weighted_bonds) {
            const bool za = (c >> bond.a) & 1, zb = (c >> bond.b) & 1;
            diag += 0.25 * coef * (za == zb ? 1.0 : -1.0);
            if (za != zb) {
                // flip-flop, weight 2 * coef/4; excitation count unchanged
                const std::uint64_t flipped = c ^ ((1ULL << bond.a) | (1ULL << bond.b));
                const int jdx = basis->index_of(flipped);
                if (jdx < 0) throw std::logic_error("heisenberg_operator: sector not closed");
                trips.emplace_back(jdx, idx, cplx(0.5 * coef, 0.0));
            }
        }
        if (diag != 0.0) trips.emplace_back(idx, idx, cplx(diag, 0.0));
    }
    Eigen::SparseMatrix<cplx> m(dim, dim);
    m.setFromTriplets(trips.begin(), trips.end());
    return SectorOperator(basis, std::move(m));
}

SectorOperator heisenberg_operator(const BasisPtr& basis,
                                   const std::vector<std::pair<Bond, double>>& weighted_bonds,
                                   double uniform_field) {
    return heisenberg_operator(basis, weighted_bonds,
                               std::vector<double>(basis->num_sites(), uniform_field));
}

SectorState apply_diagonal_phase(const SectorState& state, int site, double alpha) {
    if (site < 0 || site >= state.basis->num_sites())
        throw std::domain_error("apply_diagonal_phase: site out of range");
    const cplx up = std::exp(cplx(0.0, -alpha));   // sigma^z = +1
    const cplx down = std::exp(cplx(0.0, alpha));  // sigma^z = -1
    SectorState out{state.basis, state.amplitudes};
    for (int i = 0; i < out.basis->dimension(); ++i)
        out.amplitudes[i] *= ((out.basis->config(i) >> site) & 1) ? down : up;
    return out;
}

SectorState apply_local_pauli_z(const SectorState& state, int site) {
    if (site < 0 || site >= state.basis->num_sites())
        throw std::domain_error("apply_local_pauli_z: site out of range");
    SectorState out{state.basis, state.amplitudes};
    for (int i = 0; i < out.basis->dimension(); ++i)
        if ((out.basis->config(i) >> site) & 1) out.amplitudes[i] = -out.amplitudes[i];
    return out;
}

SectorState apply_local_unitary(const SectorState& state, const std::vector<int>& sites,
                                const Eigen::MatrixXcd& unitary) {
    const int K = static_cast<int>(sites.size());
    const int sub_dim = 1 << K;
    if (unitary.rows() != sub_dim || unitary.cols() != sub_dim)
        throw std::invalid_argument("apply_local_unitary: unitary dimension mismatch");
    std::uint64_t site_mask = 0;
    for (int s : sites) {
        if (s < 0 || s >= state.basis->num_sites())
            throw std::domain_error("apply_local_unitary: site out of range");
        site_mask |= 1ULL << s;
    }

    auto local_index = [&](std::uint64_t c) {
        int p = 0;
        for (int k = 0; k < K; ++k)
            if ((c >> sites[k]) & 1) p |= 1 << (K - 1 - k);
        return p;
    };
    auto place_bits = [&](std::uint64_t outside, int p) {
        std::uint64_t c = outside;
        for (int k = 0; k < K; ++k)
            if ((p >> (K - 1 - k)) & 1) c |= 1ULL << sites[k];
        return c;
    };

    const SectorBasis& basis = *state.basis;
    // Group amplitudes by the configuration outside the acted-on sites.
    std::map<std::uint64_t, Eigen::VectorXcd> groups;
    for (int i = 0; i < basis.dimension(); ++i) {
        if (state.amplitudes[i] == cplx(0.0, 0.0)) continue;
        const std::uint64_t c = basis.config(i);
        auto [it, inserted] = groups.try_emplace(c & ~site_mask, Eigen::VectorXcd::Zero(sub_dim));
        it->second[local_index(c)] = state.amplitudes[i];
    }

    SectorState out{state.basis, Eigen::VectorXcd::Zero(basis.dimension())};
    for (auto& [outside, vec] : groups) {
        const Eigen::VectorXcd w = unitary * vec;
        for (int p = 0; p < sub_dim; ++p) {
            if (std::abs(w[p]) < 1e-15) continue;
            const int idx = basis.index_of(place_bits(outside, p));
            if (idx < 0) {
                if (std::abs(w[p]) > 1e-12)
                    throw std::runtime_error("apply_local_unitary: amplitude leaks out of sector");
                continue;
            }
            out.amplitudes[idx] += w[p];
        }
    }
    return out;
}

Eigen::MatrixXcd reduced_density_matrix(const SectorState& state, const std::vector<int>& subset) {
    const int K = static_cast<int>(subset.size());
    if (K == 0) throw std::invalid_argument("reduced_density_matrix: empty subset");
    std::uint64_t site_mask = 0;
    for (int s : subset) {
        if (s < 0 || s >= state.basis->num_sites())
            throw std::domain_error("reduced_density_matrix: site out of range");
        if ((site_mask >> s) & 1)
            throw std::invalid_argument("reduced_density_matrix: repeated site");
        site_mask |= 1ULL << s;
    }
    const int sub_dim = 1 << K;
    auto local_index = [&](std::uint64_t c) {
        int p = 0;
        for (int k = 0; k < K; ++k)
            if ((c >> subset[k]) & 1) p |= 1 << (K - 1 - k);
        return p;
    };

    const SectorBasis& basis = *state.basis;
    std::map<std::uint64_t, std::vector<std::pair<int, cplx>>> groups;
    for (int i = 0; i < basis.dimension(); ++i) {
        if (state.amplitudes[i] == cplx(0.0, 0.0)) continue;
        const std::uint64_t c = basis.config(i);
        groups[c & ~site_mask].emplace_back(local_index(c), state.amplitudes[i]);
    }

    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(sub_dim, sub_dim);
    for (const auto& [outside, entries] : groups)
        for (const auto& [pa, aa] : entries)
            for (const auto& [pb, ab] : entries) rho(pa, pb) += aa * std::conj(ab);
    return rho;
}

SectorState embed_rung_state(const BasisPtr& basis, const SpinLattice& lattice, int rung,
                             const Eigen::VectorXcd& rung_state) {
    const int L = lattice.sites_per_rung();
    if (rung_state.size() != (1 << L))
        throw std::invalid_argument("embed_rung_state: rung vector must have 2^L entries");
    if (basis->num_sites() != lattice.num_sites())
        throw std::invalid_argument("embed_rung_state: basis/lattice mismatch");
    const auto sites = lattice.rung_sites(rung);

    SectorState out{basis, Eigen::VectorXcd::Zero(basis->dimension())};
    for (int p = 0; p < (1 << L); ++p) {
        if (rung_state[p] == cplx(0.0, 0.0)) continue;
        std::uint64_t c = 0;
        for (int j = 1; j <= L; ++j)
            if ((p >> (L - j)) & 1) c |= 1ULL << sites[j - 1];
        const int idx = basis->index_of(c);
        if (idx < 0)
            throw std::runtime_error("embed_rung_state: rung component exceeds the sector cap");
        out.amplitudes[idx] = rung_state[p];
    }
    return out;
}

}  // namespace qst
