#include "qst/lattice.hpp"

#include <algorithm>
#include <set>

namespace qst {

SpinLattice::SpinLattice(int num_rungs, int sites_per_rung, Boundary bc_rung, Boundary bc_leg)
    : num_rungs_(num_rungs), sites_per_rung_(sites_per_rung), bc_rung_(bc_rung), bc_leg_(bc_leg) {
    if (num_rungs_ < 2) throw std::invalid_argument("SpinLattice: N must be >= 2");
    if (sites_per_rung_ < 2) throw std::invalid_argument("SpinLattice: L must be >= 2");
    // PBC and OBC coincide on a two-site rung.
    if (sites_per_rung_ == 2 && bc_rung_ == Boundary::periodic) bc_rung_ = Boundary::open;
}

int SpinLattice::site_index(int i, int j) const {
    if (i < 1 || i > num_rungs_ || j < 1 || j > sites_per_rung_)
        throw std::domain_error("site_index: (" + std::to_string(i) + "," + std::to_string(j) +
                                ") out of range");
    return (i - 1) * sites_per_rung_ + (j - 1);
}

std::pair<int, int> SpinLattice::site_coords(int flat) const {
    if (flat < 0 || flat >= num_sites()) throw std::domain_error("site_coords: id out of range");
    return {flat / sites_per_rung_ + 1, flat % sites_per_rung_ + 1};
}

std::vector<int> SpinLattice::rung_sites(int i) const {
    std::vector<int> s(sites_per_rung_);
    for (int j = 1; j <= sites_per_rung_; ++j) s[j - 1] = site_index(i, j);
    return s;
}

std::vector<Bond> SpinLattice::bonds(BondKind kind) const {
    const int N = num_rungs_, L = sites_per_rung_;
    const int jmax = (bc_rung_ == Boundary::periodic) ? L : L - 1;
    const int imax = (bc_leg_ == Boundary::periodic) ? N : N - 1;
    auto wrap_i = [N](int i) { return (i - 1) % N + 1; };
    auto wrap_j = [L](int j) { return (j - 1) % L + 1; };

    std::vector<Bond> out;
    switch (kind) {
        case BondKind::rung:
            for (int i = 1; i <= N; ++i)
                for (int j = 1; j <= jmax; ++j)
                    out.emplace_back(site_index(i, j), site_index(i, wrap_j(j + 1)));
            break;
        case BondKind::leg:
            for (int i = 1; i <= imax; ++i)
                for (int j = 1; j <= L; ++j)
                    out.emplace_back(site_index(i, j), site_index(wrap_i(i + 1), j));
            break;
        case BondKind::diagonal:
            // j-range follows bc_rung, i-range follows bc_leg.
            for (int i = 1; i <= imax; ++i)
                for (int j = 1; j <= jmax; ++j) {
                    out.emplace_back(site_index(i, wrap_j(j + 1)), site_index(wrap_i(i + 1), j));
                    out.emplace_back(site_index(i, j), site_index(wrap_i(i + 1), wrap_j(j + 1)));
                }
            break;
    }
    // No repeated unordered pairs (wrap bonds on a 2-cell direction would
    // otherwise double-count the single physical coupling).
    std::set<std::pair<int, int>> seen;
    std::vector<Bond> unique;
    unique.reserve(out.size());
    for (const auto& b : out)
        if (seen.insert({b.a, b.b}).second) unique.push_back(b);
    return unique;
}

}  // namespace qst
