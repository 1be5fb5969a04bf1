#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qst {

enum class Boundary { open, periodic };

inline std::string to_string(Boundary bc) {
    return bc == Boundary::open ? "open" : "periodic";
}

enum class BondKind { rung, leg, diagonal };

/// Unordered pair of flat site indices, stored with a < b.
struct Bond {
    int a;
    int b;
    Bond(int x, int y) : a(x < y ? x : y), b(x < y ? y : x) {
        if (x == y) throw std::invalid_argument("Bond: self-loop");
    }
    bool operator==(const Bond& o) const { return a == o.a && b == o.b; }
};

/// Quasi-1D zig-zag lattice of N rungs with L sites each. Rung index i runs
/// 1..N, leg index j runs 1..L. Flat site ids are row-major by rung.
/// Periodic rungs with L = 2 are normalized to open (the two conventions
/// coincide and would otherwise duplicate the single rung bond).
class SpinLattice {
public:
    SpinLattice(int num_rungs, int sites_per_rung, Boundary bc_rung, Boundary bc_leg);

    int num_rungs() const { return num_rungs_; }
    int sites_per_rung() const { return sites_per_rung_; }
    int num_sites() const { return num_rungs_ * sites_per_rung_; }
    Boundary bc_rung() const { return bc_rung_; }
    Boundary bc_leg() const { return bc_leg_; }

    /// Flat site id for (rung i, leg j), both 1-based.
    int site_index(int i, int j) const;
    /// Inverse of site_index.
    std::pair<int, int> site_coords(int flat) const;

    /// All flat site ids of one rung, ordered j = 1..L.
    std::vector<int> rung_sites(int i) const;

    std::vector<Bond> bonds(BondKind kind) const;

private:
    int num_rungs_;
    int sites_per_rung_;
    Boundary bc_rung_;
    Boundary bc_leg_;
};

}  // namespace qst
