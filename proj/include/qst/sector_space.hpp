#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "qst/lattice.hpp"

namespace qst {

using cplx = std::complex<double>;

/// Basis of all spin configurations with at most k_max flipped spins
/// (a flipped spin, bit = 1, is a |1> data qubit with sigma^z = -1).
/// Configurations are ordered by (excitation count, numeric value).
class SectorBasis {
public:
    SectorBasis(int num_sites, int max_excitations);

    int num_sites() const { return num_sites_; }
    int max_excitations() const { return max_excitations_; }
    int dimension() const { return static_cast<int>(configs_.size()); }

    std::uint64_t config(int index) const { return configs_[index]; }
    /// Index of a configuration, or -1 if outside the sector.
    int index_of(std::uint64_t config) const;
    bool contains(std::uint64_t config) const { return index_of(config) >= 0; }

private:
    int num_sites_;
    int max_excitations_;
    std::vector<std::uint64_t> configs_;
    std::unordered_map<std::uint64_t, int> lookup_;
};

using BasisPtr = std::shared_ptr<const SectorBasis>;

BasisPtr build_basis(int num_sites, int max_excitations);

/// Complex amplitude vector over a SectorBasis.
struct SectorState {
    BasisPtr basis;
    Eigen::VectorXcd amplitudes;

    double norm() const { return amplitudes.norm(); }
};

struct EigenSystem {
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXcd eigenvectors; // columns, unitary
};

/// Hermitian operator in a sector basis, sparse storage, with a lazily
/// computed eigendecomposition cache (see propagation::diagonalize).
class SectorOperator {
public:
    SectorOperator(BasisPtr basis, Eigen::SparseMatrix<cplx> matrix);

    const BasisPtr& basis() const { return basis_; }
    const Eigen::SparseMatrix<cplx>& matrix() const { return matrix_; }
    int dimension() const { return basis_->dimension(); }

    SectorState apply(const SectorState& state) const;

    /// Set / fetch the eigendecomposition cache. Null until diagonalized.
    void set_eigensystem(std::shared_ptr<const EigenSystem> eig) const { eig_ = std::move(eig); }
    std::shared_ptr<const EigenSystem> eigensystem() const { return eig_; }

private:
    BasisPtr basis_;
    Eigen::SparseMatrix<cplx> matrix_;
    mutable std::shared_ptr<const EigenSystem> eig_;
};

/// Sum over weighted bonds of (coef/4) sigma.sigma minus (w_s/2) sigma^z
/// per site, restricted to the sector. Total magnetization is conserved by
/// construction: the flip-flop term never changes the excitation count.
SectorOperator heisenberg_operator(const BasisPtr& basis,
                                   const std::vector<std::pair<Bond, double>>& weighted_bonds,
                                   const std::vector<double>& field_per_site);
SectorOperator heisenberg_operator(const BasisPtr& basis,
                                   const std::vector<std::pair<Bond, double>>& weighted_bonds,
                                   double uniform_field);

/// exp(-i alpha sigma^z) on one site.
SectorState apply_diagonal_phase(const SectorState& state, int site, double alpha);

/// sigma^z on one site.
SectorState apply_local_pauli_z(const SectorState& state, int site);

/// Apply a dense unitary acting on the listed sites (identity elsewhere).
/// The first listed site is the most significant bit of the local index,
/// matching the |b_1 b_2 ... b_K> ket-string convention. Throws if the
/// result leaks out of the sector by more than 1e-12 in amplitude.
SectorState apply_local_unitary(const SectorState& state, const std::vector<int>& sites,
                                const Eigen::MatrixXcd& unitary);

/// Reduced density matrix over the listed sites; subset[0] is the most
/// significant bit of the reduced index. Trace equals <state|state>.
Eigen::MatrixXcd reduced_density_matrix(const SectorState& state, const std::vector<int>& subset);

/// Product state with one rung in `rung_state` (ket-string indexing, j = 1
/// is the most significant bit) and every other rung in |0...0>.
SectorState embed_rung_state(const BasisPtr& basis, const SpinLattice& lattice, int rung,
                             const Eigen::VectorXcd& rung_state);

}  // namespace qst
