#pragma once

#include <Eigen/Dense>
#include <optional>

#include "qst/lattice.hpp"
#include "qst/sector_space.hpp"

namespace qst {

/// Which generator drives the transfer step: the full Hamiltonian at
/// w = w_c + dw, or the perturbation alone (leg + diagonal + dw-field).
enum class TransferGenerator { full, perturbation_only };

/// Dimensionless couplings in units of J_perp: u = J_par/J_perp,
/// v = J_d/J_perp, dw = w - w_c.
struct ModelParams {
    double u = 0.0;
    double v = 0.0;
    double dw = 0.0;
    TransferGenerator generator = TransferGenerator::full;

    bool in_perturbation_regime() const {
        return u >= 0.0 && u <= 0.1 && v >= 0.0 && v <= 0.1 && std::abs(dw) <= 0.1;
    }
};

/// Degenerate rung ground doublet at the critical field. ket0 is exactly
/// the polarized state |0>^L; ket1 lives in the one-magnon subspace.
/// 2^L vectors use ket-string indexing (qubit j = bit L-j).
struct RungGroundPair {
    int L;
    Boundary bc_rung;
    double w_c;
    Eigen::VectorXcd ket0;
    Eigen::VectorXcd ket1;
    double E_g;
    double gap;  // third eigenvalue minus E_g
};

struct EffectiveCouplings {
    double Jxy = 0.0;
    double Jzz = 0.0;
    double h = 0.0;
    double h_boundary = 0.0;
};

/// Rung Hamiltonian (1/4) sum_j sigma_j.sigma_{j+1} - (w/2) sum_j sigma^z_j
/// as a dense 2^L matrix, j-range per the rung boundary condition.
Eigen::MatrixXcd build_rung_hamiltonian(int L, Boundary bc_rung, double w);

/// Critical field and ground doublet via the zero-field gap between the
/// polarized state and the lowest one-magnon state. Throws when no two-fold
/// degeneracy exists (periodic rungs with odd L).
RungGroundPair find_critical_field(int L, Boundary bc_rung);

/// Closed-form effective XXZ couplings; supported (L, bc_rung) pairs are
/// (2, open), (3, open), (4, open), (4, periodic). Throws otherwise.
EffectiveCouplings effective_couplings(int L, Boundary bc_rung, double u, double v, double dw);

/// Closed form when available, otherwise fitted from the projection oracle
/// on an N = 3 lattice with the given leg boundary condition.
EffectiveCouplings effective_couplings_or_fitted(int L, Boundary bc_rung, Boundary bc_leg,
                                                 double u, double v, double dw);

/// Full lattice Hamiltonian at w = w_c + dw in the given sector basis.
SectorOperator build_full_hamiltonian(const SpinLattice& lattice, const ModelParams& params,
                                      const BasisPtr& basis);

/// Perturbation only: u * legs + v * diagonals - (dw/2) sum sigma^z.
SectorOperator build_perturbation_hamiltonian(const SpinLattice& lattice,
                                              const ModelParams& params, const BasisPtr& basis);

/// Generator selected by params.generator.
SectorOperator build_transfer_generator(const SpinLattice& lattice, const ModelParams& params,
                                        const BasisPtr& basis);

/// Effective 1D XXZ chain over N effective sites. tau^z = +1 on the
/// effective |0> (bit 0). The boundary field is dropped and the pair sum
/// wraps when bc_leg is periodic.
SectorOperator build_effective_xxz(int N, const EffectiveCouplings& couplings, Boundary bc_leg,
                                   const BasisPtr& basis);

/// First-order degenerate projection: matrix elements of the perturbation
/// between all 2^N tensor products of rung ground-pair states. Index bit
/// (i-1) set means rung i is in ket1.
Eigen::MatrixXcd projected_hamiltonian_oracle(const SpinLattice& lattice,
                                              const ModelParams& params);

struct FittedCouplings {
    EffectiveCouplings couplings;
    double offset;             // identity shift absorbed by the projection
    double residual;           // max-norm of (matrix - template)
    bool boundary_separable;   // false on N = 2 open, where h and h' coincide
};

/// Least-squares fit of the XXZ template to a projected 2^N matrix.
/// When boundary_separable is false, couplings.h carries h + h_boundary
/// and couplings.h_boundary is zero.
FittedCouplings fit_xxz_couplings(const Eigen::MatrixXcd& matrix, int N, Boundary bc_leg);

}  // namespace qst
