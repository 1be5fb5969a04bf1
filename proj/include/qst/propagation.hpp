#pragma once

#include <memory>

#include "qst/models.hpp"
#include "qst/sector_space.hpp"

namespace qst {

/// Dense eigendecomposition of a Hermitian sector operator; cached on the
/// operator so repeated evolutions reuse it. Dimension capped at 4096.
std::shared_ptr<const EigenSystem> diagonalize(const SectorOperator& op);

/// e^{-iHt} |psi> via the cached eigendecomposition.
SectorState evolve(const SectorOperator& op, const SectorState& state, double t);

/// exp(-i duration H_rung(w)) on one rung, identity elsewhere. Conserves
/// total magnetization, so it never leaves the sector.
SectorState rung_unitary(const SectorState& state, const SpinLattice& lattice, int rung, double w,
                         double duration);

/// The dense 2^L rung propagator itself (ket-string indexing).
Eigen::MatrixXcd rung_propagator(int L, Boundary bc_rung, double w, double duration);

}  // namespace qst
