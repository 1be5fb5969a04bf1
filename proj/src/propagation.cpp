#include "qst/propagation.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace qst {

std::shared_ptr<const EigenSystem> diagonalize(const SectorOperator& op) {
    if (auto cached = op.eigensystem()) return cached;
    const int dim = op.dimension();
    if (dim > 4096) throw std::invalid_argument("diagonalize: dimension exceeds 4096");

    const Eigen::MatrixXcd dense = Eigen::MatrixXcd(op.matrix());
    if ((dense - dense.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("diagonalize: operator is not Hermitian");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense);
    auto eig = std::make_shared<EigenSystem>();
    eig->eigenvalues = solver.eigenvalues();
    eig->eigenvectors = solver.eigenvectors();

    const Eigen::MatrixXcd recon = eig->eigenvectors *
                                   eig->eigenvalues.asDiagonal().toDenseMatrix().cast<cplx>() *
                                   eig->eigenvectors.adjoint();
    if ((dense - recon).cwiseAbs().maxCoeff() > 1e-10)
        throw std::runtime_error("diagonalize: reconstruction residual exceeds 1e-10");

    op.set_eigensystem(eig);
    return eig;
}

SectorState evolve(const SectorOperator& op, const SectorState& state, double t) {
    if (state.basis.get() != op.basis().get())
        throw std::invalid_argument("evolve: basis mismatch");
    const auto eig = diagonalize(op);
    Eigen::VectorXcd coef = eig->eigenvectors.adjoint() * state.amplitudes;
    for (int k = 0; k < coef.size(); ++k)
        coef[k] *= std::exp(cplx(0.0, -eig->eigenvalues[k] * t));
    return {state.basis, eig->eigenvectors * coef};
}

Eigen::MatrixXcd rung_propagator(int L, Boundary bc_rung, double w, double duration) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(build_rung_hamiltonian(L, bc_rung, w));
    Eigen::VectorXcd phases(solver.eigenvalues().size());
    for (int k = 0; k < phases.size(); ++k)
        phases[k] = std::exp(cplx(0.0, -solver.eigenvalues()[k] * duration));
    return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

SectorState rung_unitary(const SectorState& state, const SpinLattice& lattice, int rung, double w,
                         double duration) {
    if (duration == 0.0) return state;
    const Eigen::MatrixXcd U =
        rung_propagator(lattice.sites_per_rung(), lattice.bc_rung(), w, duration);
    return apply_local_unitary(state, lattice.rung_sites(rung), U);
}

}  // namespace qst
