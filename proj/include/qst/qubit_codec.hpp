#pragma once

#include "qst/transfer.hpp"

namespace qst {

enum class Protocol { two_leg, four_leg };

struct QubitInput {
    cplx c0;
    cplx c1;
};

/// Rung-1 product state c0 |0...0> + c1 |1 at (1, sender_j)>; all other
/// rungs polarized.
SectorState embed_qubit(const BasisPtr& basis, const SpinLattice& lattice,
                        const QubitInput& qubit, int sender_j = 1);

/// Rung-local unitaries taking the embedded qubit into / out of the ground
/// doublet. Encode leaves the rung with D <= 1e-12; decode is its inverse
/// up to a global phase. `w` defaults to the rung's critical field; the
/// arbitrary-w variants adjust the final single-site rotation accordingly.
SectorState encode_two_leg(const SectorState& state, const SpinLattice& lattice, int sender_j = 1,
                           std::optional<double> w = std::nullopt);
SectorState decode_two_leg(const SectorState& state, const SpinLattice& lattice, int receiver_rung,
                           int target_j, std::optional<double> w = std::nullopt);

SectorState encode_four_leg(const SectorState& state, const SpinLattice& lattice,
                            std::optional<double> w = std::nullopt);
SectorState decode_four_leg(const SectorState& state, const SpinLattice& lattice,
                            int receiver_rung, int target_j, std::optional<double> w = std::nullopt);

/// Full encode / transfer / decode pipeline; f'(t) scores the receiver
/// qubit (1+r, target_j) against the input qubit state.
class SingleQubitTransfer {
public:
    SingleQubitTransfer(const SpinLattice& lattice, const ModelParams& params,
                        const QubitInput& qubit, int distance, int target_j, Protocol protocol,
                        int sender_j = 1);

    double fidelity(double t) const;
    TransferRecord run(const std::vector<double>& grid) const;

    /// Reuse the diagonalized Hamiltonian with a different input qubit.
    void reset_qubit(const QubitInput& qubit);

private:
    SpinLattice lattice_;
    QubitInput qubit_;
    int receiver_rung_;
    int target_j_;
    Protocol protocol_;
    int sender_j_;
    BasisPtr basis_;
    SectorOperator hamiltonian_;
    Eigen::MatrixXcd encode_;
    Eigen::MatrixXcd decode_;
    Eigen::VectorXcd coef_;
};

/// Baseline: the unencoded embedding evolved under the same generator,
/// scored on the receiver qubit with no decoding.
class BareTransfer {
public:
    BareTransfer(const SpinLattice& lattice, const ModelParams& params, const QubitInput& qubit,
                 int distance, int target_j, int sender_j = 1);

    double fidelity(double t) const;
    TransferRecord run(const std::vector<double>& grid) const;

    void reset_qubit(const QubitInput& qubit);

private:
    SpinLattice lattice_;
    QubitInput qubit_;
    int sender_j_;
    int target_site_;
    BasisPtr basis_;
    SectorOperator hamiltonian_;
    Eigen::VectorXcd coef_;
};

/// Haar-averaged f' for the protocol and the bare baseline.
HaarResult haar_average_single_qubit(const SpinLattice& lattice, const ModelParams& params,
                                     int distance, int target_j, Protocol protocol,
                                     const std::vector<double>& grid, int n_samples,
                                     std::uint64_t seed, int threads = 1);
HaarResult haar_average_bare(const SpinLattice& lattice, const ModelParams& params, int distance,
                             int target_j, const std::vector<double>& grid, int n_samples,
                             std::uint64_t seed, int threads = 1);

}  // namespace qst
