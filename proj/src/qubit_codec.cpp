#include "qst/qubit_codec.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qst {

namespace {

constexpr double kPi = std::numbers::pi;

void check_qubit(const QubitInput& q) {
    if (std::abs(std::norm(q.c0) + std::norm(q.c1) - 1.0) > 1e-12)
        throw std::invalid_argument("qubit input must be normalized");
}

double rung_critical_field(const SpinLattice& lattice) {
    return find_critical_field(lattice.sites_per_rung(), lattice.bc_rung()).w_c;
}

/// Diagonal exp(-i alpha sigma^z) on qubit j of a 2^L rung space.
Eigen::MatrixXcd rung_phase_gate(int L, int j, double alpha) {
    const int dim = 1 << L;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (int p = 0; p < dim; ++p) {
        const bool down = (p >> (L - j)) & 1;
        m(p, p) = std::exp(cplx(0.0, down ? alpha : -alpha));
    }
    return m;
}

Eigen::MatrixXcd rung_pauli_z(int L, int j) {
    const int dim = 1 << L;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (int p = 0; p < dim; ++p) m(p, p) = ((p >> (L - j)) & 1) ? -1.0 : 1.0;
    return m;
}

/// Final decode rotation; the identity / sigma^z forms at w = w_c pick up
/// only a global phase relative to the arbitrary-w expressions.
Eigen::MatrixXcd decode_rotation(int L, int j, double w, double w_c, bool odd_leg) {
    if (w == w_c) return odd_leg ? Eigen::MatrixXcd::Identity(1 << L, 1 << L) : rung_pauli_z(L, j);
    return rung_phase_gate(L, j, odd_leg ? w * kPi : (w - 0.5) * kPi);
}

Eigen::MatrixXcd encode_matrix_two_leg(const SpinLattice& lattice, int sender_j, double w) {
    return rung_phase_gate(2, sender_j, kPi / 4.0) *
           rung_propagator(2, lattice.bc_rung(), w, kPi / 2.0);
}

Eigen::MatrixXcd decode_matrix_two_leg(const SpinLattice& lattice, int target_j, double w,
                                       double w_c) {
    return decode_rotation(2, target_j, w, w_c, target_j == 1) *
           rung_propagator(2, lattice.bc_rung(), w, 3.0 * kPi / 2.0) *
           rung_phase_gate(2, target_j, -kPi / 4.0);
}

Eigen::MatrixXcd encode_matrix_four_leg(const SpinLattice& lattice, double w) {
    return rung_phase_gate(4, 4, kPi / 4.0) * rung_phase_gate(4, 2, kPi / 4.0) *
           rung_pauli_z(4, 1) * rung_propagator(4, lattice.bc_rung(), w, kPi / 2.0);
}

Eigen::MatrixXcd decode_matrix_four_leg(const SpinLattice& lattice, int target_j, double w,
                                        double w_c) {
    const bool odd = (target_j == 1 || target_j == 3);
    const int p1 = odd ? 2 : 1, p2 = odd ? 4 : 3;  // partner legs getting V_d
    return decode_rotation(4, target_j, w, w_c, odd) *
           rung_propagator(4, lattice.bc_rung(), w, 3.0 * kPi / 2.0) *
           rung_phase_gate(4, p1, -kPi / 4.0) * rung_phase_gate(4, p2, -kPi / 4.0) *
           rung_pauli_z(4, target_j);
}

void require_two_leg(const SpinLattice& lattice) {
    if (lattice.sites_per_rung() != 2)
        throw std::invalid_argument("two-leg protocol requires L = 2");
}

void require_four_leg(const SpinLattice& lattice) {
    if (lattice.sites_per_rung() != 4 || lattice.bc_rung() != Boundary::periodic)
        throw std::invalid_argument("four-leg protocol requires L = 4 with periodic rungs");
}

}  // namespace

SectorState embed_qubit(const BasisPtr& basis, const SpinLattice& lattice,
                        const QubitInput& qubit, int sender_j) {
    check_qubit(qubit);
    const int L = lattice.sites_per_rung();
    if (sender_j < 1 || sender_j > L) throw std::domain_error("embed_qubit: sender_j out of range");
    Eigen::VectorXcd rung = Eigen::VectorXcd::Zero(1 << L);
    rung[0] = qubit.c0;
    rung[1 << (L - sender_j)] = qubit.c1;
    return embed_rung_state(basis, lattice, 1, rung);
}

SectorState encode_two_leg(const SectorState& state, const SpinLattice& lattice, int sender_j,
                           std::optional<double> w) {
    require_two_leg(lattice);
    const double wv = w.value_or(rung_critical_field(lattice));
    SectorState out = rung_unitary(state, lattice, 1, wv, kPi / 2.0);
    return apply_diagonal_phase(out, lattice.site_index(1, sender_j), kPi / 4.0);
}

SectorState decode_two_leg(const SectorState& state, const SpinLattice& lattice, int receiver_rung,
                           int target_j, std::optional<double> w) {
    require_two_leg(lattice);
    if (target_j < 1 || target_j > 2) throw std::domain_error("decode_two_leg: bad target_j");
    const double w_c = rung_critical_field(lattice);
    const double wv = w.value_or(w_c);
    SectorState out =
        apply_diagonal_phase(state, lattice.site_index(receiver_rung, target_j), -kPi / 4.0);
    out = rung_unitary(out, lattice, receiver_rung, wv, 3.0 * kPi / 2.0);
    return apply_local_unitary(out, {lattice.site_index(receiver_rung, target_j)},
                               decode_rotation(1, 1, wv, w_c, target_j == 1));
}

SectorState encode_four_leg(const SectorState& state, const SpinLattice& lattice,
                            std::optional<double> w) {
    require_four_leg(lattice);
    const double wv = w.value_or(rung_critical_field(lattice));
    SectorState out = rung_unitary(state, lattice, 1, wv, kPi / 2.0);
    out = apply_local_pauli_z(out, lattice.site_index(1, 1));
    out = apply_diagonal_phase(out, lattice.site_index(1, 2), kPi / 4.0);
    return apply_diagonal_phase(out, lattice.site_index(1, 4), kPi / 4.0);
}

SectorState decode_four_leg(const SectorState& state, const SpinLattice& lattice,
                            int receiver_rung, int target_j, std::optional<double> w) {
    require_four_leg(lattice);
    if (target_j < 1 || target_j > 4) throw std::domain_error("decode_four_leg: bad target_j");
    const double w_c = rung_critical_field(lattice);
    const double wv = w.value_or(w_c);
    const bool odd = (target_j == 1 || target_j == 3);
    SectorState out = apply_local_pauli_z(state, lattice.site_index(receiver_rung, target_j));
    for (int partner : odd ? std::vector<int>{2, 4} : std::vector<int>{1, 3})
        out = apply_diagonal_phase(out, lattice.site_index(receiver_rung, partner), -kPi / 4.0);
    out = rung_unitary(out, lattice, receiver_rung, wv, 3.0 * kPi / 2.0);
    return apply_local_unitary(out, {lattice.site_index(receiver_rung, target_j)},
                               decode_rotation(1, 1, wv, w_c, odd));
}

// ---------------------------------------------------------------------------

SingleQubitTransfer::SingleQubitTransfer(const SpinLattice& lattice, const ModelParams& params,
                                         const QubitInput& qubit, int distance, int target_j,
                                         Protocol protocol, int sender_j)
    : lattice_(lattice), qubit_(qubit), target_j_(target_j), protocol_(protocol),
      basis_(build_basis(lattice.num_sites(), 1)),
      hamiltonian_(build_transfer_generator(lattice, params, basis_)) {
    const int N = lattice.num_rungs();
    if (lattice.bc_leg() == Boundary::periodic)
        receiver_rung_ = distance % N + 1;
    else if (1 + distance <= N)
        receiver_rung_ = 1 + distance;
    else
        throw std::domain_error("SingleQubitTransfer: receiver out of range");

    const double w_c = rung_critical_field(lattice);
    Eigen::MatrixXcd encode, decode;
    if (protocol == Protocol::two_leg) {
        require_two_leg(lattice);
        if (target_j < 1 || target_j > 2)
            throw std::domain_error("SingleQubitTransfer: bad target_j");
        encode = encode_matrix_two_leg(lattice, sender_j, w_c);
        decode = decode_matrix_two_leg(lattice, target_j, w_c, w_c);
    } else {
        require_four_leg(lattice);
        if (sender_j != 1)
            throw std::invalid_argument("SingleQubitTransfer: four-leg sender is qubit (1,1)");
        if (target_j < 1 || target_j > 4)
            throw std::domain_error("SingleQubitTransfer: bad target_j");
        encode = encode_matrix_four_leg(lattice, w_c);
        decode = decode_matrix_four_leg(lattice, target_j, w_c, w_c);
    }
    encode_ = encode;
    decode_ = decode;
    sender_j_ = sender_j;
    diagonalize(hamiltonian_);
    reset_qubit(qubit);
}

void SingleQubitTransfer::reset_qubit(const QubitInput& qubit) {
    qubit_ = qubit;
    SectorState init = embed_qubit(basis_, lattice_, qubit_, sender_j_);
    init = apply_local_unitary(init, lattice_.rung_sites(1), encode_);
    coef_ = hamiltonian_.eigensystem()->eigenvectors.adjoint() * init.amplitudes;
}

double SingleQubitTransfer::fidelity(double t) const {
    const auto& eig = *hamiltonian_.eigensystem();
    Eigen::VectorXcd phased(coef_.size());
    for (int k = 0; k < coef_.size(); ++k)
        phased[k] = coef_[k] * std::exp(cplx(0.0, -eig.eigenvalues[k] * t));
    SectorState st{basis_, eig.eigenvectors * phased};
    st = apply_local_unitary(st, lattice_.rung_sites(receiver_rung_), decode_);
    const Eigen::MatrixXcd rho =
        reduced_density_matrix(st, {lattice_.site_index(receiver_rung_, target_j_)});
    Eigen::Vector2cd q(qubit_.c0, qubit_.c1);
    return std::max(0.0, (q.adjoint() * rho * q)(0, 0).real());
}

TransferRecord SingleQubitTransfer::run(const std::vector<double>& grid) const {
    TransferRecord rec;
    rec.t = grid;
    rec.f.reserve(grid.size());
    for (double t : grid) rec.f.push_back(fidelity(t));
    return rec;
}

// ---------------------------------------------------------------------------

BareTransfer::BareTransfer(const SpinLattice& lattice, const ModelParams& params,
                           const QubitInput& qubit, int distance, int target_j, int sender_j)
    : lattice_(lattice), qubit_(qubit), sender_j_(sender_j),
      basis_(build_basis(lattice.num_sites(), 1)),
      hamiltonian_(build_transfer_generator(lattice, params, basis_)) {
    const int N = lattice.num_rungs();
    int receiver;
    if (lattice.bc_leg() == Boundary::periodic)
        receiver = distance % N + 1;
    else if (1 + distance <= N)
        receiver = 1 + distance;
    else
        throw std::domain_error("BareTransfer: receiver out of range");
    if (target_j < 1 || target_j > lattice.sites_per_rung())
        throw std::domain_error("BareTransfer: bad target_j");
    target_site_ = lattice.site_index(receiver, target_j);
    diagonalize(hamiltonian_);
    reset_qubit(qubit);
}

void BareTransfer::reset_qubit(const QubitInput& qubit) {
    qubit_ = qubit;
    const SectorState init = embed_qubit(basis_, lattice_, qubit_, sender_j_);
    coef_ = hamiltonian_.eigensystem()->eigenvectors.adjoint() * init.amplitudes;
}

double BareTransfer::fidelity(double t) const {
    const auto& eig = *hamiltonian_.eigensystem();
    Eigen::VectorXcd phased(coef_.size());
    for (int k = 0; k < coef_.size(); ++k)
        phased[k] = coef_[k] * std::exp(cplx(0.0, -eig.eigenvalues[k] * t));
    const SectorState st{basis_, eig.eigenvectors * phased};
    const Eigen::MatrixXcd rho = reduced_density_matrix(st, {target_site_});
    Eigen::Vector2cd q(qubit_.c0, qubit_.c1);
    return std::max(0.0, (q.adjoint() * rho * q)(0, 0).real());
}

TransferRecord BareTransfer::run(const std::vector<double>& grid) const {
    TransferRecord rec;
    rec.t = grid;
    rec.f.reserve(grid.size());
    for (double t : grid) rec.f.push_back(fidelity(t));
    return rec;
}

// ---------------------------------------------------------------------------

namespace {
QubitInput haar_qubit(double a1, double a2) {
    return {cplx(a1, 0.0), std::exp(cplx(0.0, a2)) * std::sqrt(std::max(0.0, 1.0 - a1 * a1))};
}
}  // namespace

HaarResult haar_average_single_qubit(const SpinLattice& lattice, const ModelParams& params,
                                     int distance, int target_j, Protocol protocol,
                                     const std::vector<double>& grid, int n_samples,
                                     std::uint64_t seed, int threads) {
    SingleQubitTransfer base(lattice, params, haar_qubit(1.0, 0.0), distance, target_j, protocol);
    auto curve = [&](double a1, double a2) {
        SingleQubitTransfer sim = base;
        sim.reset_qubit(haar_qubit(a1, a2));
        return sim.run(grid).f;
    };
    return haar_average(grid, n_samples, seed, curve, threads);
}

HaarResult haar_average_bare(const SpinLattice& lattice, const ModelParams& params, int distance,
                             int target_j, const std::vector<double>& grid, int n_samples,
                             std::uint64_t seed, int threads) {
    BareTransfer base(lattice, params, haar_qubit(1.0, 0.0), distance, target_j);
    auto curve = [&](double a1, double a2) {
        BareTransfer sim = base;
        sim.reset_qubit(haar_qubit(a1, a2));
        return sim.run(grid).f;
    };
    return haar_average(grid, n_samples, seed, curve, threads);
}

}  // namespace qst
