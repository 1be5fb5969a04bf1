#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qst/models.hpp"
#include "qst/propagation.hpp"
#include "qst/sector_space.hpp"

namespace qst {

enum class InputVariant { low_energy, xi_L2, w_class_L3 };

/// Parametrized rung input states. low_energy lives in the ground doublet;
/// xi_L2 and w_class_L3 admit a high-energy component.
struct RungInput {
    InputVariant variant = InputVariant::low_energy;
    double a1 = 0.0;
    double a2 = 0.0;
    // xi_L2: a1|00> + e^{i a2} sqrt(1-a1^2) (b|01> + e^{i theta} sqrt(1-b^2)|10>)
    double b = 0.0;
    double theta = 0.0;
    // w_class_L3 magnon amplitudes (b1, b2 e^{i theta1}, sqrt(1-b1^2-b2^2) e^{i theta2})
    double b1 = 0.0;
    double b2 = 0.0;
    double theta1 = 0.0;
    double theta2 = 0.0;
};

Eigen::VectorXcd prepare_rung_input(const RungGroundPair& pair, const RungInput& input);

/// D = 1 - |<0|psi>|^2 - |<1|psi>|^2, the weight outside the ground doublet.
double high_energy_overlap(const Eigen::VectorXcd& rung_state, const RungGroundPair& pair);

struct TransferRecord {
    std::vector<double> t;
    std::vector<double> f;
    std::vector<double> f_eff;  // empty unless both pipelines ran
};

std::vector<double> default_time_grid(double t_max = 100.0, double dt = 0.1);

/// Full quasi-1D pipeline: embed the rung state at the sender, evolve under
/// the transfer generator, and score the receiver rung's reduced state
/// against the input.
class RungTransfer {
public:
    RungTransfer(const SpinLattice& lattice, const ModelParams& params,
                 const Eigen::VectorXcd& rung_state, int sender, int distance);

    double fidelity(double t) const;
    TransferRecord run(const std::vector<double>& grid) const;

    /// Reuse the diagonalized Hamiltonian with a different input state.
    void reset_input(const Eigen::VectorXcd& rung_state);

    const SectorOperator& hamiltonian() const { return hamiltonian_; }
    int receiver() const { return receiver_; }

private:
    SpinLattice lattice_;
    int sender_;
    int receiver_;
    Eigen::VectorXcd rung_state_;
    BasisPtr basis_;
    SectorOperator hamiltonian_;
    std::vector<int> receiver_sites_;
    std::shared_ptr<const struct FidelityKernel> kernel_;
    Eigen::VectorXcd coef_;  // eigenbasis coordinates of the initial state
};

enum class ProjectionMode { normalized, unnormalized };

/// Ground-doublet component (c0, c1) of a rung state.
Eigen::Vector2cd project_to_pair(const Eigen::VectorXcd& rung_state, const RungGroundPair& pair,
                                 ProjectionMode mode);

/// Effective 1D XXZ pipeline over N effective sites.
class EffectiveTransfer {
public:
    EffectiveTransfer(int N, const EffectiveCouplings& couplings, Boundary bc_leg,
                      const Eigen::Vector2cd& qubit, int sender, int distance);

    double fidelity(double t) const;
    TransferRecord run(const std::vector<double>& grid) const;

private:
    int receiver_;
    Eigen::Vector2cd qubit_;
    BasisPtr basis_;
    SectorOperator hamiltonian_;
    Eigen::VectorXcd coef_;
};

/// Grid argmax; with an evaluator, refined by golden-section within one
/// grid step of the first maximizer (t tolerance 1e-4).
std::pair<double, double> max_fidelity(const TransferRecord& record);
std::pair<double, double> max_fidelity(const TransferRecord& record,
                                       const std::function<double(double)>& evaluate);

struct HaarResult {
    std::vector<double> t;
    std::vector<double> mean_f;
    double mean_f_max = 0.0;
    double t_at_max = 0.0;
};

/// Haar samples over the two-dim ground subspace: a1 = sqrt(U), a2 uniform
/// in [0, 2pi). Sample curves are combined in fixed chunk order with
/// compensated summation, so results are bit-identical for a given seed
/// regardless of thread count.
HaarResult haar_average(const std::vector<double>& grid, int n_samples, std::uint64_t seed,
                        const std::function<std::vector<double>(double a1, double a2)>& curve_fn,
                        int threads = 1);

HaarResult haar_average_rr(const SpinLattice& lattice, const ModelParams& params, int sender,
                           int distance, const std::vector<double>& grid, int n_samples,
                           std::uint64_t seed, int threads = 1);

HaarResult haar_average_effective(int N, const EffectiveCouplings& couplings, Boundary bc_leg,
                                  int sender, int distance, const std::vector<double>& grid,
                                  int n_samples, std::uint64_t seed, int threads = 1);

/// Both pipelines on the same input and grid.
TransferRecord dual_transfer(const SpinLattice& lattice, const ModelParams& params,
                             const RungInput& input, int sender, int distance,
                             const std::vector<double>& grid,
                             ProjectionMode mode = ProjectionMode::normalized);

/// max_t |f - f_eff| over the grid.
double epsilon_error(const SpinLattice& lattice, const ModelParams& params,
                     const RungInput& input, int sender, int distance,
                     const std::vector<double>& grid,
                     ProjectionMode mode = ProjectionMode::normalized);

}  // namespace qst
