#pragma once

#include "qst/qubit_codec.hpp"
#include "qst/transfer.hpp"

namespace qst {

/// Generalized geometric measure: 1 minus the maximal squared Schmidt
/// coefficient over all nonempty proper bipartitions. State uses ket-string
/// indexing (qubit 1 = most significant bit); num_qubits <= 10.
double ggm(const Eigen::VectorXcd& state, int num_qubits);

/// G(|a1|) for the ground-doublet superposition family of one rung.
std::vector<std::pair<double, double>> ggm_curve(int L, Boundary bc_rung,
                                                 const std::vector<double>& a1_grid);

struct ScanPoint {
    double x;
    double y;
    double D;
    double eps;
};

/// D and epsilon maps for the xi family on a two-leg ladder (grid over b
/// and theta) at fixed (a1, a2); epsilon evaluated at the given distance.
std::vector<ScanPoint> high_energy_scan_L2(const SpinLattice& lattice, const ModelParams& params,
                                           double a1, double a2, const std::vector<double>& b_grid,
                                           const std::vector<double>& theta_grid, int sender = 1,
                                           int distance = 2,
                                           const std::vector<double>& t_grid = default_time_grid());

/// W-class scan on a three-leg ladder: two of (b1, b2, theta1, theta2) vary
/// and the other two are fixed.
enum class WAxis { b1, b2, theta1, theta2 };
std::vector<ScanPoint> high_energy_scan_L3(const SpinLattice& lattice, const ModelParams& params,
                                           double a1, double a2, WAxis x_axis,
                                           const std::vector<double>& x_grid, WAxis y_axis,
                                           const std::vector<double>& y_grid, double fixed_b1,
                                           double fixed_b2, double fixed_theta1,
                                           double fixed_theta2, int sender = 1, int distance = 2,
                                           const std::vector<double>& t_grid = default_time_grid());

struct SweepRow {
    int r;
    double f_m;
    double t_star;
    double mean_f_m;  // NaN unless a Haar average was requested
};

std::vector<SweepRow> sweep_r(const SpinLattice& lattice, const ModelParams& params,
                              const RungInput& input, const std::vector<int>& distances,
                              const std::vector<double>& t_grid, int sender = 1,
                              int haar_samples = 0, std::uint64_t haar_seed = 0, int threads = 1);

struct OptimizeResult {
    double f_m;
    double u;
    double v;
    double dw;
    int evaluations;
};

/// Maximize f_m over (u, v, dw) in [0, box]^3: coarse grid then Nelder-Mead
/// refinement from the best grid point, with evaluations clamped to the box.
OptimizeResult optimize_fm(const SpinLattice& lattice, const RungInput& input, int sender,
                           int distance, const std::vector<double>& t_grid, double box = 0.1,
                           int grid_points_per_axis = 5);

double spearman_rank_correlation(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qst
