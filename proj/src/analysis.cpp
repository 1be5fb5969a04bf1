#include "qst/analysis.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "qst/nelder_mead.hpp"

namespace qst {

double ggm(const Eigen::VectorXcd& state, int num_qubits) {
    if (num_qubits < 2 || num_qubits > 10) throw std::invalid_argument("ggm: need 2..10 qubits");
    const int dim = 1 << num_qubits;
    if (state.size() != dim) throw std::invalid_argument("ggm: state dimension mismatch");
    if (std::abs(state.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("ggm: state not normalized");

    double max_schmidt_sq = 0.0;
    for (int mask = 1; mask < dim - 1; ++mask) {
        const int comp = (dim - 1) & ~mask;
        if (mask > comp) continue;  // each bipartition once
        const int ka = std::popcount(static_cast<unsigned>(mask));
        const int kb = num_qubits - ka;
        Eigen::MatrixXcd A(1 << ka, 1 << kb);
        for (int n = 0; n < dim; ++n) {
            int row = 0, col = 0, ra = 0, rb = 0;
            for (int q = num_qubits - 1; q >= 0; --q) {  // qubit 1 first (MSB)
                const int bit = (n >> q) & 1;
                if ((mask >> q) & 1)
                    row = (row << 1) | bit, ++ra;
                else
                    col = (col << 1) | bit, ++rb;
            }
            A(row, col) = state[n];
        }
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
        const double s = svd.singularValues()[0];
        max_schmidt_sq = std::max(max_schmidt_sq, s * s);
    }
    return 1.0 - max_schmidt_sq;
}

std::vector<std::pair<double, double>> ggm_curve(int L, Boundary bc_rung,
                                                 const std::vector<double>& a1_grid) {
    const RungGroundPair pair = find_critical_field(L, bc_rung);
    std::vector<std::pair<double, double>> out;
    out.reserve(a1_grid.size());
    for (double a1 : a1_grid) {
        RungInput input;
        input.a1 = a1;
        out.emplace_back(a1, ggm(prepare_rung_input(pair, input), L));
    }
    return out;
}

std::vector<ScanPoint> high_energy_scan_L2(const SpinLattice& lattice, const ModelParams& params,
                                           double a1, double a2, const std::vector<double>& b_grid,
                                           const std::vector<double>& theta_grid, int sender,
                                           int distance, const std::vector<double>& t_grid) {
    if (lattice.sites_per_rung() != 2)
        throw std::invalid_argument("high_energy_scan_L2: lattice must have L = 2");
    const RungGroundPair pair = find_critical_field(2, lattice.bc_rung());
    std::vector<ScanPoint> out;
    out.reserve(b_grid.size() * theta_grid.size());
    for (double b : b_grid)
        for (double theta : theta_grid) {
            RungInput input;
            input.variant = InputVariant::xi_L2;
            input.a1 = a1;
            input.a2 = a2;
            input.b = b;
            input.theta = theta;
            const double D = high_energy_overlap(prepare_rung_input(pair, input), pair);
            const double eps = epsilon_error(lattice, params, input, sender, distance, t_grid);
            out.push_back({b, theta, D, eps});
        }
    return out;
}

std::vector<ScanPoint> high_energy_scan_L3(const SpinLattice& lattice, const ModelParams& params,
                                           double a1, double a2, WAxis x_axis,
                                           const std::vector<double>& x_grid, WAxis y_axis,
                                           const std::vector<double>& y_grid, double fixed_b1,
                                           double fixed_b2, double fixed_theta1,
                                           double fixed_theta2, int sender, int distance,
                                           const std::vector<double>& t_grid) {
    if (lattice.sites_per_rung() != 3)
        throw std::invalid_argument("high_energy_scan_L3: lattice must have L = 3");
    if (x_axis == y_axis) throw std::invalid_argument("high_energy_scan_L3: axes must differ");
    const RungGroundPair pair = find_critical_field(3, lattice.bc_rung());

    auto set_axis = [](RungInput& input, WAxis axis, double value) {
        switch (axis) {
            case WAxis::b1: input.b1 = value; break;
            case WAxis::b2: input.b2 = value; break;
            case WAxis::theta1: input.theta1 = value; break;
            case WAxis::theta2: input.theta2 = value; break;
        }
    };

    std::vector<ScanPoint> out;
    out.reserve(x_grid.size() * y_grid.size());
    for (double x : x_grid)
        for (double y : y_grid) {
            RungInput input;
            input.variant = InputVariant::w_class_L3;
            input.a1 = a1;
            input.a2 = a2;
            input.b1 = fixed_b1;
            input.b2 = fixed_b2;
            input.theta1 = fixed_theta1;
            input.theta2 = fixed_theta2;
            set_axis(input, x_axis, x);
            set_axis(input, y_axis, y);
            if (input.b1 * input.b1 + input.b2 * input.b2 > 1.0 + 1e-12)
                throw std::invalid_argument("high_energy_scan_L3: infeasible (b1, b2)");
            const double D = high_energy_overlap(prepare_rung_input(pair, input), pair);
            const double eps = epsilon_error(lattice, params, input, sender, distance, t_grid);
            out.push_back({x, y, D, eps});
        }
    return out;
}

std::vector<SweepRow> sweep_r(const SpinLattice& lattice, const ModelParams& params,
                              const RungInput& input, const std::vector<int>& distances,
                              const std::vector<double>& t_grid, int sender, int haar_samples,
                              std::uint64_t haar_seed, int threads) {
    const RungGroundPair pair =
        find_critical_field(lattice.sites_per_rung(), lattice.bc_rung());
    const Eigen::VectorXcd psi = prepare_rung_input(pair, input);

    std::vector<SweepRow> out;
    out.reserve(distances.size());
    for (int r : distances) {
        RungTransfer sim(lattice, params, psi, sender, r);
        const TransferRecord rec = sim.run(t_grid);
        auto [f_m, t_star] = max_fidelity(rec, [&](double t) { return sim.fidelity(t); });
        SweepRow row{r, f_m, t_star, std::numeric_limits<double>::quiet_NaN()};
        if (haar_samples > 0)
            row.mean_f_m = haar_average_rr(lattice, params, sender, r, t_grid, haar_samples,
                                           haar_seed, threads)
                               .mean_f_max;
        out.push_back(row);
    }
    return out;
}

OptimizeResult optimize_fm(const SpinLattice& lattice, const RungInput& input, int sender,
                           int distance, const std::vector<double>& t_grid, double box,
                           int grid_points_per_axis) {
    const RungGroundPair pair =
        find_critical_field(lattice.sites_per_rung(), lattice.bc_rung());
    const Eigen::VectorXcd psi = prepare_rung_input(pair, input);

    int evals = 0;
    auto objective = [&](double u, double v, double dw) {
        ++evals;
        ModelParams params{std::clamp(u, 0.0, box), std::clamp(v, 0.0, box),
                           std::clamp(dw, 0.0, box)};
        RungTransfer sim(lattice, params, psi, sender, distance);
        const TransferRecord rec = sim.run(t_grid);
        return max_fidelity(rec, [&](double t) { return sim.fidelity(t); }).first;
    };

    double best_f = -1.0;
    std::vector<double> best_x(3, 0.0);
    const int n = std::max(2, grid_points_per_axis);
    for (int iu = 0; iu < n; ++iu)
        for (int iv = 0; iv < n; ++iv)
            for (int iw = 0; iw < n; ++iw) {
                const double u = box * iu / (n - 1), v = box * iv / (n - 1),
                             dw = box * iw / (n - 1);
                const double f = objective(u, v, dw);
                if (f > best_f) {
                    best_f = f;
                    best_x = {u, v, dw};
                }
            }

    const auto refined = nelder_mead(
        [&](const std::vector<double>& x) { return -objective(x[0], x[1], x[2]); }, best_x,
        box / (2.0 * (n - 1)), 1e-4, 1e-7, 400);

    OptimizeResult out;
    out.f_m = std::max(best_f, -refined.value);
    const auto& x = (-refined.value >= best_f) ? refined.x : best_x;
    out.u = std::clamp(x[0], 0.0, box);
    out.v = std::clamp(x[1], 0.0, box);
    out.dw = std::clamp(x[2], 0.0, box);
    out.evaluations = evals;
    return out;
}

double spearman_rank_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("spearman_rank_correlation: size mismatch");
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> rank(v.size());
        for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = static_cast<double>(k);
        return rank;
    };
    const std::vector<double> rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += rx[i] / n, my += ry[i] / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace qst
