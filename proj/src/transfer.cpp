#include "qst/transfer.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <thread>

namespace qst {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_unit_interval(double x, const char* name) {
    if (x < 0.0 || x > 1.0 + 1e-12)
        throw std::invalid_argument(std::string("prepare_rung_input: ") + name +
                                    " outside [0, 1]");
}

}  // namespace

/// Receiver-side fidelity accumulator: f = sum over outside-configurations
/// of |sum_p conj(psi[p]) amp(outside, p)|^2, which equals <psi|rho|psi>
/// without forming rho.
struct FidelityKernel {
    std::vector<int> group;    // per basis index
    std::vector<int> pattern;  // local index on the receiver subset
    int num_groups = 0;

    FidelityKernel() = default;
    FidelityKernel(const SectorBasis& basis, const std::vector<int>& subset) {
        const int K = static_cast<int>(subset.size());
        std::uint64_t mask = 0;
        for (int s : subset) mask |= 1ULL << s;
        std::map<std::uint64_t, int> ids;
        group.resize(basis.dimension());
        pattern.resize(basis.dimension());
        for (int i = 0; i < basis.dimension(); ++i) {
            const std::uint64_t c = basis.config(i);
            auto [it, inserted] = ids.try_emplace(c & ~mask, static_cast<int>(ids.size()));
            group[i] = it->second;
            int p = 0;
            for (int k = 0; k < K; ++k)
                if ((c >> subset[k]) & 1) p |= 1 << (K - 1 - k);
            pattern[i] = p;
        }
        num_groups = static_cast<int>(ids.size());
    }

    double score(const Eigen::VectorXcd& amplitudes, const Eigen::VectorXcd& target) const {
        Eigen::VectorXcd z = Eigen::VectorXcd::Zero(num_groups);
        for (int i = 0; i < amplitudes.size(); ++i)
            z[group[i]] += std::conj(target[pattern[i]]) * amplitudes[i];
        return z.squaredNorm();
    }
};

namespace {

Eigen::VectorXcd evolve_coef(const EigenSystem& eig, const Eigen::VectorXcd& coef, double t) {
    Eigen::VectorXcd phased(coef.size());
    for (int k = 0; k < coef.size(); ++k)
        phased[k] = coef[k] * std::exp(cplx(0.0, -eig.eigenvalues[k] * t));
    return eig.eigenvectors * phased;
}

double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double tol) {
    const double gr = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

Eigen::VectorXcd prepare_rung_input(const RungGroundPair& pair, const RungInput& input) {
    check_unit_interval(std::abs(input.a1), "a1");
    const cplx phase_a2 = std::exp(cplx(0.0, input.a2));
    const double rest = std::sqrt(std::max(0.0, 1.0 - input.a1 * input.a1));
    Eigen::VectorXcd out;

    switch (input.variant) {
        case InputVariant::low_energy:
            out = input.a1 * pair.ket0 + phase_a2 * rest * pair.ket1;
            break;
        case InputVariant::xi_L2: {
            if (pair.L != 2)
                throw std::invalid_argument("prepare_rung_input: xi variant needs L = 2");
            check_unit_interval(std::abs(input.b), "b");
            out = Eigen::VectorXcd::Zero(4);
            out[0] = input.a1;
            // The second magnon amplitude carries sign(b): b -> -b is then a
            // global sign flip, making D even in b with zeros at b = +-1/sqrt2,
            // theta = pi.
            const double bc = (input.b < 0.0 ? -1.0 : 1.0) *
                              std::sqrt(std::max(0.0, 1.0 - input.b * input.b));
            out[1] = phase_a2 * rest * input.b;
            out[2] = phase_a2 * rest * std::exp(cplx(0.0, input.theta)) * bc;
            break;
        }
        case InputVariant::w_class_L3: {
            if (pair.L != 3)
                throw std::invalid_argument("prepare_rung_input: W-class variant needs L = 3");
            const double bsq = input.b1 * input.b1 + input.b2 * input.b2;
            if (bsq > 1.0 + 1e-12)
                throw std::invalid_argument("prepare_rung_input: b1^2 + b2^2 exceeds 1");
            out = Eigen::VectorXcd::Zero(8);
            out[0] = input.a1;
            out[1] = phase_a2 * rest * input.b1;
            out[2] = phase_a2 * rest * std::exp(cplx(0.0, input.theta1)) * input.b2;
            out[4] = phase_a2 * rest * std::exp(cplx(0.0, input.theta2)) *
                     std::sqrt(std::max(0.0, 1.0 - bsq));
            break;
        }
    }
    if (std::abs(out.norm() - 1.0) > 1e-12)
        throw std::logic_error("prepare_rung_input: state not normalized");
    return out;
}

double high_energy_overlap(const Eigen::VectorXcd& rung_state, const RungGroundPair& pair) {
    const double d = 1.0 - std::norm(pair.ket0.dot(rung_state)) -
                     std::norm(pair.ket1.dot(rung_state));
    return std::max(0.0, d);
}

std::vector<double> default_time_grid(double t_max, double dt) {
    if (dt <= 0.0 || t_max < 0.0) throw std::invalid_argument("default_time_grid: bad grid");
    std::vector<double> grid;
    const int n = static_cast<int>(std::round(t_max / dt));
    grid.reserve(n + 1);
    for (int k = 0; k <= n; ++k) grid.push_back(k * dt);
    return grid;
}

// ---------------------------------------------------------------------------

namespace {
int resolve_receiver(const SpinLattice& lattice, int sender, int distance) {
    const int N = lattice.num_rungs();
    if (sender < 1 || sender > N) throw std::domain_error("transfer: sender out of range");
    if (distance < 0) throw std::domain_error("transfer: negative distance");
    if (lattice.bc_leg() == Boundary::periodic) return (sender - 1 + distance) % N + 1;
    if (sender + distance > N) throw std::domain_error("transfer: receiver out of range");
    return sender + distance;
}

int required_excitations(const Eigen::VectorXcd& rung_state) {
    int k = 0;
    for (int p = 0; p < rung_state.size(); ++p)
        if (std::abs(rung_state[p]) > 1e-14) k = std::max(k, std::popcount(unsigned(p)));
    return std::max(k, 1);
}
}  // namespace

RungTransfer::RungTransfer(const SpinLattice& lattice, const ModelParams& params,
                           const Eigen::VectorXcd& rung_state, int sender, int distance)
    : lattice_(lattice),
      sender_(sender),
      receiver_(resolve_receiver(lattice, sender, distance)),
      rung_state_(rung_state),
      basis_(build_basis(lattice.num_sites(), required_excitations(rung_state))),
      hamiltonian_(build_transfer_generator(lattice, params, basis_)),
      receiver_sites_(lattice.rung_sites(receiver_)),
      kernel_(std::make_shared<FidelityKernel>(*basis_, receiver_sites_)) {
    diagonalize(hamiltonian_);
    reset_input(rung_state);
}

void RungTransfer::reset_input(const Eigen::VectorXcd& rung_state) {
    rung_state_ = rung_state;
    const SectorState init = embed_rung_state(basis_, lattice_, sender_, rung_state_);
    coef_ = hamiltonian_.eigensystem()->eigenvectors.adjoint() * init.amplitudes;
}

double RungTransfer::fidelity(double t) const {
    const Eigen::VectorXcd amps = evolve_coef(*hamiltonian_.eigensystem(), coef_, t);
    return kernel_->score(amps, rung_state_);
}

TransferRecord RungTransfer::run(const std::vector<double>& grid) const {
    TransferRecord rec;
    rec.t = grid;
    rec.f.reserve(grid.size());
    for (double t : grid) rec.f.push_back(fidelity(t));
    return rec;
}

// ---------------------------------------------------------------------------

namespace {
int resolve_receiver_1d(int N, Boundary bc_leg, int sender, int distance) {
    if (sender < 1 || sender > N)
        throw std::domain_error("EffectiveTransfer: sender out of range");
    if (distance < 0) throw std::domain_error("EffectiveTransfer: negative distance");
    if (bc_leg == Boundary::periodic) return (sender - 1 + distance) % N + 1;
    if (sender + distance > N)
        throw std::domain_error("EffectiveTransfer: receiver out of range");
    return sender + distance;
}
}  // namespace

Eigen::Vector2cd project_to_pair(const Eigen::VectorXcd& rung_state, const RungGroundPair& pair,
                                 ProjectionMode mode) {
    Eigen::Vector2cd c;
    c[0] = pair.ket0.dot(rung_state);
    c[1] = pair.ket1.dot(rung_state);
    if (mode == ProjectionMode::normalized) {
        const double n = c.norm();
        if (n < 1e-14)
            throw std::invalid_argument("project_to_pair: state orthogonal to the ground doublet");
        c /= n;
    }
    return c;
}

EffectiveTransfer::EffectiveTransfer(int N, const EffectiveCouplings& couplings, Boundary bc_leg,
                                     const Eigen::Vector2cd& qubit, int sender, int distance)
    : receiver_(resolve_receiver_1d(N, bc_leg, sender, distance)),
      qubit_(qubit),
      basis_(build_basis(N, 1)),
      hamiltonian_(build_effective_xxz(N, couplings, bc_leg, basis_)) {
    diagonalize(hamiltonian_);

    Eigen::VectorXcd init = Eigen::VectorXcd::Zero(basis_->dimension());
    init[basis_->index_of(0)] = qubit_[0];
    init[basis_->index_of(1ULL << (sender - 1))] = qubit_[1];
    coef_ = hamiltonian_.eigensystem()->eigenvectors.adjoint() * init;
}

double EffectiveTransfer::fidelity(double t) const {
    const Eigen::VectorXcd amps = evolve_coef(*hamiltonian_.eigensystem(), coef_, t);
    // Single receiver site: group by the other N-1 bits.
    const int recv_bit = receiver_ - 1;
    std::map<std::uint64_t, cplx> z;
    for (int i = 0; i < amps.size(); ++i) {
        const std::uint64_t c = basis_->config(i);
        const int p = (c >> recv_bit) & 1;
        z[c & ~(1ULL << recv_bit)] += std::conj(qubit_[p]) * amps[i];
    }
    double f = 0.0;
    for (const auto& [key, val] : z) f += std::norm(val);
    return f;
}

TransferRecord EffectiveTransfer::run(const std::vector<double>& grid) const {
    TransferRecord rec;
    rec.t = grid;
    rec.f.reserve(grid.size());
    for (double t : grid) rec.f.push_back(fidelity(t));
    return rec;
}

// ---------------------------------------------------------------------------

std::pair<double, double> max_fidelity(const TransferRecord& record) {
    if (record.t.empty()) throw std::invalid_argument("max_fidelity: empty record");
    std::size_t best = 0;
    for (std::size_t k = 1; k < record.f.size(); ++k)
        if (record.f[k] > record.f[best]) best = k;  // first maximizer kept
    return {record.f[best], record.t[best]};
}

std::pair<double, double> max_fidelity(const TransferRecord& record,
                                       const std::function<double(double)>& evaluate) {
    auto [f_grid, t_grid] = max_fidelity(record);
    std::size_t best = 0;
    while (record.t[best] != t_grid) ++best;
    const double lo = best > 0 ? record.t[best - 1] : record.t[best];
    const double hi = best + 1 < record.t.size() ? record.t[best + 1] : record.t[best];
    if (hi <= lo) return {f_grid, t_grid};
    const double t_star = golden_section_max(evaluate, lo, hi, 1e-4);
    const double f_star = evaluate(t_star);
    return f_star >= f_grid ? std::make_pair(f_star, t_star) : std::make_pair(f_grid, t_grid);
}

// ---------------------------------------------------------------------------

HaarResult haar_average(const std::vector<double>& grid, int n_samples, std::uint64_t seed,
                        const std::function<std::vector<double>(double, double)>& curve_fn,
                        int threads) {
    if (n_samples < 1) throw std::invalid_argument("haar_average: n_samples must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<double, double>> samples(n_samples);
    for (auto& [a1, a2] : samples) {
        a1 = std::sqrt(unit(rng));
        a2 = kTwoPi * unit(rng);
    }

    // Fixed chunking keeps the reduction order independent of thread count.
    constexpr int kChunk = 256;
    const int n_chunks = (n_samples + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> chunk_sums(n_chunks);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) {
            std::vector<double> sum(grid.size(), 0.0);
            const int lo = c * kChunk, hi = std::min(n_samples, lo + kChunk);
            for (int s = lo; s < hi; ++s) {
                const std::vector<double> curve = curve_fn(samples[s].first, samples[s].second);
                for (std::size_t k = 0; k < grid.size(); ++k) sum[k] += curve[k];
            }
            chunk_sums[c] = std::move(sum);
        }
    };
    threads = std::max(1, std::min(threads, n_chunks));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    HaarResult out;
    out.t = grid;
    out.mean_f.assign(grid.size(), 0.0);
    std::vector<double> comp(grid.size(), 0.0);  // Kahan compensation
    for (int c = 0; c < n_chunks; ++c)
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double y = chunk_sums[c][k] - comp[k];
            const double t = out.mean_f[k] + y;
            comp[k] = (t - out.mean_f[k]) - y;
            out.mean_f[k] = t;
        }
    for (std::size_t k = 0; k < grid.size(); ++k) {
        out.mean_f[k] /= n_samples;
        if (out.mean_f[k] > out.mean_f_max) {
            out.mean_f_max = out.mean_f[k];
            out.t_at_max = grid[k];
        }
    }
    return out;
}

HaarResult haar_average_rr(const SpinLattice& lattice, const ModelParams& params, int sender,
                           int distance, const std::vector<double>& grid, int n_samples,
                           std::uint64_t seed, int threads) {
    const RungGroundPair pair =
        find_critical_field(lattice.sites_per_rung(), lattice.bc_rung());
    RungTransfer base(lattice, params, pair.ket0, sender, distance);
    auto curve = [&](double a1, double a2) {
        RungInput input;
        input.a1 = a1;
        input.a2 = a2;
        RungTransfer sim = base;  // shares basis; thread-local input state
        sim.reset_input(prepare_rung_input(pair, input));
        return sim.run(grid).f;
    };
    return haar_average(grid, n_samples, seed, curve, threads);
}

HaarResult haar_average_effective(int N, const EffectiveCouplings& couplings, Boundary bc_leg,
                                  int sender, int distance, const std::vector<double>& grid,
                                  int n_samples, std::uint64_t seed, int threads) {
    auto curve = [&](double a1, double a2) {
        Eigen::Vector2cd qubit;
        qubit[0] = a1;
        qubit[1] = std::exp(cplx(0.0, a2)) * std::sqrt(std::max(0.0, 1.0 - a1 * a1));
        EffectiveTransfer sim(N, couplings, bc_leg, qubit, sender, distance);
        return sim.run(grid).f;
    };
    return haar_average(grid, n_samples, seed, curve, threads);
}

// ---------------------------------------------------------------------------

TransferRecord dual_transfer(const SpinLattice& lattice, const ModelParams& params,
                             const RungInput& input, int sender, int distance,
                             const std::vector<double>& grid, ProjectionMode mode) {
    const int L = lattice.sites_per_rung();
    const RungGroundPair pair = find_critical_field(L, lattice.bc_rung());
    const Eigen::VectorXcd psi = prepare_rung_input(pair, input);

    RungTransfer full(lattice, params, psi, sender, distance);
    TransferRecord rec = full.run(grid);

    const EffectiveCouplings couplings = effective_couplings_or_fitted(
        L, lattice.bc_rung(), lattice.bc_leg(), params.u, params.v, params.dw);
    EffectiveTransfer eff(lattice.num_rungs(), couplings, lattice.bc_leg(),
                          project_to_pair(psi, pair, mode), sender, distance);
    rec.f_eff = eff.run(grid).f;
    return rec;
}

double epsilon_error(const SpinLattice& lattice, const ModelParams& params,
                     const RungInput& input, int sender, int distance,
                     const std::vector<double>& grid, ProjectionMode mode) {
    const TransferRecord rec = dual_transfer(lattice, params, input, sender, distance, grid, mode);
    double eps = 0.0;
    for (std::size_t k = 0; k < rec.t.size(); ++k)
        eps = std::max(eps, std::abs(rec.f[k] - rec.f_eff[k]));
    return eps;
}

}  // namespace qst
