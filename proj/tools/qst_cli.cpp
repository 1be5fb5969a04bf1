#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qst/analysis.hpp"

using nlohmann::json;
using namespace qst;

namespace {

constexpr const char* kVersion = "1.0.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<double> linspace(double lo, double hi, int points) {
    std::vector<double> out;
    if (points == 1) return {lo};
    out.reserve(points);
    for (int i = 0; i < points; ++i) out.push_back(lo + (hi - lo) * i / (points - 1));
    return out;
}

// --- config access with field-path diagnostics; defaults are written back
// --- into the config so the echoed config reproduces the run.

json& ensure_object(json& parent, const std::string& path, const std::string& key) {
    if (!parent.contains(key)) parent[key] = json::object();
    if (!parent[key].is_object())
        throw ConfigError(path.empty() ? key + ": expected an object"
                                       : path + "." + key + ": expected an object");
    return parent[key];
}

double num_req(const json& sec, const std::string& path, const std::string& key) {
    if (!sec.contains(key)) throw ConfigError(path + "." + key + ": missing");
    if (!sec[key].is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return sec[key].get<double>();
}

double num_or(json& sec, const std::string& path, const std::string& key, double def) {
    if (!sec.contains(key)) sec[key] = def;
    return num_req(sec, path, key);
}

int int_req(const json& sec, const std::string& path, const std::string& key) {
    if (!sec.contains(key)) throw ConfigError(path + "." + key + ": missing");
    if (!sec[key].is_number_integer())
        throw ConfigError(path + "." + key + ": expected an integer");
    return sec[key].get<int>();
}

int int_or(json& sec, const std::string& path, const std::string& key, int def) {
    if (!sec.contains(key)) sec[key] = def;
    return int_req(sec, path, key);
}

std::string str_or(json& sec, const std::string& path, const std::string& key,
                   const std::string& def) {
    if (!sec.contains(key)) sec[key] = def;
    if (!sec[key].is_string()) throw ConfigError(path + "." + key + ": expected a string");
    return sec[key].get<std::string>();
}

Boundary parse_boundary(const std::string& value, const std::string& path) {
    if (value == "open") return Boundary::open;
    if (value == "periodic") return Boundary::periodic;
    throw ConfigError(path + ": must be \"open\" or \"periodic\"");
}

// --- effective run settings assembled from config + flag overrides

struct Settings {
    int N = 0, L = 0;
    Boundary bc_rung = Boundary::open, bc_leg = Boundary::open;
    ModelParams params;
    RungInput input;
    int sender = 1, distance = 1, sender_j = 1, target_j = 1;
    Protocol protocol = Protocol::two_leg;
    QubitInput qubit{cplx(1.0, 0.0), cplx(0.0, 0.0)};
    std::vector<double> grid;
    std::optional<int> haar_n;
    std::optional<std::uint64_t> haar_seed;
    int threads = 1;

    SpinLattice lattice() const { return SpinLattice(N, L, bc_rung, bc_leg); }
};

Settings parse_settings(json& cfg) {
    Settings s;

    json& lat = ensure_object(cfg, "", "lattice");
    s.N = int_req(lat, "lattice", "N");
    s.L = int_req(lat, "lattice", "L");
    if (s.N < 1) throw ConfigError("lattice.N: must be >= 1");
    if (s.L < 2) throw ConfigError("lattice.L: must be >= 2");
    s.bc_rung = parse_boundary(str_or(lat, "lattice", "bc_rung", "open"), "lattice.bc_rung");
    s.bc_leg = parse_boundary(str_or(lat, "lattice", "bc_leg", "open"), "lattice.bc_leg");

    json& par = ensure_object(cfg, "", "params");
    s.params.u = num_or(par, "params", "u", 0.05);
    s.params.v = num_or(par, "params", "v", 0.0);
    s.params.dw = num_or(par, "params", "dw", 0.0);
    const std::string gen = str_or(par, "params", "transfer_generator", "full");
    if (gen == "full")
        s.params.generator = TransferGenerator::full;
    else if (gen == "perturbation_only")
        s.params.generator = TransferGenerator::perturbation_only;
    else
        throw ConfigError("params.transfer_generator: must be \"full\" or \"perturbation_only\"");

    json& in = ensure_object(cfg, "", "input");
    const std::string variant = str_or(in, "input", "variant", "low_energy");
    if (variant == "low_energy")
        s.input.variant = InputVariant::low_energy;
    else if (variant == "xi_L2")
        s.input.variant = InputVariant::xi_L2;
    else if (variant == "w_class_L3")
        s.input.variant = InputVariant::w_class_L3;
    else
        throw ConfigError(
            "input.variant: must be \"low_energy\", \"xi_L2\", or \"w_class_L3\"");
    s.input.a1 = num_or(in, "input", "a1", 0.0);
    s.input.a2 = num_or(in, "input", "a2", 0.0);
    s.input.b = num_or(in, "input", "b", 0.0);
    s.input.theta = num_or(in, "input", "theta", 0.0);
    s.input.b1 = num_or(in, "input", "b1", 0.0);
    s.input.b2 = num_or(in, "input", "b2", 0.0);
    s.input.theta1 = num_or(in, "input", "theta1", 0.0);
    s.input.theta2 = num_or(in, "input", "theta2", 0.0);
    if (in.contains("haar")) {
        json& haar = ensure_object(in, "input", "haar");
        s.haar_n = int_req(haar, "input.haar", "n");
        if (*s.haar_n < 1) throw ConfigError("input.haar.n: must be >= 1");
        if (haar.contains("seed")) {
            if (!haar["seed"].is_number_unsigned() && !haar["seed"].is_number_integer())
                throw ConfigError("input.haar.seed: expected an integer");
            s.haar_seed = haar["seed"].get<std::uint64_t>();
        }
    }

    json& proto = ensure_object(cfg, "", "protocol");
    s.sender = int_or(proto, "protocol", "sender", 1);
    s.distance = int_or(proto, "protocol", "distance", s.N > 1 ? s.N - 1 : 0);
    s.sender_j = int_or(proto, "protocol", "sender_j", 1);
    s.target_j = int_or(proto, "protocol", "target_j", 1);
    if (s.sender < 1 || s.sender > s.N) throw ConfigError("protocol.sender: out of range");
    if (s.distance < 0) throw ConfigError("protocol.distance: must be >= 0");
    if (s.sender_j < 1 || s.sender_j > s.L) throw ConfigError("protocol.sender_j: out of range");
    if (s.target_j < 1 || s.target_j > s.L) throw ConfigError("protocol.target_j: out of range");
    const std::string type = str_or(proto, "protocol", "type", "two_leg");
    if (type == "two_leg")
        s.protocol = Protocol::two_leg;
    else if (type == "four_leg")
        s.protocol = Protocol::four_leg;
    else
        throw ConfigError("protocol.type: must be \"two_leg\" or \"four_leg\"");
    auto read_amp = [&](const char* key, cplx def) {
        if (!proto.contains(key)) proto[key] = json::array({def.real(), def.imag()});
        const json& a = proto[key];
        if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
            throw ConfigError(std::string("protocol.") + key + ": expected [re, im]");
        return cplx(a[0].get<double>(), a[1].get<double>());
    };
    s.qubit.c0 = read_amp("c0", cplx(1.0 / std::sqrt(2.0), 0.0));
    s.qubit.c1 = read_amp("c1", cplx(1.0 / std::sqrt(2.0), 0.0));
    const double qn = std::sqrt(std::norm(s.qubit.c0) + std::norm(s.qubit.c1));
    if (qn < 1e-12) throw ConfigError("protocol.c0: qubit amplitudes must not both vanish");
    s.qubit.c0 /= qn;
    s.qubit.c1 /= qn;

    json& grid = ensure_object(cfg, "", "grid");
    const double t_max = num_or(grid, "grid", "t_max", 100.0);
    const double dt = num_or(grid, "grid", "dt", 0.1);
    if (t_max < 0.0) throw ConfigError("grid.t_max: must be >= 0");
    if (dt <= 0.0) throw ConfigError("grid.dt: must be > 0");
    s.grid = default_time_grid(t_max, dt);

    return s;
}

std::uint64_t require_seed(const Settings& s) {
    if (!s.haar_seed)
        throw ConfigError("input.haar.seed: required for stochastic experiments (or pass --seed)");
    return *s.haar_seed;
}

// --- result assembly and persistence

struct Result {
    std::vector<std::string> columns;
    json data = json::object();
    json extra = json::object();
    std::optional<std::uint64_t> seed;
    int exit_code = 0;
};

void fill_record(Result& res, const TransferRecord& rec, bool with_eff) {
    res.columns = with_eff ? std::vector<std::string>{"t", "f", "f_eff"}
                           : std::vector<std::string>{"t", "f"};
    res.data["t"] = rec.t;
    res.data["f"] = rec.f;
    if (with_eff) res.data["f_eff"] = rec.f_eff;
}

void write_csv(const std::string& path, const Result& res) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    for (std::size_t c = 0; c < res.columns.size(); ++c)
        out << (c ? "," : "") << res.columns[c];
    out << "\n";
    const std::size_t rows = res.columns.empty() ? 0 : res.data[res.columns[0]].size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < res.columns.size(); ++c) {
            const json& cell = res.data[res.columns[c]][r];
            out << (c ? "," : "") << (cell.is_string() ? cell.get<std::string>()
                                                       : fmt(cell.get<double>()));
        }
        out << "\n";
    }
}

void write_json(const std::string& path, const json& cfg, const Result& res,
                double wall_seconds) {
    json meta{{"tool_version", kVersion}, {"wall_time_seconds", wall_seconds}};
    meta["seed"] = res.seed ? json(*res.seed) : json(nullptr);
    for (const auto& [k, v] : res.extra.items()) meta[k] = v;
    json doc{{"config", cfg}, {"columns", res.columns}, {"data", res.data}, {"metadata", meta}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << doc.dump(2) << "\n";
}

// --- subcommand implementations

Result run_rr_transfer(json&, const Settings& s) {
    const RungGroundPair pair = find_critical_field(s.L, s.bc_rung);
    RungTransfer transfer(s.lattice(), s.params, prepare_rung_input(pair, s.input), s.sender,
                          s.distance);
    Result res;
    fill_record(res, transfer.run(s.grid), false);
    return res;
}

Result run_effective_transfer(json&, const Settings& s) {
    const RungGroundPair pair = find_critical_field(s.L, s.bc_rung);
    const EffectiveCouplings cpl = effective_couplings_or_fitted(
        s.L, s.bc_rung, s.bc_leg, s.params.u, s.params.v, s.params.dw);
    const Eigen::Vector2cd qubit =
        project_to_pair(prepare_rung_input(pair, s.input), pair, ProjectionMode::normalized);
    EffectiveTransfer transfer(s.N, cpl, s.bc_leg, qubit, s.sender, s.distance);
    Result res;
    fill_record(res, transfer.run(s.grid), false);
    return res;
}

Result run_single_qubit(json&, const Settings& s) {
    SingleQubitTransfer transfer(s.lattice(), s.params, s.qubit, s.distance, s.target_j,
                                 s.protocol, s.sender_j);
    Result res;
    fill_record(res, transfer.run(s.grid), false);
    return res;
}

Result run_bare_baseline(json&, const Settings& s) {
    BareTransfer transfer(s.lattice(), s.params, s.qubit, s.distance, s.target_j, s.sender_j);
    Result res;
    fill_record(res, transfer.run(s.grid), false);
    return res;
}

Result run_haar_average(json& cfg, const Settings& s) {
    if (!s.haar_n) throw ConfigError("input.haar.n: missing");
    const std::uint64_t seed = require_seed(s);
    const std::string pipeline =
        str_or(ensure_object(cfg, "", "protocol"), "protocol", "pipeline", "rr");

    HaarResult haar;
    if (pipeline == "rr") {
        haar = haar_average_rr(s.lattice(), s.params, s.sender, s.distance, s.grid, *s.haar_n,
                               seed, s.threads);
    } else if (pipeline == "effective") {
        const EffectiveCouplings cpl = effective_couplings_or_fitted(
            s.L, s.bc_rung, s.bc_leg, s.params.u, s.params.v, s.params.dw);
        haar = haar_average_effective(s.N, cpl, s.bc_leg, s.sender, s.distance, s.grid,
                                      *s.haar_n, seed, s.threads);
    } else if (pipeline == "single_qubit") {
        haar = haar_average_single_qubit(s.lattice(), s.params, s.distance, s.target_j,
                                         s.protocol, s.grid, *s.haar_n, seed, s.threads);
    } else if (pipeline == "bare") {
        haar = haar_average_bare(s.lattice(), s.params, s.distance, s.target_j, s.grid,
                                 *s.haar_n, seed, s.threads);
    } else {
        throw ConfigError(
            "protocol.pipeline: must be \"rr\", \"effective\", \"single_qubit\", or \"bare\"");
    }

    Result res;
    res.columns = {"t", "mean_f"};
    res.data["t"] = haar.t;
    res.data["mean_f"] = haar.mean_f;
    res.extra["mean_f_max"] = haar.mean_f_max;
    res.extra["t_at_max"] = haar.t_at_max;
    res.seed = seed;
    return res;
}

Result run_epsilon(json&, const Settings& s) {
    const TransferRecord rec =
        dual_transfer(s.lattice(), s.params, s.input, s.sender, s.distance, s.grid);
    double eps = 0.0;
    for (std::size_t i = 0; i < rec.t.size(); ++i)
        eps = std::max(eps, std::abs(rec.f[i] - rec.f_eff[i]));
    Result res;
    fill_record(res, rec, true);
    res.extra["epsilon"] = eps;
    return res;
}

Result run_sweep_r(json& cfg, const Settings& s) {
    json& proto = ensure_object(cfg, "", "protocol");
    std::vector<int> distances;
    if (proto.contains("distances")) {
        if (!proto["distances"].is_array())
            throw ConfigError("protocol.distances: expected an array of integers");
        for (const json& d : proto["distances"]) {
            if (!d.is_number_integer())
                throw ConfigError("protocol.distances: expected an array of integers");
            distances.push_back(d.get<int>());
        }
    } else {
        for (int r = 1; r < s.N; ++r) distances.push_back(r);
        proto["distances"] = distances;
    }
    if (distances.empty()) throw ConfigError("protocol.distances: must not be empty");

    int haar_n = 0;
    std::uint64_t seed = 0;
    Result res;
    if (s.haar_n) {
        haar_n = *s.haar_n;
        seed = require_seed(s);
        res.seed = seed;
    }
    const auto rows =
        sweep_r(s.lattice(), s.params, s.input, distances, s.grid, s.sender, haar_n, seed,
                s.threads);

    res.columns = {"r", "f_m", "t_star", "mean_f_m"};
    for (const auto& row : rows) {
        res.data["r"].push_back(row.r);
        res.data["f_m"].push_back(row.f_m);
        res.data["t_star"].push_back(row.t_star);
        res.data["mean_f_m"].push_back(row.mean_f_m);
    }
    return res;
}

Result run_optimize(json& cfg, const Settings& s) {
    json& scan = ensure_object(cfg, "", "scan");
    const double box = num_or(scan, "scan", "box", 0.1);
    const int grid_points = int_or(scan, "scan", "grid_points", 5);
    if (box <= 0.0) throw ConfigError("scan.box: must be > 0");
    if (grid_points < 2) throw ConfigError("scan.grid_points: must be >= 2");

    const OptimizeResult opt =
        optimize_fm(s.lattice(), s.input, s.sender, s.distance, s.grid, box, grid_points);
    Result res;
    res.columns = {"r", "f_m", "u", "v", "dw", "evaluations"};
    res.data["r"].push_back(s.distance);
    res.data["f_m"].push_back(opt.f_m);
    res.data["u"].push_back(opt.u);
    res.data["v"].push_back(opt.v);
    res.data["dw"].push_back(opt.dw);
    res.data["evaluations"].push_back(opt.evaluations);
    return res;
}

Result run_ggm_curve(json& cfg, const Settings& s) {
    json& scan = ensure_object(cfg, "", "scan");
    const int points = int_or(scan, "scan", "a1_points", 21);
    if (points < 1) throw ConfigError("scan.a1_points: must be >= 1");
    const auto curve = ggm_curve(s.L, s.bc_rung, linspace(0.0, 1.0, points));
    Result res;
    res.columns = {"a1", "G"};
    for (const auto& [a1, G] : curve) {
        res.data["a1"].push_back(a1);
        res.data["G"].push_back(G);
    }
    return res;
}

WAxis parse_axis(const std::string& value, const std::string& path) {
    if (value == "b1") return WAxis::b1;
    if (value == "b2") return WAxis::b2;
    if (value == "theta1") return WAxis::theta1;
    if (value == "theta2") return WAxis::theta2;
    throw ConfigError(path + ": must be one of \"b1\", \"b2\", \"theta1\", \"theta2\"");
}

std::vector<double> parse_axis_grid(json& scan, const std::string& key, double def_lo,
                                    double def_hi, int def_points) {
    json& axis = ensure_object(scan, "scan", key);
    const std::string path = "scan." + key;
    const double lo = num_or(axis, path, "min", def_lo);
    const double hi = num_or(axis, path, "max", def_hi);
    const int points = int_or(axis, path, "points", def_points);
    if (points < 1) throw ConfigError(path + ".points: must be >= 1");
    return linspace(lo, hi, points);
}

Result run_high_energy_scan(json& cfg, const Settings& s) {
    json& scan = ensure_object(cfg, "", "scan");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<ScanPoint> pts;
    Result res;
    if (s.L == 2) {
        const auto b_grid = parse_axis_grid(scan, "b", -1.0, 1.0, 101);
        const auto theta_grid = parse_axis_grid(scan, "theta", 0.0, two_pi, 101);
        pts = high_energy_scan_L2(s.lattice(), s.params, s.input.a1, s.input.a2, b_grid,
                                  theta_grid, s.sender, s.distance, s.grid);
        res.columns = {"b", "theta", "D", "eps"};
    } else if (s.L == 3) {
        const WAxis x_axis = parse_axis(str_or(scan, "scan", "x_axis", "b1"), "scan.x_axis");
        const WAxis y_axis =
            parse_axis(str_or(scan, "scan", "y_axis", "theta1"), "scan.y_axis");
        const auto x_grid = parse_axis_grid(scan, "x", 0.0, 1.0, 101);
        const auto y_grid = parse_axis_grid(scan, "y", 0.0, two_pi, 101);
        pts = high_energy_scan_L3(s.lattice(), s.params, s.input.a1, s.input.a2, x_axis, x_grid,
                                  y_axis, y_grid, s.input.b1, s.input.b2, s.input.theta1,
                                  s.input.theta2, s.sender, s.distance, s.grid);
        res.columns = {"x", "y", "D", "eps"};
    } else {
        throw ConfigError("lattice.L: high-energy-scan supports L = 2 or L = 3 only");
    }
    for (const auto& p : pts) {
        res.data[res.columns[0]].push_back(p.x);
        res.data[res.columns[1]].push_back(p.y);
        res.data["D"].push_back(p.D);
        res.data["eps"].push_back(p.eps);
    }
    return res;
}

Result run_validate_couplings(json&, const Settings& s) {
    const EffectiveCouplings closed =
        effective_couplings(s.L, s.bc_rung, s.params.u, s.params.v, s.params.dw);
    Result res;
    res.columns = {"N", "quantity", "closed_form", "fitted", "abs_diff"};
    double worst = 0.0;
    for (int N : {2, 3}) {
        SpinLattice lattice(N, s.L, s.bc_rung, s.bc_leg);
        const FittedCouplings fit =
            fit_xxz_couplings(projected_hamiltonian_oracle(lattice, s.params), N, s.bc_leg);
        const double closed_h =
            fit.boundary_separable ? closed.h : closed.h + closed.h_boundary;
        const double closed_hb = fit.boundary_separable ? closed.h_boundary : 0.0;
        const std::pair<const char*, std::pair<double, double>> rows[] = {
            {"Jxy", {closed.Jxy, fit.couplings.Jxy}},
            {"Jzz", {closed.Jzz, fit.couplings.Jzz}},
            {"h", {closed_h, fit.couplings.h}},
            {"h_boundary", {closed_hb, fit.couplings.h_boundary}},
        };
        for (const auto& [name, pair] : rows) {
            const double diff = std::abs(pair.first - pair.second);
            worst = std::max(worst, diff);
            res.data["N"].push_back(N);
            res.data["quantity"].push_back(name);
            res.data["closed_form"].push_back(pair.first);
            res.data["fitted"].push_back(pair.second);
            res.data["abs_diff"].push_back(diff);
        }
    }
    res.extra["max_abs_diff"] = worst;
    if (worst > 1e-8) {
        std::cerr << "validate-couplings: closed forms and fitted couplings disagree by "
                  << fmt(worst) << "\n";
        res.exit_code = 1;
    }
    return res;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum state transfer on quasi-1D Heisenberg lattices"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> output, format;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads, opt_N, opt_L, opt_distance, opt_sender;
    std::optional<double> opt_u, opt_v, opt_dw, opt_t_max, opt_dt;

    const std::vector<std::string> names = {
        "rr-transfer",   "effective-transfer", "single-qubit",     "bare-baseline",
        "haar-average",  "epsilon",            "sweep-r",          "optimize",
        "ggm-curve",     "high-energy-scan",   "validate-couplings"};
    for (const auto& name : names) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("-c,--config", config_path, "JSON config file");
        sub->add_option("-o,--output", output, "output file path (overrides output.path)");
        sub->add_option("--format", format, "output format: csv or json");
        sub->add_option("--seed", seed, "RNG seed (overrides input.haar.seed)");
        sub->add_option("--threads", threads, "worker thread cap");
        sub->add_option("--N", opt_N, "override lattice.N");
        sub->add_option("--L", opt_L, "override lattice.L");
        sub->add_option("--u", opt_u, "override params.u");
        sub->add_option("--v", opt_v, "override params.v");
        sub->add_option("--dw", opt_dw, "override params.dw");
        sub->add_option("--sender", opt_sender, "override protocol.sender");
        sub->add_option("--distance", opt_distance, "override protocol.distance");
        sub->add_option("--t-max", opt_t_max, "override grid.t_max");
        sub->add_option("--dt", opt_dt, "override grid.dt");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        json cfg = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw std::runtime_error("cannot open config file: " + config_path);
            try {
                cfg = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("config parse error: ") + e.what());
            }
            if (!cfg.is_object()) throw ConfigError("config root: expected an object");
        }

        // Flags override config keys before validation.
        if (opt_N) cfg["lattice"]["N"] = *opt_N;
        if (opt_L) cfg["lattice"]["L"] = *opt_L;
        if (opt_u) cfg["params"]["u"] = *opt_u;
        if (opt_v) cfg["params"]["v"] = *opt_v;
        if (opt_dw) cfg["params"]["dw"] = *opt_dw;
        if (opt_sender) cfg["protocol"]["sender"] = *opt_sender;
        if (opt_distance) cfg["protocol"]["distance"] = *opt_distance;
        if (opt_t_max) cfg["grid"]["t_max"] = *opt_t_max;
        if (opt_dt) cfg["grid"]["dt"] = *opt_dt;
        if (seed) cfg["input"]["haar"]["seed"] = *seed;
        if (output) cfg["output"]["path"] = *output;
        if (format) cfg["output"]["format"] = *format;

        Settings settings = parse_settings(cfg);
        json& out_cfg = ensure_object(cfg, "", "output");
        const std::string out_format = str_or(out_cfg, "output", "format", "csv");
        if (out_format != "csv" && out_format != "json")
            throw ConfigError("output.format: must be \"csv\" or \"json\"");
        const std::string out_path =
            str_or(out_cfg, "output", "path", "result." + out_format);
        if (threads) {
            if (*threads < 1) throw ConfigError("--threads: must be >= 1");
            settings.threads = *threads;
        }

        const auto start = std::chrono::steady_clock::now();
        Result res;
        if (command == "rr-transfer")
            res = run_rr_transfer(cfg, settings);
        else if (command == "effective-transfer")
            res = run_effective_transfer(cfg, settings);
        else if (command == "single-qubit")
            res = run_single_qubit(cfg, settings);
        else if (command == "bare-baseline")
            res = run_bare_baseline(cfg, settings);
        else if (command == "haar-average")
            res = run_haar_average(cfg, settings);
        else if (command == "epsilon")
            res = run_epsilon(cfg, settings);
        else if (command == "sweep-r")
            res = run_sweep_r(cfg, settings);
        else if (command == "optimize")
            res = run_optimize(cfg, settings);
        else if (command == "ggm-curve")
            res = run_ggm_curve(cfg, settings);
        else if (command == "high-energy-scan")
            res = run_high_energy_scan(cfg, settings);
        else
            res = run_validate_couplings(cfg, settings);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        if (out_format == "csv")
            write_csv(out_path, res);
        else
            write_json(out_path, cfg, res, wall);
        return res.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
