// Command-line harness for the complex-stretched-grid Helmholtz solver:
// emits spectra, condition-number and iteration sweeps, branch-point
// scaling data and the critical-wave-number table as CSV files with a
// JSON sidecar per run.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "csg/experiments.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config_error = 2;
constexpr int exit_no_convergence = 3;

std::vector<double> parse_k_range(const std::string& spec) {
    const auto first = spec.find(':');
    const auto second = spec.find(':', first + 1);
    if (first == std::string::npos || second == std::string::npos)
        throw std::invalid_argument("--k-range expects a:b:step");
    const double a = std::stod(spec.substr(0, first));
    const double b = std::stod(spec.substr(first + 1, second - first - 1));
    const double step = std::stod(spec.substr(second + 1));
    if (!(step > 0.0)) throw std::invalid_argument("--k-range step must be positive");
    std::vector<double> out;
    for (double k = a; k <= b + 1e-12 * std::max(1.0, std::abs(b)); k += step) out.push_back(k);
    if (out.empty()) throw std::invalid_argument("--k-range produced an empty sweep");
    return out;
}

csg::PrecondKind parse_precond(const std::string& p) {
    if (p == "none") return csg::PrecondKind::none;
    if (p == "csg-exact") return csg::PrecondKind::csg_exact;
    if (p == "csg-mg") return csg::PrecondKind::csg_mg;
    throw std::invalid_argument("unknown precond '" + p + "'");
}

struct Flags {
    csg::ExperimentConfig cfg;
    std::string k_range;
    std::string config_path;
    std::string precond_name;
    CLI::App* sub = nullptr;
};

void add_common_flags(CLI::App* sub, Flags& f) {
    csg::ExperimentConfig& cfg = f.cfg;
    sub->add_option("--r", cfg.r, "interior region length");
    sub->add_option("--R", cfg.R, "total domain extent");
    sub->add_option("--theta-gamma", cfg.theta_gamma, "exterior scaling angle (radians)");
    sub->add_option("--theta-beta", cfg.theta_beta, "interior scaling angle of the preconditioner");
    sub->add_option("--n", cfg.n, "interior interval count");
    sub->add_option("--m", cfg.m, "exterior interval count (default n/4)");
    sub->add_option("--k", cfg.k_values, "wave number(s)");
    sub->add_option("--k-range", f.k_range, "wave-number sweep a:b:step");
    sub->add_option("--tol", cfg.tol, "relative residual tolerance");
    sub->add_option("--max-iter", cfg.max_iter, "Krylov iteration cap");
    sub->add_option("--mg-levels", cfg.mg_levels, "multigrid levels (0 = auto)");
    sub->add_option("--smoother-steps", cfg.smoother_steps, "GMRES smoother steps per level");
    sub->add_option("--precond", f.precond_name, "preconditioner: none, csg-exact, csg-mg")
        ->check(CLI::IsMember({"none", "csg-exact", "csg-mg"}));
    sub->add_option("--dims", cfg.dims, "problem dimension (1 or 2)")->check(CLI::IsMember({1, 2}));
    sub->add_option("--out", cfg.out_path, "output CSV path (JSON sidecar written next to it)");
    sub->add_option("--config", f.config_path, "JSON config file; explicit flags override");
    sub->add_option("--dense-cap", cfg.dense_cap, "dense eigensolve order cap");
    sub->add_option("--detect-cap", cfg.detect_cap, "branch detection order cap");
    sub->add_option("--branch-n-max", cfg.branch_n_max, "largest n in the branch schedule");
    sub->add_option("--precond-count", cfg.precond_count, "continuous eigenvalue count (0 = n+m)");
}

/// Fields absent from the command line take their values from the file.
void merge_config_file(Flags& f) {
    std::ifstream in(f.config_path);
    if (!in) throw std::invalid_argument("cannot open config file " + f.config_path);
    nlohmann::json j;
    in >> j;
    csg::ExperimentConfig& cfg = f.cfg;
    CLI::App* sub = f.sub;
    const auto absent = [sub](const char* flag) { return sub->count(flag) == 0; };
    if (j.contains("r") && absent("--r")) cfg.r = j["r"].get<double>();
    if (j.contains("R") && absent("--R")) cfg.R = j["R"].get<double>();
    if (j.contains("theta_gamma") && absent("--theta-gamma")) cfg.theta_gamma = j["theta_gamma"].get<double>();
    if (j.contains("theta_beta") && absent("--theta-beta")) cfg.theta_beta = j["theta_beta"].get<double>();
    if (j.contains("n") && absent("--n")) cfg.n = j["n"].get<int>();
    if (j.contains("m") && absent("--m")) cfg.m = j["m"].get<int>();
    if (j.contains("k_values") && absent("--k")) cfg.k_values = j["k_values"].get<std::vector<double>>();
    if (j.contains("tol") && absent("--tol")) cfg.tol = j["tol"].get<double>();
    if (j.contains("max_iter") && absent("--max-iter")) cfg.max_iter = j["max_iter"].get<int>();
    if (j.contains("mg_levels") && absent("--mg-levels")) cfg.mg_levels = j["mg_levels"].get<int>();
    if (j.contains("smoother_steps") && absent("--smoother-steps"))
        cfg.smoother_steps = j["smoother_steps"].get<int>();
    if (j.contains("precond") && absent("--precond")) f.precond_name = j["precond"].get<std::string>();
    if (j.contains("dims") && absent("--dims")) cfg.dims = j["dims"].get<int>();
    if (j.contains("out") && absent("--out")) cfg.out_path = j["out"].get<std::string>();
    if (j.contains("dense_cap") && absent("--dense-cap")) cfg.dense_cap = j["dense_cap"].get<int>();
    if (j.contains("detect_cap") && absent("--detect-cap")) cfg.detect_cap = j["detect_cap"].get<int>();
    if (j.contains("branch_n_max") && absent("--branch-n-max")) cfg.branch_n_max = j["branch_n_max"].get<int>();
    if (j.contains("precond_count") && absent("--precond-count"))
        cfg.precond_count = j["precond_count"].get<int>();
    if (j.contains("k_range") && f.k_range.empty()) f.k_range = j["k_range"].get<std::string>();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"complex-stretched-grid Helmholtz solver and spectrum toolkit"};
    app.require_subcommand(1);

    Flags f;
    auto* spectrum = app.add_subcommand("spectrum", "discrete + continuous Laplacian spectrum");
    auto* precond_spectrum = app.add_subcommand("precond-spectrum", "preconditioned spectra");
    auto* branch = app.add_subcommand("branch-point", "predicted vs detected branch points");
    auto* table = app.add_subcommand("table-criticalk", "critical wave numbers per grid size");
    auto* sweep = app.add_subcommand("sweep", "iteration counts over a wave-number sweep");
    auto* solve = app.add_subcommand("solve", "single preconditioned solve");
    for (CLI::App* sub : {spectrum, precond_spectrum, branch, table, sweep, solve})
        add_common_flags(sub, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config_error;
    }

    f.sub = app.get_subcommands().front();

    try {
        csg::ExperimentConfig& cfg = f.cfg;
        if (!f.config_path.empty()) merge_config_file(f);
        if (f.sub->count("--m") == 0) cfg.m = std::max(1, cfg.n / 4);
        if (!f.k_range.empty()) cfg.k_values = parse_k_range(f.k_range);
        if (!f.precond_name.empty()) cfg.precond = parse_precond(f.precond_name);

        if (f.sub == spectrum) {
            cfg.mode = csg::RunMode::spectrum;
            // the plain spectrum is for the absorbing-layer operator unless
            // an interior angle is requested explicitly
            if (f.sub->count("--theta-beta") == 0) cfg.theta_beta = 0.0;
        } else if (f.sub == precond_spectrum) {
            cfg.mode = csg::RunMode::precond_spectrum;
        } else if (f.sub == branch) {
            cfg.mode = csg::RunMode::branch_point;
        } else if (f.sub == table) {
            cfg.mode = csg::RunMode::table_criticalk;
        } else if (f.sub == sweep) {
            cfg.mode = cfg.dims == 2 ? csg::RunMode::k_sweep_2d : csg::RunMode::k_sweep_1d;
        } else {
            cfg.mode = csg::RunMode::solve;
        }
        cfg.validate();

        const csg::RunRecord rec = csg::run_experiment(cfg);

        if (!cfg.out_path.empty())
            csg::write_outputs(rec, cfg.out_path);
        else
            csg::write_csv(rec, std::cout);

        if (!rec.all_converged) {
            std::cerr << "helmcsg: solver did not reach the requested tolerance\n";
            return exit_no_convergence;
        }
        return exit_ok;
    } catch (const std::invalid_argument& e) {
        std::cerr << "helmcsg: config error: " << e.what() << '\n';
        return exit_config_error;
    } catch (const std::exception& e) {
        std::cerr << "helmcsg: " << e.what() << '\n';
        return exit_no_convergence;
    }
}
