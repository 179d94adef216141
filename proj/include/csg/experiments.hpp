#pragma once

#include <array>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "csg/krylov.hpp"
#include "csg/multigrid.hpp"
#include "csg/spectral.hpp"

namespace csg {

enum class RunMode { spectrum, precond_spectrum, branch_point, k_sweep_1d, k_sweep_2d, solve, table_criticalk };
enum class PrecondKind { none, csg_exact, csg_mg };

inline const char* to_string(RunMode m) {
    switch (m) {
        case RunMode::spectrum: return "spectrum";
        case RunMode::precond_spectrum: return "precond-spectrum";
        case RunMode::branch_point: return "branch-point";
        case RunMode::k_sweep_1d: return "k-sweep-1d";
        case RunMode::k_sweep_2d: return "k-sweep-2d";
        case RunMode::solve: return "solve";
        case RunMode::table_criticalk: return "table-criticalk";
    }
    return "unknown";
}

inline const char* to_string(PrecondKind p) {
    switch (p) {
        case PrecondKind::none: return "none";
        case PrecondKind::csg_exact: return "csg-exact";
        case PrecondKind::csg_mg: return "csg-mg";
    }
    return "unknown";
}

struct ExperimentConfig {
    double r = 1.0;
    double R = 1.25;
    double theta_gamma = pi / 6.0;
    double theta_beta = 0.18;
    int n = 64;
    int m = 16;
    std::vector<double> k_values = {16.4};
    double tol = 1e-6;
    int max_iter = 2000;
    int mg_levels = 0; ///< 0 = coarsen until the floor
    int smoother_steps = 3;
    RunMode mode = RunMode::solve;
    PrecondKind precond = PrecondKind::csg_exact;
    int dims = 1;
    std::string out_path;
    int dense_cap = 4096;   ///< order limit for dense eigensolves
    int detect_cap = 2048;  ///< order limit for experimental branch detection
    int branch_n_max = 8192;
    int precond_count = 0;  ///< continuous eigenvalue count, 0 = n + m

    EcsDomain ecs_domain() const { return {r, R, theta_gamma, 0.0, n, m}; }
    EcsDomain csg_domain() const { return {r, R, theta_gamma, theta_beta, n, m}; }
    DomainPair pair() const { return {ecs_domain(), csg_domain()}; }

    void validate() const {
        if (k_values.empty()) throw std::invalid_argument("config: wave-number sweep is empty");
        if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("config: tol must lie in (0, 1)");
        if (dims != 1 && dims != 2) throw std::invalid_argument("config: dims must be 1 or 2");
        if (max_iter < 1) throw std::invalid_argument("config: max_iter must be >= 1");
        if (smoother_steps < 1) throw std::invalid_argument("config: smoother_steps must be >= 1");
        ecs_domain().validate();
        if (theta_beta != 0.0) csg_domain().validate();
    }
};

struct SweepRow {
    double k = 0.0;
    int iterations = 0;
    double avg_rate = 0.0;
    double kappa_discrete = 0.0;
    bool kappa_discrete_skipped = false;
    double kappa_continuous = 0.0;
};

struct EigRow {
    double re = 0.0;
    double im = 0.0;
    std::string source;
};

struct TableRow {
    int n = 0;
    double k1 = 0.0;
    double k2 = 0.0;
    double kb = 0.0;
    double kb_paper = 0.0;
    double rel_delta = 0.0;
};

struct BranchRow {
    int n = 0;
    double tb_pred = 0.0;
    double tb_detected = 0.0;
    bool detected = false;
};

struct ResidualRow {
    int iteration = 0;
    double residual = 0.0;
};

struct RunRecord {
    ExperimentConfig config;
    std::vector<SweepRow> sweep_rows;
    std::vector<EigRow> eig_rows;
    std::vector<TableRow> table_rows;
    std::vector<BranchRow> branch_rows;
    std::vector<ResidualRow> residual_rows;
    std::vector<double> wall_times; ///< per-row durations, sidecar only
    std::vector<std::string> notes;
    nlohmann::json extras = nlohmann::json::object();
    bool all_converged = true;
};

// ---------------------------------------------------------------------------
// number formatting: shortest representation that round-trips exactly
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
    std::array<char, 40> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::invalid_argument("csv: malformed number '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// CSV + JSON sidecar IO
// ---------------------------------------------------------------------------

inline void write_csv(const RunRecord& rec, std::ostream& os) {
    using detail::format_double;
    if (!rec.sweep_rows.empty()) {
        os << "k,iterations,avg_rate,kappa_discrete,kappa_continuous\n";
        for (const SweepRow& r : rec.sweep_rows) {
            os << format_double(r.k) << ',' << r.iterations << ',' << format_double(r.avg_rate) << ',';
            if (r.kappa_discrete_skipped)
                os << "skipped";
            else
                os << format_double(r.kappa_discrete);
            os << ',' << format_double(r.kappa_continuous) << '\n';
        }
    } else if (!rec.eig_rows.empty()) {
        os << "re,im,source\n";
        for (const EigRow& r : rec.eig_rows)
            os << format_double(r.re) << ',' << format_double(r.im) << ',' << r.source << '\n';
    } else if (!rec.table_rows.empty()) {
        os << "n,k1,k2,kb,kb_paper,rel_delta\n";
        for (const TableRow& r : rec.table_rows)
            os << r.n << ',' << format_double(r.k1) << ',' << format_double(r.k2) << ','
               << format_double(r.kb) << ',' << format_double(r.kb_paper) << ','
               << format_double(r.rel_delta) << '\n';
    } else if (!rec.branch_rows.empty()) {
        os << "n,tb_pred,tb_detected\n";
        for (const BranchRow& r : rec.branch_rows) {
            os << r.n << ',' << format_double(r.tb_pred) << ',';
            if (r.detected)
                os << format_double(r.tb_detected);
            else
                os << "none";
            os << '\n';
        }
    } else if (!rec.residual_rows.empty()) {
        os << "iteration,residual\n";
        for (const ResidualRow& r : rec.residual_rows)
            os << r.iteration << ',' << format_double(r.residual) << '\n';
    }
}

/// Re-reads a CSV emitted by write_csv; the row kind is inferred from the
/// header line.
inline RunRecord read_csv(std::istream& is) {
    RunRecord rec;
    std::string header;
    if (!std::getline(is, header)) return rec;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (header == "k,iterations,avg_rate,kappa_discrete,kappa_continuous") {
            SweepRow r;
            r.k = detail::parse_double(f.at(0));
            r.iterations = static_cast<int>(detail::parse_double(f.at(1)));
            r.avg_rate = detail::parse_double(f.at(2));
            if (f.at(3) == "skipped")
                r.kappa_discrete_skipped = true;
            else
                r.kappa_discrete = detail::parse_double(f.at(3));
            r.kappa_continuous = detail::parse_double(f.at(4));
            rec.sweep_rows.push_back(r);
        } else if (header == "re,im,source") {
            rec.eig_rows.push_back({detail::parse_double(f.at(0)), detail::parse_double(f.at(1)),
                                    std::string(f.at(2))});
        } else if (header == "n,k1,k2,kb,kb_paper,rel_delta") {
            TableRow r;
            r.n = static_cast<int>(detail::parse_double(f.at(0)));
            r.k1 = detail::parse_double(f.at(1));
            r.k2 = detail::parse_double(f.at(2));
            r.kb = detail::parse_double(f.at(3));
            r.kb_paper = detail::parse_double(f.at(4));
            r.rel_delta = detail::parse_double(f.at(5));
            rec.table_rows.push_back(r);
        } else if (header == "n,tb_pred,tb_detected") {
            BranchRow r;
            r.n = static_cast<int>(detail::parse_double(f.at(0)));
            r.tb_pred = detail::parse_double(f.at(1));
            if (f.at(2) == "none") {
                r.detected = false;
            } else {
                r.detected = true;
                r.tb_detected = detail::parse_double(f.at(2));
            }
            rec.branch_rows.push_back(r);
        } else if (header == "iteration,residual") {
            rec.residual_rows.push_back({static_cast<int>(detail::parse_double(f.at(0))),
                                         detail::parse_double(f.at(1))});
        } else {
            throw std::invalid_argument("csv: unrecognized header '" + header + "'");
        }
    }
    return rec;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    return nlohmann::json{
        {"r", c.r}, {"R", c.R},
        {"theta_gamma", c.theta_gamma}, {"theta_beta", c.theta_beta},
        {"n", c.n}, {"m", c.m},
        {"k_values", c.k_values},
        {"tol", c.tol}, {"max_iter", c.max_iter},
        {"mg_levels", c.mg_levels}, {"smoother_steps", c.smoother_steps},
        {"mode", to_string(c.mode)}, {"precond", to_string(c.precond)},
        {"dims", c.dims}, {"out", c.out_path},
        {"dense_cap", c.dense_cap}, {"detect_cap", c.detect_cap},
        {"branch_n_max", c.branch_n_max}, {"precond_count", c.precond_count},
    };
}

/// JSON sidecar: full config echo plus run metadata. Timestamps and wall
/// times live here so the CSV data rows stay byte-identical between runs.
inline nlohmann::json sidecar_json(const RunRecord& rec) {
    nlohmann::json j;
    j["config"] = config_to_json(rec.config);
    j["notes"] = rec.notes;
    j["wall_times_seconds"] = rec.wall_times;
    j["all_converged"] = rec.all_converged;
    j["extras"] = rec.extras;
    const auto now = std::chrono::system_clock::now();
    j["timestamp_unix"] = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    return j;
}

inline void write_outputs(const RunRecord& rec, const std::string& csv_path) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open output file " + csv_path);
    write_csv(rec, csv);
    std::ofstream js(csv_path + ".json");
    if (!js) throw std::runtime_error("cannot open sidecar file " + csv_path + ".json");
    js << sidecar_json(rec).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// solver assembly
// ---------------------------------------------------------------------------

namespace detail {

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

/// One preconditioned solve of the absorbing-layer Helmholtz problem with a
/// centered point source; returns the iteration log.
inline SolveLog solve_once(const ExperimentConfig& cfg, double k) {
    const ContourGrid gq = build_ecs_grid(cfg.ecs_domain());
    const ComplexVector b = point_source_rhs(gq, cfg.dims);

    ComplexBandedMatrix H1;
    ComplexSparseMatrix H2;
    LinearOperator A;
    if (cfg.dims == 1) {
        H1 = assemble_helmholtz_1d(gq, k);
        A = make_operator(H1, "helmholtz-1d");
    } else {
        H2 = assemble_helmholtz_2d(gq, k);
        A = make_operator(H2, "helmholtz-2d");
    }

    if (cfg.precond == PrecondKind::none) {
        auto [x, log] = gmres(A, b, ComplexVector(A.dim, Complex(0.0)), cfg.max_iter, cfg.tol);
        return log;
    }

    if (cfg.precond == PrecondKind::csg_exact) {
        const ContourGrid gp = build_csg_grid(cfg.csg_domain());
        ComplexBandedMatrix M1;
        ComplexSparseMatrix M2;
        std::optional<BandLU> lu;
        if (cfg.dims == 1) {
            M1 = assemble_helmholtz_1d(gp, k);
            lu.emplace(BandLU::factor(M1));
        } else {
            M2 = assemble_helmholtz_2d(gp, k);
            lu.emplace(BandLU::factor(M2, gp.num_unknowns(), gp.num_unknowns()));
        }
        // right preconditioning: solve A M^{-1} y = b, then x = M^{-1} y
        LinearOperator AM{A.dim, [&](const ComplexVector& v) { return A.apply(lu->solve(v)); },
                          "helmholtz*csg^-1"};
        auto [y, log] = gmres(AM, b, ComplexVector(A.dim, Complex(0.0)), cfg.max_iter, cfg.tol);
        return log;
    }

    // csg-mg: flexible GMRES with one V(1,1)-cycle per application
    const MgHierarchy hier(cfg.csg_domain(), k, cfg.dims, 4, cfg.mg_levels);
    auto precond = [&](const ComplexVector& v) {
        return hier.v_cycle(0, v, ComplexVector(v.size(), Complex(0.0)), cfg.smoother_steps);
    };
    auto [x, log] = fgmres(A, precond, b, cfg.max_iter, cfg.tol);
    return log;
}

} // namespace detail

// ---------------------------------------------------------------------------
// experiment drivers
// ---------------------------------------------------------------------------

/// Eigenvalue data for one grid: the dense spectrum of the discrete negative
/// Laplacian next to the continuous one, with the bounding-triangle corners
/// and the predicted split point in the extras. With mode
/// precond-spectrum the continuous, naive and discrete preconditioned
/// spectra are emitted instead.
inline RunRecord run_spectrum(const ExperimentConfig& cfg) {
    cfg.validate();
    RunRecord rec;
    rec.config = cfg;
    detail::Stopwatch watch;

    const auto emit = [&rec](const SpectrumReport& rep) {
        for (const Complex& z : rep.eigenvalues)
            rec.eig_rows.push_back({z.real(), z.imag(), to_string(rep.source)});
    };

    if (cfg.mode == RunMode::precond_spectrum) {
        const DomainPair pair = cfg.pair();
        const double k = cfg.k_values.front();
        const int count = cfg.precond_count > 0 ? cfg.precond_count : cfg.n + cfg.m;
        const SpectrumReport exact = make_spectrum_report(precond_eigs_exact(pair, k, count),
                                                          SpectrumSource::preconditioned_exact);
        emit(exact);
        emit(make_spectrum_report(precond_eigs_naive(pair, k, count),
                                  SpectrumSource::preconditioned_naive));
        if (exact.condition_number) rec.extras["kappa_continuous"] = *exact.condition_number;
        if (cfg.n + cfg.m - 1 <= cfg.dense_cap) {
            const SpectrumReport disc = make_spectrum_report(
                precond_eigs_discrete(pair, k, cfg.dense_cap), SpectrumSource::preconditioned_discrete);
            emit(disc);
            if (disc.condition_number) rec.extras["kappa_discrete"] = *disc.condition_number;
        }
        rec.wall_times.push_back(watch.seconds());
        return rec;
    }

    const EcsDomain dom{cfg.r, cfg.R, cfg.theta_gamma, cfg.theta_beta, cfg.n, cfg.m};
    const ContourGrid grid = build_csg_grid(dom);
    const int N = grid.num_unknowns();
    if (N > cfg.dense_cap)
        throw std::invalid_argument("run_spectrum: grid exceeds the dense eigensolve cap");
    const ComplexBandedMatrix L = assemble_neg_laplacian_1d(grid);
    const EigenResult eig = dense_eigenvalues(to_dense(L), cfg.dense_cap);
    SpectrumReport discrete = make_spectrum_report(eig.eigenvalues, SpectrumSource::discrete);
    const BranchPoint pred = predict_branch_point(dom);
    if (pred.exists) {
        discrete.branch_point = pred.t_b;
        discrete.rho_b = pred.rho_b;
    }
    emit(discrete);
    emit(make_spectrum_report(continuous_laplacian_eigs(dom, N), SpectrumSource::continuous));

    const Complex h_int = grid.interior_spacing();
    const Complex t1 = 4.0 / (h_int * h_int);
    const Complex t2 = 4.0 / (grid.h_gamma * grid.h_gamma);
    rec.extras["triangle"] = {{"t0", {0.0, 0.0}},
                              {"t1", {t1.real(), t1.imag()}},
                              {"t2", {t2.real(), t2.imag()}}};
    if (discrete.branch_point) {
        rec.extras["t_b"] = {discrete.branch_point->real(), discrete.branch_point->imag()};
        rec.extras["rho_b"] = *discrete.rho_b;
    }
    if (!eig.eigenvalues.empty()) {
        double min_arg = std::arg(eig.eigenvalues.front());
        double max_arg = min_arg;
        for (const Complex& z : eig.eigenvalues) {
            min_arg = std::min(min_arg, std::arg(z));
            max_arg = std::max(max_arg, std::arg(z));
        }
        rec.extras["arg_range"] = {min_arg, max_arg};
    }
    rec.wall_times.push_back(watch.seconds());
    return rec;
}

/// Iteration counts and condition numbers over a wave-number sweep.
inline RunRecord run_k_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    RunRecord rec;
    rec.config = cfg;
    std::vector<double> ks = cfg.k_values;
    std::sort(ks.begin(), ks.end());
    const DomainPair pair = cfg.pair();
    const int cont_count = cfg.precond_count > 0 ? cfg.precond_count : cfg.n + cfg.m;
    const int N1 = cfg.n + cfg.m - 1;
    const long total_order = cfg.dims == 1 ? N1 : static_cast<long>(N1) * N1;

    for (double k : ks) {
        detail::Stopwatch watch;
        SweepRow row;
        row.k = k;
        const SolveLog log = detail::solve_once(cfg, k);
        row.iterations = log.iterations;
        row.avg_rate = log.avg_rate;
        if (!log.converged) rec.all_converged = false;

        if (cfg.precond != PrecondKind::none && k > 0.0) {
            row.kappa_continuous = condition_number(precond_eigs_exact(pair, k, cont_count));
            if (total_order <= cfg.dense_cap)
                row.kappa_discrete =
                    condition_number(precond_eigs_discrete(pair, k, cfg.dense_cap, cfg.dims));
            else
                row.kappa_discrete_skipped = true;
        } else {
            row.kappa_discrete_skipped = true;
            row.kappa_continuous = 0.0;
        }
        rec.sweep_rows.push_back(row);
        rec.wall_times.push_back(watch.seconds());
    }
    return rec;
}

/// Predicted and experimentally detected split points over a doubling grid
/// schedule; detection is limited to orders the dense eigensolver handles.
inline RunRecord run_branch_scaling(const ExperimentConfig& cfg) {
    cfg.validate();
    RunRecord rec;
    rec.config = cfg;
    for (int n = 32; n <= cfg.branch_n_max; n *= 2) {
        detail::Stopwatch watch;
        EcsDomain dom{cfg.r, cfg.R, cfg.theta_gamma, 0.0, n, std::max(1, n / 4)};
        BranchRow row;
        row.n = n;
        const BranchPoint bp = predict_branch_point(dom);
        if (!bp.exists) continue;
        row.tb_pred = std::abs(bp.t_b);
        const int N = dom.n + dom.m - 1;
        if (N <= cfg.detect_cap) {
            const ContourGrid grid = build_ecs_grid(dom);
            const EigenResult eig = dense_eigenvalues(to_dense(assemble_neg_laplacian_1d(grid)),
                                                      std::max(cfg.detect_cap, cfg.dense_cap));
            const auto det = detect_branch_point(eig.eigenvalues, dom);
            if (det) {
                row.detected = true;
                row.tb_detected = std::abs(*det);
            }
        }
        rec.branch_rows.push_back(row);
        rec.wall_times.push_back(watch.seconds());
    }
    return rec;
}

/// Critical wave numbers k1 = 2n, k2 = 2 sqrt(2) n and the Lambert-W
/// estimate k_b = sqrt(|t_b|) for the published grid sizes.
inline RunRecord run_table_criticalk(const ExperimentConfig& cfg) {
    cfg.validate();
    RunRecord rec;
    rec.config = cfg;
    detail::Stopwatch watch;
    // published reference values for r=1, R=1.25, theta_gamma=pi/6, m=n/4
    static constexpr std::array<std::pair<int, double>, 8> published = {{
        {16, 12.8}, {32, 13.8}, {64, 20.3}, {128, 26.2},
        {256, 35.7}, {512, 40.6}, {1024, 50.0}, {2048, 53.1},
    }};
    for (const auto& [n, kb_paper] : published) {
        EcsDomain dom{cfg.r, cfg.R, cfg.theta_gamma, 0.0, n, std::max(1, n / 4)};
        const BranchPoint bp = predict_branch_point(dom);
        TableRow row;
        row.n = n;
        row.k1 = 2.0 * n;
        row.k2 = 2.0 * std::sqrt(2.0) * n;
        row.kb = bp.exists ? std::sqrt(std::abs(bp.t_b)) : 0.0;
        row.kb_paper = kb_paper;
        row.rel_delta = kb_paper != 0.0 ? std::abs(row.kb - kb_paper) / kb_paper : 0.0;
        rec.table_rows.push_back(row);
    }
    rec.notes.push_back(
        "Reference k_b values are the published table row; the closed-form "
        "Lambert-W evaluation reproduces it to within a few percent for n >= 256 "
        "but sits 26-52% above it for n in {16, 32, 64}.");
    rec.notes.push_back(
        "The published sources disagree internally at n=64 (17.9327 in the text "
        "vs 20.3 in the table); the formula evaluated here gives 25.7 and matches "
        "neither, so both reference numbers appear to be experimentally detected.");
    rec.wall_times.push_back(watch.seconds());
    return rec;
}

/// One preconditioned solve; the residual history becomes the data rows.
inline RunRecord run_solve(const ExperimentConfig& cfg) {
    cfg.validate();
    RunRecord rec;
    rec.config = cfg;
    detail::Stopwatch watch;
    const SolveLog log = detail::solve_once(cfg, cfg.k_values.front());
    for (std::size_t i = 0; i < log.residual_norms.size(); ++i)
        rec.residual_rows.push_back({static_cast<int>(i), log.residual_norms[i]});
    rec.all_converged = log.converged;
    rec.extras["iterations"] = log.iterations;
    rec.extras["avg_rate"] = log.avg_rate;
    rec.extras["final_relative_residual"] = log.final_residual;
    rec.wall_times.push_back(watch.seconds());
    return rec;
}

/// Dispatch on the configured mode.
inline RunRecord run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.mode) {
        case RunMode::spectrum:
        case RunMode::precond_spectrum: return run_spectrum(cfg);
        case RunMode::branch_point: return run_branch_scaling(cfg);
        case RunMode::k_sweep_1d:
        case RunMode::k_sweep_2d: return run_k_sweep(cfg);
        case RunMode::table_criticalk: return run_table_criticalk(cfg);
        case RunMode::solve: return run_solve(cfg);
    }
    throw std::invalid_argument("run_experiment: unknown mode");
}

} // namespace csg
