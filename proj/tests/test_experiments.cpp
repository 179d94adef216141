#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "csg/experiments.hpp"

using namespace csg;

namespace {

ExperimentConfig small_sweep_config() {
    ExperimentConfig cfg;
    cfg.n = 16;
    cfg.m = 4;
    cfg.k_values = {4.0, 8.0, 12.0};
    cfg.mode = RunMode::k_sweep_1d;
    cfg.precond = PrecondKind::csg_exact;
    return cfg;
}

} // namespace

TEST_CASE("config validation catches bad input", "[experiments]") {
    ExperimentConfig cfg = small_sweep_config();
    cfg.k_values.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument); // empty sweep
    cfg = small_sweep_config();
    cfg.tol = 2.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_sweep_config();
    cfg.dims = 3;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("sweep rows are ordered and carry condition numbers", "[experiments]") {
    ExperimentConfig cfg = small_sweep_config();
    cfg.k_values = {12.0, 4.0, 8.0}; // intentionally unsorted
    const RunRecord rec = run_k_sweep(cfg);
    REQUIRE(rec.sweep_rows.size() == 3);
    CHECK(rec.sweep_rows[0].k == 4.0);
    CHECK(rec.sweep_rows[1].k == 8.0);
    CHECK(rec.sweep_rows[2].k == 12.0);
    for (const SweepRow& r : rec.sweep_rows) {
        CHECK(r.iterations > 0);
        CHECK(r.kappa_continuous > 0.0);
        CHECK_FALSE(r.kappa_discrete_skipped); // N = 19 fits the dense cap
        CHECK(r.kappa_discrete > 0.0);
    }
    CHECK(rec.all_converged);
}

TEST_CASE("csv io round-trips every row type exactly", "[experiments]") {
    SECTION("sweep rows") {
        RunRecord rec;
        rec.sweep_rows = {{16.4, 18, 0.4629384629111, 2.165394611, false, 2.157311},
                          {21.0, 19, 0.51, 0.0, true, 2.394817}};
        std::stringstream ss;
        write_csv(rec, ss);
        const RunRecord back = read_csv(ss);
        REQUIRE(back.sweep_rows.size() == 2);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(back.sweep_rows[i].k == rec.sweep_rows[i].k);
            CHECK(back.sweep_rows[i].iterations == rec.sweep_rows[i].iterations);
            CHECK(back.sweep_rows[i].avg_rate == rec.sweep_rows[i].avg_rate);
            CHECK(back.sweep_rows[i].kappa_discrete == rec.sweep_rows[i].kappa_discrete);
            CHECK(back.sweep_rows[i].kappa_discrete_skipped == rec.sweep_rows[i].kappa_discrete_skipped);
            CHECK(back.sweep_rows[i].kappa_continuous == rec.sweep_rows[i].kappa_continuous);
        }
    }
    SECTION("eigenvalue rows survive full double precision") {
        RunRecord rec;
        rec.eig_rows = {{0.1 + 1e-17, -3.533999999999999e4, "discrete"},
                        {1.0 / 3.0, 2.2250738585072014e-308, "continuous"}};
        std::stringstream ss;
        write_csv(rec, ss);
        const RunRecord back = read_csv(ss);
        REQUIRE(back.eig_rows.size() == 2);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(back.eig_rows[i].re == rec.eig_rows[i].re);
            CHECK(back.eig_rows[i].im == rec.eig_rows[i].im);
            CHECK(back.eig_rows[i].source == rec.eig_rows[i].source);
        }
    }
    SECTION("table and branch rows") {
        RunRecord rec;
        rec.table_rows = {{64, 128.0, 181.01933598375618, 25.707, 20.3, 0.2664}};
        std::stringstream s1;
        write_csv(rec, s1);
        const RunRecord b1 = read_csv(s1);
        REQUIRE(b1.table_rows.size() == 1);
        CHECK(b1.table_rows[0].k2 == rec.table_rows[0].k2);

        RunRecord rec2;
        rec2.branch_rows = {{64, 660.85, 865.9, true}, {4096, 1900.0, 0.0, false}};
        std::stringstream s2;
        write_csv(rec2, s2);
        const RunRecord b2 = read_csv(s2);
        REQUIRE(b2.branch_rows.size() == 2);
        CHECK(b2.branch_rows[0].tb_detected == rec2.branch_rows[0].tb_detected);
        CHECK_FALSE(b2.branch_rows[1].detected);
    }
}

TEST_CASE("identical configs give byte-identical data rows", "[experiments]") {
    const ExperimentConfig cfg = small_sweep_config();
    std::stringstream a, b;
    write_csv(run_k_sweep(cfg), a);
    write_csv(run_k_sweep(cfg), b);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("wall") == std::string::npos); // timings live in the sidecar
}

TEST_CASE("spectrum run emits the discrete and continuous spectra", "[experiments]") {
    ExperimentConfig cfg;
    cfg.n = 64;
    cfg.m = 16;
    cfg.theta_beta = 0.0;
    cfg.mode = RunMode::spectrum;
    const RunRecord rec = run_spectrum(cfg);
    int discrete = 0, continuous = 0;
    for (const EigRow& r : rec.eig_rows) {
        discrete += r.source == "discrete";
        continuous += r.source == "continuous";
    }
    CHECK(discrete == 79);
    CHECK(continuous == 79);
    CHECK(rec.extras.contains("t_b"));
    CHECK(rec.extras.contains("triangle"));
}

TEST_CASE("spectrum of a real grid has no branch point entry", "[experiments]") {
    ExperimentConfig cfg;
    cfg.n = 16;
    cfg.m = 4;
    cfg.theta_gamma = 0.0;
    cfg.theta_beta = 0.0;
    cfg.mode = RunMode::spectrum;
    const RunRecord rec = run_spectrum(cfg);
    CHECK_FALSE(rec.extras.contains("t_b"));
    for (const EigRow& r : rec.eig_rows)
        if (r.source == "discrete") CHECK(std::abs(r.im) < 1e-6 * std::abs(r.re));
}

TEST_CASE("stretched-grid spectrum rotates the upper branch", "[experiments]") {
    ExperimentConfig cfg;
    cfg.n = 32;
    cfg.m = 8;
    cfg.theta_beta = 0.18;
    cfg.mode = RunMode::spectrum;
    const RunRecord rec = run_spectrum(cfg);
    const auto arange = rec.extras["arg_range"].get<std::vector<double>>();
    // every eigenvalue now sits strictly below the real axis, rotated by
    // about -2 theta_beta relative to the plain grid
    CHECK(arange[1] < -0.5 * 0.18);
}

TEST_CASE("table run reproduces k1 and k2 exactly", "[experiments]") {
    ExperimentConfig cfg;
    cfg.mode = RunMode::table_criticalk;
    const RunRecord rec = run_table_criticalk(cfg);
    REQUIRE(rec.table_rows.size() == 8);
    int n = 16;
    for (const TableRow& row : rec.table_rows) {
        CHECK(row.n == n);
        CHECK(row.k1 == 2.0 * n);
        CHECK(row.k2 == 2.0 * std::sqrt(2.0) * n);
        CHECK(row.kb > 0.0);
        n *= 2;
    }
    CHECK_FALSE(rec.notes.empty());
}

TEST_CASE("branch scaling emits predictions and detections", "[experiments]") {
    ExperimentConfig cfg;
    cfg.mode = RunMode::branch_point;
    cfg.branch_n_max = 128;
    cfg.detect_cap = 128;
    const RunRecord rec = run_branch_scaling(cfg);
    REQUIRE(rec.branch_rows.size() == 3); // n = 32, 64, 128
    double prev = 0.0;
    for (const BranchRow& row : rec.branch_rows) {
        CHECK(row.tb_pred > prev);
        prev = row.tb_pred;
    }
    CHECK(rec.branch_rows[0].detected); // n = 32 -> N = 39 <= 128
    CHECK(rec.branch_rows[1].detected);
    CHECK_FALSE(rec.branch_rows[2].detected); // N = 159 beyond the cap
}

TEST_CASE("solve run records the residual history", "[experiments]") {
    ExperimentConfig cfg;
    cfg.n = 16;
    cfg.m = 4;
    cfg.k_values = {6.4};
    cfg.mode = RunMode::solve;
    cfg.precond = PrecondKind::csg_mg;
    cfg.dims = 1;
    const RunRecord rec = run_solve(cfg);
    REQUIRE(rec.residual_rows.size() >= 2);
    CHECK(rec.residual_rows.front().residual > rec.residual_rows.back().residual);
    CHECK(rec.all_converged);
    CHECK(rec.extras["final_relative_residual"].get<double>() <= 1e-5);
}
