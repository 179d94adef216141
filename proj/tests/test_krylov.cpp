#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "csg/dense.hpp"
#include "csg/krylov.hpp"

using namespace csg;

namespace {

std::mt19937 rng(777);

ComplexVector random_vec(int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ComplexVector v(n);
    for (Complex& z : v) z = {u(rng), u(rng)};
    return v;
}

LinearOperator diag_op(ComplexVector d) {
    const int n = static_cast<int>(d.size());
    return {n, [d = std::move(d)](const ComplexVector& x) {
                ComplexVector y(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) y[i] = d[i] * x[i];
                return y;
            }};
}

} // namespace

TEST_CASE("identity converges in one iteration", "[krylov]") {
    const ComplexVector b = random_vec(12);
    auto [x, log] = gmres(diag_op(ComplexVector(12, Complex(1.0))), b, ComplexVector(12), 10, 1e-12);
    CHECK(log.iterations == 1);
    CHECK(log.converged);
    for (int i = 0; i < 12; ++i) CHECK(std::abs(x[i] - b[i]) < 1e-12);
}

TEST_CASE("krylov terminates at the minimal polynomial degree", "[krylov]") {
    auto [x, log] = gmres(diag_op({1.0, 2.0, 3.0, 4.0}), ComplexVector(4, Complex(1.0)),
                          ComplexVector(4), 10, 1e-10);
    CHECK(log.iterations <= 4);
    CHECK(log.converged);
    const double want[] = {1.0, 0.5, 1.0 / 3.0, 0.25};
    for (int i = 0; i < 4; ++i) CHECK(std::abs(x[i] - want[i]) < 1e-9);
}

TEST_CASE("residual history is monotonically non-increasing", "[krylov]") {
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 30;
        DenseMatrix A(n, n);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) A(i, j) = Complex(u(rng), u(rng));
            A(i, i) += 8.0;
        }
        const LinearOperator op{n, [&A](const ComplexVector& x) { return A.apply(x); }};
        auto [x, log] = gmres(op, random_vec(n), ComplexVector(n), n, 1e-10);
        for (std::size_t i = 1; i < log.residual_norms.size(); ++i)
            CHECK(log.residual_norms[i] <= log.residual_norms[i - 1] * (1.0 + 1e-12));
        CHECK(log.converged);
        CHECK(log.avg_rate > 0.0);
    }
}

TEST_CASE("finite termination within the space dimension", "[krylov]") {
    const int n = 50;
    DenseMatrix A(n, n);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) A(i, j) = Complex(u(rng), u(rng));
        A(i, i) += 4.0;
    }
    const LinearOperator op{n, [&A](const ComplexVector& x) { return A.apply(x); }};
    const ComplexVector b = random_vec(n);
    auto [x, log] = gmres(op, b, ComplexVector(n), n, 1e-10);
    CHECK(log.iterations <= n);
    CHECK(log.final_residual <= 1e-10);
}

TEST_CASE("fgmres with the exact inverse needs one iteration", "[krylov]") {
    const int n = 20;
    ComplexVector d = random_vec(n);
    for (Complex& z : d) z += 3.0;
    ComplexVector dinv(n);
    for (int i = 0; i < n; ++i) dinv[i] = 1.0 / d[i];
    auto [x, log] = fgmres(diag_op(d), [&](const ComplexVector& v) {
        ComplexVector y(v.size());
        for (int i = 0; i < n; ++i) y[i] = dinv[i] * v[i];
        return y;
    }, random_vec(n), 10, 1e-10);
    CHECK(log.iterations == 1);
    CHECK(log.converged);
}

TEST_CASE("fgmres with the identity preconditioner reduces to gmres", "[krylov]") {
    const int n = 25;
    DenseMatrix A(n, n);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) A(i, j) = Complex(u(rng), u(rng));
        A(i, i) += 6.0;
    }
    const LinearOperator op{n, [&A](const ComplexVector& x) { return A.apply(x); }};
    const ComplexVector b = random_vec(n);
    auto [xg, lg] = gmres(op, b, ComplexVector(n), 8, 1e-14);
    auto [xf, lf] = fgmres(op, [](const ComplexVector& v) { return v; }, b, 8, 1e-14);
    REQUIRE(lg.iterations == lf.iterations);
    for (std::size_t i = 0; i < lg.residual_norms.size(); ++i)
        CHECK(std::abs(lg.residual_norms[i] - lf.residual_norms[i]) < 1e-12 * lg.residual_norms[0]);
    for (int i = 0; i < n; ++i) CHECK(std::abs(xg[i] - xf[i]) < 1e-12);
}

TEST_CASE("fgmres with a fixed preconditioner matches right-preconditioned gmres", "[krylov]") {
    EcsDomain dq{1.0, 1.25, pi / 6.0, 0.0, 16, 4};
    EcsDomain dp{1.0, 1.25, pi / 6.0, 0.18, 16, 4};
    const ComplexBandedMatrix H = assemble_helmholtz_1d(build_ecs_grid(dq), 6.4);
    const ComplexBandedMatrix M = assemble_helmholtz_1d(build_csg_grid(dp), 6.4);
    const BandLU lu = BandLU::factor(M);
    const int n = H.order();
    const ComplexVector b = point_source_rhs(build_ecs_grid(dq), 1);

    const LinearOperator A = make_operator(H);
    auto msolve = [&lu](const ComplexVector& v) { return lu.solve(v); };
    auto [xf, lf] = fgmres(A, msolve, b, 40, 1e-9);

    const LinearOperator AM{n, [&](const ComplexVector& v) { return H.apply(lu.solve(v)); }};
    auto [y, lg] = gmres(AM, b, ComplexVector(n), 40, 1e-9);
    const ComplexVector xg = lu.solve(y);

    REQUIRE(lf.iterations == lg.iterations);
    for (int i = 0; i < n; ++i) CHECK(std::abs(xf[i] - xg[i]) < 1e-10);
}

TEST_CASE("1d stretched-grid preconditioning reaches its plateau count", "[krylov]") {
    // 80 grid points, k on the plateau: the exactly preconditioned solve
    // settles at a small iteration count
    EcsDomain dq{1.0, 1.25, pi / 6.0, 0.0, 64, 16};
    EcsDomain dp{1.0, 1.25, pi / 6.0, 0.18, 64, 16};
    const ContourGrid gq = build_ecs_grid(dq);
    const ComplexBandedMatrix H = assemble_helmholtz_1d(gq, 16.4);
    const BandLU lu = BandLU::factor(assemble_helmholtz_1d(build_csg_grid(dp), 16.4));
    const ComplexVector b = point_source_rhs(gq, 1);
    const LinearOperator AM{H.order(), [&](const ComplexVector& v) { return H.apply(lu.solve(v)); }};
    auto [y, log] = gmres(AM, b, ComplexVector(H.order(), Complex(0.0)), 100, 1e-6);
    CHECK(log.converged);
    CHECK(log.iterations >= 5);
    CHECK(log.iterations <= 30);
}

TEST_CASE("smoother leaves an exact solution alone", "[krylov]") {
    ComplexVector d = random_vec(10);
    for (Complex& z : d) z += 2.0;
    const LinearOperator A = diag_op(d);
    const ComplexVector x = random_vec(10);
    const ComplexVector b = A.apply(x);
    const ComplexVector x2 = gmres_smoother_step(A, b, x, 3);
    for (int i = 0; i < 10; ++i) CHECK(std::abs(x2[i] - x[i]) < 1e-13);
}

TEST_CASE("smoother with full dimension solves exactly", "[krylov]") {
    const int n = 12;
    ComplexVector d = random_vec(n);
    for (Complex& z : d) z += 2.5;
    const LinearOperator A = diag_op(d);
    const ComplexVector b = random_vec(n);
    const ComplexVector x = gmres_smoother_step(A, b, ComplexVector(n), n);
    const ComplexVector ax = A.apply(x);
    for (int i = 0; i < n; ++i) CHECK(std::abs(ax[i] - b[i]) < 1e-10);
}

TEST_CASE("smoother reduces the residual on the stretched-grid operator", "[krylov]") {
    EcsDomain d{1.0, 1.25, pi / 6.0, 0.18, 32, 8};
    const ComplexBandedMatrix M = assemble_helmholtz_1d(build_csg_grid(d), 10.0);
    const LinearOperator A = make_operator(M);
    const ComplexVector b = random_vec(A.dim);
    const ComplexVector x1 = gmres_smoother_step(A, b, ComplexVector(A.dim), 3);
    const ComplexVector ax = A.apply(x1);
    double r1 = 0.0;
    for (int i = 0; i < A.dim; ++i) r1 += std::norm(b[i] - ax[i]);
    CHECK(std::sqrt(r1) < norm2(b));
}

TEST_CASE("input validation", "[krylov]") {
    const LinearOperator A = diag_op(ComplexVector(4, Complex(1.0)));
    CHECK_THROWS_AS(gmres(A, ComplexVector(3), ComplexVector(4), 5, 1e-8), std::invalid_argument);
    CHECK_THROWS_AS(gmres(A, ComplexVector(4), ComplexVector(4), 5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(gmres_smoother_step(A, ComplexVector(4), ComplexVector(4), 0), std::invalid_argument);
}
