#include <algorithm>
#include <catch2/catch_amalgamated.hpp>

#include "csg/dense.hpp"
#include "csg/operators.hpp"
#include "csg/spectral.hpp"

using namespace csg;
using Catch::Matchers::WithinAbs;

namespace {

ComplexVector sorted_by_abs(ComplexVector v) {
    std::sort(v.begin(), v.end(), [](const Complex& a, const Complex& b) {
        return std::abs(a) < std::abs(b);
    });
    return v;
}

} // namespace

TEST_CASE("uniform real grid gives the classical 3-point stencil", "[operators]") {
    // four intervals of h = 1/4: rows are (-16, 32, -16)
    EcsDomain d{0.5, 1.0, 0.0, 0.0, 2, 2};
    const ComplexBandedMatrix A = assemble_neg_laplacian_1d(build_ecs_grid(d));
    REQUIRE(A.order() == 3);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(A.diag(i) - Complex(32.0)) < 1e-12);
    for (int i = 0; i < 2; ++i) {
        CHECK(std::abs(A.sub(i) - Complex(-16.0)) < 1e-12);
        CHECK(std::abs(A.super(i) - Complex(-16.0)) < 1e-12);
    }
}

TEST_CASE("turning-point row carries the non-uniform stencil", "[operators]") {
    EcsDomain d{1.0, 2.0, pi / 6.0, 0.0, 4, 4};
    const ContourGrid g = build_ecs_grid(d);
    const ComplexBandedMatrix A = assemble_neg_laplacian_1d(g);
    const Complex h = 0.25;
    const Complex hg = 0.25 * std::polar(1.0, pi / 6.0);
    const int i = 3; // unknown j = n = 4
    CHECK(std::abs(A.diag(i) - 2.0 / (h * hg)) < 1e-10);
    CHECK(std::abs(A.sub(i - 1) + 2.0 / (h * (h + hg))) < 1e-10);
    CHECK(std::abs(A.super(i) + 2.0 / (hg * (h + hg))) < 1e-10);
}

TEST_CASE("assembled eigenvalues are roots of the eigenvalue condition", "[operators]") {
    EcsDomain d{1.0, 1.5, pi / 6.0, 0.0, 4, 2};
    const ContourGrid g = build_ecs_grid(d);
    const EigenResult eig = dense_eigenvalues(to_dense(assemble_neg_laplacian_1d(g)));
    REQUIRE(eig.eigenvalues.size() == 5);
    REQUIRE(eig.all_converged());
    const Complex gratio = g.h_gamma / g.interior_spacing();
    for (const Complex& t : eig.eigenvalues)
        CHECK(std::abs(discrete_eig_condition(t, g.interior_spacing(), gratio, 4, 2)) < 1e-8);
}

TEST_CASE("helmholtz operator is the shifted laplacian", "[operators]") {
    EcsDomain d{1.0, 1.25, pi / 6.0, 0.0, 16, 4};
    const ContourGrid g = build_ecs_grid(d);
    const double k = 7.3;
    const ComplexBandedMatrix L = assemble_neg_laplacian_1d(g);
    const ComplexBandedMatrix H = assemble_helmholtz_1d(g, k);

    SECTION("k = 0 leaves the matrix unchanged") {
        const ComplexBandedMatrix H0 = assemble_helmholtz_1d(g, 0.0);
        for (int i = 0; i < L.order(); ++i) CHECK(H0.diag(i) == L.diag(i));
    }
    SECTION("entries shift on the diagonal only") {
        for (int i = 0; i < L.order(); ++i) {
            CHECK(H.diag(i) == L.diag(i) - k * k);
            if (i > 0) CHECK(H.sub(i - 1) == L.sub(i - 1));
        }
    }
    SECTION("spectra shift element-wise") {
        const ComplexVector el = sorted_by_abs(dense_eigenvalues(to_dense(L)).eigenvalues);
        ComplexVector eh = dense_eigenvalues(to_dense(H)).eigenvalues;
        for (Complex& z : eh) z += k * k;
        const ComplexVector ehs = sorted_by_abs(eh);
        for (std::size_t i = 0; i < el.size(); ++i)
            CHECK(std::abs(el[i] - ehs[i]) < 1e-8 * std::abs(el.back()));
    }
}

TEST_CASE("high wave number pushes the smallest eigenvalue left", "[operators]") {
    EcsDomain d{1.0, 1.25, pi / 6.0, 0.0, 64, 16};
    const EigenResult eig =
        dense_eigenvalues(to_dense(assemble_helmholtz_1d(build_ecs_grid(d), 26.4)));
    const ComplexVector ev = sorted_by_abs(eig.eigenvalues);
    CHECK(ev.front().real() < 0.0);
}

TEST_CASE("toy 2d assembly equals the hand-built kronecker sum", "[operators]") {
    EcsDomain d{1.0, 1.5, pi / 6.0, 0.0, 2, 2};
    const ContourGrid g = build_ecs_grid(d);
    const double k = 3.0;
    const ComplexBandedMatrix L = assemble_neg_laplacian_1d(g);
    const int N1 = L.order();
    REQUIRE(N1 == 3);
    const DenseMatrix L1 = to_dense(L);
    DenseMatrix want(9, 9);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int a2 = 0; a2 < 3; ++a2)
                for (int b2 = 0; b2 < 3; ++b2) {
                    Complex v = 0.0;
                    if (b == b2) v += L1(a, a2);
                    if (a == a2) v += L1(b, b2);
                    if (a == a2 && b == b2) v -= k * k;
                    want(a * 3 + b, a2 * 3 + b2) = v;
                }
    const DenseMatrix got = to_dense(assemble_helmholtz_2d(g, k));
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j)
            CHECK(std::abs(got(i, j) - want(i, j)) < 1e-13 * std::abs(want(i, i)));
}

TEST_CASE("2d spectrum is the set of pairwise 1d sums", "[operators]") {
    EcsDomain d{1.0, 1.25, pi / 6.0, 0.0, 8, 2};
    const ContourGrid g = build_ecs_grid(d);
    const double k = 4.2;
    const ComplexVector e1 = dense_eigenvalues(to_dense(assemble_neg_laplacian_1d(g))).eigenvalues;
    ComplexVector sums;
    for (const Complex& a : e1)
        for (const Complex& b : e1) sums.push_back(a + b - k * k);
    const ComplexVector got = dense_eigenvalues(to_dense(assemble_helmholtz_2d(g, k))).eigenvalues;
    const ComplexVector ss = sorted_by_abs(sums);
    const ComplexVector gs = sorted_by_abs(got);
    REQUIRE(ss.size() == gs.size());
    const double scale = std::abs(ss.back());
    for (std::size_t i = 0; i < ss.size(); ++i) CHECK(std::abs(ss[i] - gs[i]) < 1e-7 * scale);
}

TEST_CASE("2d poisson on a real uniform grid is symmetric positive definite", "[operators]") {
    EcsDomain d{1.0, 1.25, 0.0, 0.0, 8, 2};
    const ComplexSparseMatrix A = assemble_helmholtz_2d(build_ecs_grid(d), 0.0);
    const DenseMatrix D = to_dense(A);
    for (int i = 0; i < D.rows(); ++i)
        for (int j = 0; j < D.cols(); ++j) {
            CHECK(D(i, j).imag() == 0.0);
            CHECK(std::abs(D(i, j) - D(j, i)) < 1e-12 * std::abs(D(i, i)));
        }
    for (const Complex& t : dense_eigenvalues(D).eigenvalues) CHECK(t.real() > 0.0);
}

TEST_CASE("2d assembly rejects orders beyond the cap", "[operators]") {
    EcsDomain d{1.0, 1.25, pi / 6.0, 0.0, 64, 16};
    CHECK_THROWS_AS(assemble_helmholtz_2d(build_ecs_grid(d), 1.0, 1000), std::invalid_argument);
}

TEST_CASE("point source lands on the center index", "[operators]") {
    SECTION("on-grid center") {
        EcsDomain d{1.0, 1.25, pi / 6.0, 0.0, 64, 16};
        const ContourGrid g = build_ecs_grid(d);
        const ComplexVector b = point_source_rhs(g, 1);
        REQUIRE(b.size() == 79);
        for (int i = 0; i < 79; ++i) CHECK(b[i] == (i == 31 ? Complex(1.0) : Complex(0.0)));
    }
    SECTION("2d flat index") {
        EcsDomain d{1.0, 1.25, pi / 6.0, 0.0, 64, 16};
        const ContourGrid g = build_ecs_grid(d);
        const ComplexVector b = point_source_rhs(g, 2);
        const int N = 79;
        REQUIRE(b.size() == static_cast<std::size_t>(N) * N);
        const std::size_t want = static_cast<std::size_t>(31) * N + 31;
        for (std::size_t i = 0; i < b.size(); ++i)
            CHECK(b[i] == (i == want ? Complex(1.0) : Complex(0.0)));
    }
    SECTION("off-grid center ties break toward the lower index") {
        EcsDomain d{1.0, 1.25, pi / 6.0, 0.0, 5, 2};
        const ComplexVector b = point_source_rhs(build_ecs_grid(d), 1);
        // x_2 = 0.4 and x_3 = 0.6 are equidistant from 1/2
        for (std::size_t i = 0; i < b.size(); ++i)
            CHECK(b[i] == (i == 1 ? Complex(1.0) : Complex(0.0)));
    }
}

TEST_CASE("smallest laplacian eigenvalue converges at second order", "[operators][slow]") {
    const Complex Rz = 1.0 + 0.25 * std::polar(1.0, pi / 6.0);
    const Complex lam1 = (pi / Rz) * (pi / Rz);
    std::vector<double> errs;
    for (int n : {32, 64, 128, 256}) {
        EcsDomain d{1.0, 1.25, pi / 6.0, 0.0, n, n / 4};
        const EigenResult eig =
            dense_eigenvalues(to_dense(assemble_neg_laplacian_1d(build_ecs_grid(d))));
        double best = 1e300;
        for (const Complex& t : eig.eigenvalues) best = std::min(best, std::abs(t - lam1));
        errs.push_back(best);
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
        const double order = std::log2(errs[i] / errs[i + 1]);
        CHECK(order >= 1.9);
    }
}
