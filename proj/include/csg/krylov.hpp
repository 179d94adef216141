#pragma once

#include <functional>
#include <string>
#include <utility>

#include "csg/operators.hpp"
#include "csg/types.hpp"

namespace csg {

/// Abstract linear action y = A x on complex vectors of a fixed dimension.
struct LinearOperator {
    int dim = 0;
    std::function<ComplexVector(const ComplexVector&)> apply;
    std::string label;
};

inline LinearOperator make_operator(const ComplexBandedMatrix& A, std::string label = {}) {
    return {A.order(), [&A](const ComplexVector& x) { return A.apply(x); }, std::move(label)};
}

inline LinearOperator make_operator(const ComplexSparseMatrix& A, std::string label = {}) {
    return {A.order(), [&A](const ComplexVector& x) { return A.apply(x); }, std::move(label)};
}

/// Iteration history of one Krylov solve.
struct SolveLog {
    std::vector<double> residual_norms; ///< ||r_0||, then one estimate per iteration
    int iterations = 0;
    bool converged = false;
    double avg_rate = 1.0;        ///< geometric mean of successive residual ratios
    double final_residual = 0.0;  ///< true relative residual ||b - A x|| / ||b||
};

namespace detail {

struct ArnoldiOptions {
    int max_iter = 100;
    double rel_tol = 1e-6;   // rel_tol == 0 runs all iterations (smoother mode)
    bool reorthogonalize = false;
    bool flexible = false;
};

/// Shared GMRES/FGMRES kernel: modified Gram-Schmidt Arnoldi with Givens
/// least squares, full memory (no restart). The Hessenberg matrix is stored
/// column-wise; `precond` supplies Z_j for the flexible variant.
inline std::pair<ComplexVector, SolveLog> arnoldi_solve(
    const LinearOperator& A,
    const std::function<ComplexVector(const ComplexVector&)>& precond,
    const ComplexVector& b, const ComplexVector& x0, const ArnoldiOptions& opt) {
    const int n = A.dim;
    if (static_cast<int>(b.size()) != n || static_cast<int>(x0.size()) != n)
        throw std::invalid_argument("gmres: dimension mismatch");

    SolveLog log;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        log.converged = true;
        log.residual_norms = {0.0};
        return {ComplexVector(n, Complex(0.0)), log};
    }

    ComplexVector r = b;
    bool zero_guess = true;
    for (const Complex& z : x0)
        if (z != Complex(0.0)) { zero_guess = false; break; }
    if (!zero_guess) {
        const ComplexVector ax = A.apply(x0);
        for (int i = 0; i < n; ++i) r[i] -= ax[i];
    }
    const double beta = norm2(r);
    log.residual_norms.push_back(beta);
    if (beta == 0.0) {
        log.converged = true;
        log.final_residual = 0.0;
        return {x0, log};
    }

    std::vector<ComplexVector> V;   // Arnoldi basis
    std::vector<ComplexVector> Z;   // preconditioned basis (flexible only)
    std::vector<ComplexVector> H;   // Hessenberg columns, column j has j+2 entries
    ComplexVector g{beta};          // rotated residual vector
    ComplexVector cs, sn;           // Givens rotation pairs

    V.reserve(opt.max_iter + 1);
    {
        ComplexVector v0 = r;
        const double inv = 1.0 / beta;
        for (Complex& z : v0) z *= inv;
        V.push_back(std::move(v0));
    }

    bool breakdown = false;
    int iters = 0;
    for (int j = 0; j < opt.max_iter; ++j) {
        ComplexVector w;
        if (opt.flexible) {
            Z.push_back(precond(V[j]));
            w = A.apply(Z[j]);
        } else {
            w = A.apply(V[j]);
        }
        ComplexVector hcol(j + 2, Complex(0.0));
        for (int i = 0; i <= j; ++i) {
            const Complex hij = dot(V[i], w);
            hcol[i] = hij;
            axpy(-hij, V[i], w);
        }
        if (opt.reorthogonalize) {
            for (int i = 0; i <= j; ++i) {
                const Complex corr = dot(V[i], w);
                hcol[i] += corr;
                axpy(-corr, V[i], w);
            }
        }
        const double hnorm = norm2(w);
        hcol[j + 1] = hnorm;

        // rotate the new column into triangular form; the rotated diagonal
        // comes out real by construction
        for (int i = 0; i < j; ++i) {
            const Complex t = hcol[i];
            hcol[i] = std::conj(cs[i]) * t + std::conj(sn[i]) * hcol[i + 1];
            hcol[i + 1] = -sn[i] * t + cs[i] * hcol[i + 1];
        }
        const double d = std::hypot(std::abs(hcol[j]), hnorm);
        if (d == 0.0) {
            // numerically null direction: keep the least-squares system
            // nonsingular by discarding it
            breakdown = true;
            break;
        }
        ++iters;
        const Complex cj = hcol[j] / d;
        const Complex sj = hnorm / d;
        cs.push_back(cj);
        sn.push_back(sj);
        g.push_back(-sj * g[j]);
        g[j] = std::conj(cj) * g[j];
        hcol[j] = d;
        hcol[j + 1] = 0.0;
        H.push_back(std::move(hcol));

        const double resid_est = std::abs(g[j + 1]);
        log.residual_norms.push_back(resid_est);

        const bool happy = hnorm <= 1e-14 * log.residual_norms.front();
        if (resid_est / bnorm <= opt.rel_tol || (opt.rel_tol == 0.0 && resid_est == 0.0)) {
            break;
        }
        if (happy) {
            breakdown = true;
            break;
        }
        if (j + 1 < opt.max_iter) {
            ComplexVector vnext = w;
            const double inv = 1.0 / hnorm;
            for (Complex& z : vnext) z *= inv;
            V.push_back(std::move(vnext));
        }
    }

    // back substitution for the least-squares coefficients
    ComplexVector y(iters, Complex(0.0));
    for (int i = iters - 1; i >= 0; --i) {
        Complex s = g[i];
        for (int c = i + 1; c < iters; ++c) s -= H[c][i] * y[c];
        y[i] = s / H[i][i];
    }
    ComplexVector x = x0;
    const std::vector<ComplexVector>& basis = opt.flexible ? Z : V;
    for (int i = 0; i < iters; ++i) axpy(y[i], basis[i], x);

    log.iterations = iters;
    const ComplexVector ax = A.apply(x);
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += std::norm(b[i] - ax[i]);
    log.final_residual = std::sqrt(tr) / bnorm;

    const double est_rel = log.residual_norms.back() / bnorm;
    if (opt.rel_tol > 0.0) {
        // converged on the recurrence estimate, verified against the true
        // residual with one order of magnitude slack for round-off drift
        log.converged = est_rel <= opt.rel_tol && log.final_residual <= 10.0 * opt.rel_tol;
        if (breakdown && !log.converged)
            throw BreakdownError("gmres: Arnoldi breakdown with residual above tolerance");
    } else {
        log.converged = true;
    }
    if (iters > 0) {
        const double r0 = log.residual_norms.front();
        const double rm = log.residual_norms.back();
        log.avg_rate = rm > 0.0 && r0 > 0.0 ? std::pow(rm / r0, 1.0 / iters) : 0.0;
    }
    return {x, log};
}

} // namespace detail

/// Full-memory GMRES with modified Gram-Schmidt Arnoldi and Givens-rotation
/// least squares. Stops when the recurrence residual estimate satisfies
/// ||b - A x|| / ||b|| <= rel_tol or max_iter is reached; the returned log
/// carries one true-residual verification.
inline std::pair<ComplexVector, SolveLog> gmres(const LinearOperator& A, const ComplexVector& b,
                                                const ComplexVector& x0, int max_iter, double rel_tol,
                                                bool reorthogonalize = false) {
    if (!(rel_tol > 0.0)) throw std::invalid_argument("gmres: rel_tol must be positive");
    detail::ArnoldiOptions opt;
    opt.max_iter = max_iter;
    opt.rel_tol = rel_tol;
    opt.reorthogonalize = reorthogonalize;
    return detail::arnoldi_solve(A, {}, b, x0, opt);
}

/// Flexible GMRES: the preconditioner action may change between iterations;
/// the preconditioned basis Z is stored and convergence is measured on the
/// unpreconditioned residual.
inline std::pair<ComplexVector, SolveLog> fgmres(const LinearOperator& A,
                                                 const std::function<ComplexVector(const ComplexVector&)>& precond,
                                                 const ComplexVector& b, int max_iter, double rel_tol) {
    if (!(rel_tol > 0.0)) throw std::invalid_argument("fgmres: rel_tol must be positive");
    detail::ArnoldiOptions opt;
    opt.max_iter = max_iter;
    opt.rel_tol = rel_tol;
    opt.flexible = true;
    return detail::arnoldi_solve(A, precond, b, ComplexVector(A.dim, Complex(0.0)), opt);
}

/// Smoothing step: `steps` GMRES iterations on the residual equation
/// A e = b - A x starting from zero, with no tolerance-based early exit.
inline ComplexVector gmres_smoother_step(const LinearOperator& A, const ComplexVector& b,
                                         const ComplexVector& x, int steps = 3) {
    if (steps < 1) throw std::invalid_argument("gmres_smoother_step: steps must be >= 1");
    const ComplexVector ax = A.apply(x);
    ComplexVector r(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - ax[i];
    detail::ArnoldiOptions opt;
    opt.max_iter = steps;
    opt.rel_tol = 0.0;
    auto [e, log] = detail::arnoldi_solve(A, {}, r, ComplexVector(b.size(), Complex(0.0)), opt);
    ComplexVector out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += e[i];
    return out;
}

} // namespace csg
