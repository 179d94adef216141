#pragma once

#include <optional>

#include "csg/contour_grid.hpp"
#include "csg/dense.hpp"
#include "csg/krylov.hpp"
#include "csg/operators.hpp"
#include "csg/types.hpp"

namespace csg {

/// Full-weighting restriction in one dimension. The fine vector holds the
/// interior unknowns of a grid whose interval counts are twice the coarse
/// ones, so its length is 2 Nc + 1; coarse point j coincides with fine
/// point 2j.
inline ComplexVector mg_restrict(const ComplexVector& fine) {
    const std::size_t nf = fine.size();
    if (nf < 3 || nf % 2 == 0)
        throw std::invalid_argument("mg_restrict: fine size must be odd and >= 3");
    const std::size_t nc = (nf - 1) / 2;
    ComplexVector coarse(nc);
    for (std::size_t j = 1; j <= nc; ++j)
        coarse[j - 1] = 0.25 * fine[2 * j - 2] + 0.5 * fine[2 * j - 1] + 0.25 * fine[2 * j];
    return coarse;
}

/// Piecewise-linear interpolation in grid index, the transpose of full
/// weighting up to the constant-preserving scaling. Dirichlet zeros sit
/// outside both ends.
inline ComplexVector mg_prolong(const ComplexVector& coarse) {
    const std::size_t nc = coarse.size();
    if (nc == 0) throw std::invalid_argument("mg_prolong: empty coarse vector");
    ComplexVector fine(2 * nc + 1, Complex(0.0));
    for (std::size_t j = 1; j <= nc; ++j) fine[2 * j - 1] = coarse[j - 1];
    for (std::size_t i = 0; i <= nc; ++i) {
        const Complex lo = i >= 1 ? coarse[i - 1] : Complex(0.0);
        const Complex hi = i < nc ? coarse[i] : Complex(0.0);
        fine[2 * i] = 0.5 * (lo + hi);
    }
    return fine;
}

/// Tensor-product restriction on an n1 x n1 fine lattice (row-major).
inline ComplexVector mg_restrict_2d(const ComplexVector& fine, int n1_fine) {
    const int n1c = (n1_fine - 1) / 2;
    if (static_cast<std::size_t>(n1_fine) * n1_fine != fine.size())
        throw std::invalid_argument("mg_restrict_2d: size mismatch");
    // restrict along the second index, then the first
    ComplexVector tmp(static_cast<std::size_t>(n1_fine) * n1c);
    for (int a = 0; a < n1_fine; ++a)
        for (int j = 1; j <= n1c; ++j)
            tmp[static_cast<std::size_t>(a) * n1c + (j - 1)] =
                0.25 * fine[static_cast<std::size_t>(a) * n1_fine + 2 * j - 2] +
                0.5 * fine[static_cast<std::size_t>(a) * n1_fine + 2 * j - 1] +
                0.25 * fine[static_cast<std::size_t>(a) * n1_fine + 2 * j];
    ComplexVector coarse(static_cast<std::size_t>(n1c) * n1c);
    for (int j = 1; j <= n1c; ++j)
        for (int b = 0; b < n1c; ++b)
            coarse[static_cast<std::size_t>(j - 1) * n1c + b] =
                0.25 * tmp[static_cast<std::size_t>(2 * j - 2) * n1c + b] +
                0.5 * tmp[static_cast<std::size_t>(2 * j - 1) * n1c + b] +
                0.25 * tmp[static_cast<std::size_t>(2 * j) * n1c + b];
    return coarse;
}

/// Tensor-product prolongation onto a (2 n1 + 1) x (2 n1 + 1) fine lattice.
inline ComplexVector mg_prolong_2d(const ComplexVector& coarse, int n1_coarse) {
    const int n1f = 2 * n1_coarse + 1;
    if (static_cast<std::size_t>(n1_coarse) * n1_coarse != coarse.size())
        throw std::invalid_argument("mg_prolong_2d: size mismatch");
    ComplexVector tmp(static_cast<std::size_t>(n1_coarse) * n1f, Complex(0.0));
    for (int a = 0; a < n1_coarse; ++a) {
        for (int j = 1; j <= n1_coarse; ++j)
            tmp[static_cast<std::size_t>(a) * n1f + 2 * j - 1] = coarse[static_cast<std::size_t>(a) * n1_coarse + j - 1];
        for (int i = 0; i <= n1_coarse; ++i) {
            const Complex lo = i >= 1 ? coarse[static_cast<std::size_t>(a) * n1_coarse + i - 1] : Complex(0.0);
            const Complex hi = i < n1_coarse ? coarse[static_cast<std::size_t>(a) * n1_coarse + i] : Complex(0.0);
            tmp[static_cast<std::size_t>(a) * n1f + 2 * i] = 0.5 * (lo + hi);
        }
    }
    ComplexVector fine(static_cast<std::size_t>(n1f) * n1f, Complex(0.0));
    for (int b = 0; b < n1f; ++b) {
        for (int j = 1; j <= n1_coarse; ++j)
            fine[static_cast<std::size_t>(2 * j - 1) * n1f + b] = tmp[static_cast<std::size_t>(j - 1) * n1f + b];
        for (int i = 0; i <= n1_coarse; ++i) {
            const Complex lo = i >= 1 ? tmp[static_cast<std::size_t>(i - 1) * n1f + b] : Complex(0.0);
            const Complex hi = i < n1_coarse ? tmp[static_cast<std::size_t>(i) * n1f + b] : Complex(0.0);
            fine[static_cast<std::size_t>(2 * i) * n1f + b] = 0.5 * (lo + hi);
        }
    }
    return fine;
}

/// Geometric hierarchy of rediscretized Helmholtz operators on one stretched
/// domain. Every coarser level halves both interval counts; the coarsest
/// operator is LU-factored for a direct solve.
class MgHierarchy {
public:
    struct Level {
        EcsDomain domain;
        ContourGrid grid;
        ComplexBandedMatrix op1d;
        ComplexSparseMatrix op2d; // populated for dims == 2

        int n1() const { return grid.num_unknowns(); }
    };

    MgHierarchy(const EcsDomain& domain, double k, int dims, int min_coarse_n = 4,
                int requested_levels = 0)
        : dims_(dims), k_(k) {
        if (dims != 1 && dims != 2)
            throw std::invalid_argument("MgHierarchy: dims must be 1 or 2");
        domain.validate();
        if (requested_levels == 1)
            throw std::invalid_argument("MgHierarchy: a hierarchy needs at least 2 levels");

        int n = domain.n, m = domain.m;
        while (true) {
            EcsDomain d = domain;
            d.n = n;
            d.m = m;
            Level lvl;
            lvl.domain = d;
            lvl.grid = build_csg_grid(d);
            lvl.op1d = assemble_helmholtz_1d(lvl.grid, k);
            if (dims == 2) lvl.op2d = assemble_helmholtz_2d(lvl.grid, k);
            levels_.push_back(std::move(lvl));
            if (requested_levels > 0 && static_cast<int>(levels_.size()) == requested_levels) break;
            const bool can_coarsen = n % 2 == 0 && m % 2 == 0 && n / 2 >= min_coarse_n && m / 2 >= 1;
            if (!can_coarsen) {
                if (requested_levels > 0)
                    throw std::invalid_argument("MgHierarchy: grid counts not divisible down to the requested level");
                break;
            }
            n /= 2;
            m /= 2;
        }
        if (levels_.size() < 2)
            throw std::invalid_argument("MgHierarchy: grid too coarse to build 2 levels");

        const Level& bottom = levels_.back();
        if (dims == 1)
            coarse_lu_.emplace(BandLU::factor(bottom.op1d));
        else
            coarse_lu_.emplace(BandLU::factor(bottom.op2d, bottom.n1(), bottom.n1()));
    }

    int num_levels() const { return static_cast<int>(levels_.size()); }
    int dims() const { return dims_; }
    double wave_number() const { return k_; }
    const Level& level(int l) const { return levels_[l]; }

    LinearOperator op(int l) const {
        const Level& lvl = levels_[l];
        if (dims_ == 1) return make_operator(lvl.op1d);
        return make_operator(lvl.op2d);
    }

    ComplexVector solve_coarsest(const ComplexVector& b) const { return coarse_lu_->solve(b); }

    /// One V(1,1)-cycle from `level` down: pre-smooth, restrict the residual,
    /// recurse (direct solve at the coarsest level), prolong-correct,
    /// post-smooth. Smoothing is GMRES on the residual equation from zero.
    ComplexVector v_cycle(int level, const ComplexVector& b, const ComplexVector& x0,
                          int smoother_steps = 3) const {
        if (level < 0 || level >= num_levels())
            throw std::invalid_argument("v_cycle: invalid level");
        if (level == num_levels() - 1) return solve_coarsest(b);

        const LinearOperator A = op(level);
        ComplexVector x = gmres_smoother_step(A, b, x0, smoother_steps);

        ComplexVector r = A.apply(x);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
        const int n1f = levels_[level].n1();
        ComplexVector rc = dims_ == 1 ? mg_restrict(r) : mg_restrict_2d(r, n1f);

        ComplexVector ec = v_cycle(level + 1, rc, ComplexVector(rc.size(), Complex(0.0)), smoother_steps);

        const int n1c = levels_[level + 1].n1();
        ComplexVector ef = dims_ == 1 ? mg_prolong(ec) : mg_prolong_2d(ec, n1c);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += ef[i];

        return gmres_smoother_step(A, b, x, smoother_steps);
    }

private:
    int dims_;
    double k_;
    std::vector<Level> levels_;
    std::optional<BandLU> coarse_lu_;
};

inline MgHierarchy build_hierarchy(const EcsDomain& domain, double k, int dims = 1,
                                   int min_coarse_n = 4, int requested_levels = 0) {
    return MgHierarchy(domain, k, dims, min_coarse_n, requested_levels);
}

} // namespace csg
