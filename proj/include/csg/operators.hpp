#pragma once

#include <cstddef>
#include <cstdint>

#include "csg/contour_grid.hpp"
#include "csg/types.hpp"

namespace csg {

/// Complex tridiagonal matrix stored as three diagonals.
class ComplexBandedMatrix {
public:
    ComplexBandedMatrix() = default;
    explicit ComplexBandedMatrix(int order)
        : order_(order),
          sub_(order > 0 ? order - 1 : 0, Complex(0.0)),
          diag_(order, Complex(0.0)),
          super_(order > 0 ? order - 1 : 0, Complex(0.0)) {}

    int order() const { return order_; }

    Complex& sub(int i) { return sub_[i]; }       ///< entry (i+1, i)
    Complex& diag(int i) { return diag_[i]; }     ///< entry (i, i)
    Complex& super(int i) { return super_[i]; }   ///< entry (i, i+1)
    Complex sub(int i) const { return sub_[i]; }
    Complex diag(int i) const { return diag_[i]; }
    Complex super(int i) const { return super_[i]; }

    ComplexVector apply(const ComplexVector& x) const {
        ComplexVector y(order_, Complex(0.0));
        for (int i = 0; i < order_; ++i) {
            Complex s = diag_[i] * x[i];
            if (i > 0) s += sub_[i - 1] * x[i - 1];
            if (i + 1 < order_) s += super_[i] * x[i + 1];
            y[i] = s;
        }
        return y;
    }

    /// Same matrix with `shift` added to every diagonal entry.
    ComplexBandedMatrix shifted(Complex shift) const {
        ComplexBandedMatrix out = *this;
        for (int i = 0; i < order_; ++i) out.diag_[i] += shift;
        return out;
    }

private:
    int order_ = 0;
    ComplexVector sub_, diag_, super_;
};

/// Complex sparse matrix in compressed-row storage with sorted column
/// indices per row.
class ComplexSparseMatrix {
public:
    ComplexSparseMatrix() = default;
    ComplexSparseMatrix(int order, std::vector<int> row_ptr, std::vector<int> cols, ComplexVector vals)
        : order_(order), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), vals_(std::move(vals)) {}

    int order() const { return order_; }
    std::size_t nnz() const { return vals_.size(); }
    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& cols() const { return cols_; }
    const ComplexVector& values() const { return vals_; }

    ComplexVector apply(const ComplexVector& x) const {
        ComplexVector y(order_, Complex(0.0));
        for (int i = 0; i < order_; ++i) {
            Complex s = 0.0;
            for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += vals_[p] * x[cols_[p]];
            y[i] = s;
        }
        return y;
    }

private:
    int order_ = 0;
    std::vector<int> row_ptr_{0};
    std::vector<int> cols_;
    ComplexVector vals_;
};

/// Discrete negative second derivative on a contour grid, Shortley-Weller
/// three-point stencil for non-uniform (complex) spacings. Rows run over the
/// interior unknowns 1 .. n+m-1; the Dirichlet end points are eliminated.
inline ComplexBandedMatrix assemble_neg_laplacian_1d(const ContourGrid& grid) {
    if (grid.num_points() < 3)
        throw std::invalid_argument("assemble_neg_laplacian_1d: grid needs at least 3 points");
    const int N = grid.num_unknowns();
    ComplexBandedMatrix A(N);
    for (int j = 1; j <= N; ++j) {
        const Complex hl = grid.spacings[j - 1];
        const Complex hr = grid.spacings[j];
        if (hl == Complex(0.0) || hr == Complex(0.0))
            throw std::invalid_argument("assemble_neg_laplacian_1d: degenerate grid spacing");
        const int i = j - 1;
        A.diag(i) = 2.0 / (hl * hr);
        if (i > 0) A.sub(i - 1) = -2.0 / (hl * (hl + hr));
        if (i + 1 < N) A.super(i) = -2.0 / (hr * (hl + hr));
    }
    return A;
}

/// 1D Helmholtz operator -L_h - k^2 I on a contour grid.
inline ComplexBandedMatrix assemble_helmholtz_1d(const ContourGrid& grid, double k) {
    if (k < 0.0) throw std::invalid_argument("assemble_helmholtz_1d: k must be >= 0");
    return assemble_neg_laplacian_1d(grid).shifted(-k * k);
}

/// 2D Helmholtz operator (-L) (x) I + I (x) (-L) - k^2 I from the Kronecker
/// sum of the 1D operator with itself; order is the square of the 1D order.
/// `max_order` guards against accidentally huge assemblies.
inline ComplexSparseMatrix assemble_helmholtz_2d(const ContourGrid& grid, double k,
                                                 std::int64_t max_order = 1 << 24) {
    if (k < 0.0) throw std::invalid_argument("assemble_helmholtz_2d: k must be >= 0");
    const ComplexBandedMatrix L = assemble_neg_laplacian_1d(grid);
    const int N1 = L.order();
    const std::int64_t N = static_cast<std::int64_t>(N1) * N1;
    if (N > max_order)
        throw std::invalid_argument("assemble_helmholtz_2d: order exceeds configured cap");

    std::vector<int> row_ptr;
    std::vector<int> cols;
    ComplexVector vals;
    row_ptr.reserve(N + 1);
    cols.reserve(5 * static_cast<std::size_t>(N));
    vals.reserve(5 * static_cast<std::size_t>(N));
    row_ptr.push_back(0);
    const Complex shift = -k * k;
    for (int a = 0; a < N1; ++a) {
        for (int b = 0; b < N1; ++b) {
            const int row = a * N1 + b;
            if (a > 0) { cols.push_back(row - N1); vals.push_back(L.sub(a - 1)); }
            if (b > 0) { cols.push_back(row - 1); vals.push_back(L.sub(b - 1)); }
            cols.push_back(row);
            vals.push_back(L.diag(a) + L.diag(b) + shift);
            if (b + 1 < N1) { cols.push_back(row + 1); vals.push_back(L.super(b)); }
            if (a + 1 < N1) { cols.push_back(row + N1); vals.push_back(L.super(a)); }
            row_ptr.push_back(static_cast<int>(cols.size()));
        }
    }
    return ComplexSparseMatrix(static_cast<int>(N), std::move(row_ptr), std::move(cols), std::move(vals));
}

namespace detail {

/// Interior unknown index (1-based grid index) nearest to parameter 1/2,
/// ties broken toward the lower index.
inline int center_index(const ContourGrid& grid) {
    int best = 1;
    double best_dist = std::abs(grid.parameter(1) - 0.5);
    for (int j = 2; j <= grid.num_unknowns(); ++j) {
        const double dist = std::abs(grid.parameter(j) - 0.5);
        if (dist < best_dist) {
            best = j;
            best_dist = dist;
        }
    }
    return best;
}

} // namespace detail

/// Unit point source at the grid index nearest x = 1/2 per dimension,
/// expressed in the interior unknown numbering.
inline ComplexVector point_source_rhs(const ContourGrid& grid, int dims = 1) {
    if (dims != 1 && dims != 2)
        throw std::invalid_argument("point_source_rhs: dims must be 1 or 2");
    const int N = grid.num_unknowns();
    const int c = detail::center_index(grid);
    if (dims == 1) {
        ComplexVector b(N, Complex(0.0));
        b[c - 1] = 1.0;
        return b;
    }
    ComplexVector b(static_cast<std::size_t>(N) * N, Complex(0.0));
    b[static_cast<std::size_t>(c - 1) * N + (c - 1)] = 1.0;
    return b;
}

} // namespace csg
