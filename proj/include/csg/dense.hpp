#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <utility>

#include "csg/operators.hpp"
#include "csg/types.hpp"

namespace csg {

/// Dense complex matrix, row-major.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, Complex(0.0)) {}
    static DenseMatrix identity(int n) {
        DenseMatrix I(n, n);
        for (int i = 0; i < n; ++i) I(i, i) = 1.0;
        return I;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    Complex& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    Complex operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    Complex* row(int i) { return data_.data() + static_cast<std::size_t>(i) * cols_; }
    const Complex* row(int i) const { return data_.data() + static_cast<std::size_t>(i) * cols_; }

    ComplexVector apply(const ComplexVector& x) const {
        ComplexVector y(rows_, Complex(0.0));
        for (int i = 0; i < rows_; ++i) {
            const Complex* r = row(i);
            Complex s = 0.0;
            for (int j = 0; j < cols_; ++j) s += r[j] * x[j];
            y[i] = s;
        }
        return y;
    }

    Complex trace() const {
        Complex t = 0.0;
        for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

private:
    int rows_ = 0, cols_ = 0;
    ComplexVector data_;
};

inline DenseMatrix to_dense(const ComplexBandedMatrix& A) {
    DenseMatrix D(A.order(), A.order());
    for (int i = 0; i < A.order(); ++i) {
        D(i, i) = A.diag(i);
        if (i > 0) D(i, i - 1) = A.sub(i - 1);
        if (i + 1 < A.order()) D(i, i + 1) = A.super(i);
    }
    return D;
}

inline DenseMatrix to_dense(const ComplexSparseMatrix& A) {
    DenseMatrix D(A.order(), A.order());
    for (int i = 0; i < A.order(); ++i)
        for (int p = A.row_ptr()[i]; p < A.row_ptr()[i + 1]; ++p)
            D(i, A.cols()[p]) = A.values()[p];
    return D;
}

/// LU factorization of a complex band matrix with partial pivoting.
/// Storage follows the usual band scheme with kl extra rows for pivoting
/// fill, so a tridiagonal factor acquires up to two super-diagonals.
class BandLU {
public:
    BandLU(int n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
          ab_(static_cast<std::size_t>(ldab_) * n, Complex(0.0)), piv_(n, 0) {}

    static BandLU factor(const ComplexBandedMatrix& A) {
        BandLU lu(A.order(), 1, 1);
        for (int i = 0; i < A.order(); ++i) {
            lu.at(i, i) = A.diag(i);
            if (i > 0) lu.at(i, i - 1) = A.sub(i - 1);
            if (i + 1 < A.order()) lu.at(i, i + 1) = A.super(i);
        }
        lu.factorize();
        return lu;
    }

    static BandLU factor(const ComplexSparseMatrix& A, int kl, int ku) {
        BandLU lu(A.order(), kl, ku);
        for (int i = 0; i < A.order(); ++i)
            for (int p = A.row_ptr()[i]; p < A.row_ptr()[i + 1]; ++p) {
                const int j = A.cols()[p];
                if (j - i > ku || i - j > kl)
                    throw std::invalid_argument("BandLU: entry outside declared bandwidth");
                lu.at(i, j) = A.values()[p];
            }
        lu.factorize();
        return lu;
    }

    ComplexVector solve(const ComplexVector& b) const {
        if (static_cast<int>(b.size()) != n_)
            throw std::invalid_argument("BandLU::solve: size mismatch");
        ComplexVector x = b;
        const int kw = kl_ + ku_; // upper bandwidth of U after fill
        for (int j = 0; j < n_; ++j) {
            if (piv_[j] != j) std::swap(x[j], x[piv_[j]]);
            const int iend = std::min(j + kl_, n_ - 1);
            for (int i = j + 1; i <= iend; ++i) x[i] -= at(i, j) * x[j];
        }
        for (int j = n_ - 1; j >= 0; --j) {
            x[j] /= at(j, j);
            const int istart = std::max(0, j - kw);
            for (int i = istart; i < j; ++i) x[i] -= at(i, j) * x[j];
        }
        return x;
    }

    int order() const { return n_; }

private:
    Complex& at(int i, int j) { return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)]; }
    Complex at(int i, int j) const { return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)]; }

    void factorize() {
        const int kw = kl_ + ku_;
        for (int j = 0; j < n_; ++j) {
            const int iend = std::min(j + kl_, n_ - 1);
            int ip = j;
            double pmax = std::abs(at(j, j));
            for (int i = j + 1; i <= iend; ++i) {
                const double v = std::abs(at(i, j));
                if (v > pmax) { pmax = v; ip = i; }
            }
            piv_[j] = ip;
            if (pmax == 0.0)
                throw SingularMatrixError("BandLU: exactly singular pivot at column " + std::to_string(j));
            const int cend = std::min(j + kw, n_ - 1);
            if (ip != j)
                for (int c = j; c <= cend; ++c) std::swap(at(j, c), at(ip, c));
            const Complex inv_piv = 1.0 / at(j, j);
            for (int i = j + 1; i <= iend; ++i) at(i, j) *= inv_piv;
            for (int c = j + 1; c <= cend; ++c) {
                const Complex ujc = at(j, c);
                if (ujc == Complex(0.0)) continue;
                for (int i = j + 1; i <= iend; ++i) at(i, c) -= at(i, j) * ujc;
            }
        }
    }

    int n_, kl_, ku_, ldab_;
    ComplexVector ab_;
    std::vector<int> piv_;
};

/// Direct solve with a tridiagonal matrix (partial pivoting).
inline ComplexVector banded_lu_solve(const ComplexBandedMatrix& A, const ComplexVector& b) {
    if (A.order() != static_cast<int>(b.size()))
        throw std::invalid_argument("banded_lu_solve: size mismatch");
    return BandLU::factor(A).solve(b);
}

/// Direct solve with a dense matrix (partial pivoting, works on a copy).
inline ComplexVector dense_lu_solve(const DenseMatrix& A, const ComplexVector& b) {
    const int n = A.rows();
    if (A.cols() != n || static_cast<int>(b.size()) != n)
        throw std::invalid_argument("dense_lu_solve: size mismatch");
    DenseMatrix lu = A;
    ComplexVector x = b;
    std::vector<int> piv(n);
    for (int j = 0; j < n; ++j) {
        int ip = j;
        double pmax = std::abs(lu(j, j));
        for (int i = j + 1; i < n; ++i) {
            const double v = std::abs(lu(i, j));
            if (v > pmax) { pmax = v; ip = i; }
        }
        piv[j] = ip;
        if (pmax == 0.0)
            throw SingularMatrixError("dense_lu_solve: exactly singular pivot at column " + std::to_string(j));
        if (ip != j)
            for (int c = 0; c < n; ++c) std::swap(lu(j, c), lu(ip, c));
        const Complex inv_piv = 1.0 / lu(j, j);
        for (int i = j + 1; i < n; ++i) {
            lu(i, j) *= inv_piv;
            const Complex lij = lu(i, j);
            const Complex* rj = lu.row(j);
            Complex* ri = lu.row(i);
            for (int c = j + 1; c < n; ++c) ri[c] -= lij * rj[c];
        }
    }
    // rows were exchanged in full during factorization, so the whole
    // permutation applies before the triangular solves
    for (int j = 0; j < n; ++j)
        if (piv[j] != j) std::swap(x[j], x[piv[j]]);
    for (int j = 0; j < n; ++j)
        for (int i = j + 1; i < n; ++i) x[i] -= lu(i, j) * x[j];
    for (int j = n - 1; j >= 0; --j) {
        x[j] /= lu(j, j);
        for (int i = 0; i < j; ++i) x[i] -= lu(i, j) * x[j];
    }
    return x;
}

/// Eigenvalues plus a per-value convergence flag from the QR iteration.
struct EigenResult {
    ComplexVector eigenvalues;
    std::vector<bool> converged;

    bool all_converged() const {
        for (bool c : converged)
            if (!c) return false;
        return true;
    }
};

namespace detail {

/// Complex Givens rotation: returns (c, s) with c real such that
/// [c, s; -conj(s), c] * [f; g] = [r; 0].
struct Givens {
    double c;
    Complex s;
};

inline Givens make_givens(Complex f, Complex g) {
    const double af = std::abs(f), ag = std::abs(g);
    const double d = std::hypot(af, ag);
    if (d == 0.0 || ag == 0.0) return {1.0, Complex(0.0)};
    if (af == 0.0) return {0.0, std::conj(g) / ag};
    const Complex phase = f / af;
    return {af / d, phase * std::conj(g) / d};
}

/// In-place diagonal similarity scaling by powers of two (norm balancing).
inline void balance(DenseMatrix& A) {
    const int n = A.rows();
    constexpr double radix = 2.0, radix2 = 4.0;
    bool done = false;
    while (!done) {
        done = true;
        for (int i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(A(j, i));
                r += std::abs(A(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double f = 1.0;
            const double s = c + r;
            double g = r / radix;
            while (c < g) { f *= radix; c *= radix2; }
            g = r * radix;
            while (c > g) { f /= radix; c /= radix2; }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                const double ginv = 1.0 / f;
                for (int j = 0; j < n; ++j) A(i, j) *= ginv;
                for (int j = 0; j < n; ++j) A(j, i) *= f;
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form, in place; the reflector
/// data below the subdiagonal is zeroed (eigenvalues only, no Q).
inline void hessenberg(DenseMatrix& A) {
    const int n = A.rows();
    ComplexVector v(n), w(n);
    for (int k = 0; k + 2 < n; ++k) {
        // reflector for the column below the subdiagonal
        const Complex alpha = A(k + 1, k);
        double tail = 0.0;
        for (int i = k + 2; i < n; ++i) tail += std::norm(A(i, k));
        if (tail == 0.0) continue;
        const double xnorm = std::sqrt(std::norm(alpha) + tail);
        const Complex phase = std::abs(alpha) == 0.0 ? Complex(1.0) : alpha / std::abs(alpha);
        const Complex beta = -phase * xnorm;
        const Complex tau = (beta - alpha) / beta;
        const Complex scale = 1.0 / (alpha - beta);
        const int len = n - k - 1; // reflector length
        v[0] = 1.0;
        for (int i = 1; i < len; ++i) v[i] = A(k + 1 + i, k) * scale;
        A(k + 1, k) = beta;
        for (int i = k + 2; i < n; ++i) A(i, k) = 0.0;

        // left update: rows k+1..n-1, columns k+1..n-1
        std::fill(w.begin(), w.begin() + (n - k - 1), Complex(0.0));
        for (int i = 0; i < len; ++i) {
            const Complex cvi = std::conj(v[i]);
            const Complex* arow = A.row(k + 1 + i);
            for (int cc = k + 1; cc < n; ++cc) w[cc - k - 1] += cvi * arow[cc];
        }
        const Complex ctau = std::conj(tau);
        for (int i = 0; i < len; ++i) {
            const Complex f = ctau * v[i];
            Complex* arow = A.row(k + 1 + i);
            for (int cc = k + 1; cc < n; ++cc) arow[cc] -= f * w[cc - k - 1];
        }

        // right update: all rows, columns k+1..n-1
        for (int rr = 0; rr < n; ++rr) {
            Complex* arow = A.row(rr);
            Complex s = 0.0;
            for (int i = 0; i < len; ++i) s += arow[k + 1 + i] * v[i];
            s *= tau;
            for (int i = 0; i < len; ++i) arow[k + 1 + i] -= s * std::conj(v[i]);
        }
    }
}

inline Complex wilkinson_shift(Complex a, Complex b, Complex c, Complex d) {
    // eigenvalue of [[a, b], [c, d]] nearest d
    const Complex tr = a + d;
    const Complex disc = std::sqrt(tr * tr - 4.0 * (a * d - b * c));
    const Complex l1 = 0.5 * (tr + disc);
    const Complex l2 = 0.5 * (tr - disc);
    return std::abs(l1 - d) < std::abs(l2 - d) ? l1 : l2;
}

} // namespace detail

/// All eigenvalues of a general complex matrix: balancing, Householder
/// Hessenberg reduction, then shifted QR iteration with deflation (single
/// complex Wilkinson shift). Values that fail to settle within the
/// iteration cap are flagged unconverged.
inline EigenResult dense_eigenvalues(DenseMatrix A, int order_cap = 4096) {
    const int n = A.rows();
    if (A.cols() != n) throw std::invalid_argument("dense_eigenvalues: matrix must be square");
    if (n > order_cap) throw std::invalid_argument("dense_eigenvalues: order exceeds cap");
    EigenResult result;
    result.eigenvalues.assign(n, Complex(0.0));
    result.converged.assign(n, true);
    if (n == 0) return result;
    if (n == 1) {
        result.eigenvalues[0] = A(0, 0);
        return result;
    }

    detail::balance(A);
    detail::hessenberg(A);

    constexpr double eps = std::numeric_limits<double>::epsilon();
    double fnorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - 1); j < n; ++j) fnorm += std::norm(A(i, j));
    fnorm = std::sqrt(fnorm);
    const double floor_tol = eps * std::max(fnorm, std::numeric_limits<double>::min());

    std::vector<detail::Givens> rot(n);
    int hi = n - 1;
    long total = 0;
    const long cap = 30L * n;
    int since_deflation = 0;
    while (hi >= 0) {
        // split off converged eigenvalues at the bottom
        int lo = hi;
        while (lo > 0) {
            const double sub = std::abs(A(lo, lo - 1));
            if (sub <= std::max(eps * (std::abs(A(lo - 1, lo - 1)) + std::abs(A(lo, lo))), floor_tol)) {
                A(lo, lo - 1) = 0.0;
                break;
            }
            --lo;
        }
        if (lo == hi) {
            result.eigenvalues[hi] = A(hi, hi);
            --hi;
            since_deflation = 0;
            continue;
        }
        if (total >= cap) {
            for (int i = 0; i <= hi; ++i) {
                result.eigenvalues[i] = A(i, i);
                result.converged[i] = false;
            }
            break;
        }

        Complex sigma;
        if (since_deflation > 0 && since_deflation % 10 == 0) {
            // exceptional shift to break rare stagnation cycles
            sigma = A(hi, hi) + Complex(std::abs(A(hi, hi - 1)) + (hi - 1 > lo ? std::abs(A(hi - 1, hi - 2)) : 0.0));
        } else {
            sigma = detail::wilkinson_shift(A(hi - 1, hi - 1), A(hi - 1, hi), A(hi, hi - 1), A(hi, hi));
        }

        // explicit single-shift QR sweep on the active block [lo, hi]
        for (int i = lo; i <= hi; ++i) A(i, i) -= sigma;
        for (int i = lo; i < hi; ++i) {
            rot[i] = detail::make_givens(A(i, i), A(i + 1, i));
            const double c = rot[i].c;
            const Complex s = rot[i].s;
            Complex* r0 = A.row(i);
            Complex* r1 = A.row(i + 1);
            for (int cc = i; cc <= hi; ++cc) {
                const Complex a0 = r0[cc], a1 = r1[cc];
                r0[cc] = c * a0 + s * a1;
                r1[cc] = -std::conj(s) * a0 + c * a1;
            }
        }
        for (int i = lo; i < hi; ++i) {
            const double c = rot[i].c;
            const Complex s = rot[i].s;
            const int rend = std::min(i + 1, hi);
            for (int rr = lo; rr <= rend; ++rr) {
                Complex* arow = A.row(rr);
                const Complex a0 = arow[i], a1 = arow[i + 1];
                arow[i] = c * a0 + std::conj(s) * a1;
                arow[i + 1] = -s * a0 + c * a1;
            }
        }
        for (int i = lo; i <= hi; ++i) A(i, i) += sigma;
        ++total;
        ++since_deflation;
    }
    return result;
}

} // namespace csg
