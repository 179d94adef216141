#pragma once

#include <complex>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace csg {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

constexpr double pi = 3.141592653589793238462643383279502884;

/// Thrown when a factorization meets an exactly singular pivot.
class SingularMatrixError : public std::runtime_error {
public:
    explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when an iterative method breaks down without converging.
class BreakdownError : public std::runtime_error {
public:
    explicit BreakdownError(const std::string& what) : std::runtime_error(what) {}
};

inline double norm2(const ComplexVector& v) {
    double s = 0.0;
    for (const Complex& z : v) s += std::norm(z);
    return std::sqrt(s);
}

/// Inner product, conjugate-linear in the first argument.
inline Complex dot(const ComplexVector& a, const ComplexVector& b) {
    Complex s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

inline void axpy(Complex alpha, const ComplexVector& x, ComplexVector& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

} // namespace csg
