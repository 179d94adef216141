#pragma once

#include <algorithm>
#include <optional>

#include "csg/contour_grid.hpp"
#include "csg/dense.hpp"
#include "csg/operators.hpp"
#include "csg/types.hpp"

namespace csg {

/// A problem domain (plain exterior scaling) paired with its stretched
/// preconditioner domain; both share r, R, theta_gamma and the grid counts.
struct DomainPair {
    EcsDomain ecs; ///< theta_beta == 0
    EcsDomain csg; ///< theta_beta > 0, everything else identical

    void validate() const {
        ecs.validate();
        csg.validate();
        if (ecs.theta_beta != 0.0)
            throw std::invalid_argument("DomainPair: ecs domain must have theta_beta = 0");
        if (ecs.r != csg.r || ecs.R != csg.R || ecs.theta_gamma != csg.theta_gamma ||
            ecs.n != csg.n || ecs.m != csg.m)
            throw std::invalid_argument("DomainPair: domains must share r, R, theta_gamma, n, m");
    }
};

enum class SpectrumSource {
    continuous,
    discrete,
    preconditioned_exact,
    preconditioned_naive,
    preconditioned_discrete,
};

inline const char* to_string(SpectrumSource s) {
    switch (s) {
        case SpectrumSource::continuous: return "continuous";
        case SpectrumSource::discrete: return "discrete";
        case SpectrumSource::preconditioned_exact: return "preconditioned-exact";
        case SpectrumSource::preconditioned_naive: return "preconditioned-naive";
        case SpectrumSource::preconditioned_discrete: return "preconditioned-discrete";
    }
    return "unknown";
}

/// Computed eigenvalues plus derived quantities.
struct SpectrumReport {
    ComplexVector eigenvalues;
    SpectrumSource source = SpectrumSource::discrete;
    std::optional<Complex> branch_point;
    std::optional<double> rho_b;
    std::optional<double> condition_number;
};

/// max |mu| / min |mu| over the given eigenvalues.
inline double condition_number(const ComplexVector& eigs) {
    if (eigs.empty()) throw std::invalid_argument("condition_number: empty spectrum");
    double lo = std::abs(eigs.front()), hi = lo;
    for (const Complex& z : eigs) {
        const double a = std::abs(z);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    if (lo == 0.0) throw std::invalid_argument("condition_number: zero eigenvalue");
    return hi / lo;
}

/// Bundles a spectrum with its condition number; preconditioned sources
/// with a zero eigenvalue keep the field empty rather than failing.
inline SpectrumReport make_spectrum_report(ComplexVector eigs, SpectrumSource source) {
    SpectrumReport rep;
    rep.source = source;
    rep.eigenvalues = std::move(eigs);
    if (!rep.eigenvalues.empty()) {
        bool has_zero = false;
        for (const Complex& z : rep.eigenvalues) has_zero = has_zero || z == Complex(0.0);
        if (!has_zero) rep.condition_number = condition_number(rep.eigenvalues);
    }
    return rep;
}

/// Dirichlet eigenvalues of the negative Laplacian on the stretched domain:
/// lambda_j = (j pi / Z)^2 with Z the complex end point. They depend on the
/// contour only through Z.
inline ComplexVector continuous_laplacian_eigs(const EcsDomain& domain, int count) {
    if (count < 1) throw std::invalid_argument("continuous_laplacian_eigs: count must be >= 1");
    domain.validate();
    const Complex z = domain.end_point();
    ComplexVector out;
    out.reserve(count);
    for (int j = 1; j <= count; ++j) {
        const Complex w = static_cast<double>(j) * pi / z;
        out.push_back(w * w);
    }
    return out;
}

/// Helmholtz spectrum: the Laplacian eigenvalues shifted by -k^2.
inline ComplexVector continuous_helmholtz_eigs(const EcsDomain& domain, double k, int count) {
    ComplexVector out = continuous_laplacian_eigs(domain, count);
    const double shift = k * k;
    for (Complex& z : out) z -= shift;
    return out;
}

/// Closed-form eigenvalues of the continuous preconditioned operator:
/// mu_j = (s_j^2 - 1) / (s_j^2 / beta^2 - 1), s_j = (j pi / k - gamma (R - r)) / r.
inline ComplexVector precond_eigs_exact(const DomainPair& pair, double k, int count) {
    pair.validate();
    if (!(k > 0.0)) throw std::invalid_argument("precond_eigs_exact: k must be positive");
    if (count < 1) throw std::invalid_argument("precond_eigs_exact: count must be >= 1");
    const Complex gamma = pair.ecs.gamma();
    const Complex beta2 = pair.csg.beta() * pair.csg.beta();
    const double r = pair.ecs.r, R = pair.ecs.R;
    ComplexVector out;
    out.reserve(count);
    for (int j = 1; j <= count; ++j) {
        const Complex s = (static_cast<double>(j) * pi / k - gamma * (R - r)) / r;
        const Complex s2 = s * s;
        out.push_back((s2 - 1.0) / (s2 / beta2 - 1.0));
    }
    return out;
}

/// Eigenvalue approximation obtained by pairing modes of the two domains
/// index by index; a linear fractional transformation of j^2 pi^2 / k^2.
/// Kept for comparison plots: the pairing assumption does not hold.
inline ComplexVector precond_eigs_naive(const DomainPair& pair, double k, int count) {
    pair.validate();
    if (!(k > 0.0)) throw std::invalid_argument("precond_eigs_naive: k must be positive");
    if (count < 1) throw std::invalid_argument("precond_eigs_naive: count must be >= 1");
    const Complex Rz2 = pair.ecs.end_point() * pair.ecs.end_point();
    const Complex Tz2 = pair.csg.end_point() * pair.csg.end_point();
    ComplexVector out;
    out.reserve(count);
    for (int j = 1; j <= count; ++j) {
        const double w = (static_cast<double>(j) * pi / k) * (static_cast<double>(j) * pi / k);
        out.push_back((Tz2 / Rz2) * (w - Rz2) / (w - Tz2));
    }
    return out;
}

/// Radius of the circle traced by the naive index-paired eigenvalues;
/// independent of the wave number. This is the image of the real line
/// under w -> (T/Z^2)(w - Z^2)/(w - T) with Z, T the squared end points,
/// whose radius is |T/Z^2| |T - Z^2| / (2 |Im T|).
inline double naive_circle_radius(const DomainPair& pair) {
    const Complex Z2 = pair.ecs.end_point() * pair.ecs.end_point();
    const Complex T2 = pair.csg.end_point() * pair.csg.end_point();
    return std::abs(T2 / Z2) * std::abs(T2 - Z2) / (2.0 * std::abs(T2.imag()));
}

/// One point of the wave-number-independent curve carrying the exact
/// preconditioned eigenvalues; t ranges over [-Re(eta), infinity) with
/// eta = gamma (R/r - 1). The raw overload works on the bare scaling
/// factors, e.g. for the real-gamma circle case.
inline Complex curve_point(Complex beta, Complex eta, double t) {
    const Complex s(t, -eta.imag());
    const Complex s2 = s * s;
    const Complex beta2 = beta * beta;
    return (s2 - 1.0) / (s2 / beta2 - 1.0);
}

inline Complex curve_point(const DomainPair& pair, double t) {
    const Complex eta = pair.ecs.gamma() * (pair.ecs.R / pair.ecs.r - 1.0);
    return curve_point(pair.csg.beta(), eta, t);
}

inline ComplexVector parametric_curve(const DomainPair& pair, const std::vector<double>& t_samples) {
    pair.validate();
    ComplexVector out;
    out.reserve(t_samples.size());
    for (double t : t_samples) out.push_back(curve_point(pair, t));
    return out;
}

/// Curve parameter of the exact eigenvalue mu_j: t_j = j pi / (k r) - Re(eta).
inline double curve_parameter(const DomainPair& pair, int j, double k) {
    const Complex eta = pair.ecs.gamma() * (pair.ecs.R / pair.ecs.r - 1.0);
    return static_cast<double>(j) * pi / (k * pair.ecs.r) - eta.real();
}

/// Root condition for the eigenvalues of the discrete negative Laplacian on
/// a two-segment grid: F(t) = tan(2n p)/tan(2m q) + cos(p)/cos(q) with
/// p = arccos(1 - t h^2 / 2) / 2, q = arccos(1 - t (gamma_ratio h)^2 / 2) / 2,
/// gamma_ratio the exterior-to-interior grid distance ratio. Near poles of
/// the quotient form the equivalent product form
/// sin(2np) cos(2mq) cos(q) + cos(p) cos(2np) sin(2mq) is returned instead.
/// t = 0 lies outside the domain of the condition; NaN is returned.
inline Complex discrete_eig_condition(Complex t, Complex h, Complex gamma_ratio, int n, int m) {
    if (t == Complex(0.0))
        return Complex(std::numeric_limits<double>::quiet_NaN(),
                       std::numeric_limits<double>::quiet_NaN());
    const Complex h2 = h * h;
    const Complex g2 = gamma_ratio * gamma_ratio;
    const Complex p = 0.5 * std::acos(Complex(1.0) - 0.5 * t * h2);
    const Complex q = 0.5 * std::acos(Complex(1.0) - 0.5 * t * g2 * h2);
    const Complex cos_2np = std::cos(2.0 * static_cast<double>(n) * p);
    const Complex sin_2np = std::sin(2.0 * static_cast<double>(n) * p);
    const Complex cos_2mq = std::cos(2.0 * static_cast<double>(m) * q);
    const Complex sin_2mq = std::sin(2.0 * static_cast<double>(m) * q);
    const Complex cos_p = std::cos(p);
    const Complex cos_q = std::cos(q);
    constexpr double pole_tol = 1e-8;
    if (std::abs(cos_2np) < pole_tol || std::abs(sin_2mq) < pole_tol || std::abs(cos_q) < pole_tol)
        return sin_2np * cos_2mq * cos_q + cos_p * cos_2np * sin_2mq;
    return (sin_2np * cos_2mq) / (cos_2np * sin_2mq) + cos_p / cos_q;
}

/// Principal-branch Lambert W for nonnegative arguments, Halley iteration
/// from log(1 + c); satisfies W e^W = c to full precision.
inline double lambert_w(double c) {
    if (c < 0.0) throw std::invalid_argument("lambert_w: argument must be >= 0");
    if (c == 0.0) return 0.0;
    double w = std::log1p(c);
    for (int it = 0; it < 50; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - c;
        if (f == 0.0) break;
        const double wp1 = w + 1.0;
        const double dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= dw;
        if (std::abs(dw) <= 1e-16 * std::max(1.0, std::abs(w))) break;
    }
    return w;
}

/// Predicted split point of the discrete absorbing-layer spectrum.
struct BranchPoint {
    bool exists = false; ///< false when the contour is real (no split)
    double rho_b = 0.0;
    Complex t_b;
};

/// Lambert-W estimate of the point where the line of smooth eigenvalues
/// splits into two branches. Uses the exterior-scaled end point
/// Z = r + (R - r) e^{i theta_gamma}; grows like W(n)^2 with the interior
/// grid count.
inline BranchPoint predict_branch_point(const EcsDomain& domain) {
    domain.validate();
    const double r = domain.r, R = domain.R;
    const Complex Rz = r + (R - r) * domain.gamma();
    if (Rz.imag() == 0.0) return {};
    const double c = 4.0 * domain.n * Rz.imag() *
                     std::abs(std::sqrt(Complex(R - r) / (Rz - R)) / Rz);
    const double w = lambert_w(c);
    const double rho_b = std::norm(Rz) / (r * Rz.imag()) * w;
    const Complex ratio = rho_b / Rz;
    return {true, rho_b, ratio * ratio};
}

/// Experimental split detection: eigenvalues are sorted by magnitude and
/// compared against the ray t(rho) = (rho / Z)^2; the first one whose
/// relative distance to the ray exceeds `delta` is returned, provided at
/// least `confirm` exceedances occur within the next `window` eigenvalues
/// (an isolated spurious outlier does not count as a split).
inline std::optional<Complex> detect_branch_point(const ComplexVector& eigs, const EcsDomain& domain,
                                                  double delta = 0.10, int confirm = 2, int window = 6) {
    if (eigs.size() < 3) return std::nullopt;
    domain.validate();
    const Complex Rz = domain.r + (domain.R - domain.r) * domain.gamma();
    Complex u = 1.0 / (Rz * Rz);
    u /= std::abs(u);

    ComplexVector ev = eigs;
    std::sort(ev.begin(), ev.end(),
              [](const Complex& a, const Complex& b) { return std::abs(a) < std::abs(b); });
    std::vector<double> rel(ev.size());
    for (std::size_t i = 0; i < ev.size(); ++i) {
        const double a = std::abs(ev[i]);
        if (a == 0.0) {
            rel[i] = 0.0;
            continue;
        }
        const double proj = std::max(0.0, (ev[i] * std::conj(u)).real());
        rel[i] = std::abs(ev[i] - proj * u) / a;
    }
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (rel[i] <= delta) continue;
        int hits = 1;
        for (std::size_t j = i + 1; j < ev.size() && j < i + static_cast<std::size_t>(window); ++j)
            if (rel[j] > delta) ++hits;
        if (hits >= confirm) return ev[i];
    }
    return std::nullopt;
}

/// Spectrum of M^{-1} H formed explicitly and passed to the dense
/// eigensolver; the experimental counterpart of precond_eigs_exact.
inline ComplexVector precond_eigs_discrete(const DomainPair& pair, double k, int order_cap = 4096,
                                           int dims = 1) {
    pair.validate();
    if (dims != 1 && dims != 2)
        throw std::invalid_argument("precond_eigs_discrete: dims must be 1 or 2");
    const ContourGrid gq = build_ecs_grid(pair.ecs);
    const ContourGrid gp = build_csg_grid(pair.csg);
    const int N1 = gq.num_unknowns();

    if (dims == 1) {
        const ComplexBandedMatrix H = assemble_helmholtz_1d(gq, k);
        const ComplexBandedMatrix M = assemble_helmholtz_1d(gp, k);
        if (N1 > order_cap) throw std::invalid_argument("precond_eigs_discrete: order exceeds cap");
        const BandLU lu = BandLU::factor(M);
        DenseMatrix X(N1, N1);
        ComplexVector col(N1, Complex(0.0));
        for (int j = 0; j < N1; ++j) {
            std::fill(col.begin(), col.end(), Complex(0.0));
            col[j] = H.diag(j);
            if (j > 0) col[j - 1] = H.super(j - 1);
            if (j + 1 < N1) col[j + 1] = H.sub(j);
            const ComplexVector x = lu.solve(col);
            for (int i = 0; i < N1; ++i) X(i, j) = x[i];
        }
        return dense_eigenvalues(std::move(X), order_cap).eigenvalues;
    }

    const ComplexSparseMatrix H = assemble_helmholtz_2d(gq, k);
    const ComplexSparseMatrix M = assemble_helmholtz_2d(gp, k);
    const int N = H.order();
    if (N > order_cap) throw std::invalid_argument("precond_eigs_discrete: order exceeds cap");
    const BandLU lu = BandLU::factor(M, N1, N1);
    const auto entry = [&H](int i, int j) -> Complex {
        for (int p = H.row_ptr()[i]; p < H.row_ptr()[i + 1]; ++p)
            if (H.cols()[p] == j) return H.values()[p];
        return Complex(0.0);
    };
    DenseMatrix X(N, N);
    ComplexVector col(N, Complex(0.0));
    for (int j = 0; j < N; ++j) {
        std::fill(col.begin(), col.end(), Complex(0.0));
        // the Kronecker-sum pattern is structurally symmetric
        for (int i : {j - N1, j - 1, j, j + 1, j + N1})
            if (i >= 0 && i < N) col[i] = entry(i, j);
        const ComplexVector x = lu.solve(col);
        for (int i = 0; i < N; ++i) X(i, j) = x[i];
    }
    return dense_eigenvalues(std::move(X), order_cap).eigenvalues;
}

} // namespace csg
