#pragma once

#include <cstddef>

#include "csg/types.hpp"

namespace csg {

/// Geometric description of a complex-stretched 1D domain: a real interior
/// region [0, r] rotated by theta_beta (zero for a plain absorbing-layer
/// domain) followed by an exterior layer of length R - r rotated by
/// theta_gamma. The interior carries n grid intervals, the exterior m.
struct EcsDomain {
    double r = 1.0;           ///< length of the interior region
    double R = 1.25;          ///< total extent, R > r
    double theta_gamma = 0.0; ///< exterior scaling angle (radians)
    double theta_beta = 0.0;  ///< interior scaling angle (radians)
    int n = 2;                ///< interior interval count
    int m = 1;                ///< exterior interval count

    // Unit scaling factors are derived from the angles on demand so the
    // angle and its complex representation cannot drift apart.
    Complex gamma() const { return std::polar(1.0, theta_gamma); }
    Complex beta() const { return std::polar(1.0, theta_beta); }

    /// Complex end point of the stretched domain: r e^{i theta_beta} + (R - r) e^{i theta_gamma}.
    Complex end_point() const {
        return r * beta() + (R - r) * gamma();
    }

    void validate() const {
        if (!(r > 0.0) || !(R > r))
            throw std::invalid_argument("EcsDomain: need 0 < r < R");
        if (!(theta_beta >= 0.0) || !(theta_beta <= theta_gamma) || !(theta_gamma < pi / 4.0))
            throw std::invalid_argument("EcsDomain: need 0 <= theta_beta <= theta_gamma < pi/4");
        if (n < 2 || m < 1)
            throw std::invalid_argument("EcsDomain: need n >= 2 and m >= 1");
    }
};

/// Realized grid on a stretched domain: n + m + 1 complex points starting at
/// z_0 = 0 and ending at end_point(), with constant spacing per segment.
struct ContourGrid {
    ComplexVector points;    ///< z_0 .. z_{n+m}
    ComplexVector spacings;  ///< n + m interval lengths, constant per segment
    double h = 0.0;          ///< real interior grid distance r / n
    Complex h_gamma;         ///< exterior grid distance (R - r) e^{i theta_gamma} / m
    Complex end;             ///< end point z_{n+m}
    int n = 0;
    int m = 0;

    int num_points() const { return n + m + 1; }
    /// Interior unknowns once the two Dirichlet end points are eliminated.
    int num_unknowns() const { return n + m - 1; }
    /// Complex interior spacing h e^{i theta_beta}.
    Complex interior_spacing() const { return spacings.front(); }
    /// Real coordinate parameter of grid point j (arc length before stretching).
    double parameter(int j) const {
        return j <= n ? j * h : n * h + (j - n) * std::abs(h_gamma);
    }
};

namespace detail {

inline ContourGrid build_grid(const EcsDomain& d) {
    d.validate();
    const Complex beta = d.beta();
    const Complex h_gamma = (d.R - d.r) * d.gamma() / static_cast<double>(d.m);
    const Complex turning = d.r * beta;

    ContourGrid g;
    g.n = d.n;
    g.m = d.m;
    g.h = d.r / d.n;
    g.h_gamma = h_gamma;
    g.end = turning + static_cast<double>(d.m) * h_gamma;
    g.points.reserve(d.n + d.m + 1);
    for (int j = 0; j <= d.n; ++j)
        g.points.push_back(d.r * (static_cast<double>(j) / d.n) * beta);
    for (int j = 1; j <= d.m; ++j)
        g.points.push_back(turning + static_cast<double>(j) * h_gamma);
    g.spacings.assign(static_cast<std::size_t>(d.n), g.h * beta);
    g.spacings.insert(g.spacings.end(), static_cast<std::size_t>(d.m), h_gamma);
    return g;
}

} // namespace detail

/// Grid for the plain absorbing-layer domain: z_j = j h on [0, r], then m
/// steps of h_gamma along the rotated exterior segment. Rejects domains with
/// a nonzero interior angle; those belong to build_csg_grid.
inline ContourGrid build_ecs_grid(const EcsDomain& d) {
    if (d.theta_beta != 0.0)
        throw std::invalid_argument("build_ecs_grid: domain has theta_beta != 0, use build_csg_grid");
    return detail::build_grid(d);
}

/// Grid for the complex-stretched preconditioner domain: the interior points
/// are rotated by e^{i theta_beta}, the exterior spacing is unchanged.
inline ContourGrid build_csg_grid(const EcsDomain& d) {
    return detail::build_grid(d);
}

} // namespace csg
