#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "svolterra/errors.hpp"
#include "svolterra/grid.hpp"
#include "svolterra/quadrature.hpp"

namespace sve {

// c_alpha = int_0^1 (1-r)^{alpha-1} r^{-alpha} dr = B(alpha, 1-alpha)
//         = pi / sin(pi alpha).
// Both endpoint singularities are removed by power substitutions and the
// quadrature value is checked against the closed form to 1e-10; the closed
// form is returned.
inline double c_alpha_quadrature(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("c_alpha: alpha must be in (0, 1)");
    // left half: r = u^{1/(1-alpha)} flattens r^{-alpha}
    const double ql = 1.0 / (1.0 - alpha);
    const double left = integrate(
        [alpha, ql](double u) {
            const double r = std::pow(u, ql);
            return std::pow(1.0 - r, alpha - 1.0) * ql;
        },
        0.0, std::pow(0.5, 1.0 - alpha), 1e-13);
    // right half: 1 - r = v^{1/alpha} flattens (1-r)^{alpha-1}
    const double qr = 1.0 / alpha;
    const double right = integrate(
        [alpha, qr](double v) {
            const double r = 1.0 - std::pow(v, qr);
            return std::pow(r, -alpha) * qr;
        },
        0.0, std::pow(0.5, alpha), 1e-13);
    return left + right;
}

inline double c_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("c_alpha: alpha must be in (0, 1)");
    const double pi = 3.14159265358979323846;
    const double closed = pi / std::sin(pi * alpha);
    const double quad = c_alpha_quadrature(alpha);
    if (std::abs(quad - closed) > 1e-10 * std::abs(closed))
        throw numerical_error("c_alpha: quadrature " + std::to_string(quad) +
                              " disagrees with closed form " + std::to_string(closed));
    return closed;
}

// Forward transform Y_t = int_0^t (t-s)^{alpha-1} U_s ds with the exact cell
// integral ((t_i-t_j)^alpha - (t_i-t_{j+1})^alpha)/alpha absorbing the
// integrable singularity at s = t.
inline SamplePath frac_forward(double alpha, const SamplePath& u) {
    if (!(alpha > 0.0 && alpha < 0.5))
        throw std::invalid_argument("frac_forward: alpha must be in (0, 1/2)");
    const TimeGrid& grid = u.grid;
    const double dt = grid.dt();
    std::vector<double> w(grid.n); // cell weight at lag l = i - j
    for (std::size_t l = 1; l <= grid.n; ++l) {
        const double lag = static_cast<double>(l) * dt;
        w[l - 1] = (std::pow(lag, alpha) - std::pow(lag - dt, alpha)) / alpha;
    }
    SamplePath y(grid);
    for (std::size_t i = 1; i <= grid.n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < i; ++j) acc += w[i - 1 - j] * u[j];
        y[i] = acc;
    }
    return y;
}

struct FracInverseOptions {
    double y0_tol = 1e-12;          // |Y_0| above this raises the warning flag
    bool* y0_warning = nullptr;     // optional out-flag
};

// Inverse transform U_t = (1/c_alpha) d/dt int_0^t (t-s)^{-alpha} Y_s ds,
// discretized with exact kernel cell integrals and a forward difference
// assigned to the left node t_i (the final node repeats its neighbor).
//
// Y inherits a s^alpha cusp at 0 from any U with U(0) != 0, and a plain
// left-point rule leaves an O(1) error on the first few nodes. The cusp
// amplitude U_0 is therefore read off the first node (alpha Y_1 / t_1^alpha),
// its transform is applied in closed form (it contributes exactly
// c_alpha U_0 t), and the discrete rule only handles the remainder. For
// Y = t^alpha/alpha the round trip is then exact at every node.
inline SamplePath frac_inverse(double alpha, const SamplePath& y,
                               const FracInverseOptions& opt = {}) {
    if (!(alpha > 0.0 && alpha < 0.5))
        throw std::invalid_argument("frac_inverse: alpha must be in (0, 1/2)");
    const TimeGrid& grid = y.grid;
    const double dt = grid.dt();
    const double ca = 3.14159265358979323846 / std::sin(3.14159265358979323846 * alpha);

    const bool y0_nonzero = std::abs(y[0]) > opt.y0_tol;
    if (opt.y0_warning) *opt.y0_warning = y0_nonzero;

    const double u0 = alpha * y[1] / std::pow(grid.node(1), alpha);
    std::vector<double> resid(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        resid[i] = y[i] - u0 * std::pow(grid.node(i), alpha) / alpha;

    std::vector<double> w(grid.n);
    const double e = 1.0 - alpha;
    for (std::size_t l = 1; l <= grid.n; ++l) {
        const double lag = static_cast<double>(l) * dt;
        w[l - 1] = (std::pow(lag, e) - std::pow(lag - dt, e)) / e;
    }
    std::vector<double> z(grid.size(), 0.0);
    for (std::size_t i = 1; i <= grid.n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < i; ++j) acc += w[i - 1 - j] * resid[j];
        z[i] = acc;
    }
    SamplePath u(grid);
    for (std::size_t i = 0; i < grid.n; ++i) u[i] = u0 + (z[i + 1] - z[i]) / (dt * ca);
    u[grid.n] = u[grid.n - 1];
    return u;
}

} // namespace sve
