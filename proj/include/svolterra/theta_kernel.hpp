#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "svolterra/errors.hpp"
#include "svolterra/quadrature.hpp"

namespace sve {

// A scalar function with analytic first and second derivatives.
struct SmoothFunction {
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> ddf;
};

// Tail cutoff X such that int_X^inf exp(-x^p/2) dx < bound, certified by
// exp(-x^p/2) <= exp(-x X^{p-1}/2) for x >= X.
inline double stretched_exp_cutoff(double p, double bound) {
    double X = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double tail = 2.0 / std::pow(X, p - 1.0) * std::exp(-0.5 * std::pow(X, p));
        if (tail < bound) return X;
        X *= 1.25;
    }
    throw numerical_error("stretched_exp_cutoff: no cutoff found");
}

// Normalization c of the density c * exp(-|x|^{2+theta}/2): adaptive
// Gauss-Kronrod on [0, X_max] with the tail cut certified below tol/10.
inline double compute_c_theta(double theta, double tol = 1e-12) {
    if (!(theta > 0.0)) throw std::invalid_argument("compute_c_theta: theta must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("compute_c_theta: tol must be positive");
    const double p = 2.0 + theta;
    const double cutoff = stretched_exp_cutoff(p, tol / 10.0);
    const double half = integrate([p](double x) { return std::exp(-0.5 * std::pow(x, p)); },
                                  0.0, cutoff, tol / 10.0);
    return 1.0 / (2.0 * half);
}

struct HeatKernelDerivatives {
    double dt = 0.0;
    double dx = 0.0;
    double dxx = 0.0;
    double delta_theta = 0.0; // equals dt: p is the fundamental solution
};

struct ConvolutionResult {
    double value = 0.0;
    double tail_bound = 0.0; // certified kernel mass outside the grid span
    bool truncated = false;  // tail_bound above the requested tolerance
};

// The theta-heat kernel p_t(x) = c_theta t^{-alpha} exp(-|x|^{2+theta}/(2t))
// with alpha = 1/(2+theta), the fundamental solution of d_t u = L u for
// L = (2/(2+theta)^2) d_x(|x|^{-theta} d_x).
class ThetaHeatKernel {
public:
    explicit ThetaHeatKernel(double theta, double tol = 1e-12)
        : theta_(theta), alpha_(1.0 / (2.0 + theta)), c_theta_(compute_c_theta(theta, tol)) {}

    static ThetaHeatKernel from_alpha(double alpha) {
        if (!(alpha > 0.0 && alpha < 0.5))
            throw std::invalid_argument("ThetaHeatKernel::from_alpha: alpha must be in (0, 1/2)");
        return ThetaHeatKernel(1.0 / alpha - 2.0);
    }

    double theta() const { return theta_; }
    double alpha() const { return alpha_; }
    double c_theta() const { return c_theta_; }

    // t = 0 is the Dirac mass and cannot be evaluated pointwise
    double eval(double t, double x) const {
        if (t < 0.0) throw std::invalid_argument("ThetaHeatKernel::eval: negative time");
        if (t == 0.0)
            throw std::domain_error("ThetaHeatKernel::eval: t = 0 is the Dirac mass; "
                                    "use the point-evaluation reduction instead");
        const double p = 2.0 + theta_;
        return c_theta_ * std::pow(t, -alpha_) * std::exp(-std::pow(std::abs(x), p) / (2.0 * t));
    }

    // Closed-form d_t p, d_x p and (Delta_theta p); the last is the continuous
    // extension at x = 0, where the composed expression is regular even though
    // the raw coefficient |x|^{-theta} is not.
    HeatKernelDerivatives derivatives(double t, double x) const {
        if (!(t > 0.0)) throw std::domain_error("ThetaHeatKernel::derivatives: t must be > 0");
        const double p = 2.0 + theta_;
        const double ax = std::abs(x);
        const double v = eval(t, x);
        HeatKernelDerivatives d;
        d.dt = v * (-alpha_ / t + std::pow(ax, p) / (2.0 * t * t));
        d.dx = (x == 0.0) ? 0.0
                          : v * (-p * std::pow(ax, p - 1.0) * (x > 0.0 ? 1.0 : -1.0) / (2.0 * t));
        // |x|^{p-2} with p > 2 vanishes at 0, so dxx(0) = 0
        d.dxx = (x == 0.0) ? 0.0
                           : v * (p / (2.0 * t)) * std::pow(ax, p - 2.0) *
                                 ((p / (2.0 * t)) * std::pow(ax, p) - (p - 1.0));
        d.delta_theta = d.dt;
        return d;
    }

    // view of p_t(.) as a C^2 function of x, for operator cross-checks
    SmoothFunction as_smooth_function(double t) const {
        if (!(t > 0.0)) throw std::domain_error("ThetaHeatKernel::as_smooth_function: t must be > 0");
        const ThetaHeatKernel k = *this;
        return SmoothFunction{[k, t](double x) { return k.eval(t, x); },
                              [k, t](double x) { return k.derivatives(t, x).dx; },
                              [k, t](double x) { return k.derivatives(t, x).dxx; }};
    }

private:
    double theta_;
    double alpha_;
    double c_theta_;
};

// Divergence-form operator applied to a C^2 function away from the origin:
// (2/(2+theta)^2) * (-theta |x|^{-theta-1} sgn(x) f'(x) + |x|^{-theta} f''(x)).
// The coefficient is genuinely singular at x = 0; only specific composed
// expressions (like the heat kernel itself) extend continuously there.
inline double delta_theta_apply(double theta, const SmoothFunction& fn, double x) {
    if (!(theta > 0.0)) throw std::invalid_argument("delta_theta_apply: theta must be positive");
    if (x == 0.0)
        throw std::domain_error("delta_theta_apply: coefficient |x|^{-theta} is singular at 0");
    const double p = 2.0 + theta;
    const double ax = std::abs(x);
    const double sgn = x > 0.0 ? 1.0 : -1.0;
    return 2.0 / (p * p) *
           (-theta * std::pow(ax, -theta - 1.0) * sgn * fn.df(x) +
            std::pow(ax, -theta) * fn.ddf(x));
}

// (S_t phi)(x) = int p_t(x-y) phi(y) dy by fixed-grid quadrature. The result
// carries the certified kernel mass outside the grid span; callers decide
// whether a truncated convolution is acceptable.
template <typename Phi>
ConvolutionResult semigroup_apply(const ThetaHeatKernel& k, double t, const Phi& phi, double x,
                                  const SpatialGrid& grid, double tail_tol = 1e-10) {
    if (!(t > 0.0)) throw std::domain_error("semigroup_apply: t must be > 0");
    ConvolutionResult out;
    for (std::size_t i = 0; i < grid.points.size(); ++i)
        out.value += grid.weights[i] * k.eval(t, x - grid.points[i]) * phi(grid.points[i]);
    const double p = 2.0 + k.theta();
    const double reach = std::min(x - grid.lo, grid.hi - x);
    if (reach <= 0.0) {
        out.tail_bound = 1.0;
    } else {
        // mass of p_t beyond radius `reach`: substitute u = y t^{-alpha}
        const double r = reach * std::pow(t, -k.alpha());
        if (r >= 1.0) {
            out.tail_bound = 2.0 * k.c_theta() * 2.0 / (p * std::pow(r, p - 1.0)) *
                             std::exp(-0.5 * std::pow(r, p));
        } else {
            out.tail_bound = 1.0;
        }
    }
    out.truncated = out.tail_bound > tail_tol;
    return out;
}

} // namespace sve
