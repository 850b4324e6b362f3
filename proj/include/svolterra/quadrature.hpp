#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "svolterra/errors.hpp"

namespace sve {

namespace detail {

// 15-point Kronrod rule with embedded 7-point Gauss rule (QUADPACK dqk15).
inline constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};

inline constexpr double kGK15WeightsK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr double kGK15WeightsG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelResult {
    double value = 0.0;
    double error = 0.0;
};

template <typename F>
PanelResult gk15_panel(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double result_g = fc * kGK15WeightsG[3];
    double result_k = fc * kGK15WeightsK[7];
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kGK15Nodes[i];
        const double fsum = f(c - dx) + f(c + dx);
        result_k += fsum * kGK15WeightsK[i];
        if (i % 2 == 1) result_g += fsum * kGK15WeightsG[i / 2];
    }
    result_g *= h;
    result_k *= h;
    return {result_k, std::abs(result_k - result_g)};
}

} // namespace detail

// Adaptive Gauss-Kronrod panel refinement: bisect the worst panel until the
// summed error estimate meets tol (absolute). Throws numerical_error with
// diagnostics if the panel budget runs out.
template <typename F>
double integrate(const F& f, double a, double b, double tol = 1e-12,
                 std::size_t max_panels = 4096) {
    struct Panel {
        double a, b, value, error;
    };
    auto first = detail::gk15_panel(f, a, b);
    std::vector<Panel> panels{{a, b, first.value, first.error}};
    while (true) {
        double total_err = 0.0, total_val = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total_val += panels[i].value;
            total_err += panels[i].error;
            if (panels[i].error > panels[worst].error) worst = i;
        }
        if (total_err <= tol || total_err <= 1e-15 * std::abs(total_val)) return total_val;
        if (panels.size() >= max_panels)
            throw numerical_error("integrate: panel budget exhausted, error estimate " +
                                  std::to_string(total_err) + " > tol " + std::to_string(tol));
        Panel w = panels[worst];
        const double mid = 0.5 * (w.a + w.b);
        if (mid <= w.a || mid >= w.b)
            throw numerical_error("integrate: panel collapsed below double resolution");
        auto left = detail::gk15_panel(f, w.a, mid);
        auto right = detail::gk15_panel(f, mid, w.b);
        panels[worst] = {w.a, mid, left.value, left.error};
        panels.push_back({mid, w.b, right.value, right.error});
    }
}

struct GaussLegendreRule {
    std::vector<double> nodes;   // on (-1, 1), ascending
    std::vector<double> weights;
};

// Gauss-Legendre nodes/weights by Newton iteration on P_n.
inline GaussLegendreRule gauss_legendre(std::size_t n) {
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double pi = 3.14159265358979323846;
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double pk = ((2.0 * static_cast<double>(k) - 1.0) * x * p1 -
                                   (static_cast<double>(k) - 1.0) * p0) /
                                  static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

// Fixed quadrature grid in space: strictly increasing points with positive
// weights covering [lo, hi]. pair_with() evaluates the discrete pairing
// <f, grid> = sum w_i f(x_i).
struct SpatialGrid {
    std::vector<double> points;
    std::vector<double> weights;
    double lo = 0.0;
    double hi = 0.0;

    double span() const { return hi - lo; }

    template <typename F>
    double pair_with(const F& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) acc += weights[i] * f(points[i]);
        return acc;
    }

    // n_cells+1 trapezoid points on [a, b]
    static SpatialGrid uniform(double a, double b, std::size_t n_cells) {
        if (!(b > a) || n_cells == 0) throw std::invalid_argument("SpatialGrid::uniform: bad span");
        SpatialGrid g;
        g.lo = a;
        g.hi = b;
        const double h = (b - a) / static_cast<double>(n_cells);
        g.points.resize(n_cells + 1);
        g.weights.assign(n_cells + 1, h);
        for (std::size_t i = 0; i <= n_cells; ++i)
            g.points[i] = a + h * static_cast<double>(i);
        g.weights.front() = 0.5 * h;
        g.weights.back() = 0.5 * h;
        return g;
    }

    // n_cells midpoints on [a, b]; never contains the cell edges, so a grid
    // symmetric about 0 with even n_cells avoids x = 0 exactly
    static SpatialGrid midpoint(double a, double b, std::size_t n_cells) {
        if (!(b > a) || n_cells == 0) throw std::invalid_argument("SpatialGrid::midpoint: bad span");
        SpatialGrid g;
        g.lo = a;
        g.hi = b;
        const double h = (b - a) / static_cast<double>(n_cells);
        g.points.resize(n_cells);
        g.weights.assign(n_cells, h);
        for (std::size_t i = 0; i < n_cells; ++i)
            g.points[i] = a + h * (static_cast<double>(i) + 0.5);
        return g;
    }

    // Symmetric midpoint grid on [-R, R] whose cells are power-graded toward
    // the origin inside [-r0, r0] (edges r0*(k/K)^q) and uniform outside.
    // Integrates |x|^{-theta}-type singularities at 0 far more accurately
    // than a uniform offset grid while still never placing a node at 0.
    static SpatialGrid offset_graded(double R, std::size_t n_uniform, double r0,
                                     std::size_t n_graded, double q = 3.0) {
        if (!(R > r0) || !(r0 > 0.0) || n_uniform == 0 || n_graded == 0)
            throw std::invalid_argument("SpatialGrid::offset_graded: bad parameters");
        std::vector<double> edges; // positive side, ascending, starting at 0
        edges.push_back(0.0);
        for (std::size_t k = 1; k <= n_graded; ++k)
            edges.push_back(r0 * std::pow(static_cast<double>(k) / static_cast<double>(n_graded), q));
        const double hu = (R - r0) / static_cast<double>(n_uniform);
        for (std::size_t k = 1; k <= n_uniform; ++k)
            edges.push_back(r0 + hu * static_cast<double>(k));
        SpatialGrid g;
        g.lo = -R;
        g.hi = R;
        const std::size_t m = edges.size() - 1;
        g.points.resize(2 * m);
        g.weights.resize(2 * m);
        for (std::size_t i = 0; i < m; ++i) {
            const double w = edges[m - i] - edges[m - i - 1];
            const double c = 0.5 * (edges[m - i] + edges[m - i - 1]);
            g.points[i] = -c;          // negative side, ascending point order
            g.weights[i] = w;
            g.points[2 * m - 1 - i] = c;
            g.weights[2 * m - 1 - i] = w;
        }
        return g;
    }
};

} // namespace sve
