#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "svolterra/coefficients.hpp"
#include "svolterra/errors.hpp"
#include "svolterra/grid.hpp"
#include "svolterra/kernels.hpp"

namespace sve {

inline constexpr double kBlowupThreshold = 1e12;

namespace detail {

// Per-lag tables for stationary kernels on a uniform grid: the diffusion
// weight K(t_i, t_j) and the exact drift cell integral depend on i - j only.
struct LagTables {
    std::vector<double> diffusion; // diffusion[l-1] = K at lag l = i - j
    std::vector<double> drift;     // drift[l-1] = int over cell ending at lag l

    LagTables(const SingularKernel& kernel, const TimeGrid& grid) {
        diffusion.resize(grid.n);
        drift.resize(grid.n);
        const double dt = grid.dt();
        for (std::size_t l = 1; l <= grid.n; ++l) {
            const double lag = static_cast<double>(l) * dt;
            diffusion[l - 1] = kernel.eval(lag, 0.0);
            drift[l - 1] = kernel.drift_cell_weight(lag, 0.0, dt);
        }
    }
};

} // namespace detail

// Euler-Maruyama scheme for
//   X_t = g(t) + int_0^t K(t,s) b(s, X_s) ds + int_0^t K(t,s) sigma(s, X_s) dB_s.
//
// The drift uses exact kernel cell integrals; the stochastic sum uses the
// non-anticipating left-point kernel value K(t_i, t_j), finite since t_j < t_i.
// Coefficients are evaluated at the left node (Ito convention).
inline SamplePath euler_solve(const SingularKernel& kernel, const CoefficientPair& coeffs,
                              const BrownianDriver& driver,
                              const std::function<double(double)>& g) {
    const TimeGrid& grid = driver.grid;
    if (driver.increments.size() != grid.n)
        throw std::invalid_argument("euler_solve: driver/grid mismatch");

    SamplePath x(grid);
    x[0] = g(0.0);
    std::vector<double> bv(grid.n), sv(grid.n), fdiff(grid.n);
    const double dt = grid.dt();

    if (kernel.stationary()) {
        detail::LagTables tab(kernel, grid);
        for (std::size_t i = 1; i <= grid.n; ++i) {
            const std::size_t j = i - 1;
            const double tj = grid.node(j);
            bv[j] = coeffs.b(tj, x[j]);
            sv[j] = coeffs.sigma(tj, x[j]);
            fdiff[j] = sv[j] * driver.increments[j];
            double acc = g(grid.node(i));
            for (std::size_t l = 0; l < i; ++l)
                acc += tab.drift[i - 1 - l] * bv[l] + tab.diffusion[i - 1 - l] * fdiff[l];
            if (!std::isfinite(acc) || std::abs(acc) > kBlowupThreshold)
                throw numerical_error("euler_solve: blow-up at step " + std::to_string(i) +
                                      " (t = " + std::to_string(grid.node(i)) + ")");
            x[i] = acc;
        }
        return x;
    }

    for (std::size_t i = 1; i <= grid.n; ++i) {
        const std::size_t j = i - 1;
        const double tj = grid.node(j);
        bv[j] = coeffs.b(tj, x[j]);
        sv[j] = coeffs.sigma(tj, x[j]);
        fdiff[j] = sv[j] * driver.increments[j];
        const double ti = grid.node(i);
        double acc = g(ti);
        for (std::size_t l = 0; l < i; ++l) {
            const double tl = grid.node(l);
            acc += kernel.drift_cell_weight(ti, tl, tl + dt) * bv[l] +
                   kernel.diffusion_eval(ti, tl, tl + dt) * fdiff[l];
        }
        if (!std::isfinite(acc) || std::abs(acc) > kBlowupThreshold)
            throw numerical_error("euler_solve: blow-up at step " + std::to_string(i) +
                                  " (t = " + std::to_string(grid.node(i)) + ")");
        x[i] = acc;
    }
    return x;
}

struct PicardResult {
    SamplePath path;
    std::size_t iterations = 0;
    double final_gap = 0.0;
    std::vector<double> gap_history;
};

// Picard iteration for Lipschitz coefficients: U^{(0)} = g, and U^{(k)} is
// the Euler update reading U^{(k-1)} inside b and sigma, all on one driver.
// Stops when the sup-norm gap between successive iterates reaches tol.
inline PicardResult picard_solve(const SingularKernel& kernel, const CoefficientPair& coeffs,
                                 const BrownianDriver& driver,
                                 const std::function<double(double)>& g, std::size_t max_iter,
                                 double tol) {
    if (coeffs.b.gamma != 1.0 || coeffs.sigma.gamma != 1.0)
        throw std::invalid_argument("picard_solve: requires Lipschitz metadata (gamma = 1) on "
                                    "both coefficients");
    if (!(tol > 0.0)) throw std::invalid_argument("picard_solve: tol must be positive");

    const TimeGrid& grid = driver.grid;
    const double dt = grid.dt();

    SamplePath prev(grid);
    for (std::size_t i = 0; i <= grid.n; ++i) prev[i] = g(grid.node(i));

    const bool stationary = kernel.stationary();
    std::vector<double> kdiff, kdrift;
    if (stationary) {
        detail::LagTables tab(kernel, grid);
        kdiff = std::move(tab.diffusion);
        kdrift = std::move(tab.drift);
    }

    PicardResult res;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        SamplePath next(grid);
        next[0] = g(0.0);
        std::vector<double> bv(grid.n), fdiff(grid.n);
        for (std::size_t j = 0; j < grid.n; ++j) {
            const double tj = grid.node(j);
            bv[j] = coeffs.b(tj, prev[j]);
            fdiff[j] = coeffs.sigma(tj, prev[j]) * driver.increments[j];
        }
        for (std::size_t i = 1; i <= grid.n; ++i) {
            double acc = g(grid.node(i));
            if (stationary) {
                for (std::size_t l = 0; l < i; ++l)
                    acc += kdrift[i - 1 - l] * bv[l] + kdiff[i - 1 - l] * fdiff[l];
            } else {
                const double ti = grid.node(i);
                for (std::size_t l = 0; l < i; ++l) {
                    const double tl = grid.node(l);
                    acc += kernel.drift_cell_weight(ti, tl, tl + dt) * bv[l] +
                           kernel.diffusion_eval(ti, tl, tl + dt) * fdiff[l];
                }
            }
            if (!std::isfinite(acc) || std::abs(acc) > kBlowupThreshold)
                throw numerical_error("picard_solve: blow-up at iteration " + std::to_string(it) +
                                      ", step " + std::to_string(i));
            next[i] = acc;
        }
        double gap = 0.0;
        for (std::size_t i = 0; i <= grid.n; ++i)
            gap = std::max(gap, std::abs(next[i] - prev[i]));
        res.gap_history.push_back(gap);
        prev = std::move(next);
        if (gap <= tol) {
            res.path = std::move(prev);
            res.iterations = it;
            res.final_gap = gap;
            return res;
        }
    }
    throw convergence_error("picard_solve: no convergence within " + std::to_string(max_iter) +
                                " iterations (last gap " +
                                std::to_string(res.gap_history.back()) + ")",
                            res.gap_history);
}

struct MollifiedResult {
    std::vector<std::size_t> m_list;
    std::vector<SamplePath> paths;
    std::vector<std::vector<double>> gap_matrix; // discrete L^p gaps, p below
    double p = 4.0;
};

// Integrability window of the moment bound: the solution has finite p-th
// moments only for p > 2/(1-2alpha).
inline double moment_window(double alpha) { return 2.0 / (1.0 - 2.0 * alpha); }

// Solve with mollified coefficients (b^m, sigma^m) for each m on the SAME
// driver and report all pairwise discrete L^p gaps (1/n) sum |U^m - U^m'|^p.
// p defaults to 4 and is raised to ceil(2/(1-2alpha)) + 2 when alpha >= 1/4
// so it stays inside the moment window.
inline MollifiedResult mollified_solve(const SingularKernel& kernel, const CoefficientPair& coeffs,
                                       const BrownianDriver& driver,
                                       const std::function<double(double)>& g,
                                       const std::vector<std::size_t>& m_list) {
    if (m_list.empty()) throw std::invalid_argument("mollified_solve: m_list must be nonempty");
    MollifiedResult res;
    res.m_list = m_list;
    const double alpha = kernel.singularity_exponent();
    res.p = alpha < 0.25 ? 4.0 : std::ceil(moment_window(alpha)) + 2.0;
    for (std::size_t m : m_list) {
        CoefficientPair cm(mollify(coeffs.b, m), mollify(coeffs.sigma, m),
                           coeffs.name + "^m" + std::to_string(m));
        res.paths.push_back(euler_solve(kernel, cm, driver, g));
    }
    const std::size_t k = m_list.size();
    const double n = static_cast<double>(driver.grid.n);
    res.gap_matrix.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < res.paths[a].size(); ++i)
                acc += std::pow(std::abs(res.paths[a][i] - res.paths[b][i]), res.p);
            res.gap_matrix[a][b] = res.gap_matrix[b][a] = acc / n;
        }
    return res;
}

} // namespace sve
