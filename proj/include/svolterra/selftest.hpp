#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "svolterra/coefficients.hpp"
#include "svolterra/engine.hpp"
#include "svolterra/experiments.hpp"
#include "svolterra/fbm.hpp"
#include "svolterra/fractional.hpp"
#include "svolterra/path_independence.hpp"
#include "svolterra/special.hpp"
#include "svolterra/spde.hpp"
#include "svolterra/theta_kernel.hpp"

namespace sve {

struct SelftestEntry {
    std::string name;
    bool ok = false;
    std::string detail;
};

// Fast cross-module invariant suite (each check well under a second); the
// CLI `selftest` subcommand fails with a numerical-error exit on any
// violation. Deterministic: fixed probes and seeds throughout.
inline std::vector<SelftestEntry> run_selftest() {
    std::vector<SelftestEntry> out;
    auto check = [&out](const std::string& name, const std::function<double()>& defect,
                        double tol) {
        SelftestEntry e;
        e.name = name;
        try {
            const double d = defect();
            e.ok = std::abs(d) <= tol;
            e.detail = "defect " + format_double(d) + " vs tol " + format_double(tol);
        } catch (const std::exception& ex) {
            e.ok = false;
            e.detail = std::string("exception: ") + ex.what();
        }
        out.push_back(e);
    };

    // heat kernel normalization over the standard theta x t panel
    check("theta_kernel.normalization", [] {
        double worst = 0.0;
        for (double theta : {0.5, 1.0, 2.0, 4.0}) {
            ThetaHeatKernel k(theta);
            for (double t : {0.1, 1.0, 10.0}) {
                const double cutoff = stretched_exp_cutoff(2.0 + theta, 1e-13) *
                                      std::pow(t, k.alpha());
                const double mass = integrate([&](double x) { return k.eval(t, x); }, -cutoff,
                                              cutoff, 1e-11);
                worst = std::max(worst, std::abs(mass - 1.0));
            }
        }
        return worst;
    }, 1e-8);

    // fundamental solution: d_t p = Delta_theta p in closed form
    check("theta_kernel.fundamental_identity", [] {
        SplitMix64 rng(11);
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
            const double theta = 0.25 + 3.75 * rng.next_unit();
            const double t = 0.05 + 2.0 * rng.next_unit();
            const double x = -3.0 + 6.0 * rng.next_unit();
            ThetaHeatKernel k(theta);
            const auto d = k.derivatives(t, x);
            const double scale = std::max(std::abs(d.dt), 1e-300);
            worst = std::max(worst, std::abs(d.dt - d.delta_theta) / scale);
        }
        return worst;
    }, 1e-12);

    // trace identity (1/c) p_delta(0) = delta^{-alpha}
    check("theta_kernel.trace_identity", [] {
        SplitMix64 rng(12);
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
            const double theta = 0.25 + 3.75 * rng.next_unit();
            const double delta = 1e-3 + rng.next_unit();
            ThetaHeatKernel k(theta);
            const double lhs = k.eval(delta, 0.0) / k.c_theta();
            const double rhs = std::pow(delta, -k.alpha());
            worst = std::max(worst, std::abs(lhs - rhs) / rhs);
        }
        return worst;
    }, 1e-12);

    // c_alpha: quadrature vs closed form
    check("fractional.c_alpha", [] {
        double worst = 0.0;
        for (double a : {0.1, 0.25, 0.4})
            worst = std::max(worst, std::abs(c_alpha_quadrature(a) -
                                             3.14159265358979323846 / std::sin(3.14159265358979323846 * a)));
        return worst;
    }, 1e-10);

    // 2F1 closed form and Pfaff-path consistency
    check("fbm.gauss_2f1", [] {
        double worst = std::abs(gauss_2f1(1.0, 1.0, 2.0, -1.0) - std::log(2.0));
        worst = std::max(worst, std::abs(gauss_2f1(0.3, -0.2, 0.7, -3.5) -
                                         gauss_2f1(-0.2, 0.3, 0.7, -3.5)));
        return worst;
    }, 1e-10);

    // gamma: reference values and recurrence
    check("special.gamma", [] {
        double worst = std::abs(gamma_fn(0.5) - std::sqrt(3.14159265358979323846));
        worst = std::max(worst, std::abs(gamma_fn(1.0) - 1.0));
        worst = std::max(worst, std::abs(gamma_fn(2.0) - 1.0));
        for (double x : {0.3, 1.7, 4.2, 8.9})
            worst = std::max(worst, std::abs(gamma_fn(x + 1.0) - x * gamma_fn(x)) / gamma_fn(x + 1.0));
        return worst;
    }, 1e-12);

    // covariance PSD on a small time set
    check("fbm.covariance_psd", [] {
        const double H = 0.25;
        std::vector<double> ts{0.2, 0.5, 0.9, 1.4, 2.0};
        const std::size_t m = ts.size();
        std::vector<double> a(m * m);
        double trace = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                a[i * m + j] = covariance(H, ts[i], ts[j]);
                if (i == j) trace += a[i * m + j];
            }
        // smallest eigenvalue by a few inverse-free power iterations on (cI - A)
        const double c = 2.0 * trace;
        std::vector<double> v(m, 1.0);
        for (int it = 0; it < 400; ++it) {
            std::vector<double> w(m, 0.0);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    w[i] += (c * (i == j ? 1.0 : 0.0) - a[i * m + j]) * v[j];
            double norm = 0.0;
            for (double x : w) norm += x * x;
            norm = std::sqrt(norm);
            for (std::size_t i = 0; i < m; ++i) v[i] = w[i] / norm;
        }
        double ray = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) ray += v[i] * a[i * m + j] * v[j];
        return std::min(0.0, ray + 1e-8 * trace); // defect is how far below -1e-8*trace
    }, 0.0);

    // mollify: exact on affine functions
    check("coefficients.mollify_affine", [] {
        HolderCoefficient f([](double, double x) { return 3.0 * x - 2.0; }, 1.0, 3.0, false, "affine");
        HolderCoefficient fm = mollify(f, 7);
        double worst = 0.0;
        for (double x : {-5.0, -1.2, 0.0, 2.7, 9.9})
            worst = std::max(worst, std::abs(fm(0.0, x) - f(0.0, x)));
        return worst;
    }, 1e-12);

    // solver determinism: same seed, same bits
    check("engine.determinism", [] {
        TimeGrid grid(1.0, 64);
        auto kern = SingularKernel::power_law(0.25);
        auto coeffs = fixture("lipschitz");
        BrownianDriver d1(42, grid), d2(42, grid);
        auto g = [](double) { return 0.5; };
        SamplePath a = euler_solve(kern, coeffs, d1, g);
        SamplePath b = euler_solve(kern, coeffs, d2, g);
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] != b[i]) return 1.0;
        return 0.0;
    }, 0.0);

    // construction closure: residual_scan after derive_g_from_v
    check("path_independence.construction_closure", [] {
        TimeGrid grid(1.0, 64);
        auto kern = SingularKernel::power_law(0.25);
        auto coeffs = fixture("lipschitz");
        BrownianDriver driver(7, grid);
        SamplePath path = euler_solve(kern, coeffs, driver, [](double) { return 0.5; });
        ThetaHeatKernel k = ThetaHeatKernel::from_alpha(0.25);
        auto v = candidate_exp_sin();
        auto af = derive_g_from_v(v, coeffs, k.c_theta());
        return residual_scan(v, af, coeffs, k.c_theta(), path, driver).max_abs_residual();
    }, 1e-12);

    // fractional transforms are linear and invert each other on the identity example
    check("fractional.beta_identity_roundtrip", [] {
        const double alpha = 0.25;
        TimeGrid grid(1.0, 128);
        SamplePath y(grid);
        for (std::size_t i = 0; i <= grid.n; ++i)
            y[i] = std::pow(grid.node(i), alpha) / alpha;
        SamplePath u = frac_inverse(alpha, y);
        double worst = 0.0;
        for (std::size_t i = 0; i <= grid.n; ++i) worst = std::max(worst, std::abs(u[i] - 1.0));
        return worst;
    }, 1e-10);

    // driver statistics: mean ~ 0 and variance ~ dt at 4 sigma
    check("grid.driver_moments", [] {
        TimeGrid grid(1.0, 512);
        const std::size_t reps = 200;
        const double dt = grid.dt();
        double mean = 0.0, var = 0.0;
        const double count = static_cast<double>(reps * grid.n);
        for (std::size_t r = 0; r < reps; ++r) {
            BrownianDriver d(mix_seed(99, r), grid);
            for (double inc : d.increments) {
                mean += inc;
                var += inc * inc;
            }
        }
        mean /= count;
        var /= count;
        const double mean_z = std::abs(mean) / std::sqrt(dt / count);
        const double var_z = std::abs(var - dt) / (dt * std::sqrt(2.0 / count));
        return std::max(mean_z, var_z) / 4.0; // scaled so defect > 1 means beyond 4 sigma
    }, 1.0);

    return out;
}

} // namespace sve
