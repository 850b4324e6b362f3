#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "svolterra/coefficients.hpp"
#include "svolterra/engine.hpp"
#include "svolterra/errors.hpp"
#include "svolterra/fbm.hpp"
#include "svolterra/fractional.hpp"
#include "svolterra/grid.hpp"
#include "svolterra/kernels.hpp"
#include "svolterra/path_independence.hpp"
#include "svolterra/rng.hpp"
#include "svolterra/special.hpp"
#include "svolterra/spde.hpp"
#include "svolterra/theta_kernel.hpp"

namespace sve {

// Work items are claimed from a shared counter but every result is written
// to its own index, and all reductions run sequentially afterwards; results
// are therefore independent of worker count and scheduling.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    const std::size_t nw = std::min(workers, count);
    pool.reserve(nw);
    for (std::size_t w = 0; w < nw; ++w)
        pool.emplace_back([&] {
            while (true) {
                const std::size_t k = next.fetch_add(1);
                if (k >= count) return;
                try {
                    fn(k);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

struct ExperimentConfig {
    SingularKernel kernel = SingularKernel::power_law(0.25);
    std::string fixture_name = "lipschitz";
    double T = 1.0;
    std::size_t n = 512;
    std::size_t n_paths = 1000;
    double p = 4.0;
    std::uint64_t seed = 1;
    double x0 = 0.5;
    std::size_t workers = 1;
    std::vector<std::size_t> m_list = {4, 16, 64};
    std::vector<std::size_t> levels = {256, 512, 1024};
    std::size_t z_probe_count = 41;

    CoefficientPair coefficients() const { return fixture(fixture_name); }
    double alpha() const { return kernel.singularity_exponent(); }
};

inline constexpr std::size_t kBatchCount = 16;

namespace detail {

inline double batch_stderr(const std::vector<double>& samples) {
    const std::size_t nb = kBatchCount;
    if (samples.size() < nb) return 0.0;
    const std::size_t per = samples.size() / nb;
    std::vector<double> means(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        double acc = 0.0;
        for (std::size_t i = b * per; i < (b + 1) * per; ++i) acc += samples[i];
        means[b] = acc / static_cast<double>(per);
    }
    double mu = 0.0;
    for (double m : means) mu += m;
    mu /= static_cast<double>(nb);
    double var = 0.0;
    for (double m : means) var += (m - mu) * (m - mu);
    var /= static_cast<double>(nb - 1);
    return std::sqrt(var / static_cast<double>(nb));
}

// least squares slope of log(val) vs log(lag), smallest lag dropped (it
// carries the largest discretization bias)
inline double loglog_slope(const std::vector<double>& lags, const std::vector<double>& vals) {
    if (lags.size() < 3) throw std::invalid_argument("loglog_slope: need at least 3 lags");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(lags.size() - 1);
    for (std::size_t i = 1; i < lags.size(); ++i) {
        const double x = std::log(lags[i]);
        const double y = std::log(vals[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace detail

struct MomentRow {
    double t = 0.0;
    double p = 0.0;
    double estimate = 0.0;
    double stderr_ = 0.0;
};

// Monte Carlo moments E|X_t|^p at dyadic times. Refuses p outside the
// integrability window p > 2/(1-2alpha) of the moment bound.
inline std::vector<MomentRow> mc_moment(const ExperimentConfig& cfg) {
    const double window = moment_window(cfg.alpha());
    if (!(cfg.p > window))
        throw std::invalid_argument(
            "mc_moment: moment order must satisfy p > 2/(1-2alpha); for alpha = " +
            std::to_string(cfg.alpha()) + " the window is p > " + std::to_string(window));
    const TimeGrid grid(cfg.T, cfg.n);
    const CoefficientPair coeffs = cfg.coefficients();
    std::vector<std::size_t> marks;
    for (std::size_t d = 8; d >= 1; d /= 2)
        if (grid.n / d > 0 && (marks.empty() || marks.back() != grid.n / d))
            marks.push_back(grid.n / d);

    std::vector<std::vector<double>> samples(marks.size(),
                                             std::vector<double>(cfg.n_paths, 0.0));
    const double x0 = cfg.x0;
    parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t k) {
        BrownianDriver driver(mix_seed(cfg.seed, k), grid);
        SamplePath path = euler_solve(cfg.kernel, coeffs, driver, [x0](double) { return x0; });
        for (std::size_t mi = 0; mi < marks.size(); ++mi)
            samples[mi][k] = std::pow(std::abs(path[marks[mi]]), cfg.p);
    });

    std::vector<MomentRow> rows;
    for (std::size_t mi = 0; mi < marks.size(); ++mi) {
        double mean = 0.0;
        for (double s : samples[mi]) mean += s;
        mean /= static_cast<double>(cfg.n_paths);
        rows.push_back({grid.node(marks[mi]), cfg.p, mean, detail::batch_stderr(samples[mi])});
    }
    return rows;
}

struct HolderRow {
    double lag = 0.0;
    double p = 0.0;
    double estimate = 0.0;
};

struct HolderResult {
    std::vector<HolderRow> rows;
    double slope = 0.0;
    double predicted_floor = 0.0; // theoretical exponent floor p min(alpha, 1/2-alpha, (1-2alpha)/4)
};

// E|X_{t+delta} - X_t|^p at fixed t = T/2 across the given lags, log-log
// slope fitted with the smallest lag dropped. All lags share paths (common
// random numbers), which tightens the slope estimate considerably.
inline HolderResult mc_holder_modulus(const ExperimentConfig& cfg,
                                      const std::vector<double>& lags) {
    if (lags.size() < 3)
        throw std::invalid_argument("mc_holder_modulus: need at least 3 lags");
    const TimeGrid grid(cfg.T, cfg.n);
    const double dt = grid.dt();
    const std::size_t t_idx = grid.n / 2;
    std::vector<std::size_t> lag_idx;
    for (double d : lags) {
        if (!(d > 0.0 && d < cfg.T / 2.0))
            throw std::invalid_argument("mc_holder_modulus: lags must lie in (0, T/2)");
        const auto li = static_cast<std::size_t>(std::llround(d / dt));
        if (li == 0 || t_idx + li > grid.n)
            throw std::invalid_argument("mc_holder_modulus: lag not resolvable on the grid");
        lag_idx.push_back(li);
    }

    const CoefficientPair coeffs = cfg.coefficients();
    const double x0 = cfg.x0;
    std::vector<std::vector<double>> acc(lags.size(), std::vector<double>(cfg.n_paths, 0.0));
    parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t k) {
        BrownianDriver driver(mix_seed(cfg.seed, k), grid);
        SamplePath path = euler_solve(cfg.kernel, coeffs, driver, [x0](double) { return x0; });
        for (std::size_t li = 0; li < lag_idx.size(); ++li)
            acc[li][k] = std::pow(std::abs(path[t_idx + lag_idx[li]] - path[t_idx]), cfg.p);
    });

    HolderResult res;
    std::vector<double> lag_times, means;
    for (std::size_t li = 0; li < lag_idx.size(); ++li) {
        double mean = 0.0;
        for (double s : acc[li]) mean += s;
        mean /= static_cast<double>(cfg.n_paths);
        const double lag_t = static_cast<double>(lag_idx[li]) * dt;
        res.rows.push_back({lag_t, cfg.p, mean});
        lag_times.push_back(lag_t);
        means.push_back(mean);
    }
    res.slope = detail::loglog_slope(lag_times, means);
    const double a = cfg.alpha();
    res.predicted_floor =
        cfg.p * std::min(a, std::min(0.5 - a, (1.0 - 2.0 * a) / 4.0));
    return res;
}

struct ConvergenceRow {
    std::size_t n = 0;
    double gap = 0.0; // E |X^{(n)}_T - X^{(2n)}_T|^2 against the next level
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    double slope = 0.0; // fitted log gap vs log n; empirical, no theoretical claim
};

// Coupled grid-refinement study: per path one driver at the finest level,
// coarser drivers by summing increments, L2 gaps between consecutive levels.
inline ConvergenceResult convergence_study(const ExperimentConfig& cfg,
                                           const std::vector<std::size_t>& levels) {
    if (levels.size() < 2)
        throw std::invalid_argument("convergence_study: need at least 2 levels");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] <= levels[i - 1] || levels[i] % levels[i - 1] != 0)
            throw std::invalid_argument("convergence_study: levels must be dyadically increasing");

    const CoefficientPair coeffs = cfg.coefficients();
    const double x0 = cfg.x0;
    const std::size_t nl = levels.size();
    std::vector<std::vector<double>> xT(nl, std::vector<double>(cfg.n_paths, 0.0));
    const TimeGrid fine(cfg.T, levels.back());
    parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t k) {
        BrownianDriver fine_driver(mix_seed(cfg.seed, k), fine);
        for (std::size_t li = 0; li < nl; ++li) {
            BrownianDriver d = fine_driver.coarsen(levels.back() / levels[li]);
            SamplePath path = euler_solve(cfg.kernel, coeffs, d, [x0](double) { return x0; });
            xT[li][k] = path[path.grid.n];
        }
    });

    ConvergenceResult res;
    std::vector<double> ns, gaps;
    for (std::size_t li = 0; li + 1 < nl; ++li) {
        double acc = 0.0;
        for (std::size_t k = 0; k < cfg.n_paths; ++k) {
            const double d = xT[li][k] - xT[li + 1][k];
            acc += d * d;
        }
        acc /= static_cast<double>(cfg.n_paths);
        res.rows.push_back({levels[li], acc});
        ns.push_back(static_cast<double>(levels[li]));
        gaps.push_back(acc);
    }
    if (gaps.size() >= 2) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            const double x = std::log(ns[i]), y = std::log(std::max(gaps[i], 1e-300));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double m = static_cast<double>(gaps.size());
        res.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    return res;
}

} // namespace sve
