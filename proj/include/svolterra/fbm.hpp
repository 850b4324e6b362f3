#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "svolterra/grid.hpp"
#include "svolterra/special.hpp"

namespace sve {

// Parameters of the simplified fBm kernel C (t-s)^{H-1/2} 1_{[0,t)}(s).
struct FbmParams {
    double H = 0.25;
    double C = 1.0;

    FbmParams() = default;
    FbmParams(double hurst, double scale) : H(hurst), C(scale) {
        if (!(H > 0.0 && H < 1.0) || H == 0.5)
            throw std::invalid_argument("FbmParams: H must be in (0,1) \\ {1/2}");
        if (!(C > 0.0)) throw std::invalid_argument("FbmParams: C must be positive");
    }
};

inline void require_valid_hurst(double H) {
    if (!(H > 0.0 && H < 1.0) || H == 0.5)
        throw std::domain_error("Hurst index must lie in (0,1) \\ {1/2}, got " + std::to_string(H));
}

// V_H = Gamma(2-2H) cos(pi H) / (pi H (1-2H))
inline double v_constant(double H) {
    require_valid_hurst(H);
    const double pi = 3.14159265358979323846;
    return gamma_fn(2.0 - 2.0 * H) * std::cos(pi * H) / (pi * H * (1.0 - 2.0 * H));
}

// R_H(s,t) = (V_H/2) (s^{2H} + t^{2H} - |t-s|^{2H})
inline double covariance(double H, double s, double t) {
    require_valid_hurst(H);
    if (s < 0.0 || t < 0.0) throw std::invalid_argument("covariance: times must be >= 0");
    return 0.5 * v_constant(H) *
           (std::pow(s, 2.0 * H) + std::pow(t, 2.0 * H) - std::pow(std::abs(t - s), 2.0 * H));
}

// Exact square-root kernel of the fBm covariance operator,
//   K_H(t,r) = (t-r)^{H-1/2} / Gamma(H+1/2) * 2F1(1/2-H, H-1/2; H+1/2; 1-t/r)
// for 0 < r < t. The hypergeometric argument 1 - t/r is <= 0 on this domain.
inline double kernel_exact(double H, double t, double r) {
    require_valid_hurst(H);
    if (!(t > 0.0) || !(r > 0.0) || !(r < t))
        throw std::domain_error("kernel_exact: need 0 < r < t");
    const double F = gauss_2f1(0.5 - H, H - 0.5, H + 0.5, 1.0 - t / r);
    return std::pow(t - r, H - 0.5) / gamma_fn(H + 0.5) * F;
}

// Simplified kernel C (t-s)^{H-1/2} 1_{[0,t)}(s); with C = 1 this is the
// power-law kernel with alpha = 1/2 - H.
inline double kernel_simple(const FbmParams& p, double t, double s) {
    if (s < 0.0 || s >= t) return 0.0;
    return p.C * std::pow(t - s, p.H - 0.5);
}

// Synthesis of B^H through the representation B^H_t = int_0^t K_H(t,s) dB_s.
// The kernel is evaluated at cell midpoints: K_H(t, .) blows up at both the
// diagonal (for H < 1/2) and at s = 0, and the midpoint stays clear of each.
// The lower-triangular kernel matrix is precomputed once so that repeated
// sampling (Monte Carlo) costs one triangular multiply per path.
class FbmSampler {
public:
    FbmSampler(double H, const TimeGrid& grid) : H_(H), grid_(grid), k_(grid.n * grid.n, 0.0) {
        require_valid_hurst(H);
        const double dt = grid.dt();
        for (std::size_t i = 1; i <= grid.n; ++i) {
            const double ti = grid.node(i);
            for (std::size_t j = 0; j < i; ++j)
                k_[(i - 1) * grid.n + j] =
                    kernel_exact(H, ti, (static_cast<double>(j) + 0.5) * dt);
        }
    }

    SamplePath sample(const BrownianDriver& driver) const {
        if (!(driver.grid == grid_))
            throw std::invalid_argument("FbmSampler: driver grid mismatch");
        SamplePath out(grid_);
        for (std::size_t i = 1; i <= grid_.n; ++i) {
            double acc = 0.0;
            const double* row = &k_[(i - 1) * grid_.n];
            for (std::size_t j = 0; j < i; ++j) acc += row[j] * driver.increments[j];
            out[i] = acc;
        }
        return out;
    }

    double hurst() const { return H_; }

private:
    double H_;
    TimeGrid grid_;
    std::vector<double> k_;
};

inline SamplePath fbm_sample(double H, const TimeGrid& grid, const BrownianDriver& driver) {
    return FbmSampler(H, grid).sample(driver);
}

} // namespace sve
