#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "svolterra/fbm.hpp"
#include "svolterra/quadrature.hpp"

namespace sve {

// Two-time Volterra kernel K(t,s), s < t, with an integrable power
// singularity (t-s)^{-alpha} at the diagonal, alpha in (0, 1/2).
//
//   power_law   (t-s)^{-alpha}
//   fbm_simple  C (t-s)^{H-1/2},  alpha = 1/2 - H
//   fbm_exact   K_H(t,s) via the hypergeometric formula, alpha = 1/2 - H
//
// power_law and fbm_simple depend on t-s only (stationary), which enables
// per-lag weight tables in the solver; fbm_exact does not.
class SingularKernel {
public:
    enum class Variant { power_law, fbm_simple, fbm_exact };

    static SingularKernel power_law(double alpha) {
        check_alpha(alpha);
        SingularKernel k;
        k.variant_ = Variant::power_law;
        k.alpha_ = alpha;
        return k;
    }

    static SingularKernel fbm_simple(double H, double C) {
        check_alpha(0.5 - H);
        if (!(C > 0.0)) throw std::invalid_argument("SingularKernel: C must be positive");
        SingularKernel k;
        k.variant_ = Variant::fbm_simple;
        k.alpha_ = 0.5 - H;
        k.H_ = H;
        k.C_ = C;
        return k;
    }

    static SingularKernel fbm_exact(double H) {
        check_alpha(0.5 - H);
        SingularKernel k;
        k.variant_ = Variant::fbm_exact;
        k.alpha_ = 0.5 - H;
        k.H_ = H;
        return k;
    }

    Variant variant() const { return variant_; }
    double singularity_exponent() const { return alpha_; }
    double hurst() const { return H_; }
    double scale() const { return C_; }
    bool stationary() const { return variant_ != Variant::fbm_exact; }

    double eval(double t, double s) const {
        if (!(s < t)) throw std::invalid_argument("SingularKernel::eval: need s < t");
        switch (variant_) {
            case Variant::power_law: return std::pow(t - s, -alpha_);
            case Variant::fbm_simple: return s < 0.0 ? 0.0 : C_ * std::pow(t - s, H_ - 0.5);
            case Variant::fbm_exact: return kernel_exact(H_, t, s);
        }
        return 0.0;
    }

    // Left-point kernel value for the Ito sum over the cell [s0, s1]. The
    // power kernels are finite at every s0 < t. The exact fBm kernel also
    // blows up at s = 0 (like s^{H-1/2}), so its first cell is evaluated at
    // the cell midpoint instead.
    double diffusion_eval(double t, double s0, double s1) const {
        if (variant_ == Variant::fbm_exact && s0 <= 0.0) return eval(t, 0.5 * (s0 + s1));
        return eval(t, s0);
    }

    // Exact cell integral int_{s0}^{s1} K(t,s) ds for the stationary power
    // kernels; 3-point Gauss-Legendre for fbm_exact.
    double drift_cell_weight(double t, double s0, double s1) const {
        if (!(s0 < s1) || !(s1 <= t))
            throw std::invalid_argument("SingularKernel::drift_cell_weight: bad cell");
        switch (variant_) {
            case Variant::power_law: {
                const double e = 1.0 - alpha_;
                return (std::pow(t - s0, e) - std::pow(t - s1, e)) / e;
            }
            case Variant::fbm_simple: {
                const double e = H_ + 0.5;
                return C_ * (std::pow(t - s0, e) - std::pow(t - s1, e)) / e;
            }
            case Variant::fbm_exact: {
                static const double x[3] = {-0.774596669241483377035853079956,
                                            0.0,
                                            0.774596669241483377035853079956};
                static const double w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
                const double c = 0.5 * (s0 + s1), h = 0.5 * (s1 - s0);
                double acc = 0.0;
                for (int i = 0; i < 3; ++i) acc += w[i] * eval(t, c + h * x[i]);
                return acc * h;
            }
        }
        return 0.0;
    }

    std::string describe() const {
        switch (variant_) {
            case Variant::power_law: return "powerlaw(alpha=" + std::to_string(alpha_) + ")";
            case Variant::fbm_simple:
                return "fbm-simple(H=" + std::to_string(H_) + ",C=" + std::to_string(C_) + ")";
            case Variant::fbm_exact: return "fbm-exact(H=" + std::to_string(H_) + ")";
        }
        return "?";
    }

private:
    SingularKernel() = default;

    static void check_alpha(double alpha) {
        if (!(alpha > 0.0 && alpha < 0.5))
            throw std::invalid_argument(
                "SingularKernel: singularity exponent must lie in (0, 1/2), got " +
                std::to_string(alpha) + " (non-integrable or trivial kernels are rejected)");
    }

    Variant variant_ = Variant::power_law;
    double alpha_ = 0.25;
    double H_ = 0.25;
    double C_ = 1.0;
};

} // namespace sve
