#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "svolterra/quadrature.hpp"

namespace sve {

// A coefficient f(t, x) with declared Holder exponent gamma in (0,1], a
// constant L serving both the Holder modulus and the linear growth bound
// |f| <= L(1+|x|), and a monotonicity flag. The declarations are metadata:
// they are spot-checked by sampled property tests, not proven.
struct HolderCoefficient {
    std::function<double(double, double)> eval;
    double gamma = 1.0;
    double L = 0.0;
    bool decreasing_in_x = false;
    std::string name;

    HolderCoefficient() = default;
    HolderCoefficient(std::function<double(double, double)> f, double gamma_, double L_,
                      bool decreasing, std::string name_ = "")
        : eval(std::move(f)), gamma(gamma_), L(L_), decreasing_in_x(decreasing),
          name(std::move(name_)) {
        if (!(gamma > 0.0 && gamma <= 1.0))
            throw std::invalid_argument("HolderCoefficient: gamma must be in (0, 1]");
        if (L < 0.0) throw std::invalid_argument("HolderCoefficient: L must be >= 0");
    }

    double operator()(double t, double x) const { return eval(t, x); }
};

// Drift/diffusion pair; the diffusion exponent gamma_2 >= 1/2 is enforced at
// construction. The drift's decreasing flag is required by the uniqueness
// hypotheses but not by the constructive scheme, so it stays advisory here.
struct CoefficientPair {
    HolderCoefficient b;
    HolderCoefficient sigma;
    std::string name;

    CoefficientPair() = default;
    CoefficientPair(HolderCoefficient b_, HolderCoefficient sigma_, std::string name_ = "")
        : b(std::move(b_)), sigma(std::move(sigma_)), name(std::move(name_)) {
        if (sigma.gamma < 0.5)
            throw std::invalid_argument("CoefficientPair: diffusion Holder exponent must be >= 1/2");
    }
};

// Named test fixtures satisfying the standing hypotheses:
//   lipschitz      b = -x, sigma = 1
//   holder         b = -sgn(x)|x|^{1/2}, sigma = (0.1 + min(|x|,5))^{1/2}
//   deterministic  b = -x, sigma = 0
//   additive       b = 0, sigma = 1
//   frozen         b = 0, sigma = 0
inline std::vector<CoefficientPair> standard_examples() {
    std::vector<CoefficientPair> out;
    out.emplace_back(
        HolderCoefficient([](double, double x) { return -x; }, 1.0, 1.0, true, "b=-x"),
        HolderCoefficient([](double, double) { return 1.0; }, 1.0, 1.0, false, "sigma=1"),
        "lipschitz");

    const double g1 = 0.5, g2 = 0.5, c0 = 0.1, r0 = 5.0;
    out.emplace_back(
        HolderCoefficient(
            [g1](double, double x) {
                return -(x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0)) * std::pow(std::abs(x), g1);
            },
            g1, 2.0, true, "b=-sgn(x)|x|^0.5"),
        HolderCoefficient(
            [g2, c0, r0](double, double x) { return std::pow(c0 + std::min(std::abs(x), r0), g2); },
            g2, 2.5, false, "sigma=(0.1+min(|x|,5))^0.5"),
        "holder");

    out.emplace_back(
        HolderCoefficient([](double, double x) { return -x; }, 1.0, 1.0, true, "b=-x"),
        HolderCoefficient([](double, double) { return 0.0; }, 1.0, 0.0, false, "sigma=0"),
        "deterministic");

    out.emplace_back(
        HolderCoefficient([](double, double) { return 0.0; }, 1.0, 0.0, true, "b=0"),
        HolderCoefficient([](double, double) { return 1.0; }, 1.0, 1.0, false, "sigma=1"),
        "additive");

    out.emplace_back(
        HolderCoefficient([](double, double) { return 0.0; }, 1.0, 0.0, true, "b=0"),
        HolderCoefficient([](double, double) { return 0.0; }, 1.0, 0.0, false, "sigma=0"),
        "frozen");
    return out;
}

inline CoefficientPair fixture(const std::string& name) {
    for (auto& p : standard_examples())
        if (p.name == name) return p;
    throw std::invalid_argument("fixture: unknown coefficient fixture '" + name + "'");
}

namespace detail {

// 33-node Gauss-Legendre rule against the bump rho(u) = (35/32)(1-u^2)^3 on
// [-1,1], discretely renormalized to unit mass. Unit mass plus node symmetry
// make convolution preserve affine functions exactly.
inline const std::vector<std::pair<double, double>>& mollifier_rule() {
    static const std::vector<std::pair<double, double>> rule = [] {
        auto gl = gauss_legendre(33);
        std::vector<std::pair<double, double>> r(gl.nodes.size());
        double mass = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double s = 1.0 - gl.nodes[i] * gl.nodes[i];
            r[i] = {gl.nodes[i], gl.weights[i] * (35.0 / 32.0) * s * s * s};
            mass += r[i].second;
        }
        for (auto& [node, w] : r) w /= mass;
        return r;
    }();
    return rule;
}

} // namespace detail

// Convolution mollification f^m(t,x) = int f(t, x - y) rho_m(y) dy with the
// compactly supported bump of width 1/m. For a gamma-Holder f this gives
// sup |f^m - f| <= L m^{-gamma} and a Lipschitz constant <= (35/16) L
// m^{1-gamma}; the returned metadata reflects those bounds (gamma = 1).
inline HolderCoefficient mollify(const HolderCoefficient& f, std::size_t m) {
    if (m == 0) throw std::invalid_argument("mollify: m must be >= 1");
    const double md = static_cast<double>(m);
    auto base = f.eval;
    auto smoothed = [base, md](double t, double x) {
        double acc = 0.0;
        for (const auto& [u, w] : detail::mollifier_rule()) acc += w * base(t, x - u / md);
        return acc;
    };
    const double lip = std::max(f.L * (1.0 + 1.0 / md),
                                (35.0 / 16.0) * f.L * std::pow(md, 1.0 - f.gamma));
    return HolderCoefficient(smoothed, 1.0, lip, f.decreasing_in_x,
                             f.name + "^m(m=" + std::to_string(m) + ")");
}

} // namespace sve
