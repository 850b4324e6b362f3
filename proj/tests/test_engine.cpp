#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "svolterra/engine.hpp"
#include "svolterra/rng.hpp"

namespace {

sve::CoefficientPair zero_pair() {
    return {sve::HolderCoefficient([](double, double) { return 0.0; }, 1.0, 0.0, true),
            sve::HolderCoefficient([](double, double) { return 0.0; }, 1.0, 0.0, false),
            "zero"};
}

} // namespace

TEST_CASE("zero coefficients reproduce the forcing exactly") {
    sve::TimeGrid g(2.0, 64);
    sve::BrownianDriver d(5, g);
    auto kern = sve::SingularKernel::power_law(0.3);
    auto path = sve::euler_solve(kern, zero_pair(), d, [](double t) { return 1.0 + std::sin(t); });
    for (std::size_t i = 0; i <= g.n; ++i)
        CHECK(path[i] == 1.0 + std::sin(g.node(i)));
}

TEST_CASE("Ito isometry for the additive fixture") {
    // b = 0, sigma = 1: Var[X_T - x0] = int_0^T (T-s)^{-2a} ds = T^{1-2a}/(1-2a)
    const double alpha = 0.25, T = 1.0;
    sve::TimeGrid g(T, 256);
    auto kern = sve::SingularKernel::power_law(alpha);
    auto coeffs = sve::fixture("additive");
    const std::size_t n_paths = 4000;
    double var = 0.0;
    for (std::size_t k = 0; k < n_paths; ++k) {
        sve::BrownianDriver d(sve::mix_seed(2, k), g);
        auto path = sve::euler_solve(kern, coeffs, d, [](double) { return 0.5; });
        const double dx = path[g.n] - 0.5;
        var += dx * dx;
    }
    var /= static_cast<double>(n_paths);
    const double want = std::pow(T, 1.0 - 2.0 * alpha) / (1.0 - 2.0 * alpha);
    // 3 MC standard errors plus the left-point discretization bias margin
    const double se = want * std::sqrt(2.0 / static_cast<double>(n_paths));
    CHECK(std::abs(var - want) < 3.0 * se + 0.04 * want);
}

TEST_CASE("deterministic drift against a fine-grid oracle") {
    // sigma = 0, b = -x: compare each grid against an 8x finer solve
    auto kern = sve::SingularKernel::power_law(0.25);
    auto coeffs = sve::fixture("deterministic");
    auto g0 = [](double) { return 1.0; };
    double prev_err = -1.0;
    for (std::size_t n : {64u, 128u, 256u}) {
        sve::TimeGrid coarse(1.0, n), fine(1.0, 8 * n);
        sve::BrownianDriver dc(1, coarse), df(1, fine); // sigma = 0: increments inert
        auto pc = sve::euler_solve(kern, coeffs, dc, g0);
        auto pf = sve::euler_solve(kern, coeffs, df, g0);
        double sup = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            sup = std::max(sup, std::abs(pc[i] - pf[8 * i]));
        if (prev_err > 0.0) CHECK(sup < prev_err);
        prev_err = sup;
    }
    CHECK(prev_err < 1e-3);
}

TEST_CASE("blow-up is detected and named") {
    sve::TimeGrid g(1.0, 32);
    sve::BrownianDriver d(3, g);
    sve::CoefficientPair explosive(
        sve::HolderCoefficient([](double, double x) { return 1e9 * (1.0 + std::abs(x)); }, 1.0,
                               1e9, false),
        sve::HolderCoefficient([](double, double) { return 0.0; }, 1.0, 0.0, false));
    auto kern = sve::SingularKernel::power_law(0.25);
    CHECK_THROWS_MATCHES(sve::euler_solve(kern, explosive, d, [](double) { return 1.0; }),
                         sve::numerical_error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("blow-up at step")));
}

TEST_CASE("driver/grid mismatch is rejected") {
    sve::TimeGrid g(1.0, 32);
    sve::BrownianDriver d(3, g);
    d.increments.pop_back();
    CHECK_THROWS_AS(sve::euler_solve(sve::SingularKernel::power_law(0.25), zero_pair(), d,
                                     [](double) { return 0.0; }),
                    std::invalid_argument);
}

TEST_CASE("fbm-exact kernel solves run (small n) and stay near fbm-simple") {
    sve::TimeGrid g(1.0, 32);
    sve::BrownianDriver d(11, g);
    auto coeffs = sve::fixture("lipschitz");
    auto exact = sve::euler_solve(sve::SingularKernel::fbm_exact(0.25), coeffs, d,
                                  [](double) { return 0.5; });
    CHECK(exact.all_finite());
}

TEST_CASE("Picard iteration") {
    sve::TimeGrid g(1.0, 128);
    sve::BrownianDriver d(6, g);
    auto kern = sve::SingularKernel::power_law(0.25);

    SECTION("zero coefficients converge immediately") {
        auto res = sve::picard_solve(kern, zero_pair(), d, [](double) { return 2.0; }, 10, 1e-12);
        CHECK(res.iterations == 1);
        CHECK(res.final_gap == 0.0);
    }

    SECTION("deterministic drift agrees with the Euler fixed point") {
        auto coeffs = sve::fixture("deterministic");
        const double tol = 1e-10;
        auto res = sve::picard_solve(kern, coeffs, d, [](double) { return 1.0; }, 200, tol);
        auto euler = sve::euler_solve(kern, coeffs, d, [](double) { return 1.0; });
        double sup = 0.0;
        for (std::size_t i = 0; i <= g.n; ++i)
            sup = std::max(sup, std::abs(res.path[i] - euler[i]));
        CHECK(sup <= 10.0 * tol);
        // observed contraction: the gap sequence decreases after warmup
        for (std::size_t i = 2; i < res.gap_history.size(); ++i)
            CHECK(res.gap_history[i] < res.gap_history[i - 1]);
    }

    SECTION("stochastic Lipschitz fixture converges") {
        auto res = sve::picard_solve(kern, sve::fixture("lipschitz"), d,
                                     [](double) { return 0.5; }, 200, 1e-10);
        CHECK(res.final_gap <= 1e-10);
        CHECK(res.path.all_finite());
    }

    SECTION("non-Lipschitz metadata is refused") {
        CHECK_THROWS_AS(sve::picard_solve(kern, sve::fixture("holder"), d,
                                          [](double) { return 0.5; }, 10, 1e-8),
                        std::invalid_argument);
    }

    SECTION("iteration budget exhaustion carries the gap history") {
        try {
            sve::picard_solve(kern, sve::fixture("lipschitz"), d, [](double) { return 0.5; }, 2,
                              1e-15);
            FAIL("expected convergence_error");
        } catch (const sve::convergence_error& e) {
            CHECK(e.gaps.size() == 2);
        }
    }
}

TEST_CASE("mollified scheme") {
    sve::TimeGrid g(1.0, 128);
    sve::BrownianDriver d(8, g);
    auto kern = sve::SingularKernel::power_law(0.25);

    SECTION("Lipschitz pair: mollification is exact on affine coefficients") {
        auto res = sve::mollified_solve(kern, sve::fixture("lipschitz"), d,
                                        [](double) { return 0.5; }, {4, 16});
        CHECK(res.gap_matrix[0][1] <= 1e-24); // paths coincide, affine b and constant sigma
    }

    SECTION("Holder pair: gaps shrink along the mollification sequence") {
        auto res = sve::mollified_solve(kern, sve::fixture("holder"), d,
                                        [](double) { return 0.5; }, {4, 16, 64});
        CHECK(res.p == 6.0); // ceil(2/(1-2*0.25)) + 2
        CHECK(res.gap_matrix[0][1] > res.gap_matrix[1][2]);
    }

    SECTION("deterministic pair: gaps bounded by the mollification sup-distance") {
        auto res = sve::mollified_solve(kern, sve::fixture("deterministic"), d,
                                        [](double) { return 0.5; }, {4, 16});
        // |b^4 - b^16| <= sup|b^4-b| + sup|b^16-b| <= 2/4^1 + ... but b=-x is
        // affine: gaps vanish entirely
        CHECK(res.gap_matrix[0][1] <= 1e-24);
    }

    SECTION("empty m list is refused") {
        CHECK_THROWS_AS(sve::mollified_solve(kern, sve::fixture("holder"), d,
                                             [](double) { return 0.5; }, {}),
                        std::invalid_argument);
    }
}

TEST_CASE("solves are bit-deterministic in the seed") {
    sve::TimeGrid g(1.0, 64);
    auto kern = sve::SingularKernel::fbm_simple(0.25, 1.0);
    auto coeffs = sve::fixture("holder");
    sve::BrownianDriver d1(99, g), d2(99, g);
    auto a = sve::euler_solve(kern, coeffs, d1, [](double) { return 0.3; });
    auto b = sve::euler_solve(kern, coeffs, d2, [](double) { return 0.3; });
    for (std::size_t i = 0; i <= g.n; ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("kernel singularity exponents normalize the diagonal") {
    // (t-s)^{exponent} * K(t,s) stays bounded as s -> t
    auto probes = [](const sve::SingularKernel& k, double bound) {
        const double t = 1.3, a = k.singularity_exponent();
        for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
            const double v = std::pow(eps, a) * k.eval(t, t - eps);
            CHECK(std::isfinite(v));
            CHECK(std::abs(v) <= bound);
        }
    };
    probes(sve::SingularKernel::power_law(0.25), 1.0 + 1e-6);
    probes(sve::SingularKernel::fbm_simple(0.25, 2.0), 2.0 + 1e-6);
    probes(sve::SingularKernel::fbm_exact(0.25), 1.2); // 1/Gamma(H+1/2) ~ 0.92
    CHECK_THROWS_AS(sve::SingularKernel::power_law(0.5), std::invalid_argument);
    CHECK_THROWS_AS(sve::SingularKernel::power_law(0.0), std::invalid_argument);
    CHECK_THROWS_AS(sve::SingularKernel::fbm_simple(0.25, -1.0), std::invalid_argument);
}

TEST_CASE("moment window helper") {
    CHECK(sve::moment_window(0.25) == Catch::Approx(4.0));
    CHECK(sve::moment_window(0.4) == Catch::Approx(10.0));
}
