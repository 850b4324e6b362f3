#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "svolterra/rng.hpp"

namespace sve {

// Uniform grid t_i = i T / n on [0, T].
struct TimeGrid {
    double horizon = 1.0;
    std::size_t n = 1;

    TimeGrid() = default;
    TimeGrid(double T, std::size_t n_steps) : horizon(T), n(n_steps) {
        if (!(T > 0.0) || n_steps == 0)
            throw std::invalid_argument("TimeGrid: need T > 0 and n >= 1");
    }

    double dt() const { return horizon / static_cast<double>(n); }
    double node(std::size_t i) const { return horizon * static_cast<double>(i) / static_cast<double>(n); }
    std::size_t size() const { return n + 1; }

    bool operator==(const TimeGrid& o) const { return horizon == o.horizon && n == o.n; }
};

// Seeded Gaussian increments dB_i ~ N(0, dt), i = 0..n-1. Regeneration from
// the same seed is bit-identical.
struct BrownianDriver {
    std::uint64_t seed = 0;
    TimeGrid grid;
    std::vector<double> increments;

    BrownianDriver() = default;

    BrownianDriver(std::uint64_t seed_, const TimeGrid& g) : seed(seed_), grid(g) {
        increments.resize(g.n);
        GaussianStream gs(seed_);
        const double sq = std::sqrt(g.dt());
        for (std::size_t i = 0; i < g.n; ++i) increments[i] = sq * gs.next();
    }

    // Coarse driver whose increments are sums of this driver's fine
    // increments; this is the coupling used by refinement studies.
    BrownianDriver coarsen(std::size_t factor) const {
        if (factor == 0 || grid.n % factor != 0)
            throw std::invalid_argument("BrownianDriver::coarsen: factor must divide n");
        BrownianDriver out;
        out.seed = seed;
        out.grid = TimeGrid(grid.horizon, grid.n / factor);
        out.increments.resize(out.grid.n);
        for (std::size_t i = 0; i < out.grid.n; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < factor; ++k) s += increments[i * factor + k];
            out.increments[i] = s;
        }
        return out;
    }

    // B_{t_i} by prefix sums (B_0 = 0)
    std::vector<double> path() const {
        std::vector<double> b(grid.n + 1, 0.0);
        for (std::size_t i = 0; i < grid.n; ++i) b[i + 1] = b[i] + increments[i];
        return b;
    }
};

// Grid-indexed trajectory values X_{t_i}, i = 0..n.
struct SamplePath {
    TimeGrid grid;
    std::vector<double> values;

    SamplePath() = default;
    explicit SamplePath(const TimeGrid& g) : grid(g), values(g.size(), 0.0) {}

    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    std::size_t size() const { return values.size(); }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

} // namespace sve
