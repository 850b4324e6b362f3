#pragma once

#include <cmath>
#include <cstdint>

namespace sve {

// splitmix64: tiny 64-bit generator with guaranteed bit-stable output across
// platforms and standard-library versions. Used both as the Monte Carlo
// engine and as the sub-seed mixing function, so repeated runs and any
// worker count reproduce identical streams.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in (0,1]; never 0, so log() below is safe
    double next_unit() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }
};

// Fixed sub-seed derivation: path k of a run seeded with `seed` always draws
// from mix_seed(seed, k), independent of scheduling or worker count.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
    SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ULL * (k + 1)));
    return g.next();
}

// Standard normals via Box-Muller on splitmix64 uniforms. The pair cache
// keeps cost at one (log, sqrt, cos/sin) triple per two variates.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = eng_.next_unit();
        const double u2 = eng_.next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    SplitMix64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace sve
