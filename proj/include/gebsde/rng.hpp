#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gebsde {

/// Deterministic normal generator. mt19937_64 has a standard-pinned sequence,
/// uniforms come straight from the high bits, normals from Box-Muller, so a
/// given (seed, path index) reproduces the same stream bit for bit.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent substream for one path, decorrelated via splitmix64.
    static Rng for_path(std::uint64_t seed, std::uint64_t path_id) {
        return Rng(splitmix64(seed + 0x9E3779B97F4A7C15ull * (path_id + 1)));
    }

    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace gebsde
