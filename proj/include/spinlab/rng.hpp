#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "spinlab/types.hpp"

namespace spinlab {

/// Deterministic random stream. mt19937_64 output is fixed by the standard;
/// the uniform/normal maps below avoid the implementation-defined
/// distributions so seeded runs are byte-identical across platforms.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    double uniform() {  // [0, 1)
        return (engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t integer(std::uint64_t n) {  // [0, n)
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2 * pi * u2);
        have_spare_ = true;
        return r * std::cos(2 * pi * u2);
    }

    complex complex_normal() {
        const double re = normal();
        return {re, normal()};
    }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0;
};

} // namespace spinlab
