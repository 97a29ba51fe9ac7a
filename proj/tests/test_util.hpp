#pragma once

// Shared helpers for the test suites: a seeded generator with plain
// uniform draws, and random domain objects in ranges that keep the
// double-precision checks meaningful.

#include <cstdint>
#include <random>

#include "obliq/sl2.hpp"

namespace testutil {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

private:
    std::mt19937_64 eng_;
};

inline obliq::CanonicalParams random_params(Rng& rng, double phi_margin = 0.02,
                                            double lam_lo = 0.25, double lam_hi = 4.0) {
    const double theta = rng.uniform(-obliq::pi, obliq::pi);
    const double phi = rng.uniform(-(obliq::quarter_pi - phi_margin),
                                   obliq::quarter_pi - phi_margin);
    const double lam = rng.log_uniform(lam_lo, lam_hi);
    return {theta, phi, lam};
}

inline obliq::Sl2Matrix random_matrix(Rng& rng) {
    return obliq::matrix_from_params(random_params(rng));
}

}  // namespace testutil
