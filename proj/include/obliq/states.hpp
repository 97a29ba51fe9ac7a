#pragma once

// Gaussian states in phase-space covariance form, hbar = 1 convention:
// [x, p] = i, vacuum covariance = identity / 2.

#include <cmath>
#include <stdexcept>

#include "obliq/grid.hpp"
#include "obliq/sl2.hpp"

namespace obliq {

struct GaussianState {
    double mean_x, mean_p;
    double cov_xx, cov_xp, cov_pp;  // symmetric 2x2 covariance

    GaussianState(double mx, double mp, double cxx, double cxp, double cpp)
        : mean_x(mx), mean_p(mp), cov_xx(cxx), cov_xp(cxp), cov_pp(cpp) {
        if (!std::isfinite(mx) || !std::isfinite(mp) || !std::isfinite(cxx) ||
            !std::isfinite(cxp) || !std::isfinite(cpp))
            throw std::invalid_argument("GaussianState: non-finite field");
        if (cov_xx <= 0.0 || cov_pp <= 0.0 || cov_det() <= 0.0)
            throw std::invalid_argument("GaussianState: covariance not positive definite");
        if (cov_det() < 0.25 - 1e-12)
            throw std::invalid_argument("GaussianState: covariance violates det >= 1/4");
    }

    double cov_det() const { return cov_xx * cov_pp - cov_xp * cov_xp; }

    /// Density value at (x, p): the Wigner function of a Gaussian state is
    /// the normal density with its mean and covariance.
    double density(double x, double p) const {
        const double det = cov_det();
        const double ixx = cov_pp / det, ipp = cov_xx / det, ixp = -cov_xp / det;
        const double u = x - mean_x, v = p - mean_p;
        const double q = ixx * u * u + 2.0 * ixp * u * v + ipp * v * v;
        return std::exp(-0.5 * q) / (2.0 * pi * std::sqrt(det));
    }
};

inline GaussianState vacuum() { return {0.0, 0.0, 0.5, 0.0, 0.5}; }

/// Sample the state's Wigner function on the grid layout of `g` (existing
/// values are ignored).
inline PhaseSpaceGrid wigner_gaussian(const GaussianState& s, const PhaseSpaceGrid& g) {
    PhaseSpaceGrid out(g.x_min, g.x_max, g.nx, g.p_min, g.p_max, g.np);
    const double det = s.cov_det();
    const double ixx = s.cov_pp / det, ipp = s.cov_xx / det, ixp = -s.cov_xp / det;
    const double norm = 1.0 / (2.0 * pi * std::sqrt(det));
    for (int ix = 0; ix < out.nx; ++ix) {
        const double u = out.x_at(ix) - s.mean_x;
        for (int ip = 0; ip < out.np; ++ip) {
            const double v = out.p_at(ip) - s.mean_p;
            out.at(ix, ip) = norm * std::exp(-0.5 * (ixx * u * u + 2.0 * ixp * u * v + ipp * v * v));
        }
    }
    return out;
}

}  // namespace obliq
