#pragma once

// Synthetic measurement outcomes drawn from Q_M.  Gaussian targets are
// sampled exactly through the closed form; Fock-basis targets go through
// rejection against an inflated Gaussian proposal.  The generator is
// mt19937_64 with a hand-rolled 53-bit uniform and Box-Muller transform, so
// a seed reproduces the same bytes on any conforming implementation.

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

#include "obliq/fock.hpp"
#include "obliq/grid.hpp"
#include "obliq/husimi.hpp"
#include "obliq/sl2.hpp"
#include "obliq/states.hpp"

namespace obliq {

namespace detail {

class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {  // in [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    std::array<double, 2> normal_pair() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2.0 * pi * u2), r * std::sin(2.0 * pi * u2)};
    }

private:
    std::mt19937_64 eng_;
};

struct Cholesky2 {
    double l11, l21, l22;

    Cholesky2(double cxx, double cxp, double cpp) {
        if (cxx <= 0.0) throw std::invalid_argument("Cholesky2: matrix not positive definite");
        l11 = std::sqrt(cxx);
        l21 = cxp / l11;
        const double rest = cpp - l21 * l21;
        if (rest <= 0.0) throw std::invalid_argument("Cholesky2: matrix not positive definite");
        l22 = std::sqrt(rest);
    }

    std::array<double, 2> apply(const std::array<double, 2>& z) const {
        return {l11 * z[0], l21 * z[0] + l22 * z[1]};
    }
};

}  // namespace detail

struct OutcomeBatch {
    std::vector<std::array<double, 2>> samples;
    MetricTensor metric;
    std::uint64_t seed;

    int count() const { return static_cast<int>(samples.size()); }

    /// CSV: header "# <seed> <n> <a> <b> <c>", then n lines "x p".
    void write_csv(std::ostream& os) const {
        os << "# " << seed << ' ' << count() << ' ' << metric.a << ' ' << metric.b << ' '
           << metric.c << '\n';
        os.precision(17);
        for (const auto& s : samples) os << s[0] << ' ' << s[1] << '\n';
    }
};

/// Exact draws from the closed-form Gaussian outcome law.
inline OutcomeBatch sample_gaussian(const GaussianState& state, const MetricTensor& g, int n,
                                    std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_gaussian: n must be >= 1");
    const GaussianState law = husimi_gaussian_closed(state, g);
    const detail::Cholesky2 chol(law.cov_xx, law.cov_xp, law.cov_pp);
    detail::GaussianRng rng(seed);
    OutcomeBatch batch{{}, g, seed};
    batch.samples.reserve(n);
    for (int i = 0; i < n; ++i) {
        const auto v = chol.apply(rng.normal_pair());
        batch.samples.push_back({law.mean_x + v[0], law.mean_p + v[1]});
    }
    return batch;
}

/// Rejection sampling of the Fock-state outcome law.  The proposal is the
/// closed-form Gaussian of a state matching the first two moments of rho,
/// with covariance inflated by 1.5 so its tails dominate; the envelope
/// constant is calibrated on a probe lattice with a safety margin.  Fails
/// rather than loops when the acceptance rate falls below 1e-3.
inline OutcomeBatch sample_fock(const FockDensity& rho, const Sl2Matrix& m, int n,
                                std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_fock: n must be >= 1");
    const MetricTensor g = metric_of(m);
    const FockMoments mom = fock_moments(rho);

    // target covariance of Q, then the 1.5-inflated proposal
    const double qxx = mom.cov_xx + 0.5 * g.b;
    const double qxp = mom.cov_xp - 0.5 * g.c;
    const double qpp = mom.cov_pp + 0.5 * g.a;
    const double pxx = 1.5 * qxx, pxp = 1.5 * qxp, ppp = 1.5 * qpp;
    const double pdet = pxx * ppp - pxp * pxp;
    const double pnorm = 1.0 / (2.0 * pi * std::sqrt(pdet));
    const auto proposal_density = [&](double x, double p) {
        const double u = x - mom.mean_x, v = p - mom.mean_p;
        const double q = (ppp * u * u - 2.0 * pxp * u * v + pxx * v * v) / pdet;
        return pnorm * std::exp(-0.5 * q);
    };

    SqueezedBasis basis(g, rho.dim());
    if (basis.tail_norm() > 1e-6)
        throw std::runtime_error("sample_fock: truncation too small for this metric");
    const auto target_density = [&](double x, double p) {
        ComplexVector v = basis.vector_at_fast(x, p);
        return std::max(0.0, v.dot(rho.rho * v).real()) / (2.0 * pi);
    };

    // envelope constant from a probe lattice out to 5 proposal sigmas
    const double sx = 5.0 * std::sqrt(pxx), sp = 5.0 * std::sqrt(ppp);
    double ratio_max = 0.0;
    for (int i = 0; i <= 20; ++i) {
        for (int j = 0; j <= 20; ++j) {
            const double x = mom.mean_x - sx + 2.0 * sx * i / 20.0;
            const double p = mom.mean_p - sp + 2.0 * sp * j / 20.0;
            ratio_max = std::max(ratio_max, target_density(x, p) / proposal_density(x, p));
        }
    }
    const double envelope = 1.25 * ratio_max;
    if (!(envelope > 0.0)) throw std::runtime_error("sample_fock: degenerate target density");

    const detail::Cholesky2 chol(pxx, pxp, ppp);
    detail::GaussianRng rng(seed);
    OutcomeBatch batch{{}, g, seed};
    batch.samples.reserve(n);
    long trials = 0;
    while (batch.count() < n) {
        const auto z = chol.apply(rng.normal_pair());
        const double x = mom.mean_x + z[0], p = mom.mean_p + z[1];
        ++trials;
        if (rng.uniform() * envelope * proposal_density(x, p) <= target_density(x, p))
            batch.samples.push_back({x, p});
        if (trials >= 4000 && static_cast<double>(batch.count()) < 1e-3 * trials)
            throw std::runtime_error("sample_fock: acceptance rate below 1e-3 (proposal mismatch)");
    }
    return batch;
}

struct SampleStats {
    double mean_x, mean_p;
    double cov_xx, cov_xp, cov_pp;  // unbiased
};

inline SampleStats outcome_stats(const OutcomeBatch& batch) {
    const int n = batch.count();
    if (n < 2) throw std::invalid_argument("outcome_stats: need at least two samples");
    double mx = 0.0, mp = 0.0;
    for (const auto& s : batch.samples) {
        mx += s[0];
        mp += s[1];
    }
    mx /= n;
    mp /= n;
    double cxx = 0.0, cxp = 0.0, cpp = 0.0;
    for (const auto& s : batch.samples) {
        const double u = s[0] - mx, v = s[1] - mp;
        cxx += u * u;
        cxp += u * v;
        cpp += v * v;
    }
    return {mx, mp, cxx / (n - 1), cxp / (n - 1), cpp / (n - 1)};
}

}  // namespace obliq
