#pragma once

// The outcome distribution Q_M of a balanced simultaneous quadrature
// measurement with matrix M, computed three independent ways:
//   convolution  — smooth a sampled Wigner function with the kernel
//                  (1/pi) exp[-(a dx^2 + 2c dx dp + b dp^2)], (a,c;c,b) = M^T M
//   overlap      — (1/2pi) <(x,p)_M| rho |(x,p)_M> in the Fock basis
//   closed_form  — for Gaussian states, covariance grows by G^{-1}/2
// plus the rho_M coordinate view and the smoothing-scale diagnostics.
// The three routes share no numerics, so they cross-check one another.

#include <cmath>
#include <complex>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "obliq/fock.hpp"
#include "obliq/grid.hpp"
#include "obliq/sl2.hpp"
#include "obliq/states.hpp"

namespace obliq {

enum class HusimiMethod { convolution, overlap, closed_form };

inline const char* to_string(HusimiMethod m) {
    switch (m) {
        case HusimiMethod::convolution: return "convolution";
        case HusimiMethod::overlap: return "overlap";
        case HusimiMethod::closed_form: return "closed_form";
    }
    return "unknown";
}

/// Q_M sampled on a grid.  Values are a probability density; anything below
/// -1e-9 indicates a kernel or determinant bug and is rejected.
struct HusimiResult {
    PhaseSpaceGrid grid;
    MetricTensor metric;
    HusimiMethod method;

    HusimiResult(PhaseSpaceGrid g, const MetricTensor& m, HusimiMethod meth)
        : grid(std::move(g)), metric(m), method(meth) {
        if (grid.min_value() < -1e-9)
            throw std::runtime_error("HusimiResult: negative density beyond round-off (" +
                                     std::to_string(grid.min_value()) + ")");
    }

    double integral() const { return grid.integral(); }
    double min_value() const { return grid.min_value(); }
};

enum class ConvolutionBackend { automatic, direct, spectral };

namespace detail {

// Kernel support: the 6-sigma ellipse a dx^2 + 2c dx dp + b dp^2 <= 18
// (the kernel Gaussian has covariance G^{-1}/2, so the quadratic form equals
// r^2/2 at Mahalanobis radius r; the mass outside is below 1e-8).
inline constexpr double kernel_cut = 18.0;

struct KernelWindow {
    int wx, wp;  // half-widths in grid points
};

inline KernelWindow kernel_window(const MetricTensor& g, double hx, double hp) {
    // extreme |dx| on the ellipse is sqrt(cut * b) since (G^{-1})_11 = b
    return {static_cast<int>(std::floor(std::sqrt(kernel_cut * g.b) / hx)),
            static_cast<int>(std::floor(std::sqrt(kernel_cut * g.a) / hp))};
}

inline void check_sampling(const MetricTensor& g, double hx, double hp) {
    // narrowest kernel direction has std 1/sqrt(2 eig_max); require two
    // samples per 1/sqrt(eig_max)
    const double h_limit = 0.5 / std::sqrt(g.eigen_max());
    if (std::max(hx, hp) > h_limit)
        throw std::invalid_argument(
            "husimi_convolution: grid spacing " + std::to_string(std::max(hx, hp)) +
            " exceeds kernel sampling limit " + std::to_string(h_limit));
}

// Direct summation.  For each output point the inner loop walks the exact
// kernel ellipse column by column; along a column the kernel values form a
// doubly geometric sequence
//   K(dp - h) = K(dp) * r,   r_{next} = r * exp(-2 b h^2),
// so one exp anchors each column and the rest is multiplicative.
inline PhaseSpaceGrid convolve_direct(const PhaseSpaceGrid& w, const MetricTensor& g) {
    const double hx = w.dx(), hp = w.dp();
    const auto [wx, wp] = kernel_window(g, hx, hp);
    PhaseSpaceGrid out(w.x_min, w.x_max, w.nx, w.p_min, w.p_max, w.np);

    const double rr = std::exp(-2.0 * g.b * hp * hp);
    const double cell = hx * hp / pi;

#pragma omp parallel for schedule(dynamic)
    for (int ix = 0; ix < w.nx; ++ix) {
        for (int op = 0; op < w.np; ++op) {
            double acc = 0.0;
            const int jx_lo = std::max(0, ix - wx), jx_hi = std::min(w.nx - 1, ix + wx);
            for (int jx = jx_lo; jx <= jx_hi; ++jx) {
                const double dx = (ix - jx) * hx;
                // b dp^2 + 2c dx dp + (a dx^2 - cut) <= 0
                const double disc = g.c * g.c * dx * dx - g.b * (g.a * dx * dx - kernel_cut);
                if (disc <= 0.0) continue;
                const double root = std::sqrt(disc);
                const double dp_lo = (-g.c * dx - root) / g.b;
                const double dp_hi = (-g.c * dx + root) / g.b;
                // dp = p_out - p_in decreases as jp grows
                int jp_lo = std::max({0, op - wp,
                                      static_cast<int>(std::ceil((op * hp - dp_hi) / hp))});
                int jp_hi = std::min({w.np - 1, op + wp,
                                      static_cast<int>(std::floor((op * hp - dp_lo) / hp))});
                if (jp_lo > jp_hi) continue;
                double dp = (op - jp_lo) * hp;
                double k = std::exp(-(g.a * dx * dx + 2.0 * g.c * dx * dp + g.b * dp * dp));
                double r = std::exp(2.0 * g.c * dx * hp + 2.0 * g.b * dp * hp - g.b * hp * hp);
                const double* row = &w.values[static_cast<size_t>(jx) * w.np];
                for (int jp = jp_lo; jp <= jp_hi; ++jp) {
                    acc += k * row[jp];
                    k *= r;
                    r *= rr;
                }
            }
            out.at(ix, op) = acc * cell;
        }
    }
    return out;
}

inline int next_fast_size(int n) {
    for (;; ++n) {
        int m = n;
        for (int f : {2, 3, 5, 7})
            while (m % f == 0) m /= f;
        if (m == 1) return n;
    }
}

// FFT convolution with zero padding past the kernel half-width, so the
// circular product reproduces the linear sum exactly.  The kernel is the
// same 6-sigma-truncated lattice sample the direct path uses.
inline PhaseSpaceGrid convolve_spectral(const PhaseSpaceGrid& w, const MetricTensor& g) {
    const double hx = w.dx(), hp = w.dp();
    const auto [wx, wp] = kernel_window(g, hx, hp);
    const int NX = next_fast_size(w.nx + 2 * wx + 1);
    const int NP = next_fast_size(w.np + 2 * wp + 1);
    const int NPC = NP / 2 + 1;

    std::vector<double> in(static_cast<size_t>(NX) * NP, 0.0);
    std::vector<double> ker(static_cast<size_t>(NX) * NP, 0.0);
    for (int ix = 0; ix < w.nx; ++ix)
        for (int ip = 0; ip < w.np; ++ip)
            in[static_cast<size_t>(ix) * NP + ip] = w.at(ix, ip);
    for (int di = -wx; di <= wx; ++di) {
        const double dx = di * hx;
        for (int dj = -wp; dj <= wp; ++dj) {
            const double dp = dj * hp;
            const double q = g.a * dx * dx + 2.0 * g.c * dx * dp + g.b * dp * dp;
            if (q > kernel_cut) continue;
            const int i = (di + NX) % NX, j = (dj + NP) % NP;
            ker[static_cast<size_t>(i) * NP + j] = std::exp(-q);
        }
    }

    std::vector<std::complex<double>> fin(static_cast<size_t>(NX) * NPC);
    std::vector<std::complex<double>> fker(static_cast<size_t>(NX) * NPC);
    fftw_plan pf = fftw_plan_dft_r2c_2d(NX, NP, in.data(),
                                        reinterpret_cast<fftw_complex*>(fin.data()),
                                        FFTW_ESTIMATE);
    fftw_plan pk = fftw_plan_dft_r2c_2d(NX, NP, ker.data(),
                                        reinterpret_cast<fftw_complex*>(fker.data()),
                                        FFTW_ESTIMATE);
    fftw_execute(pf);
    fftw_execute(pk);
    fftw_destroy_plan(pf);
    fftw_destroy_plan(pk);

    const double scale = hx * hp / (pi * NX * NP);
    for (size_t i = 0; i < fin.size(); ++i) fin[i] *= fker[i] * scale;

    fftw_plan pb = fftw_plan_dft_c2r_2d(NX, NP, reinterpret_cast<fftw_complex*>(fin.data()),
                                        in.data(), FFTW_ESTIMATE);
    fftw_execute(pb);
    fftw_destroy_plan(pb);

    PhaseSpaceGrid out(w.x_min, w.x_max, w.nx, w.p_min, w.p_max, w.np);
    for (int ix = 0; ix < w.nx; ++ix)
        for (int ip = 0; ip < w.np; ++ip)
            out.at(ix, ip) = in[static_cast<size_t>(ix) * NP + ip];
    return out;
}

}  // namespace detail

/// Discrete quadrature of Q(x,p) = (1/pi) int exp[-(a dx^2 + 2c dxdp + b dp^2)]
/// W(x',p') dx'dp' on the input lattice.  The caller supplies a Wigner grid
/// padded so the kernel support around the reported region stays inside;
/// mass leakage beyond 1e-3 of the input integral is reported on stderr.
inline HusimiResult husimi_convolution(const PhaseSpaceGrid& w, const MetricTensor& g,
                                       ConvolutionBackend backend = ConvolutionBackend::automatic) {
    detail::check_sampling(g, w.dx(), w.dp());
    if (backend == ConvolutionBackend::automatic) {
        // the kernel ellipse covers pi * cut / (hx hp) lattice points (det = 1)
        const double direct_ops = static_cast<double>(w.nx) * w.np *
                                  (pi * detail::kernel_cut / (w.dx() * w.dp()));
        backend = direct_ops <= 2.5e8 ? ConvolutionBackend::direct
                                      : ConvolutionBackend::spectral;
    }
    PhaseSpaceGrid q = backend == ConvolutionBackend::direct ? detail::convolve_direct(w, g)
                                                             : detail::convolve_spectral(w, g);
    const double in_mass = w.integral(), out_mass = q.integral();
    if (std::abs(out_mass - in_mass) > 1e-3 * std::max(1.0, std::abs(in_mass)))
        std::cerr << "husimi_convolution: mass leakage, input integral " << in_mass
                  << " vs output " << out_mass << " (grid likely under-padded)\n";
    return {std::move(q), g, HusimiMethod::convolution};
}

/// Q_M at chosen points as squeezed-state overlaps (1/2pi) <v| rho |v>.
inline std::vector<double> husimi_overlap(const FockDensity& rho, const Sl2Matrix& m,
                                          const std::vector<std::pair<double, double>>& points) {
    const MetricTensor g = metric_of(m);
    SqueezedBasis basis(g, rho.dim());
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& [x, p] : points) {
        FockVector v(basis.vector_at(x, p));
        if (v.tail_norm() > 1e-6)
            throw std::runtime_error("husimi_overlap: truncation too small at probe point");
        const Complex q = v.coeffs.dot(rho.rho * v.coeffs);  // dot conjugates the left side
        if (std::abs(q.imag()) > 1e-10)
            throw std::runtime_error("husimi_overlap: non-real overlap value");
        out.push_back(q.real() / (2.0 * pi));
    }
    return out;
}

/// Q_M over a whole grid; same quantity as husimi_overlap but the
/// displacements go through the column recurrence instead of one dense
/// exponential per lattice point.
inline HusimiResult husimi_overlap_grid(const FockDensity& rho, const Sl2Matrix& m,
                                        const PhaseSpaceGrid& layout) {
    const MetricTensor g = metric_of(m);
    SqueezedBasis basis(g, rho.dim());
    if (basis.tail_norm() > 1e-6)
        throw std::runtime_error("husimi_overlap_grid: truncation too small for this metric");
    PhaseSpaceGrid out(layout.x_min, layout.x_max, layout.nx, layout.p_min, layout.p_max,
                       layout.np);
#pragma omp parallel for schedule(dynamic)
    for (int ix = 0; ix < out.nx; ++ix) {
        for (int ip = 0; ip < out.np; ++ip) {
            ComplexVector v = basis.vector_at_fast(out.x_at(ix), out.p_at(ip));
            out.at(ix, ip) = v.dot(rho.rho * v).real() / (2.0 * pi);
        }
    }
    return {std::move(out), g, HusimiMethod::overlap};
}

/// Closed form for Gaussian states: the outcome distribution is Gaussian
/// with the same mean and covariance cov + G^{-1}/2 = cov + (b,-c;-c,a)/2.
inline GaussianState husimi_gaussian_closed(const GaussianState& s, const MetricTensor& g) {
    return {s.mean_x, s.mean_p, s.cov_xx + 0.5 * g.b, s.cov_xp - 0.5 * g.c,
            s.cov_pp + 0.5 * g.a};
}

/// Closed-form Q_M sampled on a grid layout.
inline HusimiResult husimi_closed_grid(const GaussianState& s, const MetricTensor& g,
                                       const PhaseSpaceGrid& layout) {
    return {wigner_gaussian(husimi_gaussian_closed(s, g), layout), g,
            HusimiMethod::closed_form};
}

/// rho_M(x_M, p_M) = Q_M(M^{-1}(x_M, p_M)), interpolated off the Q grid.
inline double rho_m_view(const HusimiResult& q, const Sl2Matrix& m, double x_m, double p_m) {
    double x, p;
    m.inverse().apply(x_m, p_m, x, p);
    return q.grid.interpolate(x, p);
}

/// Canonical axis angle plus the smoothing lengths: lambda0 along x_theta0,
/// 1/lambda0 along p_theta0.
struct SmoothingScales {
    double theta0;
    double lambda0;
    double scale_x;
    double scale_p;
};

inline SmoothingScales smoothing_scales(const MetricTensor& g) {
    const CanonicalParams c = canonical_orthogonal(g);
    return {c.theta, c.lambda, c.lambda, 1.0 / c.lambda};
}

}  // namespace obliq
