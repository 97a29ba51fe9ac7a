#pragma once

// Truncated Fock-basis machinery: ladder and quadrature matrices, the
// rotation / squeeze / displacement unitaries, squeezed measurement states
// |(x,p)_M>, and the Wigner function of a Fock-basis density matrix.
//
// Truncation corrupts only the highest number sectors, so operator
// identities are asserted on leading sub-blocks and state constructions
// carry a tail-norm guard.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "obliq/grid.hpp"
#include "obliq/sl2.hpp"
#include "obliq/states.hpp"

namespace obliq {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Normalised state vector in the truncated number basis.
struct FockVector {
    ComplexVector coeffs;

    explicit FockVector(ComplexVector c) : coeffs(std::move(c)) {
        if (coeffs.size() < 1) throw std::invalid_argument("FockVector: empty");
        if (std::abs(coeffs.norm() - 1.0) > 1e-9)
            throw std::invalid_argument("FockVector: norm differs from 1 beyond 1e-9");
    }

    int dim() const { return static_cast<int>(coeffs.size()); }

    /// Norm carried by the top eighth (at least two, never the ground
    /// coefficient) of the coefficients; the proxy used to decide whether a
    /// truncation was adequate.
    double tail_norm() const {
        const int d = dim();
        const int start = std::max(1, d - std::max(2, d / 8));
        return coeffs.segment(start, d - start).norm();
    }
};

/// Hermitian, unit-trace, positive-semidefinite matrix in the truncated
/// number basis.
struct FockDensity {
    ComplexMatrix rho;

    explicit FockDensity(ComplexMatrix m) : rho(std::move(m)) {
        if (rho.rows() < 1 || rho.rows() != rho.cols())
            throw std::invalid_argument("FockDensity: matrix must be square and non-empty");
        if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("FockDensity: not Hermitian within 1e-12");
        if (std::abs(rho.trace().real() - 1.0) > 1e-9 || std::abs(rho.trace().imag()) > 1e-9)
            throw std::invalid_argument("FockDensity: trace differs from 1 beyond 1e-9");
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10)
            throw std::invalid_argument("FockDensity: negative eigenvalue beyond -1e-10");
    }

    int dim() const { return static_cast<int>(rho.rows()); }

    static FockDensity pure(const FockVector& v) {
        return FockDensity(v.coeffs * v.coeffs.adjoint());
    }
};

/// |n><n| at the given truncation.
inline FockDensity fock_number_density(int n, int dim) {
    if (dim < 1 || n < 0 || n >= dim)
        throw std::invalid_argument("fock_number_density: need 0 <= n < dim");
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    m(n, n) = 1.0;
    return FockDensity(std::move(m));
}

/// Annihilation and creation matrices; a has sqrt(n) on the superdiagonal.
inline std::pair<ComplexMatrix, ComplexMatrix> fock_ladder(int dim) {
    if (dim < 2) throw std::invalid_argument("fock_ladder: dim must be >= 2");
    ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return {a, a.adjoint()};
}

/// x = (a + a^dag)/sqrt(2).
inline ComplexMatrix quadrature_x(int dim) {
    auto [a, ad] = fock_ladder(dim);
    return (a + ad) / std::sqrt(2.0);
}

/// p = (a - a^dag)/(i sqrt(2)).
inline ComplexMatrix quadrature_p(int dim) {
    auto [a, ad] = fock_ladder(dim);
    return (a - ad) * Complex(0.0, 1.0) / -std::sqrt(2.0);
}

/// U_theta = exp(-i theta a^dag a); diagonal, so the exponential is exact.
inline ComplexMatrix unitary_rotation(double theta, int dim) {
    if (!std::isfinite(theta)) throw std::invalid_argument("unitary_rotation: non-finite theta");
    if (dim < 2) throw std::invalid_argument("unitary_rotation: dim must be >= 2");
    ComplexMatrix u = ComplexMatrix::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) u(n, n) = std::exp(Complex(0.0, -theta * n));
    return u;
}

/// V_phi = exp[(i/2) atanh(tan phi) (a^2 + a^dag^2)], |phi| < pi/4.
inline ComplexMatrix unitary_squeeze_v(double phi, int dim) {
    if (!std::isfinite(phi) || std::abs(phi) >= quarter_pi)
        throw std::invalid_argument("unitary_squeeze_v: need |phi| < pi/4");
    if (dim < 2) throw std::invalid_argument("unitary_squeeze_v: dim must be >= 2");
    auto [a, ad] = fock_ladder(dim);
    const double w = std::atanh(std::tan(phi));
    ComplexMatrix gen = Complex(0.0, 0.5 * w) * (a * a + ad * ad);
    return gen.exp();
}

/// W_lambda = exp[(1/2) ln(lambda) (a^2 - a^dag^2)], lambda > 0.
inline ComplexMatrix unitary_squeeze_w(double lambda, int dim) {
    if (!std::isfinite(lambda) || lambda <= 0.0)
        throw std::invalid_argument("unitary_squeeze_w: lambda must be positive");
    if (dim < 2) throw std::invalid_argument("unitary_squeeze_w: dim must be >= 2");
    auto [a, ad] = fock_ladder(dim);
    ComplexMatrix gen = 0.5 * std::log(lambda) * (a * a - ad * ad);
    return gen.exp();
}

/// D_xp = exp[-i (x p_hat - p x_hat)].
inline ComplexMatrix displacement(double x, double p, int dim) {
    if (!std::isfinite(x) || !std::isfinite(p))
        throw std::invalid_argument("displacement: non-finite arguments");
    if (dim < 2) throw std::invalid_argument("displacement: dim must be >= 2");
    ComplexMatrix gen =
        Complex(0.0, -1.0) * (x * quadrature_p(dim) - p * quadrature_x(dim));
    return gen.exp();
}

namespace detail {

/// D(alpha) applied to a coefficient vector, alpha = (x + ip)/sqrt(2),
/// through the column recurrence
///   D|0>   = coherent(alpha),
///   D|k+1> = (a^dag D|k> - conj(alpha) D|k>) / sqrt(k+1),
/// which follows from a^dag D = D (a^dag + conj(alpha)).  O(dim^2) per call,
/// used where a dense exponential per phase-space point would be wasteful.
inline ComplexVector displace_apply(Complex alpha, const ComplexVector& v) {
    const int dim = static_cast<int>(v.size());
    ComplexVector col(dim), next(dim);
    double norm2 = std::norm(alpha);
    col(0) = std::exp(-0.5 * norm2);
    for (int m = 1; m < dim; ++m) col(m) = col(m - 1) * alpha / std::sqrt(double(m));

    ComplexVector acc = v(0) * col;
    const Complex ac = std::conj(alpha);
    for (int k = 0; k + 1 < dim; ++k) {
        const double inv = 1.0 / std::sqrt(double(k + 1));
        next(0) = -ac * col(0) * inv;
        for (int m = 1; m < dim; ++m)
            next(m) = (std::sqrt(double(m)) * col(m - 1) - ac * col(m)) * inv;
        acc += v(k + 1) * next;
        col.swap(next);
    }
    return acc;
}

}  // namespace detail

/// Per-metric data for building |(x,p)_M>: the zero-obliquity representative
/// and the undisplaced squeezed vacuum U_theta0^dag W_lambda0^dag |0>.
struct SqueezedBasis {
    MetricTensor metric;
    CanonicalParams canonical;
    ComplexVector base;

    SqueezedBasis(const MetricTensor& g, int dim)
        : metric(g), canonical(canonical_orthogonal(g)), base(dim) {
        if (dim < 2) throw std::invalid_argument("SqueezedBasis: dim must be >= 2");
        ComplexVector e0 = ComplexVector::Zero(dim);
        e0(0) = 1.0;
        base = unitary_rotation(canonical.theta, dim).adjoint() *
               (unitary_squeeze_w(canonical.lambda, dim).adjoint() * e0);
    }

    int dim() const { return static_cast<int>(base.size()); }

    /// Norm in the top eighth of the undisplaced basis vector.  Displacement
    /// by the column recurrence reproduces low components exactly, so this is
    /// the quantity that decides whether the truncation was adequate.
    double tail_norm() const {
        const int d = dim();
        const int start = std::max(1, d - std::max(2, d / 8));
        return base.segment(start, d - start).norm();
    }

    /// Displaced vector via the dense exponential (reference path).
    ComplexVector vector_at(double x, double p) const {
        return displacement(x, p, dim()) * base;
    }

    /// Displaced vector via the column recurrence (fast path).
    ComplexVector vector_at_fast(double x, double p) const {
        return detail::displace_apply(Complex(x, p) / std::sqrt(2.0), base);
    }
};

/// |(x,p)_M> = D_xp U_theta0^dag W_lambda0^dag |0> (global phase fixed to
/// zero).  Depends on M only through its metric.  Throws when the truncation
/// is too small for the requested squeezing and displacement.
inline FockVector squeezed_state(const MetricTensor& g, double x, double p, int dim) {
    SqueezedBasis basis(g, dim);
    FockVector v(basis.vector_at(x, p));
    if (v.tail_norm() > 1e-6)
        throw std::runtime_error("squeezed_state: truncation too small (tail norm " +
                                 std::to_string(v.tail_norm()) + ")");
    return v;
}

inline FockVector squeezed_state(const Sl2Matrix& m, double x, double p, int dim) {
    return squeezed_state(metric_of(m), x, p, dim);
}

inline FockVector squeezed_state(const CanonicalParams& params, double x, double p, int dim) {
    return squeezed_state(metric_of(matrix_from_params(params)), x, p, dim);
}

/// || (a_M - (x_M + i p_M)/sqrt(2)) |v> || with a_M built from the truncated
/// quadratures of the zero-obliquity representative of g.
inline double squeezed_state_residual(const FockVector& v, const MetricTensor& g, double x,
                                      double p) {
    const int dim = v.dim();
    const Sl2Matrix m0 = matrix_from_params(canonical_orthogonal(g));
    const ComplexMatrix xq = quadrature_x(dim), pq = quadrature_p(dim);
    const ComplexMatrix xm = m0.m11 * xq + m0.m12 * pq;
    const ComplexMatrix pm = m0.m21 * xq + m0.m22 * pq;
    double xmc, pmc;
    m0.apply(x, p, xmc, pmc);
    const ComplexMatrix am = (xm + Complex(0.0, 1.0) * pm) / std::sqrt(2.0);
    const Complex w = Complex(xmc, pmc) / std::sqrt(2.0);
    return (am * v.coeffs - w * v.coeffs).norm();
}

/// Fock-basis copy of a pure Gaussian state (det cov = 1/4): the metric
/// g = cov^{-1}/2 has unit determinant, and the state is the squeezed
/// vector of that metric displaced to the mean.
inline FockVector gaussian_pure_to_fock(const GaussianState& s, int dim) {
    const double det = s.cov_det();
    if (std::abs(4.0 * det - 1.0) > 1e-6)
        throw std::invalid_argument("gaussian_pure_to_fock: state is not pure (det cov != 1/4)");
    const MetricTensor g(s.cov_pp / (2.0 * det), s.cov_xx / (2.0 * det),
                         -s.cov_xp / (2.0 * det));
    return squeezed_state(g, s.mean_x, s.mean_p, dim);
}

/// First and second phase-space moments of a Fock-basis density matrix
/// (cross moment symmetrised).
struct FockMoments {
    double mean_x, mean_p;
    double cov_xx, cov_xp, cov_pp;
};

inline FockMoments fock_moments(const FockDensity& rho) {
    const int dim = rho.dim();
    const ComplexMatrix xq = quadrature_x(dim), pq = quadrature_p(dim);
    const auto ev = [&](const ComplexMatrix& op) { return (rho.rho * op).trace().real(); };
    const double mx = ev(xq), mp = ev(pq);
    const double xx = ev(xq * xq) - mx * mx;
    const double pp = ev(pq * pq) - mp * mp;
    const double xp = 0.5 * ev(xq * pq + pq * xq) - mx * mp;
    return {mx, mp, xx, xp, pp};
}

/// Wigner function of a truncated density matrix on the layout of `g`,
/// normalised so the full-plane integral is Tr rho = 1.  Uses the
/// displaced-parity expansion
///   W(x,p) = (1/pi) sum_{mn} rho_mn (-1)^m <n| D(2 alpha) |m>,
/// alpha = (x + ip)/sqrt(2), with Laguerre-form displacement elements.
inline PhaseSpaceGrid wigner_fock(const FockDensity& rho, const PhaseSpaceGrid& g) {
    const int dim = rho.dim();
    if (dim < 1) throw std::invalid_argument("wigner_fock: dim must be >= 1");
    PhaseSpaceGrid out(g.x_min, g.x_max, g.nx, g.p_min, g.p_max, g.np);

    // sqrt(m!/n!) for n >= m, flattened over pairs
    std::vector<double> ratio(static_cast<size_t>(dim) * dim, 0.0);
    for (int m = 0; m < dim; ++m) {
        double r = 1.0;
        for (int n = m; n < dim; ++n) {
            if (n > m) r /= std::sqrt(static_cast<double>(n));
            ratio[static_cast<size_t>(m) * dim + n] = r;
        }
    }

#pragma omp parallel for schedule(dynamic)
    for (int ix = 0; ix < out.nx; ++ix) {
        for (int ip = 0; ip < out.np; ++ip) {
            const Complex alpha = Complex(out.x_at(ix), out.p_at(ip)) / std::sqrt(2.0);
            const Complex beta = 2.0 * alpha;
            const double t = std::norm(beta);
            double sum = 0.0;
            for (int m = 0; m < dim; ++m) {
                const double par = (m % 2 == 0) ? 1.0 : -1.0;
                const double dmm = rho.rho(m, m).real();
                if (dmm != 0.0)
                    sum += par * dmm * std::assoc_laguerre(unsigned(m), 0u, t);
                Complex bp = beta;
                for (int n = m + 1; n < dim; ++n) {
                    const Complex rmn = rho.rho(m, n);
                    if (rmn != 0.0) {
                        // <n|D(beta)|m> = sqrt(m!/n!) beta^{n-m} e^{-t/2} L_m^{n-m}(t);
                        // paired with its conjugate transpose term.
                        const Complex dnm = ratio[static_cast<size_t>(m) * dim + n] * bp *
                                            std::assoc_laguerre(unsigned(m), unsigned(n - m), t);
                        sum += 2.0 * par * (rmn * dnm).real();
                    }
                    bp *= beta;
                }
            }
            out.at(ix, ip) = sum * std::exp(-0.5 * t) / pi;
        }
    }
    return out;
}

}  // namespace obliq
