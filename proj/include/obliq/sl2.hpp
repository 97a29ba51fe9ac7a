#pragma once

// Exact algebra of SL(2,R) measurement matrices: the (theta, phi, lambda)
// parameterization, rotation/squeeze factorization, the phase-space metric
// M^T M, informational equivalence, and canonical orthogonal representatives.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace obliq {

inline constexpr double pi = std::numbers::pi;
inline constexpr double half_pi = pi / 2.0;
inline constexpr double quarter_pi = pi / 4.0;

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double t) {
    if (!std::isfinite(t)) throw std::invalid_argument("wrap_angle: non-finite angle");
    double r = std::remainder(t, 2.0 * pi);  // in [-pi, pi]
    if (r <= -pi) r = pi;
    return r;
}

inline double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

/// Rotation theta in (-pi, pi], obliquity phi in (-pi/4, pi/4), resolution
/// lambda > 0. The obliquity boundary is excluded (sec 2phi diverges there).
struct CanonicalParams {
    double theta;
    double phi;
    double lambda;

    CanonicalParams(double theta_, double phi_, double lambda_)
        : theta(wrap_angle(theta_)), phi(phi_), lambda(lambda_) {
        if (!std::isfinite(phi) || std::abs(phi) >= quarter_pi)
            throw std::invalid_argument("CanonicalParams: |phi| must be < pi/4");
        if (!std::isfinite(lambda) || lambda <= 0.0)
            throw std::invalid_argument("CanonicalParams: lambda must be positive");
    }
};

/// Real 2x2 matrix with unit determinant. The constructor rejects anything
/// whose determinant strays from 1 beyond relative 1e-9.
struct Sl2Matrix {
    double m11, m12, m21, m22;

    Sl2Matrix(double a11, double a12, double a21, double a22)
        : m11(a11), m12(a12), m21(a21), m22(a22) {
        if (!std::isfinite(m11) || !std::isfinite(m12) || !std::isfinite(m21) ||
            !std::isfinite(m22))
            throw std::invalid_argument("Sl2Matrix: non-finite entry");
        const double d = det();
        const double scale = std::max(1.0, std::abs(m11 * m22) + std::abs(m12 * m21));
        if (std::abs(d - 1.0) > 1e-9 * scale)
            throw std::invalid_argument("Sl2Matrix: determinant " + std::to_string(d) +
                                        " is not 1 within tolerance");
    }

    double det() const { return m11 * m22 - m12 * m21; }

    double max_abs() const {
        return std::max(std::max(std::abs(m11), std::abs(m12)),
                        std::max(std::abs(m21), std::abs(m22)));
    }

    // Unit determinant makes the adjugate the exact inverse.
    Sl2Matrix inverse() const { return {m22, -m12, -m21, m11}; }

    Sl2Matrix operator*(const Sl2Matrix& o) const {
        return {m11 * o.m11 + m12 * o.m21, m11 * o.m12 + m12 * o.m22,
                m21 * o.m11 + m22 * o.m21, m21 * o.m12 + m22 * o.m22};
    }

    /// Apply to a phase-space point, returning (x_M, p_M).
    void apply(double x, double p, double& xm, double& pm) const {
        xm = m11 * x + m12 * p;
        pm = m21 * x + m22 * p;
    }

    static Sl2Matrix identity() { return {1.0, 0.0, 0.0, 1.0}; }

    /// R_theta.
    static Sl2Matrix rotation(double theta) {
        const double c = std::cos(theta), s = std::sin(theta);
        return {c, s, -s, c};
    }

    /// S_phi, the symmetric oblique squeeze, |phi| < pi/4.
    static Sl2Matrix obliquity(double phi) {
        if (std::abs(phi) >= quarter_pi)
            throw std::invalid_argument("Sl2Matrix::obliquity: |phi| must be < pi/4");
        const double k = std::sqrt(1.0 / std::cos(2.0 * phi));
        const double c = std::cos(phi), s = std::sin(phi);
        return {k * c, k * s, k * s, k * c};
    }

    /// T_lambda = diag(1/lambda, lambda), lambda > 0.
    static Sl2Matrix resolution(double lambda) {
        if (!(lambda > 0.0))
            throw std::invalid_argument("Sl2Matrix::resolution: lambda must be positive");
        return {1.0 / lambda, 0.0, 0.0, lambda};
    }
};

/// Entries (a, c; c, b) of M^T M with a, b > 0 and ab - c^2 = 1.  Complete
/// invariant of an informational-equivalence class, and the quadratic form
/// of the smoothing kernel.
struct MetricTensor {
    double a, b, c;

    MetricTensor(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {
        if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
            throw std::invalid_argument("MetricTensor: non-finite entry");
        if (a <= 0.0 || b <= 0.0)
            throw std::invalid_argument("MetricTensor: a and b must be positive");
        const double scale = std::max(1.0, std::abs(a * b) + c * c);
        if (std::abs(a * b - c * c - 1.0) > 1e-9 * scale)
            throw std::invalid_argument("MetricTensor: ab - c^2 must be 1");
    }

    static MetricTensor identity() { return {1.0, 1.0, 0.0}; }

    double max_abs_diff(const MetricTensor& o) const {
        return std::max(std::max(std::abs(a - o.a), std::abs(b - o.b)),
                        std::abs(c - o.c));
    }

    /// Larger eigenvalue; the smaller one is its reciprocal (det = 1).
    double eigen_max() const {
        const double d = std::sqrt((a - b) * (a - b) + 4.0 * c * c);
        return 0.5 * ((a + b) + d);
    }
};

/// M = sqrt(sec 2phi) * [ (1/l) cos(t+f), (1/l) sin(t+f);
///                        -l sin(t-f),    l cos(t-f) ].
inline Sl2Matrix matrix_from_params(const CanonicalParams& p) {
    const double k = std::sqrt(1.0 / std::cos(2.0 * p.phi));
    const double sum = p.theta + p.phi, diff = p.theta - p.phi;
    return {k / p.lambda * std::cos(sum), k / p.lambda * std::sin(sum),
            -k * p.lambda * std::sin(diff), k * p.lambda * std::cos(diff)};
}

/// Invert the parameterization.  Row directions give theta +/- phi through
/// atan2 (rows are alpha(cos(t+f), sin(t+f)) and beta(-sin(t-f), cos(t-f))
/// with alpha, beta > 0), the first row norm fixes lambda.  When the
/// half-sum/half-difference land outside the obliquity band both angles are
/// off by pi together, so one joint shift repairs them.
inline CanonicalParams params_from_matrix(const Sl2Matrix& m) {
    const double n1 = std::hypot(m.m11, m.m12);
    const double n2 = std::hypot(m.m21, m.m22);
    if (!(n1 > 0.0) || !(n2 > 0.0))
        throw std::runtime_error("params_from_matrix: zero row norm");

    const double sum = std::atan2(m.m12, m.m11);    // theta + phi (mod 2pi)
    const double diff = std::atan2(-m.m21, m.m22);  // theta - phi (mod 2pi)
    double theta = 0.5 * (sum + diff);
    double phi = 0.5 * (sum - diff);
    if (phi <= -0.75 * pi) {
        phi += pi;
        theta += pi;
    } else if (phi >= 0.75 * pi) {
        phi -= pi;
        theta += pi;
    }
    if (std::abs(phi) >= quarter_pi)
        throw std::runtime_error("params_from_matrix: obliquity out of range (matrix not in SL(2,R)?)");

    const double lambda = std::sqrt(1.0 / std::cos(2.0 * phi)) / n1;
    CanonicalParams p(theta, phi, lambda);

    const Sl2Matrix r = matrix_from_params(p);
    const double tol = 1e-10 * std::max(1.0, m.max_abs());
    if (std::abs(r.m11 - m.m11) > tol || std::abs(r.m12 - m.m12) > tol ||
        std::abs(r.m21 - m.m21) > tol || std::abs(r.m22 - m.m22) > tol)
        throw std::runtime_error("params_from_matrix: reconstruction failed tolerance");
    return p;
}

inline MetricTensor metric_of(const Sl2Matrix& m) {
    return {m.m11 * m.m11 + m.m21 * m.m21, m.m12 * m.m12 + m.m22 * m.m22,
            m.m11 * m.m12 + m.m21 * m.m22};
}

/// T_lambda * S_phi * R_theta factorization of M.
struct Decomposition {
    Sl2Matrix t_lambda;
    Sl2Matrix s_phi;
    Sl2Matrix r_theta;
    CanonicalParams params;
};

inline Decomposition decompose(const Sl2Matrix& m) {
    const CanonicalParams p = params_from_matrix(m);
    return {Sl2Matrix::resolution(p.lambda), Sl2Matrix::obliquity(p.phi),
            Sl2Matrix::rotation(p.theta), p};
}

/// Two measurements are informationally equivalent iff M'^T M' = M^T M.
inline bool are_equivalent(const Sl2Matrix& m, const Sl2Matrix& m2, double tol = 1e-9) {
    return metric_of(m).max_abs_diff(metric_of(m2)) <= tol;
}

/// L L^T = 1 within tol: unit row norms and orthogonal rows.
inline bool is_rotation(const Sl2Matrix& l, double tol = 1e-9) {
    const double n1 = l.m11 * l.m11 + l.m12 * l.m12;
    const double n2 = l.m21 * l.m21 + l.m22 * l.m22;
    const double dot = l.m11 * l.m21 + l.m12 * l.m22;
    return std::abs(n1 - 1.0) <= tol && std::abs(n2 - 1.0) <= tol && std::abs(dot) <= tol;
}

/// L = M2 * M^{-1}; a rotation exactly when M and M2 are equivalent.
inline Sl2Matrix pointer_transform(const Sl2Matrix& m, const Sl2Matrix& m2) {
    return m2 * m.inverse();
}

/// N = diag(1/tau, tau) * M; trades accuracy between the two quadratures.
inline Sl2Matrix rebalance(const Sl2Matrix& m, double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw std::invalid_argument("rebalance: tau must be positive");
    return {m.m11 / tau, m.m12 / tau, m.m21 * tau, m.m22 * tau};
}

/// theta mod pi/2, in [0, pi/2).
inline double mod_half_pi(double theta) {
    if (!std::isfinite(theta)) throw std::invalid_argument("mod_half_pi: non-finite angle");
    double r = std::fmod(theta, half_pi);
    if (r < 0.0) r += half_pi;
    return r;
}

namespace detail {

// M0^T M0 with M0 built from (theta0, phi = 0, lambda0):
//   a = cos^2/l^2 + l^2 sin^2,  b = sin^2/l^2 + l^2 cos^2,
//   c = (1/l^2 - l^2) sin cos.
inline bool orthogonal_rep_matches(double theta0, double lam0, const MetricTensor& g,
                                   double tol) {
    const double inv = 1.0 / (lam0 * lam0), sq = lam0 * lam0;
    const double c = std::cos(theta0), s = std::sin(theta0);
    const double a = inv * c * c + sq * s * s;
    const double b = inv * s * s + sq * c * c;
    const double x = (inv - sq) * s * c;
    return std::abs(a - g.a) <= tol && std::abs(b - g.b) <= tol && std::abs(x - g.c) <= tol;
}

}  // namespace detail

/// Zero-obliquity representative (theta0, 0, lambda0) of the equivalence
/// class of g, from
///   a - b = (1/l0^2 - l0^2) cos 2t0,   a + b = 1/l0^2 + l0^2,
///   2c    = (1/l0^2 - l0^2) sin 2t0.
/// For b != a, lambda0^2 is the root of t^2 - (a+b) t + 1 = 0 on the side
/// selected by sign(a - b); the complementary root is its exact reciprocal,
/// which is how the ill-conditioned branch is evaluated.  The angle follows
/// from the two right-hand sides, whose common factor has sign(a - b), so
///   2 theta0 = atan2(sign(a-b) * 2c, |a - b|).
/// The result is verified against g and a quarter-turn/reflection fallback
/// is tried before reporting failure.
inline CanonicalParams canonical_orthogonal(const MetricTensor& g) {
    double theta0, lam0;
    if (std::abs(g.a - g.b) <= 4.0 * std::numeric_limits<double>::epsilon() * (g.a + g.b)) {
        theta0 = -quarter_pi;
        lam0 = std::sqrt(g.a + g.c);  // a + c > 0: a = sqrt(1 + c^2) > |c|
    } else {
        const double s = sign_of(g.a - g.b);
        // (a+b)^2 - 4 = (a-b)^2 + 4c^2 when ab - c^2 = 1; the right-hand
        // form stays exact for near-identity metrics
        const double sqrt_disc = std::hypot(g.a - g.b, 2.0 * g.c);
        const double big = 0.5 * ((g.a + g.b) + sqrt_disc);
        lam0 = std::sqrt(s > 0.0 ? 1.0 / big : big);
        theta0 = 0.5 * std::atan2(s * 2.0 * g.c, std::abs(g.a - g.b));
    }

    const double tol = 1e-10 * std::max(1.0, std::max(g.a, g.b));
    for (double cand : {theta0, theta0 + half_pi, theta0 - half_pi, -theta0}) {
        if (detail::orthogonal_rep_matches(cand, lam0, g, tol))
            return {cand, 0.0, lam0};
    }
    throw std::runtime_error("canonical_orthogonal: representative failed to reconstruct metric");
}

struct BalancedRep {
    double theta0;
    double lambda0;
};

/// Closed form of the canonical representative for balanced (lambda = 1)
/// measurements:
///   theta0  = [theta]_{pi/2} - pi/4          (phi != 0),  -pi/4 otherwise
///   lambda0 = sqrt(sec 2phi + sign(sin 2theta) tan 2phi)  (sin 2theta != 0)
///             sqrt(sec 2phi + cos 2theta tan 2phi)        (sin 2theta  = 0)
inline BalancedRep canonical_orthogonal_balanced(double theta, double phi) {
    if (!std::isfinite(theta) || !std::isfinite(phi) || std::abs(phi) >= quarter_pi)
        throw std::invalid_argument("canonical_orthogonal_balanced: need |phi| < pi/4");
    const double theta0 = (phi == 0.0) ? -quarter_pi : mod_half_pi(theta) - quarter_pi;
    const double sec2phi = 1.0 / std::cos(2.0 * phi);
    const double tan2phi = std::tan(2.0 * phi);
    const double s2t = std::sin(2.0 * theta);
    // the sin(2 theta) = 0 case covers the exact set theta = k pi/2; for
    // floating inputs near it the residual sign of sin is rounding noise, so
    // the cos branch must take over before that sign becomes meaningless
    const bool on_axis = std::abs(s2t) <= 1e-12 * std::max(1.0, std::abs(theta));
    const double lam0sq = on_axis ? sec2phi + std::cos(2.0 * theta) * tan2phi
                                  : sec2phi + sign_of(s2t) * tan2phi;
    return {theta0, std::sqrt(lam0sq)};
}

}  // namespace obliq
