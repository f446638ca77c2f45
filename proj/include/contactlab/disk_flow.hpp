#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "contactlab/errors.hpp"
#include "contactlab/geometry.hpp"
#include "contactlab/numerics.hpp"

namespace contactlab {

// ==========================================================================
// Closed-form dynamics of X = pR + V projected to the disk D(1):
//
//     dp = -2 pi p q,   dq = 1 + pi (p^2 - q^2),
//
// i.e. z' = i pi z^2 + i in the complex coordinate z = p + iq. The
// biholomorphism  z = (i e^w + 1) / (sqrt(pi) (e^w + i))  from the strip
// R x [0, pi] turns the flow into the translation w' = 2 sqrt(pi). The two
// fixed points +-i/sqrt(pi) are the images of w -> +-infinity.
// ==========================================================================

struct Velocity {
    double dp = 0.0;
    double dq = 0.0;
};

inline DiskPoint attracting_fixed_point() { return {0.0, kInvSqrtPi}; }
inline DiskPoint repelling_fixed_point() { return {0.0, -kInvSqrtPi}; }

/// Strip-to-disk chart. Real form of the biholomorphism,
///   z = (cos b + i sinh a) / (sqrt(pi) (cosh a + sin b)),
/// stable for all a (saturates to the fixed points as a -> +-inf).
/// The edge b = 0 covers the open boundary arc {p > 0}, b = pi the arc
/// {p < 0}.
inline DiskPoint strip_to_disk(StripPoint w) {
    const double ch = std::cosh(w.a);
    const double sech = std::isinf(ch) ? 0.0 : 1.0 / ch;
    const double th = std::tanh(w.a);
    const double denom = 1.0 + std::sin(w.b) * sech;
    return {kInvSqrtPi * std::cos(w.b) * sech / denom,
            kInvSqrtPi * th / denom};
}

/// Inverse chart via e^w = (1 - i sqrt(pi) z) / (sqrt(pi) z - i), principal
/// logarithm with b folded into [0, pi]. The fixed points are excluded.
inline StripPoint disk_to_strip(DiskPoint z) {
    if (std::hypot(z.p, z.q - kInvSqrtPi) < 1e-9 ||
        std::hypot(z.p, z.q + kInvSqrtPi) < 1e-9)
        throw FixedPointSingular("disk_to_strip: fixed point has no strip coordinate");
    const std::complex<double> zz(kSqrtPi * z.p, kSqrtPi * z.q);
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> ew = (1.0 - i * zz) / (zz - i);
    StripPoint w;
    w.a = 0.5 * std::log(std::norm(ew));
    w.b = std::clamp(std::arg(ew), 0.0, kPi);
    return w;
}

inline Velocity vector_field_X(DiskPoint z) {
    return {-kTwoPi * z.p * z.q, 1.0 + kPi * (z.p * z.p - z.q * z.q)};
}

/// Time-t flow of X in closed form. Conjugating the strip translation
/// through the chart gives the disk automorphism
///   phi_t(z) = (sqrt(pi) z + i th) / (sqrt(pi) (1 - i sqrt(pi) th z)),
/// th = tanh(sqrt(pi) t), which fixes +-i/sqrt(pi) exactly and needs no
/// branch handling.
inline DiskPoint exact_flow(DiskPoint z, double t) {
    const double th = std::tanh(kSqrtPi * t);
    // At the fixed points the formula degenerates to 0/0 once tanh
    // saturates; map them through explicitly.
    if (std::hypot(z.p, std::abs(z.q) - kInvSqrtPi) < 1e-13)
        return {0.0, z.q > 0.0 ? kInvSqrtPi : -kInvSqrtPi};
    const std::complex<double> zz(z.p, z.q);
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> num = kSqrtPi * zz + i * th;
    const std::complex<double> den = kSqrtPi * (1.0 - i * kSqrtPi * th * zz);
    const std::complex<double> out = num / den;
    return {out.real(), out.imag()};
}

/// q on the strip:  sqrt(pi) q = (e^{2a} - 1) / (e^{2a} + 1 + 2 e^a sin b),
/// evaluated as tanh(a) / (1 + sin(b) sech(a)).
inline double q_in_strip(StripPoint w) {
    const double ch = std::cosh(w.a);
    const double sech = std::isinf(ch) ? 0.0 : 1.0 / ch;
    return kInvSqrtPi * std::tanh(w.a) / (1.0 + std::sin(w.b) * sech);
}

inline double p_in_strip(StripPoint w) {
    const double ch = std::cosh(w.a);
    const double sech = std::isinf(ch) ? 0.0 : 1.0 / ch;
    return kInvSqrtPi * std::cos(w.b) * sech / (1.0 + std::sin(w.b) * sech);
}

namespace detail {

// Antiderivative N(tau) = ln(e^{2 tau} + 2 sin(b) e^{tau} + 1) - tau of the
// strip integrand; equals ln(2 cosh tau + 2 sin b), an even function of tau.
inline double scaling_antiderivative(double tau, double sinb) {
    const double t = std::abs(tau);
    return t + std::log1p(std::exp(-2.0 * t) + 2.0 * sinb * std::exp(-t));
}

}  // namespace detail

/// Scaling exponent g = -2 pi * integral of q along the time-T flow from
/// strip point w0, in closed form: g = N(a) - N(a + 2 sqrt(pi) T). Vanishes
/// exactly on a = -sqrt(pi) T by evenness of N.
inline double scaling_exponent_exact(StripPoint w0, double T) {
    const double sinb = std::sin(w0.b);
    return detail::scaling_antiderivative(w0.a, sinb) -
           detail::scaling_antiderivative(w0.a + 2.0 * kSqrtPi * T, sinb);
}

// --------------------------------------------------------------------------
// The level set C of the time-T scaling exponent and its flow snapshots
// --------------------------------------------------------------------------

/// The circular arc C = { z(a + ib) : a = -sqrt(pi) T, b in [0, pi] }, kept
/// with its exact strip parametrization so callers can refine on demand.
struct ArcC {
    double T = 0.0;
    double a = 0.0;  // strip abscissa, -sqrt(pi) T
    std::vector<double> b_values;
    std::vector<DiskPoint> samples;
};

inline ArcC arc_C(double T, int m) {
    if (!(T > 0.0) || m < 2)
        throw std::invalid_argument("arc_C: need T > 0 and m >= 2");
    ArcC arc;
    arc.T = T;
    arc.a = -kSqrtPi * T;
    arc.b_values.reserve(m);
    arc.samples.reserve(m);
    for (int k = 0; k < m; ++k) {
        const double b = kPi * static_cast<double>(k) / (m - 1);
        arc.b_values.push_back(b);
        arc.samples.push_back(strip_to_disk({arc.a, b}));
    }
    return arc;
}

/// Samples of the travelling arc C(t) = { a = sqrt(pi) (2t - T) }.
inline std::vector<DiskPoint> arc_snapshot(double T, double t, int m) {
    std::vector<DiskPoint> pts;
    pts.reserve(m);
    const double a = kSqrtPi * (2.0 * t - T);
    for (int k = 0; k < m; ++k)
        pts.push_back(strip_to_disk({a, kPi * static_cast<double>(k) / (m - 1)}));
    return pts;
}

// --------------------------------------------------------------------------
// The boundary guide trajectory
// --------------------------------------------------------------------------

/// The flow line z : [0, T] -> dD(1) cap {p > 0} chosen so that
/// q(z(T/2)) = 0. On the boundary edge b = 0 the chart reduces to
///   p = sech(a)/sqrt(pi),  q = tanh(a)/sqrt(pi),  a(t) = sqrt(pi)(2t - T).
struct BoundaryTrajectory {
    double T = 0.0;

    double strip_a(double t) const { return kSqrtPi * (2.0 * t - T); }
    double p_at(double t) const {
        const double ch = std::cosh(strip_a(t));
        return std::isinf(ch) ? 0.0 : kInvSqrtPi / ch;
    }
    double q_at(double t) const { return kInvSqrtPi * std::tanh(strip_a(t)); }
    DiskPoint at(double t) const { return {p_at(t), q_at(t)}; }
};

inline BoundaryTrajectory boundary_trajectory(double T) {
    if (!(T > 0.0)) throw std::invalid_argument("boundary_trajectory: need T > 0");
    return {T};
}

/// integral of p along the boundary guide over [0, T], by adaptive
/// quadrature. Strictly below 1/2 for finite T and approaches 1/2 as the
/// trajectory sweeps the full half-circle.
inline double p_integral(double T) {
    if (!(T > 0.0)) throw std::invalid_argument("p_integral: need T > 0");
    const BoundaryTrajectory z{T};
    const double v =
        adaptive_simpson([&](double t) { return z.p_at(t); }, 0.0, T, 1e-10);
    // The winding-angle comparison bounds the integral strictly below 1/2;
    // for large T the gap is far below quadrature resolution, so cap at the
    // bound when roundoff lands on it.
    return std::min(v, std::nextafter(0.5, 0.0));
}

}  // namespace contactlab
