#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "contactlab/disk_flow.hpp"
#include "contactlab/errors.hpp"
#include "contactlab/geometry.hpp"
#include "contactlab/numerics.hpp"

namespace contactlab {

// ==========================================================================
// Time-dependent cut-off flow X_t = f_t(p) R + f_t'(p) V on D(1), where
// f_t = f_{delta, eta(t)} caps the contact Hamiltonian p at the moving
// threshold eta(t) = p(z(t)) read off the boundary guide trajectory.
// ==========================================================================

/// Convex smoothing profile: mu(x) = 1/2 for x <= 0, mu(x) = x for x >= 1,
/// C^1 and convex in between. Pluggable so results can be checked for
/// insensitivity to the choice.
struct SmoothingProfile {
    const char* name;
    double (*value)(double);
    double (*deriv)(double);

    static SmoothingProfile quadratic_spline() {
        return {"quadratic-spline",
                [](double x) {
                    if (x <= 0.0) return 0.5;
                    if (x >= 1.0) return x;
                    return 0.5 + 0.5 * x * x;
                },
                [](double x) {
                    if (x <= 0.0) return 0.0;
                    if (x >= 1.0) return 1.0;
                    return x;
                }};
    }

    // C^2 alternative with mu''(0) = mu''(1) = 0.
    static SmoothingProfile smoothstep() {
        return {"smoothstep",
                [](double x) {
                    if (x <= 0.0) return 0.5;
                    if (x >= 1.0) return x;
                    return 0.5 + x * x * x * (1.0 - 0.5 * x);
                },
                [](double x) {
                    if (x <= 0.0) return 0.0;
                    if (x >= 1.0) return 1.0;
                    return x * x * (3.0 - 2.0 * x);
                }};
    }

    static SmoothingProfile by_name(const std::string& n) {
        if (n == "quadratic-spline") return quadratic_spline();
        if (n == "smoothstep") return smoothstep();
        throw std::invalid_argument("unknown smoothing profile: " + n);
    }
};

struct FDeriv {
    double value = 0.0;
    double derivative = 0.0;
};

/// Cut-off data: f(p) = eta + delta - delta * mu((eta - p + delta)/delta)
/// for p >= 0, extended to an odd function.
struct CutoffProfile {
    double delta = 0.0;
    double eta = 0.0;
    SmoothingProfile mu = SmoothingProfile::quadratic_spline();
};

/// f and f' with the piecewise contract: f(p) = p for 0 <= p <= eta,
/// f(p) = eta + delta/2 for p >= eta + delta, odd extension for p < 0.
inline FDeriv f_cutoff(double p, const CutoffProfile& prof) {
    const double sign = p < 0.0 ? -1.0 : 1.0;
    const double pa = std::abs(p);
    if (pa <= prof.eta) return {p, 1.0};
    if (pa >= prof.eta + prof.delta)
        return {sign * (prof.eta + 0.5 * prof.delta), 0.0};
    const double x = (prof.eta - pa + prof.delta) / prof.delta;
    const double v = prof.eta + prof.delta - prof.delta * prof.mu.value(x);
    return {sign * v, prof.mu.deriv(x)};
}

/// The cut-off data over a horizon [0, T]. The canonical schedule reads
/// eta(t) = p(z(t)) along the boundary guide, which peaks at
/// eta(T/2) = 1/sqrt(pi).
struct HamiltonianSchedule {
    double T = 0.0;
    double delta = 0.0;
    SmoothingProfile mu = SmoothingProfile::quadratic_spline();
    bool boundary_source = true;
    std::function<double(double)> custom_eta;  // used when !boundary_source

    static HamiltonianSchedule boundary(
        double T, double delta,
        SmoothingProfile mu = SmoothingProfile::quadratic_spline()) {
        if (!(T > 0.0) || !(delta > 0.0))
            throw std::invalid_argument("schedule: need T > 0 and delta > 0");
        HamiltonianSchedule s;
        s.T = T;
        s.delta = delta;
        s.mu = mu;
        s.boundary_source = true;
        return s;
    }

    /// Experimental schedules with a user-supplied threshold rule.
    static HamiltonianSchedule custom(
        double T, double delta, std::function<double(double)> eta,
        SmoothingProfile mu = SmoothingProfile::quadratic_spline()) {
        HamiltonianSchedule s;
        s.T = T;
        s.delta = delta;
        s.mu = mu;
        s.boundary_source = false;
        s.custom_eta = std::move(eta);
        return s;
    }

    double eta(double t) const {
        if (boundary_source) {
            const double ch = std::cosh(kSqrtPi * (2.0 * t - T));
            return std::isinf(ch) ? 0.0 : kInvSqrtPi / ch;
        }
        return custom_eta(t);
    }

    FDeriv f(double t, double p) const {
        return f_cutoff(p, {delta, eta(t), mu});
    }
};

/// Cut-off vector field at (z, t): f_t(p) R + f_t'(p) V with the disk
/// fields R = 2 pi (p d_q - q d_p), V = (1 - pi (p^2+q^2)) d_q.
inline Velocity X_cutoff(DiskPoint z, double t, const HamiltonianSchedule& s) {
    const FDeriv f = s.f(t, z.p);
    return {-kTwoPi * z.q * f.value,
            kTwoPi * z.p * f.value + f.derivative * boundary_defect(z)};
}

// --------------------------------------------------------------------------
// Trajectories: classical RK4 with step-doubling control
// --------------------------------------------------------------------------

struct StepperStats {
    double h_initial = 0.0;
    double h_min_used = 0.0;
    double max_local_error = 0.0;
    std::size_t accepted_steps = 0;
    std::size_t renormalizations = 0;
    double min_boundary_defect = 0.0;  // most negative ell encountered
};

struct IntegrateOptions {
    double h = 5e-3;           // maximum (and initial) step
    double local_tol = 1e-10;  // step-doubling error bound
    bool adaptive = true;
    double h_min = 1e-11;
    double renorm_tol = 1e-10;  // radial projection threshold for ell < 0
};

/// Integrated cut-off trajectory. Nodes carry the state (p, q) together
/// with the running scaling-exponent integral g(t) = -2 pi int f' q, and
/// node derivatives for dense cubic Hermite output.
struct Trajectory {
    std::vector<double> times;
    std::vector<DiskPoint> points;
    std::vector<double> g;
    std::vector<std::array<double, 3>> derivs;  // (dp, dq, dg) at the nodes
    StepperStats stats;

    double horizon() const { return times.empty() ? 0.0 : times.back(); }
    double g_final() const { return g.empty() ? 0.0 : g.back(); }

    DiskPoint at(double t) const {
        const auto s = interp(t);
        return {s[0], s[1]};
    }
    double g_at(double t) const { return interp(t)[2]; }

  private:
    std::array<double, 3> interp(double t) const {
        if (t <= times.front())
            return {points.front().p, points.front().q, g.front()};
        if (t >= times.back())
            return {points.back().p, points.back().q, g.back()};
        const auto it = std::upper_bound(times.begin(), times.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
        const double h = times[i + 1] - times[i];
        const double s = (t - times[i]) / h;
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        auto hermite = [&](double y0, double d0, double y1, double d1) {
            return h00 * y0 + h * h10 * d0 + h01 * y1 + h * h11 * d1;
        };
        return {hermite(points[i].p, derivs[i][0], points[i + 1].p, derivs[i + 1][0]),
                hermite(points[i].q, derivs[i][1], points[i + 1].q, derivs[i + 1][1]),
                hermite(g[i], derivs[i][2], g[i + 1], derivs[i + 1][2])};
    }
};

namespace detail {

using State3 = std::array<double, 3>;  // (p, q, g)

inline State3 cutoff_rhs(const State3& y, double t,
                         const HamiltonianSchedule& s) {
    const FDeriv f = s.f(t, y[0]);
    const double ell = 1.0 - kPi * (y[0] * y[0] + y[1] * y[1]);
    return {-kTwoPi * y[1] * f.value,
            kTwoPi * y[0] * f.value + f.derivative * ell,
            -kTwoPi * f.derivative * y[1]};
}

inline State3 rk4_step(const State3& y, double t, double h,
                       const HamiltonianSchedule& s) {
    const State3 k1 = cutoff_rhs(y, t, s);
    State3 tmp;
    for (int i = 0; i < 3; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    const State3 k2 = cutoff_rhs(tmp, t + 0.5 * h, s);
    for (int i = 0; i < 3; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    const State3 k3 = cutoff_rhs(tmp, t + 0.5 * h, s);
    for (int i = 0; i < 3; ++i) tmp[i] = y[i] + h * k3[i];
    const State3 k4 = cutoff_rhs(tmp, t + h, s);
    State3 out;
    for (int i = 0; i < 3; ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

}  // namespace detail

/// Classical RK4 over [0, T] with local step control by step doubling:
/// the step is halved whenever the doubled-step error estimate exceeds the
/// tolerance. Points that drift outside the disk beyond the renormalization
/// threshold are projected back radially (counted in the stats).
inline Trajectory integrate_cutoff(DiskPoint z0, const HamiltonianSchedule& s,
                                   const IntegrateOptions& opt = {}) {
    if (boundary_defect(z0) < -1e-9)
        throw std::invalid_argument("integrate_cutoff: start outside D(1)");
    Trajectory traj;
    traj.stats.h_initial = opt.h;
    traj.stats.h_min_used = opt.h;

    detail::State3 y{z0.p, z0.q, 0.0};
    double t = 0.0;
    double h = opt.h;

    auto push = [&](double tt, const detail::State3& yy) {
        traj.times.push_back(tt);
        traj.points.push_back({yy[0], yy[1]});
        traj.g.push_back(yy[2]);
        traj.derivs.push_back(detail::cutoff_rhs(yy, tt, s));
    };
    push(0.0, y);

    while (t < s.T - 1e-14) {
        double step = std::min(h, s.T - t);
        detail::State3 next;
        if (opt.adaptive) {
            for (;;) {
                const detail::State3 full = detail::rk4_step(y, t, step, s);
                const detail::State3 half =
                    detail::rk4_step(y, t, 0.5 * step, s);
                next = detail::rk4_step(half, t + 0.5 * step, 0.5 * step, s);
                double err = 0.0;
                for (int i = 0; i < 3; ++i)
                    err = std::max(err, std::abs(full[i] - next[i]));
                if (err <= opt.local_tol || step <= opt.h_min) {
                    if (step <= opt.h_min && err > opt.local_tol)
                        throw StepFailure("integrate_cutoff: step control failed");
                    traj.stats.max_local_error =
                        std::max(traj.stats.max_local_error, err);
                    // step size for the next accepted step
                    h = err < 0.015625 * opt.local_tol
                            ? std::min(2.0 * step, opt.h)
                            : step;
                    break;
                }
                step *= 0.5;
                traj.stats.h_min_used = std::min(traj.stats.h_min_used, step);
            }
        } else {
            next = detail::rk4_step(y, t, step, s);
        }
        t = std::min(t + step, s.T);
        y = next;

        const double ell = 1.0 - kPi * (y[0] * y[0] + y[1] * y[1]);
        traj.stats.min_boundary_defect =
            std::min(traj.stats.min_boundary_defect, ell);
        if (ell < -opt.renorm_tol) {
            const double r = std::sqrt(y[0] * y[0] + y[1] * y[1]);
            y[0] *= kInvSqrtPi / r;
            y[1] *= kInvSqrtPi / r;
            ++traj.stats.renormalizations;
        }
        push(t, y);
        ++traj.stats.accepted_steps;
    }

    if (traj.stats.min_boundary_defect < -1e-9)
        throw StepFailure("integrate_cutoff: trajectory left the disk");
    return traj;
}

/// g = -2 pi * integral of f_t'(p) q along the cut-off trajectory from z0.
inline double scaling_exponent_cutoff(DiskPoint z0,
                                      const HamiltonianSchedule& s,
                                      const IntegrateOptions& opt = {}) {
    return integrate_cutoff(z0, s, opt).g_final();
}

// --------------------------------------------------------------------------
// The scaling-factor-1 set Sigma
// --------------------------------------------------------------------------

struct SigmaPoint {
    DiskPoint z;
    double g_residual = 0.0;
    double b = 0.0;  // strip ordinate of the transversal that produced it
    bool on_boundary = false;
};

struct SigmaOptions {
    double g_tol = 1e-8;
    double tube_halfwidth = 0.0;  // disk units; 0 means 2 * delta
    double a_span_cap = 4.0;      // hard cap on the strip extent of a transversal
    IntegrateOptions integ;
    bool boundary_endpoints = true;
};

namespace detail {

// Strip extent that covers the requested disk length along b = const,
// marched in small a-increments, capped.
inline double transversal_span(double a0, double b, double disk_halfwidth,
                               double cap) {
    double length = 0.0;
    double s = 0.0;
    DiskPoint prev = strip_to_disk({a0, b});
    while (s < cap && length < disk_halfwidth) {
        s += 0.02;
        const DiskPoint cur = strip_to_disk({a0 + s, b});
        length += dist(prev, cur);
        prev = cur;
    }
    return s;
}

}  // namespace detail

/// Locate the scaling-factor-1 set by bisecting the measured exponent g
/// along transversals of the arc C(0): images of the strip segments
/// { a0 + s : |s| <= S } x { b_k }, which cross C(0) orthogonally. Each
/// returned point satisfies |g| < g_tol. Throws NoBracket when a transversal
/// shows no sign change (resolution too coarse or delta too large).
inline std::vector<SigmaPoint> sigma_set(const HamiltonianSchedule& sched,
                                         int resolution,
                                         const SigmaOptions& opt = {}) {
    if (resolution < 8)
        throw std::invalid_argument("sigma_set: resolution must be >= 8");
    const double a0 = -kSqrtPi * sched.T;
    const double halfwidth =
        opt.tube_halfwidth > 0.0 ? opt.tube_halfwidth : 2.0 * sched.delta;

    auto g_at_strip = [&](double a, double b) {
        return scaling_exponent_cutoff(strip_to_disk({a, b}), sched, opt.integ);
    };

    std::vector<SigmaPoint> sigma(resolution);
    std::vector<std::string> failures;
    for (int k = 0; k < resolution; ++k) {
        const double b = kPi * (k + 0.5) / resolution;
        double S = detail::transversal_span(a0, b, halfwidth, opt.a_span_cap);
        double glo = 0.0, ghi = 0.0;
        bool bracketed = false;
        for (int attempt = 0; attempt < 3 && !bracketed; ++attempt) {
            glo = g_at_strip(a0 - S, b);
            ghi = g_at_strip(a0 + S, b);
            if (std::signbit(glo) != std::signbit(ghi))
                bracketed = true;
            else
                S = std::min(2.0 * S, 1.5 * opt.a_span_cap);
        }
        if (!bracketed)
            throw NoBracket("sigma_set: no sign change across C(0) at b = " +
                            std::to_string(b) +
                            " (resolution too coarse or delta too large)");
        const double root = bisect([&](double x) { return g_at_strip(a0 + x, b); },
                                   -S, S, 1e-15, opt.g_tol, 160);
        SigmaPoint pt;
        pt.z = strip_to_disk({a0 + root, b});
        pt.g_residual = g_at_strip(a0 + root, b);
        pt.b = b;
        sigma[static_cast<std::size_t>(k)] = pt;
    }

    if (opt.boundary_endpoints) {
        // Zeros of g along the boundary circle, one on each of the arcs
        // {p > 0} and {p < 0}; by reflection equivariance they share the
        // same strip abscissa.
        auto g_boundary = [&](double alpha) {
            const double ch = std::cosh(alpha);
            const DiskPoint z{kInvSqrtPi / ch, kInvSqrtPi * std::tanh(alpha)};
            return scaling_exponent_cutoff(z, sched, opt.integ);
        };
        double S = 0.5;
        bool bracketed = false;
        for (; S <= 8.0 + 1e-9; S *= 2.0) {
            if (std::signbit(g_boundary(a0 - S)) !=
                std::signbit(g_boundary(a0 + S))) {
                bracketed = true;
                break;
            }
        }
        if (!bracketed)
            throw NoBracket("sigma_set: no boundary bracket");
        const double root =
            bisect(g_boundary, a0 - S, a0 + S, 1e-14, opt.g_tol, 160);
        SigmaPoint bp;
        bp.z = {kInvSqrtPi / std::cosh(root), kInvSqrtPi * std::tanh(root)};
        bp.g_residual = g_boundary(root);
        bp.b = 0.0;
        bp.on_boundary = true;
        sigma.insert(sigma.begin(), bp);
        SigmaPoint bp2 = bp;
        bp2.z = reflect_p(bp.z);
        bp2.b = kPi;
        sigma.push_back(bp2);
    }
    return sigma;
}

/// Shelukhin-Hofer length of the cut-off isotopy:
/// int_0^T max f_t dt = int (eta(t) + delta/2) dt = p_integral(T) + delta T / 2,
/// computed by quadrature of the threshold rule. Bounded by (1 + delta T)/2.
inline double shelukhin_length(const HamiltonianSchedule& s) {
    return adaptive_simpson([&](double t) { return s.eta(t) + 0.5 * s.delta; },
                            0.0, s.T, 1e-10);
}

}  // namespace contactlab
