#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "contactlab/cutoff_flow.hpp"
#include "contactlab/disk_flow.hpp"
#include "contactlab/errors.hpp"
#include "contactlab/geometry.hpp"
#include "contactlab/numerics.hpp"

namespace contactlab {

// ==========================================================================
// The discontinuous delta -> 0 limit of the cut-off flow:
//
//     X_t = { p R + V          for p <= eta(t)
//           { eta(t) R         for p  > eta(t)
//
// Trajectories are continuous, follow the active regime away from the
// threshold, and cross it at most once (an entrance or an exit).
// ==========================================================================

enum class Regime { inner, outer };
enum class CrossingKind { entrance, exit, none };

/// The limit vector field; continuous along the boundary circle since V
/// vanishes there. Odd in p.
inline Velocity limit_field(DiskPoint z, double t,
                            const HamiltonianSchedule& s) {
    const double eta = s.eta(t);
    if (std::abs(z.p) <= eta) return vector_field_X(z);
    const double cap = z.p > 0.0 ? eta : -eta;
    return {-kTwoPi * z.q * cap, kTwoPi * z.p * cap};
}

struct PiecewiseSegment {
    Regime regime = Regime::inner;
    double t0 = 0.0;
    double t1 = 0.0;
    DiskPoint u0;          // state at t0 (in the reflected frame if any)
    StripPoint w0;         // inner propagation data
    bool stationary = false;  // inner start within 1e-9 of a fixed point
    std::vector<double> times;
    std::vector<DiskPoint> points;
};

struct PiecewiseTrajectory {
    HamiltonianSchedule sched;
    bool reflected = false;          // input start had p < 0
    bool boundary_solution = false;  // u == z identically
    std::vector<PiecewiseSegment> segments;
    std::optional<double> crossing_time;
    double crossing_slope = 0.0;  // E'(t*) = 2 pi eta (q(z) - q(u))
    double crossing_qz = 0.0;     // q(z(t*)) inferred from the threshold rule

    double horizon() const { return sched.T; }

    DiskPoint at(double t) const {
        t = std::clamp(t, 0.0, sched.T);
        const PiecewiseSegment* seg = &segments.back();
        for (const auto& s : segments) {
            if (t <= s.t1) {
                seg = &s;
                break;
            }
        }
        DiskPoint u = eval_segment(*seg, t);
        return reflected ? reflect_p(u) : u;
    }

    DiskPoint eval_segment(const PiecewiseSegment& seg, double t) const {
        if (seg.regime == Regime::inner) {
            if (seg.stationary) return seg.u0;
            return strip_to_disk(
                {seg.w0.a + 2.0 * kSqrtPi * (t - seg.t0), seg.w0.b});
        }
        return rotate(seg.u0, rotation_angle(seg.t0, t));
    }

    /// Accumulated rotation 2 pi * int eta of the capped regime. For the
    /// canonical threshold this is a Gudermannian difference.
    double rotation_angle(double t0, double t1) const {
        if (sched.boundary_source) {
            auto gd = [&](double t) {
                return 2.0 * std::atan(
                           std::tanh(0.5 * kSqrtPi * (2.0 * t - sched.T)));
            };
            return gd(t1) - gd(t0);
        }
        return kTwoPi *
               adaptive_simpson([&](double t) { return sched.eta(t); }, t0, t1,
                                1e-12);
    }
};

inline CrossingKind classify_crossing(const PiecewiseTrajectory& traj) {
    if (!traj.crossing_time) return CrossingKind::none;
    return traj.crossing_slope < 0.0 ? CrossingKind::entrance
                                     : CrossingKind::exit;
}

namespace detail {

inline double eta_dot(const HamiltonianSchedule& s, double t) {
    if (s.boundary_source) {
        const double a = kSqrtPi * (2.0 * t - s.T);
        const double ch = std::cosh(a);
        if (std::isinf(ch)) return 0.0;
        return -2.0 * std::tanh(a) / ch;
    }
    const double h = 1e-6;
    const double lo = std::max(0.0, t - h), hi = std::min(s.T, t + h);
    return (s.eta(hi) - s.eta(lo)) / (hi - lo);
}

}  // namespace detail

/// Event-detected integration of the limit dynamics from z0 over [0, T].
/// Each regime is propagated in closed form (the uncut flow is the strip
/// translation; the capped regime is a rigid rotation), and the event
/// function E(t) = p(u(t)) - eta(t) is bisected to 1e-12 at a sign change.
/// At most one transversal crossing may occur; a second one throws
/// MultipleCrossings. Starts with p < 0 are handled through the reflection
/// equivariance of the flow.
inline PiecewiseTrajectory integrate_piecewise(DiskPoint z0,
                                               const HamiltonianSchedule& s) {
    if (boundary_defect(z0) < -1e-9)
        throw std::invalid_argument("integrate_piecewise: start outside D(1)");
    PiecewiseTrajectory traj;
    traj.sched = s;
    if (z0.p < 0.0) {
        traj.reflected = true;
        z0 = reflect_p(z0);
    }

    const double T = s.T;
    const int scan_nodes = 4096;
    const double h_scan = T / scan_nodes;

    // u == z: the guide trajectory solves both regimes simultaneously.
    if (s.boundary_source) {
        const BoundaryTrajectory guide{T};
        if (dist(z0, guide.at(0.0)) < 1e-12) {
            traj.boundary_solution = true;
            PiecewiseSegment seg;
            seg.regime = Regime::inner;
            seg.t0 = 0.0;
            seg.t1 = T;
            seg.u0 = z0;
            seg.w0 = {guide.strip_a(0.0), 0.0};
            for (int k = 0; k <= 512; ++k) {
                const double t = T * k / 512.0;
                seg.times.push_back(t);
                seg.points.push_back(guide.at(t));
            }
            traj.segments.push_back(seg);
            return traj;
        }
    }

    double t = 0.0;
    DiskPoint u = z0;
    Regime regime;
    {
        const double e0 = z0.p - s.eta(0.0);
        if (std::abs(e0) < 1e-13) {
            const double slope =
                -kTwoPi * s.eta(0.0) * z0.q - detail::eta_dot(s, 0.0);
            regime = slope < 0.0 ? Regime::inner : Regime::outer;
        } else {
            regime = e0 < 0.0 ? Regime::inner : Regime::outer;
        }
    }

    auto sample_segment = [&](PiecewiseSegment& seg) {
        const int n = std::max(
            32, static_cast<int>(512 * (seg.t1 - seg.t0) / traj.sched.T));
        seg.times.clear();
        seg.points.clear();
        for (int k = 0; k <= n; ++k) {
            const double tt = seg.t0 + (seg.t1 - seg.t0) * k / n;
            seg.times.push_back(tt);
            seg.points.push_back(traj.eval_segment(seg, tt));
        }
    };

    int crossings = 0;
    while (t < T - 1e-13) {
        PiecewiseSegment seg;
        seg.regime = regime;
        seg.t0 = t;
        seg.u0 = u;
        if (regime == Regime::inner) {
            seg.stationary = std::hypot(u.p, std::abs(u.q) - kInvSqrtPi) < 1e-9;
            if (!seg.stationary) seg.w0 = disk_to_strip(u);
        }

        auto E = [&](double tt) {
            return traj.eval_segment(seg, tt).p - s.eta(tt);
        };

        // Locate the next transversal sign change of E past the segment
        // start. The scan opens a hair after t0 so the residual of a just
        // resolved crossing is not re-detected; tangential grazes are
        // stepped over.
        double t_cross = -1.0;
        double slope = 0.0;
        double tt_prev = std::min(t + 1e-9, T);
        double e_prev = E(tt_prev);
        for (double tt = t + h_scan; tt_prev < T; tt += h_scan) {
            const double tcur = std::min(tt, T);
            const double e_cur = E(tcur);
            if (std::signbit(e_cur) != std::signbit(e_prev)) {
                const double tc = bisect(E, tt_prev, tcur, 1e-12);
                const DiskPoint uc = traj.eval_segment(seg, tc);
                const double sl =
                    -kTwoPi * s.eta(tc) * uc.q - detail::eta_dot(s, tc);
                if (std::abs(sl) >= 1e-10) {
                    t_cross = tc;
                    slope = sl;
                    break;
                }
            }
            tt_prev = tcur;
            e_prev = e_cur;
        }

        if (t_cross < 0.0) {
            seg.t1 = T;
            sample_segment(seg);
            traj.segments.push_back(std::move(seg));
            break;
        }

        if (++crossings > 1)
            throw MultipleCrossings(
                "integrate_piecewise: second transversal crossing at t = " +
                std::to_string(t_cross));

        const DiskPoint u_cross = traj.eval_segment(seg, t_cross);
        seg.t1 = t_cross;
        sample_segment(seg);
        traj.segments.push_back(std::move(seg));
        traj.crossing_time = t_cross;
        traj.crossing_slope = slope;
        traj.crossing_qz =
            -detail::eta_dot(s, t_cross) / (kTwoPi * s.eta(t_cross));
        t = t_cross;
        u = u_cross;
        regime = regime == Regime::inner ? Regime::outer : Regime::inner;
    }
    return traj;
}

/// g(u) = -2 pi * integral of q over the maximal interval where
/// p(u(t)) <= eta(t); zero when there is no such interval.
inline double scaling_exponent_piecewise(const PiecewiseTrajectory& traj) {
    const double T = traj.sched.T;
    double t1 = 0.0, t2 = T;
    if (traj.boundary_solution) {
        // p(z(t)) = eta(t) throughout; the maximal interval is [0, T]
    } else if (traj.segments.size() == 1) {
        if (traj.segments.front().regime == Regime::outer) return 0.0;
    } else {
        const bool starts_inner = traj.segments.front().regime == Regime::inner;
        if (starts_inner)
            t2 = *traj.crossing_time;  // exit
        else
            t1 = *traj.crossing_time;  // entrance
    }
    return -kTwoPi * adaptive_simpson(
                         [&](double t) { return traj.at(t).q; }, t1, t2, 1e-10);
}

struct ConvergenceEntry {
    double delta = 0.0;
    double sup_distance = 0.0;
};

struct ConvergenceReport {
    DiskPoint z0;
    std::vector<ConvergenceEntry> entries;
    std::optional<double> crossing_time;
    double g_piecewise = 0.0;
};

/// Sup-distance over [0, T] between the cut-off flow at each delta and the
/// limit trajectory from the same start.
inline ConvergenceReport convergence_test(DiskPoint z0,
                                          const HamiltonianSchedule& base,
                                          const std::vector<double>& deltas,
                                          const IntegrateOptions& opt = {}) {
    for (std::size_t i = 1; i < deltas.size(); ++i)
        if (!(deltas[i] < deltas[i - 1]))
            throw std::invalid_argument(
                "convergence_test: deltas must be strictly decreasing");
    ConvergenceReport report;
    report.z0 = z0;
    const PiecewiseTrajectory pw = integrate_piecewise(z0, base);
    report.crossing_time = pw.crossing_time;
    report.g_piecewise = scaling_exponent_piecewise(pw);
    const int grid = 2000;
    for (double d : deltas) {
        HamiltonianSchedule s = base;
        s.delta = d;
        const Trajectory cut = integrate_cutoff(z0, s, opt);
        double sup = 0.0;
        for (int k = 0; k <= grid; ++k) {
            const double t = base.T * k / grid;
            sup = std::max(sup, dist(cut.at(t), pw.at(t)));
        }
        report.entries.push_back({d, sup});
    }
    return report;
}

}  // namespace contactlab
