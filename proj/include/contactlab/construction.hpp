#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "contactlab/contact_core.hpp"
#include "contactlab/cutoff_flow.hpp"
#include "contactlab/errors.hpp"
#include "contactlab/geometry.hpp"
#include "contactlab/numerics.hpp"
#include "contactlab/parallel.hpp"

namespace contactlab {

// ==========================================================================
// End-to-end pipeline on S^{2n+1}: the reparametrized cut-off isotopy
// gamma_t, a strict displacing isotopy kappa_t on the Hopf quotient, their
// composition psi_t = kappa_t gamma_t, and the certification that psi_1 has
// no translated points while 2 * length(psi) stays close to 1.
// ==========================================================================

using Coords = std::vector<double>;

namespace detail {

inline double sphere_norm2(const Coords& y) {
    double s = 0.0;
    for (double v : y) s += v * v;
    return s;
}

// X_f = f(p) R + f'(p) V on the sphere, written into `out`.
inline void sphere_cutoff_field(const Coords& y, double t,
                                const HamiltonianSchedule& s, Coords& out) {
    const FDeriv f = s.f(t, y[0]);
    const double p = y[0], q = y[1];
    // R component: 2 pi J y
    out[0] = -kTwoPi * y[1] * f.value;
    out[1] = kTwoPi * y[0] * f.value;
    double xy2 = 0.0;
    for (std::size_t i = 2; i < y.size(); ++i) xy2 += y[i] * y[i];
    out[1] += f.derivative * kPi * xy2;
    for (std::size_t xi = 2; xi + 1 < y.size(); xi += 2) {
        const double x = y[xi], yy = y[xi + 1];
        out[xi] = -kTwoPi * yy * f.value + f.derivative * kPi * (p * yy - q * x);
        out[xi + 1] =
            kTwoPi * x * f.value - f.derivative * kPi * (p * x + q * yy);
    }
}

}  // namespace detail

struct SphereIntegrateOptions {
    double h = 5e-3;
    double local_tol = 1e-10;
    double h_min = 1e-11;
    double renorm_tol = 1e-10;
};

/// RK4 flow of the lifted cut-off field from y0 over [0, t1], with radial
/// renormalization whenever the sphere constraint drifts past the
/// threshold.
inline Coords gamma_map(Coords y, const HamiltonianSchedule& s, double t1,
                        const SphereIntegrateOptions& opt = {},
                        std::size_t* renorm_count = nullptr) {
    const std::size_t dim = y.size();
    Coords k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim), full(dim), half(dim);
    auto rk4 = [&](const Coords& from, double t, double h, Coords& to) {
        detail::sphere_cutoff_field(from, t, s, k1);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = from[i] + 0.5 * h * k1[i];
        detail::sphere_cutoff_field(tmp, t + 0.5 * h, s, k2);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = from[i] + 0.5 * h * k2[i];
        detail::sphere_cutoff_field(tmp, t + 0.5 * h, s, k3);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = from[i] + h * k3[i];
        detail::sphere_cutoff_field(tmp, t + h, s, k4);
        for (std::size_t i = 0; i < dim; ++i)
            to[i] = from[i] +
                    h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    };

    double t = 0.0;
    double h = opt.h;
    Coords next(dim);
    while (t < t1 - 1e-14) {
        double step = std::min(h, t1 - t);
        for (;;) {
            rk4(y, t, step, full);
            rk4(y, t, 0.5 * step, half);
            rk4(half, t + 0.5 * step, 0.5 * step, next);
            double err = 0.0;
            for (std::size_t i = 0; i < dim; ++i)
                err = std::max(err, std::abs(full[i] - next[i]));
            if (err <= opt.local_tol || step <= opt.h_min) {
                if (step <= opt.h_min && err > opt.local_tol)
                    throw StepFailure("gamma_map: step control failed");
                h = err < 0.015625 * opt.local_tol ? std::min(2.0 * step, opt.h)
                                                   : step;
                break;
            }
            step *= 0.5;
        }
        t = std::min(t + step, t1);
        y.swap(next);
        const double defect = kPi * detail::sphere_norm2(y) - 1.0;
        if (std::abs(defect) > opt.renorm_tol) {
            const double scale = 1.0 / (kSqrtPi * std::sqrt(detail::sphere_norm2(y)));
            for (double& v : y) v *= scale;
            if (renorm_count) ++(*renorm_count);
        }
    }
    return y;
}

// --------------------------------------------------------------------------
// The displacing isotopy: an autonomous twist on the Hopf quotient
// --------------------------------------------------------------------------

/// Strict contact isotopy lifted from a Hamiltonian twist of the quotient
/// projective space. The Hamiltonian k depends only on the Hopf-invariant
/// height n1 = 2 Re(conj(z0) z1) / |z|^2, is supported in the slab
/// |n1| <= width around the meridian path from [i/sqrt(pi):0:...] to the
/// hyperplane divisor {z0 = 0}, and rotates each level shell rigidly:
/// on the quotient sphere the time-1 map turns the shell n1 by the angle
/// pi * G'(n1/width), which is exactly pi on the inner plateau. The flow
/// upstairs is in closed form, so the lift is strict to machine precision
/// and its Shelukhin-Hofer length equals max k = (width/4)(1 + plateau).
struct DisplacingIsotopy {
    double width = 0.25;
    double plateau_fraction = 0.4;
    int n = 1;
    double hofer_norm = 0.0;

    // normalized rotation-rate profile across the slab and its integral
    double profile(double x) const {
        const double ax = std::abs(x);
        if (ax <= plateau_fraction) return 1.0;
        if (ax >= 1.0) return 0.0;
        const double s = (1.0 - ax) / (1.0 - plateau_fraction);
        return s * s * (3.0 - 2.0 * s);
    }

    double profile_integral(double x) const {
        const double a1 = plateau_fraction;
        auto ramp = [](double s) { return s * s * s * (1.0 - 0.5 * s); };
        if (x <= -1.0) return 0.0;
        if (x <= -a1) return (1.0 - a1) * ramp((1.0 + x) / (1.0 - a1));
        if (x <= a1) return 0.5 * (1.0 - a1) + (x + a1);
        if (x <= 1.0)
            return 0.5 * (1.0 - a1) + 2.0 * a1 +
                   (1.0 - a1) * (0.5 - ramp((1.0 - x) / (1.0 - a1)));
        return 1.0 + a1;
    }

    double hamiltonian_of_height(double n1) const {
        return 0.25 * width * profile_integral(n1 / width);
    }
    double hamiltonian_slope(double n1) const {
        return 0.25 * profile(n1 / width);
    }

    double invariant_height(const Coords& y) const {
        const double Q = detail::sphere_norm2(y);
        return 2.0 * (y[0] * y[2] + y[1] * y[3]) / Q;
    }

    double hamiltonian(const Coords& y) const {
        return hamiltonian_of_height(invariant_height(y));
    }

    /// Closed-form time-t map. The height n1 is conserved, so the flow of
    /// the frozen-coefficient linear field is exact: a simultaneous phase
    /// rotation composed with a rotation in the (z0, z1) block.
    Coords map(const Coords& y, double t) const {
        const double n1 = invariant_height(y);
        const double h = hamiltonian_of_height(n1);
        const double kp = hamiltonian_slope(n1);
        const double alpha = kTwoPi * (h - kp * n1);  // phase rate
        const double beta = kTwoPi * kp;              // block rate
        const double ca = std::cos(beta * t), sa = std::sin(beta * t);
        Coords out(y.size());
        // block rotation: z0' = ca z0 + i sa z1, z1' = ca z1 + i sa z0
        out[0] = ca * y[0] - sa * y[3];
        out[1] = ca * y[1] + sa * y[2];
        out[2] = ca * y[2] - sa * y[1];
        out[3] = ca * y[3] + sa * y[0];
        for (std::size_t i = 4; i < y.size(); ++i) out[i] = y[i];
        // simultaneous phase rotation by alpha * t
        const double cp = std::cos(alpha * t), sp = std::sin(alpha * t);
        for (std::size_t i = 0; i + 1 < out.size(); i += 2) {
            const double a = out[i], b = out[i + 1];
            out[i] = cp * a - sp * b;
            out[i + 1] = sp * a + cp * b;
        }
        return out;
    }

    Coords inverse(const Coords& y, double t) const { return map(y, -t); }
};

/// Build the twist and verify that its time-1 map sends the point above
/// i/sqrt(pi) into the fiber over p = q = 0.
inline DisplacingIsotopy build_kappa(double width, int n = 1,
                                     double plateau_fraction = 0.4,
                                     double tol_displace = 1e-8) {
    if (!(width > 0.0) || !(width <= 1.0))
        throw std::invalid_argument("build_kappa: need 0 < width <= 1");
    DisplacingIsotopy kappa;
    kappa.width = width;
    kappa.plateau_fraction = plateau_fraction;
    kappa.n = n;
    // int (max - min) of the Hamiltonian over time, measured on a grid of
    // the invariant height (the isotopy is autonomous)
    double kmax = 0.0, kmin = 1e300;
    for (int i = 0; i <= 4096; ++i) {
        const double n1 = -1.0 + 2.0 * i / 4096.0;
        const double k = kappa.hamiltonian_of_height(n1);
        kmax = std::max(kmax, k);
        kmin = std::min(kmin, k);
    }
    kappa.hofer_norm = kmax - kmin;

    Coords a_point(2 * static_cast<std::size_t>(n) + 2, 0.0);
    a_point[1] = kInvSqrtPi;  // the lift of i/sqrt(pi); its fiber is a point
    const Coords image = kappa.map(a_point, 1.0);
    const double miss = std::hypot(image[0], image[1]);
    if (miss > tol_displace)
        throw DisplacementFailed("build_kappa: time-1 map misses the fiber over 0 by " +
                                 std::to_string(miss));
    return kappa;
}

/// Measured scaling exponent of the lifted map at (x, t): the log of the
/// contact-form stretch along the Reeb direction, by central differences
/// of the closed-form map.
inline double kappa_strictness_defect(const DisplacingIsotopy& kappa,
                                      const Coords& x, double t,
                                      double eps = 1e-6) {
    Coords rdir(x.size());
    for (std::size_t i = 0; i + 1 < x.size(); i += 2) {
        rdir[i] = -kTwoPi * x[i + 1];
        rdir[i + 1] = kTwoPi * x[i];
    }
    auto shift = [&](double sgn) {
        Coords y(x.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + sgn * eps * rdir[i];
        const double scale = 1.0 / (kSqrtPi * std::sqrt(detail::sphere_norm2(y)));
        for (double& v : y) v *= scale;
        return kappa.map(y, t);
    };
    const Coords plus = shift(1.0), minus = shift(-1.0);
    Coords d(x.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = (plus[i] - minus[i]) / (2.0 * eps);
    const Coords img = kappa.map(x, t);
    return std::abs(std::log(liouville_at(img, d)));
}

// --------------------------------------------------------------------------
// Composition psi_t = kappa_t gamma_t
// --------------------------------------------------------------------------

struct ComposedIsotopy {
    HamiltonianSchedule sched;  // gamma_t = time-(t T) map of the cut-off flow
    std::optional<DisplacingIsotopy> kappa;
    double length_gamma = 0.0;   // Shelukhin-Hofer length of gamma
    double length_kappa = 0.0;   // Hofer norm of the twist (0 if absent)

    int dim() const { return kappa ? 2 * kappa->n + 2 : 4; }

    /// psi_t(x) = kappa_t(gamma_t(x)); the full map needs the sphere flow.
    Coords psi(const Coords& x, double t,
               const SphereIntegrateOptions& opt = {}) const {
        Coords y = gamma_map(x, sched, t * sched.T, opt);
        if (kappa) y = kappa->map(y, t);
        return y;
    }

    Coords psi1(const Coords& x, const SphereIntegrateOptions& opt = {}) const {
        return psi(x, 1.0, opt);
    }

    /// Contact Hamiltonian of the composition at time t evaluated at y:
    /// K_t = k + T h_{tT} o kappa_t^{-1} with h_t(y) = f_t(p(y)).
    double hamiltonian(const Coords& y, double t) const {
        double value = 0.0;
        Coords pre = y;
        if (kappa) {
            value += kappa->hamiltonian(y);
            pre = kappa->inverse(y, t);
        }
        value += sched.T * sched.f(t * sched.T, pre[0]).value;
        return value;
    }
};

inline ComposedIsotopy build_gamma(
    double T, double delta,
    SmoothingProfile mu = SmoothingProfile::quadratic_spline()) {
    ComposedIsotopy iso;
    iso.sched = HamiltonianSchedule::boundary(T, delta, mu);
    iso.length_gamma = shelukhin_length(iso.sched);
    return iso;
}

inline ComposedIsotopy compose_psi(ComposedIsotopy gamma,
                                   const DisplacingIsotopy& kappa) {
    gamma.kappa = kappa;
    gamma.length_kappa = kappa.hofer_norm;
    return gamma;
}

/// Sampled Shelukhin-Hofer length of the composition:
/// int_0^1 max over a fixed sphere sample set of |K_t| dt (composite
/// Simpson in t). Bounded by length(kappa) + length(gamma).
inline double measured_length(const ComposedIsotopy& psi, int time_nodes = 64,
                              int samples = 512, std::uint64_t seed = 20240901) {
    const int dim = psi.dim();
    std::vector<Coords> pts;
    pts.reserve(static_cast<std::size_t>(samples) + 32);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < samples; ++i) {
        Coords y(dim);
        double nn = 0.0;
        for (double& v : y) {
            v = gauss(rng);
            nn += v * v;
        }
        const double scale = 1.0 / (kSqrtPi * std::sqrt(nn));
        for (double& v : y) v *= scale;
        pts.push_back(std::move(y));
    }
    // deterministic extremal candidates: the boundary circle z1 = 0, where
    // the cut-off Hamiltonian attains its maximum
    for (int k = 0; k < 32; ++k) {
        Coords y(dim, 0.0);
        const double th = kTwoPi * k / 32.0;
        y[0] = kInvSqrtPi * std::cos(th);
        y[1] = kInvSqrtPi * std::sin(th);
        pts.push_back(std::move(y));
    }

    if (time_nodes % 2 != 0) ++time_nodes;
    auto max_abs_K = [&](double t) {
        double m = 0.0;
        for (const auto& y : pts)
            m = std::max(m, std::abs(psi.hamiltonian(y, t)));
        return m;
    };
    // composite Simpson over [0, 1]
    double acc = max_abs_K(0.0) + max_abs_K(1.0);
    for (int k = 1; k < time_nodes; ++k)
        acc += (k % 2 ? 4.0 : 2.0) * max_abs_K(k / static_cast<double>(time_nodes));
    return acc / (3.0 * time_nodes);
}

// --------------------------------------------------------------------------
// Translated-point search
// --------------------------------------------------------------------------

struct SearchResult {
    double margin = 0.0;          // min |psi1(x) - R_s(x)| over lifts and s
    double s_at_min = 0.0;
    double shortcut_bound = 0.0;  // radius-interval separation lower bound
    std::size_t lifts = 0;
};

namespace detail {

inline Coords rotate_coords(const Coords& y, double s) {
    const double c = std::cos(kTwoPi * s), sn = std::sin(kTwoPi * s);
    Coords out(y.size());
    for (std::size_t i = 0; i + 1 < y.size(); i += 2) {
        out[i] = c * y[i] - sn * y[i + 1];
        out[i + 1] = sn * y[i] + c * y[i + 1];
    }
    return out;
}

inline double coords_dist(const Coords& a, const Coords& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace detail

/// Lift the disk points of Sigma to the sphere (full preimage sampled over
/// fiber angles), push them through psi_1, and search the ambient distance
/// to every Reeb translate over an s-grid with local refinement. A strictly
/// positive margin certifies the absence of translated points at this
/// resolution; the rotational shortcut (the Reeb flow preserves the disk
/// radius) provides an independent lower bound that can never exceed the
/// searched margin.
inline SearchResult translated_point_search(
    const ComposedIsotopy& psi, const std::vector<SigmaPoint>& sigma,
    int fiber_samples = 64, int s_grid = 256,
    const SphereIntegrateOptions& opt = {}, std::uint64_t seed = 77) {
    if (sigma.empty())
        throw std::invalid_argument("translated_point_search: empty Sigma");
    const int dim = psi.dim();
    const int n = dim / 2 - 1;

    std::vector<Coords> lifts;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (const auto& pt : sigma) {
        const double r2 =
            std::max(0.0, 1.0 / kPi - pt.z.p * pt.z.p - pt.z.q * pt.z.q);
        const double r = std::sqrt(r2);
        if (r < 1e-12) {
            Coords y(dim, 0.0);
            y[0] = pt.z.p;
            y[1] = pt.z.q;
            lifts.push_back(std::move(y));
            continue;
        }
        for (int j = 0; j < fiber_samples; ++j) {
            Coords y(dim, 0.0);
            y[0] = pt.z.p;
            y[1] = pt.z.q;
            if (n == 1) {
                const double phi = kTwoPi * j / fiber_samples;
                y[2] = r * std::cos(phi);
                y[3] = r * std::sin(phi);
            } else {
                double nn = 0.0;
                for (int i = 2; i < dim; ++i) {
                    y[static_cast<std::size_t>(i)] = gauss(rng);
                    nn += y[static_cast<std::size_t>(i)] *
                          y[static_cast<std::size_t>(i)];
                }
                const double scale = r / std::sqrt(nn);
                for (int i = 2; i < dim; ++i)
                    y[static_cast<std::size_t>(i)] *= scale;
            }
            lifts.push_back(std::move(y));
        }
    }

    std::vector<Coords> images(lifts.size());
    parallel_for(lifts.size(), [&](std::size_t i) {
        images[i] = psi.psi1(lifts[i], opt);
    });

    SearchResult result;
    result.lifts = lifts.size();
    result.margin = 1e300;
    for (std::size_t i = 0; i < lifts.size(); ++i) {
        double best = 1e300, best_s = 0.0;
        for (int k = 0; k < s_grid; ++k) {
            const double s = static_cast<double>(k) / s_grid;
            const double d =
                detail::coords_dist(images[i], detail::rotate_coords(lifts[i], s));
            if (d < best) {
                best = d;
                best_s = s;
            }
        }
        const double span = 1.0 / s_grid;
        const double refined_s = golden_min(
            [&](double s) {
                return detail::coords_dist(images[i],
                                           detail::rotate_coords(lifts[i], s));
            },
            best_s - span, best_s + span, 1e-12);
        const double refined = detail::coords_dist(
            images[i], detail::rotate_coords(lifts[i], refined_s));
        const double candidate = std::min(best, refined);
        if (candidate < result.margin) {
            result.margin = candidate;
            result.s_at_min = refined_s;
        }
    }

    // rotational shortcut: |pr| is Reeb-invariant, so disjoint radius
    // intervals of pr(Sigma) and pr(psi1(Sigma)) force this margin
    double lo_in = 1e300, hi_in = 0.0, lo_out = 1e300, hi_out = 0.0;
    for (std::size_t i = 0; i < lifts.size(); ++i) {
        const double rin = std::hypot(lifts[i][0], lifts[i][1]);
        const double rout = std::hypot(images[i][0], images[i][1]);
        lo_in = std::min(lo_in, rin);
        hi_in = std::max(hi_in, rin);
        lo_out = std::min(lo_out, rout);
        hi_out = std::max(hi_out, rout);
    }
    result.shortcut_bound =
        std::max(0.0, std::max(lo_out - hi_in, lo_in - hi_out));
    return result;
}

// --------------------------------------------------------------------------
// Certification
// --------------------------------------------------------------------------

struct CertifyParams {
    double T = 10.0;
    double delta = 0.01;
    double width = 0.25;
    double eps = 0.4;
    int n = 1;
    bool kappa_enabled = true;
    double plateau_fraction = 0.4;
    std::string mu = "quadratic-spline";
    // neighbourhood radii in the disk (see the report for achieved margins)
    double r_minus = 0.1 * kInvSqrtPi;
    double r_plus = 0.001 * kInvSqrtPi;
    double eps_disk = 0.2 * kInvSqrtPi;
    int sigma_resolution = 64;
    int fiber_samples = 64;
    int s_grid = 256;
    double tol_displace = 1e-8;
    double margin_floor = 1e-3;  // a searched margin below this counts as found
    std::uint64_t seed = 20240901;
};

struct CertificationReport {
    int schema = 1;
    CertifyParams params;

    double length_gamma = 0.0;
    double length_kappa = 0.0;
    double length_psi = 0.0;
    double oscillation_bound = 0.0;  // 2 * length_psi
    double achieved_eps = 0.0;       // oscillation_bound - 1

    double sigma_hausdorff_to_C0 = 0.0;
    double sigma_flow_hausdorff_to_CT = 0.0;
    double sigma_g_residual_max = 0.0;

    double assump1_margin = 0.0;       // eps_disk - max |pr(kappa_1(pr^-1 U+))|
    double assump2_sigma_margin = 0.0; // r_minus - max dist(Sigma, lower pole)
    double assump2_image_margin = 0.0; // r_plus - max dist(flowed Sigma, upper pole)
    double separation_margin = 0.0;    // dist(U-, D(eps_disk)) in radii
    double displacement_miss = 0.0;    // |pr(kappa_1(point above i/sqrt(pi)))|
    double kappa_strictness_max = 0.0;

    double translated_point_margin = 0.0;
    double reeb_shift_at_min = 0.0;
    double shortcut_bound = 0.0;

    bool criterion_oscillation = false;  // oscillation_bound < 1 + eps
    bool criterion_no_translated = false;
    bool criterion_inclusions = false;
    bool all_ok() const {
        return criterion_oscillation && criterion_no_translated &&
               criterion_inclusions;
    }
};

inline CertificationReport certify(const CertifyParams& par) {
    CertificationReport rep;
    rep.params = par;

    // --- stage: schedule / gamma ------------------------------------------
    ComposedIsotopy iso;
    try {
        iso = build_gamma(par.T, par.delta, SmoothingProfile::by_name(par.mu));
        rep.length_gamma = iso.length_gamma;
    } catch (const std::exception& e) {
        throw StageFailure("gamma", e.what());
    }

    // --- stage: sigma ------------------------------------------------------
    std::vector<SigmaPoint> sigma;
    std::vector<DiskPoint> sigma_disk, flowed_disk;
    try {
        sigma = sigma_set(iso.sched, par.sigma_resolution);
        for (const auto& pt : sigma) {
            sigma_disk.push_back(pt.z);
            rep.sigma_g_residual_max =
                std::max(rep.sigma_g_residual_max, std::abs(pt.g_residual));
        }
        flowed_disk.resize(sigma.size());
        parallel_for(sigma.size(), [&](std::size_t i) {
            flowed_disk[i] =
                integrate_cutoff(sigma[i].z, iso.sched).points.back();
        });
        const int m = 512;
        rep.sigma_hausdorff_to_C0 =
            hausdorff(sigma_disk, arc_C(par.T, m).samples);
        rep.sigma_flow_hausdorff_to_CT =
            hausdorff(flowed_disk, arc_snapshot(par.T, par.T, m));

        const DiskPoint lower = repelling_fixed_point();
        const DiskPoint upper = attracting_fixed_point();
        double worst_sigma = 0.0, worst_image = 0.0;
        for (const auto& z : sigma_disk)
            worst_sigma = std::max(worst_sigma, dist(z, lower));
        for (const auto& z : flowed_disk)
            worst_image = std::max(worst_image, dist(z, upper));
        rep.assump2_sigma_margin = par.r_minus - worst_sigma;
        rep.assump2_image_margin = par.r_plus - worst_image;
    } catch (const StageFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw StageFailure("sigma", e.what());
    }

    // --- stage: kappa ------------------------------------------------------
    try {
        if (par.kappa_enabled) {
            const DisplacingIsotopy kappa = build_kappa(
                par.width, par.n, par.plateau_fraction, par.tol_displace);
            iso = compose_psi(iso, kappa);
            rep.length_kappa = kappa.hofer_norm;

            Coords a_point(2 * static_cast<std::size_t>(par.n) + 2, 0.0);
            a_point[1] = kInvSqrtPi;
            const Coords a_img = kappa.map(a_point, 1.0);
            rep.displacement_miss = std::hypot(a_img[0], a_img[1]);

            // strictness of the lift at sampled (point, time) pairs
            std::mt19937_64 rng(par.seed + 1);
            std::normal_distribution<double> gauss;
            for (int i = 0; i < 32; ++i) {
                Coords y(2 * static_cast<std::size_t>(par.n) + 2);
                double nn = 0.0;
                for (double& v : y) {
                    v = gauss(rng);
                    nn += v * v;
                }
                const double scale = 1.0 / (kSqrtPi * std::sqrt(nn));
                for (double& v : y) v *= scale;
                for (double t : {0.25, 0.5, 1.0})
                    rep.kappa_strictness_max =
                        std::max(rep.kappa_strictness_max,
                                 kappa_strictness_defect(kappa, y, t));
            }

            // inclusion (the image of the fibers over U+ lands inside the
            // fibers over the small disk around the origin)
            double worst = 0.0;
            for (int ir = 1; ir <= 4; ++ir) {
                for (int ip = 0; ip < 8; ++ip) {
                    const double rho = par.r_plus * ir / 4.0;
                    const double phi = kTwoPi * ip / 8.0;
                    const double z0p = rho * std::cos(phi);
                    const double z0q = kInvSqrtPi + rho * std::sin(phi);
                    const double rad2 = z0p * z0p + z0q * z0q;
                    if (rad2 > 1.0 / kPi) continue;  // outside the disk
                    const double r = std::sqrt(1.0 / kPi - rad2);
                    const int fiber = r < 1e-12 ? 1 : 8;
                    for (int j = 0; j < fiber; ++j) {
                        Coords y(2 * static_cast<std::size_t>(par.n) + 2, 0.0);
                        y[0] = z0p;
                        y[1] = z0q;
                        if (fiber > 1) {
                            y[2] = r * std::cos(kTwoPi * j / fiber);
                            y[3] = r * std::sin(kTwoPi * j / fiber);
                        }
                        const Coords img = kappa.map(y, 1.0);
                        worst = std::max(worst, std::hypot(img[0], img[1]));
                    }
                }
            }
            rep.assump1_margin = par.eps_disk - worst;
        } else {
            rep.assump1_margin = 0.0;
        }
        rep.separation_margin =
            (kInvSqrtPi - par.r_minus) - par.eps_disk;  // U- vs D(eps) gap
    } catch (const StageFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw StageFailure("kappa", e.what());
    }

    // --- stage: length -----------------------------------------------------
    try {
        rep.length_psi = measured_length(iso, 64, 512, par.seed);
        rep.oscillation_bound = 2.0 * rep.length_psi;
        rep.achieved_eps = rep.oscillation_bound - 1.0;
    } catch (const std::exception& e) {
        throw StageFailure("length", e.what());
    }

    // --- stage: search -----------------------------------------------------
    try {
        const SearchResult search = translated_point_search(
            iso, sigma, par.fiber_samples, par.s_grid, {}, par.seed + 2);
        rep.translated_point_margin = search.margin;
        rep.reeb_shift_at_min = search.s_at_min;
        rep.shortcut_bound = search.shortcut_bound;
    } catch (const std::exception& e) {
        throw StageFailure("search", e.what());
    }

    rep.criterion_oscillation = rep.oscillation_bound < 1.0 + par.eps;
    rep.criterion_no_translated =
        rep.translated_point_margin > par.margin_floor;
    rep.criterion_inclusions =
        (!par.kappa_enabled || rep.assump1_margin > 0.0) &&
        rep.assump2_sigma_margin > 0.0 && rep.assump2_image_margin > 0.0 &&
        rep.separation_margin > 0.0;
    return rep;
}

}  // namespace contactlab
