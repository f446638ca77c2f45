#pragma once

// Test-only reference implementations, kept independent of the library code
// paths they are used to check.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "contactlab/geometry.hpp"

namespace oracles {

using cplx = std::complex<double>;

// Strip-to-disk chart evaluated directly from the complex-exponential
// formula z = (i e^w + 1) / (sqrt(pi) (e^w + i)).
inline contactlab::DiskPoint strip_chart_complex(double a, double b) {
    const cplx i(0.0, 1.0);
    const cplx ew = std::exp(cplx(a, b));
    const cplx z = (i * ew + 1.0) / (contactlab::kSqrtPi * (ew + i));
    return {z.real(), z.imag()};
}

// Fixed-step RK4 reference integrator for z' = i pi z^2 + i.
inline contactlab::DiskPoint rk4_reference_flow(contactlab::DiskPoint z0,
                                                double t_final, double h) {
    const cplx i(0.0, 1.0);
    auto rhs = [&](cplx z) { return i * contactlab::kPi * z * z + i; };
    cplx z(z0.p, z0.q);
    double t = 0.0;
    while (t < t_final - 1e-15) {
        const double step = std::min(h, t_final - t);
        const cplx k1 = rhs(z);
        const cplx k2 = rhs(z + 0.5 * step * k1);
        const cplx k3 = rhs(z + 0.5 * step * k2);
        const cplx k4 = rhs(z + step * k3);
        z += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += step;
    }
    return {z.real(), z.imag()};
}

// Gudermannian function; the boundary guide trajectory satisfies
// p = cos(gd(a))/sqrt(pi), q = sin(gd(a))/sqrt(pi), so the winding angle of
// the guide and the p-integral have gd closed forms.
inline double gudermannian(double x) {
    return 2.0 * std::atan(std::tanh(0.5 * x));
}

inline double p_integral_closed_form(double T) {
    return gudermannian(contactlab::kSqrtPi * T) / contactlab::kPi;
}

// Liouville form on ambient vectors (duplicated on purpose).
inline double liouville_ref(const std::vector<double>& z,
                            const std::vector<double>& v) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < z.size(); i += 2)
        acc += 0.5 * (z[i] * v[i + 1] - z[i + 1] * v[i]);
    return acc;
}

// Finite-difference evaluation of dlambda(u, v) for constant extensions of
// u and v: dlambda(u,v) = D_u[lambda(v)] - D_v[lambda(u)].
inline double two_form_fd(const std::vector<double>& z,
                          const std::vector<double>& u,
                          const std::vector<double>& v, double eps = 1e-6) {
    auto shifted = [&](const std::vector<double>& dirn, double s) {
        std::vector<double> out = z;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * dirn[i];
        return out;
    };
    const double d1 = (liouville_ref(shifted(u, eps), v) -
                       liouville_ref(shifted(u, -eps), v)) /
                      (2.0 * eps);
    const double d2 = (liouville_ref(shifted(v, eps), u) -
                       liouville_ref(shifted(v, -eps), u)) /
                      (2.0 * eps);
    return d1 - d2;
}

// Deterministic random sphere points and tangents.
struct SphereSampler {
    std::mt19937_64 rng;
    std::normal_distribution<double> gauss{0.0, 1.0};

    explicit SphereSampler(unsigned seed) : rng(seed) {}

    std::vector<double> point(int n) {
        std::vector<double> c(2 * n + 2);
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (double& x : c) {
                x = gauss(rng);
                norm2 += x * x;
            }
        } while (norm2 < 1e-12);
        const double scale = 1.0 / (contactlab::kSqrtPi * std::sqrt(norm2));
        for (double& x : c) x *= scale;
        return c;
    }

    std::vector<double> tangent(const std::vector<double>& at) {
        std::vector<double> d(at.size());
        for (double& x : d) x = gauss(rng);
        double dot = 0.0, nn = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            dot += d[i] * at[i];
            nn += at[i] * at[i];
        }
        for (std::size_t i = 0; i < d.size(); ++i) d[i] -= dot / nn * at[i];
        // re-project once more to push the residual below 1e-14
        dot = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) dot += d[i] * at[i];
        for (std::size_t i = 0; i < d.size(); ++i) d[i] -= dot / nn * at[i];
        return d;
    }

    contactlab::DiskPoint disk_point(double max_radius_frac = 0.999) {
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        const double r =
            contactlab::kInvSqrtPi * max_radius_frac * std::sqrt(uni(rng));
        const double th = contactlab::kTwoPi * uni(rng);
        return {r * std::cos(th), r * std::sin(th)};
    }
};

}  // namespace oracles
