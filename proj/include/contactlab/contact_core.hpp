#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "contactlab/errors.hpp"
#include "contactlab/geometry.hpp"

namespace contactlab {

// ==========================================================================
// The round sphere S^{2n+1} = { pi*|z|^2 = 1 } in R^{2n+2} with coordinates
// (p, q, x_1, y_1, ..., x_n, y_n), carrying the restriction of the Liouville
// form  lambda = (p dq - q dp)/2 + sum (x_i dy_i - y_i dx_i)/2.
// ==========================================================================

inline double sphere_constraint(const std::vector<double>& c) {
    double s = 0.0;
    for (double v : c) s += v * v;
    return kPi * s - 1.0;
}

/// Point of the unit-capacity sphere. The constructor enforces the
/// constraint pi*|coords|^2 = 1 to 1e-12.
struct SpherePoint {
    std::vector<double> coords;  // (p, q, x_1, y_1, ..., x_n, y_n)

    explicit SpherePoint(std::vector<double> c) : coords(std::move(c)) {
        if (coords.size() < 4 || coords.size() % 2 != 0)
            throw DimensionMismatch("SpherePoint: need 2n+2 coordinates, n >= 1");
        if (std::abs(sphere_constraint(coords)) > 1e-12)
            throw std::invalid_argument("SpherePoint: not on the sphere dB(1)");
    }

    /// Radial projection of an off-sphere vector onto dB(1).
    static SpherePoint projected(std::vector<double> c) {
        double s = 0.0;
        for (double v : c) s += v * v;
        const double scale = 1.0 / (kSqrtPi * std::sqrt(s));
        for (double& v : c) v *= scale;
        return SpherePoint(std::move(c));
    }

    int n() const { return static_cast<int>(coords.size() / 2) - 1; }
    double p() const { return coords[0]; }
    double q() const { return coords[1]; }
};

/// Tangent vector of the round sphere; <coords, dir> = 0 to 1e-10.
struct TangentVector {
    SpherePoint base;
    std::vector<double> dir;

    TangentVector(SpherePoint at, std::vector<double> d)
        : base(std::move(at)), dir(std::move(d)) {
        if (dir.size() != base.coords.size())
            throw DimensionMismatch("TangentVector: dimension mismatch");
        double dot = 0.0;
        for (std::size_t i = 0; i < dir.size(); ++i) dot += base.coords[i] * dir[i];
        if (std::abs(dot) > 1e-10)
            throw std::invalid_argument("TangentVector: not tangent to the sphere");
    }
};

enum class FieldName { Reeb, F, JF, V, X };

/// lambda evaluated on an ambient vector at a point of the sphere.
inline double liouville_at(const std::vector<double>& at,
                           const std::vector<double>& dir) {
    if (at.size() != dir.size())
        throw DimensionMismatch("liouville: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < at.size(); i += 2)
        acc += 0.5 * (at[i] * dir[i + 1] - at[i + 1] * dir[i]);
    return acc;
}

inline double liouville(const SpherePoint& at, const TangentVector& v) {
    if (at.coords != v.base.coords)
        throw DimensionMismatch("liouville: vector is not based at the given point");
    return liouville_at(at.coords, v.dir);
}

/// d(lambda) = dp^dq + sum dx_i^dy_i as a constant-coefficient 2-form.
inline double symplectic_pairing(const std::vector<double>& u,
                                 const std::vector<double>& v) {
    if (u.size() != v.size())
        throw DimensionMismatch("symplectic_pairing: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); i += 2)
        acc += u[i] * v[i + 1] - u[i + 1] * v[i];
    return acc;
}

namespace detail {

// Raw field evaluations on ambient coordinates; all are tangent to every
// sphere pi*|z|^2 = r.
inline std::vector<double> reeb_dir(const std::vector<double>& c) {
    std::vector<double> d(c.size());
    for (std::size_t i = 0; i + 1 < c.size(); i += 2) {
        d[i] = -kTwoPi * c[i + 1];
        d[i + 1] = kTwoPi * c[i];
    }
    return d;
}

inline std::vector<double> f_dir(const std::vector<double>& c, int i) {
    std::vector<double> d(c.size(), 0.0);
    const std::size_t xi = 2 * static_cast<std::size_t>(i), yi = xi + 1;
    d[0] = -kTwoPi * c[xi];
    d[1] = kTwoPi * c[yi];
    d[xi] = kTwoPi * c[0];
    d[yi] = -kTwoPi * c[1];
    return d;
}

inline std::vector<double> jf_dir(const std::vector<double>& c, int i) {
    std::vector<double> d(c.size(), 0.0);
    const std::size_t xi = 2 * static_cast<std::size_t>(i), yi = xi + 1;
    d[0] = -kTwoPi * c[yi];
    d[1] = -kTwoPi * c[xi];
    d[xi] = kTwoPi * c[1];
    d[yi] = kTwoPi * c[0];
    return d;
}

// V = sum (y_i F_i - x_i JF_i)/2; tangent to the contact distribution.
inline std::vector<double> v_dir(const std::vector<double>& c) {
    std::vector<double> d(c.size(), 0.0);
    const double p = c[0], q = c[1];
    double xy2 = 0.0;
    for (std::size_t i = 2; i < c.size(); ++i) xy2 += c[i] * c[i];
    d[0] = 0.0;
    d[1] = kPi * xy2;
    for (std::size_t xi = 2; xi + 1 < c.size(); xi += 2) {
        const double x = c[xi], y = c[xi + 1];
        d[xi] = kPi * (p * y - q * x);
        d[xi + 1] = -kPi * (p * x + q * y);
    }
    return d;
}

inline std::vector<double> x_dir(const std::vector<double>& c) {
    std::vector<double> d = v_dir(c);
    const std::vector<double> r = reeb_dir(c);
    const double p = c[0];
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += p * r[i];
    return d;
}

}  // namespace detail

/// Evaluate one of the named fields at a sphere point. The index selects
/// F_i / JF_i and must satisfy 1 <= i <= n.
inline TangentVector field(FieldName name, const SpherePoint& at, int i = 1) {
    switch (name) {
        case FieldName::Reeb:
            return {at, detail::reeb_dir(at.coords)};
        case FieldName::F:
        case FieldName::JF: {
            if (i < 1 || i > at.n())
                throw std::out_of_range("field: index out of range");
            return {at, name == FieldName::F ? detail::f_dir(at.coords, i)
                                             : detail::jf_dir(at.coords, i)};
        }
        case FieldName::V:
            return {at, detail::v_dir(at.coords)};
        case FieldName::X:
            return {at, detail::x_dir(at.coords)};
    }
    throw std::invalid_argument("field: unknown name");
}

/// Residual of  d(lambda(X)) + dlambda(X,-) = -2 pi q lambda  evaluated on a
/// tangent vector; vanishes to 1e-10 on the sphere. d(lambda(X)) = dp since
/// lambda(X) = p there, and dlambda is evaluated in closed form.
inline double verify_contact_identity(const SpherePoint& at,
                                      const TangentVector& v) {
    const std::vector<double> x = detail::x_dir(at.coords);
    const double r =
        v.dir[0] + symplectic_pairing(x, v.dir) +
        kTwoPi * at.q() * liouville_at(at.coords, v.dir);
    return std::abs(r);
}

/// Time-s Reeb flow: simultaneous rotation by angle 2 pi s in every
/// coordinate plane. Orbits close up at s = 1.
inline SpherePoint reeb_flow(const SpherePoint& at, double s) {
    const double c = std::cos(kTwoPi * s), sn = std::sin(kTwoPi * s);
    std::vector<double> out(at.coords.size());
    for (std::size_t i = 0; i + 1 < out.size(); i += 2) {
        out[i] = c * at.coords[i] - sn * at.coords[i + 1];
        out[i + 1] = sn * at.coords[i] + c * at.coords[i + 1];
    }
    return SpherePoint(std::move(out));
}

/// Projection dB(1) -> D(1) remembering (p, q).
inline DiskPoint project_to_disk(const SpherePoint& at) {
    return {at.coords[0], at.coords[1]};
}

}  // namespace contactlab
