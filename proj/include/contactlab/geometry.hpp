#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

namespace contactlab {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSqrtPi = 1.7724538509055160273;
inline constexpr double kInvSqrtPi = 0.56418958354775628695;  // radius of D(1)

/// Point of the closed disk D(1) = { pi*(p^2+q^2) <= 1 }.
struct DiskPoint {
    double p = 0.0;
    double q = 0.0;
};

/// Linearizing coordinate w = a + ib on the strip R x [0,pi].
struct StripPoint {
    double a = 0.0;
    double b = 0.0;
};

inline double dist(DiskPoint u, DiskPoint v) {
    return std::hypot(u.p - v.p, u.q - v.q);
}

inline double radius2(DiskPoint z) { return z.p * z.p + z.q * z.q; }

/// ell(p,q) = 1 - pi*(p^2+q^2); nonnegative on D(1), zero on the boundary.
inline double boundary_defect(DiskPoint z) { return 1.0 - kPi * radius2(z); }

inline DiskPoint reflect_p(DiskPoint z) { return {-z.p, z.q}; }

inline DiskPoint rotate(DiskPoint z, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * z.p - s * z.q, s * z.p + c * z.q};
}

// --------------------------------------------------------------------------
// Circle fitting (Kasa least squares) and intersection angles
// --------------------------------------------------------------------------

struct Circle {
    double cx = 0.0;
    double cy = 0.0;
    double r = 0.0;
    double rms_residual = 0.0;  // rms of |dist(center) - r| over the samples
};

/// Least-squares circle through a point cloud. Solves the linear Kasa system
/// for x^2 + y^2 + D x + E y + F = 0.
inline Circle fit_circle(const std::vector<DiskPoint>& pts) {
    double sxx = 0, sxy = 0, syy = 0, sx = 0, sy = 0;
    double sxz = 0, syz = 0, sz = 0;
    const double n = static_cast<double>(pts.size());
    for (const auto& pt : pts) {
        const double x = pt.p, y = pt.q, z = x * x + y * y;
        sxx += x * x; sxy += x * y; syy += y * y;
        sx += x; sy += y;
        sxz += x * z; syz += y * z; sz += z;
    }
    // Normal equations for (D, E, F).
    double a[3][3] = {{sxx, sxy, sx}, {sxy, syy, sy}, {sx, sy, n}};
    double rhs[3] = {-sxz, -syz, -sz};
    // Gaussian elimination with partial pivoting on the 3x3 system.
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int row = col + 1; row < 3; ++row)
            if (std::abs(a[row][col]) > std::abs(a[piv][col])) piv = row;
        std::swap(a[col], a[piv]);
        std::swap(rhs[col], rhs[piv]);
        for (int row = col + 1; row < 3; ++row) {
            const double f = a[row][col] / a[col][col];
            for (int k = col; k < 3; ++k) a[row][k] -= f * a[col][k];
            rhs[row] -= f * rhs[col];
        }
    }
    double sol[3];
    for (int row = 2; row >= 0; --row) {
        double acc = rhs[row];
        for (int k = row + 1; k < 3; ++k) acc -= a[row][k] * sol[k];
        sol[row] = acc / a[row][row];
    }
    Circle c;
    c.cx = -0.5 * sol[0];
    c.cy = -0.5 * sol[1];
    c.r = std::sqrt(std::max(0.0, c.cx * c.cx + c.cy * c.cy - sol[2]));
    double acc = 0.0;
    for (const auto& pt : pts) {
        const double d = std::hypot(pt.p - c.cx, pt.q - c.cy) - c.r;
        acc += d * d;
    }
    c.rms_residual = std::sqrt(acc / n);
    return c;
}

/// Intersection angle between a circle and the origin-centered circle of
/// radius R0. Orthogonal circles satisfy d^2 = r^2 + R0^2.
inline double intersection_angle(const Circle& c, double R0) {
    const double d2 = c.cx * c.cx + c.cy * c.cy;
    const double cosang = (d2 - c.r * c.r - R0 * R0) / (2.0 * c.r * R0);
    return std::acos(std::clamp(cosang, -1.0, 1.0));
}

// --------------------------------------------------------------------------
// Point-cloud distances
// --------------------------------------------------------------------------

inline double directed_hausdorff(const std::vector<DiskPoint>& from,
                                 const std::vector<DiskPoint>& to) {
    double worst = 0.0;
    for (const auto& a : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& b : to) best = std::min(best, dist(a, b));
        worst = std::max(worst, best);
    }
    return worst;
}

inline double hausdorff(const std::vector<DiskPoint>& a,
                        const std::vector<DiskPoint>& b) {
    return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

}  // namespace contactlab
