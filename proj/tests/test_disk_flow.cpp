#include "contactlab/disk_flow.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace contactlab;

TEST_CASE("strip chart hits the hand-computed anchors") {
    const auto z0 = strip_to_disk({0.0, 0.0});
    CHECK(z0.p == Catch::Approx(0.5641895835477563).margin(1e-12));
    CHECK(std::abs(z0.q) < 1e-15);

    const auto center = strip_to_disk({0.0, kPi / 2.0});
    CHECK(std::abs(center.p) < 1e-15);
    CHECK(std::abs(center.q) < 1e-15);
}

TEST_CASE("strip chart saturates to the fixed points") {
    for (double b : {0.0, 1.0, kPi / 2.0, kPi}) {
        const auto up = strip_to_disk({30.0, b});
        CHECK(dist(up, attracting_fixed_point()) < 1e-10);
        const auto down = strip_to_disk({-30.0, b});
        CHECK(dist(down, repelling_fixed_point()) < 1e-10);
        // overflow-proof far past double range of cosh
        const auto far = strip_to_disk({1e4, b});
        CHECK(dist(far, attracting_fixed_point()) < 1e-15);
    }
}

TEST_CASE("strip chart agrees with the complex-exponential oracle") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> ua(-8.0, 8.0), ub(0.0, kPi);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double a = ua(rng), b = ub(rng);
        const auto z = strip_to_disk({a, b});
        const auto ref = oracles::strip_chart_complex(a, b);
        worst = std::max(worst, dist(z, ref));
    }
    CHECK(worst < 1e-13);
}

TEST_CASE("disk_to_strip inverts the chart") {
    const auto w0 = disk_to_strip({kInvSqrtPi, 0.0});
    CHECK(std::abs(w0.a) < 1e-12);
    CHECK(std::abs(w0.b) < 1e-12);

    const auto wc = disk_to_strip({0.0, 0.0});
    CHECK(std::abs(wc.a) < 1e-15);
    CHECK(wc.b == Catch::Approx(kPi / 2.0).margin(1e-14));

    oracles::SphereSampler s(3);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const DiskPoint z = s.disk_point();
        const auto back = strip_to_disk(disk_to_strip(z));
        worst = std::max(worst, dist(z, back));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("fixed points have no strip coordinate") {
    CHECK_THROWS_AS(disk_to_strip(attracting_fixed_point()), FixedPointSingular);
    CHECK_THROWS_AS(disk_to_strip({1e-10, -kInvSqrtPi + 1e-10}), FixedPointSingular);
}

TEST_CASE("vector field X matches its complex form") {
    const auto at_center = vector_field_X({0.0, 0.0});
    CHECK(at_center.dp == 0.0);
    CHECK(at_center.dq == 1.0);

    const auto at_top = vector_field_X(attracting_fixed_point());
    CHECK(std::abs(at_top.dp) < 1e-15);
    CHECK(std::abs(at_top.dq) < 1e-15);

    // the vertical line p = 0 is invariant
    for (double q = -0.5; q <= 0.5; q += 0.05)
        CHECK(vector_field_X({0.0, q * kInvSqrtPi * 2.0 * 0.9}).dp == 0.0);

    oracles::SphereSampler s(5);
    for (int i = 0; i < 200; ++i) {
        const DiskPoint z = s.disk_point();
        const auto v = vector_field_X(z);
        const std::complex<double> zz(z.p, z.q), I(0.0, 1.0);
        const auto ref = I * kPi * zz * zz + I;
        CHECK(v.dp == Catch::Approx(ref.real()).margin(1e-14));
        CHECK(v.dq == Catch::Approx(ref.imag()).margin(1e-14));
    }
}

TEST_CASE("exact flow: identity, group law, chart route") {
    oracles::SphereSampler s(9);
    for (int i = 0; i < 300; ++i) {
        const DiskPoint z = s.disk_point();
        CHECK(dist(exact_flow(z, 0.0), z) < 1e-15);
    }
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> ut(-3.0, 3.0);
    double worst_group = 0.0, worst_chart = 0.0;
    for (int i = 0; i < 300; ++i) {
        const DiskPoint z = s.disk_point();
        const double t1 = ut(rng), t2 = ut(rng);
        worst_group = std::max(
            worst_group,
            dist(exact_flow(exact_flow(z, t1), t2), exact_flow(z, t1 + t2)));
        StripPoint w;
        try {
            w = disk_to_strip(z);
        } catch (const FixedPointSingular&) {
            continue;
        }
        const auto via_strip = strip_to_disk({w.a + 2.0 * kSqrtPi * t1, w.b});
        worst_chart = std::max(worst_chart, dist(exact_flow(z, t1), via_strip));
    }
    CHECK(worst_group < 1e-10);
    CHECK(worst_chart < 1e-10);
}

TEST_CASE("exact flow fixes the fixed points and preserves the disk") {
    for (double t : {-5.0, -0.3, 0.7, 12.0}) {
        CHECK(dist(exact_flow(attracting_fixed_point(), t),
                   attracting_fixed_point()) < 1e-15);
        CHECK(dist(exact_flow(repelling_fixed_point(), t),
                   repelling_fixed_point()) < 1e-15);
    }
    oracles::SphereSampler s(21);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ut(-4.0, 4.0);
    for (int i = 0; i < 300; ++i) {
        const DiskPoint z = s.disk_point();
        const auto img = exact_flow(z, ut(rng));
        CHECK(boundary_defect(img) > -1e-12);
    }
    // boundary circle preserved
    for (int k = 0; k < 32; ++k) {
        const double th = kTwoPi * k / 32.0;
        const DiskPoint z{kInvSqrtPi * std::cos(th), kInvSqrtPi * std::sin(th)};
        CHECK(std::abs(boundary_defect(exact_flow(z, 1.3))) < 1e-12);
    }
}

TEST_CASE("exact flow agrees with a blind RK4 integration") {
    oracles::SphereSampler s(33);
    std::mt19937_64 rng(35);
    std::uniform_real_distribution<double> ut(0.0, 5.0);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const DiskPoint z = s.disk_point(0.98);
        const double t = ut(rng);
        worst = std::max(
            worst, dist(exact_flow(z, t), oracles::rk4_reference_flow(z, t, 1e-4)));
    }
    CHECK(worst < 1e-7);
}

TEST_CASE("q on the strip") {
    for (double b : {0.0, 0.4, kPi / 2.0, kPi})
        CHECK(q_in_strip({0.0, b}) == 0.0);
    CHECK(q_in_strip({40.0, 0.0}) == Catch::Approx(kInvSqrtPi).margin(1e-12));

    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> ua(-8.0, 8.0), ub(0.0, kPi);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double a = ua(rng), b = ub(rng);
        const auto ref = oracles::strip_chart_complex(a, b);
        worst = std::max(worst, std::abs(q_in_strip({a, b}) - ref.q));
        worst = std::max(worst, std::abs(p_in_strip({a, b}) - ref.p));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("scaling exponent: zero locus, quadrature oracle, additivity") {
    // exact zero on a = -sqrt(pi) T
    for (double T : {0.25, 1.0, 3.0})
        for (double b : {0.1, 1.0, kPi / 2.0, 3.0})
            CHECK(std::abs(scaling_exponent_exact({-kSqrtPi * T, b}, T)) < 1e-14);

    // quadrature of -2 pi q along the flow
    auto g_quad = [](StripPoint w, double T) {
        return adaptive_simpson(
            [&](double t) {
                return -kTwoPi * q_in_strip({w.a + 2.0 * kSqrtPi * t, w.b});
            },
            0.0, T, 1e-12);
    };
    CHECK(scaling_exponent_exact({0.0, kPi / 2.0}, 1.0) ==
          Catch::Approx(g_quad({0.0, kPi / 2.0}, 1.0)).margin(1e-8));

    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> ua(-3.0, 3.0), ub(0.05, kPi - 0.05),
        uT(0.1, 2.5);
    for (int i = 0; i < 25; ++i) {
        const StripPoint w{ua(rng), ub(rng)};
        const double T = uT(rng);
        CHECK(scaling_exponent_exact(w, T) ==
              Catch::Approx(g_quad(w, T)).margin(1e-8));

        // additivity under splitting the time interval
        const double S = 0.5 * T;
        const double whole = scaling_exponent_exact(w, T);
        const double first = scaling_exponent_exact(w, S);
        const double rest =
            scaling_exponent_exact({w.a + 2.0 * kSqrtPi * S, w.b}, T - S);
        CHECK(whole == Catch::Approx(first + rest).margin(1e-12));
    }

    CHECK(scaling_exponent_exact({0.7, 0.3}, 0.0) == 0.0);
}

TEST_CASE("scaling exponent changes sign only across a = -sqrt(pi) T") {
    for (double T : {0.5, 1.0, 2.0}) {
        for (double b : {0.3, kPi / 2.0, 2.8}) {
            const double a0 = -kSqrtPi * T;
            int sign_changes = 0;
            double prev = scaling_exponent_exact({a0 - 2.0, b}, T);
            for (double s = -2.0 + 0.05; s <= 2.0 + 1e-9; s += 0.05) {
                const double cur = scaling_exponent_exact({a0 + s, b}, T);
                if (std::signbit(cur) != std::signbit(prev) && cur != 0.0) {
                    ++sign_changes;
                    const double root = bisect(
                        [&](double x) {
                            return scaling_exponent_exact({a0 + x, b}, T);
                        },
                        s - 0.05, s, 1e-13);
                    CHECK(std::abs(root) < 1e-9);
                }
                prev = cur;
            }
            CHECK(sign_changes == 1);
        }
    }
}

TEST_CASE("the arc C") {
    const auto arc = arc_C(1.0, 33);
    CHECK(arc.samples.size() == 33);
    CHECK(std::abs(boundary_defect(arc.samples.front())) < 1e-12);
    CHECK(std::abs(boundary_defect(arc.samples.back())) < 1e-12);
    for (std::size_t k = 0; k < arc.samples.size(); ++k) {
        CHECK(std::abs(scaling_exponent_exact({arc.a, arc.b_values[k]}, arc.T)) <
              1e-10);
    }

    for (double T : {0.5, 1.0, 2.0}) {
        const auto a = arc_C(T, 65);
        const Circle c = fit_circle(a.samples);
        CHECK(c.rms_residual < 1e-8);
        CHECK(std::abs(intersection_angle(c, kInvSqrtPi) - kPi / 2.0) < 1e-6);

        // time-T image is the reflection of C across q = 0
        for (std::size_t k = 0; k < a.samples.size(); ++k) {
            const auto img = exact_flow(a.samples[k], T);
            const auto refl = strip_to_disk({-a.a, a.b_values[k]});
            CHECK(dist(img, refl) < 1e-10);
        }
        // half-time image lies on the line q = 0
        for (const auto& z : a.samples)
            CHECK(std::abs(exact_flow(z, T / 2.0).q) < 1e-12);
    }

    CHECK_THROWS(arc_C(-1.0, 16));
    CHECK_THROWS(arc_C(1.0, 1));
}

TEST_CASE("boundary guide trajectory") {
    const auto z = boundary_trajectory(2.0);
    const auto mid = z.at(1.0);
    CHECK(mid.p == Catch::Approx(kInvSqrtPi).margin(1e-14));
    CHECK(std::abs(mid.q) < 1e-14);
    CHECK(z.at(0.0).q == Catch::Approx(-z.at(2.0).q).margin(1e-14));
    for (double t = 0.0; t <= 2.0; t += 0.1) {
        CHECK(std::abs(boundary_defect(z.at(t))) < 1e-14);
        CHECK(z.at(t).p > 0.0);
        const auto via_chart = strip_to_disk({z.strip_a(t), 0.0});
        CHECK(dist(z.at(t), via_chart) < 1e-14);
    }
}

TEST_CASE("p-integral stays under one half and saturates") {
    const double v1 = p_integral(1.0);
    CHECK(v1 > 0.0);
    CHECK(v1 < 0.5);
    CHECK(v1 == Catch::Approx(oracles::p_integral_closed_form(1.0)).margin(1e-9));
    // frozen regression value, from the gd closed form
    CHECK(v1 == Catch::Approx(0.39285176236550445).margin(1e-9));

    double prev = 0.0;
    for (double T : {1.0, 2.0, 5.0, 10.0, 40.0}) {
        const double v = p_integral(T);
        CHECK(v < 0.5);
        CHECK(v > prev);
        CHECK(v == Catch::Approx(oracles::p_integral_closed_form(T)).margin(1e-8));
        prev = v;
    }
    CHECK(std::abs(p_integral(40.0) - 0.5) < 1e-6);
}
