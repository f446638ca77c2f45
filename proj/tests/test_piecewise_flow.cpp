#include "contactlab/piecewise_flow.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "oracles.hpp"

using namespace contactlab;

namespace {

// Tubular fan around C(0): strip-abscissa offsets along b = const lines.
// Positive offsets lie on the attracting side ("above" C(0)).
DiskPoint fan_start(double T, double b, double offset) {
    return strip_to_disk({-kSqrtPi * T + offset, b});
}

}  // namespace

TEST_CASE("limit field: two regimes, continuous along the boundary") {
    const auto s = HamiltonianSchedule::boundary(1.0, 0.05);
    const double t = 0.2;
    const double eta = s.eta(t);

    const DiskPoint inner{0.5 * eta, -0.3};
    const auto vi = limit_field(inner, t, s);
    const auto vx = vector_field_X(inner);
    CHECK(vi.dp == vx.dp);
    CHECK(vi.dq == vx.dq);

    const DiskPoint outer{eta + 0.1, 0.2};
    const auto vo = limit_field(outer, t, s);
    CHECK(vo.dp == Catch::Approx(-kTwoPi * outer.q * eta).margin(1e-14));
    CHECK(vo.dq == Catch::Approx(kTwoPi * outer.p * eta).margin(1e-14));

    // on the boundary circle the two formulas agree where p = eta
    const double alpha = -kSqrtPi;  // guide position at t = 0, p = eta(0)
    const DiskPoint zb{kInvSqrtPi / std::cosh(alpha),
                       kInvSqrtPi * std::tanh(alpha)};
    const auto v1 = vector_field_X(zb);
    const auto v2 = Velocity{-kTwoPi * zb.q * zb.p, kTwoPi * zb.p * zb.p};
    CHECK(v1.dp == Catch::Approx(v2.dp).margin(1e-12));
    CHECK(v1.dq == Catch::Approx(v2.dq).margin(1e-12));
}

TEST_CASE("the guide start reproduces the boundary trajectory") {
    const double T = 1.0;
    const auto s = HamiltonianSchedule::boundary(T, 0.05);
    const auto guide = boundary_trajectory(T);
    const auto traj = integrate_piecewise(guide.at(0.0), s);
    CHECK(traj.boundary_solution);
    CHECK(classify_crossing(traj) == CrossingKind::none);
    for (double t = 0.0; t <= T; t += 0.05)
        CHECK(dist(traj.at(t), guide.at(t)) < 1e-10);
}

TEST_CASE("entrances come from above, exits from below, one crossing each") {
    const double T = 1.0;
    const auto s = HamiltonianSchedule::boundary(T, 0.05);

    int entrances = 0, exits = 0, transversal = 0;
    for (double b : {0.05, 0.15, 0.3, 0.5}) {
        for (double off : {0.5, 0.2, 0.08, -0.08, -0.2, -0.5}) {
            const DiskPoint z0 = fan_start(T, b, off);
            const auto traj = integrate_piecewise(z0, s);
            const auto kind = classify_crossing(traj);
            if (kind == CrossingKind::none) continue;
            ++transversal;
            CHECK(std::abs(traj.crossing_slope) > 1e-6);
            if (kind == CrossingKind::entrance) {
                ++entrances;
                CHECK(off > 0.0);
                CHECK(traj.crossing_qz < 0.0);
                CHECK(*traj.crossing_time < T / 2.0);
                // two-sided derivative formula at the crossing
                const DiskPoint uc = traj.at(*traj.crossing_time);
                const double eta = s.eta(*traj.crossing_time);
                CHECK(traj.crossing_slope ==
                      Catch::Approx(kTwoPi * eta * (traj.crossing_qz - uc.q))
                          .margin(1e-8));
            } else {
                ++exits;
                CHECK(off < 0.0);
                CHECK(traj.crossing_qz > 0.0);
                CHECK(*traj.crossing_time >= T / 2.0 - 1e-12);
            }
        }
    }
    CHECK(entrances >= 5);
    CHECK(exits >= 5);
    CHECK(transversal == entrances + exits);
}

TEST_CASE("piecewise trajectories stay on one side of the moving arc") {
    const double T = 1.0;
    const auto s = HamiltonianSchedule::boundary(T, 0.05);
    for (double b : {0.1, 0.4, 1.2}) {
        for (double off : {0.4, 0.15, -0.15, -0.4}) {
            const auto traj = integrate_piecewise(fan_start(T, b, off), s);
            for (double t = 0.0; t <= T; t += 0.02) {
                const DiskPoint u = traj.at(t);
                const double side =
                    disk_to_strip(u).a - kSqrtPi * (2.0 * t - T);
                CHECK(std::signbit(side) == std::signbit(off));
                CHECK(boundary_defect(u) > -1e-9);
            }
        }
    }
}

TEST_CASE("scaling exponent trichotomy around the arc") {
    const double T = 1.0;
    const auto s = HamiltonianSchedule::boundary(T, 0.05);

    // riding the arc: g = 0
    for (double b : {0.3, kPi / 2.0, 2.6}) {
        const auto traj = integrate_piecewise(fan_start(T, b, 0.0), s);
        CHECK(std::abs(scaling_exponent_piecewise(traj)) < 1e-8);
    }
    // above: negative; below: positive
    for (double b : {0.1, 0.8, kPi / 2.0, 2.4}) {
        for (double off : {0.05, 0.2, 0.5}) {
            const auto up = integrate_piecewise(fan_start(T, b, off), s);
            CHECK(scaling_exponent_piecewise(up) < -1e-4);
            const auto down = integrate_piecewise(fan_start(T, b, -off), s);
            CHECK(scaling_exponent_piecewise(down) > 1e-4);
        }
    }
    // the boundary solution has vanishing exponent
    const auto guide = integrate_piecewise(boundary_trajectory(T).at(0.0), s);
    CHECK(std::abs(scaling_exponent_piecewise(guide)) < 1e-8);
}

TEST_CASE("piecewise exponent matches the closed form on uncrossed starts") {
    const double T = 1.0;
    const auto s = HamiltonianSchedule::boundary(T, 0.05);
    for (double b : {0.8, 1.5, 2.2}) {
        for (double off : {0.3, -0.3}) {
            const auto traj = integrate_piecewise(fan_start(T, b, off), s);
            REQUIRE(classify_crossing(traj) == CrossingKind::none);
            const double g = scaling_exponent_piecewise(traj);
            const double g_ref =
                scaling_exponent_exact({-kSqrtPi * T + off, b}, T);
            CHECK(g == Catch::Approx(g_ref).margin(1e-9));
        }
    }
}

TEST_CASE("reflected starts integrate through the reflection") {
    const double T = 1.0;
    const auto s = HamiltonianSchedule::boundary(T, 0.05);
    const DiskPoint z0 = fan_start(T, 0.2, 0.3);
    const auto plus = integrate_piecewise(z0, s);
    const auto minus = integrate_piecewise(reflect_p(z0), s);
    CHECK(minus.reflected);
    for (double t = 0.0; t <= T; t += 0.05)
        CHECK(dist(reflect_p(plus.at(t)), minus.at(t)) < 1e-12);
    CHECK(scaling_exponent_piecewise(plus) ==
          Catch::Approx(scaling_exponent_piecewise(minus)).margin(1e-10));
}

TEST_CASE("no double crossings across a dense tubular fan") {
    const double T = 1.0;
    const auto s = HamiltonianSchedule::boundary(T, 0.05);
    int crossing_cases = 0, checked = 0;
    for (int kb = 0; kb < 20; ++kb) {
        const double b = 0.03 + 0.6 * kb / 19.0;
        for (int ko = 0; ko < 20; ++ko) {
            const double off = -0.5 + 1.0 * ko / 19.0;
            for (double bb : {b, kPi - b}) {
                const auto traj = integrate_piecewise(fan_start(T, bb, off), s);
                ++checked;
                if (traj.crossing_time) {
                    ++crossing_cases;
                    const auto kind = classify_crossing(traj);
                    CHECK((kind == CrossingKind::entrance) == (off > 0.0));
                }
            }
        }
    }
    CHECK(checked == 800);
    CHECK(crossing_cases > 100);
}

TEST_CASE("convergence of the cut-off flow to the piecewise limit") {
    const double T = 1.0;
    const auto base = HamiltonianSchedule::boundary(T, 0.1);
    const std::vector<double> deltas{0.1, 0.05, 0.02, 0.01};

    // crossing starts: strictly decreasing sup-distances; the measured
    // contraction over this fan is about 6x-10x (the capped zone rotates
    // delta/2 faster than the limit, a linear-in-delta offset)
    for (double b : {0.05, 0.3}) {
        for (double off : b < 0.1 ? std::vector<double>{0.5, -0.5, 0.2, -0.2}
                                  : std::vector<double>{0.5, -0.5}) {
            const auto rep = convergence_test(fan_start(T, b, off), base, deltas);
            REQUIRE(rep.entries.size() == 4);
            for (std::size_t i = 1; i < rep.entries.size(); ++i)
                CHECK(rep.entries[i].sup_distance <
                      rep.entries[i - 1].sup_distance);
            CHECK(rep.entries.back().sup_distance <
                  0.25 * rep.entries.front().sup_distance);
        }
    }

    // the shared boundary solution: coincidence at every delta
    const auto repb =
        convergence_test(boundary_trajectory(T).at(0.0), base, deltas);
    for (const auto& e : repb.entries) CHECK(e.sup_distance < 1e-8);

    CHECK_THROWS(convergence_test({0.1, 0.1}, base, {0.1, 0.2}));
}

TEST_CASE("capped-zone starts follow the closed-form rotation offset") {
    // constant threshold, short horizon: both flows are exact rotations of
    // the start, at rates 2 pi (eta + delta/2) and 2 pi eta. The measured
    // sup-distance must equal the predicted chord offset.
    const double T = 0.5, eta = 0.05;
    const auto base =
        HamiltonianSchedule::custom(T, 0.1, [=](double) { return eta; });
    const DiskPoint z0{0.5, 0.0};
    const std::vector<double> deltas{0.1, 0.05, 0.02, 0.01};
    const auto rep = convergence_test(z0, base, deltas);
    const double r = std::hypot(z0.p, z0.q);
    for (const auto& e : rep.entries) {
        const double predicted = 2.0 * r * std::sin(0.5 * kPi * e.delta * T);
        CHECK(std::abs(e.sup_distance - predicted) < 1e-8);
    }
}
