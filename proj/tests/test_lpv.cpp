#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "cellrom/lpv.hpp"

using namespace cellrom;

namespace {

PlantConfig coarse_plant() {
    PlantConfig c;
    c.n_axial = 10;
    c.n_stack = 5;
    return c;
}

LpvBuildOptions quick_build(int order = 2, double t_end = 1500.0) {
    LpvBuildOptions o;
    o.order = order;
    o.t_end = t_end;
    o.dt = 0.5;
    return o;
}

// Shared across cases; built once to keep the suite fast.
const LpvGrid& cube_grid() {
    static const LpvGrid grid = build_lpv_grid(
        coarse_plant(), {1e5, 5e5}, {1e-3, 2e-3}, {5.0, 15.0}, quick_build());
    return grid;
}

}  // namespace

TEST_CASE("vertex lookups return the stored parameters bit for bit") {
    const LpvGrid& g = cube_grid();
    for (std::size_t iq = 0; iq < g.q_axis.size(); ++iq)
        for (std::size_t im = 0; im < g.m_axis.size(); ++im)
            for (std::size_t it = 0; it < g.t_axis.size(); ++it) {
                const FosterLtiModel& v = g.at(iq, im, it);
                SchedulePoint p{g.q_axis[iq], g.m_axis[im], g.t_axis[it]};
                long clamps = 0;
                InterpolatedParams ip = interpolate_model(g, p, &clamps);
                CHECK(ip.gains == v.gains);
                CHECK(ip.taus == v.taus);
                CHECK(clamps == 0);
            }
}

TEST_CASE("heat-axis blending uses the inverse coordinate") {
    LpvGrid g = build_lpv_grid(coarse_plant(), {1e5, 5e5}, {2e-3}, {5.0}, quick_build());
    const FosterLtiModel& a = g.at(0, 0, 0);
    const FosterLtiModel& b = g.at(1, 0, 0);
    // the harmonic midpoint of the axis gets weight one half
    double q_mid = 2.0 / (1.0 / 1e5 + 1.0 / 5e5);
    InterpolatedParams ip =
        interpolate_model(g, SchedulePoint{q_mid, 2e-3, celsius_to_kelvin(5.0)});
    for (int k = 0; k < g.order; ++k) {
        double g_mid = 0.5 * (a.gains[k] + b.gains[k]);
        double tau_mid = std::sqrt(a.taus[k] * b.taus[k]);
        CHECK(ip.gains[k] == doctest::Approx(g_mid).epsilon(1e-12));
        CHECK(ip.taus[k] == doctest::Approx(tau_mid).epsilon(1e-12));
    }
}

TEST_CASE("flow-axis blending is linear in the coordinate") {
    LpvGrid g = build_lpv_grid(coarse_plant(), {5e5}, {1e-3, 2e-3}, {5.0}, quick_build());
    const FosterLtiModel& a = g.at(0, 0, 0);
    const FosterLtiModel& b = g.at(0, 1, 0);
    InterpolatedParams ip =
        interpolate_model(g, SchedulePoint{5e5, 1.5e-3, celsius_to_kelvin(5.0)});
    for (int k = 0; k < g.order; ++k) {
        CHECK(ip.gains[k] == doctest::Approx(0.5 * (a.gains[k] + b.gains[k])).epsilon(1e-12));
        CHECK(ip.taus[k] == doctest::Approx(std::sqrt(a.taus[k] * b.taus[k])).epsilon(1e-12));
    }
}

TEST_CASE("interpolated parameters never leave the vertex hull") {
    const LpvGrid& g = cube_grid();
    std::vector<double> gain_lo(g.order, 1e300), gain_hi(g.order, -1e300);
    std::vector<double> tau_lo(g.order, 1e300), tau_hi(g.order, -1e300);
    for (const FosterLtiModel& v : g.vertices)
        for (int k = 0; k < g.order; ++k) {
            gain_lo[k] = std::min(gain_lo[k], v.gains[k]);
            gain_hi[k] = std::max(gain_hi[k], v.gains[k]);
            tau_lo[k] = std::min(tau_lo[k], v.taus[k]);
            tau_hi[k] = std::max(tau_hi[k], v.taus[k]);
        }

    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> uq(5e4, 1e6);   // past both ends
    std::uniform_real_distribution<double> um(5e-4, 3e-3);
    std::uniform_real_distribution<double> ut(celsius_to_kelvin(0.0), celsius_to_kelvin(25.0));
    for (int n = 0; n < 1000; ++n) {
        SchedulePoint p{uq(rng), um(rng), ut(rng)};
        InterpolatedParams ip = interpolate_model(g, p);
        for (int k = 0; k < g.order; ++k) {
            CHECK(ip.gains[k] >= gain_lo[k] - 1e-15);
            CHECK(ip.gains[k] <= gain_hi[k] + 1e-15);
            CHECK(ip.taus[k] >= tau_lo[k] * (1.0 - 1e-12));
            CHECK(ip.taus[k] <= tau_hi[k] * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("parameters vary continuously along an axis") {
    const LpvGrid& g = cube_grid();
    const int n = 200;
    InterpolatedParams prev;
    for (int s = 0; s <= n; ++s) {
        double q = 1e5 + (5e5 - 1e5) * static_cast<double>(s) / n;
        InterpolatedParams ip =
            interpolate_model(g, SchedulePoint{q, 1.5e-3, celsius_to_kelvin(10.0)});
        if (s > 0)
            for (int k = 0; k < g.order; ++k) {
                // a fine sweep cannot jump a large share of the parameter range
                double span = std::abs(g.at(1, 0, 0).gains[k] - g.at(0, 0, 0).gains[k]) +
                              std::abs(g.at(0, 1, 1).gains[k] - g.at(0, 0, 0).gains[k]);
                CHECK(std::abs(ip.gains[k] - prev.gains[k]) <= 0.1 * span + 1e-12);
            }
        prev = ip;
    }
}

TEST_CASE("out-of-hull lookups clamp and are counted") {
    const LpvGrid& g = cube_grid();
    long clamps = 0;
    InterpolatedParams far_out =
        interpolate_model(g, SchedulePoint{1e7, 1e-2, celsius_to_kelvin(50.0)}, &clamps);
    CHECK(clamps == 1);
    const FosterLtiModel& corner = g.at(1, 1, 1);
    CHECK(far_out.gains == corner.gains);
    CHECK(far_out.taus == corner.taus);

    clamps = 0;
    interpolate_model(g, SchedulePoint{2e5, 1.5e-3, celsius_to_kelvin(10.0)}, &clamps);
    CHECK(clamps == 0);
}

TEST_CASE("a single-vertex grid is exactly the vertex model") {
    LpvGrid g = build_lpv_grid(coarse_plant(), {5e5}, {2e-3}, {5.0}, quick_build());
    REQUIRE(g.vertices.size() == 1);
    Profile q({0.0, 100.0, 400.0}, {2e5, 8e5, 4e5});
    SimProfiles p{q, Profile::constant(2e-3), Profile::constant(5.0)};
    SimulationResult lpv = simulate_lpv(g, p, 800.0, 0.5);
    SimulationResult lti =
        simulate_lti(g.vertices[0], q, g.t0_temperature, 800.0, 0.5);
    REQUIRE(lpv.t.size() == lti.t.size());
    for (std::size_t i = 0; i < lpv.t.size(); ++i)
        CHECK(lpv.t_avg[i] == lti.t_avg[i]); // bit-identical
}

TEST_CASE("zero heat input is a fixed point of the scheduled stepper") {
    const LpvGrid& g = cube_grid();
    SimProfiles p{Profile::constant(0.0), Profile::constant(1.5e-3),
                  Profile::constant(10.0)};
    SimulationResult r = simulate_lpv(g, p, 200.0, 0.5);
    for (double v : r.t_avg)
        CHECK(v == g.t0_temperature);
    // q=0 sits below the fitted heat range, so the coverage counter flags
    // every one of the 400 steps even though the output is unaffected
    CHECK(r.hull_clamps == 400);
}

TEST_CASE("scheduled stepping stays continuous across vertex switches") {
    const LpvGrid& g = cube_grid();
    Profile q({0.0, 100.0, 200.0, 300.0}, {1e5, 5e5, 2e5, 4e5});
    Profile m({0.0, 150.0}, {1e-3, 2e-3});
    SimProfiles p{q, m, Profile::constant(10.0)};
    SimulationResult r = simulate_lpv(g, p, 600.0, 0.5);
    SimulationResult r_fine = simulate_lpv(g, p, 600.0, 0.25);
    for (std::size_t i = 1; i < r.t.size(); ++i) {
        CHECK(std::isfinite(r.t_avg[i]));
        CHECK(std::abs(r.t_avg[i] - r.t_avg[i - 1]) < 3.0);
    }
    // halving the step barely moves the trajectory
    for (std::size_t i = 0; i < r.t.size(); ++i)
        CHECK(std::abs(r.t_avg[i] - r_fine.t_avg[2 * i]) < 0.25);
}

TEST_CASE("grid json round trip is exact and versioned") {
    const LpvGrid& g = cube_grid();
    save_lpv_grid("tmp_lpv_grid.json", g);
    LpvGrid back = load_lpv_grid("tmp_lpv_grid.json");
    CHECK(back.q_axis == g.q_axis);
    CHECK(back.m_axis == g.m_axis);
    CHECK(back.t_axis == g.t_axis);
    CHECK(back.order == g.order);
    CHECK(back.t0_temperature == g.t0_temperature);
    CHECK(back.plant_hash == g.plant_hash);
    REQUIRE(back.vertices.size() == g.vertices.size());
    for (std::size_t i = 0; i < g.vertices.size(); ++i) {
        CHECK(back.vertices[i].gains == g.vertices[i].gains);
        CHECK(back.vertices[i].taus == g.vertices[i].taus);
    }

    nlohmann::json j = lpv_grid_to_json(g);
    j["format_version"] = 999;
    CHECK_THROWS(lpv_grid_from_json(j));
}

TEST_CASE("grid validation enforces axis and order consistency") {
    LpvGrid g = cube_grid();
    g.vertices[0].order += 1;
    CHECK_THROWS_AS(validate(g), std::invalid_argument);

    g = cube_grid();
    g.q_axis = {5e5, 1e5}; // not increasing
    CHECK_THROWS_AS(validate(g), std::invalid_argument);

    CHECK_THROWS_AS(
        build_lpv_grid(coarse_plant(), {}, {2e-3}, {5.0}, quick_build()),
        std::invalid_argument);
    CHECK_THROWS_AS(
        build_lpv_grid(coarse_plant(), {-1e5, 5e5}, {2e-3}, {5.0}, quick_build()),
        std::invalid_argument);
}
