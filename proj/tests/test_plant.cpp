#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cellrom/plant.hpp"

using namespace cellrom;

namespace {

SimProfiles constant_profiles(double q, double m, double t_in_c) {
    return SimProfiles{Profile::constant(q), Profile::constant(m),
                       Profile::constant(t_in_c)};
}

double global_residual_rel(const EnergyAudit& a) {
    double scale = std::max({std::abs(a.generated), std::abs(a.advected),
                             std::abs(a.stored), 1e-9});
    return std::abs(a.generated - a.advected - a.stored) / scale;
}

}  // namespace

TEST_CASE("film coefficient matches the hand value and scales with the gap") {
    PlantConfig c;
    // Nu * lambda_w / (2 * gap) = 8.23 * 0.6 / 0.004
    CHECK(h_conv(c, 2e-3, 300.0) == doctest::Approx(1234.5).epsilon(1e-12));
    PlantConfig half = c;
    half.channel_gap = c.channel_gap / 2.0;
    CHECK(h_conv(half, 2e-3, 300.0) ==
          doctest::Approx(2.0 * h_conv(c, 2e-3, 300.0)).epsilon(1e-12));
    PlantConfig no_conv = c;
    no_conv.nusselt = 0.0;
    CHECK(h_conv(no_conv, 2e-3, 300.0) == 0.0);
}

TEST_CASE("channel reynolds number: hand value, linear scaling, laminar regime") {
    PlantConfig c;
    // Re = (m/2) * D_h / (A_c * mu) with D_h = 2*gap, A_c = width*gap,
    // so Re = m / (width * mu) = 3e-3 / (0.10 * 1.003e-3)
    CHECK(reynolds(c, 3e-3, 300.0) == doctest::Approx(29.910269).epsilon(1e-6));
    CHECK(reynolds(c, 0.0, 300.0) == 0.0);
    CHECK(reynolds(c, 2e-3, 300.0) ==
          doctest::Approx(reynolds(c, 1e-3, 300.0) * 2.0).epsilon(1e-12));
    // warm water is thinner: viscosity correlation raises Re
    PlantConfig vv = c;
    vv.variable_viscosity = true;
    CHECK(reynolds(vv, 2e-3, 320.0) > reynolds(vv, 2e-3, 290.0));
    CHECK_THROWS_AS(reynolds(c, -1e-3, 300.0), std::invalid_argument);
}

TEST_CASE("mesh bookkeeping: node counts and exact cell volume partition") {
    PlantConfig c; // half symmetry, 20 x 10
    PlantModel m(c);
    CHECK(m.node_count() == 20 * (10 + 2)); // per column: cells + plate + coolant
    // modeled half cell volume
    CHECK(m.total_cell_volume() ==
          doctest::Approx(0.15 * 0.10 * 0.01 / 2.0).epsilon(1e-12));

    PlantConfig full = c;
    full.half_symmetry = false;
    PlantModel mf(full);
    CHECK(mf.node_count() == 20 * (2 * 10 + 4));
    CHECK(mf.total_cell_volume() == doctest::Approx(0.15 * 0.10 * 0.01).epsilon(1e-12));
}

TEST_CASE("uniform field at the inlet temperature with no heating is a fixed point") {
    PlantConfig c;
    PlantModel m(c);
    double t_in_c = 5.0;
    double t_k = celsius_to_kelvin(t_in_c);
    SimulationResult r = simulate_plant(m, constant_profiles(0.0, 2e-3, t_in_c), 50.0, 0.5, t_k);
    for (double v : r.t_avg)
        CHECK(std::abs(v - t_k) < 1e-9);
    for (double v : r.t_out)
        CHECK(std::abs(v - t_k) < 1e-9);
}

TEST_CASE("adiabatic lumped heating ramps at exactly q/(rho cp)") {
    PlantConfig c;
    c.adiabatic = true;
    PlantModel m(c);
    // 5e5 / (2500 * 100) = 2.000 K/s
    SimulationResult r = simulate_plant(m, constant_profiles(5e5, 2e-3, 5.0), 10.0, 0.1);
    double rate = (r.t_avg.back() - r.t_avg.front()) / r.t.back();
    CHECK(rate == doctest::Approx(2.0).epsilon(1e-3));
    // uniform field: max equals average
    CHECK(r.t_max.back() == doctest::Approx(r.t_avg.back()).epsilon(1e-12));
}

TEST_CASE("energy audit closes step-wise and globally on a varying schedule") {
    PlantConfig c;
    PlantModel m(c);
    Profile q({0.0, 100.0, 300.0}, {2e5, 2e6, 5e5});
    SimProfiles p{q, Profile::constant(2e-3), Profile::constant(5.0)};
    SimulationResult r = simulate_plant(m, p, 600.0, 0.5);
    REQUIRE(r.audit.available);
    CHECK(r.audit.max_step_residual_rel < 1e-4);
    CHECK(global_residual_rel(r.audit) < 1e-3);
    CHECK(r.audit.generated > 0.0);
}

TEST_CASE("no heat source: temperatures stay inside the initial/inlet bracket") {
    PlantConfig c; // starts at 300 K
    PlantModel m(c);
    SimulationResult r = simulate_plant(m, constant_profiles(0.0, 2e-3, 5.0), 600.0, 0.5);
    double lo = celsius_to_kelvin(5.0) - 1e-9, hi = 300.0 + 1e-9;
    for (double v : r.t_max) {
        CHECK(v <= hi);
        CHECK(v >= lo);
    }
    CHECK(r.t_avg.back() < r.t_avg.front()); // it does cool
}

TEST_CASE("half-symmetry model reproduces the full stack") {
    PlantConfig half; // default
    PlantConfig full = half;
    full.half_symmetry = false;
    SimProfiles p = constant_profiles(1e6, 2e-3, 5.0);
    SimulationResult rh = simulate_plant(PlantModel(half), p, 200.0, 0.5);
    SimulationResult rf = simulate_plant(PlantModel(full), p, 200.0, 0.5);
    REQUIRE(rh.t.size() == rf.t.size());
    for (std::size_t i = 0; i < rh.t.size(); ++i) {
        CHECK(std::abs(rh.t_avg[i] - rf.t_avg[i]) < 1e-8);
        CHECK(std::abs(rh.t_out[i] - rf.t_out[i]) < 1e-8);
    }
}

TEST_CASE("steady state obeys the inlet-to-outlet enthalpy balance") {
    PlantConfig c;
    PlantModel m(c);
    double q = 5e5, mdot = 2e-3, t_in_c = 5.0;
    SimulationResult r = simulate_plant(m, constant_profiles(q, mdot, t_in_c), 4000.0, 0.5);
    double v_cell = 0.15 * 0.10 * 0.01;
    double expected_rise = q * v_cell / (mdot * c.water.cp);
    double actual_rise = r.t_out.back() - celsius_to_kelvin(t_in_c);
    CHECK(actual_rise == doctest::Approx(expected_rise).epsilon(1e-3));
    // genuinely settled
    std::size_t n = r.t.size();
    CHECK(std::abs(r.t_avg[n - 1] - r.t_avg[n - 2]) / 0.5 < 1e-4);
}

TEST_CASE("more coolant flow cools harder") {
    PlantConfig c;
    PlantModel m(c);
    SimulationResult slow = simulate_plant(m, constant_profiles(5e5, 5e-4, 5.0), 2000.0, 0.5);
    SimulationResult fast = simulate_plant(m, constant_profiles(5e5, 3e-3, 5.0), 2000.0, 0.5);
    CHECK(fast.t_avg.back() < slow.t_avg.back());
    CHECK(fast.t_max.back() < slow.t_max.back());
}

TEST_CASE("forward euler mode enforces its stability bound and agrees when stable") {
    PlantConfig ex;
    ex.explicit_mode = true;
    PlantModel me(ex);
    double dt_max = me.explicit_stability_dt(2e-3);
    CHECK(dt_max > 0.0);
    CHECK(dt_max < 10.0);

    PlantState s = make_uniform_state(me, 300.0);
    SchedulePoint op{5e5, 2e-3, celsius_to_kelvin(5.0)};
    CHECK_THROWS_AS(step_plant(me, s, op, 4.0 * dt_max), std::runtime_error);

    double dt = 0.5 * dt_max;
    SimulationResult re = simulate_plant(me, constant_profiles(5e5, 2e-3, 5.0), 30.0, dt);
    PlantConfig im = ex;
    im.explicit_mode = false;
    SimulationResult ri = simulate_plant(PlantModel(im), constant_profiles(5e5, 2e-3, 5.0),
                                         30.0, dt);
    CHECK(std::abs(re.t_avg.back() - ri.t_avg.back()) < 0.05);
    CHECK(re.audit.max_step_residual_rel < 1e-4);
}

TEST_CASE("simulation is deterministic") {
    PlantConfig c;
    PlantModel m(c);
    Profile q({0.0, 30.0, 60.0}, {2e5, 1e6, 5e5});
    SimProfiles p{q, Profile::constant(2e-3), Profile::constant(5.0)};
    SimulationResult a = simulate_plant(m, p, 100.0, 0.5);
    SimulationResult b = simulate_plant(m, p, 100.0, 0.5);
    CHECK(a.t_avg == b.t_avg);
    CHECK(a.t_out == b.t_out);
}

TEST_CASE("mesh refinement report tracks successive changes") {
    PlantConfig c;
    SchedulePoint op{5e5, 2e-3, celsius_to_kelvin(5.0)};
    GridIndependenceReport rep =
        grid_independence(c, {{5, 3}, {10, 5}, {20, 10}}, op, 400.0, 1.0);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows[0].change_pct == 0.0); // no predecessor
    CHECK(rep.rows[1].nodes > rep.rows[0].nodes);
    CHECK(rep.rows[2].nodes > rep.rows[1].nodes);
    CHECK(rep.rows[2].change_pct < rep.rows[1].change_pct);
}

TEST_CASE("config validation rejects nonsense") {
    PlantConfig c;
    c.n_axial = 0;
    CHECK_THROWS_AS(build_plant(c), std::invalid_argument);
    c = PlantConfig{};
    c.channel_gap = -1.0;
    CHECK_THROWS_AS(build_plant(c), std::invalid_argument);
    c = PlantConfig{};
    c.battery.cp = 0.0;
    CHECK_THROWS_AS(build_plant(c), std::invalid_argument);
}
