#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cellrom/rom.hpp"

using namespace cellrom;

namespace {

// Noise-free sum-of-lags step response in normalized units.
StepResponse synthetic_response(const std::vector<double>& gains,
                                const std::vector<double>& taus, double q_gen,
                                double t_end = 2000.0, double dt = 0.5) {
    StepResponse r;
    r.op = SchedulePoint{q_gen, 2e-3, celsius_to_kelvin(5.0)};
    r.t0_temperature = 300.0;
    for (double t = 0.0; t <= t_end + 1e-9; t += dt) {
        double n = 0.0;
        for (std::size_t i = 0; i < gains.size(); ++i)
            n += gains[i] * (1.0 - std::exp(-t / taus[i]));
        r.t.push_back(t);
        r.normalized.push_back(n);
        r.delta_t.push_back(n * q_gen);
    }
    r.settled = true;
    r.settle_slope = 0.0;
    return r;
}

PlantConfig coarse_plant() {
    PlantConfig c;
    c.n_axial = 10;
    c.n_stack = 5;
    return c;
}

}  // namespace

TEST_CASE("single-lag parameters are recovered from noise-free data") {
    double g = 2e-5, tau = 120.0;
    StepResponse r = synthetic_response({g}, {tau}, 5e5);
    FosterLtiModel m = fit_foster(r, 1);
    REQUIRE(m.order == 1);
    CHECK(std::abs(m.gains[0] - g) / g < 1e-6);
    CHECK(std::abs(m.taus[0] - tau) / tau < 1e-6);
    CHECK(m.fit_rms < 1e-10);
}

TEST_CASE("two lags with opposite signs are recovered") {
    std::vector<double> gains{3e-5, -1e-5};
    std::vector<double> taus{500.0, 20.0};
    StepResponse r = synthetic_response(gains, taus, 1e6, 4000.0);
    FosterLtiModel m = fit_foster(r, 2);
    REQUIRE(m.order == 2);
    // taus come out sorted descending, matching the construction order here
    for (int i = 0; i < 2; ++i) {
        CHECK(std::abs(m.gains[i] - gains[i]) / std::abs(gains[i]) < 1e-4);
        CHECK(std::abs(m.taus[i] - taus[i]) / taus[i] < 1e-4);
    }
}

TEST_CASE("fitting is deterministic for a fixed seed") {
    StepResponse r = synthetic_response({3e-5, -1e-5}, {500.0, 20.0}, 1e6, 4000.0);
    FosterLtiModel a = fit_foster(r, 2);
    FosterLtiModel b = fit_foster(r, 2);
    CHECK(a.gains == b.gains);
    CHECK(a.taus == b.taus);
}

TEST_CASE("requesting more lags than the data supports degrades gracefully") {
    StepResponse r = synthetic_response({2e-5}, {120.0}, 5e5);
    FosterLtiModel m = fit_foster(r, 2);
    // either the pair collapsed to one lag (with a note) or the extra lag is negligible
    if (m.order == 1) {
        CHECK_FALSE(m.notes.empty());
    } else {
        REQUIRE(m.order == 2);
    }
    // replay must match the data regardless
    SimulationResult sim = simulate_lti(m, Profile::constant(r.op.q_gen),
                                        r.t0_temperature, 2000.0, 0.5);
    for (std::size_t i = 0; i < sim.t.size(); ++i) {
        double expected = r.t0_temperature + r.delta_t[i];
        CHECK(std::abs(sim.t_avg[i] - expected) < 1e-5);
    }
}

TEST_CASE("fit input validation") {
    StepResponse r = synthetic_response({2e-5}, {120.0}, 5e5, 2.0, 1.0); // 3 samples
    CHECK_THROWS_AS(fit_foster(r, 1), std::invalid_argument);
    StepResponse ok = synthetic_response({2e-5}, {120.0}, 5e5);
    CHECK_THROWS_AS(fit_foster(ok, 0), std::invalid_argument);
}

TEST_CASE("zero-order-hold lag update matches the closed form and splits exactly") {
    std::vector<double> gains{2e-5};
    std::vector<double> taus{120.0};
    double q = 5e5;
    std::vector<double> x{0.0};
    for (int n = 0; n < 200; ++n)
        foster_zoh_step(gains, taus, q, 0.5, x);
    double t = 100.0;
    double expected = gains[0] * q * (1.0 - std::exp(-t / taus[0]));
    CHECK(x[0] == doctest::Approx(expected).epsilon(1e-12));

    // one big step lands on the same point as many small ones
    std::vector<double> y{0.0};
    foster_zoh_step(gains, taus, q, 100.0, y);
    CHECK(y[0] == doctest::Approx(x[0]).epsilon(1e-12));
}

TEST_CASE("lti response is linear in the input and fixed at zero input") {
    FosterLtiModel m;
    m.order = 2;
    m.gains = {3e-5, -1e-5};
    m.taus = {500.0, 20.0};
    m.t0_temperature = 300.0;
    m.op = SchedulePoint{1e6, 2e-3, 278.15};

    SimulationResult r1 = simulate_lti(m, Profile::constant(1e6), 300.0, 500.0, 0.5);
    SimulationResult r2 = simulate_lti(m, Profile::constant(2e6), 300.0, 500.0, 0.5);
    for (std::size_t i = 0; i < r1.t.size(); ++i) {
        double d1 = r1.t_avg[i] - 300.0;
        double d2 = r2.t_avg[i] - 300.0;
        CHECK(std::abs(d2 - 2.0 * d1) <= 1e-9 * std::max(1.0, std::abs(d2)));
    }

    // superposition across a time-varying schedule
    Profile qa({0.0, 100.0}, {1e6, 5e5});
    Profile qb = Profile::constant(5e5);
    Profile qsum({0.0, 100.0}, {1.5e6, 1e6});
    SimulationResult ra = simulate_lti(m, qa, 300.0, 300.0, 0.5);
    SimulationResult rb = simulate_lti(m, qb, 300.0, 300.0, 0.5);
    SimulationResult rs = simulate_lti(m, qsum, 300.0, 300.0, 0.5);
    for (std::size_t i = 0; i < rs.t.size(); ++i) {
        double lhs = rs.t_avg[i] - 300.0;
        double rhs = (ra.t_avg[i] - 300.0) + (rb.t_avg[i] - 300.0);
        CHECK(std::abs(lhs - rhs) < 1e-9);
    }

    SimulationResult rz = simulate_lti(m, Profile::constant(0.0), 300.0, 100.0, 0.5);
    for (double v : rz.t_avg)
        CHECK(v == 300.0);
}

TEST_CASE("extraction bookkeeping from the plant") {
    PlantModel plant(coarse_plant());
    SchedulePoint op{5e5, 2e-3, celsius_to_kelvin(5.0)};
    StepResponse r = extract_step_response(plant, op, 2000.0, 0.5);
    REQUIRE(r.t.size() == 4001);
    CHECK(r.t.front() == 0.0);
    CHECK(r.delta_t.front() == 0.0);
    CHECK(r.t0_temperature == doctest::Approx(300.0).epsilon(1e-12));
    std::size_t mid = r.t.size() / 2;
    CHECK(r.normalized[mid] == doctest::Approx(r.delta_t[mid] / op.q_gen).epsilon(1e-12));
    CHECK(r.settled == (r.settle_slope < 1e-4));
}

TEST_CASE("normalized responses depend on the extraction heat level") {
    PlantModel plant(coarse_plant());
    SchedulePoint cold{1e5, 2e-3, celsius_to_kelvin(5.0)};
    SchedulePoint hot{5e6, 2e-3, celsius_to_kelvin(5.0)};
    StepResponse rc = extract_step_response(plant, cold, 2000.0, 0.5);
    StepResponse rh = extract_step_response(plant, hot, 2000.0, 0.5);
    // weak heating against a cold inlet: net cooling; strong heating: net rise
    CHECK(rc.delta_t.back() < 0.0);
    CHECK(rh.delta_t.back() > 0.0);
    // the 1/q cooling share makes the normalized curves genuinely different,
    // which is why one fixed normalized model cannot serve every heat level
    double nc = rc.normalized.back(), nh = rh.normalized.back();
    CHECK(std::abs(nc - nh) > 0.1 * std::abs(nh));
}

TEST_CASE("plant fit reaches sub-percent residuals and replays the data") {
    PlantModel plant(coarse_plant());
    SchedulePoint op{5e5, 2e-3, celsius_to_kelvin(5.0)};
    StepResponse r = extract_step_response(plant, op, 3000.0, 0.5);
    FosterLtiModel m = fit_foster(r, 4);
    CHECK(m.fit_rms < 0.01 * std::abs(r.normalized.back()));

    // the model's own constant-input replay equals its closed-form step response
    SimulationResult sim = simulate_lti(m, Profile::constant(op.q_gen), r.t0_temperature,
                                        3000.0, 0.5);
    for (std::size_t i = 0; i < sim.t.size(); i += 500) {
        double n = 0.0;
        for (int k = 0; k < m.order; ++k)
            n += m.gains[k] * (1.0 - std::exp(-sim.t[i] / m.taus[k]));
        CHECK(sim.t_avg[i] ==
              doctest::Approx(r.t0_temperature + n * op.q_gen).epsilon(1e-9));
    }
}

TEST_CASE("step-response csv round trip") {
    StepResponse r = synthetic_response({3e-5, -1e-5}, {500.0, 20.0}, 1e6, 50.0, 0.5);
    r.settled = false;
    r.settle_slope = 2.5e-3;
    write_step_response_csv("tmp_rom_resp.csv", r);
    StepResponse back = read_step_response_csv("tmp_rom_resp.csv");
    REQUIRE(back.t.size() == r.t.size());
    CHECK(back.op.q_gen == r.op.q_gen);
    CHECK(back.op.m_dot == r.op.m_dot);
    CHECK(back.op.t_in == doctest::Approx(r.op.t_in).epsilon(1e-12));
    CHECK(back.t0_temperature == r.t0_temperature);
    CHECK(back.settled == r.settled);
    CHECK(back.settle_slope == doctest::Approx(r.settle_slope).epsilon(1e-9));
    for (std::size_t i = 0; i < r.t.size(); ++i) {
        CHECK(back.t[i] == doctest::Approx(r.t[i]).epsilon(1e-12));
        CHECK(back.delta_t[i] == doctest::Approx(r.delta_t[i]).epsilon(1e-9));
        CHECK(back.normalized[i] == doctest::Approx(r.normalized[i]).epsilon(1e-9));
    }
}

TEST_CASE("model json round trip is exact") {
    FosterLtiModel m;
    m.order = 3;
    m.gains = {3.0000000000123e-5, -1e-5, 7.25e-7};
    m.taus = {512.375, 19.25, 3.0625};
    m.op = SchedulePoint{1e6, 2e-3, 278.15};
    m.t0_temperature = 300.0;
    m.fit_rms = 1.25e-9;
    m.notes = {"example"};
    save_lti_model("tmp_rom_model.json", m);
    FosterLtiModel back = load_lti_model("tmp_rom_model.json");
    CHECK(back.order == m.order);
    CHECK(back.gains == m.gains);
    CHECK(back.taus == m.taus);
    CHECK(back.op.q_gen == m.op.q_gen);
    CHECK(back.t0_temperature == m.t0_temperature);
    CHECK(back.fit_rms == m.fit_rms);
    REQUIRE(back.notes.size() == 1);
    CHECK(back.notes[0] == "example");

    m.taus = {10.0, 10.0, 10.0}; // not strictly decreasing
    CHECK_THROWS_AS(validate(m), std::invalid_argument);
}
