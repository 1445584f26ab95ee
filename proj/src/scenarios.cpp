#include "cellrom/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>

#include "cellrom/io.hpp"
#include "cellrom/metrics.hpp"

namespace cellrom {

const std::vector<double>& extraction_q_axis() {
    static const std::vector<double> axis{8e4, 1e5, 5e5, 1e6, 5e6, 1e7, 5e7};
    return axis;
}

const std::vector<double>& schedule_q_axis() {
    static const std::vector<double> axis{1e5, 5e5, 5e6};
    return axis;
}

const std::vector<double>& schedule_m_axis() {
    static const std::vector<double> axis{2e-4, 5e-4, 1e-3, 2e-3, 3e-3};
    return axis;
}

const std::vector<double>& schedule_t_axis_c() {
    static const std::vector<double> axis{5.0, 10.0, 15.0, 20.0};
    return axis;
}

Profile validation_heat_profile() {
    return Profile({0.0, 200.0, 500.0, 900.0, 1200.0},
                   {2e5, 1e6, 5e6, 2e6, 5e5});
}

Profile flow_study_heat_profile() {
    return Profile(
        {0,    180,  360,  600,  780,  960,  1200, 1380, 1560, 1800, 2040,
         2220, 2400, 2640, 2820, 3000, 3240, 3480, 3660, 3900, 4140, 4320,
         4560, 4800, 4980, 5220, 5460, 5640, 5880, 6120, 6360, 6600, 6840,
         7080},
        {8e5,   2.4e6, 4.5e6, 1.2e6, 3.2e6, 6e5,   2.8e6, 4.8e6, 1.5e6,
         9e5,   3.6e6, 2.0e6, 4.2e6, 7e5,   2.6e6, 1.1e6, 4.6e6, 1.8e6,
         3.0e6, 5e5,   2.2e6, 4.4e6, 1.3e6, 3.4e6, 8e5,   2.9e6, 4.0e6,
         1.6e6, 2.4e6, 4.7e6, 1.0e6, 3.1e6, 2e5,   1.9e6});
}

Profile make_proportional_flow(const Profile& q_profile, double mean_flow,
                               double target_cov_pct, double t_end) {
    if (!(mean_flow > 0.0))
        throw std::invalid_argument("make_proportional_flow: mean flow must be positive");
    if (target_cov_pct < 0.0)
        throw std::invalid_argument("make_proportional_flow: target CoV must be nonnegative");
    if (q_profile.empty())
        throw std::invalid_argument("make_proportional_flow: empty heat profile");
    if (target_cov_pct == 0.0)
        return Profile::constant(mean_flow);

    double mu = q_profile.mean(t_end);
    double sd = q_profile.stddev(t_end);
    if (sd == 0.0)
        throw std::invalid_argument(
            "make_proportional_flow: heat profile has zero variance, nonzero CoV unattainable");

    // m(t) = mean * (1 + alpha * z(t)) with z the standardized heat signal;
    // the duration-weighted mean stays at mean_flow and the CoV is exactly
    // alpha, both by construction.
    double alpha = target_cov_pct / 100.0;
    std::vector<double> values;
    values.reserve(q_profile.size());
    for (double q : q_profile.values()) {
        double m = mean_flow * (1.0 + alpha * (q - mu) / sd);
        if (m < 0.0)
            throw std::runtime_error(
                "make_proportional_flow: target CoV " + format_double(target_cov_pct) +
                "% would require negative flow; clamping would break the mean/CoV targets");
        values.push_back(m);
    }
    return Profile(q_profile.times(), std::move(values));
}

namespace {

std::string study_config_hash(const StudyConfig& cfg, const std::string& study) {
    nlohmann::json j;
    j["study"] = study;
    j["order"] = cfg.build.order;
    j["extraction_t_end_s"] = cfg.build.t_end;
    j["extraction_dt_s"] = cfg.build.dt;
    j["fit_seed"] = cfg.build.fit.seed;
    j["fit_starts"] = cfg.build.fit.starts;
    j["sim_dt_s"] = cfg.sim_dt;
    return hash_hex(fnv1a64(j.dump()));
}

struct WindowFlags {
    double net_change_k = 0.0;
    double max_abs_vs_ref_k = 0.0; // filled by caller when a reference exists
    bool nondecreasing = false;
    bool strictly_decreasing_after_flush = false;
};

// Trajectory shape over [0, window_end]. The uniform 300 K start includes the
// coolant, so the first seconds show a small warm-up until cold water has
// flushed the channel; the strict-decrease check starts after flush_end.
WindowFlags window_flags(const SimulationResult& r, double window_end, double flush_end) {
    WindowFlags f;
    double t0_val = r.t_avg.front();
    double last_in_window = t0_val;
    bool nondec = true, strict = true;
    for (std::size_t i = 1; i < r.t.size(); ++i) {
        if (r.t[i] > window_end)
            break;
        double d = r.t_avg[i] - r.t_avg[i - 1];
        if (d < -1e-9)
            nondec = false;
        if (r.t[i] > flush_end && d >= 0.0)
            strict = false;
        last_in_window = r.t_avg[i];
    }
    f.net_change_k = last_in_window - t0_val;
    f.nondecreasing = nondec;
    f.strictly_decreasing_after_flush = strict;
    return f;
}

double max_abs_within(const SimulationResult& a, const SimulationResult& b, double t_end) {
    double worst = 0.0;
    std::size_t n = std::min(a.t.size(), b.t.size());
    for (std::size_t i = 0; i < n && a.t[i] <= t_end; ++i)
        worst = std::max(worst, std::abs(a.t_avg[i] - b.t_avg[i]));
    return worst;
}

constexpr double kFlushWindowEnd = 30.0; // s, channel turnover at the validation flow

SimProfiles validation_profiles() {
    return SimProfiles{validation_heat_profile(), Profile::constant(kValidationFlow),
                       Profile::constant(kValidationInletC)};
}

LpvGrid build_validation_grid(const StudyConfig& cfg) {
    return build_lpv_grid(cfg.plant, extraction_q_axis(), {kValidationFlow},
                          {kValidationInletC}, cfg.build);
}

const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Plot the trajectory CSVs next to this script (columns t_s,T_avg_K,...)."""
import csv
import glob
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
fig, ax = plt.subplots(figsize=(9, 5))
for path in sorted(glob.glob(os.path.join(here, "*.csv"))):
    with open(path) as f:
        rows = [r for r in csv.reader(f) if r and not r[0].startswith("#")]
    if not rows or "T_avg_K" not in rows[0]:
        continue
    it, iT = rows[0].index("t_s"), rows[0].index("T_avg_K")
    t = [float(r[it]) for r in rows[1:]]
    T = [float(r[iT]) - 273.15 for r in rows[1:]]
    ax.plot(t, T, label=os.path.splitext(os.path.basename(path))[0])
ax.set_xlabel("t [s]")
ax.set_ylabel("cell average temperature [degC]")
ax.grid(True, alpha=0.3)
ax.legend(fontsize=8)
fig.tight_layout()
out = os.path.join(here, "plot.png")
fig.savefig(out, dpi=150)
print("wrote", out)
)PY";

}  // namespace

void write_study_outputs(const StudyReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (const auto& [name, traj] : report.trajectories)
        write_trajectory_csv(out_dir / (name + ".csv"), traj);
    nlohmann::json j;
    j["study"] = report.study;
    j["summary"] = report.summary;
    save_json(out_dir / "report.json", j);
    std::ofstream plot(out_dir / "plot.py");
    plot << kPlotScript;
}

StudyReport scenario_lti_failure(const StudyConfig& cfg) {
    PlantModel plant(cfg.plant);
    SimProfiles profiles = validation_profiles();
    SimulationResult plant_traj = simulate_plant(plant, profiles, kValidationTEnd, cfg.sim_dt);
    LpvGrid grid = build_validation_grid(cfg);
    Profile q = validation_heat_profile();

    StudyReport report;
    report.study = "lti-failure";
    report.summary["provenance"]["plant_config_hash"] = plant_config_hash(cfg.plant);
    report.summary["provenance"]["study_config_hash"] = study_config_hash(cfg, report.study);
    report.trajectories.emplace_back("plant", plant_traj);

    WindowFlags pf = window_flags(plant_traj, 200.0, kFlushWindowEnd);
    report.summary["plant"]["first_200s"] = {
        {"net_change_k", pf.net_change_k},
        {"strictly_decreasing_after_flush", pf.strictly_decreasing_after_flush},
        {"flush_window_s", kFlushWindowEnd},
    };
    report.summary["plant"]["energy_residual_rel"] = plant_traj.audit.max_step_residual_rel;

    bool plant_cools = pf.net_change_k < 0.0 && pf.strictly_decreasing_after_flush;
    bool high_q_rises = false;
    for (std::size_t i = 0; i < grid.q_axis.size(); ++i) {
        const FosterLtiModel& model = grid.vertices[grid.index(i, 0, 0)];
        SimulationResult sim =
            simulate_lti(model, q, grid.t0_temperature, kValidationTEnd, cfg.sim_dt);
        ErrorMetrics em = metric_errors(sim.t, sim.t_avg, plant_traj.t, plant_traj.t_avg);
        WindowFlags wf = window_flags(sim, 200.0, kFlushWindowEnd);
        std::string name = "lti_q" + format_double(grid.q_axis[i]);
        report.summary["models"][name] = {
            {"q_gen_w_per_m3", grid.q_axis[i]},
            {"max_abs_error_k", em.max_abs_k},
            {"max_rel_error_pct", em.max_rel_pct},
            {"first_200s_net_change_k", wf.net_change_k},
            {"first_200s_nondecreasing", wf.nondecreasing},
            {"first_200s_max_abs_error_k", max_abs_within(sim, plant_traj, 200.0)},
            {"fit_rms", model.fit_rms},
        };
        if (grid.q_axis[i] == 5e6)
            high_q_rises = wf.nondecreasing && wf.net_change_k > 0.0;
        report.trajectories.emplace_back(name, std::move(sim));
    }
    report.summary["sign_disagreement_detected"] = plant_cools && high_q_rises;

    if (!cfg.out_dir.empty())
        write_study_outputs(report, cfg.out_dir);
    return report;
}

StudyReport scenario_lpv_validation(const StudyConfig& cfg) {
    PlantModel plant(cfg.plant);
    SimProfiles profiles = validation_profiles();
    SimulationResult plant_traj = simulate_plant(plant, profiles, kValidationTEnd, cfg.sim_dt);
    LpvGrid grid = build_validation_grid(cfg);
    SimulationResult lpv_traj = simulate_lpv(grid, profiles, kValidationTEnd, cfg.sim_dt);
    Profile q = validation_heat_profile();

    StudyReport report;
    report.study = "lpv-validation";
    report.summary["provenance"]["plant_config_hash"] = plant_config_hash(cfg.plant);
    report.summary["provenance"]["study_config_hash"] = study_config_hash(cfg, report.study);

    ErrorMetrics lpv_err = metric_errors(lpv_traj.t, lpv_traj.t_avg, plant_traj.t, plant_traj.t_avg);
    report.summary["lpv"] = {
        {"max_abs_error_k", lpv_err.max_abs_k},
        {"max_rel_error_pct", lpv_err.max_rel_pct},
        {"under_4pct", lpv_err.max_rel_pct < 4.0},
        {"hull_clamps", lpv_traj.hull_clamps},
    };

    double best_lti = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.q_axis.size(); ++i) {
        const FosterLtiModel& model = grid.vertices[grid.index(i, 0, 0)];
        SimulationResult sim =
            simulate_lti(model, q, grid.t0_temperature, kValidationTEnd, cfg.sim_dt);
        ErrorMetrics em = metric_errors(sim.t, sim.t_avg, plant_traj.t, plant_traj.t_avg);
        best_lti = std::min(best_lti, em.max_abs_k);
        std::string name = "lti_q" + format_double(grid.q_axis[i]);
        report.summary["lti_max_abs_error_k"][name] = em.max_abs_k;
        report.summary["fit_rms"][name] = model.fit_rms;
        report.trajectories.emplace_back(name, std::move(sim));
    }
    report.summary["lpv_beats_every_lti"] = lpv_err.max_abs_k < best_lti;
    report.summary["best_lti_max_abs_error_k"] = best_lti;

    report.trajectories.emplace_back("plant", std::move(plant_traj));
    report.trajectories.emplace_back("lpv", std::move(lpv_traj));
    if (!cfg.out_dir.empty())
        write_study_outputs(report, cfg.out_dir);
    return report;
}

StudyReport scenario_flow_study(const StudyConfig& cfg) {
    LpvGrid grid = build_lpv_grid(cfg.plant, schedule_q_axis(), schedule_m_axis(),
                                  schedule_t_axis_c(), cfg.build);
    Profile q = flow_study_heat_profile();
    const std::vector<double> targets{0.0, 2.8, 8.4, 14.0};

    StudyReport report;
    report.study = "flow";
    report.summary["provenance"]["plant_config_hash"] = plant_config_hash(cfg.plant);
    report.summary["provenance"]["study_config_hash"] = study_config_hash(cfg, report.study);
    report.summary["window_start_s"] = kFlowStudyWindowStart;

    std::vector<Profile> flows;
    std::vector<double> spreads;
    for (std::size_t c = 0; c < targets.size(); ++c) {
        Profile flow =
            make_proportional_flow(q, kFlowStudyMeanFlow, targets[c], kFlowStudyTEnd);
        SimProfiles profiles{q, flow, Profile::constant(kFlowStudyInletC)};
        SimulationResult traj = simulate_lpv(grid, profiles, kFlowStudyTEnd, cfg.sim_dt);

        std::vector<double> window;
        window.reserve(traj.t.size());
        for (std::size_t i = 0; i < traj.t.size(); ++i)
            if (traj.t[i] >= kFlowStudyWindowStart)
                window.push_back(traj.t_avg[i]);
        double spread = stddev_population(window);
        spreads.push_back(spread);

        std::string name = "case" + std::to_string(c + 1);
        report.summary["cases"][name] = {
            {"target_cov_pct", targets[c]},
            {"flow_mean_kg_per_s", flow.mean(kFlowStudyTEnd)},
            {"flow_cov_pct",
             targets[c] == 0.0
                 ? 0.0
                 : flow.stddev(kFlowStudyTEnd) / flow.mean(kFlowStudyTEnd) * 100.0},
            {"temp_std_k", spread},
            {"temp_std_full_k", stddev_population(traj.t_avg)},
            {"hull_clamps", traj.hull_clamps},
        };
        report.trajectories.emplace_back(name, std::move(traj));
        flows.push_back(std::move(flow));
    }

    bool nonincreasing = true;
    for (std::size_t c = 1; c < spreads.size(); ++c)
        if (spreads[c] > spreads[c - 1])
            nonincreasing = false;
    report.summary["temp_std_nonincreasing"] = nonincreasing;
    report.summary["case4_below_case1"] = spreads.back() < spreads.front();

    if (!cfg.out_dir.empty()) {
        write_study_outputs(report, cfg.out_dir);
        for (std::size_t c = 0; c < flows.size(); ++c)
            write_profile_csv(cfg.out_dir / ("case" + std::to_string(c + 1) + "_flow.csv"),
                              flows[c], "m_dot_kg_per_s");
        write_profile_csv(cfg.out_dir / "heat_profile.csv", q, "q_gen_w_per_m3");
    }
    return report;
}

namespace {

CoupledResult run_coupled_impl(const EcmParams& params, const Profile& current,
                               const CoupledOptions& opts, double t0_temperature,
                               const std::function<double(const SchedulePoint&, double)>& step) {
    validate(params);
    if (!(opts.dt > 0.0) || !(opts.t_end > 0.0))
        throw std::invalid_argument("run_ecm_coupled: dt and t_end must be positive");
    if (opts.exchange_stride < 1)
        throw std::invalid_argument("run_ecm_coupled: exchange stride must be at least 1");
    if (current.empty())
        throw std::invalid_argument("run_ecm_coupled: empty current profile");

    long n_steps = static_cast<long>(std::ceil(opts.t_end / opts.dt - 1e-9));
    CoupledResult out;
    out.traj.t.reserve(n_steps + 1);
    out.traj.t_avg.reserve(n_steps + 1);
    out.soc.reserve(n_steps + 1);
    out.voltage.reserve(n_steps + 1);
    out.q_gen.reserve(n_steps + 1);

    EcmState es;
    es.soc = opts.soc0;
    es.v_rc = 0.0;
    es.temperature = t0_temperature;
    out.traj.t.push_back(0.0);
    out.traj.t_avg.push_back(t0_temperature);
    out.soc.push_back(es.soc);
    out.voltage.push_back(ocv(params, es.soc));
    out.q_gen.push_back(0.0);

    double t_exchanged = t0_temperature;
    double q_held = 0.0;
    double t_avg = t0_temperature;
    for (long n = 0; n < n_steps; ++n) {
        double t_n = static_cast<double>(n) * opts.dt;
        bool exchange = n % opts.exchange_stride == 0;
        if (exchange)
            t_exchanged = t_avg;
        es.temperature = t_exchanged;

        double i_a = current(t_n);
        EcmStepResult er = step_ecm(params, es, i_a, opts.dt);
        out.soc_saturated = out.soc_saturated || er.saturated;
        es = er.state;
        if (exchange)
            q_held = heat_generation(i_a, ocv(params, es.soc), er.terminal_voltage,
                                     es.temperature, entropy_coeff(params, es.soc),
                                     params.cell_volume_m3);

        SchedulePoint p{q_held, opts.m_dot, celsius_to_kelvin(opts.t_in_c)};
        t_avg = step(p, opts.dt);
        out.traj.t.push_back(static_cast<double>(n + 1) * opts.dt);
        out.traj.t_avg.push_back(t_avg);
        out.soc.push_back(es.soc);
        out.voltage.push_back(er.terminal_voltage);
        out.q_gen.push_back(q_held);
    }
    return out;
}

}  // namespace

CoupledResult run_ecm_coupled(const LpvGrid& grid, const EcmParams& params,
                              const Profile& current, const CoupledOptions& opts) {
    validate(grid);
    LpvState state = make_lpv_state(grid);
    long clamps = 0;
    auto step = [&](const SchedulePoint& p, double dt) {
        return step_lpv(grid, state, p, dt, &clamps);
    };
    CoupledResult out = run_coupled_impl(params, current, opts, grid.t0_temperature, step);
    out.traj.hull_clamps = clamps;
    return out;
}

CoupledResult run_ecm_coupled(const PlantModel& plant, const EcmParams& params,
                              const Profile& current, const CoupledOptions& opts) {
    PlantSimulator sim(plant, plant.config().initial_temperature);
    auto step = [&](const SchedulePoint& p, double dt) {
        sim.step(p, dt);
        return sim.cell_average();
    };
    CoupledResult out =
        run_coupled_impl(params, current, opts, plant.config().initial_temperature, step);
    out.traj.audit = sim.audit();
    return out;
}

}  // namespace cellrom
