#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cellrom/io.hpp"
#include "cellrom/lpv.hpp"
#include "cellrom/metrics.hpp"
#include "cellrom/plant.hpp"
#include "cellrom/rom.hpp"
#include "cellrom/scenarios.hpp"

using namespace cellrom;

namespace {

PlantConfig plant_from_option(const std::string& path) {
    if (path.empty())
        return PlantConfig{};
    return load_plant_config(path);
}

Profile profile_or_constant(const std::string& csv_path, double constant) {
    if (!csv_path.empty())
        return read_profile_csv(csv_path);
    return Profile::constant(constant);
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t comma = csv.find(',', pos);
        if (comma == std::string::npos)
            comma = csv.size();
        out.push_back(std::stod(csv.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

struct CommonStudyOpts {
    std::string config_path;
    std::string out_dir;
    int order = 4;
    double extraction_t_end = 4000.0;
    double extraction_dt = 0.5;
    double sim_dt = 0.5;
    unsigned seed = 42;
};

void add_study_options(CLI::App* cmd, CommonStudyOpts& o) {
    cmd->add_option("--config", o.config_path, "plant config JSON (defaults built in)");
    cmd->add_option("--out", o.out_dir, "output directory")->required();
    cmd->add_option("--order", o.order, "Foster model order");
    cmd->add_option("--t-end", o.extraction_t_end, "step-response extraction horizon [s]");
    cmd->add_option("--dt", o.extraction_dt, "step-response extraction step [s]");
    cmd->add_option("--sim-dt", o.sim_dt, "scenario integration step [s]");
    cmd->add_option("--seed", o.seed, "fit initialization seed");
}

StudyConfig to_study_config(const CommonStudyOpts& o) {
    StudyConfig cfg;
    cfg.plant = plant_from_option(o.config_path);
    cfg.build.order = o.order;
    cfg.build.t_end = o.extraction_t_end;
    cfg.build.dt = o.extraction_dt;
    cfg.build.fit.seed = o.seed;
    cfg.sim_dt = o.sim_dt;
    cfg.out_dir = o.out_dir;
    return cfg;
}

void print_study_summary(const StudyReport& report, const std::string& out_dir) {
    std::cout << report.study << " done, outputs in " << out_dir << "\n"
              << report.summary.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"battery thermal reduced-order-modeling toolkit"};
    app.require_subcommand(1);

    // ---- extract ----------------------------------------------------------
    auto* extract = app.add_subcommand("extract", "run a heat-generation step response");
    std::string ex_config, ex_out = "response.csv";
    double ex_q = 0.0, ex_m = 2e-3, ex_tin = 5.0, ex_tend = 4000.0, ex_dt = 0.5;
    extract->add_option("--config", ex_config, "plant config JSON");
    extract->add_option("--q", ex_q, "step magnitude [W/m^3]")->required();
    extract->add_option("--m-dot", ex_m, "coolant flow [kg/s]");
    extract->add_option("--t-in-c", ex_tin, "inlet temperature [degC]");
    extract->add_option("--t-end", ex_tend, "horizon [s]");
    extract->add_option("--dt", ex_dt, "step [s]");
    extract->add_option("--out", ex_out, "output CSV");

    // ---- fit --------------------------------------------------------------
    auto* fit = app.add_subcommand("fit", "fit a Foster model to a step response");
    std::string fit_resp, fit_out = "model.json";
    int fit_order = 4;
    unsigned fit_seed = 42;
    fit->add_option("--response", fit_resp, "step response CSV")->required();
    fit->add_option("--order", fit_order, "model order");
    fit->add_option("--seed", fit_seed, "initialization seed");
    fit->add_option("--out", fit_out, "output model JSON");

    // ---- grid build -------------------------------------------------------
    auto* grid_cmd = app.add_subcommand("grid", "scheduling-grid operations");
    grid_cmd->require_subcommand(1);
    auto* grid_build = grid_cmd->add_subcommand("build", "extract and fit every grid vertex");
    std::string gb_config, gb_out = "grid.json", gb_preset = "validation";
    std::string gb_qaxis, gb_maxis, gb_taxis;
    int gb_order = 4;
    double gb_tend = 4000.0, gb_dt = 0.5;
    unsigned gb_seed = 42;
    grid_build->add_option("--config", gb_config, "plant config JSON");
    grid_build->add_option("--preset", gb_preset,
                           "axis preset: 'validation' (7 heat points at fixed flow/inlet) or "
                           "'full' (3x5x4 schedule)");
    grid_build->add_option("--q-axis", gb_qaxis, "comma-separated heat axis [W/m^3]");
    grid_build->add_option("--m-axis", gb_maxis, "comma-separated flow axis [kg/s]");
    grid_build->add_option("--t-axis-c", gb_taxis, "comma-separated inlet axis [degC]");
    grid_build->add_option("--order", gb_order, "Foster model order");
    grid_build->add_option("--t-end", gb_tend, "extraction horizon [s]");
    grid_build->add_option("--dt", gb_dt, "extraction step [s]");
    grid_build->add_option("--seed", gb_seed, "fit initialization seed");
    grid_build->add_option("--out", gb_out, "output grid JSON");

    // ---- simulate ---------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "run one of the three model kinds");
    std::string sim_model, sim_config, sim_lti_path, sim_grid_path, sim_out = "trajectory.csv";
    std::string sim_qprof, sim_mprof, sim_tprof;
    double sim_q = 0.0, sim_m = 2e-3, sim_tin = 5.0, sim_tend = 1800.0, sim_dt = 0.5;
    sim->add_option("--model", sim_model, "plant | lti | lpv")->required();
    sim->add_option("--config", sim_config, "plant config JSON (model=plant)");
    sim->add_option("--lti", sim_lti_path, "Foster model JSON (model=lti)");
    sim->add_option("--grid", sim_grid_path, "grid JSON (model=lpv)");
    sim->add_option("--q-profile", sim_qprof, "heat profile CSV (t_s,value)");
    sim->add_option("--q", sim_q, "constant heat generation [W/m^3]");
    sim->add_option("--m-profile", sim_mprof, "flow profile CSV");
    sim->add_option("--m-dot", sim_m, "constant flow [kg/s]");
    sim->add_option("--t-in-profile", sim_tprof, "inlet temperature profile CSV [degC]");
    sim->add_option("--t-in-c", sim_tin, "constant inlet temperature [degC]");
    sim->add_option("--t-end", sim_tend, "horizon [s]");
    sim->add_option("--dt", sim_dt, "step [s]");
    sim->add_option("--out", sim_out, "output trajectory CSV");

    // ---- compare ----------------------------------------------------------
    auto* cmp = app.add_subcommand("compare", "pointwise error metrics between trajectories");
    std::string cmp_test, cmp_ref, cmp_out;
    cmp->add_option("--test", cmp_test, "trajectory CSV under test")->required();
    cmp->add_option("--ref", cmp_ref, "reference trajectory CSV")->required();
    cmp->add_option("--out", cmp_out, "optional JSON report path");

    // ---- study ------------------------------------------------------------
    auto* study = app.add_subcommand("study", "reproduce one of the bundled studies");
    study->require_subcommand(1);
    CommonStudyOpts st_lti, st_lpv, st_flow;
    auto* study_lti = study->add_subcommand(
        "lti-failure", "single-point models vs plant on the validation drive");
    add_study_options(study_lti, st_lti);
    auto* study_lpv = study->add_subcommand(
        "lpv-validation", "scheduled model vs plant on the validation drive");
    add_study_options(study_lpv, st_lpv);
    auto* study_flow =
        study->add_subcommand("flow", "heat-proportional flow smoothing study");
    add_study_options(study_flow, st_flow);

    try {
        app.parse(argc, argv);

        if (*extract) {
            PlantModel model(plant_from_option(ex_config));
            SchedulePoint op{ex_q, ex_m, celsius_to_kelvin(ex_tin)};
            StepResponse resp = extract_step_response(model, op, ex_tend, ex_dt);
            write_step_response_csv(ex_out, resp);
            if (!resp.settled)
                std::cerr << "warning: response not settled at t_end, |dT/dt| = "
                          << format_double(resp.settle_slope) << " K/s\n";
            std::cout << "wrote " << ex_out << " (" << resp.t.size() << " samples)\n";
        } else if (*fit) {
            StepResponse resp = read_step_response_csv(fit_resp);
            FitOptions fo;
            fo.seed = fit_seed;
            FosterLtiModel model = fit_foster(resp, fit_order, fo);
            save_lti_model(fit_out, model);
            for (const auto& note : model.notes)
                std::cerr << "warning: " << note << "\n";
            std::cout << "wrote " << fit_out << " (order " << model.order
                      << ", fit_rms " << format_double(model.fit_rms) << ")\n";
        } else if (*grid_build) {
            PlantConfig config = plant_from_option(gb_config);
            std::vector<double> qa, ma, ta;
            if (!gb_qaxis.empty() || !gb_maxis.empty() || !gb_taxis.empty()) {
                if (gb_qaxis.empty() || gb_maxis.empty() || gb_taxis.empty())
                    throw std::invalid_argument(
                        "custom axes need --q-axis, --m-axis, and --t-axis-c together");
                qa = parse_list(gb_qaxis);
                ma = parse_list(gb_maxis);
                ta = parse_list(gb_taxis);
            } else if (gb_preset == "validation") {
                qa = extraction_q_axis();
                ma = {kValidationFlow};
                ta = {kValidationInletC};
            } else if (gb_preset == "full") {
                qa = schedule_q_axis();
                ma = schedule_m_axis();
                ta = schedule_t_axis_c();
            } else {
                throw std::invalid_argument("unknown preset '" + gb_preset + "'");
            }
            LpvBuildOptions opts;
            opts.order = gb_order;
            opts.t_end = gb_tend;
            opts.dt = gb_dt;
            opts.fit.seed = gb_seed;
            LpvGrid grid = build_lpv_grid(config, qa, ma, ta, opts);
            save_lpv_grid(gb_out, grid);
            std::cout << "wrote " << gb_out << " (" << grid.vertices.size()
                      << " vertices, order " << grid.order << ")\n";
        } else if (*sim) {
            Profile qp = profile_or_constant(sim_qprof, sim_q);
            Profile mp = profile_or_constant(sim_mprof, sim_m);
            Profile tp = profile_or_constant(sim_tprof, sim_tin);
            SimulationResult result;
            if (sim_model == "plant") {
                PlantModel model(plant_from_option(sim_config));
                result = simulate_plant(model, {qp, mp, tp}, sim_tend, sim_dt);
            } else if (sim_model == "lti") {
                if (sim_lti_path.empty())
                    throw std::invalid_argument("--model lti needs --lti <model.json>");
                FosterLtiModel model = load_lti_model(sim_lti_path);
                result = simulate_lti(model, qp, model.t0_temperature, sim_tend, sim_dt);
            } else if (sim_model == "lpv") {
                if (sim_grid_path.empty())
                    throw std::invalid_argument("--model lpv needs --grid <grid.json>");
                LpvGrid grid = load_lpv_grid(sim_grid_path);
                result = simulate_lpv(grid, {qp, mp, tp}, sim_tend, sim_dt);
            } else {
                throw std::invalid_argument("unknown --model '" + sim_model + "'");
            }
            write_trajectory_csv(sim_out, result);
            std::cout << "wrote " << sim_out << " (final T_avg "
                      << format_double(kelvin_to_celsius(result.t_avg.back())) << " degC";
            if (result.audit.available)
                std::cout << ", max step energy residual "
                          << format_double(result.audit.max_step_residual_rel);
            if (result.hull_clamps > 0)
                std::cout << ", " << result.hull_clamps << " hull clamps";
            std::cout << ")\n";
        } else if (*cmp) {
            SimulationResult test = read_trajectory_csv(cmp_test);
            SimulationResult ref = read_trajectory_csv(cmp_ref);
            ErrorMetrics m = metric_errors(test.t, test.t_avg, ref.t, ref.t_avg);
            nlohmann::json j{{"max_abs_error_k", m.max_abs_k},
                             {"max_rel_error_pct", m.max_rel_pct}};
            if (!cmp_out.empty())
                save_json(cmp_out, j);
            std::cout << j.dump() << "\n";
        } else if (*study_lti) {
            print_study_summary(scenario_lti_failure(to_study_config(st_lti)), st_lti.out_dir);
        } else if (*study_lpv) {
            print_study_summary(scenario_lpv_validation(to_study_config(st_lpv)),
                                st_lpv.out_dir);
        } else if (*study_flow) {
            print_study_summary(scenario_flow_study(to_study_config(st_flow)),
                                st_flow.out_dir);
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        nlohmann::json err{{"message", e.what()}};
        std::cerr << "error: " << err.dump() << "\n";
        return 1;
    }
}
