#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cellrom/ecm.hpp"
#include "cellrom/io.hpp"
#include "cellrom/lpv.hpp"
#include "cellrom/metrics.hpp"
#include "cellrom/plant.hpp"
#include "cellrom/rom.hpp"
#include "cellrom/scenarios.hpp"

namespace py = pybind11;
using namespace cellrom;

namespace {

StudyConfig make_study_config(const PlantConfig& plant, const std::string& out_dir, int order,
                              double t_end, double dt, double sim_dt, unsigned seed) {
    StudyConfig cfg;
    cfg.plant = plant;
    cfg.build.order = order;
    cfg.build.t_end = t_end;
    cfg.build.dt = dt;
    cfg.build.fit.seed = seed;
    cfg.sim_dt = sim_dt;
    cfg.out_dir = out_dir;
    return cfg;
}

std::string summary_string(const StudyReport& report) {
    nlohmann::json j;
    j["study"] = report.study;
    j["summary"] = report.summary;
    return j.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "battery thermal reduced-order-modeling core";

    py::class_<Profile>(m, "Profile")
        .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("times"),
             py::arg("values"))
        .def_static("constant", &Profile::constant, py::arg("value"))
        .def("__call__", &Profile::operator(), py::arg("t"))
        .def("__len__", &Profile::size)
        .def_property_readonly("times", &Profile::times)
        .def_property_readonly("values", &Profile::values)
        .def("mean", &Profile::mean, py::arg("t_end"))
        .def("stddev", &Profile::stddev, py::arg("t_end"));

    py::class_<ThermalMaterial>(m, "ThermalMaterial")
        .def(py::init<>())
        .def_readwrite("rho", &ThermalMaterial::rho)
        .def_readwrite("cp", &ThermalMaterial::cp)
        .def_readwrite("lam", &ThermalMaterial::lambda)
        .def_readwrite("mu", &ThermalMaterial::mu);

    py::class_<PlantConfig>(m, "PlantConfig")
        .def(py::init<>())
        .def_readwrite("cell_length", &PlantConfig::cell_length)
        .def_readwrite("cell_width", &PlantConfig::cell_width)
        .def_readwrite("cell_thickness", &PlantConfig::cell_thickness)
        .def_readwrite("plate_thickness", &PlantConfig::plate_thickness)
        .def_readwrite("channel_gap", &PlantConfig::channel_gap)
        .def_readwrite("n_axial", &PlantConfig::n_axial)
        .def_readwrite("n_stack", &PlantConfig::n_stack)
        .def_readwrite("battery", &PlantConfig::battery)
        .def_readwrite("aluminum", &PlantConfig::aluminum)
        .def_readwrite("water", &PlantConfig::water)
        .def_readwrite("nusselt", &PlantConfig::nusselt)
        .def_readwrite("initial_temperature", &PlantConfig::initial_temperature)
        .def_readwrite("half_symmetry", &PlantConfig::half_symmetry)
        .def_readwrite("adiabatic", &PlantConfig::adiabatic)
        .def_readwrite("explicit_mode", &PlantConfig::explicit_mode)
        .def_readwrite("variable_viscosity", &PlantConfig::variable_viscosity)
        .def_static("load",
                    [](const std::string& path) { return load_plant_config(path); },
                    py::arg("path"))
        .def("save",
             [](const PlantConfig& c, const std::string& path) {
                 save_json(path, plant_config_to_json(c));
             },
             py::arg("path"))
        .def("hash", &plant_config_hash);

    m.def("h_conv", &h_conv, py::arg("config"), py::arg("m_dot"),
          py::arg("coolant_temperature"));
    m.def("reynolds", &reynolds, py::arg("config"), py::arg("m_dot"),
          py::arg("coolant_temperature"));

    py::class_<EnergyAudit>(m, "EnergyAudit")
        .def_readonly("generated", &EnergyAudit::generated)
        .def_readonly("advected", &EnergyAudit::advected)
        .def_readonly("stored", &EnergyAudit::stored)
        .def_readonly("max_step_residual_rel", &EnergyAudit::max_step_residual_rel)
        .def_readonly("available", &EnergyAudit::available);

    py::class_<SimulationResult>(m, "SimulationResult")
        .def_readonly("t", &SimulationResult::t)
        .def_readonly("t_avg", &SimulationResult::t_avg)
        .def_readonly("t_max", &SimulationResult::t_max)
        .def_readonly("t_out", &SimulationResult::t_out)
        .def_readonly("audit", &SimulationResult::audit)
        .def_readonly("hull_clamps", &SimulationResult::hull_clamps)
        .def("save",
             [](const SimulationResult& r, const std::string& path) {
                 write_trajectory_csv(path, r);
             },
             py::arg("path"));
    m.def("load_trajectory",
          [](const std::string& path) { return read_trajectory_csv(path); }, py::arg("path"));

    m.def(
        "simulate_plant",
        [](const PlantConfig& config, const Profile& q_gen, const Profile& m_dot,
           const Profile& t_in_c, double t_end, double dt) {
            PlantModel model(config);
            return simulate_plant(model, {q_gen, m_dot, t_in_c}, t_end, dt);
        },
        py::arg("config"), py::arg("q_gen"), py::arg("m_dot"), py::arg("t_in_c"),
        py::arg("t_end"), py::arg("dt") = 0.5,
        "Finite-volume truth run under zero-order-hold profiles.");

    py::class_<StepResponse>(m, "StepResponse")
        .def_readonly("t", &StepResponse::t)
        .def_readonly("delta_t", &StepResponse::delta_t)
        .def_readonly("normalized", &StepResponse::normalized)
        .def_readonly("t0_temperature", &StepResponse::t0_temperature)
        .def_readonly("settled", &StepResponse::settled)
        .def_readonly("settle_slope", &StepResponse::settle_slope)
        .def("save",
             [](const StepResponse& r, const std::string& path) {
                 write_step_response_csv(path, r);
             },
             py::arg("path"));
    m.def("load_step_response",
          [](const std::string& path) { return read_step_response_csv(path); },
          py::arg("path"));

    m.def(
        "extract_step_response",
        [](const PlantConfig& config, double q_gen, double m_dot, double t_in_c, double t_end,
           double dt) {
            PlantModel model(config);
            SchedulePoint op{q_gen, m_dot, celsius_to_kelvin(t_in_c)};
            return extract_step_response(model, op, t_end, dt);
        },
        py::arg("config"), py::arg("q_gen"), py::arg("m_dot"), py::arg("t_in_c"),
        py::arg("t_end") = 4000.0, py::arg("dt") = 0.5);

    py::class_<FosterLtiModel>(m, "FosterLtiModel")
        .def_readonly("order", &FosterLtiModel::order)
        .def_readonly("gains", &FosterLtiModel::gains)
        .def_readonly("taus", &FosterLtiModel::taus)
        .def_readonly("t0_temperature", &FosterLtiModel::t0_temperature)
        .def_readonly("fit_rms", &FosterLtiModel::fit_rms)
        .def_readonly("notes", &FosterLtiModel::notes)
        .def("save",
             [](const FosterLtiModel& model, const std::string& path) {
                 save_lti_model(path, model);
             },
             py::arg("path"));
    m.def("load_lti_model",
          [](const std::string& path) { return load_lti_model(path); }, py::arg("path"));

    m.def(
        "fit_foster",
        [](const StepResponse& resp, int order, unsigned seed) {
            FitOptions fo;
            fo.seed = seed;
            return fit_foster(resp, order, fo);
        },
        py::arg("response"), py::arg("order") = 4, py::arg("seed") = 42u);

    m.def("simulate_lti", &simulate_lti, py::arg("model"), py::arg("q_profile"),
          py::arg("t0_temperature"), py::arg("t_end"), py::arg("dt") = 0.5);

    py::class_<LpvGrid>(m, "LpvGrid")
        .def_readonly("q_axis", &LpvGrid::q_axis)
        .def_readonly("m_axis", &LpvGrid::m_axis)
        .def_readonly("t_axis", &LpvGrid::t_axis)
        .def_readonly("order", &LpvGrid::order)
        .def_readonly("t0_temperature", &LpvGrid::t0_temperature)
        .def_readonly("vertices", &LpvGrid::vertices)
        .def("save",
             [](const LpvGrid& grid, const std::string& path) { save_lpv_grid(path, grid); },
             py::arg("path"));
    m.def("load_lpv_grid", [](const std::string& path) { return load_lpv_grid(path); },
          py::arg("path"));

    m.def(
        "build_lpv_grid",
        [](const PlantConfig& config, const std::vector<double>& q_axis,
           const std::vector<double>& m_axis, const std::vector<double>& t_axis_c, int order,
           double t_end, double dt, unsigned seed) {
            LpvBuildOptions opts;
            opts.order = order;
            opts.t_end = t_end;
            opts.dt = dt;
            opts.fit.seed = seed;
            return build_lpv_grid(config, q_axis, m_axis, t_axis_c, opts);
        },
        py::arg("config"), py::arg("q_axis"), py::arg("m_axis"), py::arg("t_axis_c"),
        py::arg("order") = 4, py::arg("t_end") = 4000.0, py::arg("dt") = 0.5,
        py::arg("seed") = 42u);

    m.def(
        "interpolate_model",
        [](const LpvGrid& grid, double q_gen, double m_dot, double t_in_c) {
            SchedulePoint p{q_gen, m_dot, celsius_to_kelvin(t_in_c)};
            InterpolatedParams ip = interpolate_model(grid, p);
            return py::make_tuple(ip.gains, ip.taus);
        },
        py::arg("grid"), py::arg("q_gen"), py::arg("m_dot"), py::arg("t_in_c"));

    m.def(
        "simulate_lpv",
        [](const LpvGrid& grid, const Profile& q_gen, const Profile& m_dot,
           const Profile& t_in_c, double t_end, double dt) {
            return simulate_lpv(grid, {q_gen, m_dot, t_in_c}, t_end, dt);
        },
        py::arg("grid"), py::arg("q_gen"), py::arg("m_dot"), py::arg("t_in_c"),
        py::arg("t_end"), py::arg("dt") = 0.5);

    m.def(
        "metric_errors",
        [](const std::vector<double>& t_test, const std::vector<double>& test_k,
           const std::vector<double>& t_ref, const std::vector<double>& ref_k) {
            ErrorMetrics e = metric_errors(t_test, test_k, t_ref, ref_k);
            return py::make_tuple(e.max_abs_k, e.max_rel_pct);
        },
        py::arg("t_test"), py::arg("test_k"), py::arg("t_ref"), py::arg("ref_k"),
        "Returns (max_abs_error_K, max_rel_error_pct).");
    m.def("cov_pct", &cov_pct, py::arg("series"));

    m.def("make_proportional_flow", &make_proportional_flow, py::arg("q_profile"),
          py::arg("mean_flow"), py::arg("target_cov_pct"), py::arg("t_end"));

    m.def("validation_heat_profile", &validation_heat_profile);
    m.def("flow_study_heat_profile", &flow_study_heat_profile);
    m.attr("VALIDATION_T_END") = kValidationTEnd;
    m.attr("VALIDATION_FLOW") = kValidationFlow;
    m.attr("VALIDATION_INLET_C") = kValidationInletC;
    m.attr("FLOW_STUDY_T_END") = kFlowStudyTEnd;
    m.attr("FLOW_STUDY_MEAN_FLOW") = kFlowStudyMeanFlow;
    m.def("extraction_q_axis", &extraction_q_axis);
    m.def("schedule_q_axis", &schedule_q_axis);
    m.def("schedule_m_axis", &schedule_m_axis);
    m.def("schedule_t_axis_c", &schedule_t_axis_c);

    m.def(
        "run_study",
        [](const std::string& name, const PlantConfig& config, const std::string& out_dir,
           int order, double t_end, double dt, double sim_dt, unsigned seed) {
            StudyConfig cfg =
                make_study_config(config, out_dir, order, t_end, dt, sim_dt, seed);
            StudyReport report;
            if (name == "lti-failure")
                report = scenario_lti_failure(cfg);
            else if (name == "lpv-validation")
                report = scenario_lpv_validation(cfg);
            else if (name == "flow")
                report = scenario_flow_study(cfg);
            else
                throw std::invalid_argument("unknown study '" + name + "'");
            return summary_string(report);
        },
        py::arg("name"), py::arg("config") = PlantConfig{}, py::arg("out_dir") = std::string(),
        py::arg("order") = 4, py::arg("t_end") = 4000.0, py::arg("dt") = 0.5,
        py::arg("sim_dt") = 0.5, py::arg("seed") = 42u,
        "Runs 'lti-failure', 'lpv-validation', or 'flow'; returns the report as a JSON "
        "string.");

    py::class_<EcmParams>(m, "EcmParams")
        .def_readwrite("capacity_ah", &EcmParams::capacity_ah)
        .def_readwrite("cell_volume_m3", &EcmParams::cell_volume_m3)
        .def_static("load",
                    [](const std::string& path) { return load_ecm_params(path); },
                    py::arg("path"))
        .def("save",
             [](const EcmParams& p, const std::string& path) {
                 save_json(path, ecm_params_to_json(p));
             },
             py::arg("path"));
    m.def("default_ecm_params", &default_ecm_params);
    m.def("ocv", &ocv, py::arg("params"), py::arg("soc"));
    m.def("entropy_coeff", &entropy_coeff, py::arg("params"), py::arg("soc"));
    m.def("heat_generation", &heat_generation, py::arg("current_a"), py::arg("u_oc"),
          py::arg("v"), py::arg("temperature_k"), py::arg("duoc_dt"),
          py::arg("cell_volume_m3"));

    py::class_<CoupledResult>(m, "CoupledResult")
        .def_readonly("traj", &CoupledResult::traj)
        .def_readonly("soc", &CoupledResult::soc)
        .def_readonly("voltage", &CoupledResult::voltage)
        .def_readonly("q_gen", &CoupledResult::q_gen)
        .def_readonly("soc_saturated", &CoupledResult::soc_saturated);

    m.def(
        "run_ecm_coupled",
        [](const LpvGrid& grid, const EcmParams& params, const Profile& current, double m_dot,
           double t_in_c, double t_end, double dt, double soc0, int exchange_stride) {
            CoupledOptions opts{m_dot, t_in_c, t_end, dt, soc0, exchange_stride};
            return run_ecm_coupled(grid, params, current, opts);
        },
        py::arg("grid"), py::arg("params"), py::arg("current"), py::arg("m_dot") = 2e-3,
        py::arg("t_in_c") = 5.0, py::arg("t_end") = 1800.0, py::arg("dt") = 0.5,
        py::arg("soc0") = 1.0, py::arg("exchange_stride") = 1);
    m.def(
        "run_ecm_coupled_plant",
        [](const PlantConfig& config, const EcmParams& params, const Profile& current,
           double m_dot, double t_in_c, double t_end, double dt, double soc0,
           int exchange_stride) {
            PlantModel plant(config);
            CoupledOptions opts{m_dot, t_in_c, t_end, dt, soc0, exchange_stride};
            return run_ecm_coupled(plant, params, current, opts);
        },
        py::arg("config"), py::arg("params"), py::arg("current"), py::arg("m_dot") = 2e-3,
        py::arg("t_in_c") = 5.0, py::arg("t_end") = 1800.0, py::arg("dt") = 0.5,
        py::arg("soc0") = 1.0, py::arg("exchange_stride") = 1);
}
