#include "cellrom/ecm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cellrom/io.hpp"

namespace cellrom {

namespace {

void check_soc(double soc) {
    if (!(soc >= 0.0 && soc <= 1.0))
        throw std::domain_error("SOC out of [0, 1]");
}

void check_positive_table(const Table2D& t, const char* what) {
    for (double v : t.values())
        if (v <= 0.0)
            throw std::invalid_argument(std::string(what) + ": entries must be positive");
}

Table1D table1d_from_json(const nlohmann::json& j, const char* what) {
    std::vector<double> x, y;
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != 2)
            throw std::invalid_argument(std::string(what) + ": expected [soc, value] pairs");
        x.push_back(row[0].get<double>());
        y.push_back(row[1].get<double>());
    }
    return Table1D(std::move(x), std::move(y));
}

Table2D table2d_from_json(const nlohmann::json& j, const char* what) {
    std::vector<std::array<double, 3>> triples;
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != 3)
            throw std::invalid_argument(std::string(what) + ": expected [soc, temp_k, value] triples");
        triples.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
    }
    return Table2D::from_triples(triples);
}

nlohmann::json table1d_to_json(const Table1D& t) {
    nlohmann::json j = nlohmann::json::array();
    for (std::size_t i = 0; i < t.size(); ++i)
        j.push_back({t.xs()[i], t.ys()[i]});
    return j;
}

nlohmann::json table2d_to_json(const Table2D& t) {
    nlohmann::json j = nlohmann::json::array();
    for (std::size_t i = 0; i < t.xs().size(); ++i)
        for (std::size_t k = 0; k < t.ys().size(); ++k)
            j.push_back({t.xs()[i], t.ys()[k], t.values()[i * t.ys().size() + k]});
    return j;
}

}  // namespace

void validate(const EcmParams& p) {
    if (p.capacity_ah <= 0.0)
        throw std::invalid_argument("EcmParams: capacity must be positive");
    if (p.cell_volume_m3 <= 0.0)
        throw std::invalid_argument("EcmParams: cell volume must be positive");
    if (p.ocv_table.empty() || p.entropy_table.empty() || p.r0_table.empty() ||
        p.r1_table.empty() || p.c1_table.empty())
        throw std::invalid_argument("EcmParams: all tables must be populated");
    if (!p.ocv_table.nondecreasing())
        throw std::invalid_argument("EcmParams: OCV table must be nondecreasing in SOC");
    auto check_domain = [](const std::vector<double>& socs, const char* what) {
        if (socs.front() < 0.0 || socs.back() > 1.0)
            throw std::invalid_argument(std::string(what) + ": SOC nodes outside [0, 1]");
    };
    check_domain(p.ocv_table.xs(), "OCV table");
    check_domain(p.entropy_table.xs(), "entropy table");
    check_domain(p.r0_table.xs(), "R0 table");
    check_domain(p.r1_table.xs(), "R1 table");
    check_domain(p.c1_table.xs(), "C1 table");
    check_positive_table(p.r0_table, "R0 table");
    check_positive_table(p.r1_table, "R1 table");
    check_positive_table(p.c1_table, "C1 table");
}

EcmParams ecm_params_from_json(const nlohmann::json& j) {
    EcmParams p;
    p.capacity_ah = j.at("capacity_ah").get<double>();
    p.cell_volume_m3 = j.at("cell_volume_m3").get<double>();
    p.ocv_table = table1d_from_json(j.at("ocv"), "ocv");
    p.entropy_table = table1d_from_json(j.at("entropy"), "entropy");
    p.r0_table = table2d_from_json(j.at("r0"), "r0");
    p.r1_table = table2d_from_json(j.at("r1"), "r1");
    p.c1_table = table2d_from_json(j.at("c1"), "c1");
    validate(p);
    return p;
}

nlohmann::json ecm_params_to_json(const EcmParams& p) {
    nlohmann::json j;
    j["capacity_ah"] = p.capacity_ah;
    j["cell_volume_m3"] = p.cell_volume_m3;
    j["ocv"] = table1d_to_json(p.ocv_table);
    j["entropy"] = table1d_to_json(p.entropy_table);
    j["r0"] = table2d_to_json(p.r0_table);
    j["r1"] = table2d_to_json(p.r1_table);
    j["c1"] = table2d_to_json(p.c1_table);
    return j;
}

EcmParams load_ecm_params(const std::filesystem::path& path) {
    return ecm_params_from_json(load_json(path));
}

double ocv(const EcmParams& params, double soc) {
    check_soc(soc);
    return params.ocv_table(soc);
}

double entropy_coeff(const EcmParams& params, double soc) {
    check_soc(soc);
    return params.entropy_table(soc);
}

EcmStepResult step_ecm(const EcmParams& params, const EcmState& state,
                       double current_a, double dt) {
    if (!(dt > 0.0))
        throw std::invalid_argument("step_ecm: dt must be positive");
    if (!std::isfinite(current_a) || !std::isfinite(state.soc) ||
        !std::isfinite(state.v_rc) || !std::isfinite(state.temperature))
        throw std::invalid_argument("step_ecm: non-finite input");

    EcmStepResult out;
    double soc_raw = state.soc - current_a * dt / (3600.0 * params.capacity_ah);
    out.state.soc = std::clamp(soc_raw, 0.0, 1.0);
    out.saturated = soc_raw != out.state.soc;

    // RC branch: exact solution of C1 dv/dt = I - v/R1 over the step, with
    // R1, C1 held at the incoming (SOC, T).
    double r1 = params.r1_table(state.soc, state.temperature);
    double c1 = params.c1_table(state.soc, state.temperature);
    double tau = r1 * c1;
    double v_inf = current_a * r1;
    double decay = std::exp(-dt / tau);
    out.state.v_rc = v_inf + (state.v_rc - v_inf) * decay;
    out.state.temperature = state.temperature;

    double r0 = params.r0_table(out.state.soc, state.temperature);
    out.terminal_voltage =
        params.ocv_table(out.state.soc) - current_a * r0 - out.state.v_rc;
    return out;
}

double heat_generation(double current_a, double u_oc, double v, double temperature_k,
                       double duoc_dt, double cell_volume_m3) {
    if (cell_volume_m3 <= 0.0)
        throw std::domain_error("heat_generation: cell volume must be positive");
    if (temperature_k <= 0.0)
        throw std::domain_error("heat_generation: temperature must be positive");
    if (!std::isfinite(current_a) || !std::isfinite(u_oc) || !std::isfinite(v) ||
        !std::isfinite(duoc_dt))
        throw std::invalid_argument("heat_generation: non-finite input");
    double irreversible = current_a * (u_oc - v);
    double reversible = current_a * temperature_k * duoc_dt;
    return (irreversible - reversible) / cell_volume_m3;
}

EcmParams default_ecm_params() {
    EcmParams p;
    p.capacity_ah = 10.0;
    p.cell_volume_m3 = 1.5e-4; // matches the default plant cell geometry

    p.ocv_table = Table1D(
        {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0},
        {3.00, 3.35, 3.48, 3.55, 3.61, 3.66, 3.72, 3.80, 3.90, 4.03, 4.20});
    // Entropy coefficient changes sign across SOC.
    p.entropy_table = Table1D(
        {0.0, 0.2, 0.4, 0.6, 0.8, 1.0},
        {2.0e-4, 1.0e-4, 0.0, -0.5e-4, -1.2e-4, -2.0e-4});

    std::vector<std::array<double, 3>> r0;
    std::vector<std::array<double, 3>> r1;
    std::vector<std::array<double, 3>> c1;
    const double socs[] = {0.0, 0.5, 1.0};
    const double temps[] = {273.15, 298.15, 323.15};
    for (double s : socs)
        for (double t : temps) {
            // Resistance falls with temperature and rises toward empty.
            double scale = 1.0 + 0.8 * (298.15 - t) / 50.0 + 0.5 * (1.0 - s);
            r0.push_back({s, t, 8.0e-3 * scale});
            r1.push_back({s, t, 4.0e-3 * scale});
            c1.push_back({s, t, 2000.0 / scale});
        }
    p.r0_table = Table2D::from_triples(r0);
    p.r1_table = Table2D::from_triples(r1);
    p.c1_table = Table2D::from_triples(c1);
    validate(p);
    return p;
}

}  // namespace cellrom
