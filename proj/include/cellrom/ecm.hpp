#pragma once

#include <filesystem>

#include <nlohmann/json_fwd.hpp>

#include "cellrom/table.hpp"

namespace cellrom {

/// Equivalent-circuit parameter set: SOC-dependent open-circuit voltage and
/// entropy coefficient, plus (SOC, T)-dependent series resistance and one RC
/// branch. All tables interpolate piecewise-linearly and clamp at the edges.
struct EcmParams {
    double capacity_ah = 0.0;
    double cell_volume_m3 = 0.0;
    Table1D ocv_table;      // SOC -> V
    Table1D entropy_table;  // SOC -> V/K
    Table2D r0_table;       // (SOC, T[K]) -> Ohm
    Table2D r1_table;       // (SOC, T[K]) -> Ohm
    Table2D c1_table;       // (SOC, T[K]) -> F
};

void validate(const EcmParams& params);

EcmParams ecm_params_from_json(const nlohmann::json& j);
nlohmann::json ecm_params_to_json(const EcmParams& params);
EcmParams load_ecm_params(const std::filesystem::path& path);

struct EcmState {
    double soc = 1.0;
    double v_rc = 0.0;          // V across the RC branch
    double temperature = 300.0; // K
};

struct EcmStepResult {
    EcmState state;
    double terminal_voltage = 0.0;
    bool saturated = false; // SOC hit 0 or 1 and was clamped
};

/// Open-circuit voltage at the given SOC. SOC outside [0, 1] is a domain error.
double ocv(const EcmParams& params, double soc);

/// Entropy coefficient dUoc/dT at the given SOC; may be negative.
double entropy_coeff(const EcmParams& params, double soc);

/// Advances SOC by coulomb counting (discharge current positive) and the RC
/// branch by its exact first-order update with tau = R1*C1 evaluated at the
/// incoming (SOC, T). Terminal voltage V = Uoc(soc') - I*R0(soc', T) - v_rc'.
EcmStepResult step_ecm(const EcmParams& params, const EcmState& state,
                       double current_a, double dt);

/// Volumetric heat generation: irreversible overpotential term plus the
/// reversible entropy term, divided by cell volume.
/// q = [I*(Uoc - V) - I*T*dUoc/dT] / volume, in W/m^3.
double heat_generation(double current_a, double u_oc, double v, double temperature_k,
                       double duoc_dt, double cell_volume_m3);

/// Synthetic illustrative parameter set (not a measured cell); sized so that
/// multi-C discharges of the default plant geometry produce heat generation
/// in the range the bundled LPV grids cover.
EcmParams default_ecm_params();

}  // namespace cellrom
