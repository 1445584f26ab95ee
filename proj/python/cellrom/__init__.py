"""Battery thermal reduced-order modeling: finite-volume plant, Foster fits, LPV grids."""

import json as _json

from ._core import (  # noqa: F401
    CoupledResult,
    EcmParams,
    EnergyAudit,
    FLOW_STUDY_MEAN_FLOW,
    FLOW_STUDY_T_END,
    FosterLtiModel,
    LpvGrid,
    PlantConfig,
    Profile,
    SimulationResult,
    StepResponse,
    ThermalMaterial,
    VALIDATION_FLOW,
    VALIDATION_INLET_C,
    VALIDATION_T_END,
    build_lpv_grid,
    cov_pct,
    default_ecm_params,
    entropy_coeff,
    extract_step_response,
    extraction_q_axis,
    fit_foster,
    flow_study_heat_profile,
    h_conv,
    heat_generation,
    interpolate_model,
    load_lpv_grid,
    load_lti_model,
    load_step_response,
    load_trajectory,
    make_proportional_flow,
    metric_errors,
    ocv,
    reynolds,
    run_ecm_coupled,
    run_ecm_coupled_plant,
    schedule_m_axis,
    schedule_q_axis,
    schedule_t_axis_c,
    simulate_lpv,
    simulate_lti,
    simulate_plant,
    validation_heat_profile,
)
from ._core import run_study as _run_study

__version__ = "0.1.0"


def run_study(name, **kwargs):
    """Run one of the bundled studies and return its report as a dict.

    name: 'lti-failure', 'lpv-validation', or 'flow'.
    Keyword arguments: config, out_dir, order, t_end, dt, sim_dt, seed.
    """
    return _json.loads(_run_study(name, **kwargs))
