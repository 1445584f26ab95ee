#pragma once

#include <vector>

namespace cellrom {

constexpr double kKelvinOffset = 273.15;

inline double celsius_to_kelvin(double c) { return c + kKelvinOffset; }
inline double kelvin_to_celsius(double k) { return k - kKelvinOffset; }

/// Operating point of the thermal system: volumetric heat generation in the
/// cell, total coolant mass flow (split over the two plates), and inlet water
/// temperature. Temperature is kept in Kelvin internally; file and CLI
/// interfaces speak Celsius.
struct SchedulePoint {
    double q_gen = 0.0;   // W/m^3
    double m_dot = 0.0;   // kg/s, total over both plates
    double t_in = 278.15; // K
};

/// Energy bookkeeping accumulated over a plant simulation, all in Joules.
/// `stored` is the change of internal energy relative to the initial field,
/// `advected` the net enthalpy carried out by the coolant. The discrete
/// scheme satisfies stored = generated - advected up to round-off;
/// `max_step_residual_rel` tracks the worst per-step violation.
struct EnergyAudit {
    double generated = 0.0;
    double advected = 0.0;
    double stored = 0.0;
    double max_step_residual_rel = 0.0;
    bool available = false;
};

/// Time series produced by the plant, LTI, or LPV simulators. `t_max` and
/// `t_out` are only populated by the plant (field model); the reduced models
/// predict the cell-average temperature alone.
struct SimulationResult {
    std::vector<double> t;      // s
    std::vector<double> t_avg;  // K, volume-weighted cell average
    std::vector<double> t_max;  // K, plant only
    std::vector<double> t_out;  // K, coolant outlet, plant only
    EnergyAudit audit;
    long hull_clamps = 0;       // LPV only: scheduling points clamped to the grid hull
};

}  // namespace cellrom
