#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cellrom/plant.hpp"
#include "cellrom/rom.hpp"

namespace cellrom {

/// Dense tensor of Foster models over the scheduling axes (heat generation,
/// flow rate, inlet temperature). All vertices share the order and the mode
/// pairing convention (time constants sorted descending), which is what makes
/// per-mode parameter interpolation well defined.
struct LpvGrid {
    std::vector<double> q_axis; // W/m^3, strictly increasing
    std::vector<double> m_axis; // kg/s, strictly increasing
    std::vector<double> t_axis; // K, strictly increasing (degC at interfaces)
    int order = 0;
    std::vector<FosterLtiModel> vertices; // index (iq*|m| + im)*|t| + it
    double t0_temperature = 300.0;        // K, common extraction start
    std::string plant_hash;               // config that produced the vertices
    double extraction_t_end = 0.0;
    double extraction_dt = 0.0;

    std::size_t index(std::size_t iq, std::size_t im, std::size_t it) const {
        return (iq * m_axis.size() + im) * t_axis.size() + it;
    }
    const FosterLtiModel& at(std::size_t iq, std::size_t im, std::size_t it) const {
        return vertices[index(iq, im, it)];
    }
};

void validate(const LpvGrid& grid);

struct LpvBuildOptions {
    int order = 4;
    double t_end = 4000.0; // extraction horizon, s
    double dt = 0.5;       // extraction step, s
    FitOptions fit;
    int retries = 3; // per-vertex refits with perturbed initialization
};

/// Extracts and fits one Foster model per axis combination. Vertices whose
/// fit collapses below the requested order are retried with a perturbed
/// initialization seed; a vertex that stays collapsed fails the build, since
/// interpolation needs a uniform order.
LpvGrid build_lpv_grid(const PlantConfig& config, const std::vector<double>& q_axis,
                       const std::vector<double>& m_axis,
                       const std::vector<double>& t_axis_c, const LpvBuildOptions& opts = {});

struct InterpolatedParams {
    std::vector<double> gains;
    std::vector<double> taus;
};

/// Multilinear blend over the enclosing vertices, per mode rank: gains
/// linear, time constants in the log domain. Axis metrics: inverse in heat
/// generation (the plant's response from a fixed start is affine in q with a
/// 1/q term in the normalized gains), linear in flow rate and inlet
/// temperature. Out-of-hull coordinates clamp to the boundary;
/// `clamped` (when non-null) is incremented once per clamped lookup.
InterpolatedParams interpolate_model(const LpvGrid& grid, const SchedulePoint& p,
                                     long* clamped = nullptr);

struct LpvState {
    std::vector<double> x; // K, one lag state per mode
    InterpolatedParams last_params;
};

LpvState make_lpv_state(const LpvGrid& grid);

/// One scheduled step: parameters frozen at interpolate_model(grid, p), then
/// the same exact zero-order-hold update the LTI simulator uses. The lag
/// states persist across parameter changes. Returns the cell-average
/// temperature after the step.
double step_lpv(const LpvGrid& grid, LpvState& state, const SchedulePoint& p, double dt,
                long* clamped = nullptr);

SimulationResult simulate_lpv(const LpvGrid& grid, const SimProfiles& profiles, double t_end,
                              double dt);

nlohmann::json lpv_grid_to_json(const LpvGrid& grid);
LpvGrid lpv_grid_from_json(const nlohmann::json& j);
void save_lpv_grid(const std::filesystem::path& path, const LpvGrid& grid);
LpvGrid load_lpv_grid(const std::filesystem::path& path);

}  // namespace cellrom
