#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cellrom/profile.hpp"
#include "cellrom/types.hpp"

namespace cellrom {

struct ThermalMaterial {
    double rho = 0.0;    // kg/m^3
    double cp = 0.0;     // J/(kg K)
    double lambda = 0.0; // W/(m K)
    double mu = 0.0;     // Pa s; 0 means not applicable (solids)
};

/// Geometry and discretization of the finite-volume truth model: a prismatic
/// cell sandwiched between two water-cooled plates. With half_symmetry the
/// mesh covers half the cell thickness, one plate, and one channel carrying
/// half the total flow, with an insulated midplane.
struct PlantConfig {
    double cell_length = 0.15;      // m, flow direction
    double cell_width = 0.10;       // m
    double cell_thickness = 0.01;   // m
    double plate_thickness = 0.003; // m
    double channel_gap = 0.002;     // m, parallel-plate channel height
    int n_axial = 20;
    int n_stack = 10;               // nodes through half the cell thickness
    ThermalMaterial battery{2500.0, 100.0, 3.0, 0.0};
    ThermalMaterial aluminum{2719.0, 871.0, 202.4, 0.0};
    ThermalMaterial water{998.2, 4128.0, 0.6, 1.003e-3};
    double nusselt = 8.23;          // fully developed laminar parallel plates
    double initial_temperature = 300.0; // K
    bool half_symmetry = true;
    bool adiabatic = false;         // severs cell<->plate conduction (lumped-test toggle)
    bool explicit_mode = false;     // forward Euler with stability check
    bool variable_viscosity = false; // mu(T) correlation in reynolds() only
};

void validate(const PlantConfig& config);
PlantConfig plant_config_from_json(const nlohmann::json& j);
nlohmann::json plant_config_to_json(const PlantConfig& config);
PlantConfig load_plant_config(const std::filesystem::path& path);
std::string plant_config_hash(const PlantConfig& config);

/// Film coefficient for the plate-coolant exchange: fully developed laminar
/// parallel-plate value h = Nu * lambda_w / D_h with D_h = 2 * gap. By design
/// it does not depend on the flow rate; the flow enters through advection.
double h_conv(const PlantConfig& config, double m_dot, double coolant_temperature);

/// Channel Reynolds number at the given total flow rate (split over the two
/// plates). Uses the constant Table viscosity, or a mu(T) correlation when
/// variable_viscosity is set.
double reynolds(const PlantConfig& config, double m_dot, double coolant_temperature);

/// Immutable mesh: node capacities, conduction/convection links between cell
/// layers, plate and coolant, and the coolant advection chains.
class PlantModel {
public:
    struct Link {
        int a = 0, b = 0;
        double g = 0.0; // W/K
    };

    explicit PlantModel(const PlantConfig& config);

    const PlantConfig& config() const { return config_; }
    int node_count() const { return static_cast<int>(capacity_.size()); }
    int axial_count() const { return config_.n_axial; }
    int stack_count() const { return stack_nodes_; }
    int side_count() const { return sides_; }

    int cell_index(int i, int k) const { return i * stack_nodes_ + k; }
    int plate_index(int side, int i) const;
    int coolant_index(int side, int i) const;

    const std::vector<double>& capacities() const { return capacity_; }
    const std::vector<double>& cell_volumes() const { return cell_volume_; }
    const std::vector<Link>& links() const { return links_; }
    const std::vector<std::vector<int>>& chains() const { return chains_; }

    double total_cell_volume() const { return total_cell_volume_; }
    double mcp_per_chain(double m_dot) const;

    double cell_average(const std::vector<double>& temps) const;
    double cell_max(const std::vector<double>& temps) const;
    double outlet_temperature(const std::vector<double>& temps) const;

    /// Largest stable forward-Euler step for the given flow rate.
    double explicit_stability_dt(double m_dot) const;

private:
    PlantConfig config_;
    int stack_nodes_ = 0; // nodes through the modeled cell thickness
    int sides_ = 1;
    std::vector<double> capacity_;
    std::vector<double> cell_volume_;
    std::vector<Link> links_;
    std::vector<std::vector<int>> chains_;
    double total_cell_volume_ = 0.0;
};

PlantModel build_plant(const PlantConfig& config);

struct PlantState {
    std::vector<double> temps; // K, indexed per PlantModel
};

PlantState make_uniform_state(const PlantModel& model, double temperature);

/// One time step; energy-conserving semi-implicit update by default
/// (implicit diffusion/convection/advection, zero-order-hold source and
/// inlet), or forward Euler when the config selects explicit mode.
PlantState step_plant(const PlantModel& model, const PlantState& state,
                      const SchedulePoint& p, double dt);

struct SimProfiles {
    Profile q_gen;  // W/m^3
    Profile m_dot;  // kg/s
    Profile t_in_c; // degC at the interface
};

SimulationResult simulate_plant(const PlantModel& model, const SimProfiles& profiles,
                                double t_end, double dt,
                                double initial_temperature = -1.0);

/// Stateful stepper that caches the implicit factorization between steps;
/// simulate_plant and the step-response extraction are built on it.
class PlantSimulator {
public:
    PlantSimulator(const PlantModel& model, double initial_temperature);
    ~PlantSimulator();
    PlantSimulator(const PlantSimulator&) = delete;
    PlantSimulator& operator=(const PlantSimulator&) = delete;

    void step(const SchedulePoint& p, double dt);

    double time() const { return time_; }
    double cell_average() const;
    double cell_max() const;
    double outlet_temperature() const;
    const std::vector<double>& temps() const { return temps_; }
    const EnergyAudit& audit() const { return audit_; }

private:
    const PlantModel& model_;
    std::vector<double> temps_;
    double time_ = 0.0;
    EnergyAudit audit_;
    struct Cache;
    Cache* cache_;
};

struct GridIndependenceRow {
    int n_axial = 0;
    int n_stack = 0;
    long nodes = 0;
    double final_t_avg = 0.0; // K
    double change_pct = 0.0;  // vs previous level, in percent of Kelvin value
};

struct GridIndependenceReport {
    std::vector<GridIndependenceRow> rows;
    bool converged = false; // successive change of the finest pair < 0.5 %
};

GridIndependenceReport grid_independence(const PlantConfig& base,
                                         const std::vector<std::pair<int, int>>& levels,
                                         const SchedulePoint& op, double t_end, double dt);

}  // namespace cellrom
