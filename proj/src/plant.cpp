#include "cellrom/plant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <nlohmann/json.hpp>

#include "cellrom/io.hpp"

namespace cellrom {

namespace {

void check_material(const ThermalMaterial& m, const char* what, bool needs_mu) {
    if (m.rho <= 0.0 || m.cp <= 0.0 || m.lambda <= 0.0)
        throw std::invalid_argument(std::string(what) + ": rho, cp, lambda must be positive");
    if (needs_mu && m.mu <= 0.0)
        throw std::invalid_argument(std::string(what) + ": viscosity must be positive");
}

ThermalMaterial material_from_json(const nlohmann::json& j) {
    ThermalMaterial m;
    m.rho = j.at("rho").get<double>();
    m.cp = j.at("cp").get<double>();
    m.lambda = j.at("lambda").get<double>();
    m.mu = j.value("mu", 0.0);
    return m;
}

nlohmann::json material_to_json(const ThermalMaterial& m) {
    nlohmann::json j;
    j["rho"] = m.rho;
    j["cp"] = m.cp;
    j["lambda"] = m.lambda;
    if (m.mu > 0.0)
        j["mu"] = m.mu;
    return j;
}

}  // namespace

void validate(const PlantConfig& c) {
    if (c.cell_length <= 0.0 || c.cell_width <= 0.0 || c.cell_thickness <= 0.0 ||
        c.plate_thickness <= 0.0 || c.channel_gap <= 0.0)
        throw std::invalid_argument("PlantConfig: all dimensions must be positive");
    if (c.n_axial < 2)
        throw std::invalid_argument("PlantConfig: n_axial must be at least 2");
    if (c.n_stack < 1)
        throw std::invalid_argument("PlantConfig: n_stack must be at least 1");
    check_material(c.battery, "battery", false);
    check_material(c.aluminum, "aluminum", false);
    check_material(c.water, "water", true);
    if (c.nusselt < 0.0)
        throw std::invalid_argument("PlantConfig: nusselt must be nonnegative");
    if (c.initial_temperature <= 0.0)
        throw std::invalid_argument("PlantConfig: initial temperature must be positive");
}

PlantConfig plant_config_from_json(const nlohmann::json& j) {
    PlantConfig c;
    c.cell_length = j.value("cell_length_m", c.cell_length);
    c.cell_width = j.value("cell_width_m", c.cell_width);
    c.cell_thickness = j.value("cell_thickness_m", c.cell_thickness);
    c.plate_thickness = j.value("plate_thickness_m", c.plate_thickness);
    c.channel_gap = j.value("channel_gap_m", c.channel_gap);
    c.n_axial = j.value("n_axial", c.n_axial);
    c.n_stack = j.value("n_stack", c.n_stack);
    if (j.contains("materials")) {
        const auto& m = j.at("materials");
        if (m.contains("battery"))
            c.battery = material_from_json(m.at("battery"));
        if (m.contains("aluminum"))
            c.aluminum = material_from_json(m.at("aluminum"));
        if (m.contains("water"))
            c.water = material_from_json(m.at("water"));
    }
    c.nusselt = j.value("nusselt", c.nusselt);
    c.initial_temperature = j.value("initial_temperature_k", c.initial_temperature);
    c.half_symmetry = j.value("half_symmetry", c.half_symmetry);
    c.adiabatic = j.value("adiabatic", c.adiabatic);
    c.explicit_mode = j.value("explicit_mode", c.explicit_mode);
    c.variable_viscosity = j.value("variable_viscosity", c.variable_viscosity);
    validate(c);
    return c;
}

nlohmann::json plant_config_to_json(const PlantConfig& c) {
    nlohmann::json j;
    j["cell_length_m"] = c.cell_length;
    j["cell_width_m"] = c.cell_width;
    j["cell_thickness_m"] = c.cell_thickness;
    j["plate_thickness_m"] = c.plate_thickness;
    j["channel_gap_m"] = c.channel_gap;
    j["n_axial"] = c.n_axial;
    j["n_stack"] = c.n_stack;
    j["materials"]["battery"] = material_to_json(c.battery);
    j["materials"]["aluminum"] = material_to_json(c.aluminum);
    j["materials"]["water"] = material_to_json(c.water);
    j["nusselt"] = c.nusselt;
    j["initial_temperature_k"] = c.initial_temperature;
    j["half_symmetry"] = c.half_symmetry;
    j["adiabatic"] = c.adiabatic;
    j["explicit_mode"] = c.explicit_mode;
    j["variable_viscosity"] = c.variable_viscosity;
    return j;
}

PlantConfig load_plant_config(const std::filesystem::path& path) {
    return plant_config_from_json(load_json(path));
}

std::string plant_config_hash(const PlantConfig& config) {
    return hash_hex(fnv1a64(plant_config_to_json(config).dump()));
}

double h_conv(const PlantConfig& config, double m_dot, double /*coolant_temperature*/) {
    if (m_dot < 0.0)
        throw std::invalid_argument("h_conv: flow rate must be nonnegative");
    double d_h = 2.0 * config.channel_gap;
    return config.nusselt * config.water.lambda / d_h;
}

double reynolds(const PlantConfig& config, double m_dot, double coolant_temperature) {
    if (m_dot < 0.0)
        throw std::invalid_argument("reynolds: flow rate must be nonnegative");
    double mu = config.water.mu;
    if (config.variable_viscosity) {
        // Vogel-type water viscosity correlation, Pa s; used for Reynolds
        // reporting only, the energy equations keep constant properties.
        mu = 2.414e-5 * std::pow(10.0, 247.8 / (coolant_temperature - 140.0));
    }
    double d_h = 2.0 * config.channel_gap;
    double a_c = config.cell_width * config.channel_gap;
    double m_per_channel = 0.5 * m_dot;
    return m_per_channel * d_h / (a_c * mu);
}

PlantModel::PlantModel(const PlantConfig& config) : config_(config) {
    validate(config_);
    const int na = config_.n_axial;
    stack_nodes_ = config_.half_symmetry ? config_.n_stack : 2 * config_.n_stack;
    sides_ = config_.half_symmetry ? 1 : 2;

    const double dx = config_.cell_length / na;
    const double w = config_.cell_width;
    const double modeled_thickness =
        config_.half_symmetry ? 0.5 * config_.cell_thickness : config_.cell_thickness;
    const double dz = modeled_thickness / stack_nodes_;
    const double a_z = dx * w; // face area between stacked layers

    const int n_cell = na * stack_nodes_;
    const int n_total = n_cell + sides_ * na * 2;
    capacity_.assign(n_total, 0.0);
    cell_volume_.assign(n_total, 0.0);

    for (int i = 0; i < na; ++i)
        for (int k = 0; k < stack_nodes_; ++k) {
            int n = cell_index(i, k);
            double v = dx * w * dz;
            cell_volume_[n] = v;
            capacity_[n] = config_.battery.rho * config_.battery.cp * v;
            total_cell_volume_ += v;
        }
    for (int s = 0; s < sides_; ++s)
        for (int i = 0; i < na; ++i) {
            capacity_[plate_index(s, i)] =
                config_.aluminum.rho * config_.aluminum.cp * dx * w * config_.plate_thickness;
            capacity_[coolant_index(s, i)] =
                config_.water.rho * config_.water.cp * dx * w * config_.channel_gap;
        }

    const double g_stack = config_.battery.lambda * a_z / dz;
    const double g_cell_axial = config_.battery.lambda * (w * dz) / dx;
    const double g_plate_axial = config_.aluminum.lambda * (w * config_.plate_thickness) / dx;
    const double r_half_cell = dz / (2.0 * config_.battery.lambda);
    const double r_half_plate = config_.plate_thickness / (2.0 * config_.aluminum.lambda);
    const double g_cell_plate = a_z / (r_half_cell + r_half_plate);
    const double h = h_conv(config_, 0.0, config_.initial_temperature);
    const double g_plate_coolant = h > 0.0 ? a_z / (r_half_plate + 1.0 / h) : 0.0;

    for (int i = 0; i < na; ++i) {
        for (int k = 0; k + 1 < stack_nodes_; ++k)
            links_.push_back({cell_index(i, k), cell_index(i, k + 1), g_stack});
        if (i + 1 < na) {
            for (int k = 0; k < stack_nodes_; ++k)
                links_.push_back({cell_index(i, k), cell_index(i + 1, k), g_cell_axial});
            for (int s = 0; s < sides_; ++s)
                links_.push_back({plate_index(s, i), plate_index(s, i + 1), g_plate_axial});
        }
        for (int s = 0; s < sides_; ++s) {
            int cell_face = s == 0 ? cell_index(i, stack_nodes_ - 1) : cell_index(i, 0);
            if (!config_.adiabatic)
                links_.push_back({cell_face, plate_index(s, i), g_cell_plate});
            if (g_plate_coolant > 0.0)
                links_.push_back({plate_index(s, i), coolant_index(s, i), g_plate_coolant});
        }
    }

    chains_.resize(sides_);
    for (int s = 0; s < sides_; ++s) {
        chains_[s].reserve(na);
        for (int i = 0; i < na; ++i)
            chains_[s].push_back(coolant_index(s, i));
    }
}

int PlantModel::plate_index(int side, int i) const {
    return config_.n_axial * stack_nodes_ + side * config_.n_axial + i;
}

int PlantModel::coolant_index(int side, int i) const {
    return config_.n_axial * stack_nodes_ + (sides_ + side) * config_.n_axial + i;
}

double PlantModel::mcp_per_chain(double m_dot) const {
    return 0.5 * m_dot * config_.water.cp;
}

double PlantModel::cell_average(const std::vector<double>& temps) const {
    double acc = 0.0, vol = 0.0;
    const int n_cell = config_.n_axial * stack_nodes_;
    for (int n = 0; n < n_cell; ++n) {
        acc += temps[n] * cell_volume_[n];
        vol += cell_volume_[n];
    }
    return acc / vol;
}

double PlantModel::cell_max(const std::vector<double>& temps) const {
    const int n_cell = config_.n_axial * stack_nodes_;
    return *std::max_element(temps.begin(), temps.begin() + n_cell);
}

double PlantModel::outlet_temperature(const std::vector<double>& temps) const {
    double acc = 0.0;
    for (const auto& chain : chains_)
        acc += temps[chain.back()];
    return acc / static_cast<double>(chains_.size());
}

double PlantModel::explicit_stability_dt(double m_dot) const {
    std::vector<double> degree(capacity_.size(), 0.0);
    for (const auto& l : links_) {
        degree[l.a] += l.g;
        degree[l.b] += l.g;
    }
    double mcp = mcp_per_chain(m_dot);
    for (const auto& chain : chains_)
        for (int n : chain)
            degree[n] += mcp;
    double dt = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < capacity_.size(); ++n)
        if (degree[n] > 0.0)
            dt = std::min(dt, capacity_[n] / degree[n]);
    return dt;
}

PlantModel build_plant(const PlantConfig& config) {
    return PlantModel(config);
}

PlantState make_uniform_state(const PlantModel& model, double temperature) {
    if (temperature <= 0.0)
        throw std::invalid_argument("make_uniform_state: temperature must be positive");
    PlantState s;
    s.temps.assign(static_cast<std::size_t>(model.node_count()), temperature);
    return s;
}

namespace {

struct StepAudit {
    double generated = 0.0;
    double advected = 0.0;
    double stored = 0.0;
};

void fill_implicit_matrix(const PlantModel& model, double dt, double m_dot,
                          Eigen::SparseMatrix<double>& a) {
    const int n = model.node_count();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n) + model.links().size() * 4);
    for (int i = 0; i < n; ++i)
        trips.emplace_back(i, i, model.capacities()[i] / dt);
    for (const auto& l : model.links()) {
        trips.emplace_back(l.a, l.a, l.g);
        trips.emplace_back(l.b, l.b, l.g);
        trips.emplace_back(l.a, l.b, -l.g);
        trips.emplace_back(l.b, l.a, -l.g);
    }
    const double mcp = model.mcp_per_chain(m_dot);
    for (const auto& chain : model.chains())
        for (std::size_t j = 0; j < chain.size(); ++j) {
            trips.emplace_back(chain[j], chain[j], mcp);
            if (j > 0)
                trips.emplace_back(chain[j], chain[j - 1], -mcp);
        }
    a.resize(n, n);
    a.setFromTriplets(trips.begin(), trips.end());
}

Eigen::VectorXd implicit_rhs(const PlantModel& model, const std::vector<double>& temps,
                             const SchedulePoint& p, double dt) {
    const int n = model.node_count();
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i)
        b[i] = model.capacities()[i] / dt * temps[i] + p.q_gen * model.cell_volumes()[i];
    const double mcp = model.mcp_per_chain(p.m_dot);
    for (const auto& chain : model.chains())
        b[chain.front()] += mcp * p.t_in;
    return b;
}

void audit_step(const PlantModel& model, const std::vector<double>& old_temps,
                const std::vector<double>& new_temps, const SchedulePoint& p, double dt,
                bool implicit, StepAudit& out) {
    out.generated = p.q_gen * model.total_cell_volume() * dt;
    const double mcp = model.mcp_per_chain(p.m_dot);
    out.advected = 0.0;
    // The advected enthalpy must use the same outlet temperature the update
    // used: end-of-step for the implicit scheme, start-of-step for explicit.
    const std::vector<double>& flux_temps = implicit ? new_temps : old_temps;
    for (const auto& chain : model.chains())
        out.advected += mcp * (flux_temps[chain.back()] - p.t_in) * dt;
    out.stored = 0.0;
    for (int i = 0; i < model.node_count(); ++i)
        out.stored += model.capacities()[i] * (new_temps[i] - old_temps[i]);
}

void explicit_step(const PlantModel& model, const std::vector<double>& temps,
                   const SchedulePoint& p, double dt, std::vector<double>& out) {
    double dt_max = model.explicit_stability_dt(p.m_dot);
    if (dt > dt_max)
        throw std::runtime_error(
            "step_plant: explicit step unstable at dt=" + format_double(dt) +
            " s; use dt <= " + format_double(0.9 * dt_max) + " s");
    const int n = model.node_count();
    std::vector<double> flux(static_cast<std::size_t>(n), 0.0);
    for (const auto& l : model.links()) {
        double f = l.g * (temps[l.b] - temps[l.a]);
        flux[l.a] += f;
        flux[l.b] -= f;
    }
    const double mcp = model.mcp_per_chain(p.m_dot);
    for (const auto& chain : model.chains())
        for (std::size_t j = 0; j < chain.size(); ++j) {
            double upstream = j == 0 ? p.t_in : temps[chain[j - 1]];
            flux[chain[j]] += mcp * (upstream - temps[chain[j]]);
        }
    out.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out[i] = temps[i] + dt / model.capacities()[i] *
                                (flux[i] + p.q_gen * model.cell_volumes()[i]);
}

void check_schedule_point(const SchedulePoint& p) {
    if (!std::isfinite(p.q_gen) || !std::isfinite(p.m_dot) || !std::isfinite(p.t_in))
        throw std::invalid_argument("step_plant: non-finite schedule point");
    if (p.m_dot < 0.0)
        throw std::invalid_argument("step_plant: flow rate must be nonnegative");
    if (p.t_in <= 0.0)
        throw std::invalid_argument("step_plant: inlet temperature must be positive");
}

}  // namespace

PlantState step_plant(const PlantModel& model, const PlantState& state,
                      const SchedulePoint& p, double dt) {
    if (!(dt > 0.0))
        throw std::invalid_argument("step_plant: dt must be positive");
    check_schedule_point(p);
    if (state.temps.size() != static_cast<std::size_t>(model.node_count()))
        throw std::invalid_argument("step_plant: state size does not match model");

    PlantState next;
    if (model.config().explicit_mode) {
        explicit_step(model, state.temps, p, dt, next.temps);
        return next;
    }
    Eigen::SparseMatrix<double> a;
    fill_implicit_matrix(model, dt, p.m_dot, a);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(a);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("step_plant: factorization failed");
    Eigen::VectorXd x = solver.solve(implicit_rhs(model, state.temps, p, dt));
    next.temps.assign(x.data(), x.data() + x.size());
    return next;
}

struct PlantSimulator::Cache {
    Eigen::SparseMatrix<double> a;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    double dt = -1.0;
    double m_dot = -1.0;
    bool valid = false;
};

PlantSimulator::PlantSimulator(const PlantModel& model, double initial_temperature)
    : model_(model), cache_(new Cache) {
    temps_ = make_uniform_state(model, initial_temperature).temps;
    audit_.available = true;
}

PlantSimulator::~PlantSimulator() {
    delete cache_;
}

void PlantSimulator::step(const SchedulePoint& p, double dt) {
    if (!(dt > 0.0))
        throw std::invalid_argument("PlantSimulator: dt must be positive");
    check_schedule_point(p);

    std::vector<double> next;
    if (model_.config().explicit_mode) {
        explicit_step(model_, temps_, p, dt, next);
    } else {
        if (!cache_->valid || cache_->dt != dt || cache_->m_dot != p.m_dot) {
            fill_implicit_matrix(model_, dt, p.m_dot, cache_->a);
            cache_->solver.compute(cache_->a);
            if (cache_->solver.info() != Eigen::Success)
                throw std::runtime_error("PlantSimulator: factorization failed");
            cache_->dt = dt;
            cache_->m_dot = p.m_dot;
            cache_->valid = true;
        }
        Eigen::VectorXd x = cache_->solver.solve(implicit_rhs(model_, temps_, p, dt));
        next.assign(x.data(), x.data() + x.size());
    }

    StepAudit step_audit;
    audit_step(model_, temps_, next, p, dt, !model_.config().explicit_mode, step_audit);
    audit_.generated += step_audit.generated;
    audit_.advected += step_audit.advected;
    audit_.stored += step_audit.stored;
    double residual = step_audit.stored - (step_audit.generated - step_audit.advected);
    double scale = std::max({std::abs(step_audit.generated), std::abs(step_audit.advected),
                             std::abs(step_audit.stored), 1e-9});
    audit_.max_step_residual_rel =
        std::max(audit_.max_step_residual_rel, std::abs(residual) / scale);

    temps_ = std::move(next);
    time_ += dt;
}

double PlantSimulator::cell_average() const {
    return model_.cell_average(temps_);
}

double PlantSimulator::cell_max() const {
    return model_.cell_max(temps_);
}

double PlantSimulator::outlet_temperature() const {
    return model_.outlet_temperature(temps_);
}

SimulationResult simulate_plant(const PlantModel& model, const SimProfiles& profiles,
                                double t_end, double dt, double initial_temperature) {
    if (!(dt > 0.0) || !(t_end > 0.0))
        throw std::invalid_argument("simulate_plant: dt and t_end must be positive");
    if (profiles.q_gen.empty() || profiles.m_dot.empty() || profiles.t_in_c.empty())
        throw std::invalid_argument("simulate_plant: profiles must be populated");

    double t0 = initial_temperature > 0.0 ? initial_temperature
                                          : model.config().initial_temperature;
    PlantSimulator sim(model, t0);
    long n_steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));

    SimulationResult r;
    r.t.reserve(n_steps + 1);
    r.t_avg.reserve(n_steps + 1);
    r.t_max.reserve(n_steps + 1);
    r.t_out.reserve(n_steps + 1);
    r.t.push_back(0.0);
    r.t_avg.push_back(sim.cell_average());
    r.t_max.push_back(sim.cell_max());
    r.t_out.push_back(sim.outlet_temperature());

    for (long n = 0; n < n_steps; ++n) {
        double t_n = static_cast<double>(n) * dt;
        SchedulePoint p{profiles.q_gen(t_n), profiles.m_dot(t_n),
                        celsius_to_kelvin(profiles.t_in_c(t_n))};
        sim.step(p, dt);
        r.t.push_back(sim.time());
        r.t_avg.push_back(sim.cell_average());
        r.t_max.push_back(sim.cell_max());
        r.t_out.push_back(sim.outlet_temperature());
    }
    r.audit = sim.audit();
    return r;
}

GridIndependenceReport grid_independence(const PlantConfig& base,
                                         const std::vector<std::pair<int, int>>& levels,
                                         const SchedulePoint& op, double t_end, double dt) {
    if (levels.size() < 2)
        throw std::invalid_argument("grid_independence: need at least 2 levels");
    GridIndependenceReport report;
    SimProfiles profiles{Profile::constant(op.q_gen), Profile::constant(op.m_dot),
                         Profile::constant(kelvin_to_celsius(op.t_in))};
    for (const auto& [na, ns] : levels) {
        PlantConfig c = base;
        c.n_axial = na;
        c.n_stack = ns;
        PlantModel model(c);
        SimulationResult r = simulate_plant(model, profiles, t_end, dt);
        GridIndependenceRow row;
        row.n_axial = na;
        row.n_stack = ns;
        row.nodes = model.node_count();
        row.final_t_avg = r.t_avg.back();
        if (!report.rows.empty()) {
            double prev = report.rows.back().final_t_avg;
            row.change_pct = std::abs(row.final_t_avg - prev) / std::abs(prev) * 100.0;
        }
        report.rows.push_back(row);
    }
    report.converged = report.rows.back().change_pct < 0.5;
    return report;
}

}  // namespace cellrom
