#include "cellrom/lpv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cellrom/io.hpp"

namespace cellrom {

namespace {

void check_axis(const std::vector<double>& axis, const char* name, bool positive) {
    if (axis.empty())
        throw std::invalid_argument(std::string("LpvGrid: empty axis ") + name);
    for (std::size_t i = 0; i < axis.size(); ++i) {
        if (!std::isfinite(axis[i]))
            throw std::invalid_argument(std::string("LpvGrid: non-finite axis value in ") + name);
        if (positive && !(axis[i] > 0.0))
            throw std::invalid_argument(std::string("LpvGrid: axis ") + name +
                                        " must be positive");
        if (i > 0 && !(axis[i] > axis[i - 1]))
            throw std::invalid_argument(std::string("LpvGrid: axis ") + name +
                                        " must be strictly increasing");
    }
}

// Complete a collapsed spectrum to the grid order. A collapse means the
// column's data wants fewer distinct lags; adding a lag in the widest
// spectral gap (well separated from its neighbors by construction) gives the
// mode-wise interpolation the channel it expects, and the per-vertex gain
// refit decides how much weight it carries.
std::vector<std::string> pad_taus(std::vector<double>& taus, int order) {
    std::vector<std::string> notes;
    while (static_cast<int>(taus.size()) < order) {
        std::size_t at;
        double tau;
        if (taus.size() >= 2) {
            at = 1;
            double worst = 0.0;
            for (std::size_t i = 0; i + 1 < taus.size(); ++i) {
                double ratio = taus[i] / taus[i + 1];
                if (ratio > worst) {
                    worst = ratio;
                    at = i + 1;
                }
            }
            tau = std::sqrt(taus[at - 1] * taus[at]);
        } else {
            at = 1;
            tau = taus[0] / 4.0;
        }
        taus.insert(taus.begin() + static_cast<std::ptrdiff_t>(at), tau);
        notes.push_back("order held at " + std::to_string(order) +
                        ": spectrum padded at tau=" + format_double(tau) + " s");
    }
    return notes;
}

}  // namespace

void validate(const LpvGrid& grid) {
    check_axis(grid.q_axis, "q", true); // inverse-metric interpolation needs q > 0
    check_axis(grid.m_axis, "m_dot", false);
    check_axis(grid.t_axis, "t_in", true);
    if (grid.order < 1)
        throw std::invalid_argument("LpvGrid: order must be at least 1");
    std::size_t expected = grid.q_axis.size() * grid.m_axis.size() * grid.t_axis.size();
    if (grid.vertices.size() != expected)
        throw std::invalid_argument("LpvGrid: vertex count does not match axes");
    if (!(grid.t0_temperature > 0.0))
        throw std::invalid_argument("LpvGrid: t0 temperature must be positive");
    for (const auto& v : grid.vertices) {
        validate(v);
        if (v.order != grid.order)
            throw std::invalid_argument("LpvGrid: vertex order differs from grid order");
    }
}

LpvGrid build_lpv_grid(const PlantConfig& config, const std::vector<double>& q_axis,
                       const std::vector<double>& m_axis,
                       const std::vector<double>& t_axis_c, const LpvBuildOptions& opts) {
    LpvGrid grid;
    grid.q_axis = q_axis;
    grid.m_axis = m_axis;
    grid.t_axis.reserve(t_axis_c.size());
    for (double c : t_axis_c)
        grid.t_axis.push_back(celsius_to_kelvin(c));
    grid.order = opts.order;
    grid.plant_hash = plant_config_hash(config);
    grid.extraction_t_end = opts.t_end;
    grid.extraction_dt = opts.dt;

    check_axis(grid.q_axis, "q", true);
    check_axis(grid.m_axis, "m_dot", false);
    check_axis(grid.t_axis, "t_in", true);

    PlantModel model(config);
    grid.t0_temperature = config.initial_temperature;
    const std::size_t nq = grid.q_axis.size();
    const std::size_t nm = grid.m_axis.size();
    const std::size_t nt = grid.t_axis.size();
    grid.vertices.resize(nq * nm * nt);

    // One lag spectrum per (flow, inlet) column: along the heat axis the
    // plant responses form a two-dimensional affine family, so a shared
    // spectrum loses nothing in fit quality while making the vertex gains
    // exactly affine in the inverse heat coordinate. That alignment is what
    // keeps scheduled runs consistent when the heat input switches vertices.
    for (std::size_t im = 0; im < nm; ++im)
        for (std::size_t it = 0; it < nt; ++it) {
            std::vector<StepResponse> column;
            column.reserve(nq);
            for (std::size_t iq = 0; iq < nq; ++iq) {
                SchedulePoint op{grid.q_axis[iq], grid.m_axis[im], grid.t_axis[it]};
                column.push_back(extract_step_response(model, op, opts.t_end, opts.dt));
            }

            std::vector<double> taus;
            std::vector<std::string> notes;
            bool ok = false;
            std::string last_problem;
            for (int attempt = 0; attempt <= opts.retries && !ok; ++attempt) {
                FitOptions fo = opts.fit;
                fo.seed = opts.fit.seed + 1000u * static_cast<unsigned>(attempt);
                try {
                    taus = fit_shared_taus(column, opts.order, fo);
                    ok = true;
                } catch (const FitError& e) {
                    last_problem = e.what();
                }
            }
            if (!ok)
                throw std::runtime_error(
                    "build_lpv_grid: column m_dot=" + format_double(grid.m_axis[im]) +
                    " kg/s, t_in=" + format_double(kelvin_to_celsius(grid.t_axis[it])) +
                    " degC failed: " + last_problem);
            if (static_cast<int>(taus.size()) < opts.order)
                notes = pad_taus(taus, opts.order);

            for (std::size_t iq = 0; iq < nq; ++iq) {
                FosterLtiModel vertex = refit_gains(column[iq], taus);
                vertex.notes = notes;
                grid.vertices[grid.index(iq, im, it)] = std::move(vertex);
            }
        }
    validate(grid);
    return grid;
}

namespace {

struct AxisPoint {
    std::size_t i0 = 0;
    double w = 0.0; // weight of node i0+1; 0 or 1 means a single corner
    bool clamped = false;
};

enum class Metric { Linear, Inverse };

AxisPoint locate(const std::vector<double>& axis, double v, Metric metric) {
    AxisPoint p;
    if (axis.size() == 1) {
        p.clamped = v != axis.front();
        return p;
    }
    if (v <= axis.front()) {
        p.i0 = 0;
        p.w = 0.0;
        p.clamped = v < axis.front();
        return p;
    }
    if (v >= axis.back()) {
        p.i0 = axis.size() - 2;
        p.w = 1.0;
        p.clamped = v > axis.back();
        return p;
    }
    std::size_t hi = std::upper_bound(axis.begin(), axis.end(), v) - axis.begin();
    p.i0 = hi - 1;
    double a = axis[p.i0], b = axis[p.i0 + 1];
    if (metric == Metric::Inverse)
        p.w = (1.0 / a - 1.0 / v) / (1.0 / a - 1.0 / b);
    else
        p.w = (v - a) / (b - a);
    return p;
}

}  // namespace

InterpolatedParams interpolate_model(const LpvGrid& grid, const SchedulePoint& p,
                                     long* clamped) {
    AxisPoint aq = locate(grid.q_axis, p.q_gen, Metric::Inverse);
    AxisPoint am = locate(grid.m_axis, p.m_dot, Metric::Linear);
    AxisPoint at = locate(grid.t_axis, p.t_in, Metric::Linear);
    if (clamped && (aq.clamped || am.clamped || at.clamped))
        ++(*clamped);

    struct Node {
        std::size_t i;
        double w;
    };
    auto corners = [](const AxisPoint& a) {
        std::vector<Node> n;
        if (a.w <= 0.0)
            n.push_back({a.i0, 1.0});
        else if (a.w >= 1.0)
            n.push_back({a.i0 + 1, 1.0});
        else {
            n.push_back({a.i0, 1.0 - a.w});
            n.push_back({a.i0 + 1, a.w});
        }
        return n;
    };
    std::vector<Node> cq = corners(aq), cm = corners(am), ct = corners(at);

    // Exact vertex hit: return the stored parameters untouched, so a run
    // scheduled at a vertex is bit-identical to the vertex LTI model.
    if (cq.size() == 1 && cm.size() == 1 && ct.size() == 1) {
        const FosterLtiModel& v = grid.at(cq[0].i, cm[0].i, ct[0].i);
        return {v.gains, v.taus};
    }

    const int order = grid.order;
    std::vector<double> gains(order, 0.0), log_taus(order, 0.0);
    for (const Node& nq : cq)
        for (const Node& nm : cm)
            for (const Node& nt : ct) {
                double w = nq.w * nm.w * nt.w;
                const FosterLtiModel& v = grid.at(nq.i, nm.i, nt.i);
                for (int k = 0; k < order; ++k) {
                    gains[k] += w * v.gains[k];
                    log_taus[k] += w * std::log(v.taus[k]);
                }
            }
    InterpolatedParams out;
    out.gains = std::move(gains);
    out.taus.resize(order);
    for (int k = 0; k < order; ++k)
        out.taus[k] = std::exp(log_taus[k]);
    return out;
}

LpvState make_lpv_state(const LpvGrid& grid) {
    LpvState s;
    s.x.assign(static_cast<std::size_t>(grid.order), 0.0);
    return s;
}

double step_lpv(const LpvGrid& grid, LpvState& state, const SchedulePoint& p, double dt,
                long* clamped) {
    if (!(dt > 0.0))
        throw std::invalid_argument("step_lpv: dt must be positive");
    if (state.x.size() != static_cast<std::size_t>(grid.order))
        throw std::invalid_argument("step_lpv: state size does not match grid order");
    InterpolatedParams ip = interpolate_model(grid, p, clamped);
    foster_zoh_step(ip.gains, ip.taus, p.q_gen, dt, state.x);
    state.last_params = std::move(ip);
    double acc = 0.0;
    for (double v : state.x)
        acc += v;
    return grid.t0_temperature + acc;
}

SimulationResult simulate_lpv(const LpvGrid& grid, const SimProfiles& profiles, double t_end,
                              double dt) {
    validate(grid);
    if (!(dt > 0.0) || !(t_end > 0.0))
        throw std::invalid_argument("simulate_lpv: dt and t_end must be positive");
    if (profiles.q_gen.empty() || profiles.m_dot.empty() || profiles.t_in_c.empty())
        throw std::invalid_argument("simulate_lpv: profiles must be populated");

    long n_steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
    SimulationResult r;
    r.t.reserve(n_steps + 1);
    r.t_avg.reserve(n_steps + 1);
    r.t.push_back(0.0);
    r.t_avg.push_back(grid.t0_temperature);

    LpvState state = make_lpv_state(grid);
    long clamps = 0;
    for (long n = 0; n < n_steps; ++n) {
        double t_n = static_cast<double>(n) * dt;
        SchedulePoint p{profiles.q_gen(t_n), profiles.m_dot(t_n),
                        celsius_to_kelvin(profiles.t_in_c(t_n))};
        double t_avg = step_lpv(grid, state, p, dt, &clamps);
        r.t.push_back(static_cast<double>(n + 1) * dt);
        r.t_avg.push_back(t_avg);
    }
    r.hull_clamps = clamps;
    return r;
}

nlohmann::json lpv_grid_to_json(const LpvGrid& grid) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["q_axis_w_per_m3"] = grid.q_axis;
    j["m_axis_kg_per_s"] = grid.m_axis;
    nlohmann::json t_axis_c = nlohmann::json::array();
    for (double k : grid.t_axis)
        t_axis_c.push_back(kelvin_to_celsius(k));
    j["t_axis_c"] = t_axis_c;
    j["order"] = grid.order;
    j["t0_temperature_k"] = grid.t0_temperature;
    j["plant_config_hash"] = grid.plant_hash;
    j["extraction"]["t_end_s"] = grid.extraction_t_end;
    j["extraction"]["dt_s"] = grid.extraction_dt;
    nlohmann::json vertices = nlohmann::json::array();
    for (const auto& v : grid.vertices)
        vertices.push_back(lti_model_to_json(v));
    j["vertices"] = vertices;
    return j;
}

LpvGrid lpv_grid_from_json(const nlohmann::json& j) {
    int version = j.at("format_version").get<int>();
    if (version != 1)
        throw std::runtime_error("LpvGrid: unsupported format_version " +
                                 std::to_string(version));
    LpvGrid grid;
    grid.q_axis = j.at("q_axis_w_per_m3").get<std::vector<double>>();
    grid.m_axis = j.at("m_axis_kg_per_s").get<std::vector<double>>();
    for (double c : j.at("t_axis_c").get<std::vector<double>>())
        grid.t_axis.push_back(celsius_to_kelvin(c));
    grid.order = j.at("order").get<int>();
    grid.t0_temperature = j.at("t0_temperature_k").get<double>();
    grid.plant_hash = j.value("plant_config_hash", std::string());
    if (j.contains("extraction")) {
        grid.extraction_t_end = j.at("extraction").value("t_end_s", 0.0);
        grid.extraction_dt = j.at("extraction").value("dt_s", 0.0);
    }
    for (const auto& v : j.at("vertices"))
        grid.vertices.push_back(lti_model_from_json(v));
    validate(grid);
    return grid;
}

void save_lpv_grid(const std::filesystem::path& path, const LpvGrid& grid) {
    save_json(path, lpv_grid_to_json(grid));
}

LpvGrid load_lpv_grid(const std::filesystem::path& path) {
    return lpv_grid_from_json(load_json(path));
}

}  // namespace cellrom
