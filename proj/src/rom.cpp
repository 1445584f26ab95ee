#include "cellrom/rom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cellrom/io.hpp"

namespace cellrom {

StepResponse extract_step_response(const PlantModel& model, const SchedulePoint& op,
                                   double t_end, double dt) {
    if (op.q_gen == 0.0)
        throw std::invalid_argument("extract_step_response: step magnitude must be nonzero");
    SimProfiles profiles{Profile::constant(op.q_gen), Profile::constant(op.m_dot),
                         Profile::constant(kelvin_to_celsius(op.t_in))};
    SimulationResult r = simulate_plant(model, profiles, t_end, dt);

    StepResponse resp;
    resp.op = op;
    // anchor to the discretized initial average so the response starts at an
    // exact zero, not a volume-weighting rounding residue
    resp.t0_temperature = r.t_avg.front();
    resp.t = r.t;
    resp.delta_t.reserve(r.t_avg.size());
    resp.normalized.reserve(r.t_avg.size());
    for (double v : r.t_avg) {
        resp.delta_t.push_back(v - resp.t0_temperature);
        resp.normalized.push_back((v - resp.t0_temperature) / op.q_gen);
    }
    std::size_t n = r.t_avg.size();
    resp.settle_slope = std::abs(r.t_avg[n - 1] - r.t_avg[n - 2]) / (r.t[n - 1] - r.t[n - 2]);
    resp.settled = resp.settle_slope < 1e-4;
    return resp;
}

void write_step_response_csv(const std::filesystem::path& path, const StepResponse& resp) {
    std::string meta = "# q_gen_w_per_m3=" + format_double(resp.op.q_gen) +
                       " m_dot_kg_per_s=" + format_double(resp.op.m_dot) +
                       " t_in_c=" + format_double(kelvin_to_celsius(resp.op.t_in)) +
                       " t0_k=" + format_double(resp.t0_temperature) +
                       " settled=" + (resp.settled ? std::string("1") : std::string("0")) +
                       " settle_slope_k_per_s=" + format_double(resp.settle_slope);
    write_csv(path, {"t_s", "delta_T_K", "normalized_K_m3_per_W"},
              {&resp.t, &resp.delta_t, &resp.normalized}, {meta});
}

namespace {

double meta_value(const std::string& comment, const std::string& key) {
    auto pos = comment.find(key + "=");
    if (pos == std::string::npos)
        throw std::runtime_error("step response file: missing metadata key " + key);
    return std::stod(comment.substr(pos + key.size() + 1));
}

}  // namespace

StepResponse read_step_response_csv(const std::filesystem::path& path) {
    CsvTable csv = read_csv(path);
    if (csv.comments.empty())
        throw std::runtime_error("step response file: missing operating-point comment");
    const std::string& meta = csv.comments.front();

    StepResponse resp;
    resp.op.q_gen = meta_value(meta, "q_gen_w_per_m3");
    resp.op.m_dot = meta_value(meta, "m_dot_kg_per_s");
    resp.op.t_in = celsius_to_kelvin(meta_value(meta, "t_in_c"));
    resp.t0_temperature = meta_value(meta, "t0_k");
    resp.settled = meta_value(meta, "settled") != 0.0;
    resp.settle_slope = meta_value(meta, "settle_slope_k_per_s");
    resp.t = csv.column("t_s");
    resp.delta_t = csv.column("delta_T_K");
    resp.normalized = csv.column("normalized_K_m3_per_W");
    if (resp.t.empty() || resp.op.q_gen == 0.0)
        throw std::runtime_error("step response file: empty or degenerate");
    return resp;
}

void validate(const FosterLtiModel& model) {
    if (model.order < 1)
        throw std::invalid_argument("FosterLtiModel: order must be at least 1");
    if (static_cast<int>(model.gains.size()) != model.order ||
        static_cast<int>(model.taus.size()) != model.order)
        throw std::invalid_argument("FosterLtiModel: gains/taus size must equal order");
    for (int i = 0; i < model.order; ++i) {
        if (!(model.taus[i] > 0.0) || !std::isfinite(model.taus[i]) ||
            !std::isfinite(model.gains[i]))
            throw std::invalid_argument("FosterLtiModel: parameters must be finite, taus positive");
        if (i > 0 && !(model.taus[i] < model.taus[i - 1]))
            throw std::invalid_argument("FosterLtiModel: taus must be strictly decreasing");
    }
}

nlohmann::json lti_model_to_json(const FosterLtiModel& model) {
    nlohmann::json j;
    j["order"] = model.order;
    j["gains"] = model.gains;
    j["taus"] = model.taus;
    j["op"]["q_gen_w_per_m3"] = model.op.q_gen;
    j["op"]["m_dot_kg_per_s"] = model.op.m_dot;
    j["op"]["t_in_c"] = kelvin_to_celsius(model.op.t_in);
    j["t0_temperature_k"] = model.t0_temperature;
    j["fit_rms"] = model.fit_rms;
    if (!model.notes.empty())
        j["notes"] = model.notes;
    return j;
}

FosterLtiModel lti_model_from_json(const nlohmann::json& j) {
    FosterLtiModel m;
    m.order = j.at("order").get<int>();
    m.gains = j.at("gains").get<std::vector<double>>();
    m.taus = j.at("taus").get<std::vector<double>>();
    m.op.q_gen = j.at("op").at("q_gen_w_per_m3").get<double>();
    m.op.m_dot = j.at("op").at("m_dot_kg_per_s").get<double>();
    m.op.t_in = celsius_to_kelvin(j.at("op").at("t_in_c").get<double>());
    m.t0_temperature = j.at("t0_temperature_k").get<double>();
    m.fit_rms = j.at("fit_rms").get<double>();
    if (j.contains("notes"))
        m.notes = j.at("notes").get<std::vector<std::string>>();
    validate(m);
    return m;
}

void save_lti_model(const std::filesystem::path& path, const FosterLtiModel& model) {
    save_json(path, lti_model_to_json(model));
}

FosterLtiModel load_lti_model(const std::filesystem::path& path) {
    return lti_model_from_json(load_json(path));
}

namespace {

// Sample sets carry one column per response; the time base is shared, the
// gains are separate per column. Single-response fits are the one-column
// case of the same machinery.
struct SampleSet {
    std::vector<double> t;
    Eigen::MatrixXd y;
};

// Gains enter linearly, so they are eliminated: for a candidate set of time
// constants solve the linear least-squares problem for every column's gains
// and return the total squared residual norm.
double eval_gains(const SampleSet& s, const std::vector<double>& taus, Eigen::MatrixXd& g,
                  Eigen::MatrixXd& r) {
    const int m = static_cast<int>(s.t.size());
    const int n = static_cast<int>(taus.size());
    Eigen::MatrixXd phi(m, n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < m; ++j)
            phi(j, k) = 1.0 - std::exp(-s.t[j] / taus[k]);
    g = phi.colPivHouseholderQr().solve(s.y);
    r = phi * g - s.y;
    return r.squaredNorm();
}

struct LmOutcome {
    std::vector<double> taus;
    Eigen::MatrixXd gains; // modes x responses
    double cost = std::numeric_limits<double>::infinity();
    bool converged = false;
};

// Levenberg-Marquardt on theta = ln(tau) with the gains eliminated at every
// evaluation (Kaufman's variable-projection Jacobian: the basis-derivative
// columns are projected out of the span of the basis, which is what makes
// the eliminated gains consistent with the curvature model).
LmOutcome run_lm(const SampleSet& s, std::vector<double> taus, int max_iterations,
                 double theta_lo, double theta_hi) {
    const int m = static_cast<int>(s.t.size());
    const int n = static_cast<int>(taus.size());
    Eigen::VectorXd theta(n);
    for (int k = 0; k < n; ++k)
        theta[k] = std::clamp(std::log(taus[k]), theta_lo, theta_hi);
    for (int k = 0; k < n; ++k)
        taus[k] = std::exp(theta[k]);

    Eigen::MatrixXd g, r;
    double cost = eval_gains(s, taus, g, r);
    double lambda = 1e-3;
    bool converged = false;

    for (int iter = 0; iter < max_iterations && !converged; ++iter) {
        // d holds the derivative of each basis column with respect to its
        // own log time constant; the residual Jacobian factors into d times
        // the gains, one block per response column.
        Eigen::MatrixXd d(m, n);
        Eigen::MatrixXd phi(m, n);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < m; ++j) {
                double e = std::exp(-s.t[j] / taus[k]);
                d(j, k) = -(s.t[j] / taus[k]) * e;
                phi(j, k) = 1.0 - e;
            }
        // Project the derivative columns out of span(phi); the residual
        // already lives in the orthogonal complement, and without this the
        // Gauss-Newton matrix overestimates the curvature so badly that the
        // iteration crawls on overlapping-mode fits.
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(phi);
        Eigen::MatrixXd qthin = qr.householderQ() * Eigen::MatrixXd::Identity(m, n);
        d -= qthin * (qthin.transpose() * d);
        // Summing the per-response Gauss-Newton blocks gives
        // H(k,l) = (d_k . d_l) (g_k . g_l) and grad_k = sum_p g_kp (d_k . r_p).
        Eigen::MatrixXd h = (d.transpose() * d).cwiseProduct(g * g.transpose());
        Eigen::VectorXd grad = (d.transpose() * r).cwiseProduct(g).rowwise().sum();

        bool accepted = false;
        while (lambda <= 1e14) {
            Eigen::MatrixXd damped = h;
            for (int k = 0; k < n; ++k)
                damped(k, k) += lambda * (h(k, k) + 1e-12);
            Eigen::VectorXd delta = damped.ldlt().solve(-grad);
            Eigen::VectorXd theta_new = theta + delta;
            for (int k = 0; k < n; ++k)
                theta_new[k] = std::clamp(theta_new[k], theta_lo, theta_hi);
            std::vector<double> taus_new(n);
            for (int k = 0; k < n; ++k)
                taus_new[k] = std::exp(theta_new[k]);
            Eigen::MatrixXd g_new, r_new;
            double cost_new = eval_gains(s, taus_new, g_new, r_new);
            if (std::isfinite(cost_new) && cost_new <= cost) {
                double applied = (theta_new - theta).cwiseAbs().maxCoeff();
                double improvement = cost - cost_new;
                // Nonzero-residual separable fits approach the minimum
                // linearly, so convergence is declared on the standard
                // small-progress tests: relative cost reduction below ftol or
                // step below xtol in log-time-constant space.
                bool stalled = applied < 1e-9 ||
                               improvement <= 1e-9 * std::max(cost, 1e-300);
                theta = theta_new;
                taus = taus_new;
                g = g_new;
                r = r_new;
                cost = cost_new;
                accepted = true;
                lambda = std::max(lambda / 3.0, 1e-13);
                if (stalled)
                    converged = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            // no damping level yields a downhill step: the iterate is
            // stationary to machine precision
            converged = true;
            break;
        }
    }
    return {taus, g, cost, converged};
}

void sort_descending(std::vector<double>& taus, Eigen::MatrixXd& gains) {
    const int n = static_cast<int>(taus.size());
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i)
        idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return taus[a] > taus[b]; });
    std::vector<double> ts(n);
    Eigen::MatrixXd gs(n, gains.cols());
    for (int i = 0; i < n; ++i) {
        ts[i] = taus[idx[i]];
        gs.row(i) = gains.row(idx[i]);
    }
    taus = std::move(ts);
    gains = std::move(gs);
}

void drop_row(Eigen::MatrixXd& m, Eigen::Index row) {
    for (Eigen::Index i = row; i + 1 < m.rows(); ++i)
        m.row(i) = m.row(i + 1);
    m.conservativeResize(m.rows() - 1, Eigen::NoChange);
}

// Merge adjacent time constants closer than the collapse ratio (descending
// order assumed); the merged mode takes the summed gains. Returns true when
// anything merged.
bool merge_collapsed(std::vector<double>& taus, Eigen::MatrixXd& gains, double ratio) {
    bool merged = false;
    for (std::size_t i = 0; i + 1 < taus.size();) {
        if (taus[i] / taus[i + 1] < ratio) {
            double tau = std::sqrt(taus[i] * taus[i + 1]);
            gains.row(static_cast<Eigen::Index>(i)) +=
                gains.row(static_cast<Eigen::Index>(i + 1));
            taus.erase(taus.begin() + static_cast<std::ptrdiff_t>(i + 1));
            drop_row(gains, static_cast<Eigen::Index>(i + 1));
            taus[i] = tau;
            merged = true;
        } else {
            ++i;
        }
    }
    return merged;
}

SampleSet subsample(const std::vector<double>& t,
                    const std::vector<const std::vector<double>*>& ys,
                    const std::vector<double>& scales, int max_points) {
    const int m = static_cast<int>(t.size());
    std::vector<int> keep;
    if (m <= max_points) {
        keep.resize(m);
        for (int i = 0; i < m; ++i)
            keep[i] = i;
    } else {
        // Log-spaced indices: dense over the early transient, sparse late.
        keep.reserve(max_points + 1);
        keep.push_back(0);
        double hi = std::log(static_cast<double>(m - 1));
        int last = 0;
        for (int j = 0; j < max_points; ++j) {
            double f = static_cast<double>(j) / (max_points - 1);
            int idx = static_cast<int>(std::lround(std::exp(f * hi)));
            idx = std::clamp(idx, 1, m - 1);
            if (idx > last) {
                keep.push_back(idx);
                last = idx;
            }
        }
        if (keep.back() != m - 1)
            keep.push_back(m - 1);
    }
    SampleSet s;
    s.t.reserve(keep.size());
    s.y.resize(static_cast<Eigen::Index>(keep.size()),
               static_cast<Eigen::Index>(ys.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        s.t.push_back(t[keep[i]]);
        for (std::size_t p = 0; p < ys.size(); ++p)
            s.y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) =
                (*ys[p])[keep[i]] / scales[p];
    }
    return s;
}

struct TauSearch {
    std::vector<double> taus;
    bool converged = false;
    std::vector<std::string> notes;
};

// Multistart search for the time constants on a (possibly multi-response)
// sample set: log-spaced starts with seeded jitter, best cost wins, adjacent
// collapsing modes are merged and the reduced set re-polished.
TauSearch search_taus(const SampleSet& search, double t_span, double t_first, int order,
                      const FitOptions& opts) {
    const double theta_lo = std::log(std::max(t_first / 10.0, 1e-12));
    const double theta_hi = std::log(t_span * 50.0);

    // Base initialization: log-spaced time constants across the sampled span,
    // jittered per start.
    std::vector<double> base(order);
    double lo = std::max(t_span / 2000.0, t_first);
    double hi = t_span / 2.0;
    if (lo >= hi)
        lo = hi / 10.0;
    for (int k = 0; k < order; ++k) {
        double f = order == 1 ? 0.5 : static_cast<double>(k) / (order - 1);
        base[k] = std::exp(std::log(hi) + f * (std::log(lo) - std::log(hi)));
    }

    LmOutcome best;
    bool any_converged = false;
    for (int start = 0; start < std::max(1, opts.starts); ++start) {
        std::vector<double> init = base;
        if (start > 0) {
            std::mt19937 rng(opts.seed + static_cast<unsigned>(start));
            std::uniform_real_distribution<double> u(-0.6, 0.6);
            for (double& tau : init)
                tau *= std::exp(u(rng));
        }
        LmOutcome out = run_lm(search, init, opts.max_iterations, theta_lo, theta_hi);
        if (out.cost < best.cost)
            best = out;
        any_converged = any_converged || out.converged;
    }

    TauSearch result;
    result.converged = any_converged;
    result.taus = best.taus;
    Eigen::MatrixXd gains = best.gains;
    sort_descending(result.taus, gains);
    while (merge_collapsed(result.taus, gains, opts.tau_collapse_ratio)) {
        result.notes.push_back("order reduced to " + std::to_string(result.taus.size()) +
                               ": adjacent time constants collapsed");
        LmOutcome polished =
            run_lm(search, result.taus, opts.max_iterations, theta_lo, theta_hi);
        result.taus = polished.taus;
        gains = polished.gains;
        sort_descending(result.taus, gains);
    }
    return result;
}

}  // namespace

FosterLtiModel refit_gains(const StepResponse& resp, const std::vector<double>& taus) {
    if (taus.empty())
        throw std::invalid_argument("refit_gains: need at least one time constant");
    if (resp.normalized.size() != resp.t.size() || resp.t.size() < taus.size())
        throw std::invalid_argument("refit_gains: sample arrays disagree in length");
    const int m = static_cast<int>(resp.t.size());

    SampleSet full;
    full.t = resp.t;
    full.y.resize(m, 1);
    for (int j = 0; j < m; ++j)
        full.y(j, 0) = resp.normalized[j];
    Eigen::MatrixXd g_full, r_full;
    double cost_full = eval_gains(full, taus, g_full, r_full);

    FosterLtiModel model;
    model.order = static_cast<int>(taus.size());
    model.taus = taus;
    model.gains.assign(g_full.data(), g_full.data() + g_full.size());
    model.op = resp.op;
    model.t0_temperature = resp.t0_temperature;
    model.fit_rms = std::sqrt(cost_full / m);
    validate(model);
    return model;
}

FosterLtiModel fit_foster(const StepResponse& resp, int order, const FitOptions& opts) {
    if (order < 1)
        throw std::invalid_argument("fit_foster: order must be at least 1");
    const int m = static_cast<int>(resp.t.size());
    if (m < 4 * order)
        throw std::invalid_argument("fit_foster: need at least 4*order samples");
    if (resp.normalized.size() != resp.t.size())
        throw std::invalid_argument("fit_foster: sample arrays disagree in length");

    double yscale = 0.0;
    for (double v : resp.normalized)
        yscale = std::max(yscale, std::abs(v));
    if (yscale == 0.0)
        throw std::invalid_argument("fit_foster: response is identically zero");

    SampleSet search =
        subsample(resp.t, {&resp.normalized}, {yscale}, opts.max_subsamples);
    const double t_span = resp.t.back();
    double t_first = resp.t.size() > 1 ? resp.t[1] : t_span;
    TauSearch found = search_taus(search, t_span, t_first, order, opts);

    // Final pass: keep the optimized time constants, refit the gains on the
    // full sample set in original units and measure the residual there.
    FosterLtiModel model = refit_gains(resp, found.taus);
    model.notes = found.notes;

    if (!found.converged)
        throw FitError("fit_foster: no start converged within the iteration cap", model);
    return model;
}

std::vector<double> fit_shared_taus(const std::vector<StepResponse>& resps, int order,
                                    const FitOptions& opts) {
    if (order < 1)
        throw std::invalid_argument("fit_shared_taus: order must be at least 1");
    if (resps.empty())
        throw std::invalid_argument("fit_shared_taus: need at least one response");
    const std::vector<double>& t = resps.front().t;
    const int m = static_cast<int>(t.size());
    if (m < 4 * order)
        throw std::invalid_argument("fit_shared_taus: need at least 4*order samples");

    std::vector<const std::vector<double>*> ys;
    std::vector<double> scales;
    ys.reserve(resps.size());
    scales.reserve(resps.size());
    for (const StepResponse& r : resps) {
        if (r.t != t)
            throw std::invalid_argument("fit_shared_taus: responses must share a time base");
        if (r.normalized.size() != r.t.size())
            throw std::invalid_argument("fit_shared_taus: sample arrays disagree in length");
        double scale = 0.0;
        for (double v : r.normalized)
            scale = std::max(scale, std::abs(v));
        if (scale == 0.0)
            throw std::invalid_argument("fit_shared_taus: response is identically zero");
        ys.push_back(&r.normalized);
        scales.push_back(scale);
    }

    // Each response is scaled to unit peak so no operating point dominates
    // the shared spectrum.
    SampleSet search = subsample(t, ys, scales, opts.max_subsamples);
    const double t_span = t.back();
    double t_first = t.size() > 1 ? t[1] : t_span;
    TauSearch found = search_taus(search, t_span, t_first, order, opts);

    if (!found.converged)
        throw FitError("fit_shared_taus: no start converged within the iteration cap",
                       refit_gains(resps.front(), found.taus));
    return found.taus;
}

void foster_zoh_step(const std::vector<double>& gains, const std::vector<double>& taus,
                     double q_gen, double dt, std::vector<double>& x) {
    for (std::size_t i = 0; i < gains.size(); ++i) {
        double a = std::exp(-dt / taus[i]);
        x[i] = a * x[i] + gains[i] * (1.0 - a) * q_gen;
    }
}

SimulationResult simulate_lti(const FosterLtiModel& model, const Profile& q_profile,
                              double t0_temperature, double t_end, double dt) {
    validate(model);
    if (!(dt > 0.0) || !(t_end > 0.0))
        throw std::invalid_argument("simulate_lti: dt and t_end must be positive");
    if (q_profile.empty())
        throw std::invalid_argument("simulate_lti: empty heat profile");

    long n_steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
    SimulationResult r;
    r.t.reserve(n_steps + 1);
    r.t_avg.reserve(n_steps + 1);
    r.t.push_back(0.0);
    r.t_avg.push_back(t0_temperature);

    std::vector<double> x(static_cast<std::size_t>(model.order), 0.0);
    for (long n = 0; n < n_steps; ++n) {
        double t_n = static_cast<double>(n) * dt;
        foster_zoh_step(model.gains, model.taus, q_profile(t_n), dt, x);
        double acc = 0.0;
        for (double v : x)
            acc += v;
        r.t.push_back(static_cast<double>(n + 1) * dt);
        r.t_avg.push_back(t0_temperature + acc);
    }
    return r;
}

}  // namespace cellrom
