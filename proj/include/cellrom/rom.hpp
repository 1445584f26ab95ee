#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cellrom/plant.hpp"
#include "cellrom/profile.hpp"
#include "cellrom/types.hpp"

namespace cellrom {

/// Cell-average temperature trajectory following a heat-generation step from
/// a uniform initial field, at fixed flow rate and inlet temperature. The
/// normalized form divides the rise by the step magnitude; the homogeneous
/// cooling transient (warm start against a cold inlet) is deliberately kept
/// in, which is what makes single-point LTI models fail off their extraction
/// point.
struct StepResponse {
    SchedulePoint op;               // q_gen is the step magnitude
    double t0_temperature = 300.0;  // K, uniform start
    std::vector<double> t;          // s, starts at 0
    std::vector<double> delta_t;    // K, T_avg(t) - t0
    std::vector<double> normalized; // K m^3 / W, delta_t / q_gen
    double settle_slope = 0.0;      // |dT_avg/dt| at t_end, K/s
    bool settled = false;           // settle_slope < 1e-4 K/s
};

StepResponse extract_step_response(const PlantModel& model, const SchedulePoint& op,
                                   double t_end, double dt);

void write_step_response_csv(const std::filesystem::path& path, const StepResponse& resp);
StepResponse read_step_response_csv(const std::filesystem::path& path);

/// Sum-of-first-order-lags thermal model: step response
/// g(t) = sum_i gains[i] * (1 - exp(-t/taus[i])), input volumetric heat
/// generation, output cell-average temperature rise over t0_temperature.
struct FosterLtiModel {
    int order = 0;
    std::vector<double> gains; // K m^3 / W, may be negative (cooling modes)
    std::vector<double> taus;  // s, strictly decreasing
    SchedulePoint op;          // extraction operating point
    double t0_temperature = 300.0;
    double fit_rms = 0.0;      // K m^3 / W, over the full sample set
    std::vector<std::string> notes;
};

void validate(const FosterLtiModel& model);
nlohmann::json lti_model_to_json(const FosterLtiModel& model);
FosterLtiModel lti_model_from_json(const nlohmann::json& j);
void save_lti_model(const std::filesystem::path& path, const FosterLtiModel& model);
FosterLtiModel load_lti_model(const std::filesystem::path& path);

struct FitOptions {
    int max_iterations = 600;       // Levenberg-Marquardt cap per start
    int starts = 8;                 // multistart count
    unsigned seed = 42;             // jitter seed for starts > 0
    double tau_collapse_ratio = 1.05; // adjacent taus closer than this merge
    int max_subsamples = 480;       // log-spaced subsample for the search
};

/// Thrown when no multistart converges within the iteration cap; carries the
/// best candidate found so callers can decide whether to keep it.
class FitError : public std::runtime_error {
public:
    FitError(const std::string& msg, FosterLtiModel best_candidate)
        : std::runtime_error(msg), best(std::move(best_candidate)) {}
    FosterLtiModel best;
};

/// Separable least squares: gains are solved linearly for each candidate set
/// of time constants, the time constants themselves are optimized in log
/// space by Levenberg-Marquardt from several log-spaced starting points.
/// Collapsing time-constant pairs reduce the order, with a note on the model.
FosterLtiModel fit_foster(const StepResponse& resp, int order, const FitOptions& opts = {});

/// Linear least-squares refit of the gains for a fixed lag spectrum over the
/// full sample set; fit_rms is measured there. This is the final pass of
/// fit_foster, exposed so one spectrum can serve several responses.
FosterLtiModel refit_gains(const StepResponse& resp, const std::vector<double>& taus);

/// Fit a single set of time constants jointly to several responses sharing a
/// time base, each keeping its own gains (responses are rescaled to unit
/// peak internally so no operating point dominates). At fixed flow and inlet
/// the plant responses to different heat steps form a two-dimensional affine
/// family, so one spectrum serves a whole heat-axis column and the refitted
/// gains become exactly affine in the inverse heat coordinate — which is
/// what keeps scheduled runs consistent across vertex switches. Collapsing
/// modes reduce the returned order. Throws FitError when no start converges.
std::vector<double> fit_shared_taus(const std::vector<StepResponse>& resps, int order,
                                    const FitOptions& opts = {});

/// Exact zero-order-hold update of the lag states for one step:
/// x_i <- exp(-dt/tau_i) x_i + g_i (1 - exp(-dt/tau_i)) q. Shared by the LTI
/// and LPV steppers so a scheduled run frozen at a vertex is bit-identical to
/// the vertex model's own simulation.
void foster_zoh_step(const std::vector<double>& gains, const std::vector<double>& taus,
                     double q_gen, double dt, std::vector<double>& x);

/// Drives the fitted model with an arbitrary heat profile. Flow rate and
/// inlet temperature do not enter: whatever cooling the extraction point saw
/// is baked into the gains, which is precisely the LTI limitation the LPV
/// grid removes.
SimulationResult simulate_lti(const FosterLtiModel& model, const Profile& q_profile,
                              double t0_temperature, double t_end, double dt);

}  // namespace cellrom
