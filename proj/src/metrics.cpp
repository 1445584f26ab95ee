#include "cellrom/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cellrom/types.hpp"

namespace cellrom {

ErrorMetrics metric_errors(const std::vector<double>& t_test,
                           const std::vector<double>& test_k,
                           const std::vector<double>& t_ref,
                           const std::vector<double>& ref_k) {
    if (t_test.size() != test_k.size() || t_ref.size() != ref_k.size())
        throw std::invalid_argument("metric_errors: time and value lengths disagree");
    if (t_test.empty() || t_ref.empty())
        throw std::domain_error("metric_errors: empty trajectory");
    double lo = std::max(t_test.front(), t_ref.front());
    double hi = std::min(t_test.back(), t_ref.back());
    if (!(lo <= hi))
        throw std::domain_error("metric_errors: trajectories do not overlap in time");

    ErrorMetrics m;
    bool any = false;
    for (std::size_t i = 0; i < t_test.size(); ++i) {
        double t = t_test[i];
        if (t < lo || t > hi)
            continue;
        auto it = std::upper_bound(t_ref.begin(), t_ref.end(), t);
        std::size_t j = (it == t_ref.begin()) ? 0 : (it - t_ref.begin() - 1);
        double ref_c = kelvin_to_celsius(ref_k[j]);
        double abs_err = std::abs(test_k[i] - ref_k[j]);
        double rel = abs_err / std::max(std::abs(ref_c), 1.0) * 100.0;
        m.max_abs_k = std::max(m.max_abs_k, abs_err);
        m.max_rel_pct = std::max(m.max_rel_pct, rel);
        any = true;
    }
    if (!any)
        throw std::domain_error("metric_errors: no test samples inside the overlap");
    return m;
}

double mean(const std::vector<double>& series) {
    if (series.empty())
        throw std::domain_error("mean: empty series");
    double acc = 0.0;
    for (double v : series)
        acc += v;
    return acc / static_cast<double>(series.size());
}

double stddev_population(const std::vector<double>& series) {
    double mu = mean(series);
    double acc = 0.0;
    for (double v : series)
        acc += (v - mu) * (v - mu);
    return std::sqrt(acc / static_cast<double>(series.size()));
}

double cov_pct(const std::vector<double>& series) {
    double mu = mean(series);
    if (mu == 0.0)
        throw std::domain_error("cov_pct: zero mean");
    return stddev_population(series) / mu * 100.0;
}

}  // namespace cellrom
