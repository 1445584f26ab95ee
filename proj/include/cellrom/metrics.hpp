#pragma once

#include <vector>

namespace cellrom {

struct ErrorMetrics {
    double max_abs_k = 0.0;   // max pointwise |difference|, Kelvin
    double max_rel_pct = 0.0; // vs the reference in Celsius, 1 degC floor
};

/// Pointwise comparison of a test trajectory against a reference, evaluated
/// at the test sample times inside the overlapping range; the reference is
/// resampled by zero-order hold. Relative error at each instant divides by
/// max(|T_ref in degC|, 1 degC). Inputs are Kelvin series.
ErrorMetrics metric_errors(const std::vector<double>& t_test,
                           const std::vector<double>& test_k,
                           const std::vector<double>& t_ref,
                           const std::vector<double>& ref_k);

double mean(const std::vector<double>& series);
double stddev_population(const std::vector<double>& series);

/// Coefficient of variation in percent: population standard deviation over
/// mean, times 100.
double cov_pct(const std::vector<double>& series);

}  // namespace cellrom
