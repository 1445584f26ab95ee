#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cellrom/metrics.hpp"
#include "cellrom/types.hpp"

using namespace cellrom;

TEST_CASE("identical trajectories have zero error") {
    std::vector<double> t{0.0, 1.0, 2.0};
    std::vector<double> v{300.0, 301.0, 302.0};
    ErrorMetrics e = metric_errors(t, v, t, v);
    CHECK(e.max_abs_k == 0.0);
    CHECK(e.max_rel_pct == 0.0);
}

TEST_CASE("hand-computed error values") {
    std::vector<double> t{0.0, 1.0};
    // reference at 20 degC, test at 20.5 degC: 0.5 K, 0.5/20*100 = 2.5 %
    std::vector<double> ref{celsius_to_kelvin(20.0), celsius_to_kelvin(20.0)};
    std::vector<double> test{celsius_to_kelvin(20.5), celsius_to_kelvin(20.5)};
    ErrorMetrics e = metric_errors(t, test, t, ref);
    CHECK(e.max_abs_k == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(e.max_rel_pct == doctest::Approx(2.5).epsilon(1e-9));

    // sign does not matter
    std::vector<double> below{celsius_to_kelvin(19.5), celsius_to_kelvin(19.5)};
    ErrorMetrics eb = metric_errors(t, below, t, ref);
    CHECK(eb.max_abs_k == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(eb.max_rel_pct == doctest::Approx(2.5).epsilon(1e-9));

    // 2 degC reference, 3 degC test: 50 %
    std::vector<double> r2{celsius_to_kelvin(2.0)};
    std::vector<double> t3{celsius_to_kelvin(3.0)};
    ErrorMetrics e2 = metric_errors({0.0}, t3, {0.0}, r2);
    CHECK(e2.max_rel_pct == doctest::Approx(50.0).epsilon(1e-9));

    // near-zero reference uses the 1 degC floor instead of blowing up
    std::vector<double> r0{celsius_to_kelvin(0.5)};
    std::vector<double> t1{celsius_to_kelvin(1.0)};
    ErrorMetrics e0 = metric_errors({0.0}, t1, {0.0}, r0);
    CHECK(e0.max_rel_pct == doctest::Approx(50.0).epsilon(1e-9));
}

TEST_CASE("reference is resampled by zero-order hold") {
    std::vector<double> t_ref{0.0, 10.0};
    std::vector<double> ref{300.0, 310.0};
    std::vector<double> t_test{5.0};
    std::vector<double> test{301.0};
    ErrorMetrics e = metric_errors(t_test, test, t_ref, ref);
    CHECK(e.max_abs_k == doctest::Approx(1.0).epsilon(1e-12));
    double rel = 1.0 / (300.0 - kKelvinOffset) * 100.0;
    CHECK(e.max_rel_pct == doctest::Approx(rel).epsilon(1e-9));
}

TEST_CASE("comparison restricts itself to the overlapping window") {
    std::vector<double> t_ref{0.0, 1.0, 2.0};
    std::vector<double> ref{300.0, 300.0, 300.0};
    std::vector<double> t_test{1.5, 2.5, 99.0}; // last two beyond the reference
    std::vector<double> test{300.5, 1e6, 1e6};
    ErrorMetrics e = metric_errors(t_test, test, t_ref, ref);
    CHECK(e.max_abs_k == doctest::Approx(0.5).epsilon(1e-12));

    std::vector<double> far{100.0, 101.0, 102.0};
    CHECK_THROWS_AS(metric_errors(far, ref, t_ref, ref), std::domain_error);
    CHECK_THROWS_AS(metric_errors({}, {}, t_ref, ref), std::domain_error);
    CHECK_THROWS_AS(metric_errors({0.0}, {1.0, 2.0}, t_ref, ref), std::invalid_argument);
}

TEST_CASE("series statistics match hand values") {
    std::vector<double> s{1.0, 2.0, 3.0, 4.0};
    CHECK(mean(s) == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(stddev_population(s) == doctest::Approx(std::sqrt(1.25)).epsilon(1e-14));
    CHECK(cov_pct(s) == doctest::Approx(std::sqrt(1.25) / 2.5 * 100.0).epsilon(1e-12));
    CHECK(cov_pct({5.0, 5.0, 5.0}) == 0.0);
    CHECK_THROWS_AS(cov_pct({1.0, -1.0}), std::domain_error);
    CHECK_THROWS_AS(mean({}), std::domain_error);
}
