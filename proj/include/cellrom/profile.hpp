#pragma once

#include <cstddef>
#include <vector>

namespace cellrom {

/// Piecewise-constant (zero-order-hold) signal. Breakpoints carry the value
/// that holds from their time until the next breakpoint; the last value holds
/// forever. Times must be strictly increasing and start at t = 0.
class Profile {
public:
    Profile() = default;
    Profile(std::vector<double> t, std::vector<double> v);

    static Profile constant(double value);

    double operator()(double t) const;

    bool empty() const { return t_.empty(); }
    std::size_t size() const { return t_.size(); }
    const std::vector<double>& times() const { return t_; }
    const std::vector<double>& values() const { return v_; }

    /// Duration-weighted mean over [0, t_end].
    double mean(double t_end) const;
    /// Duration-weighted population standard deviation over [0, t_end].
    double stddev(double t_end) const;

private:
    std::vector<double> t_, v_;
};

}  // namespace cellrom
