#include "cellrom/profile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace cellrom {

Profile::Profile(std::vector<double> t, std::vector<double> v)
    : t_(std::move(t)), v_(std::move(v)) {
    if (t_.empty())
        throw std::invalid_argument("Profile: empty");
    if (t_.size() != v_.size())
        throw std::invalid_argument("Profile: time and value sizes differ");
    if (t_.front() != 0.0)
        throw std::invalid_argument("Profile: must start at t = 0");
    for (std::size_t i = 0; i < t_.size(); ++i) {
        if (!std::isfinite(t_[i]) || !std::isfinite(v_[i]))
            throw std::invalid_argument("Profile: non-finite entry");
        if (i > 0 && t_[i] <= t_[i - 1])
            throw std::invalid_argument("Profile: times must be strictly increasing");
    }
}

Profile Profile::constant(double value) {
    return Profile({0.0}, {value});
}

double Profile::operator()(double t) const {
    if (t_.empty())
        throw std::logic_error("Profile: lookup on empty profile");
    if (t <= t_.front())
        return v_.front();
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    return v_[static_cast<std::size_t>(it - t_.begin()) - 1];
}

double Profile::mean(double t_end) const {
    if (t_end <= 0.0)
        throw std::invalid_argument("Profile::mean: t_end must be positive");
    double acc = 0.0;
    for (std::size_t i = 0; i < t_.size(); ++i) {
        double seg_start = std::min(t_[i], t_end);
        double seg_end = (i + 1 < t_.size()) ? std::min(t_[i + 1], t_end) : t_end;
        acc += v_[i] * (seg_end - seg_start);
    }
    return acc / t_end;
}

double Profile::stddev(double t_end) const {
    double m = mean(t_end);
    double acc = 0.0;
    for (std::size_t i = 0; i < t_.size(); ++i) {
        double seg_start = std::min(t_[i], t_end);
        double seg_end = (i + 1 < t_.size()) ? std::min(t_[i + 1], t_end) : t_end;
        double d = v_[i] - m;
        acc += d * d * (seg_end - seg_start);
    }
    return std::sqrt(acc / t_end);
}

}  // namespace cellrom
