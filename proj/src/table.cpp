#include "cellrom/table.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace cellrom {

namespace {

void check_axis(const std::vector<double>& x, const char* what) {
    if (x.empty())
        throw std::invalid_argument(std::string(what) + ": empty axis");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]))
            throw std::invalid_argument(std::string(what) + ": non-finite axis node");
        if (i > 0 && x[i] <= x[i - 1])
            throw std::invalid_argument(std::string(what) + ": axis nodes must be strictly increasing");
    }
}

}  // namespace

std::size_t bracket_index(const std::vector<double>& nodes, double value) {
    if (nodes.size() < 2)
        return 0;
    auto it = std::upper_bound(nodes.begin(), nodes.end(), value);
    if (it == nodes.begin())
        return 0;
    std::size_t i = static_cast<std::size_t>(it - nodes.begin()) - 1;
    return std::min(i, nodes.size() - 2);
}

Table1D::Table1D(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    check_axis(x_, "Table1D");
    if (x_.size() != y_.size())
        throw std::invalid_argument("Table1D: x and y sizes differ");
    for (double v : y_)
        if (!std::isfinite(v))
            throw std::invalid_argument("Table1D: non-finite value");
}

double Table1D::operator()(double x) const {
    if (x_.empty())
        throw std::logic_error("Table1D: lookup on empty table");
    if (x_.size() == 1 || x <= x_.front())
        return x <= x_.front() ? y_.front() : y_.back();
    if (x >= x_.back())
        return y_.back();
    std::size_t i = bracket_index(x_, x);
    double w = (x - x_[i]) / (x_[i + 1] - x_[i]);
    return y_[i] + w * (y_[i + 1] - y_[i]);
}

bool Table1D::nondecreasing() const {
    for (std::size_t i = 1; i < y_.size(); ++i)
        if (y_[i] < y_[i - 1])
            return false;
    return true;
}

Table2D::Table2D(std::vector<double> x, std::vector<double> y, std::vector<double> values)
    : x_(std::move(x)), y_(std::move(y)), v_(std::move(values)) {
    check_axis(x_, "Table2D x");
    check_axis(y_, "Table2D y");
    if (v_.size() != x_.size() * y_.size())
        throw std::invalid_argument("Table2D: value count does not match grid");
    for (double v : v_)
        if (!std::isfinite(v))
            throw std::invalid_argument("Table2D: non-finite value");
}

Table2D Table2D::from_triples(const std::vector<std::array<double, 3>>& triples) {
    if (triples.empty())
        throw std::invalid_argument("Table2D: no entries");
    std::vector<double> xs, ys;
    for (const auto& t : triples) {
        xs.push_back(t[0]);
        ys.push_back(t[1]);
    }
    auto uniq = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(xs);
    uniq(ys);
    std::map<std::pair<double, double>, double> cells;
    for (const auto& t : triples) {
        auto key = std::make_pair(t[0], t[1]);
        if (cells.count(key))
            throw std::invalid_argument("Table2D: duplicated (x, y) entry");
        cells[key] = t[2];
    }
    std::vector<double> v;
    v.reserve(xs.size() * ys.size());
    for (double x : xs)
        for (double y : ys) {
            auto it = cells.find({x, y});
            if (it == cells.end())
                throw std::invalid_argument("Table2D: entries do not form a full rectangular grid");
            v.push_back(it->second);
        }
    return Table2D(std::move(xs), std::move(ys), std::move(v));
}

double Table2D::operator()(double x, double y) const {
    if (v_.empty())
        throw std::logic_error("Table2D: lookup on empty table");
    const std::size_t ny = y_.size();
    auto val = [&](std::size_t i, std::size_t j) { return v_[i * ny + j]; };

    double wx = 0.0, wy = 0.0;
    std::size_t i = 0, j = 0;
    if (x_.size() > 1) {
        double xc = std::clamp(x, x_.front(), x_.back());
        i = bracket_index(x_, xc);
        wx = (xc - x_[i]) / (x_[i + 1] - x_[i]);
    }
    if (y_.size() > 1) {
        double yc = std::clamp(y, y_.front(), y_.back());
        j = bracket_index(y_, yc);
        wy = (yc - y_[j]) / (y_[j + 1] - y_[j]);
    }
    std::size_t i1 = x_.size() > 1 ? i + 1 : i;
    std::size_t j1 = ny > 1 ? j + 1 : j;
    double v00 = val(i, j), v01 = val(i, j1), v10 = val(i1, j), v11 = val(i1, j1);
    return (1 - wx) * ((1 - wy) * v00 + wy * v01) + wx * ((1 - wy) * v10 + wy * v11);
}

}  // namespace cellrom
