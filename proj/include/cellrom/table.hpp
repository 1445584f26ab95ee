#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace cellrom {

/// Piecewise-linear lookup table, clamped at the end nodes (no extrapolation).
class Table1D {
public:
    Table1D() = default;
    Table1D(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;

    bool empty() const { return x_.empty(); }
    std::size_t size() const { return x_.size(); }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }
    bool nondecreasing() const;

private:
    std::vector<double> x_, y_;
};

/// Bilinear lookup on a rectangular (x, y) grid, clamped at the edges.
/// Values are stored row-major: value(i, j) = v[i * ny + j] for x index i, y index j.
class Table2D {
public:
    Table2D() = default;
    Table2D(std::vector<double> x, std::vector<double> y, std::vector<double> values);

    /// Builds from scattered (x, y, value) triples that must cover a full
    /// rectangular grid; throws std::invalid_argument when the cover is
    /// incomplete or duplicated.
    static Table2D from_triples(const std::vector<std::array<double, 3>>& triples);

    double operator()(double x, double y) const;

    bool empty() const { return v_.empty(); }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }
    const std::vector<double>& values() const { return v_; }

private:
    std::vector<double> x_, y_, v_;
};

/// Index i such that nodes[i] <= value < nodes[i+1], clamped to [0, n-2].
/// Nodes must be strictly increasing and have at least two entries.
std::size_t bracket_index(const std::vector<double>& nodes, double value);

}  // namespace cellrom
