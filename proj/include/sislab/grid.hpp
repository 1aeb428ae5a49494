#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sislab/error.hpp"

namespace sislab {

/// Cell-centred tensor grid on an interval [0, Lx] or a rectangle
/// [0, Lx] x [0, Ly]. Cells are stored x-fastest.
class Grid {
public:
    static Grid line(double length, int cells) { return Grid(1, {length, 1.0}, {cells, 1}); }

    static Grid rect(double lx, double ly, int nx, int ny) { return Grid(2, {lx, ly}, {nx, ny}); }

    int dim() const noexcept { return dim_; }
    double extent(int axis) const noexcept { return extents_[axis]; }
    int cells(int axis) const noexcept { return cells_[axis]; }
    double h(int axis) const noexcept { return h_[axis]; }
    std::size_t size() const noexcept {
        return static_cast<std::size_t>(cells_[0]) * static_cast<std::size_t>(cells_[1]);
    }

    double cell_measure() const noexcept { return dim_ == 1 ? h_[0] : h_[0] * h_[1]; }
    double omega_measure() const noexcept {
        return dim_ == 1 ? extents_[0] : extents_[0] * extents_[1];
    }

    std::size_t index(int i, int j = 0) const noexcept {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(cells_[0]) +
               static_cast<std::size_t>(i);
    }

    /// Cell-centre coordinates; y is 0 on 1D grids.
    std::array<double, 2> center(std::size_t k) const noexcept {
        const auto i = static_cast<int>(k % static_cast<std::size_t>(cells_[0]));
        const auto j = static_cast<int>(k / static_cast<std::size_t>(cells_[0]));
        return {(i + 0.5) * h_[0], dim_ == 1 ? 0.0 : (j + 0.5) * h_[1]};
    }

    friend bool operator==(const Grid& a, const Grid& b) noexcept {
        return a.dim_ == b.dim_ && a.cells_ == b.cells_ && a.extents_ == b.extents_;
    }

private:
    Grid(int dim, std::array<double, 2> extents, std::array<int, 2> cells)
        : dim_(dim), extents_(extents), cells_(cells) {
        for (int a = 0; a < dim_; ++a) {
            if (!(extents_[a] > 0.0) || !std::isfinite(extents_[a]))
                throw DomainError("grid extent must be positive and finite");
            if (cells_[a] < 2) throw DomainError("grid needs at least 2 cells per axis");
            h_[a] = extents_[a] / cells_[a];
        }
        if (dim_ == 1) h_[1] = 1.0;
    }

    int dim_;
    std::array<double, 2> extents_;
    std::array<int, 2> cells_;
    std::array<double, 2> h_{};
};

/// Per-cell samples of a scalar quantity on a Grid.
class Field {
public:
    Field(const Grid& grid, double value) : grid_(grid), values_(grid.size(), value) {}

    Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw StructuralError("field length " + std::to_string(values_.size()) +
                                  " does not match grid size " + std::to_string(grid_.size()));
    }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    double operator[](std::size_t k) const noexcept { return values_[k]; }
    double& operator[](std::size_t k) noexcept { return values_[k]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    bool all_finite() const noexcept {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }
    double min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }
    double max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

private:
    Grid grid_;
    std::vector<double> values_;
};

inline void require_same_grid(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid())) throw StructuralError("fields live on different grids");
}

inline double linf_norm(const Field& f) noexcept {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs_diff(const Field& a, const Field& b) {
    require_same_grid(a, b);
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

}  // namespace sislab
