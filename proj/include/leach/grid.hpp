#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace leach {

/// Cell-centered structured grid on [-1/2, 1/2]^3 (or any box with the same origin
/// convention). Index order is x fastest.
struct GridSpec {
    std::array<int, 3> n{2, 2, 2};
    std::array<double, 3> h{0.5, 0.5, 0.5};
    std::array<bool, 3> periodic{false, false, false};

    /// Periodic unit cell Y with n cells per axis.
    static GridSpec unit_cell(int n);
    /// Non-periodic unit cube Omega with n cells per axis.
    static GridSpec unit_cube(int n);

    void validate() const;

    std::size_t size() const noexcept
    {
        return static_cast<std::size_t>(n[0]) * n[1] * n[2];
    }
    std::size_t index(int i, int j, int k) const noexcept
    {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(n[0]) * (j + static_cast<std::size_t>(n[1]) * k);
    }
    std::array<int, 3> ijk(std::size_t idx) const noexcept
    {
        const int i = static_cast<int>(idx % n[0]);
        const int j = static_cast<int>((idx / n[0]) % n[1]);
        const int k = static_cast<int>(idx / (static_cast<std::size_t>(n[0]) * n[1]));
        return {i, j, k};
    }
    /// Cell center with the box centered at the origin.
    std::array<double, 3> center(int i, int j, int k) const noexcept
    {
        return {-0.5 * n[0] * h[0] + (i + 0.5) * h[0],
                -0.5 * n[1] * h[1] + (j + 0.5) * h[1],
                -0.5 * n[2] * h[2] + (k + 0.5) * h[2]};
    }
    double cell_volume() const noexcept { return h[0] * h[1] * h[2]; }

    bool operator==(const GridSpec&) const = default;
};

/// One real per cell.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridSpec grid, double fill = 0.0);
    ScalarField(GridSpec grid, std::vector<double> values);

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    double min() const;
    double max() const;
    double mean() const;
    bool all_finite() const;

    bool operator==(const ScalarField&) const = default;

private:
    GridSpec grid_{};
    std::vector<double> values_;
};

/// Three reals per cell, interleaved (x, y, z).
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(GridSpec grid, double fill = 0.0);

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t cells() const noexcept { return values_.size() / 3; }
    double& at(std::size_t cell, int comp) { return values_[3 * cell + comp]; }
    double at(std::size_t cell, int comp) const { return values_[3 * cell + comp]; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    double max_abs() const;
    bool all_finite() const;

    bool operator==(const VectorField&) const = default;

private:
    GridSpec grid_{};
    std::vector<double> values_;
};

}  // namespace leach
