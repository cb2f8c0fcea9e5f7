#include "leach/grid.hpp"

#include "leach/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace leach {

GridSpec GridSpec::unit_cell(int n)
{
    GridSpec g;
    g.n = {n, n, n};
    g.h = {1.0 / n, 1.0 / n, 1.0 / n};
    g.periodic = {true, true, true};
    g.validate();
    return g;
}

GridSpec GridSpec::unit_cube(int n)
{
    GridSpec g;
    g.n = {n, n, n};
    g.h = {1.0 / n, 1.0 / n, 1.0 / n};
    g.periodic = {false, false, false};
    g.validate();
    return g;
}

void GridSpec::validate() const
{
    for (int d = 0; d < 3; ++d) {
        if (n[d] < 2)
            throw InvalidInput("grid: n" + std::to_string(d + 1) + " must be >= 2");
        if (!(h[d] > 0.0) || !std::isfinite(h[d]))
            throw InvalidInput("grid: h" + std::to_string(d + 1) + " must be positive");
    }
}

ScalarField::ScalarField(GridSpec grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.size())
        throw InvalidInput("scalar field: value count does not match grid");
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::mean() const
{
    return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

bool ScalarField::all_finite() const
{
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

VectorField::VectorField(GridSpec grid, double fill) : grid_(grid), values_(3 * grid.size(), fill) {}

double VectorField::max_abs() const
{
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool VectorField::all_finite() const
{
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace leach
