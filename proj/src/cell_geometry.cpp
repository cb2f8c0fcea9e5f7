#include "leach/cell_geometry.hpp"

#include "leach/elliptic.hpp"
#include "leach/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace leach {

namespace {

void check_radius(double r, const char* who)
{
    if (!(r >= 0.0 && r <= 0.5)) {
        std::ostringstream os;
        os << who << ": radius " << r << " outside [0, 1/2]";
        throw InvalidInput(os.str());
    }
}

}  // namespace

void RadiusBounds::validate() const
{
    if (!(r_min > 0.0 && r_min < r_max && r_max < 0.5))
        throw InvalidInput("radius bounds: need 0 < r_min < r_max < 1/2");
    if (!(theta >= 0.0) || !std::isfinite(theta)) throw InvalidInput("radius bounds: theta must be nonnegative");
    if (!(M0 > 0.0)) throw InvalidInput("radius bounds: M0 must be positive");
}

int chi(double r, const std::array<double, 3>& y)
{
    check_radius(r, "chi");
    const double rr = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
    return rr > r * r ? 1 : 0;
}

double grain_volume(double r) { return 4.0 * std::numbers::pi / 3.0 * r * r * r; }

double porosity(double r)
{
    check_radius(r, "porosity");
    return 1.0 - grain_volume(r);
}

std::size_t UnitCellMask::solid_count() const
{
    std::size_t s = 0;
    for (auto v : solid) s += v;
    return s;
}

UnitCellMask voxelize_cell(double r, int n)
{
    check_radius(r, "voxelize_cell");
    UnitCellMask mask;
    mask.r = r;
    mask.grid = GridSpec::unit_cell(n);
    mask.solid.assign(mask.grid.size(), 0);

    const double h = mask.grid.h[0];
    std::size_t fluid_samples = 0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const auto c = mask.grid.center(i, j, k);
                mask.solid[mask.grid.index(i, j, k)] = chi(r, c) == 0 ? 1 : 0;
                for (int s = 0; s < 8; ++s) {
                    const std::array<double, 3> y{c[0] + ((s & 1) ? 0.25 : -0.25) * h,
                                                  c[1] + ((s & 2) ? 0.25 : -0.25) * h,
                                                  c[2] + ((s & 4) ? 0.25 : -0.25) * h};
                    fluid_samples += static_cast<std::size_t>(chi(r, y));
                }
            }
    mask.fluid_volume_fraction = static_cast<double>(fluid_samples) / (8.0 * static_cast<double>(mask.grid.size()));
    return mask;
}

UnitCellMask build_cell_mask(double r, int n, const RadiusBounds& bounds)
{
    bounds.validate();
    if (!(r >= bounds.r_min && r <= bounds.r_max)) {
        std::ostringstream os;
        os << "build_cell_mask: radius " << r << " outside admissible range [" << bounds.r_min << ", "
           << bounds.r_max << "]";
        throw InvalidInput(os.str());
    }
    if (n < 8) throw InvalidInput("build_cell_mask: resolution must be at least 8");
    if (r * n < 2.0) {
        std::ostringstream os;
        os << "build_cell_mask: grain radius " << r << " spans " << r * n
           << " cells at n=" << n << "; at least 2 are required";
        throw InvalidInput(os.str());
    }
    return voxelize_cell(r, n);
}

bool fluid_connected(const UnitCellMask& mask)
{
    const std::size_t total = mask.grid.size();
    std::vector<std::uint8_t> seen(total, 0);
    std::vector<std::size_t> stack;
    std::size_t fluid = 0, start = total;
    for (std::size_t c = 0; c < total; ++c)
        if (!mask.solid[c]) {
            ++fluid;
            if (start == total) start = c;
        }
    if (fluid == 0) return false;

    std::size_t reached = 0;
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
        const std::size_t c = stack.back();
        stack.pop_back();
        ++reached;
        for (int f = 0; f < 6; ++f) {
            const auto nb = neighbor(mask.grid, c, f);
            if (nb && !mask.solid[*nb] && !seen[*nb]) {
                seen[*nb] = 1;
                stack.push_back(*nb);
            }
        }
    }
    return reached == fluid;
}

}  // namespace leach
