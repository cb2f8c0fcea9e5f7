#pragma once

#include "leach/grid.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace leach {

/// Admissible radius range and dissolution constants.
struct RadiusBounds {
    double r_min = 0.05;
    double r_max = 0.45;
    double theta = 0.1;  ///< dissolution rate, dr/dt = -theta * c
    double M0 = 1.0;     ///< smoothness budget; only used by the slab-length heuristic

    void validate() const;
};

/// Characteristic function of the pore space in Y = (-1/2, 1/2)^3:
/// 1 in the fluid (|y| > r), 0 in the grain. |y| == r counts as grain.
int chi(double r, const std::array<double, 3>& y);

/// Fluid volume fraction of the cell for a centered spherical grain, 1 - (4 pi / 3) r^3.
double porosity(double r);

/// Grain volume (4 pi / 3) r^3.
double grain_volume(double r);

/// Voxelized periodicity cell at one grain radius.
struct UnitCellMask {
    double r = 0.0;
    GridSpec grid{};
    std::vector<std::uint8_t> solid;  ///< 1 inside the grain
    double fluid_volume_fraction = 1.0;  ///< from 2x2x2 subcell sampling; diagnostic only

    bool is_solid(std::size_t cell) const { return solid[cell] != 0; }
    std::size_t solid_count() const;
};

/// Voxelize the grain at resolution n: a voxel is solid when chi vanishes at its center.
/// Checks only 0 <= r <= 1/2 and n >= 2; used directly by refinement studies that go
/// below the resolution floor of build_cell_mask.
UnitCellMask voxelize_cell(double r, int n);

/// Checked construction: r in [r_min, r_max], n >= 8 and r / h >= 2.
UnitCellMask build_cell_mask(double r, int n, const RadiusBounds& bounds = {});

/// True when the fluid voxels form a single 6-connected component (periodic wrap).
bool fluid_connected(const UnitCellMask& mask);

}  // namespace leach
