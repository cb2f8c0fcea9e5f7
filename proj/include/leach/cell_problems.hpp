#pragma once

#include "leach/cell_geometry.hpp"
#include "leach/linalg.hpp"

#include <array>
#include <vector>

namespace leach {

struct CellSolveOptions {
    double tol = 1e-10;      ///< relative residual of every linear solve
    int max_iter = 100000;   ///< per linear solve
};

/// Periodic Stokes correctors on the MAC grid of a unit cell.
///
/// Velocity component d of forcing i lives on the faces normal to axis d; face
/// (d, c) is the lower face of cell c, so velocity[i][d * N + c] with N = n^3.
struct StokesCellSolution {
    GridSpec grid{};
    std::array<std::vector<double>, 3> velocity;
    std::array<std::vector<double>, 3> pressure;  ///< zero-mean over coupled fluid cells
    Mat3 B_w = Mat3::Zero();
    double max_divergence = 0.0;  ///< max |div W| over cells and forcings
    int iterations = 0;           ///< Krylov iterations summed over forcings
};

/// Scalar correctors of the periodic Neumann problem on the fluid voxels.
struct DiffusionCellSolution {
    GridSpec grid{};
    std::array<std::vector<double>, 3> corrector;  ///< per cell, zero on solid voxels, zero mean over fluid
    Mat3 B_c_energy = Mat3::Zero();
    Mat3 B_c_quadratic = Mat3::Zero();
    /// Discrete fluid measure per direction (h^3 times the number of fluid-fluid faces).
    /// B_c_energy + B_c_quadratic equals this matrix up to solver tolerance.
    Mat3 fluid_face_measure = Mat3::Zero();
};

struct ElasticCellOptions {
    CellSolveOptions solve{};
    /// Replace the unit strains J^{ij} by zero (both in the load and in the assembly).
    bool zero_forcing = false;
};

/// Correctors of the traction-free cell problem on the grain, trilinear elements on solid voxels.
struct ElasticCellSolution {
    GridSpec grid{};
    std::vector<std::size_t> node_of_dof_block;  ///< grid-node index (of (n+1)^3) for each solid node
    std::array<std::vector<double>, 6> displacement;  ///< Voigt pair order, 3 values per solid node
    Voigt6 N_energy = Voigt6::Zero();
    Voigt6 N_paper = Voigt6::Zero();
    /// Largest |mean displacement| and |mean rotation| over the six correctors.
    double max_mean_displacement = 0.0;
    double max_mean_rotation = 0.0;
};

StokesCellSolution solve_stokes_cell(const UnitCellMask& mask, double mu1, const CellSolveOptions& options = {});

DiffusionCellSolution solve_diffusion_cell(const UnitCellMask& mask, const CellSolveOptions& options = {});

ElasticCellSolution solve_elasticity_cell(const UnitCellMask& mask, double lambda0, double c_s,
                                          const ElasticCellOptions& options = {});

/// Extrapolate a sequence computed at n, 2n, 4n. The observed order is clamped
/// to [1, 2]; a non-monotone sequence falls back to first order.
double richardson_extrapolate(double coarse, double medium, double fine);

}  // namespace leach
