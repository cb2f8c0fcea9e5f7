#pragma once

#include "leach/cg.hpp"
#include "leach/coeff_table.hpp"
#include "leach/grid.hpp"

#include <array>
#include <functional>
#include <optional>
#include <vector>

namespace leach {

using SpatialFunction = std::function<double(const std::array<double, 3>&)>;

/// Reservoir Omega = (-1/2, 1/2)^3. S1 is x1 = -1/2 (injection), S2 is x1 = +1/2
/// (production), S0 is the remaining four faces.
struct ReservoirSpec {
    GridSpec grid = GridSpec::unit_cube(16);
    SpatialFunction p0;  ///< given pressure, p1 on S1 and p2 on S2
    SpatialFunction c0;  ///< given concentration in [0, 1]
    double p1 = 0.0;
    double p2 = 0.0;

    /// Grid non-periodic, p0 finite and equal to p1 / p2 on the wells, 0 <= c0 <= 1
    /// at cell centers and boundary face centers.
    void validate() const;

    ScalarField p0_cells() const;
    ScalarField c0_cells() const;
};

/// Face-center coordinates of boundary face `face` (order -x, +x, -y, +y, -z, +z) of `cell`.
std::array<double, 3> boundary_face_center(const GridSpec& grid, std::size_t cell, int face);

struct MacroState {
    double t = 0.0;
    ScalarField c;
    ScalarField phi;
    VectorField w_f;
    VectorField w_s;
    ScalarField p_f;
    ScalarField p_s;
};

/// Per-cell coefficient lookups with one summary warning for clamped radii.
std::vector<Mat3> permeability_field(const CoefficientTable& table, const ScalarField& r);
std::vector<Mat3> diffusivity_field(const CoefficientTable& table, const ScalarField& r);
std::vector<Voigt6> stiffness_field(const CoefficientTable& table, const ScalarField& r);
ScalarField porosity_field(const ScalarField& r);

/// Dirichlet head data on the wells plus optional terms used by manufactured problems.
struct HeadProblem {
    SpatialFunction g;                  ///< head on S1 and S2; empty means zero
    SpatialFunction source;             ///< f in -div(B grad phi) = f; empty means zero
    /// Prescribed (B grad phi) . n_outward on S0, given the face center and face index.
    std::function<double(const std::array<double, 3>&, int)> neumann_flux;
};

struct HeadSolution {
    ScalarField phi;
    VectorField w_f;
    double max_divergence = 0.0;  ///< max |sum of face fluxes| / cell volume
    int iterations = 0;
};

HeadSolution solve_pressure_head(const ScalarField& r, const CoefficientTable& table, const ReservoirSpec& spec,
                                 double mu1, const HeadProblem& head = {}, const CgOptions& solver = {});

struct LameSolution {
    VectorField w_s;  ///< cell-averaged nodal displacement
    ScalarField p_s;  ///< p0 - c_s^2 div w_s at cell centers
    std::vector<double> nodal;  ///< interior-node displacements, 3 per node
    double energy = 0.0;        ///< w^T K w
    double work = 0.0;          ///< -integral grad p0 . w, equal to energy at convergence
    double relative_residual = 0.0;
    int iterations = 0;
};

/// Trilinear elements on the reservoir cells, nodes at cell corners, w_s = 0 on the boundary.
LameSolution solve_lame(const ScalarField& r, const CoefficientTable& table, const ReservoirSpec& spec, double lambda0,
                        double c_s, const CgOptions& solver = {});

struct DiffusionStep {
    ScalarField c;
    double storage_change = 0.0;  ///< sum V (m_new c_new - m_old c_old)
    double boundary_inflow = 0.0; ///< dt * sum over S1, S2 of the flux into Omega
    std::size_t clipped = 0;      ///< cells clipped back into [0, 1]
    int iterations = 0;
};

/// Backward-Euler step of d(m c)/dt = div(alpha_c B_c grad(c - c0)), c = c0 on S1 and S2,
/// zero flux on S0. Overshoot up to 1e-10 is clipped; larger overshoot throws
/// MaxPrincipleViolation.
DiffusionStep step_diffusion(const ScalarField& c_old, const ScalarField& r_old, const ScalarField& r_new, double dt,
                             const CoefficientTable& table, const ReservoirSpec& spec, double alpha_c,
                             const CgOptions& solver = {});

/// Time loop over r_history (one radius field per level, level 0 at t = 0). Returns one
/// concentration per level, c[0] = c_initial (c0 when empty).
std::vector<ScalarField> run_diffusion(const std::vector<ScalarField>& r_history, const ReservoirSpec& spec,
                                       const CoefficientTable& table, double alpha_c, double dt,
                                       const CgOptions& solver = {}, const ScalarField* c_initial = nullptr);

}  // namespace leach
