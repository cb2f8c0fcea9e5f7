#include "leach/cell_problems.hpp"

#include "leach/cg.hpp"
#include "leach/elliptic.hpp"
#include "leach/errors.hpp"

#include <algorithm>
#include <cmath>

namespace leach {

namespace {

std::size_t upper_neighbor(const GridSpec& g, std::size_t cell, int axis)
{
    auto c = g.ijk(cell);
    c[axis] = (c[axis] + 1) % g.n[axis];
    return g.index(c[0], c[1], c[2]);
}

}  // namespace

DiffusionCellSolution solve_diffusion_cell(const UnitCellMask& mask, const CellSolveOptions& options)
{
    const GridSpec& g = mask.grid;
    const std::size_t nc = g.size();
    if (mask.solid_count() == nc) throw InvalidInput("solve_diffusion_cell: no fluid voxels");
    if (!fluid_connected(mask)) throw InvalidInput("solve_diffusion_cell: fluid region is not connected");
    const double h = g.h[0];
    const double vol = h * h * h;

    // Fluid-fluid faces per direction.
    std::array<std::size_t, 3> faces{0, 0, 0};
    for (std::size_t c = 0; c < nc; ++c) {
        if (mask.solid[c]) continue;
        for (int d = 0; d < 3; ++d)
            if (!mask.solid[upper_neighbor(g, c, d)]) ++faces[static_cast<std::size_t>(d)];
    }

    DiffusionCellSolution sol;
    sol.grid = g;
    // Face quadrature weights scaled so that the fluid measure integrates to m(r) exactly.
    std::array<double, 3> weight{};
    for (int d = 0; d < 3; ++d) {
        const auto f = faces[static_cast<std::size_t>(d)];
        if (f == 0) throw InvalidInput("solve_diffusion_cell: no fluid faces along an axis");
        sol.fluid_face_measure(d, d) = vol * static_cast<double>(f);
        weight[static_cast<std::size_t>(d)] = porosity(mask.r) / static_cast<double>(f);
    }

    Mat3 k = Mat3::Zero();
    for (int d = 0; d < 3; ++d) k(d, d) = weight[static_cast<std::size_t>(d)] / vol;
    std::vector<Mat3> coeff(nc, k);
    std::vector<std::uint8_t> active(nc);
    for (std::size_t c = 0; c < nc; ++c) active[c] = mask.solid[c] ? 0 : 1;
    const BoundarySpec bc{FaceCondition::Periodic, FaceCondition::Periodic, FaceCondition::Periodic,
                          FaceCondition::Periodic, FaceCondition::Periodic, FaceCondition::Periodic};
    const EllipticSystem sys = assemble_elliptic(g, coeff, bc, active);
    const std::size_t nu = sys.cell_of_unknown.size();

    const CgOptions cg{options.tol, options.max_iter};
    for (int i = 0; i < 3; ++i) {
        // Stationarity of sum_f w_f (dC/h + delta_{d,i})^2.
        std::vector<double> rhs(nu, 0.0);
        const double load = weight[static_cast<std::size_t>(i)] / h;
        for (std::size_t c = 0; c < nc; ++c) {
            if (mask.solid[c]) continue;
            const std::size_t q = upper_neighbor(g, c, i);
            if (mask.solid[q]) continue;
            rhs[static_cast<std::size_t>(sys.unknown_of_cell[c])] += load;
            rhs[static_cast<std::size_t>(sys.unknown_of_cell[q])] -= load;
        }
        const auto res = cg_solve(sys.op, rhs, cg);
        sol.corrector[static_cast<std::size_t>(i)].assign(nc, 0.0);
        for (std::size_t u = 0; u < nu; ++u) sol.corrector[static_cast<std::size_t>(i)][sys.cell_of_unknown[u]] = res.x[u];
    }

    for (std::size_t c = 0; c < nc; ++c) {
        if (mask.solid[c]) continue;
        for (int d = 0; d < 3; ++d) {
            const std::size_t q = upper_neighbor(g, c, d);
            if (mask.solid[q]) continue;
            const double w = weight[static_cast<std::size_t>(d)];
            Vec3 grad;
            for (int i = 0; i < 3; ++i)
                grad[i] = (sol.corrector[static_cast<std::size_t>(i)][q] - sol.corrector[static_cast<std::size_t>(i)][c]) / h;
            Vec3 total = grad;
            total[d] += 1.0;
            sol.B_c_quadratic += w * grad * grad.transpose();
            sol.B_c_energy += w * total * total.transpose();
        }
    }
    sol.B_c_quadratic = 0.5 * (sol.B_c_quadratic + sol.B_c_quadratic.transpose()).eval();
    sol.B_c_energy = 0.5 * (sol.B_c_energy + sol.B_c_energy.transpose()).eval();
    if (!sol.B_c_energy.allFinite()) throw NumericalFailure("solve_diffusion_cell: non-finite diffusivity");
    return sol;
}

double richardson_extrapolate(double coarse, double medium, double fine)
{
    const double d1 = coarse - medium;
    const double d2 = medium - fine;
    if (d2 == 0.0) return fine;
    double order = 1.0;
    const double ratio = d1 / d2;
    if (ratio > 0.0) order = std::clamp(std::log2(ratio), 1.0, 2.0);
    return fine - d2 / (std::pow(2.0, order) - 1.0);
}

}  // namespace leach
