#include "leach/cell_problems.hpp"

#include "leach/cg.hpp"
#include "leach/elliptic.hpp"
#include "leach/errors.hpp"

#include <cmath>
#include <cstdint>
#include <string>

namespace leach {

namespace {

// Cell index shifted by `step` along `axis` with periodic wrap.
std::size_t shifted(const GridSpec& g, std::size_t cell, int axis, int step)
{
    auto c = g.ijk(cell);
    c[axis] = (c[axis] + step + g.n[axis]) % g.n[axis];
    return g.index(c[0], c[1], c[2]);
}

// Saddle-point pieces of the MAC discretization. Velocity unknowns are the
// faces not touching a solid voxel; pressure unknowns are fluid cells with at
// least one free face.
struct MacSystem {
    GridSpec grid;
    std::size_t cells = 0;
    std::vector<std::int64_t> unknown_of_face;  // 3 * cells, -1 when pinned
    std::vector<std::size_t> face_of_unknown;
    std::vector<std::int64_t> pressure_of_cell;
    std::vector<std::size_t> cell_of_pressure;
    // Pressure unknowns on the upper and lower side of each velocity unknown.
    std::vector<std::size_t> upper_pressure;
    std::vector<std::size_t> lower_pressure;
    LinearOperator velocity_op;
};

MacSystem build_mac_system(const UnitCellMask& mask, double viscosity)
{
    MacSystem s;
    s.grid = mask.grid;
    const GridSpec& g = s.grid;
    s.cells = g.size();
    const std::size_t nc = s.cells;

    s.unknown_of_face.assign(3 * nc, -1);
    for (int d = 0; d < 3; ++d)
        for (std::size_t c = 0; c < nc; ++c) {
            if (mask.solid[c] || mask.solid[shifted(g, c, d, -1)]) continue;
            s.unknown_of_face[d * nc + c] = static_cast<std::int64_t>(s.face_of_unknown.size());
            s.face_of_unknown.push_back(d * nc + c);
        }

    s.pressure_of_cell.assign(nc, -1);
    for (std::size_t c = 0; c < nc; ++c) {
        if (mask.solid[c]) continue;
        bool coupled = false;
        for (int d = 0; d < 3 && !coupled; ++d)
            coupled = s.unknown_of_face[d * nc + c] >= 0 || s.unknown_of_face[d * nc + shifted(g, c, d, 1)] >= 0;
        if (!coupled) continue;
        s.pressure_of_cell[c] = static_cast<std::int64_t>(s.cell_of_pressure.size());
        s.cell_of_pressure.push_back(c);
    }

    for (const std::size_t face : s.face_of_unknown) {
        const auto d = static_cast<int>(face / nc);
        const std::size_t c = face % nc;
        s.upper_pressure.push_back(static_cast<std::size_t>(s.pressure_of_cell[c]));
        s.lower_pressure.push_back(static_cast<std::size_t>(s.pressure_of_cell[shifted(g, c, d, -1)]));
    }

    // nu * (-Laplacian) per component, integrated over the face control volume.
    const double h = g.h[0];
    const std::size_t nu = s.face_of_unknown.size();
    std::vector<Triplet> entries;
    entries.reserve(7 * nu);
    for (std::size_t u = 0; u < nu; ++u) {
        const std::size_t face = s.face_of_unknown[u];
        const auto d = static_cast<int>(face / nc);
        const std::size_t c = face % nc;
        entries.push_back({u, u, 6.0 * viscosity * h});
        for (int e = 0; e < 3; ++e)
            for (int step : {-1, 1}) {
                const std::int64_t v = s.unknown_of_face[d * nc + shifted(g, c, e, step)];
                if (v >= 0) entries.push_back({u, static_cast<std::size_t>(v), -viscosity * h});
            }
    }
    s.velocity_op = LinearOperator::from_matrix(SparseMatrix::from_triplets(nu, nu, std::move(entries)));
    return s;
}

// Face forces from a pressure: h^2 (P_c - P_{c - e_d}).
void apply_gradient(const MacSystem& s, std::span<const double> p, std::span<double> out)
{
    const double area = s.grid.h[0] * s.grid.h[0];
    for (std::size_t u = 0; u < s.face_of_unknown.size(); ++u)
        out[u] = area * (p[s.upper_pressure[u]] - p[s.lower_pressure[u]]);
}

// Transpose of apply_gradient: -h^3 div(u) per coupled cell.
void apply_gradient_transpose(const MacSystem& s, std::span<const double> u, std::span<double> out)
{
    const double area = s.grid.h[0] * s.grid.h[0];
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < s.face_of_unknown.size(); ++k) {
        out[s.upper_pressure[k]] += area * u[k];
        out[s.lower_pressure[k]] -= area * u[k];
    }
}

}  // namespace

StokesCellSolution solve_stokes_cell(const UnitCellMask& mask, double mu1, const CellSolveOptions& options)
{
    if (!(mu1 > 0.0)) throw InvalidInput("solve_stokes_cell: mu1 must be positive");
    if (!fluid_connected(mask)) throw InvalidInput("solve_stokes_cell: fluid region is not connected");

    // D(W) is the symmetric gradient with the 1/2 factor, so for divergence-free
    // W the operator -div(mu1 D(W)) is -(mu1 / 2) Laplacian(W).
    const MacSystem s = build_mac_system(mask, 0.5 * mu1);
    const std::size_t nc = s.cells;
    const std::size_t nu = s.face_of_unknown.size();
    const std::size_t np = s.cell_of_pressure.size();
    const double h = s.grid.h[0];
    const double vol = h * h * h;

    // Saddle point [A G; G^T 0] on (velocity, pressure). The constant pressure
    // is its nullspace.
    const std::size_t dim = nu + np;
    std::vector<double> scratch(nu);
    std::vector<double> kernel(dim, 0.0);
    for (std::size_t p = nu; p < dim; ++p) kernel[p] = 1.0;
    LinearOperator saddle(
        dim,
        [&](std::span<const double> x, std::span<double> y) {
            s.velocity_op.apply(x.first(nu), y.first(nu));
            apply_gradient(s, x.subspan(nu), scratch);
            for (std::size_t u = 0; u < nu; ++u) y[u] += scratch[u];
            apply_gradient_transpose(s, x.first(nu), y.subspan(nu));
        },
        std::vector<double>(dim, 0.0), {kernel});

    const double viscosity = 0.5 * mu1;
    std::vector<double> precond(dim);
    const auto& adiag = s.velocity_op.diagonal();
    for (std::size_t u = 0; u < nu; ++u) precond[u] = 1.0 / adiag[u];
    for (std::size_t p = nu; p < dim; ++p) precond[p] = viscosity / vol;

    StokesCellSolution sol;
    sol.grid = s.grid;
    const CgOptions krylov{options.tol, options.max_iter};

    for (int i = 0; i < 3; ++i) {
        std::vector<double> rhs(dim, 0.0);
        for (std::size_t u = 0; u < nu; ++u)
            if (s.face_of_unknown[u] / nc == static_cast<std::size_t>(i)) rhs[u] = vol;

        const auto res = minres_solve(saddle, rhs, precond, krylov);
        sol.iterations += res.iterations;
        std::span<const double> vel(res.x.data(), nu);
        std::span<const double> pres(res.x.data() + nu, np);

        sol.velocity[i].assign(3 * nc, 0.0);
        for (std::size_t u = 0; u < nu; ++u) sol.velocity[i][s.face_of_unknown[u]] = vel[u];
        sol.pressure[i].assign(nc, 0.0);
        for (std::size_t p = 0; p < np; ++p) sol.pressure[i][s.cell_of_pressure[p]] = pres[p];

        for (std::size_t c = 0; c < nc; ++c) {
            double div = 0.0;
            for (int d = 0; d < 3; ++d)
                div += sol.velocity[i][d * nc + shifted(s.grid, c, d, 1)] - sol.velocity[i][d * nc + c];
            sol.max_divergence = std::max(sol.max_divergence, std::abs(div / h));
        }
        for (int j = 0; j < 3; ++j) {
            double b = 0.0;
            for (std::size_t c = 0; c < nc; ++c) b += sol.velocity[i][j * nc + c];
            sol.B_w(i, j) = b * vol;
        }
    }

    if (!sol.B_w.allFinite()) throw NumericalFailure("solve_stokes_cell: non-finite permeability");
    return sol;
}

}  // namespace leach
