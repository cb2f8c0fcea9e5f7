#include "leach/cell_problems.hpp"

#include "leach/cg.hpp"
#include "leach/errors.hpp"
#include "leach/hex_fe.hpp"

#include <cmath>

namespace leach {

ElasticCellSolution solve_elasticity_cell(const UnitCellMask& mask, double lambda0, double c_s,
                                          const ElasticCellOptions& options)
{
    if (!(lambda0 > 0.0) || !(c_s > 0.0)) throw InvalidInput("solve_elasticity_cell: lambda0 and c_s must be positive");
    const GridSpec& g = mask.grid;
    const int n = g.n[0];
    const double h = g.h[0];
    const std::size_t nc = g.size();

    std::vector<std::size_t> elements;
    const std::array<int, 3> dims{n + 1, n + 1, n + 1};
    const std::size_t nn = static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(n + 1);
    std::vector<std::int64_t> node_unknown(nn, -1);
    for (std::size_t c = 0; c < nc; ++c) {
        if (!mask.solid[c]) continue;
        const auto [i, j, k] = g.ijk(c);
        if (i == 0 || j == 0 || k == 0 || i == n - 1 || j == n - 1 || k == n - 1)
            throw InvalidInput("solve_elasticity_cell: grain touches the cell boundary");
        const std::size_t base = static_cast<std::size_t>(i) + static_cast<std::size_t>(n + 1) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(k));
        elements.push_back(base);
        for (int a = 0; a < 8; ++a) node_unknown[hex_node(dims, base, a)] = 0;
    }
    if (elements.empty()) throw InvalidInput("solve_elasticity_cell: no solid voxels at this resolution");

    ElasticCellSolution sol;
    sol.grid = g;
    for (std::size_t node = 0; node < nn; ++node)
        if (node_unknown[node] >= 0) {
            node_unknown[node] = static_cast<std::int64_t>(sol.node_of_dof_block.size());
            sol.node_of_dof_block.push_back(node);
        }
    const std::size_t blocks = sol.node_of_dof_block.size();
    const std::size_t dim = 3 * blocks;

    auto position = [&](std::size_t node) {
        const std::size_t m = static_cast<std::size_t>(n + 1);
        return Vec3(-0.5 + h * static_cast<double>(node % m), -0.5 + h * static_cast<double>((node / m) % m),
                    -0.5 + h * static_cast<double>(node / (m * m)));
    };

    // Translations and infinitesimal rotations.
    std::vector<std::vector<double>> rigid(6, std::vector<double>(dim, 0.0));
    for (std::size_t b = 0; b < blocks; ++b) {
        const Vec3 y = position(sol.node_of_dof_block[b]);
        for (int d = 0; d < 3; ++d) {
            rigid[static_cast<std::size_t>(d)][3 * b + d] = 1.0;
            const Vec3 rot = Vec3::Unit(d).cross(y);
            for (int e = 0; e < 3; ++e) rigid[static_cast<std::size_t>(3 + d)][3 * b + e] = rot[e];
        }
    }

    const HexQuadrature quad = hex_quadrature(h);
    const Voigt6 c = isotropic_tensor(lambda0, c_s * c_s);
    const HexMatrix ke = hex_stiffness(quad, c);
    SparseMatrix k = assemble_hex_stiffness(dims, elements, node_unknown, blocks,
                                            [&](std::size_t, HexMatrix& out) { out = ke; });
    const LinearOperator op = LinearOperator::from_matrix(std::move(k), orthonormalize(rigid));

    // Element load per unit strain: -sum_gp w B^T C e_v.
    Eigen::Matrix<double, 24, 6> load = Eigen::Matrix<double, 24, 6>::Zero();
    for (const auto& bm : quad.strain) load -= quad.weight * bm.transpose() * c;
    const double strain_scale = options.zero_forcing ? 0.0 : 1.0;

    const CgOptions cg{options.solve.tol, options.solve.max_iter};
    for (int v = 0; v < 6; ++v) {
        std::vector<double> rhs(dim, 0.0);
        for (const std::size_t base : elements)
            for (int a = 0; a < 8; ++a) {
                const auto blk = static_cast<std::size_t>(node_unknown[hex_node(dims, base, a)]);
                for (int d = 0; d < 3; ++d) rhs[3 * blk + d] += strain_scale * load(3 * a + d, v);
            }
        const double bnorm = norm2(rhs);
        std::vector<double> projected = rhs;
        op.project_out_nullspace(projected);
        double incompatible = 0.0;
        for (std::size_t i = 0; i < dim; ++i) incompatible = std::max(incompatible, std::abs(projected[i] - rhs[i]));
        if (bnorm > 0.0 && incompatible > 1e-8 * norm_inf(rhs))
            throw NumericalFailure("solve_elasticity_cell: load has a rigid-motion component");
        sol.displacement[static_cast<std::size_t>(v)] = cg_solve(op, projected, cg).x;
    }

    // Quadrature of the energy and of the corrector-only tensor.
    std::array<HexVector, 6> ue;
    for (const std::size_t base : elements) {
        for (int v = 0; v < 6; ++v)
            for (int a = 0; a < 8; ++a) {
                const auto blk = static_cast<std::size_t>(node_unknown[hex_node(dims, base, a)]);
                for (int d = 0; d < 3; ++d) ue[static_cast<std::size_t>(v)][3 * a + d] = sol.displacement[static_cast<std::size_t>(v)][3 * blk + d];
            }
        for (const auto& bm : quad.strain) {
            Eigen::Matrix<double, 6, 6> eps;  // column v: engineering strain of corrector v
            for (int v = 0; v < 6; ++v) eps.col(v) = bm * ue[static_cast<std::size_t>(v)];
            Eigen::Matrix<double, 6, 6> total = eps;
            total.diagonal().array() += strain_scale;
            sol.N_energy += quad.weight * total.transpose() * c * total;

            // Plain components of D(W^v); off-diagonal pairs appear twice in the sum over (i, j).
            Eigen::Matrix<double, 6, 6> plain = eps;
            plain.bottomRows(3) *= 0.5;
            for (int v = 0; v < 6; ++v) {
                const double multiplicity = v < 3 ? 1.0 : 2.0;
                sol.N_paper += lambda0 * quad.weight * multiplicity * plain.col(v) * plain.col(v).transpose();
            }
        }
    }
    sol.N_energy = 0.5 * (sol.N_energy + sol.N_energy.transpose()).eval();

    const double count = static_cast<double>(blocks);
    for (int v = 0; v < 6; ++v) {
        Vec3 mean = Vec3::Zero();
        Vec3 rot = Vec3::Zero();
        for (std::size_t b = 0; b < blocks; ++b) {
            const Vec3 u(sol.displacement[static_cast<std::size_t>(v)][3 * b], sol.displacement[static_cast<std::size_t>(v)][3 * b + 1],
                         sol.displacement[static_cast<std::size_t>(v)][3 * b + 2]);
            mean += u;
            rot += position(sol.node_of_dof_block[b]).cross(u);
        }
        sol.max_mean_displacement = std::max(sol.max_mean_displacement, mean.cwiseAbs().maxCoeff() / count);
        sol.max_mean_rotation = std::max(sol.max_mean_rotation, rot.cwiseAbs().maxCoeff() / count);
    }
    if (!sol.N_energy.allFinite() || !sol.N_paper.allFinite())
        throw NumericalFailure("solve_elasticity_cell: non-finite stiffness");
    return sol;
}

}  // namespace leach
