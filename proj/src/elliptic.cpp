#include "leach/elliptic.hpp"

#include "leach/errors.hpp"

#include <string>

namespace leach {

std::optional<std::size_t> neighbor(const GridSpec& grid, std::size_t cell, int face)
{
    auto c = grid.ijk(cell);
    const int axis = face_axis(face);
    c[axis] += face_side(face);
    if (c[axis] < 0 || c[axis] >= grid.n[axis]) {
        if (!grid.periodic[axis]) return std::nullopt;
        c[axis] = (c[axis] + grid.n[axis]) % grid.n[axis];
    }
    return grid.index(c[0], c[1], c[2]);
}

double face_transmissibility(const GridSpec& grid, const Mat3& kp, const Mat3& kq, int axis)
{
    const double area = grid.cell_volume() / grid.h[axis];
    const double a = kp(axis, axis);
    const double b = kq(axis, axis);
    const double harmonic = (a + b) > 0.0 ? 2.0 * a * b / (a + b) : 0.0;
    return harmonic * area / grid.h[axis];
}

EllipticSystem assemble_elliptic(const GridSpec& grid, std::span<const Mat3> coeff, const BoundarySpec& bc,
                                 std::span<const std::uint8_t> active)
{
    grid.validate();
    const std::size_t ncells = grid.size();
    if (coeff.size() != ncells) throw InvalidInput("assemble_elliptic: coefficient count does not match grid");
    if (!active.empty() && active.size() != ncells)
        throw InvalidInput("assemble_elliptic: active mask size does not match grid");

    for (int f = 0; f < 6; ++f) {
        const bool periodic_tag = bc[f] == FaceCondition::Periodic;
        if (periodic_tag != grid.periodic[face_axis(f)])
            throw InvalidInput("assemble_elliptic: boundary tag of face " + std::to_string(f) +
                               " inconsistent with grid periodicity");
    }

    EllipticSystem sys;
    sys.unknown_of_cell.assign(ncells, -1);
    for (std::size_t c = 0; c < ncells; ++c) {
        if (!active.empty() && !active[c]) continue;
        if (!is_spd(coeff[c]))
            throw InvalidInput("assemble_elliptic: coefficient of cell " + std::to_string(c) +
                               " is not symmetric positive definite");
        sys.unknown_of_cell[c] = static_cast<std::int64_t>(sys.cell_of_unknown.size());
        sys.cell_of_unknown.push_back(c);
    }
    const std::size_t nu = sys.cell_of_unknown.size();

    std::vector<Triplet> entries;
    entries.reserve(7 * nu);
    for (std::size_t u = 0; u < nu; ++u) {
        const std::size_t c = sys.cell_of_unknown[u];
        double diag = 0.0;
        for (int f = 0; f < 6; ++f) {
            const int axis = face_axis(f);
            const auto nb = neighbor(grid, c, f);
            if (nb) {
                const std::int64_t v = sys.unknown_of_cell[*nb];
                if (v < 0) continue;
                const double t = face_transmissibility(grid, coeff[c], coeff[*nb], axis);
                diag += t;
                entries.push_back({u, static_cast<std::size_t>(v), -t});
            } else if (bc[f] == FaceCondition::Dirichlet) {
                const double area = grid.cell_volume() / grid.h[axis];
                const double t = coeff[c](axis, axis) * area / (0.5 * grid.h[axis]);
                diag += t;
                sys.dirichlet_faces.push_back({u, c, f, t});
            }
        }
        entries.push_back({u, u, diag});
    }

    std::vector<std::vector<double>> nullspace;
    if (sys.dirichlet_faces.empty() && nu > 0) nullspace.emplace_back(nu, 1.0);
    sys.op = LinearOperator::from_matrix(SparseMatrix::from_triplets(nu, nu, std::move(entries)), std::move(nullspace));
    return sys;
}

}  // namespace leach
