#pragma once

#include "leach/grid.hpp"
#include "leach/linalg.hpp"
#include "leach/sparse.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace leach {

enum class FaceCondition { Dirichlet, Neumann, Periodic };

/// Face order: -x, +x, -y, +y, -z, +z.
using BoundarySpec = std::array<FaceCondition, 6>;

constexpr int face_axis(int face) { return face / 2; }
constexpr int face_side(int face) { return face % 2 == 0 ? -1 : 1; }

/// Neighbor across `face`, wrapping periodic axes; empty on a physical boundary.
std::optional<std::size_t> neighbor(const GridSpec& grid, std::size_t cell, int face);

struct DirichletFace {
    std::size_t unknown;
    std::size_t cell;
    int face;
    double transmissibility;  ///< coefficient * area / (h/2)
};

/// Two-point flux finite-volume discretization of -div(K grad u).
///
/// Rows are integrated over cells (units of volume). Dirichlet faces are
/// eliminated with a half-cell ghost, so the operator stays symmetric and the
/// caller adds transmissibility * g to the right-hand side.
struct EllipticSystem {
    LinearOperator op;
    std::vector<DirichletFace> dirichlet_faces;
    std::vector<std::size_t> cell_of_unknown;
    std::vector<std::int64_t> unknown_of_cell;  ///< -1 for inactive cells
};

/// Harmonic mean of the normal coefficients of the two cells, times area over distance.
double face_transmissibility(const GridSpec& grid, const Mat3& kp, const Mat3& kq, int axis);

/// Assemble -div(K grad .) on the active cells of `grid`.
///
/// Face coefficients use the normal-normal entry of K with harmonic averaging;
/// off-diagonal entries do not enter the seven-point stencil. Faces towards
/// inactive cells carry no flux. With no Dirichlet face the constant vector
/// over the active cells is registered as the nullspace.
///
/// Throws InvalidInput for a non-SPD cell coefficient or for a boundary spec
/// inconsistent with the grid periodicity.
EllipticSystem assemble_elliptic(const GridSpec& grid, std::span<const Mat3> coeff, const BoundarySpec& bc,
                                 std::span<const std::uint8_t> active = {});

}  // namespace leach
