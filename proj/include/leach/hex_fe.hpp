#pragma once

#include "leach/linalg.hpp"
#include "leach/sparse.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace leach {

using StrainMatrix = Eigen::Matrix<double, 6, 24>;
using HexMatrix = Eigen::Matrix<double, 24, 24>;
using HexVector = Eigen::Matrix<double, 24, 1>;

/// Trilinear hexahedron of edge h with 2x2x2 Gauss quadrature.
///
/// Local node a has offsets (a & 1, (a >> 1) & 1, (a >> 2) & 1); element dofs
/// are ordered (node, component). Strain rows are Voigt with engineering
/// shears (e11, e22, e33, 2 e23, 2 e13, 2 e12), so e^T C e is the energy
/// density for a Voigt6 of plain tensor components.
struct HexQuadrature {
    double h = 1.0;
    double weight = 0.0;  ///< quadrature weight times Jacobian, same for all points
    std::array<StrainMatrix, 8> strain;
    std::array<std::array<double, 8>, 8> shape;        ///< shape[p][a] = N_a at point p
    std::array<std::array<Vec3, 8>, 8> shape_gradient;  ///< grad N_a at point p
    StrainMatrix center_strain;  ///< strain operator at the element center
};

HexQuadrature hex_quadrature(double h);

/// lambda0 E:E + cs2 (tr E)^2 as a Voigt6.
Voigt6 isotropic_tensor(double lambda0, double cs2);

HexMatrix hex_stiffness(const HexQuadrature& q, const Voigt6& c);

/// Assembled vector-valued Q1 stiffness on a lattice of nodes.
///
/// `node_unknown[node]` is the block index of a free node or -1 for a node
/// that is either absent or held at zero. Element e is identified by the
/// lattice index of its lowest corner node; `element_matrix(e, out)` fills
/// its 24x24 matrix. Rows for block b are 3b, 3b+1, 3b+2.
SparseMatrix assemble_hex_stiffness(const std::array<int, 3>& node_dims, std::span<const std::size_t> elements,
                                    std::span<const std::int64_t> node_unknown, std::size_t blocks,
                                    const std::function<void(std::size_t, HexMatrix&)>& element_matrix);

/// Lattice index of local node a of the element whose lowest corner is `base`.
inline std::size_t hex_node(const std::array<int, 3>& node_dims, std::size_t base, int a)
{
    const std::size_t nx = static_cast<std::size_t>(node_dims[0]);
    const std::size_t nxy = nx * static_cast<std::size_t>(node_dims[1]);
    return base + static_cast<std::size_t>(a & 1) + nx * static_cast<std::size_t>((a >> 1) & 1) +
           nxy * static_cast<std::size_t>((a >> 2) & 1);
}

}  // namespace leach
