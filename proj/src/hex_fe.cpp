#include "leach/hex_fe.hpp"

#include "leach/errors.hpp"

#include <algorithm>
#include <cmath>

namespace leach {

namespace {

StrainMatrix strain_at(double h, const std::array<double, 3>& xi)
{
    StrainMatrix b = StrainMatrix::Zero();
    for (int a = 0; a < 8; ++a) {
        const std::array<double, 3> s{(a & 1) ? 1.0 : -1.0, ((a >> 1) & 1) ? 1.0 : -1.0, ((a >> 2) & 1) ? 1.0 : -1.0};
        // N_a = prod (1 + s_d xi_d) / 2 on [-1, 1]^3, d/dx = (2/h) d/dxi
        std::array<double, 3> g{};
        for (int d = 0; d < 3; ++d) {
            double v = 0.5 * s[d];
            for (int e = 0; e < 3; ++e)
                if (e != d) v *= 0.5 * (1.0 + s[e] * xi[e]);
            g[d] = v * 2.0 / h;
        }
        const int col = 3 * a;
        b(0, col + 0) = g[0];
        b(1, col + 1) = g[1];
        b(2, col + 2) = g[2];
        b(3, col + 1) = g[2];
        b(3, col + 2) = g[1];
        b(4, col + 0) = g[2];
        b(4, col + 2) = g[0];
        b(5, col + 0) = g[1];
        b(5, col + 1) = g[0];
    }
    return b;
}

}  // namespace

HexQuadrature hex_quadrature(double h)
{
    HexQuadrature q;
    q.h = h;
    const double gp = 1.0 / std::sqrt(3.0);
    for (int p = 0; p < 8; ++p) {
        const std::array<double, 3> xi{(p & 1) ? gp : -gp, ((p >> 1) & 1) ? gp : -gp, ((p >> 2) & 1) ? gp : -gp};
        const auto pp = static_cast<std::size_t>(p);
        q.strain[pp] = strain_at(h, xi);
        for (int a = 0; a < 8; ++a) {
            const auto aa = static_cast<std::size_t>(a);
            double v = 1.0;
            for (int d = 0; d < 3; ++d) v *= 0.5 * (1.0 + (((a >> d) & 1) ? 1.0 : -1.0) * xi[static_cast<std::size_t>(d)]);
            q.shape[pp][aa] = v;
            q.shape_gradient[pp][aa] = Vec3(q.strain[pp](0, 3 * a), q.strain[pp](1, 3 * a + 1), q.strain[pp](2, 3 * a + 2));
        }
    }
    q.weight = h * h * h / 8.0;
    q.center_strain = strain_at(h, {0.0, 0.0, 0.0});
    return q;
}

Voigt6 isotropic_tensor(double lambda0, double cs2)
{
    Voigt6 c = Voigt6::Zero();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) c(i, j) = cs2;
        c(i, i) += lambda0;
        c(i + 3, i + 3) = 0.5 * lambda0;
    }
    return c;
}

HexMatrix hex_stiffness(const HexQuadrature& q, const Voigt6& c)
{
    HexMatrix k = HexMatrix::Zero();
    for (const auto& b : q.strain) k.noalias() += q.weight * b.transpose() * c * b;
    return k;
}

SparseMatrix assemble_hex_stiffness(const std::array<int, 3>& node_dims, std::span<const std::size_t> elements,
                                    std::span<const std::int64_t> node_unknown, std::size_t blocks,
                                    const std::function<void(std::size_t, HexMatrix&)>& element_matrix)
{
    const std::size_t nx = static_cast<std::size_t>(node_dims[0]);
    const std::size_t ny = static_cast<std::size_t>(node_dims[1]);
    const std::size_t nz = static_cast<std::size_t>(node_dims[2]);
    if (node_unknown.size() != nx * ny * nz) throw InvalidInput("hex assembly: node map size mismatch");

    std::vector<std::size_t> node_of_block(blocks);
    for (std::size_t node = 0; node < node_unknown.size(); ++node)
        if (node_unknown[node] >= 0) node_of_block[static_cast<std::size_t>(node_unknown[node])] = node;

    // Sparsity: 27-point node neighborhood. Slot s = (dx+1) + 3(dy+1) + 9(dz+1)
    // enumerates neighbors in ascending lattice order.
    std::vector<std::array<std::int32_t, 27>> slot(blocks);
    std::vector<std::size_t> row_ptr(3 * blocks + 1, 0);
    std::vector<std::size_t> neighbor_count(blocks, 0);
    std::vector<std::size_t> col;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t node = node_of_block[b];
        const auto i = static_cast<std::int64_t>(node % nx);
        const auto j = static_cast<std::int64_t>((node / nx) % ny);
        const auto k = static_cast<std::int64_t>(node / (nx * ny));
        std::int32_t count = 0;
        for (int s = 0; s < 27; ++s) {
            const std::int64_t ii = i + s % 3 - 1, jj = j + (s / 3) % 3 - 1, kk = k + s / 9 - 1;
            slot[b][static_cast<std::size_t>(s)] = -1;
            if (ii < 0 || jj < 0 || kk < 0 || ii >= static_cast<std::int64_t>(nx) ||
                jj >= static_cast<std::int64_t>(ny) || kk >= static_cast<std::int64_t>(nz))
                continue;
            const std::size_t other = static_cast<std::size_t>(ii) + nx * (static_cast<std::size_t>(jj) + ny * static_cast<std::size_t>(kk));
            if (node_unknown[other] < 0) continue;
            slot[b][static_cast<std::size_t>(s)] = count++;
        }
        neighbor_count[b] = static_cast<std::size_t>(count);
    }
    for (std::size_t b = 0; b < blocks; ++b)
        for (int c = 0; c < 3; ++c) row_ptr[3 * b + c + 1] = row_ptr[3 * b + c] + 3 * neighbor_count[b];
    const std::size_t nnz = row_ptr.back();
    col.resize(nnz);
    std::vector<double> val(nnz, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t node = node_of_block[b];
        const auto i = static_cast<std::int64_t>(node % nx);
        const auto j = static_cast<std::int64_t>((node / nx) % ny);
        const auto k = static_cast<std::int64_t>(node / (nx * ny));
        for (int s = 0; s < 27; ++s) {
            const std::int32_t pos = slot[b][static_cast<std::size_t>(s)];
            if (pos < 0) continue;
            const std::size_t other = static_cast<std::size_t>(i + s % 3 - 1) +
                                      nx * (static_cast<std::size_t>(j + (s / 3) % 3 - 1) +
                                            ny * static_cast<std::size_t>(k + s / 9 - 1));
            const auto ob = static_cast<std::size_t>(node_unknown[other]);
            for (int c = 0; c < 3; ++c)
                for (int d = 0; d < 3; ++d) col[row_ptr[3 * b + c] + 3 * static_cast<std::size_t>(pos) + d] = 3 * ob + d;
        }
    }

    HexMatrix ke;
    std::array<std::int64_t, 8> blk{};
    for (const std::size_t base : elements) {
        for (int a = 0; a < 8; ++a) blk[static_cast<std::size_t>(a)] = node_unknown[hex_node(node_dims, base, a)];
        element_matrix(base, ke);
        for (int a = 0; a < 8; ++a) {
            if (blk[static_cast<std::size_t>(a)] < 0) continue;
            const auto ba = static_cast<std::size_t>(blk[static_cast<std::size_t>(a)]);
            for (int bnode = 0; bnode < 8; ++bnode) {
                if (blk[static_cast<std::size_t>(bnode)] < 0) continue;
                // Offset of local node bnode relative to a, as a 27-slot.
                const int dx = (bnode & 1) - (a & 1), dy = ((bnode >> 1) & 1) - ((a >> 1) & 1),
                          dz = ((bnode >> 2) & 1) - ((a >> 2) & 1);
                const int s = (dx + 1) + 3 * (dy + 1) + 9 * (dz + 1);
                const auto pos = static_cast<std::size_t>(slot[ba][static_cast<std::size_t>(s)]);
                for (int c = 0; c < 3; ++c)
                    for (int d = 0; d < 3; ++d)
                        val[row_ptr[3 * ba + c] + 3 * pos + d] += ke(3 * a + c, 3 * bnode + d);
            }
        }
    }
    return SparseMatrix::from_csr(3 * blocks, 3 * blocks, std::move(row_ptr), std::move(col), std::move(val));
}

}  // namespace leach
