#pragma once

#include <Eigen/Dense>

#include <array>

namespace leach {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
/// Fourth-rank tensor with minor symmetries stored in Voigt order
/// (11, 22, 33, 23, 13, 12); entries are plain tensor components C_ijkl.
using Voigt6 = Eigen::Matrix<double, 6, 6>;

/// Voigt index of the symmetric pair (i, j), 0-based.
inline int voigt_index(int i, int j)
{
    if (i == j) return i;
    const int s = i + j;  // (1,2)->3, (0,2)->4, (0,1)->5
    return s == 3 ? 3 : (s == 2 ? 4 : 5);
}

/// Inverse of voigt_index.
inline std::array<int, 2> voigt_pair(int v)
{
    static constexpr std::array<std::array<int, 2>, 6> pairs{{{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}}};
    return pairs[static_cast<std::size_t>(v)];
}

/// max |A - A^T| / max |A| (0 for the zero matrix).
double relative_asymmetry(const Mat3& a);
double relative_asymmetry(const Voigt6& a);

/// Smallest eigenvalue of the symmetric part.
double min_eigenvalue(const Mat3& a);
double max_eigenvalue(const Mat3& a);

/// Smallest eigenvalue of the tensor as a quadratic form on symmetric matrices.
/// Off-diagonal Voigt slots carry weight 2 in the double contraction, so the
/// form is evaluated in the orthonormal Mandel basis.
double min_eigenvalue_on_symmetric(const Voigt6& c);

/// Double contraction E : C : E for a symmetric strain E.
double quadratic_form(const Voigt6& c, const Mat3& e);

/// True when A is symmetric positive definite (Cholesky of the symmetric part succeeds).
bool is_spd(const Mat3& a);

}  // namespace leach
