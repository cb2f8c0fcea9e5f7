#pragma once

#include "leach/sparse.hpp"

#include <span>
#include <vector>

namespace leach {

struct CgOptions {
    double tol = 1e-10;  ///< relative residual ||Ax - b|| / ||b||
    int max_iter = 20000;
};

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients.
///
/// For an operator with a nullspace, b is projected onto its orthogonal
/// complement before the solve and x after it, so the returned x is orthogonal
/// to the stored basis. The residual contract is checked on the true residual,
/// not the recurrence. Throws NonConvergence or NumericalFailure.
CgResult cg_solve(const LinearOperator& a, std::span<const double> b, const CgOptions& options = {},
                  std::span<const double> initial_guess = {});

/// Preconditioned MINRES for symmetric indefinite systems (saddle points).
///
/// `inverse_preconditioner` is the diagonal of an SPD preconditioner inverse.
/// Same residual contract and nullspace handling as cg_solve.
CgResult minres_solve(const LinearOperator& a, std::span<const double> b, std::span<const double> inverse_preconditioner,
                      const CgOptions& options = {}, std::span<const double> initial_guess = {});

}  // namespace leach
