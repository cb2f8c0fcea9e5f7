#include "leach/cg.hpp"

#include "leach/errors.hpp"

#include <cmath>
#include <string>

namespace leach {

namespace {

bool finite(double v) { return std::isfinite(v); }

void true_residual(const LinearOperator& a, std::span<const double> b, std::span<const double> x,
                   std::vector<double>& r)
{
    a.apply(x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
}

}  // namespace

CgResult cg_solve(const LinearOperator& a, std::span<const double> b_in, const CgOptions& options,
                  std::span<const double> initial_guess)
{
    const std::size_t n = a.dim();
    if (b_in.size() != n) throw InvalidInput("cg: right-hand side size mismatch");
    if (!initial_guess.empty() && initial_guess.size() != n) throw InvalidInput("cg: initial guess size mismatch");

    std::vector<double> b(b_in.begin(), b_in.end());
    a.project_out_nullspace(b);

    CgResult result;
    result.x.assign(n, 0.0);
    if (!initial_guess.empty()) {
        result.x.assign(initial_guess.begin(), initial_guess.end());
        a.project_out_nullspace(result.x);
    }

    const double bnorm = norm2(b);
    if (!finite(bnorm)) throw NumericalFailure("cg: non-finite right-hand side");
    if (bnorm == 0.0) {
        result.x.assign(n, 0.0);
        return result;
    }

    std::vector<double> inv_diag(n);
    const auto& diag = a.diagonal();
    for (std::size_t i = 0; i < n; ++i) inv_diag[i] = diag[i] > 0.0 ? 1.0 / diag[i] : 1.0;

    std::vector<double> r(n), z(n), p(n), q(n);
    auto& x = result.x;
    true_residual(a, b, x, r);

    const double target = options.tol * bnorm;
    int it = 0;
    int restart_at = -1;
    // Outer loop restarts from the true residual whenever the recurrence
    // claims convergence that the true residual does not confirm.
    for (;;) {
        a.project_out_nullspace(r);
        double rnorm = norm2(r);
        if (!finite(rnorm)) throw NumericalFailure("cg: NaN encountered in residual");
        if (rnorm <= target) {
            result.iterations = it;
            result.relative_residual = rnorm / bnorm;
            a.project_out_nullspace(x);
            return result;
        }

        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        a.project_out_nullspace(z);
        p = z;
        double rz = dot(r, z);

        while (it < options.max_iter) {
            a.apply(p, q);
            const double pq = dot(p, q);
            if (!finite(pq)) throw NumericalFailure("cg: NaN encountered in matrix-vector product");
            if (pq <= 0.0) break;  // lost positive definiteness on this direction; restart
            const double alpha = rz / pq;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            ++it;
            rnorm = norm2(r);
            if (!finite(rnorm)) throw NumericalFailure("cg: NaN encountered in residual");
            if (rnorm <= 0.5 * target) break;
            for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
            a.project_out_nullspace(z);
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }

        a.project_out_nullspace(x);
        true_residual(a, b, x, r);
        a.project_out_nullspace(r);
        rnorm = norm2(r);
        if (rnorm <= target) {
            result.iterations = it;
            result.relative_residual = rnorm / bnorm;
            return result;
        }
        if (it >= options.max_iter)
            throw NonConvergence("cg: no convergence after " + std::to_string(it) +
                                     " iterations, relative residual " + std::to_string(rnorm / bnorm),
                                 rnorm / bnorm, it);
        if (it == restart_at)
            throw NumericalFailure("cg: operator is not positive definite on the search space");
        restart_at = it;
    }
}

}  // namespace leach

namespace leach {

CgResult minres_solve(const LinearOperator& a, std::span<const double> b_in, std::span<const double> inverse_preconditioner,
                      const CgOptions& options, std::span<const double> initial_guess)
{
    const std::size_t n = a.dim();
    if (b_in.size() != n || inverse_preconditioner.size() != n) throw InvalidInput("minres: size mismatch");
    if (!initial_guess.empty() && initial_guess.size() != n) throw InvalidInput("minres: initial guess size mismatch");

    std::vector<double> b(b_in.begin(), b_in.end());
    a.project_out_nullspace(b);

    CgResult result;
    result.x.assign(n, 0.0);
    if (!initial_guess.empty()) result.x.assign(initial_guess.begin(), initial_guess.end());
    auto& x = result.x;

    const double bnorm = norm2(b);
    if (!std::isfinite(bnorm)) throw NumericalFailure("minres: non-finite right-hand side");
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        return result;
    }
    const double target = options.tol * bnorm;

    std::vector<double> v_old(n), v(n), v_new(n), z(n), z_new(n), w_old(n), w(n), w_new(n), az(n);
    int it = 0;
    int restart_at = -1;
    for (;;) {
        true_residual(a, b, x, v);
        a.project_out_nullspace(v);
        const double rnorm = norm2(v);
        if (!std::isfinite(rnorm)) throw NumericalFailure("minres: NaN encountered in residual");
        if (rnorm <= target) {
            a.project_out_nullspace(x);
            result.iterations = it;
            result.relative_residual = rnorm / bnorm;
            return result;
        }
        if (it >= options.max_iter)
            throw NonConvergence("minres: no convergence after " + std::to_string(it) +
                                     " iterations, relative residual " + std::to_string(rnorm / bnorm),
                                 rnorm / bnorm, it);
        if (it == restart_at) throw NumericalFailure("minres: stagnation");
        restart_at = it;

        // Paige-Saunders recurrences in the preconditioned Lanczos basis.
        std::fill(v_old.begin(), v_old.end(), 0.0);
        std::fill(w_old.begin(), w_old.end(), 0.0);
        std::fill(w.begin(), w.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) z[i] = inverse_preconditioner[i] * v[i];
        double gamma = std::sqrt(dot(z, v));
        double gamma_old = 1.0;
        double eta = gamma;
        double s_old = 0.0, s = 0.0, c_old = 1.0, c = 1.0;
        // The recurrence estimate is in the preconditioner norm; scale it to the
        // Euclidean residual observed at restart.
        const double scale = rnorm / gamma;

        while (it < options.max_iter) {
            for (std::size_t i = 0; i < n; ++i) z[i] /= gamma;
            a.apply(z, az);
            const double delta = dot(az, z);
            for (std::size_t i = 0; i < n; ++i)
                v_new[i] = az[i] - (delta / gamma) * v[i] - (gamma / gamma_old) * v_old[i];
            for (std::size_t i = 0; i < n; ++i) z_new[i] = inverse_preconditioner[i] * v_new[i];
            const double gamma_new = std::sqrt(std::max(dot(z_new, v_new), 0.0));
            if (!std::isfinite(gamma_new) || !std::isfinite(delta))
                throw NumericalFailure("minres: NaN encountered in Lanczos recurrence");

            const double a0 = c * delta - c_old * s * gamma;
            const double a1 = std::sqrt(a0 * a0 + gamma_new * gamma_new);
            const double a2 = s * delta + c_old * c * gamma;
            const double a3 = s_old * gamma;
            if (a1 == 0.0) break;
            const double c_new = a0 / a1;
            const double s_new = gamma_new / a1;
            for (std::size_t i = 0; i < n; ++i) w_new[i] = (z[i] - a3 * w_old[i] - a2 * w[i]) / a1;
            for (std::size_t i = 0; i < n; ++i) x[i] += c_new * eta * w_new[i];
            eta = -s_new * eta;
            ++it;

            std::swap(v_old, v);
            std::swap(v, v_new);
            std::swap(z, z_new);
            std::swap(w_old, w);
            std::swap(w, w_new);
            gamma_old = gamma;
            gamma = gamma_new;
            c_old = c;
            c = c_new;
            s_old = s;
            s = s_new;

            if (std::abs(eta) * scale <= 0.5 * target || gamma == 0.0) break;
        }
    }
}

}  // namespace leach
