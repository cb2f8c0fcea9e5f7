#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "leach/cell_problems.hpp"
#include "leach/errors.hpp"
#include "leach/hex_fe.hpp"

#include <cmath>
#include <random>

using namespace leach;

namespace {

Vec3 random_unit(std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3 v(n(rng), n(rng), n(rng));
    return v.normalized();
}

Mat3 random_symmetric(std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Mat3 a;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = n(rng);
    return 0.5 * (a + a.transpose());
}

double off_diagonal_ratio(const Mat3& b)
{
    const double k = b.diagonal().mean();
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (i == j) worst = std::max(worst, std::abs(b(i, i) - k) / k);
            else worst = std::max(worst, std::abs(b(i, j)) / k);
        }
    return worst;
}

}  // namespace

TEST_CASE("Stokes cell at r = 0.25, n = 32: symmetric, positive, isotropic, divergence-free")
{
    const auto mask = build_cell_mask(0.25, 32);
    const auto sol = solve_stokes_cell(mask, 1.0);
    CHECK(relative_asymmetry(sol.B_w) <= 1e-8);
    std::mt19937_64 rng(11);
    for (int p = 0; p < 20; ++p) {
        const Vec3 xi = random_unit(rng);
        CHECK(xi.dot(sol.B_w * xi) > 0.0);
    }
    CHECK(off_diagonal_ratio(sol.B_w) <= 0.02);
    CHECK(sol.max_divergence <= 1e-8);

    // No-slip: faces touching a solid voxel carry no velocity.
    const GridSpec& g = sol.grid;
    const std::size_t nc = g.size();
    for (int i = 0; i < 3; ++i)
        for (int d = 0; d < 3; ++d)
            for (std::size_t c = 0; c < nc; ++c) {
                auto lo = g.ijk(c);
                lo[d] = (lo[d] + g.n[d] - 1) % g.n[d];
                if (mask.solid[c] || mask.solid[g.index(lo[0], lo[1], lo[2])])
                    CHECK(sol.velocity[static_cast<std::size_t>(i)][static_cast<std::size_t>(d) * nc + c] == 0.0);
            }
}

TEST_CASE("permeability decreases with the grain radius")
{
    const double k15 = solve_stokes_cell(build_cell_mask(0.15, 32), 1.0).B_w.diagonal().mean();
    const double k30 = solve_stokes_cell(build_cell_mask(0.30, 32), 1.0).B_w.diagonal().mean();
    const double k45 = solve_stokes_cell(build_cell_mask(0.45, 32), 1.0).B_w.diagonal().mean();
    CHECK(k45 < k30);
    CHECK(k30 < k15);
}

TEST_CASE("permeability scales as 1 / mu1")
{
    const auto mask = build_cell_mask(0.3, 16);
    const Mat3 b1 = solve_stokes_cell(mask, 1.0).B_w;
    const Mat3 b2 = solve_stokes_cell(mask, 2.0).B_w;
    CHECK((b1 - 2.0 * b2).cwiseAbs().maxCoeff() <= 1e-8 * b1.cwiseAbs().maxCoeff());
}

TEST_CASE("Stokes cell rejects bad input")
{
    const auto mask = build_cell_mask(0.3, 16);
    CHECK_THROWS_AS(solve_stokes_cell(mask, 0.0), InvalidInput);
}

TEST_CASE("diffusion correctors satisfy the weak-form identity")
{
    for (double r : {0.15, 0.30, 0.45}) {
        const auto mask = build_cell_mask(r, 24);
        const auto sol = solve_diffusion_cell(mask, {1e-10, 100000});
        const double m = porosity(r);
        CHECK((sol.B_c_energy + sol.B_c_quadratic - m * Mat3::Identity()).norm() <= 1e-6);

        // Independent recomputation from the correctors: with face weights w_d normalized to
        // the porosity, sum_f w grad C^i . grad C^j = -sum_{f normal to j} w dC^i / h.
        const GridSpec& g = sol.grid;
        const double h = g.h[0];
        std::array<double, 3> count{};
        for (std::size_t c = 0; c < g.size(); ++c) {
            if (mask.solid[c]) continue;
            for (int d = 0; d < 3; ++d) {
                auto q = g.ijk(c);
                q[d] = (q[d] + 1) % g.n[d];
                if (!mask.solid[g.index(q[0], q[1], q[2])]) count[static_cast<std::size_t>(d)] += 1.0;
            }
        }
        Mat3 lhs = Mat3::Zero(), rhs = Mat3::Zero();
        for (std::size_t c = 0; c < g.size(); ++c) {
            if (mask.solid[c]) continue;
            for (int d = 0; d < 3; ++d) {
                auto q = g.ijk(c);
                q[d] = (q[d] + 1) % g.n[d];
                const std::size_t qc = g.index(q[0], q[1], q[2]);
                if (mask.solid[qc]) continue;
                const double w = m / count[static_cast<std::size_t>(d)];
                Vec3 grad;
                for (int i = 0; i < 3; ++i) grad[i] = (sol.corrector[static_cast<std::size_t>(i)][qc] - sol.corrector[static_cast<std::size_t>(i)][c]) / h;
                lhs += w * grad * grad.transpose();
                for (int i = 0; i < 3; ++i) rhs(i, d) -= w * grad[i];
            }
        }
        CHECK((lhs - rhs).norm() <= 1e-6);
        CHECK((lhs - sol.B_c_quadratic).norm() <= 1e-10);
    }
}

TEST_CASE("diffusion correctors have zero fluid mean and vanish on the grain")
{
    const auto mask = build_cell_mask(0.3, 16);
    const auto sol = solve_diffusion_cell(mask);
    for (const auto& c : sol.corrector) {
        double sum = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (mask.solid[k]) CHECK(c[k] == 0.0);
            else sum += c[k];
        }
        CHECK(std::abs(sum) <= 1e-10);
    }
}

TEST_CASE("diffusivity bounds and isotropy at r = 0.30, n = 32")
{
    const auto sol = solve_diffusion_cell(build_cell_mask(0.30, 32));
    const double m = porosity(0.30);
    CHECK(relative_asymmetry(sol.B_c_energy) <= 1e-8);
    CHECK(off_diagonal_ratio(sol.B_c_energy) <= 0.02);
    const double d = sol.B_c_energy.diagonal().mean();
    CHECK(d > 0.0);
    CHECK(d < m);
    CHECK(min_eigenvalue(sol.B_c_energy) > 0.0);
}

TEST_CASE("weak obstacle: correctors are small and d approaches the porosity")
{
    const RadiusBounds b;
    const auto sol = solve_diffusion_cell(build_cell_mask(b.r_min, 40, b));
    const double m = porosity(b.r_min);
    CHECK((sol.B_c_energy - m * Mat3::Identity()).cwiseAbs().maxCoeff() <= 0.01 * m);
    double biggest = 0.0;
    for (const auto& c : sol.corrector)
        for (double v : c) biggest = std::max(biggest, std::abs(v));
    // Dilute-sphere corrector magnitude is about r / 2 at the grain surface.
    CHECK(biggest <= 0.5 * b.r_min);
}

TEST_CASE("diffusivity decreases with the grain radius")
{
    double prev = 2.0;
    for (double r : {0.15, 0.25, 0.35, 0.45}) {
        const double d = solve_diffusion_cell(build_cell_mask(r, 16)).B_c_energy.diagonal().mean();
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("elastic cell: symmetric, rigid-motion free, energy form vanishes on an isolated grain")
{
    const auto mask = build_cell_mask(0.3, 16);
    const double lambda0 = 1.0, c_s = 1.5;
    const auto sol = solve_elasticity_cell(mask, lambda0, c_s);
    CHECK(sol.max_mean_displacement <= 1e-10);
    CHECK(sol.max_mean_rotation <= 1e-10);

    // The grain floats in the fluid with a traction-free surface, so W = -J y is
    // admissible and carries no stress: the energy-form tensor is zero up to rounding.
    const Voigt6 iso = isotropic_tensor(lambda0, c_s * c_s);
    const double solid = static_cast<double>(mask.solid_count()) * mask.grid.cell_volume();
    const double scale = solid * iso.cwiseAbs().maxCoeff();
    CHECK((sol.N_energy - sol.N_energy.transpose()).cwiseAbs().maxCoeff() <= 1e-8 * scale);
    CHECK(sol.N_energy.cwiseAbs().maxCoeff() <= 1e-10 * scale);

    std::mt19937_64 rng(21);
    for (int p = 0; p < 20; ++p) {
        const Mat3 e = random_symmetric(rng);
        CHECK(std::abs(quadratic_form(sol.N_energy, e)) <= 1e-10 * solid * quadratic_form(iso, e));
    }

    // D(W^ij) = -J^ij on the grain, so N_paper = lambda0 |Y_s| times the identity on
    // symmetric tensors: 1 on normal slots, 1/2 on shear slots.
    Voigt6 expected = Voigt6::Zero();
    for (int v = 0; v < 6; ++v) expected(v, v) = lambda0 * solid * (v < 3 ? 1.0 : 0.5);
    CHECK((sol.N_paper - expected).cwiseAbs().maxCoeff() <= 1e-8 * lambda0 * solid);
    CHECK(min_eigenvalue_on_symmetric(sol.N_paper) > 0.0);
}

TEST_CASE("elastic cell with zero forcing gives zero tensors")
{
    ElasticCellOptions opts;
    opts.zero_forcing = true;
    const auto sol = solve_elasticity_cell(build_cell_mask(0.3, 16), 1.0, 1.0, opts);
    for (const auto& w : sol.displacement)
        for (double v : w) CHECK(v == 0.0);
    CHECK(sol.N_energy.cwiseAbs().maxCoeff() == 0.0);
    CHECK(sol.N_paper.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("elastic cell rejects bad input")
{
    const auto mask = build_cell_mask(0.3, 16);
    CHECK_THROWS_AS(solve_elasticity_cell(mask, 0.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(solve_elasticity_cell(mask, 1.0, -1.0), InvalidInput);
}

TEST_CASE("Richardson extrapolation is exact for first- and second-order sequences")
{
    auto second = [](double h) { return 2.0 + 3.0 * h * h; };
    CHECK(richardson_extrapolate(second(0.4), second(0.2), second(0.1)) == doctest::Approx(2.0).epsilon(1e-12));
    auto first = [](double h) { return -1.0 + 0.7 * h; };
    CHECK(richardson_extrapolate(first(0.4), first(0.2), first(0.1)) == doctest::Approx(-1.0).epsilon(1e-12));
    // Non-monotone: first-order fallback.
    CHECK(richardson_extrapolate(1.0, 2.0, 1.5) == doctest::Approx(1.0));
    CHECK(richardson_extrapolate(1.0, 1.0, 1.0) == 1.0);
}
