#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "leach/errors.hpp"
#include "leach/macro_model.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace leach;
using namespace leach::testing;

namespace {

constexpr double pi = std::numbers::pi;

ScalarField random_radius(const GridSpec& g, std::mt19937_64& rng, double lo = 0.06, double hi = 0.44)
{
    std::uniform_real_distribution<double> u(lo, hi);
    ScalarField r(g);
    for (std::size_t c = 0; c < g.size(); ++c) r[c] = u(rng);
    return r;
}

double max_abs_diff(const ScalarField& a, const ScalarField& b)
{
    double m = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) m = std::max(m, std::abs(a[c] - b[c]));
    return m;
}

double field_l2_diff(const ScalarField& a, const ScalarField& b)
{
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]) * a.grid().cell_volume();
    return std::sqrt(s);
}

// Trilinear shape-function gradient of local node a at reference point xi in [-1, 1]^3.
std::array<double, 3> q1_gradient(int a, const std::array<double, 3>& xi, double h)
{
    std::array<double, 3> g{};
    for (int d = 0; d < 3; ++d) {
        double v = 0.5 * (((a >> d) & 1) ? 1.0 : -1.0);
        for (int e = 0; e < 3; ++e)
            if (e != d) v *= 0.5 * (1.0 + (((a >> e) & 1) ? 1.0 : -1.0) * xi[e]);
        g[d] = v * 2.0 / h;
    }
    return g;
}

}  // namespace

TEST_CASE("head with zero well data is identically zero")
{
    std::mt19937_64 rng(5);
    const auto spec = constant_spec(12, 0.5, 1.0, 0.0);
    for (int trial = 0; trial < 3; ++trial) {
        const auto r = random_radius(spec.grid, rng);
        const auto sol = solve_pressure_head(r, synthetic_table(), spec, 1.0);
        CHECK(sol.phi.max() <= 1e-10);
        CHECK(sol.phi.min() >= -1e-10);
        CHECK(sol.w_f.max_abs() <= 1e-10);
    }
}

TEST_CASE("linear head is reproduced exactly with Darcy velocity -(k / mu1) e1")
{
    const auto spec = constant_spec(10);
    const ScalarField r(spec.grid, 0.25);
    const double mu1 = 2.0;
    HeadProblem hp;
    hp.g = [](const std::array<double, 3>& x) { return x[0]; };
    const auto sol = solve_pressure_head(r, synthetic_table(), spec, mu1, hp, {.tol = 1e-14, .max_iter = 5000});
    const double k = synthetic_table().permeability(0.25)(0, 0);
    for (std::size_t c = 0; c < spec.grid.size(); ++c) {
        const auto [i, j, kk] = spec.grid.ijk(c);
        CHECK(std::abs(sol.phi[c] - spec.grid.center(i, j, kk)[0]) <= 1e-10);
        CHECK(std::abs(sol.w_f.at(c, 0) + k / mu1) <= 1e-10);
        CHECK(std::abs(sol.w_f.at(c, 1)) <= 1e-10);
        CHECK(std::abs(sol.w_f.at(c, 2)) <= 1e-10);
    }
    CHECK(sol.max_divergence <= 1e-10);
}

TEST_CASE("manufactured head converges at second order")
{
    const double k = synthetic_table().permeability(0.25)(0, 0);
    const auto hp = manufactured_head(k);
    std::vector<double> err;
    for (int n : {16, 32, 64}) {
        const auto spec = constant_spec(n);
        const auto sol = solve_pressure_head(ScalarField(spec.grid, 0.25), synthetic_table(), spec, 1.0, hp, {.tol = 1e-12, .max_iter = 20000});
        err.push_back(l2_error(sol.phi, [](const std::array<double, 3>& x) { return std::sin(pi * x[0]) * std::cos(pi * x[1]); }));
        CHECK(sol.max_divergence <= 1e-6);
    }
    const double p1 = std::log2(err[0] / err[1]), p2 = std::log2(err[1] / err[2]);
    MESSAGE("head L2 errors " << err[0] << " " << err[1] << " " << err[2] << ", orders " << p1 << " " << p2);
    CHECK(p1 >= 1.8);
    CHECK(p2 >= 1.8);
}

TEST_CASE("head solver is linear in its data")
{
    const auto spec = constant_spec(8);
    std::mt19937_64 rng(9);
    const auto r = random_radius(spec.grid, rng);
    HeadProblem a, b, sum;
    a.g = [](const std::array<double, 3>& x) { return x[1] * x[1] + x[0]; };
    b.g = [](const std::array<double, 3>& x) { return std::cos(x[2]) - 2.0 * x[0]; };
    sum.g = [&](const std::array<double, 3>& x) { return a.g(x) + b.g(x); };
    const CgOptions tight{.tol = 1e-15, .max_iter = 5000};
    const auto sa = solve_pressure_head(r, synthetic_table(), spec, 1.0, a, tight);
    const auto sb = solve_pressure_head(r, synthetic_table(), spec, 1.0, b, tight);
    const auto ss = solve_pressure_head(r, synthetic_table(), spec, 1.0, sum, tight);
    double worst = 0.0, scale = 0.0;
    for (std::size_t c = 0; c < r.size(); ++c) {
        worst = std::max(worst, std::abs(ss.phi[c] - sa.phi[c] - sb.phi[c]));
        scale = std::max(scale, std::abs(ss.phi[c]));
    }
    CHECK(worst <= 1e-12 * scale);
}

TEST_CASE("Lame with constant p0 gives zero displacement and p_s = p0")
{
    auto spec = constant_spec(8, 0.5, 0.7, 0.7);
    std::mt19937_64 rng(2);
    const auto r = random_radius(spec.grid, rng);
    const auto sol = solve_lame(r, synthetic_table(), spec, 1.0, 1.0);
    CHECK(sol.w_s.max_abs() == 0.0);
    for (std::size_t c = 0; c < r.size(); ++c) CHECK(sol.p_s[c] == 0.7);
}

TEST_CASE("Lame energy identity and residual, recomputed by independent quadrature")
{
    ReservoirSpec spec = constant_spec(8);
    // x3 modulated so that p0 stays constant (zero) on both wells.
    spec.p0 = [](const std::array<double, 3>& x) { return x[2] * (0.25 - x[0] * x[0]); };
    std::mt19937_64 rng(4);
    const auto r = random_radius(spec.grid, rng);
    const double lambda0 = 1.3, c_s = 0.8;
    const auto sol = solve_lame(r, synthetic_table(), spec, lambda0, c_s, {.tol = 1e-13, .max_iter = 20000});
    CHECK(sol.relative_residual <= 1e-13);

    const int n = spec.grid.n[0];
    const double h = spec.grid.h[0];
    const int nn = n + 1;
    auto node = [nn](int i, int j, int k) { return static_cast<std::size_t>(i + nn * (j + nn * k)); };
    std::vector<std::array<double, 3>> u(static_cast<std::size_t>(nn * nn * nn), {0.0, 0.0, 0.0});
    std::size_t b = 0;
    for (int k = 1; k < n; ++k)
        for (int j = 1; j < n; ++j)
            for (int i = 1; i < n; ++i, ++b)
                for (int d = 0; d < 3; ++d) u[node(i, j, k)][static_cast<std::size_t>(d)] = sol.nodal[3 * b + static_cast<std::size_t>(d)];
    REQUIRE(3 * b == sol.nodal.size());

    double energy = 0.0, work = 0.0;
    const double gp = 1.0 / std::sqrt(3.0);
    for (std::size_t c = 0; c < spec.grid.size(); ++c) {
        const auto [i, j, k] = spec.grid.ijk(c);
        Voigt6 mat = lambda0 * synthetic_table().stiffness(r[c]);
        mat.topLeftCorner<3, 3>().array() += c_s * c_s;
        for (int p = 0; p < 8; ++p) {
            const std::array<double, 3> xi{(p & 1) ? gp : -gp, (p & 2) ? gp : -gp, (p & 4) ? gp : -gp};
            Mat3 grad_u = Mat3::Zero();
            Vec3 grad_p = Vec3::Zero();
            Vec3 w = Vec3::Zero();
            for (int a = 0; a < 8; ++a) {
                const int ai = i + (a & 1), aj = j + ((a >> 1) & 1), ak = k + ((a >> 2) & 1);
                const auto g = q1_gradient(a, xi, h);
                double shape = 1.0;
                for (int d = 0; d < 3; ++d) shape *= 0.5 * (1.0 + (((a >> d) & 1) ? 1.0 : -1.0) * xi[d]);
                const auto& ua = u[node(ai, aj, ak)];
                const double pa = spec.p0({-0.5 + ai * h, -0.5 + aj * h, -0.5 + ak * h});
                for (int d = 0; d < 3; ++d) {
                    for (int e = 0; e < 3; ++e) grad_u(d, e) += ua[d] * g[e];
                    grad_p[d] += pa * g[d];
                    w[d] += shape * ua[d];
                }
            }
            const Mat3 strain = 0.5 * (grad_u + grad_u.transpose());
            const double weight = h * h * h / 8.0;
            energy += weight * quadratic_form(mat, strain);
            work -= weight * grad_p.dot(w);
        }
    }
    CHECK(energy > 0.0);
    CHECK(std::abs(energy - work) <= 1e-8 * energy);
    CHECK(std::abs(energy - sol.energy) <= 1e-10 * energy);
    CHECK(std::abs(work - sol.work) <= 1e-10 * energy);
}

TEST_CASE("Lame response doubles exactly with p0")
{
    ReservoirSpec spec = constant_spec(6);
    spec.p0 = [](const std::array<double, 3>& x) { return x[2] * (0.25 - x[0] * x[0]); };
    ReservoirSpec twice = spec;
    twice.p0 = [](const std::array<double, 3>& x) { return 2.0 * x[2] * (0.25 - x[0] * x[0]); };
    const ScalarField r(spec.grid, 0.3);
    const auto a = solve_lame(r, synthetic_table(), spec, 1.0, 1.0);
    const auto b = solve_lame(r, synthetic_table(), twice, 1.0, 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.nodal.size(); ++i) worst = std::max(worst, std::abs(b.nodal[i] - 2.0 * a.nodal[i]));
    CHECK(worst <= 1e-12 * std::max(1e-300, b.w_s.max_abs()));
    CHECK(a.w_s.max_abs() > 0.0);
}

TEST_CASE("diffusion: stationary state is kept exactly")
{
    const auto spec = constant_spec(8, 0.35);
    std::mt19937_64 rng(12);
    const auto r = random_radius(spec.grid, rng);
    const auto c0 = spec.c0_cells();
    const auto step = step_diffusion(c0, r, r, 0.1, synthetic_table(), spec, 1.0);
    CHECK(step.c == c0);
}

TEST_CASE("diffusion: maximum principle and discrete balance on random steps")
{
    std::mt19937_64 rng(31);
    ReservoirSpec spec = constant_spec(10);
    spec.c0 = [](const std::array<double, 3>& x) { return 0.5 - x[0]; };
    std::uniform_real_distribution<double> unit(0.0, 1.0), shrink(0.0, 0.02);
    for (int trial = 0; trial < 10; ++trial) {
        const auto r_old = random_radius(spec.grid, rng, 0.08, 0.44);
        ScalarField r_new = r_old, c_old(spec.grid);
        for (std::size_t c = 0; c < r_old.size(); ++c) {
            r_new[c] -= shrink(rng);
            c_old[c] = unit(rng);
        }
        const auto step = step_diffusion(c_old, r_old, r_new, 0.05, synthetic_table(), spec, 1.0, {.tol = 1e-14, .max_iter = 5000});
        CHECK(step.c.min() >= -1e-10);
        CHECK(step.c.max() <= 1.0 + 1e-10);
        const double scale = std::abs(step.storage_change) + std::abs(step.boundary_inflow);
        CHECK(std::abs(step.storage_change - step.boundary_inflow) <= 1e-12 * scale);
    }
}

TEST_CASE("diffusion rejects invalid steps")
{
    const auto spec = constant_spec(4);
    const ScalarField r(spec.grid, 0.3), bigger(spec.grid, 0.31), c(spec.grid, 0.5), bad(spec.grid, 1.5);
    CHECK_THROWS_AS(step_diffusion(c, r, bigger, 0.1, synthetic_table(), spec, 1.0), InvalidInput);
    CHECK_THROWS_AS(step_diffusion(c, r, r, 0.0, synthetic_table(), spec, 1.0), InvalidInput);
    CHECK_THROWS_AS(step_diffusion(bad, r, r, 0.1, synthetic_table(), spec, 1.0), InvalidInput);
    CHECK_THROWS_AS(step_diffusion(c, r, r, 0.1, synthetic_table(), spec, -1.0), InvalidInput);
    CHECK_THROWS_WITH_AS(run_diffusion({r, bigger}, spec, synthetic_table(), 1.0, 0.1), doctest::Contains("step 1"),
                         InvalidInput);
}

TEST_CASE("run_diffusion with zero steps returns c0")
{
    const auto spec = constant_spec(6, 0.2);
    const auto out = run_diffusion({ScalarField(spec.grid, 0.3)}, spec, synthetic_table(), 1.0, 0.1);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == spec.c0_cells());
}

TEST_CASE("diffusion decays monotonically to the steady state")
{
    const auto spec = constant_spec(10, 0.4);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ScalarField c_init = spec.c0_cells();
    for (std::size_t c = 0; c < c_init.size(); ++c) {
        const auto [i, j, k] = spec.grid.ijk(c);
        if (i > 2 && i < 7 && j > 2 && j < 7 && k > 2 && k < 7) c_init[c] = u(rng);
    }
    const std::vector<ScalarField> hist(15, ScalarField(spec.grid, 0.3));
    const auto out = run_diffusion(hist, spec, synthetic_table(), 1.0, 0.02, {}, &c_init);
    const auto steady = spec.c0_cells();
    double prev = max_abs_diff(out[0], steady);
    CHECK(prev > 0.1);
    for (std::size_t s = 1; s < out.size(); ++s) {
        const double d = max_abs_diff(out[s], steady);
        CHECK(d <= prev + 1e-12);
        prev = d;
    }
    CHECK(prev < 0.5 * max_abs_diff(out[0], steady));
}

TEST_CASE("diffusion eigenmode: second order in space, first order in time")
{
    // With uniform r and constant c0, u = c - c0 = eps cos(pi x1) is an eigenfunction of
    // the continuous operator, so backward Euler in time multiplies it by 1 / (1 + dt lambda)
    // per step; comparing against that isolates the spatial error.
    const double r = 0.25, c0 = 0.5, eps = 0.4, alpha = 1.0;
    const double d = synthetic_table().diffusivity(r)(0, 0);
    const double lambda = alpha * d * pi * pi / porosity(r);
    const int steps = 5;
    const double dt = 0.01;

    auto run = [&](int n, double step, int count) {
        const auto spec = constant_spec(n, c0);
        ScalarField init = spec.c0_cells();
        for (std::size_t c = 0; c < init.size(); ++c) {
            const auto [i, j, k] = spec.grid.ijk(c);
            init[c] += eps * std::cos(pi * spec.grid.center(i, j, k)[0]);
        }
        const std::vector<ScalarField> hist(static_cast<std::size_t>(count) + 1, ScalarField(spec.grid, r));
        return run_diffusion(hist, spec, synthetic_table(), alpha, step, {.tol = 1e-13, .max_iter = 20000}, &init).back();
    };

    std::vector<double> err;
    const double decay = std::pow(1.0 + dt * lambda, -steps);
    for (int n : {16, 32, 64})
        err.push_back(l2_error(run(n, dt, steps),
                               [&](const std::array<double, 3>& x) { return c0 + eps * decay * std::cos(pi * x[0]); }));
    const double s1 = std::log2(err[0] / err[1]), s2 = std::log2(err[1] / err[2]);
    MESSAGE("diffusion spatial errors " << err[0] << " " << err[1] << " " << err[2] << ", orders " << s1 << " " << s2);
    CHECK(s1 >= 1.8);
    CHECK(s2 >= 1.8);

    // Time: successive differences over dt halvings at fixed grid remove the spatial error.
    const double t_end = 0.1;
    const auto a = run(16, t_end / 8, 8);
    const auto b = run(16, t_end / 16, 16);
    const auto c = run(16, t_end / 32, 32);
    const double order = std::log2(field_l2_diff(a, b) / field_l2_diff(b, c));
    MESSAGE("diffusion time order " << order);
    CHECK(order >= 0.9);
}
