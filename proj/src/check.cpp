#include "leach/cli.hpp"

#include "leach/cell_problems.hpp"
#include "leach/cg.hpp"
#include "leach/coeff_table.hpp"
#include "leach/elliptic.hpp"
#include "leach/errors.hpp"
#include "leach/free_boundary.hpp"
#include "leach/io.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <unistd.h>

namespace leach {

namespace {

struct Suite {
    std::ostream& out;
    int failures = 0;

    // A check returns an empty string on success, else the violation.
    void run(const char* name, const std::function<std::string()>& body)
    {
        std::string problem;
        try {
            problem = body();
        } catch (const std::exception& e) {
            problem = std::string("threw: ") + e.what();
        }
        if (problem.empty()) {
            out << "ok    " << name << '\n';
        } else {
            ++failures;
            out << "FAIL  " << name << ": " << problem << '\n';
        }
        out.flush();
    }
};

std::string expect(bool ok, const std::string& what) { return ok ? std::string() : what; }

std::string number(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

int run_checks(std::ostream& out)
{
    Suite s{out};
    std::mt19937_64 rng(20240601);

    s.run("elliptic operator is symmetric", [&] {
        const auto g = GridSpec::unit_cell(6);
        std::uniform_real_distribution<double> u(0.1, 2.0), v(-1.0, 1.0);
        std::vector<Mat3> k(g.size());
        for (auto& m : k) m = Mat3::Identity() * u(rng);
        const auto sys = assemble_elliptic(g, k, {FaceCondition::Periodic, FaceCondition::Periodic, FaceCondition::Periodic,
                                                  FaceCondition::Periodic, FaceCondition::Periodic, FaceCondition::Periodic});
        double worst = 0.0;
        for (int p = 0; p < 10; ++p) {
            std::vector<double> x(g.size()), y(g.size());
            for (auto& e : x) e = v(rng);
            for (auto& e : y) e = v(rng);
            const auto ax = sys.op(x), ay = sys.op(y);
            double a = 0.0, b = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                a += y[i] * ax[i];
                b += x[i] * ay[i];
            }
            worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), 1e-300));
        }
        return expect(worst <= 1e-12, "relative asymmetry " + number(worst));
    });

    s.run("cg meets its residual contract", [&] {
        const auto g = GridSpec::unit_cube(8);
        std::vector<Mat3> k(g.size(), Mat3::Identity());
        const auto sys = assemble_elliptic(g, k, {FaceCondition::Dirichlet, FaceCondition::Dirichlet, FaceCondition::Neumann,
                                                  FaceCondition::Neumann, FaceCondition::Neumann, FaceCondition::Neumann});
        std::vector<double> b(g.size());
        std::normal_distribution<double> nd;
        for (auto& e : b) e = nd(rng);
        const auto res = cg_solve(sys.op, b, {.tol = 1e-10, .max_iter = 5000});
        const auto ax = sys.op(res.x);
        double rn = 0.0, bn = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) {
            rn += (b[i] - ax[i]) * (b[i] - ax[i]);
            bn += b[i] * b[i];
        }
        return expect(std::sqrt(rn / bn) <= 1e-10, "true residual " + number(std::sqrt(rn / bn)));
    });

    const auto mask = build_cell_mask(0.25, 16);
    s.run("cell mask porosity within 5/n", [&] {
        const double err = std::abs(mask.fluid_volume_fraction - porosity(0.25));
        return expect(err <= 5.0 / 16.0 && fluid_connected(mask), "porosity error " + number(err));
    });

    s.run("Stokes cell: symmetric positive definite permeability", [&] {
        const auto sol = solve_stokes_cell(mask, 1.0);
        const double asym = relative_asymmetry(sol.B_w);
        if (asym > 1e-8) return "asymmetry " + number(asym);
        return expect(is_spd(0.5 * (sol.B_w + sol.B_w.transpose())), "permeability not positive definite");
    });

    s.run("diffusion cell: B_energy + B_quadratic = m I, 0 < d < m", [&] {
        const auto sol = solve_diffusion_cell(mask);
        const Mat3 sum = sol.B_c_energy + sol.B_c_quadratic;
        const double m = porosity(0.25);
        const double gap = (sum - m * Mat3::Identity()).cwiseAbs().maxCoeff();
        const double d = sol.B_c_energy.trace() / 3.0;
        if (gap > 1e-6) return "identity gap " + number(gap);
        return expect(d > 0.0 && d < m, "d = " + number(d));
    });

    s.run("elastic cell: N_paper positive definite, zero forcing exact", [&] {
        const auto sol = solve_elasticity_cell(mask, 1.0, 1.0);
        if (!(min_eigenvalue_on_symmetric(sol.N_paper) > 0.0)) return std::string("N_paper not positive definite");
        ElasticCellOptions zero;
        zero.zero_forcing = true;
        const auto z = solve_elasticity_cell(mask, 1.0, 1.0, zero);
        return expect(z.N_energy.cwiseAbs().maxCoeff() == 0.0 && z.N_paper.cwiseAbs().maxCoeff() == 0.0,
                      "zero forcing gave nonzero tensors");
    });

    std::shared_ptr<const CoefficientTable> table;
    s.run("tabulate: invariants hold on a 5-knot table", [&] {
        RadiusBounds b;
        b.r_min = 0.15;
        table = std::make_shared<const CoefficientTable>(tabulate(b, 5, 16, CellParameters{}));
        return std::string();
    });
    if (!table) return s.failures;

    ReservoirSpec spec;
    spec.grid = GridSpec::unit_cube(8);
    spec.p1 = 1.0;
    spec.p2 = 0.0;
    spec.p0 = [](const std::array<double, 3>& x) { return 0.5 - x[0]; };
    spec.c0 = [](const std::array<double, 3>& x) { return 0.5 - x[0]; };
    std::uniform_real_distribution<double> ur(0.16, 0.44);
    ScalarField r(spec.grid);
    for (std::size_t c = 0; c < r.size(); ++c) r[c] = ur(rng);

    s.run("head with zero well data vanishes", [&] {
        const auto sol = solve_pressure_head(r, *table, spec, 1.0);
        const double m = std::max(std::max(-sol.phi.min(), sol.phi.max()), sol.w_f.max_abs());
        return expect(m <= 1e-10, "max |phi|, |w_f| = " + number(m));
    });

    s.run("diffusion step: maximum principle and balance", [&] {
        ScalarField r_new = r, c_old(spec.grid);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t c = 0; c < r.size(); ++c) {
            r_new[c] -= 0.005 * u(rng);
            c_old[c] = u(rng);
        }
        const auto st = step_diffusion(c_old, r, r_new, 0.05, *table, spec, 1.0, {.tol = 1e-14, .max_iter = 5000});
        if (st.c.min() < -1e-10 || st.c.max() > 1.0 + 1e-10) return std::string("concentration left [0, 1]");
        const double gap = std::abs(st.storage_change - st.boundary_inflow);
        return expect(gap <= 1e-12 * (std::abs(st.storage_change) + std::abs(st.boundary_inflow)), "balance gap " + number(gap));
    });

    s.run("apply_F closed form and Picard fixed point at theta = 0", [&] {
        const ScalarField r0(spec.grid, 0.4);
        std::vector<ScalarField> ones(21, ScalarField(spec.grid, 1.0));
        const auto R = apply_F(r0, ones, 0.1, 0.05);
        if (std::abs(R.back().max() - 0.3) > 1e-14 || std::abs(R.back().min() - 0.3) > 1e-14)
            return "R(1) = " + number(R.back().max());
        RadiusField guess(r, 0.0);
        for (int k = 1; k <= 4; ++k) guess.append(0.05 * k, r);
        SlabProblem p;
        p.spec = &spec;
        p.table = table.get();
        p.theta = 0.0;
        const auto sol = picard_slab(guess, p);
        return expect(sol.report.iterations == 1 && sol.residual == 0.0, "iterations " + std::to_string(sol.report.iterations));
    });

    s.run("table and snapshot files round-trip", [&] {
        const auto dir = std::filesystem::temp_directory_path() / ("leach_check_" + std::to_string(::getpid()));
        std::filesystem::create_directories(dir);
        struct Cleanup {
            std::filesystem::path p;
            ~Cleanup() { std::error_code ec; std::filesystem::remove_all(p, ec); }
        } cleanup{dir};
        write_table(*table, (dir / "t.csv").string());
        if (!(read_table((dir / "t.csv").string()) == *table)) return std::string("table differs after reload");
        MacroState st;
        st.t = 0.125;
        st.c = spec.c0_cells();
        st.phi = ScalarField(spec.grid, 0.0);
        st.p_f = spec.p0_cells();
        st.p_s = spec.p0_cells();
        st.w_f = VectorField(spec.grid, 1.0 / 3.0);
        st.w_s = VectorField(spec.grid, -2.0 / 7.0);
        write_snapshot(st, r, (dir / "s.vtk").string());
        const auto back = read_snapshot((dir / "s.vtk").string());
        return expect(back.state.c == st.c && back.r == r && back.state.w_s == st.w_s && back.state.t == st.t,
                      "snapshot differs after reload");
    });

    return s.failures;
}

}  // namespace leach
