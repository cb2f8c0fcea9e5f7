// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,3,5] [--expect-fail 4]
//
// Exit status is 0 when the set of failing criteria equals the --expect-fail set.

#include "leach/cell_geometry.hpp"
#include "leach/cell_problems.hpp"
#include "leach/coeff_table.hpp"
#include "leach/config.hpp"
#include "leach/errors.hpp"
#include "leach/free_boundary.hpp"
#include "leach/hex_fe.hpp"
#include "leach/io.hpp"
#include "leach/linalg.hpp"
#include "leach/macro_model.hpp"
#include "support.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <unistd.h>

using namespace leach;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 4)
{
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

Mat3 random_symmetric(std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    Mat3 e;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) e(i, j) = e(j, i) = nd(rng);
    return e;
}

// Shared desk table: the default config's bounds, 5 knots, n = 16.
const CoefficientTable& desk_table()
{
    static const CoefficientTable t = [] {
        const SimulationConfig cfg;
        const auto t0 = Clock::now();
        auto table = tabulate(cfg.bounds(), cfg.table_knots, cfg.cell_n, cfg.cell_parameters());
        std::cout << "  (desk table tabulated in " << fmt(seconds_since(t0), 3) << " s)\n";
        return table;
    }();
    return t;
}

std::shared_ptr<const CoefficientTable> shared_desk_table()
{
    static const auto p = std::make_shared<const CoefficientTable>(desk_table());
    return p;
}

// Accepted runs collected for the monotonicity audit.
struct AcceptedRun {
    std::string name;
    double theta = 0.0;
    double dt = 0.0;
    RadiusField radius;
    std::vector<TimeSeriesRow> series;
};
std::vector<AcceptedRun> accepted;

void remember(const std::string& name, const SimulationConfig& cfg, const SimulationResult& res)
{
    accepted.push_back({name, cfg.theta, cfg.dt, res.radius, res.series});
}

Outcome criterion1()
{
    const std::vector<double> radii{0.15, 0.25, 0.35, 0.45};
    std::vector<double> k;
    std::ostringstream os;
    bool ok = true;
    std::mt19937_64 rng(1);
    for (double r : radii) {
        const auto t0 = Clock::now();
        const auto sol = solve_stokes_cell(build_cell_mask(r, 32), 1.0);
        const double secs = seconds_since(t0);
        const Mat3& B = sol.B_w;
        const double asym = relative_asymmetry(B);
        const Mat3 S = 0.5 * (B + B.transpose());
        bool pd = true;
        for (int p = 0; p < 20; ++p) {
            std::normal_distribution<double> nd;
            const Vec3 xi(nd(rng), nd(rng), nd(rng));
            pd = pd && xi.dot(B * xi) > 0.0;
        }
        pd = pd && min_eigenvalue(S) > 0.0;
        const double mean = B.trace() / 3.0;
        double aniso = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) aniso = std::max(aniso, std::abs(B(i, j) - (i == j ? mean : 0.0)) / mean);
        k.push_back(mean);
        const bool here = asym <= 1e-8 && pd && aniso <= 0.02 && secs <= 120.0;
        ok = ok && here;
        os << "r=" << r << " k=" << fmt(mean) << " asym=" << fmt(asym, 2) << " aniso=" << fmt(aniso, 2)
           << (pd ? "" : " NOT-PD") << " " << fmt(secs, 3) << "s; ";
    }
    for (std::size_t i = 1; i < k.size(); ++i)
        if (!(k[i] < k[i - 1])) {
            ok = false;
            os << "k not decreasing; ";
        }
    return {ok, os.str()};
}

Outcome criterion2()
{
    const double r = 0.10, mu1 = 1.0;
    std::vector<double> k;
    std::ostringstream os;
    for (int n : {16, 32, 64}) {
        const auto t0 = Clock::now();
        const auto sol = solve_stokes_cell(voxelize_cell(r, n), mu1);
        k.push_back(sol.B_w.trace() / 3.0);
        os << "n=" << n << " k6pi r mu1=" << fmt(k.back() * 6.0 * pi * r * mu1) << " (" << fmt(seconds_since(t0), 3) << "s); ";
    }
    const double k_ext = richardson_extrapolate(k[0], k[1], k[2]);
    const double measured = k_ext * 6.0 * pi * r * mu1;
    // -mu1 div D(W) = e with div W = 0 is Stokes flow with viscosity mu1 / 2. For a simple
    // cubic array of spheres the drag per sphere is 6 pi (mu1/2) r U K with
    // 1/K = 1 - 1.7601 chi + chi^3 - 1.5593 chi^6, chi = c^(1/3), and k = U / drag.
    const double c = 4.0 * pi / 3.0 * r * r * r;
    const double chi = std::cbrt(c);
    const double inv_K = 1.0 - 1.7601 * chi + chi * chi * chi - 1.5593 * std::pow(chi, 6);
    const double oracle = 2.0 * inv_K;
    const double literal = 1.0 / (1.0 - 1.7601 * chi);
    const double rel = std::abs(measured - oracle) / oracle;
    os << "extrapolated " << fmt(measured) << " vs oracle " << fmt(oracle) << " (rel " << fmt(rel, 3) << ")"
       << "; literal 1/(1-1.7601 c^1/3) = " << fmt(literal) << " (rel " << fmt(std::abs(measured - literal) / literal, 3) << ")";
    return {rel <= 0.15, os.str()};
}

Outcome criterion3()
{
    std::ostringstream os;
    bool ok = true;
    for (double r : {0.15, 0.25, 0.35, 0.45}) {
        const auto sol = solve_diffusion_cell(build_cell_mask(r, 32), {.tol = 1e-10, .max_iter = 100000});
        const double m = porosity(r);
        const double gap = (sol.B_c_energy + sol.B_c_quadratic - m * Mat3::Identity()).cwiseAbs().maxCoeff();
        const double d = sol.B_c_energy.trace() / 3.0;
        const bool here = gap <= 1e-6 && d > 0.0 && d < m;
        ok = ok && here;
        os << "r=" << r << " gap=" << fmt(gap, 2) << " d/m=" << fmt(d / m) << "; ";
    }
    // The table clamps r = 0.05 to r_min = 0.05; extrapolate d there from n = 16, 32, 64.
    const SimulationConfig cfg;
    const double r = std::max(0.05, cfg.r_min);
    std::vector<double> d;
    for (int n : {16, 32, 64}) d.push_back(solve_diffusion_cell(voxelize_cell(r, n)).B_c_energy.trace() / 3.0);
    const double d_ext = richardson_extrapolate(d[0], d[1], d[2]);
    const double m = porosity(r);
    os << "d(" << r << ") n=16,32,64: " << fmt(d[0], 7) << " " << fmt(d[1], 7) << " " << fmt(d[2], 7) << " -> "
       << fmt(d_ext, 7) << " = " << fmt(d_ext / m, 7) << " m";
    ok = ok && d_ext >= 0.99 * m && d_ext < m;
    return {ok, os.str()};
}

Outcome criterion4()
{
    std::ostringstream os;
    bool ok = true;
    const double lambda0 = 1.0, c_s = 1.0;
    std::mt19937_64 rng(4);
    for (double r : {0.15, 0.25, 0.35}) {
        const auto mask = build_cell_mask(r, 16);
        const auto sol = solve_elasticity_cell(mask, lambda0, c_s);
        const double solid = static_cast<double>(mask.solid_count()) * mask.grid.cell_volume();
        const Voigt6 iso = isotropic_tensor(lambda0, c_s * c_s);
        const double scale = solid * iso.cwiseAbs().maxCoeff();
        // Voigt storage carries minor symmetry; major symmetry is matrix symmetry.
        const double asym = (sol.N_energy - sol.N_energy.transpose()).cwiseAbs().maxCoeff() / scale;
        // Positive means clearly above rounding: e:N:e > 1e-10 |Y_s| e:C:e.
        int positive = 0;
        double qmin = 1e300;
        for (int p = 0; p < 20; ++p) {
            const Mat3 e = random_symmetric(rng);
            const double q = quadratic_form(sol.N_energy, e);
            const double ref = solid * quadratic_form(iso, e);
            qmin = std::min(qmin, q / ref);
            positive += q > 1e-10 * ref;
        }
        const bool here = asym <= 1e-8 && positive == 20;
        ok = ok && here;
        os << "r=" << r << " asym=" << fmt(asym, 2) << " PD " << positive << "/20 (min e:N:e / |Y_s| e:C:e = " << fmt(qmin, 2)
           << ", N_paper min eig " << fmt(min_eigenvalue_on_symmetric(sol.N_paper), 3) << "); ";
    }
    ElasticCellOptions zero;
    zero.zero_forcing = true;
    const auto z = solve_elasticity_cell(build_cell_mask(0.25, 16), lambda0, c_s, zero);
    const bool zero_ok = z.N_energy.cwiseAbs().maxCoeff() == 0.0 && z.N_paper.cwiseAbs().maxCoeff() == 0.0;
    os << "zero forcing " << (zero_ok ? "exact" : "NONZERO");
    return {ok && zero_ok, os.str()};
}

Outcome criterion5()
{
    desk_table();
    const auto t0 = Clock::now();
    const SimulationConfig cfg;
    const auto spec = cfg.reservoir();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(cfg.r_min, cfg.r_max);
    double worst_phi = 0.0, worst_w = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        ScalarField r(spec.grid);
        for (std::size_t c = 0; c < r.size(); ++c) r[c] = u(rng);
        const auto sol = solve_pressure_head(r, desk_table(), spec, cfg.mu1);
        worst_phi = std::max({worst_phi, sol.phi.max(), -sol.phi.min()});
        worst_w = std::max(worst_w, sol.w_f.max_abs());
    }
    const double secs = seconds_since(t0);
    return {worst_phi <= 1e-10 && worst_w <= 1e-10,
            "5 random r fields on 16^3: max|phi|=" + fmt(worst_phi, 3) + " max|w_f|=" + fmt(worst_w, 3) + " in " + fmt(secs, 3) + "s"};
}

SimulationConfig random_desk(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> axis(0, 2);
    SimulationConfig cfg;
    cfg.theta = 0.3 * u(rng);
    cfg.c0 = u(rng) < 0.3 ? FieldProfile::constant(u(rng)) : FieldProfile::linear(axis(rng), u(rng), u(rng));
    const double a = 0.1 + 0.35 * u(rng), b = 0.1 + 0.35 * u(rng);
    cfg.r0 = u(rng) < 0.5 ? FieldProfile::constant(a) : FieldProfile::linear(axis(rng), a, b);
    cfg.p0.p1 = 2.0 * u(rng);
    cfg.p0.p2 = 2.0 * u(rng) - 1.0;
    return cfg;
}

Outcome criterion6()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(6);
    double cmin = 1e300, cmax = -1e300;
    int runs = 0;
    std::ostringstream os;
    for (int trial = 0; trial < 20; ++trial) {
        const auto cfg = random_desk(rng);
        try {
            const auto res = run_simulation(cfg, {.output_dir = {}, .table = shared_desk_table(), .tabulate = {}});
            if (res.concentration.size() != 21) os << "run " << trial << " has " << res.concentration.size() << " levels; ";
            for (const auto& c : res.concentration) {
                cmin = std::min(cmin, c.min());
                cmax = std::max(cmax, c.max());
            }
            remember("random desk " + std::to_string(trial), cfg, res);
            ++runs;
        } catch (const std::exception& e) {
            os << "run " << trial << " failed: " << e.what() << "; ";
        }
    }
    const bool ok = runs == 20 && cmin >= -1e-10 && cmax <= 1.0 + 1e-10;
    os << runs << "/20 runs (16^3, 20 steps), c in [" << fmt(cmin, 6) << ", " << fmt(cmax, 6) << "] in "
       << fmt(seconds_since(t0), 3) << "s";
    return {ok, os.str()};
}

Outcome criterion7()
{
    using testing::l2_error;
    const auto& table = desk_table();
    const double r = 0.25;
    std::ostringstream os;

    const double k = table.permeability(r)(0, 0);
    const auto hp = testing::manufactured_head(k);
    std::vector<double> eh;
    for (int n : {16, 32, 64}) {
        const auto spec = testing::constant_spec(n);
        const auto sol = solve_pressure_head(ScalarField(spec.grid, r), table, spec, 1.0, hp, {.tol = 1e-12, .max_iter = 20000});
        eh.push_back(l2_error(sol.phi, [](const std::array<double, 3>& x) { return std::sin(pi * x[0]) * std::cos(pi * x[1]); }));
    }
    const double h1 = std::log2(eh[0] / eh[1]), h2 = std::log2(eh[1] / eh[2]);

    // u = c - c0 = eps cos(pi x1) decays by 1 / (1 + dt lambda) per backward Euler step.
    const double c0 = 0.5, eps = 0.4, alpha = 1.0;
    const double d = table.diffusivity(r)(0, 0);
    const double lambda = alpha * d * pi * pi / porosity(r);
    auto run = [&](int n, double step, int count) {
        const auto spec = testing::constant_spec(n, c0);
        ScalarField init = spec.c0_cells();
        for (std::size_t c = 0; c < init.size(); ++c) {
            const auto [i, j, kk] = spec.grid.ijk(c);
            init[c] += eps * std::cos(pi * spec.grid.center(i, j, kk)[0]);
        }
        const std::vector<ScalarField> hist(static_cast<std::size_t>(count) + 1, ScalarField(spec.grid, r));
        return run_diffusion(hist, spec, table, alpha, step, {.tol = 1e-13, .max_iter = 20000}, &init).back();
    };
    const int steps = 5;
    const double dt = 0.01;
    const double decay = std::pow(1.0 + dt * lambda, -steps);
    std::vector<double> ed;
    for (int n : {16, 32, 64})
        ed.push_back(l2_error(run(n, dt, steps), [&](const std::array<double, 3>& x) { return c0 + eps * decay * std::cos(pi * x[0]); }));
    const double s1 = std::log2(ed[0] / ed[1]), s2 = std::log2(ed[1] / ed[2]);

    auto diff = [](const ScalarField& a, const ScalarField& b) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]) * a.grid().cell_volume();
        return std::sqrt(s);
    };
    const double t_end = 0.1;
    const auto a = run(16, t_end / 8, 8), b = run(16, t_end / 16, 16), c = run(16, t_end / 32, 32);
    const double tord = std::log2(diff(a, b) / diff(b, c));

    os << "head orders " << fmt(h1) << " " << fmt(h2) << "; diffusion space " << fmt(s1) << " " << fmt(s2) << "; time "
       << fmt(tord);
    return {h1 >= 1.8 && h2 >= 1.8 && s1 >= 1.8 && s2 >= 1.8 && tord >= 0.9, os.str()};
}

Outcome criterion8()
{
    const auto t0 = Clock::now();
    SimulationConfig cfg;
    cfg.theta = 0.2;  // T_slab = T = 1, 20 steps of 0.05
    const auto spec = cfg.reservoir();
    SlabProblem p;
    p.spec = &spec;
    p.table = &desk_table();
    p.theta = cfg.theta;
    p.alpha_c = cfg.alpha_c;
    p.dt = cfg.dt;
    p.linear = cfg.linear_solver();
    const PicardOptions opts{.tol = cfg.picard_tol, .max_iter = cfg.picard_max_iter, .relaxation = 1.0};
    RadiusField guess(cfg.initial_radius(spec.grid), 0.0);
    for (int k = 1; k <= cfg.slab_steps(); ++k) guess.append(k * cfg.dt, guess.initial());
    const auto sol = picard_slab(guess, p, opts);

    const auto c = run_diffusion(sol.r.history(), spec, desk_table(), p.alpha_c, p.dt, p.linear);
    const double residual = sol.r.max_difference(apply_F(sol.r.initial(), c, p.theta, p.dt));
    double qmax = 0.0;
    for (double q : sol.report.ratios) qmax = std::max(qmax, q);
    std::ostringstream os;
    os << "theta T_slab = " << cfg.theta * cfg.slab_length() << ", " << cfg.slab_steps() << " steps: " << sol.report.iterations
       << " iterations, max ratio " << fmt(qmax, 3) << ", |r - F(c(r))| = " << fmt(residual, 3) << " (tol " << opts.tol << ") in "
       << fmt(seconds_since(t0), 3) << "s";
    const bool ok = sol.report.converged && cfg.slab_steps() == 20 && std::abs(cfg.theta * cfg.slab_length() - 0.2) < 1e-12 &&
                    sol.report.iterations <= 8 && qmax < 0.5 && residual <= opts.tol && seconds_since(t0) <= 300.0;

    const auto res = run_simulation(cfg, {.output_dir = {}, .table = shared_desk_table(), .tabulate = {}});
    remember("theta 0.2", cfg, res);
    return {ok, os.str()};
}

Outcome criterion9()
{
    {
        SimulationConfig cfg;
        cfg.T_slab = 0.25;  // several chained slabs
        remember("desk, 4 slabs", cfg, run_simulation(cfg, {.output_dir = {}, .table = shared_desk_table(), .tabulate = {}}));
    }
    std::ostringstream os;
    bool ok = true;
    double worst_rate = 0.0;
    for (const auto& run : accepted) {
        const auto& R = run.radius;
        for (std::size_t k = 1; k < R.levels(); ++k) {
            const auto& a = R.level(k - 1);
            const auto& b = R.level(k);
            const double bound = run.theta * run.dt;
            for (std::size_t c = 0; c < a.size(); ++c) {
                const double drop = a[c] - b[c];
                if (drop < 0.0 || drop > bound * (1.0 + 1e-12)) {
                    if (ok) os << run.name << " step " << k << " cell " << c << ": drop " << drop << " bound " << bound << "; ";
                    ok = false;
                }
                if (bound > 0.0) worst_rate = std::max(worst_rate, drop / bound);
            }
            const auto& s0 = run.series[k - 1];
            const auto& s1 = run.series[k];
            if (s1.porosity_mean < s0.porosity_mean || s1.dissolved_volume < s0.dissolved_volume) {
                if (ok) os << run.name << " step " << k << ": porosity or dissolved volume decreased; ";
                ok = false;
            }
        }
    }
    os << accepted.size() << " runs audited, max drop / (theta dt) = " << fmt(worst_rate, 4);
    return {ok && accepted.size() >= 2, os.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome criterion10()
{
    const auto dir = fs::temp_directory_path() / ("leach_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    struct Cleanup {
        fs::path p;
        ~Cleanup()
        {
            std::error_code ec;
            fs::remove_all(p, ec);
        }
    } cleanup{dir};

    std::ostringstream os;
    bool ok = true;
    write_table(desk_table(), (dir / "table.csv").string());
    const auto back = read_table((dir / "table.csv").string());
    if (!(back == desk_table())) {
        ok = false;
        os << "table differs after reload; ";
    }
    write_table(back, (dir / "table2.csv").string());
    if (slurp(dir / "table.csv") != slurp(dir / "table2.csv")) {
        ok = false;
        os << "table bytes differ on rewrite; ";
    }

    SimulationConfig cfg;
    cfg.table = (dir / "table.csv").string();
    const auto a = run_simulation(cfg, {.output_dir = (dir / "a").string(), .table = {}, .tabulate = {}});
    const auto b = run_simulation(cfg, {.output_dir = (dir / "b").string(), .table = {}, .tabulate = {}});
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(dir / "a")) {
        const auto name = entry.path().filename();
        ++files;
        if (slurp(entry.path()) != slurp(dir / "b" / name)) {
            ok = false;
            os << name.string() << " differs between runs; ";
        }
    }
    std::size_t snaps = 0;
    for (std::size_t s = 0; s < a.snapshots.size(); ++s) {
        const auto snap = read_snapshot(a.snapshots[s].path);
        const auto& st = a.states[s];
        const auto& r = a.radius.level(static_cast<std::size_t>(a.snapshots[s].step));
        if (!(snap.state.t == st.t && snap.state.c == st.c && snap.state.phi == st.phi && snap.state.p_f == st.p_f &&
              snap.state.p_s == st.p_s && snap.state.w_f == st.w_f && snap.state.w_s == st.w_s && snap.r == r)) {
            ok = false;
            os << a.snapshots[s].path << " does not round-trip; ";
        }
        ++snaps;
    }
    (void)b;
    os << files << " output files bit-identical across two runs, table round trip exact, " << snaps << " snapshots round-trip";
    return {ok && snaps > 0, os.str()};
}

std::set<int> parse_list(const std::string& s)
{
    std::set<int> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.insert(std::stoi(item));
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria"};
    std::string only = "1,2,3,4,5,6,7,8,9,10", expect_fail;
    app.add_option("--only", only, "comma-separated criteria to run");
    app.add_option("--expect-fail", expect_fail, "comma-separated criteria known to fail");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<int, Outcome (*)()>> all{
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
        {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};
    const auto selected = parse_list(only);
    const auto expected = parse_list(expect_fail);
    std::set<int> failed;
    for (const auto& [id, fn] : all) {
        if (!selected.count(id)) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.pass) failed.insert(id);
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << " [" << fmt(seconds_since(t0), 3)
                  << " s]" << std::endl;
    }
    std::set<int> expected_selected;
    for (int id : expected)
        if (selected.count(id)) expected_selected.insert(id);
    if (!expected_selected.empty()) {
        std::cout << "known failures:";
        for (int id : expected_selected) std::cout << ' ' << id;
        std::cout << (failed == expected_selected ? " (as expected)" : " (MISMATCH)") << std::endl;
    }
    return failed == expected_selected ? 0 : 1;
}
