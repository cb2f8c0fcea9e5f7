#include "leach/cli.hpp"

#include "leach/coeff_table.hpp"
#include "leach/config.hpp"
#include "leach/errors.hpp"
#include "leach/free_boundary.hpp"
#include "leach/io.hpp"
#include "leach/log.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <ostream>

namespace leach {

namespace {

int run_cell(double r, int n, const CellParameters& params, double tol, std::ostream& out)
{
    CellSolveOptions solve;
    solve.tol = tol;
    RadiusBounds bounds;
    bounds.r_min = std::min(bounds.r_min, r);
    bounds.r_max = std::max(bounds.r_max, r);
    const auto e = compute_coefficients(r, n, params, solve, bounds);
    out << coefficients_csv({e});
    return 0;
}

int run_tabulate(const std::string& config_path, const std::string& table_path, int workers, std::ostream& out)
{
    const auto config = load_config(config_path);
    TabulateOptions opts;
    opts.workers = workers;
    const auto table = tabulate(config.bounds(), config.table_knots, config.cell_n, config.cell_parameters(), opts);
    write_table(table, table_path);
    out << "wrote " << table.entries().size() << " knots to " << table_path << '\n';
    return 0;
}

int run_run(const std::string& config_path, const std::string& dir, const std::string& table, std::ostream& out)
{
    auto config = load_config(config_path);
    if (!table.empty()) config.table = table;
    RunOptions opts;
    opts.output_dir = dir;
    const auto result = run_simulation(config, opts);
    const auto& last = result.series.back();
    out << "steps " << result.series.size() - 1 << ", slabs " << result.picard.size() << ", snapshots "
        << result.snapshots.size() << '\n';
    for (const auto& rep : result.picard) out << "slab " << rep.slab << ": " << rep.iterations << " Picard iterations\n";
    out.precision(10);
    out << "final t " << last.t << ": dissolved volume " << last.dissolved_volume << ", c in [" << last.c_min << ", "
        << last.c_max << "], r in [" << last.r_min << ", " << last.r_max << "]\n";
    if (result.head_extension) out << "note: non-zero Dirichlet head data were used\n";
    if (!result.table_path.empty()) out << "table " << result.table_path << '\n';
    out << "output " << dir << '\n';
    return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Homogenized acid-leaching simulator"};
    app.require_subcommand(1);

    double r = 0.25, tol = 1e-10;
    int n = 16, workers = 0;
    CellParameters params;
    auto* cell = app.add_subcommand("cell", "Solve the cell problems at one radius and print the coefficients");
    cell->add_option("--r", r, "grain radius")->required();
    cell->add_option("--n", n, "cell resolution")->required();
    cell->add_option("--mu1", params.mu1, "viscosity");
    cell->add_option("--lambda0", params.lambda0, "shear constant");
    cell->add_option("--c_s", params.c_s, "sound speed");
    cell->add_option("--tol", tol, "linear solver tolerance");

    std::string config_path, out_path, table_path;
    auto* tab = app.add_subcommand("tabulate", "Tabulate effective coefficients for a config");
    tab->add_option("--config", config_path, "config file (JSON)")->required();
    tab->add_option("--out", out_path, "table CSV to write")->required();
    tab->add_option("--workers", workers, "worker threads (default LEACH_WORKERS or all cores)");

    auto* run = app.add_subcommand("run", "Run a simulation");
    run->add_option("--config", config_path, "config file (JSON)")->required();
    run->add_option("--out", out_path, "output directory")->required();
    run->add_option("--table", table_path, "coefficient table (overrides output.table)");

    auto* check = app.add_subcommand("check", "Run the invariant suite");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    if (!argv_rev.empty()) argv_rev.pop_back();  // program name
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: invalid arguments: " << e.what() << '\n';
        return 1;
    }

    try {
        if (cell->parsed()) return run_cell(r, n, params, tol, out);
        if (tab->parsed()) return run_tabulate(config_path, out_path, workers, out);
        if (run->parsed()) return run_run(config_path, out_path, table_path, out);
        if (check->parsed()) {
            const int failures = run_checks(out);
            out << (failures == 0 ? "all checks passed" : std::to_string(failures) + " checks failed") << '\n';
            return failures == 0 ? 0 : 2;
        }
    } catch (const ConfigError& e) {
        err << "error: invalid configuration (" << e.violations().size() << " violations)\n";
        for (const auto& v : e.violations()) err << "  " << v << '\n';
        return 1;
    } catch (const ParseError& e) {
        err << "error: parse error: " << e.what() << '\n';
        return 1;
    } catch (const InvalidInput& e) {
        err << "error: invalid input: " << e.what() << '\n';
        return 1;
    } catch (const PicardError& e) {
        err << "error: numerical failure: " << e.what() << '\n';
        err << "  Picard differences:";
        for (double d : e.report().differences) err << ' ' << d;
        err << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: numerical failure: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

int cli_main(int argc, const char* const* argv)
{
    std::vector<std::string> args(argv, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace leach
