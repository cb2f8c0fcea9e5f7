#include "leach/free_boundary.hpp"

#include "leach/io.hpp"
#include "leach/log.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace leach {

RadiusField::RadiusField(ScalarField r0, double t0)
{
    if (r0.size() == 0) throw InvalidInput("RadiusField: empty initial field");
    for (std::size_t c = 0; c < r0.size(); ++c)
        if (!(r0[c] >= 0.0 && r0[c] <= 0.5)) throw InvalidInput("RadiusField: initial radius outside [0, 1/2]");
    levels_.push_back(std::move(r0));
    times_.push_back(t0);
}

void RadiusField::append(double t, ScalarField r)
{
    if (levels_.empty()) throw IntegrityError("RadiusField: append before initialization");
    if (!(r.grid() == grid())) throw IntegrityError("RadiusField: grid mismatch");
    if (!(t > times_.back())) throw IntegrityError("RadiusField: time levels must increase");
    const ScalarField& prev = levels_.back();
    for (std::size_t c = 0; c < r.size(); ++c) {
        if (!(r[c] >= 0.0 && r[c] <= 0.5)) throw IntegrityError("RadiusField: radius outside [0, 1/2]");
        if (r[c] > prev[c]) {
            std::ostringstream os;
            os.precision(17);
            os << "RadiusField: radius grows at cell " << c << " (" << prev[c] << " -> " << r[c] << ")";
            throw IntegrityError(os.str());
        }
    }
    levels_.push_back(std::move(r));
    times_.push_back(t);
}

double RadiusField::max_difference(const RadiusField& other) const
{
    if (levels() != other.levels()) throw InvalidInput("RadiusField: level counts differ");
    double d = 0.0;
    for (std::size_t k = 0; k < levels(); ++k)
        for (std::size_t c = 0; c < levels_[k].size(); ++c) d = std::max(d, std::abs(levels_[k][c] - other.levels_[k][c]));
    return d;
}

RadiusField apply_F(const ScalarField& r0, const std::vector<ScalarField>& c_history, double theta, double dt, double t0)
{
    if (!(theta >= 0.0) || !std::isfinite(theta)) throw InvalidInput("apply_F: theta must be finite and >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("apply_F: dt must be positive");
    if (c_history.empty()) throw InvalidInput("apply_F: empty concentration history");
    for (std::size_t k = 0; k < c_history.size(); ++k) {
        if (!(c_history[k].grid() == r0.grid())) throw InvalidInput("apply_F: concentration grid differs from r0");
        for (std::size_t c = 0; c < c_history[k].size(); ++c)
            if (!(c_history[k][c] >= 0.0) || !std::isfinite(c_history[k][c]))
                throw InvalidInput("apply_F: negative or non-finite concentration at level " + std::to_string(k));
    }

    RadiusField out(r0, t0);
    std::vector<double> integral(r0.size(), 0.0);
    for (std::size_t k = 1; k < c_history.size(); ++k) {
        ScalarField r(r0.grid());
        for (std::size_t c = 0; c < r0.size(); ++c) {
            integral[c] += 0.5 * dt * (c_history[k - 1][c] + c_history[k][c]);
            r[c] = std::max(0.0, r0[c] - theta * integral[c]);
        }
        out.append(t0 + static_cast<double>(k) * dt, std::move(r));
    }
    return out;
}

SlabSolution picard_slab(const RadiusField& guess, const SlabProblem& problem, const PicardOptions& options, int slab)
{
    if (problem.spec == nullptr || problem.table == nullptr) throw InvalidInput("picard_slab: spec and table are required");
    if (!(options.tol > 0.0)) throw InvalidInput("picard_slab: tol must be positive");
    if (options.max_iter < 1) throw InvalidInput("picard_slab: max_iter must be >= 1");
    if (!(options.relaxation > 0.0 && options.relaxation <= 1.0)) throw InvalidInput("picard_slab: relaxation must be in (0, 1]");
    if (!(problem.dt > 0.0)) throw InvalidInput("picard_slab: dt must be positive");
    if (guess.levels() < 2) throw InvalidInput("picard_slab: the slab needs at least one step");
    if (!(guess.grid() == problem.spec->grid)) throw InvalidInput("picard_slab: radius grid differs from the reservoir grid");
    const double t0 = guess.time(0);
    for (std::size_t k = 1; k < guess.levels(); ++k) {
        const double expected = t0 + static_cast<double>(k) * problem.dt;
        if (std::abs(guess.time(k) - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
            throw InvalidInput("picard_slab: guess time levels are not spaced by dt");
    }
    const ScalarField c_start = problem.c_start.size() > 0 ? problem.c_start : problem.spec->c0_cells();

    PicardReport report;
    report.slab = slab;
    RadiusField current = guess;
    for (int it = 1; it <= options.max_iter; ++it) {
        auto c = run_diffusion(current.history(), *problem.spec, *problem.table, problem.alpha_c, problem.dt, problem.linear,
                               &c_start);
        RadiusField next = apply_F(current.initial(), c, problem.theta, problem.dt, t0);
        const double diff = current.max_difference(next);
        report.iterations = it;
        if (!report.differences.empty() && report.differences.back() > 0.0)
            report.ratios.push_back(diff / report.differences.back());
        report.differences.push_back(diff);
        if (!std::isfinite(diff)) throw PicardError("picard_slab: non-finite iterate difference", report, true);
        if (diff <= options.tol) {
            report.converged = true;
            return {std::move(current), std::move(c), std::move(report), diff};
        }
        if (options.relaxation == 1.0) {
            current = std::move(next);
        } else {
            RadiusField blended(current.initial(), t0);
            for (std::size_t k = 1; k < current.levels(); ++k) {
                ScalarField r(current.grid());
                for (std::size_t cell = 0; cell < r.size(); ++cell)
                    r[cell] = (1.0 - options.relaxation) * current.level(k)[cell] + options.relaxation * next.level(k)[cell];
                blended.append(current.time(k), std::move(r));
            }
            current = std::move(blended);
        }
    }

    const auto& d = report.differences;
    const bool diverging = d.size() >= 2 && d.back() >= d[d.size() - 2];
    std::ostringstream os;
    os.precision(3);
    os << "picard_slab: slab " << slab << " did not converge in " << options.max_iter << " iterations (last difference "
       << d.back() << ", tol " << options.tol << ")";
    if (diverging) os << "; differences are not decreasing, reduce time.T_slab or set solver.relaxation below 1";
    throw PicardError(os.str(), std::move(report), diverging);
}

namespace {

[[noreturn]] void rethrow_in_stage(const std::string& stage, int slab, int step)
{
    const std::string where = "stage " + stage + ", slab " + std::to_string(slab) + ", step " + std::to_string(step) + ": ";
    try {
        throw;
    } catch (const PicardError& e) {
        throw PicardError(where + e.what(), e.report(), e.diverging());
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& e) {
        throw InvalidInput(where + e.what());
    } catch (const IntegrityError& e) {
        throw IntegrityError(where + e.what());
    } catch (const MaxPrincipleViolation& e) {
        throw MaxPrincipleViolation(where + e.what());
    } catch (const NonConvergence& e) {
        throw NonConvergence(where + e.what(), e.final_residual(), e.iterations());
    } catch (const std::exception& e) {
        throw NumericalFailure(where + e.what());
    }
}

bool table_matches(const CoefficientTable& t, const SimulationConfig& config)
{
    return t.params() == config.cell_parameters() && t.cell_resolution() == config.cell_n &&
           t.entries().size() == static_cast<std::size_t>(config.table_knots) && t.r_min() == config.r_min &&
           t.r_max() == config.r_max && t.provenance().code_version == code_version();
}

TimeSeriesRow series_row(int step, double t, const ScalarField& r, const ScalarField& r0, const ScalarField& c)
{
    TimeSeriesRow row;
    row.step = step;
    row.t = t;
    row.dissolved_volume = dissolved_volume(r, r0);
    row.c_min = c.min();
    row.c_mean = c.mean();
    row.c_max = c.max();
    row.r_min = r.min();
    row.r_mean = r.mean();
    row.r_max = r.max();
    row.porosity_mean = porosity_field(r).mean();
    return row;
}

}  // namespace

std::shared_ptr<const CoefficientTable> obtain_table(const SimulationConfig& config, const std::string& output_dir,
                                                     const TabulateOptions& options, std::string* path_used)
{
    if (!config.table.empty()) {
        auto t = std::make_shared<const CoefficientTable>(read_table(config.table));
        if (!(t->params() == config.cell_parameters()))
            throw InvalidInput("output.table: table was built with different mu1, lambda0 or c_s");
        if (!table_matches(*t, config)) log_warning("output.table: table grid differs from the grid section of the config");
        if (path_used != nullptr) *path_used = config.table;
        return t;
    }

    std::string cache;
    if (!output_dir.empty()) {
        std::filesystem::path dir(output_dir);
        if (!dir.has_filename()) dir = dir.parent_path();
        cache = dir.string() + ".table.csv";
        if (std::filesystem::exists(cache)) {
            try {
                auto t = std::make_shared<const CoefficientTable>(read_table(cache));
                if (table_matches(*t, config)) {
                    log_info("using cached coefficient table " + cache);
                    if (path_used != nullptr) *path_used = cache;
                    return t;
                }
                log_info("cached table " + cache + " does not match the config; tabulating");
            } catch (const Error& e) {
                log_warning("ignoring unreadable cached table " + cache + ": " + e.what());
            }
        }
    }

    log_info("tabulating effective coefficients");
    auto t = std::make_shared<const CoefficientTable>(
        tabulate(config.bounds(), config.table_knots, config.cell_n, config.cell_parameters(), options));
    if (!cache.empty()) {
        write_table(*t, cache);
        if (path_used != nullptr) *path_used = cache;
    }
    return t;
}

SimulationResult run_simulation(const SimulationConfig& config, const RunOptions& options)
{
    config.validate();
    const ReservoirSpec spec = config.reservoir();
    spec.validate();

    SimulationResult result;
    result.config_echo = config_to_json(config);
    result.head_extension = config.head_bc.mode == HeadBoundary::Mode::Dirichlet;
    if (result.head_extension) log_info("head_bc: non-zero Dirichlet head data in use");

    if (!options.output_dir.empty()) std::filesystem::create_directories(options.output_dir);
    try {
        result.table = options.table ? options.table : obtain_table(config, options.output_dir, options.tabulate, &result.table_path);
    } catch (...) {
        rethrow_in_stage("table", 0, 0);
    }
    const CoefficientTable& table = *result.table;

    const ScalarField r0 = config.initial_radius(spec.grid);
    if (r0.min() < table.r_min() || r0.max() > table.r_max())
        throw InvalidInput("fields.r0: initial radius outside the table range");
    result.radius = RadiusField(r0, 0.0);
    result.concentration.push_back(spec.c0_cells());

    const int steps = config.steps();
    const int per_slab = config.slab_steps();
    SlabProblem problem;
    problem.spec = &spec;
    problem.table = &table;
    problem.theta = config.theta;
    problem.alpha_c = config.alpha_c;
    problem.dt = config.dt;
    problem.linear = config.linear_solver();
    const PicardOptions picard{config.picard_tol, config.picard_max_iter, config.relaxation};

    int done = 0;
    for (int slab = 0; done < steps; ++slab) {
        const int ns = std::min(per_slab, steps - done);
        // Guess: the radius frozen at its slab-start value.
        RadiusField guess(result.radius.back(), static_cast<double>(done) * config.dt);
        for (int k = 1; k <= ns; ++k) guess.append(static_cast<double>(done + k) * config.dt, result.radius.back());
        problem.c_start = result.concentration.back();
        SlabSolution sol;
        try {
            sol = picard_slab(guess, problem, picard, slab);
        } catch (...) {
            rethrow_in_stage("picard", slab, done);
        }
        log_info("slab " + std::to_string(slab) + ": Picard converged in " + std::to_string(sol.report.iterations) + " iterations");
        result.picard.push_back(sol.report);
        for (int k = 1; k <= ns; ++k) {
            result.radius.append(static_cast<double>(done + k) * config.dt, sol.r.level(static_cast<std::size_t>(k)));
            result.concentration.push_back(std::move(sol.c[static_cast<std::size_t>(k)]));
        }
        done += ns;
    }

    for (int k = 0; k <= steps; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        result.series.push_back(series_row(k, result.radius.time(kk), result.radius.level(kk), r0, result.concentration[kk]));
    }

    const HeadProblem head = config.head_problem();
    const ScalarField p0 = spec.p0_cells();
    const int slab_of = std::max(1, per_slab);
    for (int k = 0; k <= steps; ++k) {
        if (k % config.output_every != 0 && k != steps) continue;
        const auto kk = static_cast<std::size_t>(k);
        try {
            MacroState state;
            state.t = result.radius.time(kk);
            state.c = result.concentration[kk];
            const auto hs = solve_pressure_head(result.radius.level(kk), table, spec, config.mu1, head, problem.linear);
            state.phi = hs.phi;
            state.w_f = hs.w_f;
            // p_f = p0 + d(phi)/dt, backward difference in time; phi is constant before t = 0.
            state.p_f = p0;
            if (k > 0) {
                const auto prev = solve_pressure_head(result.radius.level(kk - 1), table, spec, config.mu1, head, problem.linear);
                for (std::size_t c = 0; c < p0.size(); ++c) state.p_f[c] += (hs.phi[c] - prev.phi[c]) / config.dt;
            }
            const auto ls = solve_lame(result.radius.level(kk), table, spec, config.lambda0, config.c_s, problem.linear);
            state.w_s = ls.w_s;
            state.p_s = ls.p_s;

            SnapshotRecord rec{k, state.t, {}};
            if (!options.output_dir.empty()) {
                char name[64];
                std::snprintf(name, sizeof name, "snapshot_%05d.vtk", k);
                rec.path = (std::filesystem::path(options.output_dir) / name).string();
                write_snapshot(state, result.radius.level(kk), rec.path);
            }
            result.snapshots.push_back(rec);
            result.states.push_back(std::move(state));
        } catch (...) {
            rethrow_in_stage("output", k == 0 ? 0 : (k - 1) / slab_of, k);
        }
    }

    if (!options.output_dir.empty()) {
        try {
            const std::filesystem::path dir(options.output_dir);
            std::ofstream(dir / "config.json", std::ios::binary) << result.config_echo;
            write_time_series(result.series, (dir / "timeseries.csv").string());
            write_picard_reports(result.picard, (dir / "picard.csv").string());
            write_snapshot_index(result.snapshots, (dir / "snapshots.csv").string());
        } catch (...) {
            rethrow_in_stage("output", 0, steps);
        }
    }
    return result;
}

}  // namespace leach
