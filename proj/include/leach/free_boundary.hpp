#pragma once

#include "leach/config.hpp"
#include "leach/errors.hpp"
#include "leach/grid.hpp"
#include "leach/macro_model.hpp"

#include <memory>
#include <string>
#include <vector>

namespace leach {

/// Grain radius per reservoir cell at a sequence of time levels, level 0 = r0.
/// Every appended level must stay in [0, 1/2] and must not exceed the previous one.
class RadiusField {
public:
    RadiusField() = default;
    explicit RadiusField(ScalarField r0, double t0 = 0.0);

    /// Throws IntegrityError on growth, out-of-range values, a grid mismatch or
    /// non-increasing time.
    void append(double t, ScalarField r);

    const GridSpec& grid() const { return levels_.front().grid(); }
    std::size_t levels() const noexcept { return levels_.size(); }
    const ScalarField& level(std::size_t k) const { return levels_.at(k); }
    const ScalarField& initial() const { return levels_.front(); }
    const ScalarField& back() const { return levels_.back(); }
    double time(std::size_t k) const { return times_.at(k); }
    const std::vector<ScalarField>& history() const noexcept { return levels_; }
    const std::vector<double>& times() const noexcept { return times_; }

    /// Sup norm of the difference over all levels and cells; level counts must agree.
    double max_difference(const RadiusField& other) const;

private:
    std::vector<ScalarField> levels_;
    std::vector<double> times_;
};

/// R(t_k) = max(0, r0 - theta * integral_0^{t_k} c dt) with the trapezoidal rule on
/// c_history (one field per level, c_history[0] at t0). Negative or non-finite c is rejected.
RadiusField apply_F(const ScalarField& r0, const std::vector<ScalarField>& c_history, double theta, double dt,
                    double t0 = 0.0);

struct PicardReport {
    int slab = 0;
    int iterations = 0;
    std::vector<double> differences;  ///< sup |r_{k+1} - r_k| per iterate
    std::vector<double> ratios;       ///< successive difference ratios
    bool converged = false;
};

class PicardError : public NumericalFailure {
public:
    PicardError(const std::string& what, PicardReport report, bool diverging)
        : NumericalFailure(what), report_(std::move(report)), diverging_(diverging) {}

    const PicardReport& report() const noexcept { return report_; }
    bool diverging() const noexcept { return diverging_; }

private:
    PicardReport report_;
    bool diverging_;
};

struct SlabProblem {
    const ReservoirSpec* spec = nullptr;
    const CoefficientTable* table = nullptr;
    double theta = 0.1;
    double alpha_c = 1.0;
    double dt = 0.05;
    ScalarField c_start;  ///< concentration at the slab start; empty means c0
    CgOptions linear{};
};

struct PicardOptions {
    double tol = 1e-8;
    int max_iter = 30;
    double relaxation = 1.0;  ///< r_{k+1} = (1 - w) r_k + w F(r_k)
};

struct SlabSolution {
    RadiusField r;
    std::vector<ScalarField> c;  ///< c(r), one per level
    PicardReport report;
    double residual = 0.0;  ///< sup |r - F(c(r))| of the returned pair
};

/// Picard iteration r_{k+1} = F(c(r_k)) on one slab; the guess fixes the slab's
/// initial radius (level 0) and its time levels. Returns the last iterate r_k together
/// with c(r_k), whose residual is the last recorded difference.
SlabSolution picard_slab(const RadiusField& guess, const SlabProblem& problem, const PicardOptions& options = {},
                         int slab = 0);

struct TimeSeriesRow {
    int step = 0;
    double t = 0.0;
    double dissolved_volume = 0.0;
    double c_min = 0.0, c_mean = 0.0, c_max = 0.0;
    double r_min = 0.0, r_mean = 0.0, r_max = 0.0;
    double porosity_mean = 0.0;
};

struct SnapshotRecord {
    int step = 0;
    double t = 0.0;
    std::string path;  ///< empty when no output directory was given
};

struct SimulationResult {
    std::shared_ptr<const CoefficientTable> table;
    std::string table_path;  ///< file the table came from or was cached to, if any
    RadiusField radius;
    std::vector<ScalarField> concentration;  ///< one per time level
    std::vector<MacroState> states;          ///< full state at each snapshot
    std::vector<SnapshotRecord> snapshots;
    std::vector<TimeSeriesRow> series;
    std::vector<PicardReport> picard;
    std::string config_echo;
    bool head_extension = false;  ///< non-zero Dirichlet head data were used
};

struct RunOptions {
    std::string output_dir;                       ///< empty: nothing written
    std::shared_ptr<const CoefficientTable> table;  ///< overrides config.table and tabulation
    TabulateOptions tabulate{};
};

/// Slab-by-slab Picard march over (0, T], then head, Lame and pressures at the snapshot
/// steps. Failures are rethrown with the stage, slab and step in the message.
SimulationResult run_simulation(const SimulationConfig& config, const RunOptions& options = {});

/// Table for a config: loaded from config.table, or a cached sibling file
/// `<output_dir>.table.csv` when it matches, or freshly tabulated (and cached).
std::shared_ptr<const CoefficientTable> obtain_table(const SimulationConfig& config, const std::string& output_dir,
                                                     const TabulateOptions& options, std::string* path_used = nullptr);

}  // namespace leach
