#pragma once

#include "leach/cell_geometry.hpp"
#include "leach/cg.hpp"
#include "leach/coeff_table.hpp"
#include "leach/macro_model.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace leach {

/// Constant, or linear along one axis between the values on the two faces normal to it.
struct FieldProfile {
    enum class Kind { Constant, Linear };
    Kind kind = Kind::Constant;
    double value = 0.0;  ///< constant value
    int axis = 0;        ///< 0, 1, 2 for x1, x2, x3
    double lower = 0.0;  ///< value at x_axis = -1/2
    double upper = 0.0;  ///< value at x_axis = +1/2

    double operator()(const std::array<double, 3>& x) const;
    double min() const;
    double max() const;

    static FieldProfile constant(double v) { return {Kind::Constant, v, 0, 0.0, 0.0}; }
    static FieldProfile linear(int axis, double lower, double upper) { return {Kind::Linear, 0.0, axis, lower, upper}; }
};

struct PressureData {
    enum class Profile { Linear, Cosine };
    double p1 = 1.0;
    double p2 = 0.0;
    /// Interior shape between the wells along x1: straight line, or half cosine
    /// (flat at both wells).
    Profile profile = Profile::Linear;

    double operator()(const std::array<double, 3>& x) const;
};

struct HeadBoundary {
    enum class Mode { Zero, Dirichlet };
    Mode mode = Mode::Zero;  ///< phi = 0 on both wells
    double g1 = 0.0;          ///< Dirichlet head on S1
    double g2 = 0.0;          ///< Dirichlet head on S2
};

struct SimulationConfig {
    // physics
    double theta = 0.1;
    double mu1 = 1.0;
    double lambda0 = 1.0;
    double c_s = 1.0;
    double alpha_c = 1.0;
    // admissible radii; M0 only feeds the slab-length heuristic
    double r_min = 0.05;
    double r_max = 0.45;
    double M0 = 1.0;
    // given fields
    PressureData p0{};
    FieldProfile c0 = FieldProfile::linear(0, 1.0, 0.0);
    FieldProfile r0 = FieldProfile::constant(0.3);
    // grids
    int reservoir_n = 16;
    int cell_n = 16;
    int table_knots = 5;
    // time
    double T = 1.0;
    double dt = 0.05;
    std::optional<double> T_slab;  ///< default min(T, M0 / (2 theta))
    // solver
    double linear_tol = 1e-10;
    int linear_max_iter = 20000;
    double picard_tol = 1e-8;
    int picard_max_iter = 30;
    double relaxation = 1.0;
    HeadBoundary head_bc{};
    // output
    int output_every = 5;  ///< steps between snapshots; the final step is always written
    std::string table;     ///< coefficient table file; empty: tabulate (cached beside the output directory)

    /// Every violation, named by its dotted key; empty when valid.
    std::vector<std::string> violations() const;
    /// Throws ConfigError listing all violations.
    void validate() const;

    double slab_length() const;
    int steps() const;
    int slab_steps() const;

    RadiusBounds bounds() const;
    CellParameters cell_parameters() const;
    CgOptions linear_solver() const;
    ReservoirSpec reservoir() const;
    HeadProblem head_problem() const;
    ScalarField initial_radius(const GridSpec& grid) const;
};

/// Strict parse: unknown keys and wrong types are violations; all are reported together
/// in one ConfigError. Malformed JSON raises ParseError with the line number.
SimulationConfig config_from_json(const std::string& text);
SimulationConfig load_config(const std::string& path);

/// Complete config as pretty-printed JSON, accepted back by config_from_json.
std::string config_to_json(const SimulationConfig& config);

}  // namespace leach
