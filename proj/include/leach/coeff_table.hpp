#pragma once

#include "leach/cell_geometry.hpp"
#include "leach/cell_problems.hpp"
#include "leach/linalg.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace leach {

/// Material constants entering the cell problems.
struct CellParameters {
    double mu1 = 1.0;
    double lambda0 = 1.0;
    double c_s = 1.0;

    void validate() const;
    bool operator==(const CellParameters&) const = default;
};

struct EffectiveCoefficients {
    double r = 0.0;
    double m = 1.0;               ///< exact porosity 1 - (4 pi / 3) r^3
    Mat3 B_w = Mat3::Zero();      ///< permeability
    Mat3 B_c = Mat3::Zero();      ///< diffusivity, energy form
    Voigt6 N_s = Voigt6::Zero();  ///< stiffness, energy form; zero for an isolated grain
    Mat3 B_c_quadratic = Mat3::Zero();
    Voigt6 N_paper = Voigt6::Zero();  ///< sum of D(W) (x) D(W) over the correctors, used by the Lame solve
    bool clamped = false;  ///< set by interpolate when r was outside the knot range

    double k() const { return B_w.trace() / 3.0; }
    double d() const { return B_c.trace() / 3.0; }
};

/// All three cell problems at one radius and resolution.
EffectiveCoefficients compute_coefficients(double r, int n, const CellParameters& params,
                                           const CellSolveOptions& solve = {}, const RadiusBounds& bounds = {});

/// Cell resolution actually used at radius r: n, raised to the next multiple of 8
/// until the grain spans at least two voxels in radius.
int knot_resolution(double r, int n);

struct TableProvenance {
    double tol = 1e-10;
    int max_iter = 100000;
    std::string code_version;
    std::vector<int> knot_resolution;  ///< cell n used per knot

    bool operator==(const TableProvenance&) const = default;
};

/// Effective coefficients on a knot grid with monotone cubic interpolation per entry.
class CoefficientTable {
public:
    CoefficientTable() = default;
    /// Validates the invariants (>= 5 sorted knots, exact porosity, k and d strictly
    /// decreasing, B_w, B_c and N_paper symmetric positive definite, N_s symmetric)
    /// and throws on violation.
    CoefficientTable(std::vector<EffectiveCoefficients> entries, int cell_resolution, CellParameters params,
                     TableProvenance provenance);

    const std::vector<EffectiveCoefficients>& entries() const noexcept { return entries_; }
    std::vector<double> knots() const;
    int cell_resolution() const noexcept { return cell_resolution_; }
    const CellParameters& params() const noexcept { return params_; }
    const TableProvenance& provenance() const noexcept { return provenance_; }
    double r_min() const { return entries_.front().r; }
    double r_max() const { return entries_.back().r; }

    /// Monotone piecewise-cubic interpolation. Radii outside [r_min, r_max] are clamped
    /// (warning logged, `clamped` set). Throws NumericalFailure when an interpolated
    /// tensor is not positive definite.
    EffectiveCoefficients interpolate(double r, bool log_clamp = true) const;

    /// Single-tensor lookups for per-cell use; out-of-range radii are clamped silently
    /// and reported through `clamped`. stiffness() interpolates N_paper.
    Mat3 permeability(double r, bool* clamped = nullptr) const;
    Mat3 diffusivity(double r, bool* clamped = nullptr) const;
    Voigt6 stiffness(double r, bool* clamped = nullptr) const;

    bool operator==(const CoefficientTable& other) const;

private:
    void interpolate_block(double r, std::size_t offset, std::size_t count, double* out, bool* clamped) const;

    std::vector<EffectiveCoefficients> entries_;
    std::vector<std::vector<double>> packed_;
    int cell_resolution_ = 0;
    CellParameters params_{};
    TableProvenance provenance_{};
    // Fritsch-Carlson tangents, one row per knot, one column per packed entry.
    std::vector<std::vector<double>> tangents_;
};

/// Flatten / unflatten the interpolated entries (B_w, B_c, N_s, B_c_quadratic, N_paper).
std::vector<double> pack_entries(const EffectiveCoefficients& e);
void unpack_entries(std::span<const double> packed, EffectiveCoefficients& e);

/// Fritsch-Carlson tangents for data y at strictly increasing x.
std::vector<double> monotone_tangents(std::span<const double> x, std::span<const double> y);

/// Cubic Hermite evaluation on [x0, x1].
double hermite(double x0, double x1, double y0, double y1, double m0, double m1, double x);

struct TabulateOptions {
    CellSolveOptions solve{};
    int workers = 0;  ///< 0: LEACH_WORKERS or the hardware concurrency
};

/// Solve the cell problems at `knots` equally spaced radii in [r_min, r_max].
/// Knots run in parallel; the result does not depend on the worker count.
CoefficientTable tabulate(const RadiusBounds& bounds, int knots, int n, const CellParameters& params,
                          const TabulateOptions& options = {});

/// Worker count from LEACH_WORKERS, else std::thread::hardware_concurrency (at least 1).
int default_workers();

/// Version string recorded in table metadata.
const char* code_version();

}  // namespace leach
