#pragma once

#include "leach/coeff_table.hpp"
#include "leach/macro_model.hpp"

#include <cmath>
#include <numbers>

// Shared fixtures for the macroscopic tests: a cheap table with smooth, strictly
// decreasing coefficients that satisfies every table invariant.
namespace leach::testing {

inline std::vector<EffectiveCoefficients> synthetic_entries(int count = 5, double r_min = 0.05, double r_max = 0.45)
{
    std::vector<EffectiveCoefficients> out;
    for (int k = 0; k < count; ++k) {
        EffectiveCoefficients e;
        e.r = k + 1 == count ? r_max : r_min + (r_max - r_min) * k / (count - 1);
        e.m = porosity(e.r);
        e.B_w = Mat3::Identity() * (1.0 / (1.0 + 20.0 * e.r));
        e.B_c = Mat3::Identity() * (e.m - 0.5 * e.r);
        e.B_c_quadratic = Mat3::Identity() * 0.5 * e.r;
        const double solid = 1.0 - e.m;
        for (int v = 0; v < 6; ++v) e.N_paper(v, v) = solid * (v < 3 ? 1.0 : 0.5);
        out.push_back(e);
    }
    return out;
}

inline const CoefficientTable& synthetic_table()
{
    static const CoefficientTable t = [] {
        auto entries = synthetic_entries();
        TableProvenance prov;
        prov.code_version = "synthetic";
        prov.knot_resolution.assign(entries.size(), 16);
        return CoefficientTable(std::move(entries), 16, CellParameters{}, prov);
    }();
    return t;
}

inline ReservoirSpec constant_spec(int n, double c0 = 0.5, double p1 = 0.0, double p2 = 0.0)
{
    ReservoirSpec s;
    s.grid = GridSpec::unit_cube(n);
    s.p1 = p1;
    s.p2 = p2;
    s.p0 = [p1, p2](const std::array<double, 3>& x) { return p1 + (p2 - p1) * (x[0] + 0.5); };
    s.c0 = [c0](const std::array<double, 3>&) { return c0; };
    return s;
}

inline double l2_error(const ScalarField& f, const SpatialFunction& exact)
{
    const auto& g = f.grid();
    double s = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) {
        const auto [i, j, k] = g.ijk(c);
        const double e = f[c] - exact(g.center(i, j, k));
        s += e * e * g.cell_volume();
    }
    return std::sqrt(s);
}

// phi* = sin(pi x1) cos(pi x2) on S1, S2 with matching source and side fluxes, for a
// uniform isotropic permeability k.
inline HeadProblem manufactured_head(double k)
{
    constexpr double pi = std::numbers::pi;
    HeadProblem hp;
    hp.g = [](const std::array<double, 3>& x) { return std::sin(pi * x[0]) * std::cos(pi * x[1]); };
    hp.source = [k](const std::array<double, 3>& x) { return 2.0 * pi * pi * k * std::sin(pi * x[0]) * std::cos(pi * x[1]); };
    hp.neumann_flux = [k](const std::array<double, 3>& x, int face) {
        // k grad(phi*) . n on the four side faces.
        const double dy = -pi * std::sin(pi * x[0]) * std::sin(pi * x[1]);
        if (face == 2) return -k * dy;
        if (face == 3) return k * dy;
        return 0.0;
    };
    return hp;
}

}  // namespace leach::testing
