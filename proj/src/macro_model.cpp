#include "leach/macro_model.hpp"

#include "leach/elliptic.hpp"
#include "leach/errors.hpp"
#include "leach/hex_fe.hpp"
#include "leach/log.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace leach {

namespace {

const BoundarySpec reservoir_bc{FaceCondition::Dirichlet, FaceCondition::Dirichlet, FaceCondition::Neumann,
                                FaceCondition::Neumann,   FaceCondition::Neumann,   FaceCondition::Neumann};

bool is_well(int face) { return face == 0 || face == 1; }

void check_grid(const ScalarField& f, const ReservoirSpec& spec, const char* what)
{
    if (!(f.grid() == spec.grid)) throw InvalidInput(std::string(what) + ": field grid differs from the reservoir grid");
}

void log_clamped(std::size_t count, const char* what)
{
    if (count == 0) return;
    std::ostringstream os;
    os << what << ": " << count << " cell radii outside the table range were clamped";
    log_warning(os.str());
}

ScalarField sample(const GridSpec& g, const SpatialFunction& fn)
{
    ScalarField out(g);
    for (std::size_t c = 0; c < g.size(); ++c) {
        const auto [i, j, k] = g.ijk(c);
        out[c] = fn(g.center(i, j, k));
    }
    return out;
}

double uniform_spacing(const GridSpec& g)
{
    if (g.h[0] != g.h[1] || g.h[0] != g.h[2]) throw InvalidInput("reservoir grid must have equal spacings");
    return g.h[0];
}

}  // namespace

std::array<double, 3> boundary_face_center(const GridSpec& grid, std::size_t cell, int face)
{
    const auto [i, j, k] = grid.ijk(cell);
    auto x = grid.center(i, j, k);
    const int axis = face_axis(face);
    x[static_cast<std::size_t>(axis)] += 0.5 * face_side(face) * grid.h[static_cast<std::size_t>(axis)];
    return x;
}

void ReservoirSpec::validate() const
{
    grid.validate();
    if (grid.periodic[0] || grid.periodic[1] || grid.periodic[2]) throw InvalidInput("reservoir grid must not be periodic");
    uniform_spacing(grid);
    if (!p0 || !c0) throw InvalidInput("reservoir: p0 and c0 must be given");
    if (!std::isfinite(p1) || !std::isfinite(p2)) throw InvalidInput("reservoir: well pressures must be finite");
    const double ptol = 1e-12 * std::max({1.0, std::abs(p1), std::abs(p2)});
    for (std::size_t c = 0; c < grid.size(); ++c) {
        const auto [i, j, k] = grid.ijk(c);
        const auto x = grid.center(i, j, k);
        const double pv = p0(x), cv = c0(x);
        if (!std::isfinite(pv)) throw InvalidInput("reservoir: p0 is not finite");
        if (!(cv >= 0.0 && cv <= 1.0)) throw InvalidInput("reservoir: c0 outside [0, 1]");
        for (int f = 0; f < 6; ++f) {
            if (neighbor(grid, c, f)) continue;
            const auto xf = boundary_face_center(grid, c, f);
            const double cf = c0(xf);
            if (!(cf >= 0.0 && cf <= 1.0)) throw InvalidInput("reservoir: c0 outside [0, 1] on the boundary");
            if (f == 0 && std::abs(p0(xf) - p1) > ptol) throw InvalidInput("reservoir: p0 differs from p1 on S1");
            if (f == 1 && std::abs(p0(xf) - p2) > ptol) throw InvalidInput("reservoir: p0 differs from p2 on S2");
        }
    }
}

ScalarField ReservoirSpec::p0_cells() const { return sample(grid, p0); }

ScalarField ReservoirSpec::c0_cells() const { return sample(grid, c0); }

std::vector<Mat3> permeability_field(const CoefficientTable& table, const ScalarField& r)
{
    std::vector<Mat3> out(r.size());
    std::size_t clamped = 0;
    for (std::size_t c = 0; c < r.size(); ++c) {
        bool cl = false;
        out[c] = table.permeability(r[c], &cl);
        clamped += cl ? 1 : 0;
    }
    log_clamped(clamped, "permeability");
    return out;
}

std::vector<Mat3> diffusivity_field(const CoefficientTable& table, const ScalarField& r)
{
    std::vector<Mat3> out(r.size());
    std::size_t clamped = 0;
    for (std::size_t c = 0; c < r.size(); ++c) {
        bool cl = false;
        out[c] = table.diffusivity(r[c], &cl);
        clamped += cl ? 1 : 0;
    }
    log_clamped(clamped, "diffusivity");
    return out;
}

std::vector<Voigt6> stiffness_field(const CoefficientTable& table, const ScalarField& r)
{
    std::vector<Voigt6> out(r.size());
    std::size_t clamped = 0;
    for (std::size_t c = 0; c < r.size(); ++c) {
        bool cl = false;
        out[c] = table.stiffness(r[c], &cl);
        clamped += cl ? 1 : 0;
    }
    log_clamped(clamped, "stiffness");
    return out;
}

ScalarField porosity_field(const ScalarField& r)
{
    ScalarField m(r.grid());
    for (std::size_t c = 0; c < r.size(); ++c) m[c] = porosity(std::clamp(r[c], 0.0, 0.5));
    return m;
}

HeadSolution solve_pressure_head(const ScalarField& r, const CoefficientTable& table, const ReservoirSpec& spec,
                                 double mu1, const HeadProblem& head, const CgOptions& solver)
{
    spec.validate();
    check_grid(r, spec, "solve_pressure_head");
    if (!(mu1 > 0.0)) throw InvalidInput("solve_pressure_head: mu1 must be positive");
    const GridSpec& g = spec.grid;
    const double h = uniform_spacing(g);
    const double vol = g.cell_volume();
    const double area = h * h;

    const auto k = permeability_field(table, r);
    const EllipticSystem sys = assemble_elliptic(g, k, reservoir_bc);
    const std::size_t nc = g.size();

    std::vector<double> rhs(nc, 0.0);
    if (head.source) {
        for (std::size_t c = 0; c < nc; ++c) {
            const auto [i, j, kk] = g.ijk(c);
            rhs[c] += head.source(g.center(i, j, kk)) * vol;
        }
    }
    if (head.g)
        for (const auto& f : sys.dirichlet_faces) rhs[f.unknown] += f.transmissibility * head.g(boundary_face_center(g, f.cell, f.face));
    if (head.neumann_flux)
        for (std::size_t c = 0; c < nc; ++c)
            for (int f = 2; f < 6; ++f)
                if (!neighbor(g, c, f)) rhs[c] += head.neumann_flux(boundary_face_center(g, c, f), f) * area;

    const auto res = cg_solve(sys.op, rhs, solver);
    HeadSolution out;
    out.iterations = res.iterations;
    out.phi = ScalarField(g, res.x);
    out.w_f = VectorField(g);

    for (std::size_t c = 0; c < nc; ++c) {
        // Normal gradient and normal flux (B grad phi . n_out) on each face.
        Vec3 grad = Vec3::Zero();
        double outflow = 0.0;
        for (int f = 0; f < 6; ++f) {
            const int axis = face_axis(f);
            const int side = face_side(f);
            double normal_grad = 0.0;  // grad phi . n_out
            double flux = 0.0;         // (B grad phi) . n_out * area
            if (const auto nb = neighbor(g, c, f)) {
                normal_grad = (out.phi[*nb] - out.phi[c]) / h;
                flux = face_transmissibility(g, k[c], k[*nb], axis) * (out.phi[*nb] - out.phi[c]);
            } else if (is_well(f)) {
                const double gv = head.g ? head.g(boundary_face_center(g, c, f)) : 0.0;
                normal_grad = (gv - out.phi[c]) / (0.5 * h);
                flux = k[c](axis, axis) * area * normal_grad;
            } else if (head.neumann_flux) {
                const double q = head.neumann_flux(boundary_face_center(g, c, f), f);
                normal_grad = q / k[c](axis, axis);
                flux = q * area;
            }
            grad[axis] += 0.5 * side * normal_grad;
            outflow += flux;
        }
        const Vec3 w = -(1.0 / mu1) * (k[c] * grad);
        for (int d = 0; d < 3; ++d) out.w_f.at(c, d) = w[d];
        double source = 0.0;
        if (head.source) {
            const auto [i, j, kk] = g.ijk(c);
            source = head.source(g.center(i, j, kk)) * vol;
        }
        // div w_f = -(1/mu1) div(B grad phi); mass balance defect net of the source.
        out.max_divergence = std::max(out.max_divergence, std::abs(outflow + source) / (mu1 * vol));
    }
    return out;
}

LameSolution solve_lame(const ScalarField& r, const CoefficientTable& table, const ReservoirSpec& spec, double lambda0,
                        double c_s, const CgOptions& solver)
{
    spec.validate();
    check_grid(r, spec, "solve_lame");
    if (!(lambda0 > 0.0) || !(c_s > 0.0)) throw InvalidInput("solve_lame: lambda0 and c_s must be positive");
    const GridSpec& g = spec.grid;
    const double h = uniform_spacing(g);
    const int n0 = g.n[0], n1 = g.n[1], n2 = g.n[2];
    const std::array<int, 3> dims{n0 + 1, n1 + 1, n2 + 1};
    const std::size_t nn = static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(dims[2]);
    auto node_index = [&](int i, int j, int k) {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(k));
    };
    auto node_position = [&](std::size_t node) {
        const auto nx = static_cast<std::size_t>(dims[0]), ny = static_cast<std::size_t>(dims[1]);
        return std::array<double, 3>{-0.5 * n0 * h + h * static_cast<double>(node % nx),
                                     -0.5 * n1 * h + h * static_cast<double>((node / nx) % ny),
                                     -0.5 * n2 * h + h * static_cast<double>(node / (nx * ny))};
    };

    std::vector<std::int64_t> node_unknown(nn, -1);
    std::size_t blocks = 0;
    for (int k = 1; k < n2; ++k)
        for (int j = 1; j < n1; ++j)
            for (int i = 1; i < n0; ++i) node_unknown[node_index(i, j, k)] = static_cast<std::int64_t>(blocks++);
    if (blocks == 0) throw InvalidInput("solve_lame: grid has no interior nodes");

    std::vector<std::size_t> elements(g.size());
    for (std::size_t c = 0; c < g.size(); ++c) {
        const auto [i, j, k] = g.ijk(c);
        elements[c] = node_index(i, j, k);
    }

    const HexQuadrature quad = hex_quadrature(h);
    const auto stiff = stiffness_field(table, r);
    Voigt6 bulk = Voigt6::Zero();
    bulk.topLeftCorner<3, 3>().setConstant(c_s * c_s);
    std::vector<Voigt6> material(g.size());
    for (std::size_t c = 0; c < g.size(); ++c) material[c] = lambda0 * stiff[c] + bulk;

    SparseMatrix kmat = assemble_hex_stiffness(dims, elements, node_unknown, blocks, [&](std::size_t base, HexMatrix& out) {
        const auto nx = static_cast<std::size_t>(dims[0]), ny = static_cast<std::size_t>(dims[1]);
        const std::size_t i = base % nx, j = (base / nx) % ny, k = base / (nx * ny);
        out = hex_stiffness(quad, material[g.index(static_cast<int>(i), static_cast<int>(j), static_cast<int>(k))]);
    });
    const LinearOperator op = LinearOperator::from_matrix(std::move(kmat));

    // Load -integral grad(p0_h) . phi with p0_h the trilinear interpolant of p0.
    std::vector<double> p0_nodal(nn);
    for (std::size_t node = 0; node < nn; ++node) p0_nodal[node] = spec.p0(node_position(node));
    std::vector<double> rhs(3 * blocks, 0.0);
    for (const std::size_t base : elements) {
        std::array<double, 8> pe{};
        for (int a = 0; a < 8; ++a) pe[static_cast<std::size_t>(a)] = p0_nodal[hex_node(dims, base, a)];
        for (std::size_t p = 0; p < 8; ++p) {
            Vec3 gp0 = Vec3::Zero();
            // Shape gradients sum to zero; differencing keeps a constant p0 load exactly zero.
            for (std::size_t a = 1; a < 8; ++a) gp0 += (pe[a] - pe[0]) * quad.shape_gradient[p][a];
            for (int a = 0; a < 8; ++a) {
                const std::int64_t b = node_unknown[hex_node(dims, base, a)];
                if (b < 0) continue;
                for (int d = 0; d < 3; ++d)
                    rhs[3 * static_cast<std::size_t>(b) + static_cast<std::size_t>(d)] -= quad.weight * quad.shape[p][static_cast<std::size_t>(a)] * gp0[d];
            }
        }
    }

    const auto res = cg_solve(op, rhs, solver);
    LameSolution out;
    out.nodal = res.x;
    out.iterations = res.iterations;
    out.relative_residual = res.relative_residual;
    out.energy = dot(res.x, op(res.x));
    out.work = dot(rhs, res.x);

    out.w_s = VectorField(g);
    out.p_s = ScalarField(g);
    for (std::size_t c = 0; c < g.size(); ++c) {
        HexVector ue = HexVector::Zero();
        for (int a = 0; a < 8; ++a) {
            const std::int64_t b = node_unknown[hex_node(dims, elements[c], a)];
            if (b < 0) continue;
            for (int d = 0; d < 3; ++d) ue[3 * a + d] = res.x[3 * static_cast<std::size_t>(b) + static_cast<std::size_t>(d)];
        }
        for (int d = 0; d < 3; ++d) {
            double s = 0.0;
            for (int a = 0; a < 8; ++a) s += ue[3 * a + d];
            out.w_s.at(c, d) = s / 8.0;
        }
        const Eigen::Matrix<double, 6, 1> strain = quad.center_strain * ue;
        const double div = strain[0] + strain[1] + strain[2];
        const auto [i, j, k] = g.ijk(c);
        out.p_s[c] = spec.p0(g.center(i, j, k)) - c_s * c_s * div;
    }
    return out;
}

DiffusionStep step_diffusion(const ScalarField& c_old, const ScalarField& r_old, const ScalarField& r_new, double dt,
                             const CoefficientTable& table, const ReservoirSpec& spec, double alpha_c,
                             const CgOptions& solver)
{
    check_grid(c_old, spec, "step_diffusion");
    check_grid(r_old, spec, "step_diffusion");
    check_grid(r_new, spec, "step_diffusion");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("step_diffusion: dt must be positive");
    if (!(alpha_c > 0.0)) throw InvalidInput("step_diffusion: alpha_c must be positive");
    const GridSpec& g = spec.grid;
    const std::size_t nc = g.size();
    for (std::size_t c = 0; c < nc; ++c) {
        if (!(c_old[c] >= 0.0 && c_old[c] <= 1.0)) throw InvalidInput("step_diffusion: c_old outside [0, 1]");
        if (r_new[c] > r_old[c]) throw InvalidInput("step_diffusion: r_new exceeds r_old");
    }

    const double vol = g.cell_volume();
    const ScalarField m_old = porosity_field(r_old);
    const ScalarField m_new = porosity_field(r_new);
    const ScalarField c0 = spec.c0_cells();

    auto k = diffusivity_field(table, r_new);
    for (auto& m : k) m *= alpha_c;
    const EllipticSystem sys = assemble_elliptic(g, k, reservoir_bc);
    const LinearOperator& a = sys.op;

    // Unknown u = c_new - c0: (m_new V + dt A) u = V (m_old c_old - m_new c0).
    std::vector<double> diag(nc);
    for (std::size_t c = 0; c < nc; ++c) diag[c] = m_new[c] * vol + dt * a.diagonal()[c];
    LinearOperator step(
        nc,
        [&](std::span<const double> x, std::span<double> y) {
            a.apply(x, y);
            for (std::size_t c = 0; c < nc; ++c) y[c] = dt * y[c] + m_new[c] * vol * x[c];
        },
        diag);
    std::vector<double> rhs(nc);
    for (std::size_t c = 0; c < nc; ++c) rhs[c] = vol * (m_old[c] * c_old[c] - m_new[c] * c0[c]);
    const auto res = cg_solve(step, rhs, solver);

    DiffusionStep out;
    out.iterations = res.iterations;
    out.c = ScalarField(g);
    for (std::size_t c = 0; c < nc; ++c) {
        out.c[c] = c0[c] + res.x[c];
        out.storage_change += vol * (m_new[c] * out.c[c] - m_old[c] * c_old[c]);
    }
    for (const auto& f : sys.dirichlet_faces) out.boundary_inflow -= dt * f.transmissibility * res.x[f.unknown];

    constexpr double overshoot = 1e-10;
    for (std::size_t c = 0; c < nc; ++c) {
        const double v = out.c[c];
        if (!std::isfinite(v)) throw NumericalFailure("step_diffusion: non-finite concentration");
        if (v < -overshoot || v > 1.0 + overshoot) {
            std::ostringstream os;
            os.precision(17);
            os << "step_diffusion: concentration " << v << " at cell " << c << " violates 0 <= c <= 1";
            throw MaxPrincipleViolation(os.str());
        }
        if (v < 0.0 || v > 1.0) {
            out.c[c] = std::clamp(v, 0.0, 1.0);
            ++out.clipped;
        }
    }
    return out;
}

std::vector<ScalarField> run_diffusion(const std::vector<ScalarField>& r_history, const ReservoirSpec& spec,
                                       const CoefficientTable& table, double alpha_c, double dt,
                                       const CgOptions& solver, const ScalarField* c_initial)
{
    if (r_history.empty()) throw InvalidInput("run_diffusion: empty radius history");
    for (std::size_t s = 1; s < r_history.size(); ++s)
        for (std::size_t c = 0; c < r_history[s].size(); ++c)
            if (r_history[s][c] > r_history[s - 1][c])
                throw InvalidInput("run_diffusion: radius history increases at step " + std::to_string(s));

    std::vector<ScalarField> out;
    out.reserve(r_history.size());
    out.push_back(c_initial != nullptr ? *c_initial : spec.c0_cells());
    for (std::size_t s = 1; s < r_history.size(); ++s) {
        const std::string where = "run_diffusion: step " + std::to_string(s) + ": ";
        try {
            out.push_back(step_diffusion(out.back(), r_history[s - 1], r_history[s], dt, table, spec, alpha_c, solver).c);
        } catch (const MaxPrincipleViolation& e) {
            throw MaxPrincipleViolation(where + e.what());
        } catch (const NonConvergence& e) {
            throw NonConvergence(where + e.what(), e.final_residual(), e.iterations());
        } catch (const NumericalFailure& e) {
            throw NumericalFailure(where + e.what());
        } catch (const InvalidInput& e) {
            throw InvalidInput(where + e.what());
        }
    }
    return out;
}

}  // namespace leach
