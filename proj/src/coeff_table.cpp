#include "leach/coeff_table.hpp"

#include "leach/errors.hpp"
#include "leach/log.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <thread>

namespace leach {

namespace {

constexpr std::size_t packed_size = 9 + 9 + 36 + 9 + 36;

std::string knot_label(std::size_t k, double r)
{
    std::ostringstream os;
    os << "knot " << k << " (r = " << r << ")";
    return os.str();
}

bool positive_definite(const EffectiveCoefficients& e)
{
    return is_spd(e.B_w) && is_spd(e.B_c) && min_eigenvalue_on_symmetric(e.N_paper) > 0.0;
}

}  // namespace

void CellParameters::validate() const
{
    if (!(mu1 > 0.0) || !(lambda0 > 0.0) || !(c_s > 0.0) || !std::isfinite(mu1) || !std::isfinite(lambda0) ||
        !std::isfinite(c_s))
        throw InvalidInput("cell parameters: mu1, lambda0 and c_s must be positive and finite");
}

int knot_resolution(double r, int n)
{
    int out = n;
    while (r * out < 2.0) out += 8;
    return out;
}

const char* code_version() { return "leach 1.0.0"; }

EffectiveCoefficients compute_coefficients(double r, int n, const CellParameters& params, const CellSolveOptions& solve,
                                           const RadiusBounds& bounds)
{
    params.validate();
    const UnitCellMask mask = build_cell_mask(r, n, bounds);
    EffectiveCoefficients e;
    e.r = r;
    e.m = porosity(r);

    const auto stokes = solve_stokes_cell(mask, params.mu1, solve);
    e.B_w = 0.5 * (stokes.B_w + stokes.B_w.transpose());

    const auto diffusion = solve_diffusion_cell(mask, solve);
    e.B_c = diffusion.B_c_energy;
    e.B_c_quadratic = diffusion.B_c_quadratic;

    ElasticCellOptions eopts;
    eopts.solve = solve;
    const auto elastic = solve_elasticity_cell(mask, params.lambda0, params.c_s, eopts);
    e.N_s = 0.5 * (elastic.N_energy + elastic.N_energy.transpose());
    e.N_paper = 0.5 * (elastic.N_paper + elastic.N_paper.transpose());

    if (!positive_definite(e)) throw NumericalFailure("effective coefficients are not positive definite");
    return e;
}

std::vector<double> pack_entries(const EffectiveCoefficients& e)
{
    std::vector<double> out;
    out.reserve(packed_size);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.push_back(e.B_w(i, j));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.push_back(e.B_c(i, j));
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) out.push_back(e.N_s(i, j));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.push_back(e.B_c_quadratic(i, j));
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) out.push_back(e.N_paper(i, j));
    return out;
}

void unpack_entries(std::span<const double> packed, EffectiveCoefficients& e)
{
    if (packed.size() != packed_size) throw InvalidInput("unpack_entries: wrong size");
    std::size_t p = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) e.B_w(i, j) = packed[p++];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) e.B_c(i, j) = packed[p++];
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) e.N_s(i, j) = packed[p++];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) e.B_c_quadratic(i, j) = packed[p++];
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) e.N_paper(i, j) = packed[p++];
}

std::vector<double> monotone_tangents(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw InvalidInput("monotone_tangents: need at least two points");
    std::vector<double> delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) delta[k] = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);

    std::vector<double> m(n);
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for (std::size_t k = 1; k + 1 < n; ++k)
        m[k] = delta[k - 1] * delta[k] <= 0.0 ? 0.0 : 0.5 * (delta[k - 1] + delta[k]);

    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (delta[k] == 0.0) {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        const double a = m[k] / delta[k];
        const double b = m[k + 1] / delta[k];
        if (a < 0.0) m[k] = 0.0;
        if (b < 0.0) m[k + 1] = 0.0;
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            m[k] = tau * a * delta[k];
            m[k + 1] = tau * b * delta[k];
        }
    }
    return m;
}

double hermite(double x0, double x1, double y0, double y1, double m0, double m1, double x)
{
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
}

CoefficientTable::CoefficientTable(std::vector<EffectiveCoefficients> entries, int cell_resolution,
                                   CellParameters params, TableProvenance provenance)
    : entries_(std::move(entries)), cell_resolution_(cell_resolution), params_(params), provenance_(std::move(provenance))
{
    if (entries_.size() < 5) throw InvalidInput("coefficient table: need at least 5 knots");
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        const auto& e = entries_[k];
        const std::string label = knot_label(k, e.r);
        if (!(e.r >= 0.0 && e.r < 0.5)) throw InvalidInput("coefficient table: radius out of range at " + label);
        if (k > 0 && !(e.r > entries_[k - 1].r)) throw InvalidInput("coefficient table: knots not increasing at " + label);
        if (e.m != porosity(e.r)) throw InvalidInput("coefficient table: porosity differs from the closed form at " + label);
        if (!positive_definite(e)) throw InvalidInput("coefficient table: tensor not positive definite at " + label);
        // N_s may vanish identically, so its symmetry is measured against N_paper.
        const double n_asym = (e.N_s - e.N_s.transpose()).cwiseAbs().maxCoeff();
        if (relative_asymmetry(e.B_w) > 1e-8 || relative_asymmetry(e.B_c) > 1e-8 ||
            relative_asymmetry(e.N_paper) > 1e-8 || n_asym > 1e-8 * e.N_paper.cwiseAbs().maxCoeff())
            throw InvalidInput("coefficient table: tensor not symmetric at " + label);
        if (k > 0 && !(e.k() < entries_[k - 1].k()))
            throw InvalidInput("coefficient table: permeability not strictly decreasing at " + label);
        if (k > 0 && !(e.d() < entries_[k - 1].d()))
            throw InvalidInput("coefficient table: diffusivity not strictly decreasing at " + label);
    }

    const std::vector<double> x = knots();
    auto& packed = packed_;
    for (const auto& e : entries_) packed.push_back(pack_entries(e));
    tangents_.assign(entries_.size(), std::vector<double>(packed_size));
    std::vector<double> y(entries_.size());
    for (std::size_t p = 0; p < packed_size; ++p) {
        for (std::size_t k = 0; k < entries_.size(); ++k) y[k] = packed[k][p];
        const auto m = monotone_tangents(x, y);
        for (std::size_t k = 0; k < entries_.size(); ++k) tangents_[k][p] = m[k];
    }
}

std::vector<double> CoefficientTable::knots() const
{
    std::vector<double> x;
    for (const auto& e : entries_) x.push_back(e.r);
    return x;
}

void CoefficientTable::interpolate_block(double r, std::size_t offset, std::size_t count, double* out,
                                         bool* clamped) const
{
    if (entries_.empty()) throw InvalidInput("interpolate: empty table");
    if (!std::isfinite(r)) throw InvalidInput("interpolate: non-finite radius");
    const bool outside = r < r_min() || r > r_max();
    if (clamped != nullptr) *clamped = outside;
    r = std::clamp(r, r_min(), r_max());
    const auto it = std::upper_bound(entries_.begin(), entries_.end(), r,
                                     [](double v, const EffectiveCoefficients& e) { return v < e.r; });
    std::size_t k = static_cast<std::size_t>(std::distance(entries_.begin(), it));
    k = std::clamp<std::size_t>(k, 1, entries_.size() - 1);
    const double x0 = entries_[k - 1].r, x1 = entries_[k].r;
    for (std::size_t p = offset; p < offset + count; ++p) {
        if (r == x0) *out++ = packed_[k - 1][p];
        else if (r == x1) *out++ = packed_[k][p];
        else *out++ = hermite(x0, x1, packed_[k - 1][p], packed_[k][p], tangents_[k - 1][p], tangents_[k][p], r);
    }
}

Mat3 CoefficientTable::permeability(double r, bool* clamped) const
{
    Mat3 b;
    std::array<double, 9> v{};
    interpolate_block(r, 0, 9, v.data(), clamped);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) b(i, j) = 0.5 * (v[static_cast<std::size_t>(3 * i + j)] + v[static_cast<std::size_t>(3 * j + i)]);
    if (!is_spd(b)) throw NumericalFailure("interpolate: permeability lost positive definiteness");
    return b;
}

Mat3 CoefficientTable::diffusivity(double r, bool* clamped) const
{
    Mat3 b;
    std::array<double, 9> v{};
    interpolate_block(r, 9, 9, v.data(), clamped);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) b(i, j) = 0.5 * (v[static_cast<std::size_t>(3 * i + j)] + v[static_cast<std::size_t>(3 * j + i)]);
    if (!is_spd(b)) throw NumericalFailure("interpolate: diffusivity lost positive definiteness");
    return b;
}

Voigt6 CoefficientTable::stiffness(double r, bool* clamped) const
{
    std::array<double, 36> v{};
    interpolate_block(r, 63, 36, v.data(), clamped);
    Voigt6 n;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) n(i, j) = 0.5 * (v[static_cast<std::size_t>(6 * i + j)] + v[static_cast<std::size_t>(6 * j + i)]);
    if (!(min_eigenvalue_on_symmetric(n) > 0.0)) throw NumericalFailure("interpolate: stiffness lost positive definiteness");
    return n;
}

EffectiveCoefficients CoefficientTable::interpolate(double r, bool log_clamp) const
{
    if (entries_.empty()) throw InvalidInput("interpolate: empty table");
    if (!std::isfinite(r)) throw InvalidInput("interpolate: non-finite radius");
    EffectiveCoefficients out;
    if (r < r_min() || r > r_max()) {
        const double c = std::clamp(r, r_min(), r_max());
        std::ostringstream os;
        os << "interpolate: r = " << r << " outside [" << r_min() << ", " << r_max() << "], clamped to " << c;
        if (log_clamp) log_warning(os.str());
        out = r < r_min() ? entries_.front() : entries_.back();
        out.clamped = true;
        return out;
    }

    const auto it = std::upper_bound(entries_.begin(), entries_.end(), r,
                                     [](double v, const EffectiveCoefficients& e) { return v < e.r; });
    std::size_t k = static_cast<std::size_t>(std::distance(entries_.begin(), it));
    if (k == 0) k = 1;
    if (k >= entries_.size()) k = entries_.size() - 1;
    const auto& lo = entries_[k - 1];
    const auto& hi = entries_[k];
    if (r == lo.r) return lo;
    if (r == hi.r) return hi;

    std::vector<double> y(packed_size);
    interpolate_block(r, 0, packed_size, y.data(), nullptr);
    out.r = r;
    out.m = porosity(r);
    unpack_entries(y, out);
    out.B_w = 0.5 * (out.B_w + out.B_w.transpose()).eval();
    out.B_c = 0.5 * (out.B_c + out.B_c.transpose()).eval();
    out.N_s = 0.5 * (out.N_s + out.N_s.transpose()).eval();
    out.B_c_quadratic = 0.5 * (out.B_c_quadratic + out.B_c_quadratic.transpose()).eval();
    out.N_paper = 0.5 * (out.N_paper + out.N_paper.transpose()).eval();
    if (!positive_definite(out)) {
        std::ostringstream os;
        os << "interpolate: tensor lost positive definiteness at r = " << r;
        throw NumericalFailure(os.str());
    }
    return out;
}

bool CoefficientTable::operator==(const CoefficientTable& other) const
{
    if (cell_resolution_ != other.cell_resolution_ || !(params_ == other.params_) ||
        !(provenance_ == other.provenance_) || entries_.size() != other.entries_.size())
        return false;
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        const auto& a = entries_[k];
        const auto& b = other.entries_[k];
        if (a.r != b.r || a.m != b.m || pack_entries(a) != pack_entries(b)) return false;
    }
    return true;
}

int default_workers()
{
    if (const char* env = std::getenv("LEACH_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, 256));
        log_warning("LEACH_WORKERS is not a positive integer; ignored");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

CoefficientTable tabulate(const RadiusBounds& bounds, int knots, int n, const CellParameters& params,
                          const TabulateOptions& options)
{
    bounds.validate();
    params.validate();
    if (knots < 5) throw InvalidInput("tabulate: need at least 5 knots");
    if (n < 16) throw InvalidInput("tabulate: cell resolution must be at least 16");

    const auto count = static_cast<std::size_t>(knots);
    std::vector<double> radius(count);
    for (std::size_t k = 0; k < count; ++k)
        radius[k] = k + 1 == count ? bounds.r_max
                                   : bounds.r_min + (bounds.r_max - bounds.r_min) * static_cast<double>(k) / static_cast<double>(count - 1);

    TableProvenance prov;
    prov.tol = options.solve.tol;
    prov.max_iter = options.solve.max_iter;
    prov.code_version = code_version();
    for (double r : radius) prov.knot_resolution.push_back(knot_resolution(r, n));

    std::vector<EffectiveCoefficients> entries(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            try {
                entries[k] = compute_coefficients(radius[k], prov.knot_resolution[k], params, options.solve, bounds);
            } catch (const InvalidInput& e) {
                errors[k] = std::make_exception_ptr(InvalidInput("tabulate: " + knot_label(k, radius[k]) + ": " + e.what()));
            } catch (const std::exception& e) {
                errors[k] = std::make_exception_ptr(NumericalFailure("tabulate: " + knot_label(k, radius[k]) + ": " + e.what()));
            }
        }
    };
    const int workers = std::clamp(options.workers > 0 ? options.workers : default_workers(), 1, knots);
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    try {
        return CoefficientTable(std::move(entries), n, params, std::move(prov));
    } catch (const InvalidInput& e) {
        // A table that fails its invariants after successful solves signals under-resolution.
        throw NumericalFailure(std::string("tabulate: ") + e.what());
    }
}

}  // namespace leach
