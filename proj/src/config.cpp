#include "leach/config.hpp"

#include "leach/errors.hpp"
#include "leach/log.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace leach {

using nlohmann::json;

double FieldProfile::operator()(const std::array<double, 3>& x) const
{
    if (kind == Kind::Constant) return value;
    const double s = x[static_cast<std::size_t>(axis)] + 0.5;
    return lower + (upper - lower) * s;
}

double FieldProfile::min() const { return kind == Kind::Constant ? value : std::min(lower, upper); }

double FieldProfile::max() const { return kind == Kind::Constant ? value : std::max(lower, upper); }

double PressureData::operator()(const std::array<double, 3>& x) const
{
    const double s = std::clamp(x[0] + 0.5, 0.0, 1.0);
    const double shape = profile == Profile::Linear ? s : 0.5 * (1.0 - std::cos(std::numbers::pi * s));
    return p1 + (p2 - p1) * shape;
}

namespace {

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

void check_profile(const FieldProfile& p, const std::string& key, std::vector<std::string>& out)
{
    if (p.kind == FieldProfile::Kind::Constant) {
        if (!std::isfinite(p.value)) out.push_back(key + ".value: must be finite");
    } else {
        if (p.axis < 0 || p.axis > 2) out.push_back(key + ".axis: must be 1, 2 or 3");
        if (!std::isfinite(p.lower)) out.push_back(key + ".lower: must be finite");
        if (!std::isfinite(p.upper)) out.push_back(key + ".upper: must be finite");
    }
}

}  // namespace

std::vector<std::string> SimulationConfig::violations() const
{
    std::vector<std::string> v;
    if (!(std::isfinite(theta) && theta >= 0.0)) v.push_back("physics.theta: must be finite and >= 0");
    if (!finite_positive(mu1)) v.push_back("physics.mu1: must be positive");
    if (!finite_positive(lambda0)) v.push_back("physics.lambda0: must be positive");
    if (!finite_positive(c_s)) v.push_back("physics.c_s: must be positive");
    if (!finite_positive(alpha_c)) v.push_back("physics.alpha_c: must be positive");

    const bool bounds_ok = std::isfinite(r_min) && std::isfinite(r_max) && r_min > 0.0 && r_min < r_max && r_max < 0.5;
    if (!bounds_ok) v.push_back("bounds.r_min, bounds.r_max: need 0 < r_min < r_max < 1/2");
    if (!finite_positive(M0)) v.push_back("bounds.M0: must be positive");

    if (!std::isfinite(p0.p1)) v.push_back("fields.p0.p1: must be finite");
    if (!std::isfinite(p0.p2)) v.push_back("fields.p0.p2: must be finite");
    check_profile(c0, "fields.c0", v);
    check_profile(r0, "fields.r0", v);
    if (bounds_ok && std::isfinite(r0.min()) && std::isfinite(r0.max()) && (r0.min() < r_min || r0.max() > r_max))
        v.push_back("fields.r0: must lie within [bounds.r_min, bounds.r_max]");

    if (reservoir_n < 2) v.push_back("grid.reservoir_n: must be >= 2");
    if (cell_n < 16) v.push_back("grid.cell_n: must be >= 16");
    if (table_knots < 5) v.push_back("grid.table_knots: must be >= 5");

    const bool t_ok = std::isfinite(T) && T >= 0.0;
    const bool dt_ok = finite_positive(dt);
    if (!t_ok) v.push_back("time.T: must be finite and >= 0");
    if (!dt_ok) v.push_back("time.dt: must be positive");
    if (T_slab && !finite_positive(*T_slab)) v.push_back("time.T_slab: must be positive");
    if (t_ok && dt_ok && T > 0.0) {
        const double steps_real = T / dt;
        if (std::abs(steps_real - std::round(steps_real)) > 1e-9 * std::max(1.0, steps_real))
            v.push_back("time.dt: must divide time.T into a whole number of steps");
        if (T_slab && finite_positive(*T_slab)) {
            if (dt > *T_slab * (1.0 + 1e-12)) v.push_back("time.dt, time.T_slab: need dt <= T_slab");
            if (*T_slab > T * (1.0 + 1e-12)) v.push_back("time.T_slab, time.T: need T_slab <= T");
        } else if (!T_slab && dt > slab_length() * (1.0 + 1e-12)) {
            v.push_back("time.dt, time.T_slab: dt exceeds the default slab length M0 / (2 theta)");
        }
    }

    if (!(linear_tol > 0.0 && linear_tol < 1.0)) v.push_back("solver.linear_tol: must be in (0, 1)");
    if (linear_max_iter < 1) v.push_back("solver.linear_max_iter: must be >= 1");
    if (!finite_positive(picard_tol)) v.push_back("solver.picard_tol: must be positive");
    if (picard_max_iter < 1) v.push_back("solver.picard_max_iter: must be >= 1");
    if (!(relaxation > 0.0 && relaxation <= 1.0)) v.push_back("solver.relaxation: must be in (0, 1]");

    if (!std::isfinite(head_bc.g1)) v.push_back("head_bc.g1: must be finite");
    if (!std::isfinite(head_bc.g2)) v.push_back("head_bc.g2: must be finite");
    if (output_every < 1) v.push_back("output.every: must be >= 1");
    return v;
}

void SimulationConfig::validate() const
{
    auto v = violations();
    if (!v.empty()) throw ConfigError(std::move(v));
}

double SimulationConfig::slab_length() const
{
    if (T_slab) return *T_slab;
    if (theta <= 0.0) return T;
    return std::min(T, M0 / (2.0 * theta));
}

int SimulationConfig::steps() const { return T > 0.0 ? static_cast<int>(std::llround(T / dt)) : 0; }

int SimulationConfig::slab_steps() const
{
    return std::max(1, static_cast<int>(std::floor(slab_length() / dt * (1.0 + 1e-12))));
}

RadiusBounds SimulationConfig::bounds() const
{
    RadiusBounds b;
    b.r_min = r_min;
    b.r_max = r_max;
    b.theta = theta;
    b.M0 = M0;
    return b;
}

CellParameters SimulationConfig::cell_parameters() const { return {mu1, lambda0, c_s}; }

CgOptions SimulationConfig::linear_solver() const { return {linear_tol, linear_max_iter}; }

ReservoirSpec SimulationConfig::reservoir() const
{
    ReservoirSpec s;
    s.grid = GridSpec::unit_cube(reservoir_n);
    s.p1 = p0.p1;
    s.p2 = p0.p2;
    s.p0 = [p = p0](const std::array<double, 3>& x) { return p(x); };
    if (c0.min() < 0.0 || c0.max() > 1.0) log_warning("fields.c0 exceeds [0, 1]; values are clamped");
    s.c0 = [c = c0](const std::array<double, 3>& x) { return std::clamp(c(x), 0.0, 1.0); };
    return s;
}

HeadProblem SimulationConfig::head_problem() const
{
    HeadProblem h;
    if (head_bc.mode == HeadBoundary::Mode::Dirichlet)
        h.g = [g1 = head_bc.g1, g2 = head_bc.g2](const std::array<double, 3>& x) { return x[0] < 0.0 ? g1 : g2; };
    return h;
}

ScalarField SimulationConfig::initial_radius(const GridSpec& grid) const
{
    ScalarField r(grid);
    for (std::size_t c = 0; c < grid.size(); ++c) {
        const auto [i, j, k] = grid.ijk(c);
        r[c] = r0(grid.center(i, j, k));
    }
    return r;
}

namespace {

// Strict reader: every key it does not consume is reported as unknown.
class Reader {
public:
    std::vector<std::string> errors;

    void object(const json& j, const std::string& path, const std::set<std::string>& allowed)
    {
        if (!j.is_object()) {
            errors.push_back(path + ": must be an object");
            return;
        }
        for (const auto& [key, value] : j.items())
            if (!allowed.count(key)) errors.push_back(join(path, key) + ": unknown key");
    }

    void number(const json& parent, const std::string& path, const char* key, double& out)
    {
        if (!parent.is_object() || !parent.contains(key)) return;
        const json& v = parent.at(key);
        if (!v.is_number()) {
            errors.push_back(join(path, key) + ": must be a number");
            return;
        }
        out = v.get<double>();
    }

    void integer(const json& parent, const std::string& path, const char* key, int& out)
    {
        if (!parent.is_object() || !parent.contains(key)) return;
        const json& v = parent.at(key);
        if (!v.is_number_integer()) {
            errors.push_back(join(path, key) + ": must be an integer");
            return;
        }
        const auto x = v.get<long long>();
        if (x < -1000000000LL || x > 1000000000LL) {
            errors.push_back(join(path, key) + ": out of range");
            return;
        }
        out = static_cast<int>(x);
    }

    void string(const json& parent, const std::string& path, const char* key, std::string& out)
    {
        if (!parent.is_object() || !parent.contains(key)) return;
        const json& v = parent.at(key);
        if (!v.is_string()) {
            errors.push_back(join(path, key) + ": must be a string");
            return;
        }
        out = v.get<std::string>();
    }

    const json* section(const json& parent, const std::string& path, const char* key, const std::set<std::string>& allowed)
    {
        if (!parent.is_object() || !parent.contains(key)) return nullptr;
        const json& v = parent.at(key);
        object(v, join(path, key), allowed);
        return v.is_object() ? &v : nullptr;
    }

    void profile(const json& parent, const std::string& path, const char* key, FieldProfile& out)
    {
        const json* p = section(parent, path, key, {"type", "value", "axis", "lower", "upper"});
        if (p == nullptr) return;
        const std::string where = join(path, key);
        std::string type = out.kind == FieldProfile::Kind::Constant ? "constant" : "linear";
        string(*p, where, "type", type);
        if (type == "constant") {
            out = FieldProfile::constant(out.kind == FieldProfile::Kind::Constant ? out.value : 0.0);
            number(*p, where, "value", out.value);
            for (const char* k : {"axis", "lower", "upper"})
                if (p->contains(k)) errors.push_back(join(where, k) + ": not used by a constant profile");
        } else if (type == "linear") {
            if (out.kind != FieldProfile::Kind::Linear) out = FieldProfile::linear(0, 0.0, 0.0);
            int axis = out.axis + 1;
            integer(*p, where, "axis", axis);
            out.axis = axis - 1;
            number(*p, where, "lower", out.lower);
            number(*p, where, "upper", out.upper);
            if (p->contains("value")) errors.push_back(join(where, "value") + ": not used by a linear profile");
        } else {
            errors.push_back(join(where, "type") + ": must be \"constant\" or \"linear\"");
        }
    }

private:
    static std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
};

json profile_json(const FieldProfile& p)
{
    if (p.kind == FieldProfile::Kind::Constant) return {{"type", "constant"}, {"value", p.value}};
    return {{"type", "linear"}, {"axis", p.axis + 1}, {"lower", p.lower}, {"upper", p.upper}};
}

}  // namespace

SimulationConfig config_from_json(const std::string& text)
{
    json root;
    try {
        root = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        // byte offset -> line
        const std::size_t upto = std::min(e.byte, text.size());
        const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
        throw ParseError(std::string("config is not valid JSON: ") + e.what(), line);
    }

    SimulationConfig c;
    Reader rd;
    rd.object(root, "", {"physics", "bounds", "fields", "grid", "time", "solver", "head_bc", "output"});
    if (!root.is_object()) throw ConfigError(rd.errors);

    if (const json* s = rd.section(root, "", "physics", {"theta", "mu1", "lambda0", "c_s", "alpha_c"})) {
        rd.number(*s, "physics", "theta", c.theta);
        rd.number(*s, "physics", "mu1", c.mu1);
        rd.number(*s, "physics", "lambda0", c.lambda0);
        rd.number(*s, "physics", "c_s", c.c_s);
        rd.number(*s, "physics", "alpha_c", c.alpha_c);
    }
    if (const json* s = rd.section(root, "", "bounds", {"r_min", "r_max", "M0"})) {
        rd.number(*s, "bounds", "r_min", c.r_min);
        rd.number(*s, "bounds", "r_max", c.r_max);
        rd.number(*s, "bounds", "M0", c.M0);
    }
    if (const json* s = rd.section(root, "", "fields", {"p0", "c0", "r0"})) {
        if (const json* p = rd.section(*s, "fields", "p0", {"p1", "p2", "profile"})) {
            rd.number(*p, "fields.p0", "p1", c.p0.p1);
            rd.number(*p, "fields.p0", "p2", c.p0.p2);
            std::string prof = c.p0.profile == PressureData::Profile::Linear ? "linear" : "cosine";
            rd.string(*p, "fields.p0", "profile", prof);
            if (prof == "linear") c.p0.profile = PressureData::Profile::Linear;
            else if (prof == "cosine") c.p0.profile = PressureData::Profile::Cosine;
            else rd.errors.push_back("fields.p0.profile: must be \"linear\" or \"cosine\"");
        }
        rd.profile(*s, "fields", "c0", c.c0);
        rd.profile(*s, "fields", "r0", c.r0);
    }
    if (const json* s = rd.section(root, "", "grid", {"reservoir_n", "cell_n", "table_knots"})) {
        rd.integer(*s, "grid", "reservoir_n", c.reservoir_n);
        rd.integer(*s, "grid", "cell_n", c.cell_n);
        rd.integer(*s, "grid", "table_knots", c.table_knots);
    }
    if (const json* s = rd.section(root, "", "time", {"T", "dt", "T_slab"})) {
        rd.number(*s, "time", "T", c.T);
        rd.number(*s, "time", "dt", c.dt);
        if (s->contains("T_slab") && !s->at("T_slab").is_null()) {
            double v = 0.0;
            const std::size_t before = rd.errors.size();
            rd.number(*s, "time", "T_slab", v);
            if (rd.errors.size() == before) c.T_slab = v;
        }
    }
    if (const json* s = rd.section(root, "", "solver",
                                   {"linear_tol", "linear_max_iter", "picard_tol", "picard_max_iter", "relaxation"})) {
        rd.number(*s, "solver", "linear_tol", c.linear_tol);
        rd.integer(*s, "solver", "linear_max_iter", c.linear_max_iter);
        rd.number(*s, "solver", "picard_tol", c.picard_tol);
        rd.integer(*s, "solver", "picard_max_iter", c.picard_max_iter);
        rd.number(*s, "solver", "relaxation", c.relaxation);
    }
    if (const json* s = rd.section(root, "", "head_bc", {"mode", "g1", "g2"})) {
        std::string mode = c.head_bc.mode == HeadBoundary::Mode::Zero ? "zero" : "dirichlet";
        rd.string(*s, "head_bc", "mode", mode);
        if (mode == "zero") c.head_bc.mode = HeadBoundary::Mode::Zero;
        else if (mode == "dirichlet") c.head_bc.mode = HeadBoundary::Mode::Dirichlet;
        else rd.errors.push_back("head_bc.mode: must be \"zero\" or \"dirichlet\"");
        rd.number(*s, "head_bc", "g1", c.head_bc.g1);
        rd.number(*s, "head_bc", "g2", c.head_bc.g2);
    }
    if (const json* s = rd.section(root, "", "output", {"every", "table"})) {
        rd.integer(*s, "output", "every", c.output_every);
        rd.string(*s, "output", "table", c.table);
    }

    auto errors = std::move(rd.errors);
    for (auto& v : c.violations()) errors.push_back(std::move(v));
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return c;
}

SimulationConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

std::string config_to_json(const SimulationConfig& c)
{
    json j;
    j["physics"] = {{"theta", c.theta}, {"mu1", c.mu1}, {"lambda0", c.lambda0}, {"c_s", c.c_s}, {"alpha_c", c.alpha_c}};
    j["bounds"] = {{"r_min", c.r_min}, {"r_max", c.r_max}, {"M0", c.M0}};
    j["fields"] = {{"p0",
                    {{"p1", c.p0.p1},
                     {"p2", c.p0.p2},
                     {"profile", c.p0.profile == PressureData::Profile::Linear ? "linear" : "cosine"}}},
                   {"c0", profile_json(c.c0)},
                   {"r0", profile_json(c.r0)}};
    j["grid"] = {{"reservoir_n", c.reservoir_n}, {"cell_n", c.cell_n}, {"table_knots", c.table_knots}};
    j["time"] = {{"T", c.T}, {"dt", c.dt}, {"T_slab", c.T_slab ? json(*c.T_slab) : json(nullptr)}};
    j["solver"] = {{"linear_tol", c.linear_tol},
                   {"linear_max_iter", c.linear_max_iter},
                   {"picard_tol", c.picard_tol},
                   {"picard_max_iter", c.picard_max_iter},
                   {"relaxation", c.relaxation}};
    j["head_bc"] = {{"mode", c.head_bc.mode == HeadBoundary::Mode::Zero ? "zero" : "dirichlet"},
                    {"g1", c.head_bc.g1},
                    {"g2", c.head_bc.g2}};
    j["output"] = {{"every", c.output_every}, {"table", c.table}};
    return j.dump(2) + "\n";
}

}  // namespace leach
