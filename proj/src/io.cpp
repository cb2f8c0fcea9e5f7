#include "leach/io.hpp"

#include "leach/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace leach {

namespace {

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path + " for writing");
    return out;
}

void close_out(std::ofstream& out, const std::string& path)
{
    out.flush();
    if (!out) throw Error("write failed for " + path);
}

std::vector<std::string> read_lines(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& s, std::size_t line, const std::string& what)
{
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || s.empty()) throw ParseError(what + ": not a number: '" + s + "'", line);
    return v;
}

long parse_long(const std::string& s, std::size_t line, const std::string& what)
{
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw ParseError(what + ": not an integer: '" + s + "'", line);
    return v;
}

std::string matrix_name(const char* prefix, int i, int j) { return std::string(prefix) + std::to_string(i) + std::to_string(j); }

}  // namespace

std::vector<std::string> table_columns()
{
    std::vector<std::string> cols{"r", "m", "k_w", "d_c"};
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) cols.push_back(matrix_name("bw_", i, j));
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) cols.push_back(matrix_name("bc_", i, j));
    for (int i = 1; i <= 6; ++i)
        for (int j = i; j <= 6; ++j) cols.push_back(matrix_name("ns_", i, j));
    for (int i = 1; i <= 6; ++i)
        for (int j = i; j <= 6; ++j) cols.push_back(matrix_name("ns_paper_", i, j));
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) cols.push_back(matrix_name("bc_quad_", i, j));
    return cols;
}

namespace {

std::vector<double> row_values(const EffectiveCoefficients& e)
{
    std::vector<double> v{e.r, e.m, e.k(), e.d()};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) v.push_back(e.B_w(i, j));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) v.push_back(e.B_c(i, j));
    for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j) v.push_back(e.N_s(i, j));
    for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j) v.push_back(e.N_paper(i, j));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) v.push_back(e.B_c_quadratic(i, j));
    return v;
}

EffectiveCoefficients from_row(const std::vector<double>& v)
{
    EffectiveCoefficients e;
    std::size_t p = 0;
    e.r = v[p++];
    e.m = v[p++];
    p += 2;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) e.B_w(i, j) = v[p++];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) e.B_c(i, j) = v[p++];
    for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j) e.N_s(i, j) = e.N_s(j, i) = v[p++];
    for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j) e.N_paper(i, j) = e.N_paper(j, i) = v[p++];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) e.B_c_quadratic(i, j) = v[p++];
    return e;
}

}  // namespace

std::string coefficients_csv(const std::vector<EffectiveCoefficients>& entries)
{
    std::string out;
    const auto cols = table_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
    out += '\n';
    for (const auto& e : entries) {
        const auto v = row_values(e);
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
        out += '\n';
    }
    return out;
}

void write_table(const CoefficientTable& table, const std::string& path)
{
    for (const auto& e : table.entries())
        if (e.N_s != e.N_s.transpose() || e.N_paper != e.N_paper.transpose())
            throw InvalidInput("write_table: stiffness tensors must be exactly symmetric");
    if (table.provenance().knot_resolution.size() != table.entries().size())
        throw InvalidInput("write_table: provenance must list one cell resolution per knot");
    {
        auto out = open_out(path);
        out << coefficients_csv(table.entries());
        close_out(out, path);
    }
    const std::string meta = path + ".meta";
    auto out = open_out(meta);
    const auto& p = table.provenance();
    out << "format=leach-table-1\n";
    out << "knots=" << table.entries().size() << '\n';
    out << "n=" << table.cell_resolution() << '\n';
    out << "knot_n=";
    for (std::size_t k = 0; k < p.knot_resolution.size(); ++k) out << (k ? "," : "") << p.knot_resolution[k];
    out << '\n';
    out << "tol=" << fmt(p.tol) << '\n';
    out << "max_iter=" << p.max_iter << '\n';
    out << "mu1=" << fmt(table.params().mu1) << '\n';
    out << "lambda0=" << fmt(table.params().lambda0) << '\n';
    out << "c_s=" << fmt(table.params().c_s) << '\n';
    out << "code_version=" << p.code_version << '\n';
    close_out(out, meta);
}

CoefficientTable read_table(const std::string& path)
{
    // Metadata first: it fixes the expected row count.
    const std::string meta_path = path + ".meta";
    const auto meta_lines = read_lines(meta_path);
    std::map<std::string, std::pair<std::string, std::size_t>> meta;
    for (std::size_t i = 0; i < meta_lines.size(); ++i) {
        const auto& l = meta_lines[i];
        if (l.empty()) continue;
        const auto eq = l.find('=');
        if (eq == std::string::npos) throw ParseError(meta_path + ": expected key=value", i + 1);
        const std::string key = l.substr(0, eq);
        static const char* known[] = {"format", "knots", "n", "knot_n", "tol", "max_iter", "mu1", "lambda0", "c_s", "code_version"};
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw ParseError(meta_path + ": unknown key '" + key + "'", i + 1);
        if (meta.count(key)) throw ParseError(meta_path + ": duplicate key '" + key + "'", i + 1);
        meta[key] = {l.substr(eq + 1), i + 1};
    }
    auto need = [&](const char* key) -> const std::pair<std::string, std::size_t>& {
        const auto it = meta.find(key);
        if (it == meta.end()) throw ParseError(meta_path + ": missing key '" + std::string(key) + "'", meta_lines.size() + 1);
        return it->second;
    };
    if (need("format").first != "leach-table-1") throw ParseError(meta_path + ": unsupported format", need("format").second);
    const long knots = parse_long(need("knots").first, need("knots").second, meta_path + ": knots");
    const long n = parse_long(need("n").first, need("n").second, meta_path + ": n");
    TableProvenance prov;
    for (const auto& s : split(need("knot_n").first, ','))
        prov.knot_resolution.push_back(static_cast<int>(parse_long(s, need("knot_n").second, meta_path + ": knot_n")));
    prov.tol = parse_double(need("tol").first, need("tol").second, meta_path + ": tol");
    prov.max_iter = static_cast<int>(parse_long(need("max_iter").first, need("max_iter").second, meta_path + ": max_iter"));
    prov.code_version = need("code_version").first;
    CellParameters params;
    params.mu1 = parse_double(need("mu1").first, need("mu1").second, meta_path + ": mu1");
    params.lambda0 = parse_double(need("lambda0").first, need("lambda0").second, meta_path + ": lambda0");
    params.c_s = parse_double(need("c_s").first, need("c_s").second, meta_path + ": c_s");
    if (knots < 1 || static_cast<long>(prov.knot_resolution.size()) != knots)
        throw ParseError(meta_path + ": knot_n does not list one resolution per knot", need("knot_n").second);

    const auto lines = read_lines(path);
    const auto cols = table_columns();
    if (lines.empty()) throw ParseError(path + ": empty file, expected a header", 1);
    const auto header = split(lines[0], ',');
    for (const auto& c : cols)
        if (std::find(header.begin(), header.end(), c) == header.end())
            throw ParseError(path + ": missing column '" + c + "'", 1);
    if (header != cols) throw ParseError(path + ": unexpected or reordered columns in header", 1);

    std::vector<EffectiveCoefficients> entries;
    std::size_t line_no = 1;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        line_no = i + 1;
        if (lines[i].empty()) {
            if (i + 1 == lines.size()) break;
            throw ParseError(path + ": empty line", line_no);
        }
        const auto fields = split(lines[i], ',');
        if (fields.size() != cols.size()) {
            std::ostringstream os;
            os << path << ": expected " << cols.size() << " fields, found " << fields.size();
            throw ParseError(os.str(), line_no);
        }
        std::vector<double> v;
        for (std::size_t f = 0; f < fields.size(); ++f) v.push_back(parse_double(fields[f], line_no, path + ": column " + cols[f]));
        auto e = from_row(v);
        if (v[2] != e.k() || v[3] != e.d()) throw ParseError(path + ": k_w or d_c disagrees with the tensor columns", line_no);
        entries.push_back(e);
    }
    if (static_cast<long>(entries.size()) != knots) {
        std::ostringstream os;
        os << path << ": expected " << knots << " rows, found " << entries.size();
        throw ParseError(os.str(), entries.size() + 2);
    }
    return CoefficientTable(std::move(entries), static_cast<int>(n), params, std::move(prov));
}

void write_snapshot(const MacroState& state, const ScalarField& r, const std::string& path)
{
    const GridSpec& g = r.grid();
    auto same = [&](const GridSpec& o) { return o == g; };
    if (!same(state.c.grid()) || !same(state.phi.grid()) || !same(state.p_f.grid()) || !same(state.p_s.grid()) ||
        !same(state.w_f.grid()) || !same(state.w_s.grid()))
        throw InvalidInput("write_snapshot: fields are on different grids");

    std::string s;
    s += "# vtk DataFile Version 3.0\n";
    s += "leach snapshot t=" + fmt(state.t) + "\n";
    s += "ASCII\nDATASET STRUCTURED_POINTS\n";
    s += "DIMENSIONS " + std::to_string(g.n[0]) + " " + std::to_string(g.n[1]) + " " + std::to_string(g.n[2]) + "\n";
    const auto o = g.center(0, 0, 0);
    s += "ORIGIN " + fmt(o[0]) + " " + fmt(o[1]) + " " + fmt(o[2]) + "\n";
    s += "SPACING " + fmt(g.h[0]) + " " + fmt(g.h[1]) + " " + fmt(g.h[2]) + "\n";
    s += "POINT_DATA " + std::to_string(g.size()) + "\n";
    auto scalars = [&](const char* name, const ScalarField& f) {
        s += std::string("SCALARS ") + name + " double 1\nLOOKUP_TABLE default\n";
        for (std::size_t c = 0; c < f.size(); ++c) s += fmt(f[c]) + "\n";
    };
    auto vectors = [&](const char* name, const VectorField& f) {
        s += std::string("VECTORS ") + name + " double\n";
        for (std::size_t c = 0; c < f.cells(); ++c) s += fmt(f.at(c, 0)) + " " + fmt(f.at(c, 1)) + " " + fmt(f.at(c, 2)) + "\n";
    };
    scalars("c", state.c);
    scalars("r", r);
    scalars("phi", state.phi);
    scalars("p_f", state.p_f);
    scalars("p_s", state.p_s);
    vectors("w_f", state.w_f);
    vectors("w_s", state.w_s);

    auto out = open_out(path);
    out << s;
    close_out(out, path);
}

Snapshot read_snapshot(const std::string& path)
{
    const auto lines = read_lines(path);
    std::size_t i = 0;
    auto next = [&](const char* what) -> const std::string& {
        if (i >= lines.size()) throw ParseError(path + ": unexpected end of file, expected " + what, i + 1);
        return lines[i++];
    };
    auto words = [](const std::string& l) {
        std::istringstream is(l);
        std::vector<std::string> w;
        for (std::string x; is >> x;) w.push_back(x);
        return w;
    };

    if (next("header").rfind("# vtk DataFile", 0) != 0) throw ParseError(path + ": not a legacy VTK file", i);
    const std::string title = next("title");
    const std::string tag = "leach snapshot t=";
    if (title.rfind(tag, 0) != 0) throw ParseError(path + ": title does not carry the snapshot time", i);
    Snapshot snap;
    snap.state.t = parse_double(title.substr(tag.size()), i, path + ": time");
    if (next("ASCII") != "ASCII") throw ParseError(path + ": only ASCII files are supported", i);
    if (next("DATASET") != "DATASET STRUCTURED_POINTS") throw ParseError(path + ": expected DATASET STRUCTURED_POINTS", i);

    auto triple = [&](const char* key) {
        const auto w = words(next(key));
        if (w.size() != 4 || w[0] != key) throw ParseError(path + ": expected " + key + " with three values", i);
        return std::array<double, 3>{parse_double(w[1], i, key), parse_double(w[2], i, key), parse_double(w[3], i, key)};
    };
    const auto dims = triple("DIMENSIONS");
    const auto origin = triple("ORIGIN");
    const auto spacing = triple("SPACING");
    GridSpec g;
    for (int d = 0; d < 3; ++d) {
        g.n[static_cast<std::size_t>(d)] = static_cast<int>(dims[static_cast<std::size_t>(d)]);
        g.h[static_cast<std::size_t>(d)] = spacing[static_cast<std::size_t>(d)];
    }
    try {
        g.validate();
    } catch (const InvalidInput& e) {
        throw ParseError(path + ": bad grid: " + e.what(), 5);
    }
    const auto expect_origin = g.center(0, 0, 0);
    if (origin != expect_origin) throw ParseError(path + ": origin is not the first cell center of a centered box", 6);

    const auto pd = words(next("POINT_DATA"));
    if (pd.size() != 2 || pd[0] != "POINT_DATA" || parse_long(pd[1], i, "POINT_DATA") != static_cast<long>(g.size()))
        throw ParseError(path + ": POINT_DATA count does not match DIMENSIONS", i);

    auto scalars = [&](const char* name) {
        const auto w = words(next("SCALARS"));
        if (w.size() < 3 || w[0] != "SCALARS" || w[1] != name || w[2] != "double")
            throw ParseError(path + ": expected SCALARS " + name + " double", i);
        if (next("LOOKUP_TABLE").rfind("LOOKUP_TABLE", 0) != 0) throw ParseError(path + ": expected LOOKUP_TABLE", i);
        ScalarField f(g);
        for (std::size_t c = 0; c < g.size(); ++c) f[c] = parse_double(next(name), i, path + ": " + name);
        return f;
    };
    auto vectors = [&](const char* name) {
        const auto w = words(next("VECTORS"));
        if (w.size() != 3 || w[0] != "VECTORS" || w[1] != name || w[2] != "double")
            throw ParseError(path + ": expected VECTORS " + name + " double", i);
        VectorField f(g);
        for (std::size_t c = 0; c < g.size(); ++c) {
            const auto v = words(next(name));
            if (v.size() != 3) throw ParseError(path + ": expected three components", i);
            for (int d = 0; d < 3; ++d) f.at(c, d) = parse_double(v[static_cast<std::size_t>(d)], i, path + ": " + name);
        }
        return f;
    };
    snap.state.c = scalars("c");
    snap.r = scalars("r");
    snap.state.phi = scalars("phi");
    snap.state.p_f = scalars("p_f");
    snap.state.p_s = scalars("p_s");
    snap.state.w_f = vectors("w_f");
    snap.state.w_s = vectors("w_s");
    for (; i < lines.size(); ++i)
        if (!lines[i].empty()) throw ParseError(path + ": trailing content", i + 1);
    return snap;
}

double dissolved_volume(const ScalarField& r, const ScalarField& r0)
{
    if (!(r.grid() == r0.grid())) throw InvalidInput("dissolved_volume: grids differ");
    double s = 0.0;
    for (std::size_t c = 0; c < r.size(); ++c) {
        if (r[c] > r0[c]) throw IntegrityError("dissolved_volume: radius exceeds its initial value at cell " + std::to_string(c));
        s += r0[c] * r0[c] * r0[c] - r[c] * r[c] * r[c];
    }
    return 4.0 * std::numbers::pi / 3.0 * s / static_cast<double>(r.size());
}

void write_time_series(const std::vector<TimeSeriesRow>& rows, const std::string& path)
{
    auto out = open_out(path);
    out << "step,t,dissolved_volume,c_min,c_mean,c_max,r_min,r_mean,r_max,porosity_mean\n";
    for (const auto& r : rows)
        out << r.step << ',' << fmt(r.t) << ',' << fmt(r.dissolved_volume) << ',' << fmt(r.c_min) << ',' << fmt(r.c_mean)
            << ',' << fmt(r.c_max) << ',' << fmt(r.r_min) << ',' << fmt(r.r_mean) << ',' << fmt(r.r_max) << ','
            << fmt(r.porosity_mean) << '\n';
    close_out(out, path);
}

void write_picard_reports(const std::vector<PicardReport>& reports, const std::string& path)
{
    auto out = open_out(path);
    out << "slab,iteration,difference,ratio,converged\n";
    for (const auto& rep : reports)
        for (std::size_t k = 0; k < rep.differences.size(); ++k) {
            out << rep.slab << ',' << k + 1 << ',' << fmt(rep.differences[k]) << ',';
            if (k > 0 && k - 1 < rep.ratios.size()) out << fmt(rep.ratios[k - 1]);
            out << ',' << (rep.converged ? 1 : 0) << '\n';
        }
    close_out(out, path);
}

void write_snapshot_index(const std::vector<SnapshotRecord>& records, const std::string& path)
{
    auto out = open_out(path);
    out << "step,t,file\n";
    for (const auto& r : records)
        out << r.step << ',' << fmt(r.t) << ',' << std::filesystem::path(r.path).filename().string() << '\n';
    close_out(out, path);
}

}  // namespace leach
