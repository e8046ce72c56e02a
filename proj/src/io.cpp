#include "modalkit/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace modalkit::io
{

namespace
{

[[noreturn]] void parse_error(const std::string& source, std::size_t line,
                              const std::string& what)
{
    throw Error(ErrorCode::Parse,
                source + ": line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ','))
        out.push_back(field);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

std::string trim(std::string s)
{
    const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

struct Table
{
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> lines; ///< source line of each row
};

/// Numeric rows of a CSV with a fixed header. Blank lines are skipped.
Table parse_table(const std::string& text, const std::vector<std::string>& header,
            const std::string& source)
{
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool have_header    = false;
    Table table;
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty())
            continue;
        auto fields = split_fields(line);
        for (auto& f : fields)
            f = trim(f);
        if (!have_header)
        {
            if (fields != header)
            {
                std::string want;
                for (const auto& h : header)
                    want += (want.empty() ? "" : ",") + h;
                parse_error(source, line_no, "expected header '" + want + "'");
            }
            have_header = true;
            continue;
        }
        if (fields.size() != header.size())
            parse_error(source, line_no,
                        "expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c)
        {
            const auto v = parse_double(fields[c]);
            if (!v)
                parse_error(source, line_no,
                            "field '" + header[c] + "' is not a number: '" +
                                fields[c] + "'");
            row.push_back(*v);
        }
        table.rows.push_back(std::move(row));
        table.lines.push_back(line_no);
    }
    if (!have_header)
        parse_error(source, line_no, "missing header");
    return table;
}

template <class T>
T get_field(const Json& j, const char* key)
{
    if (!j.contains(key))
        throw Error(ErrorCode::Parse, std::string("missing field '") + key +
                                          "'");
    try
    {
        return j.at(key).get<T>();
    }
    catch (const nlohmann::json::exception&)
    {
        throw Error(ErrorCode::Parse,
                    std::string("field '") + key + "' has the wrong type");
    }
}

Json as_json_number(double x)
{
    // Non-finite values have no JSON literal; they are written as null.
    return std::isfinite(x) ? Json(x) : Json(nullptr);
}

const char* merge_name(RegionMerge r)
{
    return r == RegionMerge::Union ? "union" : "partition";
}

} // namespace

std::string format_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::optional<double> parse_double(const std::string& text)
{
    const std::string t = trim(text);
    if (t.empty())
        return std::nullopt;
    char* end = nullptr;
    errno     = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v))
        return std::nullopt;
    // ERANGE on underflow still yields the nearest subnormal or zero.
    if (errno == ERANGE && std::abs(v) >= std::numeric_limits<double>::min())
        return std::nullopt;
    return v;
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
    {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec)
            throw Error(ErrorCode::Io, "cannot create directory " +
                                           path.parent_path().string() +
                                           ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::Io, "cannot open " + path.string() +
                                       " for writing");
    out << text;
    if (!out)
        throw Error(ErrorCode::Io, "write failed: " + path.string());
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json(const fs::path& path)
{
    const std::string text = read_text(path);
    try
    {
        return Json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const Json& j)
{
    write_text(path, j.dump(2) + "\n");
}

fs::path sidecar_path(const fs::path& csv)
{
    fs::path p = csv;
    p.replace_extension(".json");
    return p;
}

std::string samples_csv(const SignalSamples& s)
{
    std::string out = "k,re,im\n";
    for (Index k = 0; k < s.size(); ++k)
        out += std::to_string(k) + "," + format_double(s.a[k].real()) + "," +
               format_double(s.a[k].imag()) + "\n";
    return out;
}

Json samples_meta(const SignalSamples& s)
{
    return Json{{"n", s.size()}, {"delta", s.delta}, {"sigma", s.sigma}};
}

void write_samples(const fs::path& csv, const SignalSamples& s)
{
    write_text(csv, samples_csv(s));
    write_json(sidecar_path(csv), samples_meta(s));
}

SignalSamples parse_samples_csv(const std::string& text,
                                const std::string& source)
{
    const auto table = parse_table(text, {"k", "re", "im"}, source);
    const auto& rows = table.rows;
    SignalSamples s;
    s.a.resize(static_cast<Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
    {
        if (rows[r][0] != static_cast<double>(r))
            parse_error(source, table.lines[r],
                        "expected k = " + std::to_string(r));
        s.a[static_cast<Index>(r)] = Complex(rows[r][1], rows[r][2]);
    }
    if (s.size() < 2)
        throw Error(ErrorCode::Parse, source + ": need at least two samples");
    return s;
}

SignalSamples read_samples(const fs::path& csv)
{
    SignalSamples s = parse_samples_csv(read_text(csv), csv.string());
    const fs::path meta = sidecar_path(csv);
    if (fs::exists(meta))
    {
        const Json j = read_json(meta);
        try
        {
            if (j.contains("n") && get_field<Index>(j, "n") != s.size())
                throw Error(ErrorCode::Parse, "n does not match the CSV");
            if (j.contains("delta"))
                s.delta = get_field<double>(j, "delta");
            if (j.contains("sigma"))
                s.sigma = get_field<double>(j, "sigma");
        }
        catch (const Error& e)
        {
            throw Error(e.code(), meta.string() + ": " + e.what());
        }
    }
    return s;
}

Json complex_to_json(Complex z)
{
    return Json{{"re", z.real()}, {"im", z.imag()}};
}

Complex complex_from_json(const Json& j)
{
    return {get_field<double>(j, "re"), get_field<double>(j, "im")};
}

Json model_to_json(const ModalModel& m)
{
    Json modes = Json::array();
    for (Index j = 0; j < m.order(); ++j)
        modes.push_back({{"re_c", m.c[j].real()},
                         {"im_c", m.c[j].imag()},
                         {"re_xi", m.xi[j].real()},
                         {"im_xi", m.xi[j].imag()}});
    return Json{{"p", m.order()}, {"modes", modes}};
}

ModalModel model_from_json(const Json& j)
{
    const auto modes = get_field<Json>(j, "modes");
    if (!modes.is_array())
        throw Error(ErrorCode::Parse, "field 'modes' must be an array");
    ModalModel m;
    const auto p = static_cast<Index>(modes.size());
    if (j.contains("p") && get_field<Index>(j, "p") != p)
        throw Error(ErrorCode::Parse, "field 'p' disagrees with 'modes'");
    m.c.resize(p);
    m.xi.resize(p);
    for (Index h = 0; h < p; ++h)
    {
        const Json& e = modes[static_cast<std::size_t>(h)];
        m.c[h]        = {get_field<double>(e, "re_c"),
                         get_field<double>(e, "im_c")};
        m.xi[h]       = {get_field<double>(e, "re_xi"),
                         get_field<double>(e, "im_xi")};
    }
    m.validate();
    return m;
}

ModalModel any_model_from_json(const Json& j)
{
    if (!j.contains("real_modes"))
        return model_from_json(j);
    const auto modes = get_field<Json>(j, "real_modes");
    if (!modes.is_array())
        throw Error(ErrorCode::Parse, "field 'real_modes' must be an array");
    RealModalParams r;
    for (const auto& e : modes)
    {
        r.amplitude.push_back(get_field<double>(e, "amplitude"));
        r.decay.push_back(get_field<double>(e, "decay"));
        r.frequency.push_back(get_field<double>(e, "frequency"));
        r.phase.push_back(e.contains("phase") ? get_field<double>(e, "phase")
                                              : 0.0);
    }
    return real_to_complex(r);
}

Json hyperparameters_to_json(const Hyperparameters& hp)
{
    return Json{
        {"p_tilde", hp.p_tilde},
        {"beta_factor", hp.beta_factor},
        {"gamma", hp.gamma},
        {"tau", hp.tau},
        {"pseudo_count", hp.pseudo_count},
        {"sigma_ratio", hp.sigma_ratio},
        {"alpha", hp.alpha},
        {"cadzow_iters", hp.cadzow_iters},
        {"cadzow_tol", hp.cadzow_tol},
        {"lattice_dim", hp.lattice_dim},
        {"lattice_bounds",
         {{"x_min", hp.lattice_bounds.x_min},
          {"x_max", hp.lattice_bounds.x_max},
          {"y_min", hp.lattice_bounds.y_min},
          {"y_max", hp.lattice_bounds.y_max}}},
        {"region_merge", merge_name(hp.region_merge)},
    };
}

void apply_hyperparameters(const Json& j, Hyperparameters& hp)
{
    if (!j.is_object())
        throw Error(ErrorCode::Parse, "hyperparameters must be an object");
    for (const auto& [key, value] : j.items())
    {
        if (key == "p_tilde")
            hp.p_tilde = get_field<int>(j, "p_tilde");
        else if (key == "beta_factor")
            hp.beta_factor = get_field<double>(j, "beta_factor");
        else if (key == "gamma")
            hp.gamma = get_field<double>(j, "gamma");
        else if (key == "tau")
            hp.tau = get_field<double>(j, "tau");
        else if (key == "pseudo_count")
            hp.pseudo_count = get_field<int>(j, "pseudo_count");
        else if (key == "sigma_ratio")
            hp.sigma_ratio = get_field<double>(j, "sigma_ratio");
        else if (key == "alpha")
            hp.alpha = get_field<double>(j, "alpha");
        else if (key == "cadzow_iters")
            hp.cadzow_iters = get_field<int>(j, "cadzow_iters");
        else if (key == "cadzow_tol")
            hp.cadzow_tol = get_field<double>(j, "cadzow_tol");
        else if (key == "lattice_dim")
            hp.lattice_dim = get_field<int>(j, "lattice_dim");
        else if (key == "lattice_bounds")
        {
            auto& b = hp.lattice_bounds;
            b.x_min = get_field<double>(value, "x_min");
            b.x_max = get_field<double>(value, "x_max");
            b.y_min = get_field<double>(value, "y_min");
            b.y_max = get_field<double>(value, "y_max");
        }
        else if (key == "region_merge")
        {
            const auto name = get_field<std::string>(j, "region_merge");
            if (name == "partition")
                hp.region_merge = RegionMerge::Partition;
            else if (name == "union")
                hp.region_merge = RegionMerge::Union;
            else
                throw Error(ErrorCode::Parse,
                            "region_merge must be 'partition' or 'union'");
        }
        else
            throw Error(ErrorCode::Parse,
                        "unknown hyperparameter '" + key + "'");
    }
    hp.validate();
}

Json report_to_json(const EstimationReport& r)
{
    Json modes = Json::array();
    for (Index h = 0; h < r.p_ott; ++h)
    {
        const auto u = static_cast<std::size_t>(h);
        modes.push_back({
            {"re_c", r.c_hat[h].real()},
            {"im_c", r.c_hat[h].imag()},
            {"re_xi", r.xi_hat[h].real()},
            {"im_xi", r.xi_hat[h].imag()},
            {"sd_re_xi", r.xi_spread[u].first},
            {"sd_im_xi", r.xi_spread[u].second},
            {"sd_re_c", r.c_spread[u].first},
            {"sd_im_c", r.c_spread[u].second},
            {"cluster_mean_c", complex_to_json(r.c_cluster_mean[h])},
            {"cluster_size", r.cluster_size[u]},
        });
    }
    return Json{
        {"p_ott", r.p_ott},
        {"p", r.p_ott},
        {"modes", modes},
        {"residual", as_json_number(r.residual)},
        {"diagnostics",
         {{"region_count", r.region_count},
          {"no_regions", r.no_regions},
          {"pooled_count", r.pooled_count},
          {"discarded_fraction", as_json_number(r.discarded_fraction)},
          {"rank_deficient_samples", r.rank_deficient_samples},
          {"cadzow_rank", r.cadzow_rank},
          {"cadzow_iterations", r.cadzow_iterations}}},
        {"n", r.n},
        {"sigma", r.sigma},
        {"seed", r.seed},
        {"hyperparameters", hyperparameters_to_json(r.hp)},
    };
}

std::string density_csv(const DensityGrid& grid)
{
    const Lattice& lat = grid.lattice;
    std::string out    = "x,y,h\n";
    for (int i = 0; i < lat.dim; ++i)
        for (int j = 0; j < lat.dim; ++j)
            out += format_double(lat.x(i)) + "," + format_double(lat.y(j)) +
                   "," + format_double(grid.values(i, j)) + "\n";
    return out;
}

Json regions_to_json(const RegionSet& regions)
{
    Json list = Json::array();
    for (const auto& reg : regions.regions)
    {
        Json cells = Json::array();
        for (const auto& [i, j] : reg.cells)
            cells.push_back({i, j});
        list.push_back({{"peak", {{"x", reg.peak.real()}, {"y", reg.peak.imag()}}},
                        {"value", reg.peak_value},
                        {"cells", cells}});
    }
    return Json{{"p_N", regions.regions.size()}, {"regions", list}};
}

DensityTable parse_density_csv(const std::string& text,
                               const std::string& source)
{
    DensityTable t;
    for (const auto& row : parse_table(text, {"x", "y", "h"}, source).rows)
    {
        t.x.push_back(row[0]);
        t.y.push_back(row[1]);
        t.h.push_back(row[2]);
    }
    return t;
}

std::string curve_csv(const mle1d::DensityCurve& curve)
{
    std::string out = "x,p\n";
    for (std::size_t k = 0; k < curve.grid.size(); ++k)
        out += format_double(curve.grid[k]) + "," +
               format_double(curve.values[k]) + "\n";
    return out;
}

mle1d::DensityCurve parse_curve_csv(const std::string& text,
                                    const std::string& source)
{
    mle1d::DensityCurve c;
    for (const auto& row : parse_table(text, {"x", "p"}, source).rows)
    {
        c.grid.push_back(row[0]);
        c.values.push_back(row[1]);
    }
    return c;
}

Json grid_search_to_json(const GridSearchResult& r)
{
    Json j   = model_to_json(r.model);
    j["m_ott"] = r.m_ott;
    j["p_ott"] = r.p_ott;
    j["bic"]   = as_json_number(r.bic);
    j["perfect_fit"] = std::isinf(r.bic) && r.bic < 0.0;
    return j;
}

Json error_record_to_json(const ErrorRecord& e)
{
    return Json{{"e", e.e}, {"p_ott", e.p_ott}, {"sigma", e.sigma}};
}

} // namespace modalkit::io
