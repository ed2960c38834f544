#include "engel/report.hpp"

#include "engel/sampling.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace engel {

//---------------------------------------------------------------------------//
// Presets
//---------------------------------------------------------------------------//

std::vector<PresetInfo> const& preset_catalog()
{
    static std::vector<PresetInfo> const catalog = {
        {"darboux", "Darboux normal form on (x, y, z, w)", false},
        {"long-darboux", "long chart with cos/sin twisting, period pi in theta", false},
        {"integrable-counterexample", "integrable plane field (fails verification)", false},
        {"cartan-r3", "Cartan prolongation of the standard contact R^3", false},
        {"lorentz-product", "product extension of the constant-curvature unit tangent bundle", true},
        {"lorentz-magnetic", "magnetic extension of the constant-curvature unit tangent bundle", true},
        {"lorentz-product-torus", "product extension over the flat torus chart", false},
        {"lorentz-product-surface", "product extension over the manifest surface", false},
        {"lorentz-magnetic-flat", "magnetic extension over the flat chart", false},
        {"lorentz-magnetic-sphere", "magnetic extension over the round sphere chart", false},
        {"lorentz-magnetic-disk", "magnetic extension over the Poincare disk", false},
        {"lorentz-magnetic-bump", "magnetic extension over a variable-curvature chart", false},
        {"lorentz-magnetic-surface", "magnetic extension over the manifest surface", false},
        {"prequantum-local", "prequantum prolongation of the local contact model", false},
        {"propellor-cat", "propellor on the mapping torus of [[2,1],[1,1]]", false},
        {"propellor-identity", "propellor on T^3 (identity monodromy)", false},
        {"propellor-parabolic", "propellor on the mapping torus of [[1,1],[0,1]]", false},
        {"propellor-invariant", "invariant-field propellor on T^3", false},
        {"suspension-geodesic", "suspension of the time-2pi geodesic flow, kappa = -1", false},
        {"suspension-identity", "suspension of the identity of R^3", false},
        {"bi-engel-plus", "first member of the bi-Engel pair", false},
        {"bi-engel-minus", "second member of the bi-Engel pair", false},
        {"kappa-sweep", "report only: magnetic classification across kappa", false},
    };
    return catalog;
}

namespace {

bool starts_with(std::string const& s, std::string const& prefix)
{
    return s.compare(0, prefix.size(), prefix) == 0;
}

//! Parses the whole string as a number.
std::optional<double> parse_number(std::string const& s)
{
    if (s.empty())
        return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v))
        return std::nullopt;
    return v;
}

struct LorentzName
{
    LorentzExtension::Kind kind;
    std::string suffix;  //!< empty, a number or a surface name
};

std::optional<LorentzName> split_lorentz(std::string const& name)
{
    for (auto [prefix, kind] : {std::pair{std::string("lorentz-product"),
                                          LorentzExtension::Kind::product},
                                std::pair{std::string("lorentz-magnetic"),
                                          LorentzExtension::Kind::magnetic}})
    {
        if (name == prefix)
            return LorentzName{kind, ""};
        if (starts_with(name, prefix + "-"))
            return LorentzName{kind, name.substr(prefix.size() + 1)};
    }
    return std::nullopt;
}

double check_kappa(double k)
{
    if (!std::isfinite(k) || std::abs(k) > 100)
        throw ConfigError("kappa must be finite with |kappa| <= 100");
    return k;
}

}  // namespace

LorentzExtension preset_extension(std::string const& name, PresetParams const& params)
{
    auto ln = split_lorentz(name);
    if (!ln)
        throw ConfigError("preset '" + name + "' is not a Lorentz extension");
    auto build = [&](auto const& ut) {
        return ln->kind == LorentzExtension::Kind::product ? product_extension(ut)
                                                           : magnetic_extension(ut);
    };
    if (ln->suffix.empty())
    {
        if (!params.kappa)
            throw ConfigError("preset '" + name + "' needs --kappa");
        return build(constant_curvature_ut(check_kappa(*params.kappa)));
    }
    if (auto k = parse_number(ln->suffix))
    {
        if (params.kappa && *params.kappa != *k)
            throw ConfigError("kappa given twice with different values");
        return build(constant_curvature_ut(check_kappa(*k)));
    }
    if (params.kappa)
        throw ConfigError("--kappa does not apply to chart preset '" + name + "'");
    if (ln->suffix == "surface")
    {
        if (!params.surface)
            throw ConfigError("preset '" + name + "' needs a surface in the manifest");
        return build(unit_tangent_frames(*params.surface));
    }
    if (ln->suffix == "torus")
        return build(unit_tangent_frames(surface_flat_torus()));
    try
    {
        return build(unit_tangent_frames(surface_by_name(ln->suffix)));
    }
    catch (ConfigError const&)
    {
        throw ConfigError("unknown preset '" + name + "'");
    }
}

EngelStructure make_preset(std::string const& name, PresetParams const& params)
{
    if (split_lorentz(name))
        return lorentz_prolongation(preset_extension(name, params));
    if (params.kappa)
        throw ConfigError("--kappa does not apply to preset '" + name + "'");
    if (name == "darboux")
        return darboux_standard();
    if (name == "long-darboux" || name == "darboux-long")
        return darboux_long();
    if (name == "integrable-counterexample")
        return integrable_counterexample();
    if (name == "cartan-r3")
        return cartan_prolongation(contact_r3());
    if (name == "prequantum-local")
        return prequantum_prolongation(prequantum_local_model());
    if (name == "propellor-cat")
    {
        Mat2 A;
        A << 2, 1, 1, 1;
        return propellor_structure(A).engel;
    }
    if (name == "propellor-identity")
        return propellor_structure(Mat2::Identity()).engel;
    if (name == "propellor-parabolic")
    {
        Mat2 A;
        A << 1, 1, 0, 1;
        return propellor_structure(A).engel;
    }
    if (name == "propellor-invariant")
        return propellor_structure(Mat2::Identity(), {}, PropellorVariant::invariant_field)
            .engel;
    if (name == "suspension-geodesic")
        return suspension(geodesic_suspension_data(true));
    if (name == "suspension-identity")
        return suspension(identity_suspension_data());
    if (name == "bi-engel-plus")
        return bi_engel_pair().plus;
    if (name == "bi-engel-minus")
        return bi_engel_pair().minus;
    if (name == "kappa-sweep")
        throw ConfigError("preset 'kappa-sweep' is only available to the report command");
    throw ConfigError("unknown preset '" + name + "'");
}

Vec preset_start(EngelStructure const& s)
{
    auto const& d = s.model.domain();
    Vec p = 0.5 * (d.lo + d.hi);
    for (int i = 0; i < d.dim(); ++i)
        if (d.period.size() == d.dim() && d.period[i] > 0)
            p[i] = d.lo[i];
    return p;
}

ConformalSurface surface_from_json(json const& j)
{
    if (!j.is_object())
        throw ConfigError("surface must be an object");
    if (j.contains("catalog"))
        return surface_by_name(j.at("catalog").get<std::string>());
    if (!j.contains("table") || !j.contains("lo") || !j.contains("hi"))
        throw ConfigError("surface needs 'catalog' or 'table', 'lo' and 'hi'");
    auto rows = j.at("table").get<std::vector<std::vector<double>>>();
    if (rows.size() < 4 || rows.front().size() < 4)
        throw ConfigError("surface table needs at least 4 x 4 samples");
    Mat t(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        if (rows[i].size() != rows.front().size())
            throw ConfigError("surface table rows differ in length");
        for (std::size_t k = 0; k < rows[i].size(); ++k)
            t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    auto lo = j.at("lo").get<std::vector<double>>();
    auto hi = j.at("hi").get<std::vector<double>>();
    if (lo.size() != 2 || hi.size() != 2 || !(lo[0] < hi[0]) || !(lo[1] < hi[1]))
        throw ConfigError("surface 'lo'/'hi' must be increasing pairs");
    return surface_from_table(j.value("name", std::string("table")), Vec2(lo[0], lo[1]),
                              Vec2(hi[0], hi[1]), t);
}

//---------------------------------------------------------------------------//
// Manifest
//---------------------------------------------------------------------------//

namespace {

std::set<std::string> const& command_names()
{
    static std::set<std::string> const names = {"verify", "classify", "orbit", "rigidity",
                                                "report"};
    return names;
}

std::set<std::string> const& artifact_names()
{
    static std::set<std::string> const names = {"verification", "orbits", "holonomy",
                                                "classification", "rigidity"};
    return names;
}

void require_range(char const* what, double v, double lo, double hi)
{
    if (!(v >= lo && v <= hi))
    {
        std::ostringstream os;
        os << what << " must lie in [" << lo << ", " << hi << "]";
        throw ConfigError(os.str());
    }
}

}  // namespace

void validate(RunManifest const& m)
{
    if (!command_names().count(m.command))
        throw ConfigError("unknown command '" + m.command + "'");
    if (m.command == "verify" || m.command == "classify" || m.command == "orbit")
    {
        if (m.preset.empty())
            throw ConfigError(m.command + " needs --preset");
        // Building is the existence check; it also validates kappa and surfaces.
        if (m.preset == "kappa-sweep")
            throw ConfigError("preset 'kappa-sweep' is only available to the report command");
        bool known = split_lorentz(m.preset).has_value();
        for (auto const& p : preset_catalog())
            known = known || p.name == m.preset;
        known = known || m.preset == "darboux-long";
        if (!known)
            throw ConfigError("unknown preset '" + m.preset + "'");
    }
    if (m.command == "report" && !m.preset.empty() && m.preset != "kappa-sweep")
        throw ConfigError("report supports only --preset kappa-sweep");
    if (m.command == "rigidity" && !m.preset.empty() && m.preset != "darboux")
        throw ConfigError("rigidity runs on the darboux preset only");
    if (m.params.kappa)
        check_kappa(*m.params.kappa);
    if (m.T)
        require_range("T", *m.T, 1e-6, 1e4);
    if (m.dt)
        require_range("dt", *m.dt, 1e-6, 1.0);
    if (m.T && m.dt && *m.dt > *m.T)
        throw ConfigError("dt must not exceed T");
    require_range("samples", static_cast<double>(m.samples), 1, 1e7);
    require_range("trials", static_cast<double>(m.trials), 1, 1e7);
    require_range("orbits", static_cast<double>(m.n_orbits), 1, 1e4);
    require_range("tol", m.tol.rank_tol, 1e-15, 1e-2);
    require_range("fd_step", m.tol.fd_step, 1e-10, 1e-1);
    require_range("laplacian_step", m.tol.laplacian_step, 1e-8, 1e-1);
    require_range("angle_tol", m.tol.angle_tol, 1e-15, 1e-1);
    require_range("marginal_band", m.tol.marginal_band, 1, 1e8);
    if (!m.format.empty() && m.format != "json" && m.format != "csv")
        throw ConfigError("format must be json or csv");
    for (auto const& a : m.artifacts)
        if (!artifact_names().count(a))
            throw ConfigError("unknown artifact '" + a + "'");
}

void apply_manifest_json(RunManifest& m, json const& j)
{
    if (!j.is_object())
        throw ConfigError("manifest must be a JSON object");
    static std::set<std::string> const keys = {
        "schema_version", "command", "preset", "kappa", "T", "dt", "samples", "trials",
        "orbits", "seed", "tol", "out", "format", "artifacts", "surface"};
    for (auto const& [k, v] : j.items())
        if (!keys.count(k))
            throw ConfigError("unknown manifest key '" + k + "'");
    try
    {
        if (j.contains("schema_version") && j.at("schema_version").get<int>() != schema_version)
            throw ConfigError("unsupported manifest schema_version");
        auto count = [&](char const* key, std::size_t& dst) {
            if (!j.contains(key))
                return;
            auto v = j.at(key).get<double>();
            if (!(v >= 1) || v != std::floor(v) || v > 1e7)
                throw ConfigError(std::string(key) + " must be a positive integer <= 1e7");
            dst = static_cast<std::size_t>(v);
        };
        if (j.contains("command"))
            m.command = j.at("command").get<std::string>();
        if (j.contains("preset"))
            m.preset = j.at("preset").get<std::string>();
        if (j.contains("kappa"))
            m.params.kappa = j.at("kappa").get<double>();
        if (j.contains("T"))
            m.T = j.at("T").get<double>();
        if (j.contains("dt"))
            m.dt = j.at("dt").get<double>();
        count("samples", m.samples);
        count("trials", m.trials);
        count("orbits", m.n_orbits);
        if (j.contains("seed"))
            m.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("tol"))
        {
            auto const& t = j.at("tol");
            if (t.is_number())
            {
                m.tol.rank_tol = t.get<double>();
            }
            else
            {
                static std::set<std::string> const tk = {"fd_step", "laplacian_step", "rank_tol",
                                                         "marginal_band", "angle_tol"};
                for (auto const& [k, v] : t.items())
                    if (!tk.count(k))
                        throw ConfigError("unknown tolerance '" + k + "'");
                m.tol.fd_step = t.value("fd_step", m.tol.fd_step);
                m.tol.laplacian_step = t.value("laplacian_step", m.tol.laplacian_step);
                m.tol.rank_tol = t.value("rank_tol", m.tol.rank_tol);
                m.tol.marginal_band = t.value("marginal_band", m.tol.marginal_band);
                m.tol.angle_tol = t.value("angle_tol", m.tol.angle_tol);
            }
        }
        if (j.contains("out"))
            m.out_dir = j.at("out").get<std::string>();
        if (j.contains("format"))
            m.format = j.at("format").get<std::string>();
        if (j.contains("artifacts"))
            m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
        if (j.contains("surface"))
            m.params.surface = surface_from_json(j.at("surface"));
    }
    catch (json::exception const& e)
    {
        throw ConfigError(std::string("malformed manifest: ") + e.what());
    }
}

RunManifest load_manifest(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read manifest '" + path + "'");
    json j;
    try
    {
        j = json::parse(in);
    }
    catch (json::exception const& e)
    {
        throw ConfigError("manifest '" + path + "' is not valid JSON: " + e.what());
    }
    RunManifest m;
    apply_manifest_json(m, j);
    return m;
}

std::string effective_format(RunManifest const& m)
{
    if (!m.format.empty())
        return m.format;
    return m.command == "orbit" ? "csv" : "json";
}

//---------------------------------------------------------------------------//
// Serialization
//---------------------------------------------------------------------------//

namespace {

void write_number(std::string& out, double v)
{
    if (!std::isfinite(v))
    {
        out += "null";
        return;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

void dump_rec(json const& j, int indent, int level, std::string& out)
{
    auto newline = [&](int lvl) {
        if (indent < 0)
            return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * lvl), ' ');
    };
    switch (j.type())
    {
    case json::value_t::object:
    {
        if (j.empty())
        {
            out += "{}";
            return;
        }
        out += '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it)  // std::map: keys sorted
        {
            if (!first)
                out += ',';
            first = false;
            newline(level + 1);
            out += json(it.key()).dump();
            out += indent < 0 ? ":" : ": ";
            dump_rec(it.value(), indent, level + 1, out);
        }
        newline(level);
        out += '}';
        return;
    }
    case json::value_t::array:
    {
        if (j.empty())
        {
            out += "[]";
            return;
        }
        out += '[';
        bool first = true;
        for (auto const& v : j)
        {
            if (!first)
                out += ',';
            first = false;
            newline(level + 1);
            dump_rec(v, indent, level + 1, out);
        }
        newline(level);
        out += ']';
        return;
    }
    case json::value_t::number_float:
        write_number(out, j.get<double>());
        return;
    default:
        out += j.dump();
        return;
    }
}

json vec_json(Vec const& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(v[i]);
    return a;
}

json mat2_json(Mat2 const& m)
{
    return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})});
}

}  // namespace

std::string dump_json(json const& j, int indent)
{
    std::string out;
    dump_rec(j, indent, 0, out);
    return out;
}

json to_json(Tolerances const& t)
{
    return {{"fd_step", t.fd_step},
            {"laplacian_step", t.laplacian_step},
            {"rank_tol", t.rank_tol},
            {"marginal_band", t.marginal_band},
            {"angle_tol", t.angle_tol}};
}

json to_json(VerificationReport const& r)
{
    json failures = json::array();
    for (std::size_t i = 0; i < r.points.size(); ++i)
    {
        auto const& p = r.points[i];
        if (p.pass && p.cauchy_angle_error <= r.tol.angle_tol)
            continue;
        failures.push_back({{"index", i},
                            {"point", vec_json(p.point)},
                            {"ranks", {p.rank_D, p.rank_E, p.rank_EE}},
                            {"e_consistent", p.e_consistent},
                            {"cauchy_angle_error", p.cauchy_angle_error}});
        if (failures.size() >= 20)
            break;
    }
    return {{"provenance", r.provenance},
            {"pass", r.pass},
            {"cauchy_pass", r.cauchy_pass},
            {"n_points", r.points.size()},
            {"n_pass", r.n_pass},
            {"n_marginal", r.n_marginal},
            {"max_cauchy_angle_error", r.max_cauchy_angle_error},
            {"max_w_in_D_error", r.max_w_in_D_error},
            {"tolerances", to_json(r.tol)},
            {"failures", failures}};
}

json to_json(GlobalTypeEstimate const& g)
{
    json orbits = json::array();
    for (auto const& o : g.orbits)
    {
        json lines = json::array();
        for (auto const& l : o.invariant_lines)
            lines.push_back({l.x(), l.y()});
        orbits.push_back({{"start", vec_json(o.start)},
                          {"T", o.T},
                          {"exp_slope", o.exp_slope},
                          {"exp_r2", o.exp_r2},
                          {"lin_slope", o.lin_slope},
                          {"lin_r2", o.lin_r2},
                          {"max_distortion", o.max_distortion},
                          {"invariant_lines", lines},
                          {"crosses_invariant", o.crosses_invariant},
                          {"kind", to_string(o.kind)},
                          {"note", o.note}});
    }
    auto const& opt = g.options;
    return {{"kind", to_string(g.kind)},
            {"trans", g.trans},
            {"summary", g.summary()},
            {"options",
             {{"n_orbits", opt.n_orbits},
              {"T_max", opt.T_max},
              {"dt", opt.dt},
              {"c_min", opt.c_min},
              {"r2_min", opt.r2_min},
              {"distortion_bound", opt.distortion_bound},
              {"seed", opt.seed}}},
            {"orbits", orbits}};
}

json to_json(ProjectiveType const& p)
{
    return {{"name", p.name()},
            {"length", p.length},
            {"trace", p.trace},
            {"n", p.n},
            {"sign", p.sign}};
}

json to_json(RigidityReport const& r)
{
    json sweep = json::array();
    for (auto const& s : r.sweep)
        sweep.push_back({{"eps", s.eps}, {"y_end", s.y_end}, {"sup_z", s.sup_z}});
    return {{"T", r.T},
            {"n_trials", r.n_trials},
            {"seed", r.seed},
            {"counts",
             {{"APlus", r.n_aplus},
              {"AMinus", r.n_aminus},
              {"AW", r.n_aw},
              {"Outside", r.n_outside}}},
            {"outside_aplus_or_aw", r.n_aminus + r.n_outside},
            {"max_cone_value", r.max_cone_value},
            {"zero_control_in_aw", r.zero_control_in_aw},
            {"sweep", sweep},
            {"sweep_monotone", r.sweep_monotone},
            {"pass", r.pass()}};
}

json to_json(ProjectionResiduals const& r)
{
    return {{"samples", r.t.size()},
            {"max_speed_error", r.max_speed_error},
            {"max_r1", r.max_r1},
            {"max_r2", r.max_r2}};
}

//---------------------------------------------------------------------------//
// Commands
//---------------------------------------------------------------------------//

namespace {

json header(RunManifest const& m)
{
    json h = {{"schema_version", schema_version},
              {"command", m.command},
              {"preset", m.preset},
              {"seed", m.seed}};
    if (m.params.kappa)
        h["kappa"] = *m.params.kappa;
    return h;
}

bool wants(RunManifest const& m, std::string const& artifact)
{
    if (m.artifacts.empty())
        return true;
    for (auto const& a : m.artifacts)
        if (a == artifact)
            return true;
    return false;
}

void write_artifact(RunManifest const& m, std::string const& file, std::string const& text)
{
    if (m.out_dir.empty())
        return;
    std::filesystem::create_directories(m.out_dir);
    auto path = std::filesystem::path(m.out_dir) / file;
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw ConfigError("cannot write '" + path.string() + "'");
    f << text;
}

void emit(RunManifest const& m, std::ostream& out, std::string const& artifact,
          std::string const& stem, std::string const& text)
{
    out << text;
    if (wants(m, artifact))
        write_artifact(m, stem + (effective_format(m) == "csv" ? ".csv" : ".json"), text);
}

std::string fmt(double v)
{
    std::string s;
    write_number(s, v);
    return s;
}

}  // namespace

int cmd_verify(RunManifest const& m, std::ostream& out, std::ostream& log)
{
    auto s = make_preset(m.preset, m.params);
    VerifyOptions opt;
    opt.tol = m.tol;
    opt.seed = m.seed;
    auto rep = verify_engel(s, m.samples, opt);
    bool ok = rep.pass && rep.cauchy_pass;

    std::string text;
    if (effective_format(m) == "csv")
    {
        std::ostringstream os;
        os << "index,rank_D,rank_E,rank_EE,e_consistent,cauchy_angle_error,marginal,pass";
        for (int i = 0; i < s.dim(); ++i)
            os << ",p" << i;
        os << '\n';
        for (std::size_t i = 0; i < rep.points.size(); ++i)
        {
            auto const& p = rep.points[i];
            os << i << ',' << p.rank_D << ',' << p.rank_E << ',' << p.rank_EE << ','
               << p.e_consistent << ',' << fmt(p.cauchy_angle_error) << ',' << p.marginal
               << ',' << p.pass;
            for (Eigen::Index k = 0; k < p.point.size(); ++k)
                os << ',' << fmt(p.point[k]);
            os << '\n';
        }
        text = os.str();
    }
    else
    {
        json j = header(m);
        j["samples"] = m.samples;
        j["verification"] = to_json(rep);
        j["pass"] = ok;
        text = dump_json(j) + "\n";
    }
    emit(m, out, "verification", "verification", text);
    log << "verify " << m.preset << ": " << (ok ? "pass" : "FAIL") << " (" << rep.n_pass << "/"
        << rep.points.size() << " points, max Cauchy angle error "
        << fmt(rep.max_cauchy_angle_error) << ")\n";
    return ok ? 0 : 1;
}

int cmd_classify(RunManifest const& m, std::ostream& out, std::ostream& log)
{
    auto s = make_preset(m.preset, m.params);
    GlobalTypeOptions opt;
    opt.n_orbits = m.n_orbits;
    opt.seed = m.seed;
    if (m.T)
        opt.T_max = *m.T;
    if (m.dt)
        opt.dt = *m.dt;
    auto g = estimate_global_type(s, opt);

    std::string text;
    if (effective_format(m) == "csv")
    {
        std::ostringstream os;
        os << "orbit,kind,exp_slope,exp_r2,lin_slope,lin_r2,max_distortion,crosses_invariant\n";
        for (std::size_t i = 0; i < g.orbits.size(); ++i)
        {
            auto const& o = g.orbits[i];
            os << i << ',' << to_string(o.kind) << ',' << fmt(o.exp_slope) << ','
               << fmt(o.exp_r2) << ',' << fmt(o.lin_slope) << ',' << fmt(o.lin_r2) << ','
               << fmt(o.max_distortion) << ',' << o.crosses_invariant << '\n';
        }
        text = os.str();
    }
    else
    {
        json j = header(m);
        j["classification"] = to_json(g);
        text = dump_json(j) + "\n";
    }
    emit(m, out, "classification", "classification", text);
    log << g.summary() << "\n";
    return g.kind == GlobalKind::unknown ? 1 : 0;
}

int cmd_orbit(RunManifest const& m, std::ostream& out, std::ostream& log)
{
    auto s = make_preset(m.preset, m.params);
    double T = m.T.value_or(10.0);
    double dt = m.dt.value_or(1e-3);
    auto tr = trace_orbit(s, preset_start(s), T, dt);

    json j = header(m);
    j["T"] = T;
    j["dt"] = dt;
    j["samples"] = tr.size();
    bool monotone = true;
    try
    {
        auto d = developing_map(tr);
        j["developing"] = {{"monotone", true}, {"direction", d.direction}, {"length", d.length}};
    }
    catch (MonotonicityViolation const& e)
    {
        monotone = false;
        j["developing"] = {{"monotone", false}, {"error", e.what()}};
    }
    Mat2 final_M = tr.M.back();
    j["holonomy"] = {{"M_end", mat2_json(final_M)}};
    if (s.model.is_lie())
    {
        Mat2 closed = holonomy_closed_form(s)(T);
        j["holonomy"]["closed_form"] = mat2_json(closed);
        j["holonomy"]["max_abs_error"] = (final_M - closed).cwiseAbs().maxCoeff();
    }
    if (auto ln = split_lorentz(m.preset);
        ln && ln->kind == LorentzExtension::Kind::magnetic && !s.model.is_lie())
    {
        j["projection"] = to_json(geodesic_projection_check(preset_extension(m.preset, m.params), tr));
    }

    std::string csv = orbit_csv(tr);
    std::string summary = dump_json(j) + "\n";
    out << (effective_format(m) == "csv" ? csv : summary);
    if (wants(m, "orbits"))
        write_artifact(m, "orbit.csv", csv);
    if (wants(m, "holonomy"))
        write_artifact(m, "orbit.json", summary);
    log << "orbit " << m.preset << ": " << tr.size() << " samples, developing angle "
        << (monotone ? "monotone" : "NOT monotone") << "\n";
    return monotone ? 0 : 1;
}

int cmd_rigidity(RunManifest const& m, std::ostream& out, std::ostream& log)
{
    double T = m.T.value_or(1.0);
    double dt = m.dt.value_or(1e-3);
    auto r = rigidity_probe(T, m.trials, m.seed, dt);

    std::string text;
    if (effective_format(m) == "csv")
    {
        std::ostringstream os;
        os << "trial,x,y,z,w,region,cone_value\n";
        for (std::size_t i = 0; i < r.endpoints.size(); ++i)
        {
            auto const& e = r.endpoints[i];
            os << i << ',' << fmt(e[0]) << ',' << fmt(e[1]) << ',' << fmt(e[2]) << ','
               << fmt(e[3]) << ',' << to_string(accessible_membership(e)) << ','
               << fmt(boundary_cone_value(e)) << '\n';
        }
        text = os.str();
    }
    else
    {
        json j = header(m);
        j["dt"] = dt;
        j["rigidity"] = to_json(r);
        text = dump_json(j) + "\n";
    }
    emit(m, out, "rigidity", "rigidity", text);
    log << "rigidity: " << (r.n_aminus + r.n_outside) << " of " << r.n_trials
        << " endpoints outside A+ u AW, max cone value " << fmt(r.max_cone_value) << "\n";
    return r.pass() ? 0 : 1;
}

std::vector<double> default_sweep_kappas()
{
    return {-2, -1.5, -1, -0.75, -0.5, -0.25, 0, 0.5, 1};
}

std::vector<SweepRow> kappa_sweep(std::vector<double> const& kappas,
                                  GlobalTypeOptions const& opt)
{
    std::vector<SweepRow> rows;
    for (double k : kappas)
    {
        SweepRow row;
        row.kappa = k;
        row.kappa_kappa1 = k * (k + 1);
        row.predicted = row.kappa_kappa1 > 0   ? GlobalKind::elliptic
                        : row.kappa_kappa1 < 0 ? GlobalKind::hyperbolic
                                               : GlobalKind::parabolic;
        PresetParams p;
        p.kappa = k;
        auto s = make_preset("lorentz-magnetic", p);
        row.estimated = estimate_global_type(s, opt).kind;
        auto tr = trace_orbit(s, preset_start(s), 1.0, 1e-3);
        HolonomyLift h{holonomy_closed_form(s)(1.0), tr.angle.back() - tr.angle.front()};
        row.closed_form = classify_projective(h).name();
        row.agree = row.predicted == row.estimated;
        rows.push_back(row);
    }
    return rows;
}

int cmd_report(RunManifest const& m, std::ostream& out, std::ostream& log)
{
    GlobalTypeOptions opt;
    opt.n_orbits = m.n_orbits;
    opt.seed = m.seed;
    if (m.T)
        opt.T_max = *m.T;
    if (m.dt)
        opt.dt = *m.dt;
    auto kappas = default_sweep_kappas();
    if (m.params.kappa)
        kappas = {*m.params.kappa};
    auto rows = kappa_sweep(kappas, opt);
    bool ok = true;
    for (auto const& r : rows)
        ok = ok && r.agree;

    std::string text;
    if (effective_format(m) == "csv")
    {
        std::ostringstream os;
        os << "kappa,kappa_kappa_plus_1,predicted,estimated,closed_form_t1,agree\n";
        for (auto const& r : rows)
            os << fmt(r.kappa) << ',' << fmt(r.kappa_kappa1) << ',' << to_string(r.predicted)
               << ',' << to_string(r.estimated) << ',' << r.closed_form << ',' << r.agree
               << '\n';
        text = os.str();
    }
    else
    {
        json j = header(m);
        j["preset"] = "kappa-sweep";
        json table = json::array();
        for (auto const& r : rows)
            table.push_back({{"kappa", r.kappa},
                             {"kappa_kappa_plus_1", r.kappa_kappa1},
                             {"predicted", to_string(r.predicted)},
                             {"estimated", to_string(r.estimated)},
                             {"closed_form_t1", r.closed_form},
                             {"agree", r.agree}});
        j["sweep"] = table;
        j["pass"] = ok;
        text = dump_json(j) + "\n";
    }
    emit(m, out, "classification", "kappa_sweep", text);
    for (auto const& r : rows)
        log << "kappa " << r.kappa << "  kappa(kappa+1) " << r.kappa_kappa1 << "  "
            << to_string(r.estimated) << (r.agree ? "" : "  (disagrees)") << "\n";
    return ok ? 0 : 1;
}

int run_command(RunManifest const& m, std::ostream& out, std::ostream& err)
{
    try
    {
        validate(m);
        if (m.command == "verify")
            return cmd_verify(m, out, err);
        if (m.command == "classify")
            return cmd_classify(m, out, err);
        if (m.command == "orbit")
            return cmd_orbit(m, out, err);
        if (m.command == "rigidity")
            return cmd_rigidity(m, out, err);
        return cmd_report(m, out, err);
    }
    catch (ConfigError const& e)
    {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    }
    catch (json::exception const& e)
    {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    }
    catch (std::filesystem::filesystem_error const& e)
    {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    }
    catch (std::exception const& e)
    {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    catch (...)
    {
        err << "error: unknown failure\n";
        return 1;
    }
}

}  // namespace engel
