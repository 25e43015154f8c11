#include "vorwave/serialization.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "vorwave/errors.hpp"

namespace vorwave {

namespace {

using nlohmann::json;

// ----- writing helpers ----------------------------------------------------------------------

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(c));
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

std::string quoted(const std::string& s) { return '"' + json_escape(s) + '"'; }

std::string number_array(const std::vector<double>& xs) {
    std::string out = "[";
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += format_double(xs[i]);
    }
    out += ']';
    return out;
}

std::string opt_number(const std::optional<double>& x) {
    return x ? format_double(*x) : std::string("null");
}

const char* bool_word(bool b) { return b ? "true" : "false"; }

std::string params_json(const PhysicalParams& p) {
    return "{\"gamma\": " + format_double(p.gamma) + ", \"g\": " + format_double(p.g) +
           ", \"k\": " + format_double(p.k) + ", \"h\": " + format_double(p.h) + "}";
}

void write_text_file(const std::filesystem::path& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("cannot open " + file.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error("failed while writing " + file.string());
}

std::string read_text_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ----- parsing helpers ----------------------------------------------------------------------

json parse_json(const std::string& text, const std::string& context) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(context + ": " + e.what());
    }
}

const json& member(const json& obj, const char* key, const std::string& context) {
    if (!obj.is_object()) throw ConfigError(context + ": expected a JSON object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(context + ": missing key \"" + key + "\"");
    return *it;
}

double get_double(const json& obj, const char* key, const std::string& context) {
    const json& v = member(obj, key, context);
    if (!v.is_number()) throw ConfigError(context + ": key \"" + key + "\" must be a number");
    return v.get<double>();
}

int get_int(const json& obj, const char* key, const std::string& context) {
    const json& v = member(obj, key, context);
    if (!v.is_number_integer())
        throw ConfigError(context + ": key \"" + key + "\" must be an integer");
    return v.get<int>();
}

bool get_bool(const json& obj, const char* key, const std::string& context) {
    const json& v = member(obj, key, context);
    if (!v.is_boolean()) throw ConfigError(context + ": key \"" + key + "\" must be a boolean");
    return v.get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& context) {
    const json& v = member(obj, key, context);
    if (!v.is_string()) throw ConfigError(context + ": key \"" + key + "\" must be a string");
    return v.get<std::string>();
}

std::optional<double> get_opt_double(const json& obj, const char* key,
                                     const std::string& context) {
    const json& v = member(obj, key, context);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number())
        throw ConfigError(context + ": key \"" + key + "\" must be a number or null");
    return v.get<double>();
}

std::vector<double> get_double_array(const json& obj, const char* key,
                                     const std::string& context) {
    const json& v = member(obj, key, context);
    if (!v.is_array()) throw ConfigError(context + ": key \"" + key + "\" must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& e : v) {
        if (!e.is_number())
            throw ConfigError(context + ": array \"" + key + "\" must hold numbers only");
        out.push_back(e.get<double>());
    }
    return out;
}

PhysicalParams params_from_json(const json& obj, const std::string& context) {
    PhysicalParams p;
    p.gamma = get_double(obj, "gamma", context);
    p.g = get_double(obj, "g", context);
    p.k = get_double(obj, "k", context);
    p.h = get_double(obj, "h", context);
    return p;
}

}  // namespace

std::string format_double(double x) {
    if (!std::isfinite(x)) throw Error("refusing to serialize a non-finite number");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ----- run configuration --------------------------------------------------------------------

void RunConfig::validate() const {
    try {
        params.validate();
        solver.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (mode_n < 1) throw ConfigError("mode_n must be at least 1");
    if (mode_n >= solver.n_modes)
        throw ConfigError("mode_n must be smaller than solver.n_modes");
    if (grid.ny < 2) throw ConfigError("grid.ny must be at least 2");
    if (grid.nx != 0 && (grid.nx < 4 || grid.nx % 2 != 0))
        throw ConfigError("grid.nx must be 0 (keep the traced resolution) or an even number >= 4");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

namespace {

// Rejects keys outside `allowed`, naming the offender with its scope.
void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& scope) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed) known = known || item.key() == k;
        if (!known) {
            const std::string qualified = scope.empty() ? item.key() : scope + "." + item.key();
            throw ConfigError("unknown config key \"" + qualified + "\"");
        }
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    const json j = parse_json(text, "run config");
    if (!j.is_object()) throw ConfigError("run config: top level must be a JSON object");
    reject_unknown_keys(j, {"params", "solver", "mode_n", "output_dir", "grid"}, "");

    RunConfig c;
    if (j.contains("params")) {
        const json& p = j.at("params");
        if (!p.is_object()) throw ConfigError("run config: \"params\" must be an object");
        reject_unknown_keys(p, {"gamma", "g", "k", "h"}, "params");
        if (p.contains("gamma")) c.params.gamma = get_double(p, "gamma", "params");
        if (p.contains("g")) c.params.g = get_double(p, "g", "params");
        if (p.contains("k")) c.params.k = get_double(p, "k", "params");
        if (p.contains("h")) c.params.h = get_double(p, "h", "params");
    }
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        if (!s.is_object()) throw ConfigError("run config: \"solver\" must be an object");
        reject_unknown_keys(s, {"newton_tol", "max_newton_iters", "ds", "n_modes"}, "solver");
        if (s.contains("newton_tol")) c.solver.newton_tol = get_double(s, "newton_tol", "solver");
        if (s.contains("max_newton_iters"))
            c.solver.max_newton_iters = get_int(s, "max_newton_iters", "solver");
        if (s.contains("ds")) c.solver.ds = get_double(s, "ds", "solver");
        if (s.contains("n_modes")) c.solver.n_modes = get_int(s, "n_modes", "solver");
    }
    if (j.contains("mode_n")) c.mode_n = get_int(j, "mode_n", "run config");
    if (j.contains("output_dir")) c.output_dir = get_string(j, "output_dir", "run config");
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        if (!g.is_object()) throw ConfigError("run config: \"grid\" must be an object");
        reject_unknown_keys(g, {"nx", "ny"}, "grid");
        if (g.contains("nx")) c.grid.nx = get_int(g, "nx", "grid");
        if (g.contains("ny")) c.grid.ny = get_int(g, "ny", "grid");
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& file) {
    return parse_run_config(read_text_file(file));
}

std::string run_config_json(const RunConfig& c) {
    return "{\n  \"params\": " + params_json(c.params) + ",\n  \"solver\": {\"newton_tol\": " +
           format_double(c.solver.newton_tol) +
           ", \"max_newton_iters\": " + std::to_string(c.solver.max_newton_iters) +
           ", \"ds\": " + format_double(c.solver.ds) +
           ", \"n_modes\": " + std::to_string(c.solver.n_modes) +
           "},\n  \"mode_n\": " + std::to_string(c.mode_n) + ",\n  \"output_dir\": " +
           quoted(c.output_dir.string()) + ",\n  \"grid\": {\"nx\": " + std::to_string(c.grid.nx) +
           ", \"ny\": " + std::to_string(c.grid.ny) + "}\n}\n";
}

// ----- dispersion summary -------------------------------------------------------------------

DispersionSummary summarize_dispersion(const PhysicalParams& p, int mode_n) {
    p.validate();
    if (mode_n < 1) throw ConfigError("mode_n must be at least 1");
    DispersionSummary s;
    s.params = p;
    s.mode_n = mode_n;
    const DispersionRoots lambdas = dispersion_lambdas(mode_n, p);
    const DispersionRoots fluxes = bifurcating_flux(mode_n, p);
    s.lambda_plus = lambdas.plus;
    s.lambda_minus = lambdas.minus;
    s.m_plus = fluxes.plus;
    s.m_minus = fluxes.minus;
    const StagnationCriterion crit = stagnation_criterion(p);
    s.criterion_lhs = crit.lhs;
    s.criterion_rhs = crit.rhs;
    s.criterion_holds = crit.holds;
    s.k_star = crit.k_star;
    s.gamma_star = crit.gamma_star;
    s.laminar_stagnation_y = laminar_flow(lambdas.minus, p).stagnation_y;
    return s;
}

void write_dispersion_file(const std::filesystem::path& file, const DispersionSummary& s) {
    const std::string text =
        "{\n  \"params\": " + params_json(s.params) +
        ",\n  \"mode_n\": " + std::to_string(s.mode_n) +
        ",\n  \"lambda_plus\": " + format_double(s.lambda_plus) +
        ",\n  \"lambda_minus\": " + format_double(s.lambda_minus) +
        ",\n  \"m_plus\": " + format_double(s.m_plus) +
        ",\n  \"m_minus\": " + format_double(s.m_minus) +
        ",\n  \"criterion\": {\"lhs\": " + format_double(s.criterion_lhs) +
        ", \"rhs\": " + format_double(s.criterion_rhs) +
        ", \"holds\": " + bool_word(s.criterion_holds) +
        ", \"k_star\": " + opt_number(s.k_star) +
        ", \"gamma_star\": " + opt_number(s.gamma_star) +
        "},\n  \"laminar_stagnation_y\": " + opt_number(s.laminar_stagnation_y) + "\n}\n";
    write_text_file(file, text);
}

DispersionSummary read_dispersion_file(const std::filesystem::path& file) {
    const std::string context = file.filename().string();
    const json j = parse_json(read_text_file(file), context);
    DispersionSummary s;
    s.params = params_from_json(member(j, "params", context), context);
    s.mode_n = get_int(j, "mode_n", context);
    s.lambda_plus = get_double(j, "lambda_plus", context);
    s.lambda_minus = get_double(j, "lambda_minus", context);
    s.m_plus = get_double(j, "m_plus", context);
    s.m_minus = get_double(j, "m_minus", context);
    const json& crit = member(j, "criterion", context);
    s.criterion_lhs = get_double(crit, "lhs", context);
    s.criterion_rhs = get_double(crit, "rhs", context);
    s.criterion_holds = get_bool(crit, "holds", context);
    s.k_star = get_opt_double(crit, "k_star", context);
    s.gamma_star = get_opt_double(crit, "gamma_star", context);
    s.laminar_stagnation_y = get_opt_double(j, "laminar_stagnation_y", context);
    return s;
}

// ----- bifurcation points -------------------------------------------------------------------

namespace {

BranchSide side_from_string(const std::string& word, const std::string& context) {
    if (word == "plus") return BranchSide::plus;
    if (word == "minus") return BranchSide::minus;
    throw ConfigError(context + ": side must be \"plus\" or \"minus\", got \"" + word + "\"");
}

}  // namespace

void write_bifurcation_file(const std::filesystem::path& file, const BifurcationSet& set) {
    std::string text = "{\n  \"params\": " + params_json(set.params) + ",\n  \"points\": [";
    for (size_t i = 0; i < set.points.size(); ++i) {
        const BifurcationPoint& pt = set.points[i];
        text += (i ? ",\n    " : "\n    ");
        text += "{\"mode\": " + std::to_string(pt.mode) +
                ", \"side\": " + quoted(to_string(pt.side)) +
                ", \"lambda_star\": " + format_double(pt.lambda_star) +
                ", \"flux\": " + format_double(pt.flux) +
                ", \"sigma_min\": " + format_double(pt.sigma_min) +
                ", \"sigma_second\": " + format_double(pt.sigma_second) +
                ", \"sigma_max\": " + format_double(pt.sigma_max) +
                ", \"null_overlap\": " + format_double(pt.null_overlap) +
                ", \"transversality\": " + format_double(pt.transversality) + "}";
    }
    text += "\n  ]\n}\n";
    write_text_file(file, text);
}

BifurcationSet read_bifurcation_file(const std::filesystem::path& file) {
    const std::string context = file.filename().string();
    const json j = parse_json(read_text_file(file), context);
    BifurcationSet set;
    set.params = params_from_json(member(j, "params", context), context);
    const json& pts = member(j, "points", context);
    if (!pts.is_array()) throw ConfigError(context + ": \"points\" must be an array");
    for (const json& e : pts) {
        BifurcationPoint pt;
        pt.mode = get_int(e, "mode", context);
        pt.side = side_from_string(get_string(e, "side", context), context);
        pt.lambda_star = get_double(e, "lambda_star", context);
        pt.flux = get_double(e, "flux", context);
        pt.sigma_min = get_double(e, "sigma_min", context);
        pt.sigma_second = get_double(e, "sigma_second", context);
        pt.sigma_max = get_double(e, "sigma_max", context);
        pt.null_overlap = get_double(e, "null_overlap", context);
        pt.transversality = get_double(e, "transversality", context);
        set.points.push_back(pt);
    }
    return set;
}

// ----- branch files -------------------------------------------------------------------------

std::string branch_record_json(const BranchPoint& point) {
    const PeriodicFunction& w = point.state.w;
    return "{\"s\":" + format_double(point.s) +
           ",\"lambda\":" + format_double(point.state.lambda) +
           ",\"mu\":" + format_double(point.state.mu) + ",\"m\":" + format_double(point.m) +
           ",\"Q\":" + format_double(point.q) +
           ",\"w\":{\"n_points\":" + std::to_string(w.n_points()) +
           ",\"cos\":" + number_array(w.cos_coeffs()) +
           "},\"residual_norm\":" + format_double(point.residual_norm) +
           ",\"validity\":{\"os\":" + bool_word(point.validity.surface_above_bed) +
           ",\"gra\":" + bool_word(point.validity.graph) +
           ",\"injective\":" + bool_word(point.validity.injective) + "}}";
}

void write_branch_file(const std::filesystem::path& file, const Branch& branch) {
    std::string text;
    for (const BranchPoint& pt : branch.points) {
        text += branch_record_json(pt);
        text += '\n';
    }
    write_text_file(file, text);
}

std::vector<BranchPoint> read_branch_file(const std::filesystem::path& file,
                                          const PhysicalParams& params) {
    const std::string text = read_text_file(file);
    std::vector<BranchPoint> points;
    std::istringstream lines(text);
    std::string line;
    int line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string context = file.filename().string() + ":" + std::to_string(line_no);
        const json j = parse_json(line, context);
        BranchPoint pt;
        pt.s = get_double(j, "s", context);
        pt.m = get_double(j, "m", context);
        pt.q = get_double(j, "Q", context);
        pt.residual_norm = get_double(j, "residual_norm", context);
        const json& wj = member(j, "w", context);
        const int n_points = get_int(wj, "n_points", context);
        if (n_points < 2 || n_points % 2 != 0)
            throw ConfigError(context + ": w.n_points must be even and at least 2");
        std::vector<double> cos_coeffs = get_double_array(wj, "cos", context);
        if (static_cast<int>(cos_coeffs.size()) > n_points / 2)
            throw ConfigError(context + ": more cosine coefficients than carried modes");
        pt.state.params = params;
        pt.state.lambda = get_double(j, "lambda", context);
        pt.state.mu = get_double(j, "mu", context);
        pt.state.w = PeriodicFunction(n_points / 2, 0.0, std::move(cos_coeffs), {});
        const json& vj = member(j, "validity", context);
        pt.validity.surface_above_bed = get_bool(vj, "os", context);
        pt.validity.graph = get_bool(vj, "gra", context);
        pt.validity.injective = get_bool(vj, "injective", context);
        points.push_back(std::move(pt));
    }
    return points;
}

// ----- reconstructed fields -----------------------------------------------------------------

void write_field_file(const std::filesystem::path& file, const StripField& field) {
    if (field.U.empty() || field.psi.empty())
        throw DomainError("write_field_file: field is not fully assembled");
    const std::string text =
        "{\n  \"grid\": {\"nx\": " + std::to_string(field.nx) +
        ", \"ny\": " + std::to_string(field.ny) +
        ", \"strip_depth\": " + format_double(field.state.params.strip_depth()) +
        ", \"a_offset\": " + format_double(field.a_offset) +
        "},\n  \"U\": " + number_array(field.U) + ",\n  \"V\": " + number_array(field.V) +
        ",\n  \"psi\": " + number_array(field.psi) +
        ",\n  \"velocity_x\": " + number_array(field.velocity_x) +
        ",\n  \"velocity_y\": " + number_array(field.velocity_y) + "\n}\n";
    write_text_file(file, text);
}

FieldRecord read_field_file(const std::filesystem::path& file) {
    const std::string context = file.filename().string();
    const json j = parse_json(read_text_file(file), context);
    FieldRecord rec;
    const json& grid = member(j, "grid", context);
    rec.nx = get_int(grid, "nx", context);
    rec.ny = get_int(grid, "ny", context);
    rec.strip_depth = get_double(grid, "strip_depth", context);
    rec.a_offset = get_double(grid, "a_offset", context);
    rec.U = get_double_array(j, "U", context);
    rec.V = get_double_array(j, "V", context);
    rec.psi = get_double_array(j, "psi", context);
    rec.velocity_x = get_double_array(j, "velocity_x", context);
    rec.velocity_y = get_double_array(j, "velocity_y", context);
    const size_t cells = static_cast<size_t>(rec.nx) * static_cast<size_t>(rec.ny);
    for (const std::vector<double>* a : {&rec.U, &rec.V, &rec.psi, &rec.velocity_x,
                                         &rec.velocity_y}) {
        if (a->size() != cells)
            throw ConfigError(context + ": array length does not match nx * ny");
    }
    return rec;
}

void write_stagnation_file(const std::filesystem::path& file, const StagnationReport& report) {
    std::string notes = "[";
    for (size_t i = 0; i < report.notes.size(); ++i) {
        if (i) notes += ", ";
        notes += quoted(report.notes[i]);
    }
    notes += ']';
    std::string text = "{\n  \"has_critical_layer\": " + std::string(bool_word(
                           report.has_critical_layer)) +
                       ",\n  \"laminar_line_y\": " + opt_number(report.laminar_line_y) +
                       ",\n  \"notes\": " + notes + ",\n  \"points\": [";
    for (size_t i = 0; i < report.points.size(); ++i) {
        const StagnationPoint& pt = report.points[i];
        text += (i ? ",\n    " : "\n    ");
        text += "{\"x\": " + format_double(pt.x) + ", \"y\": " + format_double(pt.y) +
                ", \"type\": " + quoted(to_string(pt.type)) +
                ", \"strip_x\": " + format_double(pt.strip_x) +
                ", \"strip_y\": " + format_double(pt.strip_y) + "}";
    }
    text += report.points.empty() ? "]\n}\n" : "\n  ]\n}\n";
    write_text_file(file, text);
}

StagnationReport read_stagnation_file(const std::filesystem::path& file) {
    const std::string context = file.filename().string();
    const json j = parse_json(read_text_file(file), context);
    StagnationReport report;
    report.has_critical_layer = get_bool(j, "has_critical_layer", context);
    report.laminar_line_y = get_opt_double(j, "laminar_line_y", context);
    const json& notes = member(j, "notes", context);
    if (!notes.is_array()) throw ConfigError(context + ": \"notes\" must be an array");
    for (const json& e : notes) {
        if (!e.is_string())
            throw ConfigError(context + ": \"notes\" must hold strings only");
        report.notes.push_back(e.get<std::string>());
    }
    const json& pts = member(j, "points", context);
    if (!pts.is_array()) throw ConfigError(context + ": \"points\" must be an array");
    for (const json& e : pts) {
        StagnationPoint pt;
        pt.x = get_double(e, "x", context);
        pt.y = get_double(e, "y", context);
        const std::string word = get_string(e, "type", context);
        if (word == "center") {
            pt.type = CriticalPointType::center;
        } else if (word == "saddle") {
            pt.type = CriticalPointType::saddle;
        } else {
            throw ConfigError(context + ": type must be \"center\" or \"saddle\"");
        }
        pt.strip_x = get_double(e, "strip_x", context);
        pt.strip_y = get_double(e, "strip_y", context);
        report.points.push_back(pt);
    }
    return report;
}

// ----- surface curve CSV --------------------------------------------------------------------

void write_surface_csv(const std::filesystem::path& file, const SurfaceCurve& curve) {
    if (curve.X.size() != curve.Y.size() ||
        curve.X.size() != static_cast<size_t>(curve.theta0.n_points()))
        throw DomainError("write_surface_csv: curve arrays disagree in length");
    std::string text = "X,Y,theta0\n";
    for (size_t i = 0; i < curve.X.size(); ++i) {
        text += format_double(curve.X[i]);
        text += ',';
        text += format_double(curve.Y[i]);
        text += ',';
        text += format_double(curve.theta0.value(static_cast<int>(i)));
        text += '\n';
    }
    write_text_file(file, text);
}

namespace {

// Splits one CSV line into exactly `n` doubles.
std::vector<double> csv_numbers(const std::string& line, size_t n, const std::string& context) {
    std::vector<double> out;
    size_t begin = 0;
    while (begin <= line.size()) {
        const size_t end = std::min(line.find(',', begin), line.size());
        const std::string cell = line.substr(begin, end - begin);
        char* tail = nullptr;
        const double value = std::strtod(cell.c_str(), &tail);
        if (cell.empty() || tail != cell.c_str() + cell.size())
            throw ConfigError(context + ": malformed numeric cell \"" + cell + "\"");
        out.push_back(value);
        if (end == line.size()) break;
        begin = end + 1;
    }
    if (out.size() != n)
        throw ConfigError(context + ": expected " + std::to_string(n) + " columns, got " +
                          std::to_string(out.size()));
    return out;
}

}  // namespace

SurfaceRecord read_surface_csv(const std::filesystem::path& file) {
    const std::string context = file.filename().string();
    std::istringstream lines(read_text_file(file));
    std::string line;
    if (!std::getline(lines, line) || line != "X,Y,theta0")
        throw ConfigError(context + ": expected header X,Y,theta0");
    SurfaceRecord rec;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        const std::vector<double> cells = csv_numbers(line, 3, context);
        rec.x.push_back(cells[0]);
        rec.y.push_back(cells[1]);
        rec.theta0.push_back(cells[2]);
    }
    return rec;
}

// ----- depth sweep CSV ----------------------------------------------------------------------

void write_sweep_csv(const std::filesystem::path& file, const SurfaceSweep& sweep) {
    std::string text;
    text += "# h_star = " + (sweep.h_star ? format_double(*sweep.h_star) : std::string("none")) +
            "\n";
    text += "# h_star_residual = " + format_double(sweep.h_star_residual) + "\n";
    text += "# h_criterion = " +
            (sweep.h_criterion ? format_double(*sweep.h_criterion) : std::string("none")) + "\n";
    text += "h,m_plus,m_minus,stp_holds,h_star_bracket,asym_plus,asym_minus\n";
    for (const SweepRow& row : sweep.rows) {
        text += format_double(row.h) + ',' + format_double(row.m_plus) + ',' +
                format_double(row.m_minus) + ',' + (row.stagnation_holds ? "1" : "0") + ',' +
                (row.h_star_bracket ? "1" : "0") + ',' + format_double(row.asym_plus) + ',' +
                format_double(row.asym_minus) + '\n';
    }
    write_text_file(file, text);
}

namespace {

std::optional<double> parse_meta_value(const std::string& line, const std::string& key,
                                       const std::string& context) {
    const std::string prefix = "# " + key + " = ";
    if (line.rfind(prefix, 0) != 0)
        throw ConfigError(context + ": expected metadata line \"" + prefix + "...\"");
    const std::string value = line.substr(prefix.size());
    if (value == "none") return std::nullopt;
    char* tail = nullptr;
    const double parsed = std::strtod(value.c_str(), &tail);
    if (value.empty() || tail != value.c_str() + value.size())
        throw ConfigError(context + ": malformed metadata value \"" + value + "\"");
    return parsed;
}

}  // namespace

SweepRecord read_sweep_csv(const std::filesystem::path& file) {
    const std::string context = file.filename().string();
    std::istringstream lines(read_text_file(file));
    SweepRecord rec;
    std::string line;
    if (!std::getline(lines, line)) throw ConfigError(context + ": empty file");
    rec.h_star = parse_meta_value(line, "h_star", context);
    if (!std::getline(lines, line)) throw ConfigError(context + ": truncated metadata");
    const std::optional<double> residual = parse_meta_value(line, "h_star_residual", context);
    rec.h_star_residual = residual.value_or(0.0);
    if (!std::getline(lines, line)) throw ConfigError(context + ": truncated metadata");
    rec.h_criterion = parse_meta_value(line, "h_criterion", context);
    if (!std::getline(lines, line) ||
        line != "h,m_plus,m_minus,stp_holds,h_star_bracket,asym_plus,asym_minus")
        throw ConfigError(context + ": expected the sweep column header");
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        const std::vector<double> cells = csv_numbers(line, 7, context);
        SweepRow row;
        row.h = cells[0];
        row.m_plus = cells[1];
        row.m_minus = cells[2];
        row.stagnation_holds = cells[3] != 0.0;
        row.h_star_bracket = cells[4] != 0.0;
        row.asym_plus = cells[5];
        row.asym_minus = cells[6];
        rec.rows.push_back(row);
    }
    return rec;
}

}  // namespace vorwave
