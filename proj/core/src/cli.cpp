#include "fieldsym/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fieldsym/conformal.hpp"
#include "fieldsym/gauge_higgs.hpp"
#include "fieldsym/goldstone.hpp"
#include "fieldsym/lattice.hpp"
#include "fieldsym/parser.hpp"
#include "fieldsym/printer.hpp"
#include "fieldsym/report.hpp"

namespace fieldsym::cli {

namespace {

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

Rational parse_rational(const std::string& text) {
    std::string s = text;
    bool negative = false;
    size_t pos = 0;
    if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) {
        negative = s[pos] == '-';
        ++pos;
    }
    auto digits = [&](size_t& p) {
        std::int64_t value = 0;
        size_t start = p;
        while (p < s.size() && std::isdigit(static_cast<unsigned char>(s[p]))) {
            value = value * 10 + (s[p] - '0');
            ++p;
        }
        if (p == start) throw UsageError("malformed number '" + text + "'");
        return value;
    };
    std::int64_t num = digits(pos);
    std::int64_t den = 1;
    if (pos < s.size() && s[pos] == '/') {
        ++pos;
        den = digits(pos);
    } else if (pos < s.size() && s[pos] == '.') {
        ++pos;
        size_t start = pos;
        std::int64_t frac = digits(pos);
        for (size_t k = 0; k < pos - start; ++k) {
            num *= 10;
            den *= 10;
        }
        num += frac;
    }
    if (pos != s.size()) throw UsageError("malformed number '" + text + "'");
    return Rational(negative ? -num : num, den);
}

// "a=1,b=2/3" -> ordered (key, value) pairs.
std::vector<std::pair<std::string, std::string>> split_assignments(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.empty()) continue;
        size_t eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("expected '=' in '" + item + "'");
        auto trim = [](std::string v) {
            while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front())))
                v.erase(v.begin());
            while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.pop_back();
            return v;
        };
        out.emplace_back(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
    }
    return out;
}

VacuumConfig parse_vacuum(const ModelDef& m, const std::string& vacuum_text,
                          const std::string& param_text) {
    VacuumConfig vac;
    for (const auto& [key, value] : split_assignments(param_text)) {
        if (!m.has_param(key)) throw UsageError("unknown parameter '" + key + "'");
        vac.params[key] = parse_rational(value);
    }
    for (const auto& [key, value] : split_assignments(vacuum_text)) {
        std::string field = key;
        std::vector<int> comps;
        size_t bracket = key.find('[');
        if (bracket != std::string::npos) {
            if (key.back() != ']') throw UsageError("malformed component '" + key + "'");
            field = key.substr(0, bracket);
            comps.push_back(std::stoi(key.substr(bracket + 1, key.size() - bracket - 2)));
        }
        const FieldDecl* decl = m.find_field(field);
        if (decl == nullptr) throw UsageError("unknown field '" + field + "'");
        if ((decl->kind == FieldKind::Scalar) != comps.empty())
            throw UsageError("component mismatch for field '" + field + "'");
        vac.set(field, comps, parse_rational(value));
    }
    return vac;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Dimension override works on the model text so family transformations are
// re-expanded for the new dimension.
std::string override_dimension(const std::string& text, int dimension) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    bool replaced = false;
    while (std::getline(in, line)) {
        std::istringstream probe(line);
        std::string head;
        probe >> head;
        if (head == "dimension") {
            out << "dimension " << dimension << "\n";
            replaced = true;
        } else {
            out << line << "\n";
            if (head == "model" && !replaced) {
                out << "dimension " << dimension << "\n";
                replaced = true;
            }
        }
    }
    return out.str();
}

struct CommonOptions {
    std::string model_path;
    std::string params;
    std::string vacuum;
    std::string format = "text";
    double tol = 0.0;  // 0 = per-check defaults
    int dimension = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool needs_vacuum) {
    cmd->add_option("--model", opts.model_path, "model file (.ftl)")->required();
    cmd->add_option("--param", opts.params, "parameter values, e.g. \"lambda=0.5,v=1\"");
    if (needs_vacuum)
        cmd->add_option("--vacuum", opts.vacuum, "constant field values, e.g. \"phi[1]=1\"");
    cmd->add_option("--format", opts.format, "output format: text or json")
        ->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--tol", opts.tol, "verdict tolerance override");
    cmd->add_option("--dimension", opts.dimension, "override the model dimension");
}

ModelDef load_model(const CommonOptions& opts, std::string* source_out) {
    std::string text = read_file(opts.model_path);
    if (opts.dimension > 0) text = override_dimension(text, opts.dimension);
    if (source_out) *source_out = text;
    return parse_model(text);
}

std::set<std::string> reserved_names(const ModelDef& m) {
    std::set<std::string> names;
    for (const auto& p : m.params) names.insert(p);
    for (const auto& f : m.fields) names.insert(f.name);
    return names;
}

ReportNode expr_node(const ExprPtr& e, const std::set<std::string>& reserved) {
    return ReportNode::string(print_expr(e, reserved));
}

ReportNode doubles_node(const std::vector<double>& values) {
    ReportNode arr = ReportNode::array();
    for (double v : values) arr.push(ReportNode::number(v));
    return arr;
}

ReportNode strings_node(const std::vector<std::string>& values) {
    ReportNode arr = ReportNode::array();
    for (const auto& v : values) arr.push(ReportNode::string(v));
    return arr;
}

ReportNode matrix_node(const std::vector<double>& values, int n) {
    ReportNode rows = ReportNode::array();
    for (int i = 0; i < n; ++i) {
        ReportNode row = ReportNode::array();
        for (int j = 0; j < n; ++j) row.push(ReportNode::number(values[i * n + j]));
        rows.push(row);
    }
    return rows;
}

ReportNode constraint_node(const LabeledConstraint& c, const std::set<std::string>& reserved) {
    ReportNode n = ReportNode::object();
    n.set("expr", expr_node(c.expr, reserved));
    n.set("satisfied", ReportNode::boolean(c.satisfied));
    if (!c.note.empty()) n.set("note", ReportNode::string(c.note));
    return n;
}

const char* status_name(SymmetryStatus s) {
    switch (s) {
        case SymmetryStatus::Invariant: return "invariant";
        case SymmetryStatus::InvariantUpToBoundary: return "invariant-up-to-boundary";
        case SymmetryStatus::Broken: return "broken";
    }
    return "broken";
}

// ----- subcommand: verify ---------------------------------------------------

bool run_verify(const ModelDef& m, const std::vector<std::string>& transforms, Report& report) {
    auto reserved = reserved_names(m);
    ReportNode& body = report.add_section("symmetries");
    ReportNode list = ReportNode::array();
    bool all_ok = true;
    for (const auto& name : transforms) {
        const Transformation* t = m.find_transform(name);
        if (t == nullptr) throw UsageError("unknown transformation '" + name + "'");
        SymmetryVerdict v = verify_symmetry(m, *t);
        ReportNode entry = ReportNode::object();
        entry.set("name", ReportNode::string(name));
        entry.set("status", ReportNode::string(status_name(v.status)));
        entry.set("residual", expr_node(v.residual, reserved));
        if (v.current) entry.set("boundary_current", expr_node(v.current->expr, reserved));
        if (v.coefficients) {
            ReportNode jet = ReportNode::object();
            jet.set("theta", expr_node(v.coefficients->c0, reserved));
            jet.set("d_theta", expr_node(v.coefficients->c1, reserved));
            jet.set("dd_theta", expr_node(v.coefficients->c2, reserved));
            entry.set("coefficients", jet);
        }
        all_ok &= v.status != SymmetryStatus::Broken;
        list.push(entry);
    }
    body.set("checked", list);
    return all_ok;
}

// ----- subcommand: goldstone -------------------------------------------------

bool run_goldstone(const ModelDef& m, const VacuumConfig& vac,
                   const std::vector<std::string>& transforms, double tol, Report& report) {
    double extremum_tol = tol > 0 ? tol : 1e-9;
    double residual_tol = tol > 0 ? tol : 1e-10;

    ExtremumReport ext = check_extremum(m, vac, extremum_tol);
    ReportNode& ext_body = report.add_section("extremum");
    ext_body.set("labels", strings_node(ext.labels));
    ext_body.set("gradient", doubles_node(ext.gradient));
    ext_body.set("max_abs", ReportNode::number(ext.max_abs));
    ext_body.set("tolerance", ReportNode::number(ext.tolerance));
    ext_body.set("extremum", ReportNode::boolean(ext.extremum));

    std::vector<const Transformation*> ts;
    for (const auto& name : transforms) {
        const Transformation* t = m.find_transform(name);
        if (t == nullptr) throw UsageError("unknown transformation '" + name + "'");
        ts.push_back(t);
    }
    GoldstoneOptions opts;
    opts.mass_residual_tol = residual_tol;
    MassReport mass = goldstone_count(m, vac, ts, opts);

    ReportNode& mass_body = report.add_section("mass_matrix");
    mass_body.set("labels", strings_node(mass.labels));
    mass_body.set("matrix", matrix_node(mass.matrix, static_cast<int>(mass.labels.size())));
    mass_body.set("eigenvalues", doubles_node(mass.eigenvalues));
    mass_body.set("zero_count", ReportNode::integer(mass.zero_count));
    mass_body.set("zero_tolerance", ReportNode::number(mass.zero_tolerance));
    mass_body.set("sign_convention",
                  ReportNode::string("entries are second derivatives of the potential; "
                                     "eigenvalues are squared masses"));

    ReportNode& acc = report.add_section("goldstone_accounting");
    acc.set("broken_generators", ReportNode::integer(mass.broken_generators));
    acc.set("goldstone_modes", ReportNode::integer(mass.goldstone_modes));
    ReportNode dirs = ReportNode::array();
    for (const auto& d : mass.goldstone_directions) dirs.push(doubles_node(d));
    acc.set("directions", dirs);
    ReportNode checks = ReportNode::array();
    bool residuals_ok = true;
    for (const auto& c : mass.checks) {
        ReportNode entry = ReportNode::object();
        entry.set("transform", ReportNode::string(c.transform));
        entry.set("direction", doubles_node(c.direction));
        entry.set("nonzero", ReportNode::boolean(c.nonzero));
        entry.set("mass_residual", ReportNode::number(c.mass_residual));
        residuals_ok &= c.mass_residual < residual_tol;
        checks.push(entry);
    }
    acc.set("checks", checks);
    ReportNode groups = ReportNode::array();
    for (const auto& g : mass.degenerate_groups) groups.push(strings_node(g));
    acc.set("degenerate_groups", groups);

    return ext.extremum && residuals_ok;
}

// ----- subcommand: higgs ------------------------------------------------------

bool run_higgs(const ModelDef& m, const VacuumConfig& vac, Report& report) {
    auto reserved = reserved_names(m);
    GaugeConstraints cs = derive_constraints(m);

    ReportNode& shape = report.add_section("gauge_shape");
    shape.set("gauge_field", ReportNode::string(cs.shape.gauge_field));
    shape.set("scalar_field", ReportNode::string(cs.shape.scalar_field));
    shape.set("transform", ReportNode::string(cs.shape.transform));
    shape.set("charge", expr_node(cs.shape.charge, reserved));
    shape.set("kinetic_strength", ReportNode::string(cs.shape.kinetic_strength.str()));
    if (!cs.notes.empty()) shape.set("notes", strings_node(cs.notes));

    bool constraints_ok = true;
    ReportNode& constraints = report.add_section("constraints");
    for (const auto& c : cs.off_shell) {
        constraints.set(c.label, constraint_node(c, reserved));
        constraints_ok &= c.satisfied;
    }
    for (const auto& c : cs.constant) {
        constraints.set(c.label, constraint_node(c, reserved));
        constraints_ok &= c.satisfied;
    }

    GaugeMassReport gm = gauge_mass(m, vac);
    ReportNode& mass = report.add_section("gauge_mass");
    mass.set("mass_tensor", expr_node(gm.mass_tensor, reserved));
    mass.set("mass_tensor_via_fin3", expr_node(gm.mass_tensor_via_fin3, reserved));
    mass.set("routes_agree", ReportNode::boolean(gm.routes_agree));
    mass.set("proportional_to_metric", ReportNode::boolean(gm.proportional_to_metric));
    mass.set("mass_squared_expr", expr_node(gm.mass_squared_expr, reserved));
    mass.set("mass_squared", ReportNode::number(gm.mass_squared));
    mass.set("mass", ReportNode::number(gm.mass));
    mass.set("proca_sign_ok", ReportNode::boolean(gm.proca_sign_ok));
    if (!gm.notes.empty()) mass.set("notes", strings_node(gm.notes));

    bool identities_ok = true;
    ReportNode& ids = report.add_section("identities");
    for (const auto& c : residual_identities(m)) {
        ids.set(c.label, constraint_node(c, reserved));
        identities_ok &= c.satisfied;
    }

    PolarReport polar = eliminate_would_be_goldstone(m);
    auto polar_reserved = reserved;
    polar_reserved.insert({"rho", "xi", "B"});
    ReportNode& wb = report.add_section("would_be_goldstone");
    wb.set("has_gauge_field", ReportNode::boolean(polar.has_gauge_field));
    wb.set("shift_orientation", ReportNode::integer(polar.shift_orientation));
    wb.set("rewritten_density", expr_node(polar.rewritten, polar_reserved));
    wb.set("dL_dxi", expr_node(polar.dL_dxi, polar_reserved));
    wb.set("dL_d_dxi", expr_node(polar.dL_ddxi, polar_reserved));
    wb.set("angular_field_absent", ReportNode::boolean(polar.angular_field_absent));
    wb.set("angular_gradient_absent", ReportNode::boolean(polar.angular_gradient_absent));
    if (polar.polar_jet) {
        ReportNode jet = ReportNode::object();
        jet.set("theta", expr_node(polar.polar_jet->c0, polar_reserved));
        jet.set("d_theta", expr_node(polar.polar_jet->c1, polar_reserved));
        jet.set("dd_theta", expr_node(polar.polar_jet->c2, polar_reserved));
        wb.set("gauge_condition_coefficients", jet);
    }
    if (polar.has_gauge_field)
        wb.set("radial_gauge_mass_tensor", expr_node(polar.radial_gauge_mass_tensor,
                                                     polar_reserved));
    if (!polar.notes.empty()) wb.set("notes", strings_node(polar.notes));

    bool elimination_ok = polar.angular_field_absent &&
                          (!polar.has_gauge_field || polar.angular_gradient_absent);
    return constraints_ok && gm.routes_agree && gm.proportional_to_metric && gm.proca_sign_ok &&
           identities_ok && elimination_ok;
}

// ----- subcommand: conformal --------------------------------------------------

bool run_conformal(const ModelDef& m, const VacuumConfig& vac, const std::string& dilaton,
                   const std::string& scale, Report& report) {
    auto reserved = reserved_names(m);
    std::string dilaton_name = dilaton;
    if (dilaton_name.empty()) {
        for (const auto& f : m.fields)
            if (f.dilaton) dilaton_name = f.name;
        if (dilaton_name.empty())
            throw UsageError("no dilaton-flagged field; pass --dilaton");
    }
    std::string scale_name = scale;
    if (scale_name.empty()) {
        if (m.has_param("f")) scale_name = "f";
        else throw UsageError("no scale parameter named 'f'; pass --scale");
    }

    ConformalScenario scenario = build_scenario(m, dilaton_name, scale_name);
    ConformalAnalysis analysis = analyze_scenario(scenario, vac);
    Multiplicity mult = goldstone_multiplicity(scenario, vac);

    ReportNode& sc = report.add_section("scenario");
    sc.set("ordinary", ReportNode::string(scenario.ordinary));
    sc.set("dilaton", ReportNode::string(scenario.dilaton));
    sc.set("scale", ReportNode::string(scenario.scale_param));
    sc.set("bundle", strings_node(scenario.bundle));

    ReportNode& dil = report.add_section("dilation_constraint");
    if (analysis.dilation.parts.count(-1)) {
        ReportNode rows = ReportNode::object();
        for (const auto& r : analysis.dilation.parts.at(-1))
            rows.set(r.field, expr_node(r.expr, reserved));
        dil.set("rows", rows);
    }
    const char* solve_names[] = {"all-values", "unique-zero", "no-solution", "unsolved"};
    dil.set("solve", ReportNode::string(solve_names[static_cast<int>(analysis.solve.kind)]));
    dil.set("unknown", ReportNode::string(analysis.solve.unknown));
    if (!is_zero(analysis.solve.residual))
        dil.set("unsolved_residual", expr_node(analysis.solve.residual, reserved));

    ReportNode& deg = report.add_section("degeneracy");
    deg.set("x_parts_match_dilation", ReportNode::boolean(analysis.degeneracy_holds));
    ReportNode anti = ReportNode::object();
    bool anti_ok = true;
    for (const auto& c : analysis.antisymmetric_parts) {
        anti.set(c.label, constraint_node(c, reserved));
        anti_ok &= c.satisfied;
    }
    deg.set("antisymmetric_parts", anti);

    bool extra_ok = true;
    ReportNode& extra = report.add_section("extra_constraints");
    for (const auto& c : analysis.extra) {
        extra.set(c.label, constraint_node(c, reserved));
        extra_ok &= c.satisfied;
    }
    extra.set("count", ReportNode::integer(static_cast<std::int64_t>(analysis.extra.size())));

    ReportNode& acc = report.add_section("goldstone_accounting");
    acc.set("broken", ReportNode::integer(mult.broken));
    acc.set("goldstone_modes", ReportNode::integer(mult.goldstone));
    acc.set("extra_constraint_count", ReportNode::integer(mult.extra_constraints));
    ReportNode dirs = ReportNode::array();
    for (const auto& d : analysis.accounting.goldstone_directions) dirs.push(doubles_node(d));
    acc.set("directions", dirs);
    if (!analysis.notes.empty()) acc.set("notes", strings_node(analysis.notes));

    return analysis.degeneracy_holds && anti_ok && extra_ok &&
           analysis.solve.kind != SolveKind::Unsolved;
}

// ----- subcommand: oracle -------------------------------------------------------

bool run_oracle(const ModelDef& m, const VacuumConfig& vac,
                const std::vector<std::string>& transforms, int sites, double tol,
                bool allow_nonsolution, Report& report) {
    double residual_tol = tol > 0 ? tol : 1e-6;
    LatticeSpec spec;
    spec.sites = sites;

    std::map<std::string, double> params;
    for (const auto& [name, value] : vac.params) params[name] = value.to_double();
    params["eps0"] = 1.0;
    LatticeAction lattice(m, spec, params);
    std::vector<double> config = lattice.constant_config(vac);

    ReportNode& lat = report.add_section("lattice");
    lat.set("sites", ReportNode::integer(spec.sites));
    lat.set("spacing", ReportNode::number(spec.spacing));
    lat.set("action", ReportNode::number(lattice.action(config)));
    lat.set("gradient_max", ReportNode::number(lattice.gradient_max(config)));

    ReportNode& body = report.add_section("identity_checks");
    ReportNode list = ReportNode::array();
    bool all_ok = true;
    for (const auto& name : transforms) {
        const Transformation* t = m.find_transform(name);
        if (t == nullptr) throw UsageError("unknown transformation '" + name + "'");
        GoldstoneCheckOptions opts;
        opts.allow_nonsolution = allow_nonsolution;
        GoldstoneCheck check = check_generalized_goldstone(m, *t, vac, spec, opts);
        ReportNode entry = ReportNode::object();
        entry.set("transform", ReportNode::string(name));
        entry.set("gradient_max", ReportNode::number(check.gradient_max));
        entry.set("hessian_norm", ReportNode::number(check.hessian_norm));
        entry.set("residual_norm", ReportNode::number(check.residual_norm));
        entry.set("residual", ReportNode::number(check.residual));
        bool ok = check.residual < residual_tol;
        entry.set("pass", ReportNode::boolean(ok));
        all_ok &= ok;
        list.push(entry);
    }
    body.set("checked", list);
    body.set("tolerance", ReportNode::number(residual_tol));
    return all_ok;
}

std::vector<std::string> default_transforms(const ModelDef& m) {
    std::vector<std::string> names;
    for (const auto& t : m.transforms) names.push_back(t.name);
    return names;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"symbolic symmetry analysis for classical field-theory models"};
    app.require_subcommand(1);

    CommonOptions verify_opts, goldstone_opts, higgs_opts, conformal_opts, oracle_opts;
    std::vector<std::string> verify_transforms, goldstone_transforms, oracle_transforms;
    std::string dilaton, scale;
    int sites = 16;
    bool allow_nonsolution = false;

    CLI::App* verify = app.add_subcommand("verify", "check declared symmetries");
    add_common(verify, verify_opts, /*needs_vacuum=*/false);
    verify->add_option("--transform", verify_transforms, "transformations to check");

    CLI::App* goldstone = app.add_subcommand("goldstone", "mass matrix and massless modes");
    add_common(goldstone, goldstone_opts, true);
    goldstone->add_option("--transform", goldstone_transforms, "transformations to count");

    CLI::App* higgs = app.add_subcommand("higgs", "gauge constraint and mass pipeline");
    add_common(higgs, higgs_opts, true);

    CLI::App* conformal = app.add_subcommand("conformal", "scale/conformal breaking pipeline");
    add_common(conformal, conformal_opts, true);
    conformal->add_option("--dilaton", dilaton, "dilaton field name");
    conformal->add_option("--scale", scale, "scale parameter name");

    CLI::App* oracle = app.add_subcommand("oracle", "lattice finite-difference checks");
    add_common(oracle, oracle_opts, true);
    oracle->add_option("--transform", oracle_transforms, "transformations to check");
    oracle->add_option("--lattice", sites, "number of lattice sites");
    oracle->add_flag("--allow-nonsolution", allow_nonsolution,
                     "evaluate the identity away from solutions");

    std::vector<char*> argv;
    std::vector<std::string> storage = args;
    std::string app_name = "fieldsym";
    argv.push_back(app_name.data());
    for (auto& a : storage) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        const CommonOptions* opts = nullptr;
        if (verify->parsed()) opts = &verify_opts;
        if (goldstone->parsed()) opts = &goldstone_opts;
        if (higgs->parsed()) opts = &higgs_opts;
        if (conformal->parsed()) opts = &conformal_opts;
        if (oracle->parsed()) opts = &oracle_opts;
        if (opts == nullptr) {
            err << "usage error: no subcommand\n";
            return 2;
        }

        ModelDef model = load_model(*opts, nullptr);
        VacuumConfig vac = parse_vacuum(model, opts->vacuum, opts->params);

        Report report;
        report.tool_version = kToolVersion;
        report.model = model.name;

        bool passed = false;
        if (verify->parsed()) {
            report.command = "verify";
            auto names = verify_transforms.empty() ? default_transforms(model) : verify_transforms;
            passed = run_verify(model, names, report);
        } else if (goldstone->parsed()) {
            report.command = "goldstone";
            auto names =
                goldstone_transforms.empty() ? default_transforms(model) : goldstone_transforms;
            passed = run_goldstone(model, vac, names, opts->tol, report);
        } else if (higgs->parsed()) {
            report.command = "higgs";
            passed = run_higgs(model, vac, report);
        } else if (conformal->parsed()) {
            report.command = "conformal";
            passed = run_conformal(model, vac, dilaton, scale, report);
        } else if (oracle->parsed()) {
            report.command = "oracle";
            auto names = oracle_transforms.empty() ? default_transforms(model) : oracle_transforms;
            passed = run_oracle(model, vac, names, sites, opts->tol, allow_nonsolution, report);
        }
        report.passed = passed;

        out << emit_report(report,
                           opts->format == "json" ? ReportFormat::Json : ReportFormat::Text);
        return passed ? 0 : 1;
    } catch (const ParseFailure& f) {
        std::string source;
        try {
            const CommonOptions* opts = verify->parsed()    ? &verify_opts
                                        : goldstone->parsed() ? &goldstone_opts
                                        : higgs->parsed()     ? &higgs_opts
                                        : conformal->parsed() ? &conformal_opts
                                                              : &oracle_opts;
            source = read_file(opts->model_path);
            if (opts->dimension > 0) source = override_dimension(source, opts->dimension);
        } catch (...) {
        }
        err << f.error().render(source) << "\n";
        return 2;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error [" << e.code() << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace fieldsym::cli
