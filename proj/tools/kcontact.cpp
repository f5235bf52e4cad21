#include "kcontact/errors.hpp"
#include "kcontact/model.hpp"
#include "kcontact/solver.hpp"
#include "kcontact/symmetry.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using json = nlohmann::ordered_json;
using namespace kcontact;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kError = 2;

struct Global {
    std::string format = "text";
    std::uint64_t seed = 0xC0FFEE;
    int threads = 1;
    std::string out = ".";

    bool as_json() const { return format == "json"; }
    ZeroTestOptions zero() const
    {
        ZeroTestOptions o;
        o.seed = seed;
        return o;
    }
};

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string str(const Expression& e) { return to_string(e); }

std::vector<int> parse_int_list(const std::string& text)
{
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error("expected a comma-separated integer list, got '" + text + "'");
        }
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error("expected a comma-separated number list, got '" + text + "'");
        }
    }
    return out;
}

json form_json(const BundleChart& c, const OneForm& w)
{
    json out = json::object();
    for (int idx = 0; idx < c.dim(); ++idx) {
        if (!w[idx].is_zero()) out["d" + to_string(c.coordinate(idx))] = str(w[idx]);
    }
    return out;
}

std::string form_text(const json& form)
{
    std::string out;
    for (const auto& [basis, coef] : form.items()) {
        if (!out.empty()) out += " + ";
        out += "(" + coef.get<std::string>() + ") " + basis;
    }
    return out.empty() ? "0" : out;
}

json norms_json(const GridNorms& n)
{
    return {{"linf", n.linf}, {"l2", n.l2}, {"nodes", n.nodes}};
}

json law_json(const DissipationLaw& f)
{
    json out = json::array();
    for (const auto& e : f.components()) out.push_back(str(e));
    return out;
}

std::string law_text(const DissipationLaw& f)
{
    std::string out = "(";
    for (std::size_t a = 0; a < f.components().size(); ++a) out += (a ? ", " : "") + str(f.components()[a]);
    return out + ")";
}

json verdict_json(const SymmetryVerdict& v)
{
    json conds = json::array();
    for (const auto& c : v.conditions) {
        conds.push_back({{"name", c.name}, {"verdict", to_string(c.verdict)}, {"residual", str(c.residual)}});
    }
    json out{{"class", to_string(v.kind)}, {"holds", v.holds()}, {"verdict", to_string(v.combined())}, {"conditions", conds}};
    out["law"] = v.law ? law_json(*v.law) : json(nullptr);
    return out;
}

void print_verdict(std::ostream& os, const SymmetryVerdict& v)
{
    os << "class: " << to_string(v.kind) << "\n";
    for (const auto& c : v.conditions) os << "  [" << to_string(c.verdict) << "] " << c.name << " = " << str(c.residual) << "\n";
    if (v.law) os << "law: F = " << law_text(*v.law) << "\n";
    os << "result: " << (v.holds() ? "pass" : "fail") << "\n";
}

// ---------------------------------------------------------------- presets

struct PresetRun {
    FieldSolution solution;
    std::vector<std::function<double(double, double)>> exact;
    std::optional<LaplaceStatus> laplace;
};

double param(const BundleChart& c, const std::string& name, const std::string& preset)
{
    const Parameter* p = c.find_parameter(name);
    if (!p || !p->value) throw Error("preset " + preset + " needs a bound parameter '" + name + "'");
    return *p->value;
}

PresetRun run_preset(const std::string& preset, const ModelFile& m, const GridSpec& grid)
{
    const auto& c = *m.chart;
    PresetRun run;
    const double ell = grid.axes.at(1).hi - grid.axes.at(1).lo;
    if (preset == "damped-string") {
        const StringParams p{param(c, "rho", preset), param(c, "tau", preset), param(c, "gamma", preset)};
        const auto w = manufactured_string_solution(p, ell);
        run.solution = solve_damped_string(p, grid, w.boundary_conditions());
        run.exact = {[w](double t, double x) { return w.phi(t, x); }};
    } else if (preset == "telegrapher") {
        const TelegrapherParams p{param(c, "L", preset), param(c, "C", preset), param(c, "R", preset), param(c, "G", preset)};
        const ManufacturedWave w(p.speed_squared(), p.gamma(), p.mass_squared(), ell);
        run.solution = solve_telegrapher(p, grid, w.boundary_conditions());
        run.exact = {[w](double t, double x) { return w.phi(t, x); }};
    } else if (preset == "coupled-strings") {
        if (c.n() != 2) throw Error("preset coupled-strings needs two fields");
        const KernelPtr kernel = c.kernels().empty() ? nullptr : c.kernels().front();
        if (kernel && !kernel->derivative_over_z_at_zero) {
            throw Error("preset coupled-strings needs a kernel with C'(0) = 0 so the limit at the origin is declared");
        }
        const double m2 = kernel ? *kernel->derivative_over_z_at_zero : 0.0;
        const double gamma = param(c, "gamma", preset);
        const ManufacturedWave a(1.0, gamma, m2, ell), b(1.0, gamma, m2, ell, 0.5);
        run.solution = solve_coupled_strings(CoupledParams{gamma, kernel}, grid, {a.boundary_conditions(), b.boundary_conditions()});
        run.exact = {[a](double t, double x) { return a.phi(t, x); }, [b](double t, double x) { return b.phi(t, x); }};
    } else if (preset == "damped-laplace") {
        const double g1 = param(c, "g1", preset), g2 = param(c, "g2", preset);
        auto exact = [g1](double x, double) { return std::exp(-g1 * x); };
        LaplaceStatus status;
        run.solution = solve_damped_laplace(LaplaceParams{{g1, g2}}, grid, DirichletData{exact}, &status);
        run.laplace = status;
        run.exact = {exact};
    } else {
        throw Error("unknown preset '" + preset + "' (damped-string, telegrapher, coupled-strings, damped-laplace)");
    }
    return run;
}

GridSpec preset_grid(const std::string& preset, int nx, int nt, double t1, double length)
{
    GridSpec g;
    if (preset == "damped-laplace") {
        g.axes = {Axis{0.0, length, nx}, Axis{0.0, length, nt}};
    } else {
        g.axes = {Axis{0.0, t1, nt}, Axis{0.0, length, nx}};
    }
    g.validate();
    return g;
}

std::vector<std::string> column_names(const BundleChart& c, const FieldSolution& sol)
{
    std::vector<std::string> cols;
    for (int a = 1; a <= c.k(); ++a) {
        cols.push_back(static_cast<int>(c.independent_names().size()) >= a ? c.independent_names()[static_cast<std::size_t>(a - 1)]
                                                                            : "t" + std::to_string(a));
    }
    for (int i = 1; i <= c.n(); ++i) cols.push_back(to_string(c.q(i)));
    for (int i = 1; i <= c.n(); ++i) {
        for (int a = 1; a <= c.k(); ++a) cols.push_back(to_string(c.v(i, a)));
    }
    if (!sol.s.empty()) {
        for (int a = 1; a <= c.k(); ++a) cols.push_back(to_string(c.s(a)));
    }
    return cols;
}

std::vector<double> row_values(const FieldSolution& sol, std::size_t node)
{
    std::vector<double> row;
    const auto idx = sol.grid.multi_index(node);
    for (std::size_t a = 0; a < idx.size(); ++a) row.push_back(sol.grid.axes[a].at(static_cast<int>(idx[a])));
    for (const auto& f : sol.phi) row.push_back(f[node]);
    for (const auto& f : sol.jets) row.push_back(f[node]);
    for (const auto& f : sol.s) row.push_back(f[node]);
    return row;
}

void write_csv(const std::filesystem::path& path, const BundleChart& c, const FieldSolution& sol)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    const auto cols = column_names(c, sol);
    for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << cols[j];
    out << "\n";
    for (std::size_t node = 0; node < sol.grid.size(); ++node) {
        const auto row = row_values(sol, node);
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << num(row[j]);
        out << "\n";
    }
}

json solution_json(const BundleChart& c, const FieldSolution& sol)
{
    json axes = json::array();
    for (const auto& ax : sol.grid.axes) axes.push_back({{"lo", ax.lo}, {"hi", ax.hi}, {"nodes", ax.nodes}});
    json fields = json::object();
    const auto cols = column_names(c, sol);
    std::vector<const std::vector<double>*> arrays;
    for (const auto& f : sol.phi) arrays.push_back(&f);
    for (const auto& f : sol.jets) arrays.push_back(&f);
    for (const auto& f : sol.s) arrays.push_back(&f);
    for (std::size_t j = 0; j < arrays.size(); ++j) fields[cols[static_cast<std::size_t>(c.k()) + j]] = *arrays[j];
    return {{"axes", axes}, {"provenance", to_string(sol.provenance)}, {"fields", fields}};
}

// ---------------------------------------------------------------- commands

int cmd_derive(const Global& g, const std::string& path)
{
    const auto m = load_model(path);
    const auto& l = *m.lagrangian;
    const auto& c = *m.chart;
    const auto h = hessian(l);
    const auto reg = is_regular(l, g.zero());
    const auto el = euler_lagrange_residuals(l);

    json out{{"model", m.name}, {"n", c.n()}, {"k", c.k()}, {"lagrangian", str(l.value())}, {"energy", str(energy(l))}};
    json forms = json::array();
    for (const auto& eta : contact_forms(l)) forms.push_back(form_json(c, eta));
    out["contact_forms"] = forms;
    json hj = json::array();
    for (int r = 0; r < h.size(); ++r) {
        json row = json::array();
        for (int col = 0; col < h.size(); ++col) row.push_back(str(h(r, col)));
        hj.push_back(row);
    }
    out["hessian"] = hj;
    out["regularity"] = {{"verdict", to_string(reg.verdict)},
                         {"determinant", str(reg.determinant)},
                         {"determinant_verdict", to_string(reg.determinant_verdict)},
                         {"samples", reg.samples},
                         {"min_rank", reg.min_rank},
                         {"max_rank", reg.max_rank}};
    json field = json::array();
    for (const auto& e : el.field) field.push_back(str(e));
    out["euler_lagrange"] = {{"field", field}, {"divergence", str(el.divergence)}};

    if (g.as_json()) {
        std::cout << out.dump(2) << "\n";
        return kPass;
    }
    std::cout << "model: " << m.name << " (n=" << c.n() << ", k=" << c.k() << ")\n";
    std::cout << "lagrangian: " << str(l.value()) << "\n";
    std::cout << "energy: " << out["energy"].get<std::string>() << "\n";
    for (std::size_t a = 0; a < forms.size(); ++a) std::cout << "eta^" << a + 1 << ": " << form_text(forms[a]) << "\n";
    std::cout << "hessian:\n";
    for (const auto& row : hj) {
        std::cout << " ";
        for (const auto& e : row) std::cout << " " << e.get<std::string>();
        std::cout << "\n";
    }
    std::cout << "determinant: " << str(reg.determinant) << "\n";
    std::cout << "regularity: " << to_string(reg.verdict) << "\n";
    std::cout << "euler-lagrange:\n";
    for (std::size_t i = 0; i < field.size(); ++i) std::cout << "  field[" << i + 1 << "]: " << field[i].get<std::string>() << "\n";
    std::cout << "  divergence: " << str(el.divergence) << "\n";
    return kPass;
}

struct CheckArgs {
    std::string symmetry, newtonoid, sopde, cartan, g, corollary, k, probe;
    std::string precheck;
    double epsilon = 1e-3;
    int nodes = 101;
};

int emit(const Global& g, const std::vector<SymmetryVerdict>& verdicts, bool pass, json extra = json::object())
{
    if (g.as_json()) {
        json out = extra;
        json arr = json::array();
        for (const auto& v : verdicts) arr.push_back(verdict_json(v));
        out["verdicts"] = arr;
        out["result"] = pass ? "pass" : "fail";
        std::cout << out.dump(2) << "\n";
    } else {
        for (const auto& [key, value] : extra.items()) std::cout << key << ": " << value.dump() << "\n";
        for (const auto& v : verdicts) print_verdict(std::cout, v);
        std::cout << "overall: " << (pass ? "pass" : "fail") << "\n";
    }
    return pass ? kPass : kFail;
}

FieldSolution preset_solution(const ModelFile& m, int nodes)
{
    if (!m.preset) throw Error("model '" + m.name + "' declares no preset");
    auto run = run_preset(*m.preset, m, preset_grid(*m.preset, nodes, nodes, 1.0, 1.0));
    return reconstruct_s_fields(*m.lagrangian, std::move(run.solution));
}

int cmd_check(const Global& g, const std::string& path, const CheckArgs& a)
{
    const int modes = !a.symmetry.empty() + !a.newtonoid.empty() + !a.cartan.empty() + !a.corollary.empty() + !a.probe.empty() +
                      !a.precheck.empty();
    if (modes != 1) throw CLI::ValidationError("check", "give exactly one of --symmetry, --newtonoid, --cartan, --corollary, --probe, --precheck");
    const auto m = load_model(path);
    const auto& l = *m.lagrangian;
    const auto zo = g.zero();
    if (!a.symmetry.empty()) {
        std::vector<SymmetryVerdict> out;
        if (m.base_fields.count(a.symmetry)) out.push_back(is_natural_symmetry(l, m.base_field(a.symmetry), zo));
        out.push_back(is_k_contact_symmetry(l, m.bundle_field(a.symmetry), zo));
        return emit(g, out, out.back().holds());
    }
    if (!a.newtonoid.empty() || !a.precheck.empty()) {
        if (a.sopde.empty()) throw CLI::ValidationError("check", "--newtonoid and --precheck need --sopde");
        const auto& sop = m.sopde(a.sopde);
        const auto v = a.newtonoid.empty() ? dynamical_precheck(l, m.bundle_field(a.precheck), sop, zo)
                                           : is_newtonoid(sop, m.bundle_field(a.newtonoid), zo);
        return emit(g, {v}, v.holds());
    }
    if (!a.cartan.empty()) {
        const auto v = cartan_like_check(l, m.bundle_field(a.cartan), parse_expression_list(a.g, *m.chart, m.chart->k()), zo);
        return emit(g, {v}, v.holds());
    }
    if (!a.corollary.empty()) {
        const auto v = newtonoid_corollary_check(l, m.base_field(a.corollary), parse_double_list(a.k), zo);
        return emit(g, {v}, v.holds());
    }
    const auto sol = preset_solution(m, a.nodes);
    ProbeOptions po;
    po.threads = g.threads;
    const KVectorField* against = a.sopde.empty() ? nullptr : &m.sopde(a.sopde);
    const auto r = dynamical_symmetry_probe(l, m.bundle_field(a.probe), sol, a.epsilon, po, against);
    const bool pass = r.max_excess() <= 2.0 * r.max_baseline();
    json fam = json::array();
    for (const auto& f : r.families) {
        fam.push_back({{"name", f.name}, {"baseline", f.baseline}, {"transformed", f.transformed}, {"excess", f.excess}});
    }
    json extra{{"probe", a.probe}, {"epsilon", a.epsilon}, {"families", fam}};
    std::vector<SymmetryVerdict> vs;
    if (r.precheck) vs.push_back(*r.precheck);
    return emit(g, vs, pass, extra);
}

struct VerifyArgs {
    std::string law;
    std::string mode = "symbolic";
    std::string levels = "51,101,201";
    std::optional<double> constant;
    std::string gauge = "first-axis";
};

int cmd_verify(const Global& g, const std::string& path, const VerifyArgs& a)
{
    const auto m = load_model(path);
    const auto& l = *m.lagrangian;
    const auto& f = m.law(a.law);
    VerificationReport r;
    if (a.mode == "symbolic") {
        SymbolicOptions so;
        so.sampling.seed = g.seed;
        r = verify_symbolic(l, f, so);
    } else if (a.mode == "numeric") {
        if (!m.preset) throw Error("model '" + m.name + "' declares no preset for numeric verification");
        double constant = 0.0;
        if (a.constant) {
            constant = *a.constant;
        } else if (auto it = m.calibration.find(a.law); it != m.calibration.end()) {
            constant = it->second;
        } else {
            throw Error("no calibration constant for law '" + a.law + "'; pass --constant");
        }
        const Gauge gauge = parse_gauge(a.gauge);
        std::vector<FieldSolution> levels;
        for (int n : parse_int_list(a.levels)) {
            auto run = run_preset(*m.preset, m, preset_grid(*m.preset, n, n, 1.0, 1.0));
            levels.push_back(reconstruct_s_fields(l, std::move(run.solution), gauge));
        }
        r = verify_on_refinement(l, f, levels, constant);
    } else {
        throw CLI::ValidationError("--mode", "expected symbolic or numeric");
    }

    json out{{"model", m.name}, {"law", a.law}, {"components", law_json(f)}, {"mode", to_string(r.mode)},
             {"pass", r.pass}, {"max_residual", r.max_residual}, {"tolerance", r.tolerance}};
    if (r.mode == VerificationMode::Symbolic) {
        out["samples"] = r.samples;
        out["skipped"] = r.skipped;
        out["null_space_dimension"] = r.null_space_dimension;
        out["certificate"] = r.certificate ? json(*r.certificate) : json(nullptr);
    } else {
        json lv = json::array();
        for (std::size_t i = 0; i < r.norms.size(); ++i) {
            lv.push_back({{"h", r.spacings[i]}, {"linf", r.norms[i].linf}, {"l2", r.norms[i].l2}, {"bound", r.bounds[i]}});
        }
        out["levels"] = lv;
        out["order"] = r.order ? json(*r.order) : json(nullptr);
    }
    out["notes"] = r.notes;
    if (g.as_json()) {
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "law " << a.law << ": F = " << law_text(f) << "\n";
        std::cout << "mode: " << to_string(r.mode) << "\n";
        if (r.mode == VerificationMode::Symbolic) {
            std::cout << "samples: " << r.samples << " (skipped " << r.skipped << "), null space dimension "
                      << r.null_space_dimension << "\n";
            std::cout << "max residual: " << num(r.max_residual) << " (tolerance " << num(r.tolerance) << ")\n";
            std::cout << "certificate: " << (r.certificate && *r.certificate ? "yes" : "no") << "\n";
        } else {
            std::cout << "h,linf,l2,bound\n";
            for (std::size_t i = 0; i < r.norms.size(); ++i) {
                std::cout << num(r.spacings[i]) << "," << num(r.norms[i].linf) << "," << num(r.norms[i].l2) << "," << num(r.bounds[i])
                          << "\n";
            }
            if (r.order) std::cout << "order: " << num(*r.order) << "\n";
        }
        for (const auto& note : r.notes) std::cout << "note: " << note << "\n";
        std::cout << "result: " << (r.pass ? "pass" : "fail") << "\n";
    }
    return r.pass ? kPass : kFail;
}

struct SimulateArgs {
    std::string preset;
    int nx = 101;
    int nt = 101;
    double t1 = 1.0;
    double length = 1.0;
    std::map<std::string, double> params;
    std::vector<std::string> assignments;
    std::string refine;
    std::string gauge = "first-axis";
};

int cmd_simulate(const Global& g, const std::string& path, SimulateArgs a)
{
    for (const auto& s : a.assignments) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--param", "expected NAME=VALUE, got '" + s + "'");
        a.params[s.substr(0, eq)] = parse_double_list(s.substr(eq + 1)).at(0);
    }
    const auto m = load_model(path, a.params);
    const std::string preset = a.preset.empty() ? m.preset.value_or("") : a.preset;
    if (preset.empty()) throw CLI::ValidationError("--preset", "model declares no preset; pass --preset");
    const Gauge gauge = parse_gauge(a.gauge);
    const auto& l = *m.lagrangian;

    json refinement = json::array();
    std::optional<double> order;
    std::optional<PresetRun> finest;
    if (!a.refine.empty()) {
        std::vector<double> hs, errs;
        for (int n : parse_int_list(a.refine)) {
            auto run = run_preset(preset, m, preset_grid(preset, n, n, a.t1, a.length));
            const double h = run.solution.grid.axes[1].spacing();
            const double err = max_error(run.solution, run.exact);
            hs.push_back(h);
            errs.push_back(err);
            refinement.push_back({{"nodes", n}, {"h", h}, {"error", err}});
            finest = std::move(run);
        }
        if (hs.size() >= 2) order = observed_order(hs, errs);
    } else {
        finest = run_preset(preset, m, preset_grid(preset, a.nx, a.nt, a.t1, a.length));
    }
    FieldSolution sol = reconstruct_s_fields(l, std::move(finest->solution), gauge);
    const double err = max_error(sol, finest->exact);
    const auto res = el_residual_on_grid(l, sol);

    std::filesystem::create_directories(g.out);
    const std::filesystem::path dir(g.out);
    write_csv(dir / (preset + ".csv"), *m.chart, sol);
    json field = json::array();
    for (const auto& n : res.field) field.push_back(norms_json(n));
    json summary{{"model", m.name}, {"preset", preset}, {"max_error", err}, {"el_residual", {{"field", field}}}};
    if (res.divergence) summary["el_residual"]["divergence"] = norms_json(*res.divergence);
    json params = json::object();
    for (const auto& p : m.chart->parameters()) params[p.name] = p.value ? json(*p.value) : json(nullptr);
    summary["params"] = params;
    if (finest->laplace) {
        summary["laplace"] = {{"iterations", finest->laplace->iterations}, {"residual", finest->laplace->residual}};
    }
    if (!refinement.empty()) {
        summary["refinement"] = refinement;
        summary["order"] = order ? json(*order) : json(nullptr);
        std::ofstream table(dir / (preset + "_refine.csv"));
        table << "nodes,h,error\n";
        for (const auto& r : refinement) table << r["nodes"].get<int>() << "," << num(r["h"]) << "," << num(r["error"]) << "\n";
    }
    summary["files"] = {(dir / (preset + ".csv")).string(), (dir / (preset + ".json")).string()};
    {
        std::ofstream js(dir / (preset + ".json"));
        if (!js) throw Error("cannot write " + (dir / (preset + ".json")).string());
        json full = summary;
        full["solution"] = solution_json(*m.chart, sol);
        js << full.dump(1) << "\n";
    }
    if (g.as_json()) {
        std::cout << summary.dump(2) << "\n";
        return kPass;
    }
    std::cout << "preset: " << preset << " (model " << m.name << ")\n";
    std::cout << "grid: " << sol.grid.axes[0].nodes << " x " << sol.grid.axes[1].nodes << "\n";
    std::cout << "max error vs manufactured: " << num(err) << "\n";
    for (std::size_t i = 0; i < res.field.size(); ++i) {
        std::cout << "EL residual field[" << i + 1 << "]: linf " << num(res.field[i].linf) << ", l2 " << num(res.field[i].l2) << "\n";
    }
    if (res.divergence) std::cout << "EL residual divergence: linf " << num(res.divergence->linf) << "\n";
    if (!refinement.empty()) {
        std::cout << "nodes,h,error\n";
        for (const auto& r : refinement) std::cout << r["nodes"].get<int>() << "," << num(r["h"]) << "," << num(r["error"]) << "\n";
        if (order) std::cout << "order: " << num(*order) << "\n";
    }
    std::cout << "wrote " << (dir / (preset + ".csv")).string() << " and " << (dir / (preset + ".json")).string() << "\n";
    return kPass;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"k-contact Lagrangian field theory toolkit"};
    app.require_subcommand(1);
    Global g;
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--seed", g.seed, "Seed for randomized checks");
    app.add_option("--threads", g.threads, "Worker cap")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "Output directory");

    std::string model;
    auto* derive = app.add_subcommand("derive", "Energy, contact forms, Hessian, regularity and field equations");
    derive->add_option("model", model, "Model file")->required();

    CheckArgs ca;
    auto* check = app.add_subcommand("check", "Symmetry checks");
    check->add_option("model", model, "Model file")->required();
    check->add_option("--symmetry", ca.symmetry, "Natural and k-contact check of a named field");
    check->add_option("--newtonoid", ca.newtonoid, "Newtonoid check of a named field");
    check->add_option("--sopde", ca.sopde, "Named SOPDE");
    check->add_option("--cartan", ca.cartan, "Cartan-like check of a named field");
    check->add_option("--g", ca.g, "';'-separated functions g^a");
    check->add_option("--corollary", ca.corollary, "Corollary check of a named basefield");
    check->add_option("--k", ca.k, "Comma-separated constants K^a");
    check->add_option("--probe", ca.probe, "Numeric dynamical-symmetry probe of a named field");
    check->add_option("--precheck", ca.precheck, "Bracket pre-check of a named field against --sopde");
    check->add_option("--epsilon", ca.epsilon, "Probe flow parameter");
    check->add_option("--nodes", ca.nodes, "Probe grid nodes per axis");

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Dissipation law verification");
    verify->add_option("model", model, "Model file")->required();
    verify->add_option("--law", va.law, "Named law")->required();
    verify->add_option("--mode", va.mode, "symbolic or numeric")->check(CLI::IsMember({"symbolic", "numeric"}));
    verify->add_option("--levels", va.levels, "Refinement levels (nodes per axis)");
    verify->add_option("--constant", va.constant, "Numeric tolerance constant");
    verify->add_option("--gauge", va.gauge, "first-axis or even-split");

    SimulateArgs sa;
    auto* simulate = app.add_subcommand("simulate", "Run a preset solver");
    simulate->add_option("model", model, "Model file")->required();
    simulate->add_option("--preset", sa.preset, "damped-string, telegrapher, coupled-strings or damped-laplace");
    simulate->add_option("--nx", sa.nx, "Nodes along x");
    simulate->add_option("--nt", sa.nt, "Nodes along t (y for damped-laplace)");
    simulate->add_option("--t1", sa.t1, "Final time");
    simulate->add_option("--length", sa.length, "Domain length");
    simulate->add_option("--param", sa.assignments, "NAME=VALUE parameter override");
    for (const char* name : {"rho", "tau", "gamma", "L", "C", "R", "G", "g1", "g2"}) {
        simulate->add_option_function<double>(std::string("--") + name, [&sa, name](double v) { sa.params[name] = v; },
                                              std::string("Override ") + name);
    }
    simulate->add_option("--refine", sa.refine, "Comma-separated square grid sizes");
    simulate->add_option("--gauge", sa.gauge, "first-axis or even-split");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kError;
    }

    try {
        if (*derive) return cmd_derive(g, model);
        if (*check) return cmd_check(g, model, ca);
        if (*verify) return cmd_verify(g, model, va);
        return cmd_simulate(g, model, sa);
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kError;
    } catch (const ParseError& e) {
        std::cerr << "parse error at line " << e.line() << ", column " << e.column() << ": " << e.detail() << "\n";
        return kError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }
}
