#include "kcontact/symmetry.hpp"

#include "kcontact/errors.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace kcontact {

std::string to_string(SymmetryKind k)
{
    switch (k) {
    case SymmetryKind::Natural: return "natural";
    case SymmetryKind::KContact: return "k-contact";
    case SymmetryKind::CartanLike: return "cartan-like";
    case SymmetryKind::Newtonoid: return "newtonoid";
    case SymmetryKind::NewtonoidCorollary: return "newtonoid-corollary";
    case SymmetryKind::DynamicalPrecheck: return "dynamical-precheck";
    }
    return "unknown";
}

bool SymmetryVerdict::holds() const
{
    return std::all_of(conditions.begin(), conditions.end(), [](const SymmetryCondition& c) { return is_zero_like(c.verdict); });
}

ZeroVerdict SymmetryVerdict::combined() const
{
    auto rank = [](ZeroVerdict v) {
        switch (v) {
        case ZeroVerdict::ProvenZero: return 0;
        case ZeroVerdict::ProbablyZero: return 1;
        case ZeroVerdict::Indeterminate: return 2;
        case ZeroVerdict::ProbablyNonzero: return 3;
        case ZeroVerdict::ProvenNonzero: return 4;
        }
        return 2;
    };
    ZeroVerdict out = ZeroVerdict::ProvenZero;
    for (const auto& c : conditions) {
        if (rank(c.verdict) > rank(out)) out = c.verdict;
    }
    return out;
}

namespace {

void add(SymmetryVerdict& v, std::string name, Expression residual, const ZeroTestOptions& o)
{
    const ZeroVerdict z = is_zero(residual, o);
    v.conditions.push_back({std::move(name), std::move(residual), z});
}

std::string component_name(const BundleChart& c, int index)
{
    return "d" + to_string(c.coordinate(index));
}

/// Appends "prefix eta^a . dx" conditions for the one-forms `w` (one per a).
void add_forms(SymmetryVerdict& v, const BundleChart& c, const std::string& prefix, const std::vector<OneForm>& w,
               const ZeroTestOptions& o)
{
    for (std::size_t a = 0; a < w.size(); ++a) {
        for (int idx = 0; idx < c.dim(); ++idx) {
            add(v, prefix + " eta^" + std::to_string(a + 1) + " . " + component_name(c, idx), w[a][idx], o);
        }
    }
}

void require_same(const ChartPtr& a, const ChartPtr& b)
{
    if (a != b) throw ChartError("objects live on different charts");
}

}  // namespace

SymmetryVerdict is_natural_symmetry(const Lagrangian& l, const BaseVectorField& z, const ZeroTestOptions& options)
{
    require_same(l.chart(), z.chart());
    SymmetryVerdict v;
    v.kind = SymmetryKind::Natural;
    add(v, "Z^C(L)", complete_lift(z).apply(l.value()), options);
    if (v.holds()) {
        std::vector<Expression> f;
        for (int a = 1; a <= l.chart()->k(); ++a) f.push_back(vertical_lift(z, a).apply(l.value()));
        v.law = DissipationLaw(l.chart(), std::move(f));
    }
    return v;
}

SymmetryVerdict cartan_like_check(const Lagrangian& l, const BundleVectorField& z, const std::vector<Expression>& g,
                                  const ZeroTestOptions& options)
{
    require_same(l.chart(), z.chart());
    const auto& c = *l.chart();
    if (static_cast<int>(g.size()) != c.k()) throw ChartError("cartan-like check needs " + std::to_string(c.k()) + " functions g");
    for (const auto& e : g) c.check(e);
    const auto etas = contact_forms(l);
    SymmetryVerdict v;
    v.kind = SymmetryKind::CartanLike;
    std::vector<OneForm> forms;
    Expression energy_condition = z.apply(energy(l));
    for (int a = 1; a <= c.k(); ++a) {
        const Expression& ga = g[static_cast<std::size_t>(a - 1)];
        forms.push_back(lie_derivative(z, etas[static_cast<std::size_t>(a - 1)]) - differential(l.chart(), ga));
        energy_condition += ga * l.d_s(a);
    }
    add_forms(v, c, "L_X", forms, options);
    add(v, "L_X E_L", energy_condition, options);
    if (v.holds()) {
        std::vector<Expression> f;
        for (int a = 1; a <= c.k(); ++a) {
            f.push_back(g[static_cast<std::size_t>(a - 1)] - interior_product(z, etas[static_cast<std::size_t>(a - 1)]));
        }
        v.law = DissipationLaw(l.chart(), std::move(f));
    }
    return v;
}

SymmetryVerdict is_k_contact_symmetry(const Lagrangian& l, const BundleVectorField& x, const ZeroTestOptions& options)
{
    auto v = cartan_like_check(l, x, std::vector<Expression>(static_cast<std::size_t>(l.chart()->k())), options);
    v.kind = SymmetryKind::KContact;
    return v;
}

SymmetryVerdict is_newtonoid(const Sopde& g, const BundleVectorField& x, const ZeroTestOptions& options)
{
    require_same(g.chart(), x.chart());
    const auto& c = *g.chart();
    SymmetryVerdict v;
    v.kind = SymmetryKind::Newtonoid;
    for (int a = 1; a <= c.k(); ++a) {
        for (int i = 1; i <= c.n(); ++i) {
            add(v, "G_" + std::to_string(a) + "(X^" + std::to_string(i) + ") - X^" + std::to_string(i) + "_" + std::to_string(a),
                g[a].apply(x.q(i)) - x.v(i, a), options);
        }
    }
    return v;
}

BundleVectorField corollary_field(const BaseVectorField& z, const std::vector<double>& k_constants)
{
    const auto& c = *z.chart();
    if (static_cast<int>(k_constants.size()) != c.k()) throw ChartError("need " + std::to_string(c.k()) + " constants K");
    BundleVectorField x = complete_lift(z);
    for (int a = 1; a <= c.k(); ++a) x.set_s(a, Expression::constant(k_constants[static_cast<std::size_t>(a - 1)]));
    return x;
}

SymmetryVerdict newtonoid_corollary_check(const Lagrangian& l, const BaseVectorField& z, const std::vector<double>& k_constants,
                                          const ZeroTestOptions& options)
{
    require_same(l.chart(), z.chart());
    const auto x = corollary_field(z, k_constants);
    SymmetryVerdict v;
    v.kind = SymmetryKind::NewtonoidCorollary;
    add(v, "X(L)", x.apply(l.value()), options);
    if (!v.holds()) return v;
    const auto contact = is_k_contact_symmetry(l, x, options);
    v.conditions.insert(v.conditions.end(), contact.conditions.begin(), contact.conditions.end());
    if (v.holds()) {
        std::vector<Expression> f;
        for (int a = 1; a <= l.chart()->k(); ++a) {
            f.push_back(vertical_lift(z, a).apply(l.value()) - Expression::constant(k_constants[static_cast<std::size_t>(a - 1)]));
        }
        v.law = DissipationLaw(l.chart(), std::move(f));
    }
    return v;
}

SymmetryVerdict dynamical_precheck(const Lagrangian& l, const BundleVectorField& x, const KVectorField& g,
                                   const ZeroTestOptions& options)
{
    require_same(l.chart(), x.chart());
    require_same(l.chart(), g.chart());
    const auto etas = contact_forms(l);
    Expression total;
    for (int a = 1; a <= g.k(); ++a) total += interior_product(lie_bracket(x, g[a]), etas[static_cast<std::size_t>(a - 1)]);
    SymmetryVerdict v;
    v.kind = SymmetryKind::DynamicalPrecheck;
    add(v, "i_[X,G_a] eta^a", total, options);
    return v;
}

const ProbeFamily& ProbeReport::family(const std::string& name) const
{
    for (const auto& f : families) {
        if (f.name == name) return f;
    }
    throw Error("no probe family named " + name);
}

double ProbeReport::max_excess() const
{
    double m = 0.0;
    for (const auto& f : families) m = std::max(m, f.excess);
    return m;
}

double ProbeReport::max_baseline() const
{
    double m = 0.0;
    for (const auto& f : families) m = std::max(m, f.baseline);
    return m;
}

namespace {

struct SectionResidual {
    std::vector<std::vector<double>> form;  // per coordinate, per interior node
    std::vector<double> action;
};

/// Residuals of the section form of the field equations for grid values
/// y[coordinate][node], derivatives by centered differences.
class SectionEquations {
public:
    SectionEquations(const Lagrangian& l, const GridSpec& grid, std::vector<std::size_t> nodes)
        : chart_(*l.chart()), grid_(grid), nodes_(std::move(nodes))
    {
        const auto& c = chart_;
        slots_ = c.coordinates();
        for (const auto& p : c.parameters()) {
            if (!p.value) throw SolverError("probe needs every parameter bound; '" + p.name + "' is free");
            slots_.push_back(c.parameter(p.name));
            params_.push_back(*p.value);
        }
        const int dim = c.dim(), k = c.k();
        const auto etas = contact_forms(l);
        const auto e = energy(l);
        const auto de = differential(l.chart(), e);
        energy_ = compile(e);
        for (int idx = 0; idx < dim; ++idx) denergy_.push_back(compile(de[idx]));
        for (int a = 0; a < k; ++a) {
            const auto d = exterior_derivative(etas[static_cast<std::size_t>(a)]);
            ls_.push_back(compile(l.d_s(a + 1)));
            for (int idx = 0; idx < dim; ++idx) eta_.push_back(compile(etas[static_cast<std::size_t>(a)][idx]));
            for (int r = 0; r < dim; ++r) {
                for (int col = 0; col < dim; ++col) deta_.push_back(compile(d.get(r, col)));
            }
        }
    }

    SectionResidual operator()(const std::vector<std::vector<double>>& y) const
    {
        const int dim = chart_.dim(), k = chart_.k();
        SectionResidual out;
        out.form.assign(static_cast<std::size_t>(dim), std::vector<double>(nodes_.size()));
        out.action.assign(nodes_.size(), 0.0);
        std::vector<double> values(slots_.size());
        std::vector<double> tangent(static_cast<std::size_t>(k * dim));
        for (std::size_t p = 0; p < nodes_.size(); ++p) {
            const std::size_t node = nodes_[p];
            for (int idx = 0; idx < dim; ++idx) values[static_cast<std::size_t>(idx)] = y[static_cast<std::size_t>(idx)][node];
            std::copy(params_.begin(), params_.end(), values.begin() + dim);
            for (int a = 0; a < k; ++a) {
                for (int idx = 0; idx < dim; ++idx) {
                    tangent[static_cast<std::size_t>(a * dim + idx)] = centered_first(grid_, y[static_cast<std::size_t>(idx)], node, a);
                }
            }
            double action = eval(energy_, values);
            for (int col = 0; col < dim; ++col) {
                double r = -eval(denergy_[static_cast<std::size_t>(col)], values);
                for (int a = 0; a < k; ++a) {
                    const double ls = eval(ls_[static_cast<std::size_t>(a)], values);
                    r -= ls * eval(eta_[static_cast<std::size_t>(a * dim + col)], values);
                    for (int row = 0; row < dim; ++row) {
                        const auto& entry = deta_[static_cast<std::size_t>((a * dim + row) * dim + col)];
                        if (entry) r += tangent[static_cast<std::size_t>(a * dim + row)] * (*entry)(values);
                    }
                }
                out.form[static_cast<std::size_t>(col)][p] = r;
            }
            for (int a = 0; a < k; ++a) {
                for (int idx = 0; idx < dim; ++idx) {
                    action += tangent[static_cast<std::size_t>(a * dim + idx)] * eval(eta_[static_cast<std::size_t>(a * dim + idx)], values);
                }
            }
            out.action[p] = action;
        }
        return out;
    }

private:
    std::optional<CompiledExpression> compile(const Expression& e) const
    {
        if (e.is_zero()) return std::nullopt;
        return CompiledExpression(e, slots_);
    }
    static double eval(const std::optional<CompiledExpression>& e, std::span<const double> v) { return e ? (*e)(v) : 0.0; }

    const BundleChart& chart_;
    const GridSpec& grid_;
    std::vector<std::size_t> nodes_;
    std::vector<Symbol> slots_;
    std::vector<double> params_;
    std::optional<CompiledExpression> energy_;
    std::vector<std::optional<CompiledExpression>> denergy_, ls_, eta_, deta_;
};

double linf(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double linf_difference(const std::vector<double>& a, const std::vector<double>& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

ProbeReport dynamical_symmetry_probe(const Lagrangian& l, const BundleVectorField& x, const FieldSolution& sol, double eps,
                                     const ProbeOptions& options, const KVectorField* precheck_against)
{
    require_same(l.chart(), x.chart());
    const auto& c = *l.chart();
    sol.check(c, true);
    const GridSpec& g = sol.grid;
    for (const auto& ax : g.axes) {
        if (ax.nodes < 2 * options.margin + 3) throw SolverError("grid margin too small for the probe");
    }
    const int dim = c.dim(), n = c.n(), k = c.k();
    std::vector<std::vector<double>> base(static_cast<std::size_t>(dim));
    for (int i = 0; i < n; ++i) base[static_cast<std::size_t>(i)] = sol.phi[static_cast<std::size_t>(i)];
    for (int j = 0; j < n * k; ++j) base[static_cast<std::size_t>(n + j)] = sol.jets[static_cast<std::size_t>(j)];
    for (int a = 0; a < k; ++a) base[static_cast<std::size_t>(n + n * k + a)] = sol.s[static_cast<std::size_t>(a)];

    const SectionEquations equations(l, g, g.interior_nodes(options.margin));
    const auto before = equations(base);
    double baseline = linf(before.action);
    for (const auto& f : before.form) baseline = std::max(baseline, linf(f));
    if (baseline > options.tolerance) {
        throw SolverError("input does not satisfy the field equations: baseline residual " + std::to_string(baseline));
    }

    const NumericField flow(x, c.parameter_values());
    auto moved = base;
    auto transport = [&](std::size_t lo, std::size_t hi) {
        std::vector<double> y(static_cast<std::size_t>(dim));
        for (std::size_t node = lo; node < hi; ++node) {
            for (int idx = 0; idx < dim; ++idx) y[static_cast<std::size_t>(idx)] = base[static_cast<std::size_t>(idx)][node];
            const auto out = flow.flow(y, eps, options.substeps);
            for (int idx = 0; idx < dim; ++idx) moved[static_cast<std::size_t>(idx)][node] = out[static_cast<std::size_t>(idx)];
        }
    };
    const std::size_t total = g.size();
    const auto workers = static_cast<std::size_t>(std::max(1, options.threads));
    if (workers == 1) {
        transport(0, total);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        const std::size_t chunk = (total + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    transport(w * chunk, std::min(total, (w + 1) * chunk));
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    const auto after = equations(moved);

    ProbeReport report;
    report.epsilon = eps;
    ProbeFamily form{"form"};
    for (int idx = 0; idx < dim; ++idx) {
        const auto& b = before.form[static_cast<std::size_t>(idx)];
        const auto& t = after.form[static_cast<std::size_t>(idx)];
        form.baseline = std::max(form.baseline, linf(b));
        form.transformed = std::max(form.transformed, linf(t));
        form.excess = std::max(form.excess, linf_difference(t, b));
    }
    ProbeFamily action{"action", linf(before.action), linf(after.action), linf_difference(after.action, before.action)};
    report.families = {form, action};
    if (precheck_against) report.precheck = dynamical_precheck(l, x, *precheck_against);
    return report;
}

}  // namespace kcontact
