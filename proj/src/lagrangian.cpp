#include "kcontact/lagrangian.hpp"

#include "kcontact/errors.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <random>
#include <unordered_map>

namespace kcontact {

Lagrangian::Lagrangian(ChartPtr chart, Expression value) : chart_(std::move(chart)), value_(std::move(value))
{
    chart_->check(value_);
    for (const auto& s : free_symbols(value_)) {
        switch (s.kind) {
        case SymbolKind::JetFirst:
        case SymbolKind::JetSecond:
        case SymbolKind::JetAction:
        case SymbolKind::Independent:
            throw ChartError("Lagrangian may not depend on " + to_string(s));
        default: break;
        }
    }
}

Expression energy(const Lagrangian& l)
{
    const auto& c = *l.chart();
    Expression e = -l.value();
    for (int i = 1; i <= c.n(); ++i) {
        for (int a = 1; a <= c.k(); ++a) e += Expression(c.v(i, a)) * l.d_v(i, a);
    }
    return e;
}

std::vector<OneForm> contact_forms(const Lagrangian& l)
{
    const auto& c = *l.chart();
    std::vector<OneForm> out;
    for (int a = 1; a <= c.k(); ++a) {
        OneForm eta(l.chart());
        eta.set(c.s_index(a), 1);
        for (int i = 1; i <= c.n(); ++i) eta.set(c.q_index(i), -l.d_v(i, a));
        out.push_back(std::move(eta));
    }
    return out;
}

HessianMatrix::HessianMatrix(int n, int k, std::vector<Expression> entries) : n_(n), k_(k), entries_(std::move(entries))
{
    if (entries_.size() != static_cast<std::size_t>(size() * size())) throw Error("Hessian needs (nk)^2 entries");
}

HessianMatrix hessian(const Lagrangian& l)
{
    const auto& c = *l.chart();
    const int m = c.n() * c.k();
    std::vector<Expression> entries(static_cast<std::size_t>(m * m));
    for (int i = 1; i <= c.n(); ++i) {
        for (int a = 1; a <= c.k(); ++a) {
            const Expression first = l.d_v(i, a);
            const int row = (i - 1) * c.k() + a - 1;
            for (int j = 1; j <= c.n(); ++j) {
                for (int b = 1; b <= c.k(); ++b) {
                    const int col = (j - 1) * c.k() + b - 1;
                    if (col < row) {
                        entries[static_cast<std::size_t>(row * m + col)] = entries[static_cast<std::size_t>(col * m + row)];
                    } else {
                        entries[static_cast<std::size_t>(row * m + col)] = differentiate(first, c.v(j, b));
                    }
                }
            }
        }
    }
    return HessianMatrix(c.n(), c.k(), std::move(entries));
}

Expression determinant(const HessianMatrix& h)
{
    const int m = h.size();
    if (m > 20) throw Error("Hessian too large for cofactor expansion");
    std::unordered_map<std::uint32_t, Expression> memo;
    auto minor = [&](auto&& self, std::uint32_t cols) -> Expression {
        if (cols == 0) return Expression(1);
        if (auto it = memo.find(cols); it != memo.end()) return it->second;
        const int row = m - std::popcount(cols);
        Expression sum;
        int position = 0;
        for (int j = 0; j < m; ++j) {
            if (!(cols & (1u << j))) continue;
            const Expression& entry = h(row, j);
            if (!entry.is_zero()) {
                const Expression term = entry * self(self, cols & ~(1u << j));
                sum = position % 2 == 0 ? sum + term : sum - term;
            }
            ++position;
        }
        memo.emplace(cols, sum);
        return sum;
    };
    return minor(minor, m == 32 ? ~0u : (1u << m) - 1u);
}

std::string to_string(Regularity r)
{
    switch (r) {
    case Regularity::Regular: return "regular";
    case Regularity::Singular: return "singular";
    case Regularity::Pointwise: return "pointwise";
    }
    return "?";
}

RegularityReport is_regular(const Lagrangian& l, const ZeroTestOptions& options)
{
    const auto& c = *l.chart();
    const auto h = hessian(l);
    RegularityReport report;
    report.determinant = determinant(h);
    report.determinant_verdict = is_zero(report.determinant, options);
    if (is_zero_like(report.determinant_verdict)) {
        report.verdict = Regularity::Singular;
        return report;
    }
    bool coordinate_dependent = false;
    for (const auto& s : free_symbols(report.determinant)) coordinate_dependent |= s.kind != SymbolKind::Parameter;
    const Point bound = c.parameter_values();
    if (!coordinate_dependent) {
        report.verdict = Regularity::Regular;
        bool all_bound = true;
        for (const auto& s : free_symbols(report.determinant)) all_bound &= bound.count(s) > 0;
        if (all_bound && evaluate(report.determinant, bound) == 0.0) report.verdict = Regularity::Singular;
        return report;
    }

    report.verdict = Regularity::Pointwise;
    std::vector<Symbol> slots = c.coordinates();
    std::vector<double> fixed;
    std::vector<Symbol> free_params;
    for (const auto& p : c.parameters()) {
        const Symbol sym = c.parameter(p.name);
        if (p.value) {
            slots.push_back(sym);
            fixed.push_back(*p.value);
        }
    }
    for (const auto& p : c.parameters()) {
        if (!p.value) {
            slots.push_back(c.parameter(p.name));
            free_params.push_back(c.parameter(p.name));
        }
    }
    const int m = h.size();
    std::vector<CompiledExpression> compiled;
    for (int r = 0; r < m; ++r) {
        for (int col = 0; col < m; ++col) compiled.emplace_back(h(r, col), slots);
    }
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> dist(options.lower, options.upper);
    constexpr int kSamples = 32;
    report.min_rank = m;
    std::vector<double> values(slots.size());
    for (int sample = 0; sample < kSamples; ++sample) {
        std::size_t at = 0;
        for (int d = 0; d < c.dim(); ++d) values[at++] = dist(rng);
        for (double f : fixed) values[at++] = f;
        for (std::size_t p = 0; p < free_params.size(); ++p) values[at++] = dist(rng);
        Eigen::MatrixXd num(m, m);
        try {
            for (int r = 0; r < m; ++r) {
                for (int col = 0; col < m; ++col) num(r, col) = compiled[static_cast<std::size_t>(r * m + col)](values);
            }
        } catch (const DomainError&) {
            continue;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(num);
        lu.setThreshold(1e-10);
        const int rank = static_cast<int>(lu.rank());
        ++report.samples;
        report.min_rank = std::min(report.min_rank, rank);
        report.max_rank = std::max(report.max_rank, rank);
        if (rank == m) {
            ++report.full_rank;
            const double det = lu.determinant();
            (det > 0 ? report.positive : report.negative) += 1;
        }
    }
    if (report.samples == 0) report.min_rank = 0;
    return report;
}

Expression velocities_to_jets(const BundleChart& chart, const Expression& e)
{
    std::map<Symbol, Expression> map;
    for (int i = 1; i <= chart.n(); ++i) {
        for (int a = 1; a <= chart.k(); ++a) map.emplace(chart.v(i, a), Expression(chart.a(i, a)));
    }
    return substitute(e, map);
}

JetResidualSystem euler_lagrange_residuals(const Lagrangian& l)
{
    const auto& c = *l.chart();
    const auto h = hessian(l);
    JetResidualSystem sys;
    for (int i = 1; i <= c.n(); ++i) {
        Expression r = -l.d_q(i);
        for (int a = 1; a <= c.k(); ++a) {
            const Expression lv = l.d_v(i, a);
            for (int j = 1; j <= c.n(); ++j) {
                for (int b = 1; b <= c.k(); ++b) r += h.at(i, a, j, b) * Expression(c.w(j, a, b));
                r += differentiate(lv, c.q(j)) * Expression(c.a(j, a));
            }
            for (int b = 1; b <= c.k(); ++b) r += differentiate(lv, c.s(b)) * Expression(c.r(b, a));
            r -= l.d_s(a) * lv;
        }
        sys.field.push_back(velocities_to_jets(c, r));
    }
    Expression d = -l.value();
    for (int a = 1; a <= c.k(); ++a) d += Expression(c.r(a, a));
    sys.divergence = velocities_to_jets(c, d);
    return sys;
}

bool SopdeResiduals::member() const
{
    for (auto v : field_verdicts) {
        if (!is_zero_like(v)) return false;
    }
    return is_zero_like(trace_verdict);
}

SopdeResiduals sopde_field_residuals(const Lagrangian& l, const Sopde& g, const ZeroTestOptions& options)
{
    if (g.chart() != l.chart()) throw ChartError("objects live on different charts");
    const auto& c = *l.chart();
    SopdeResiduals out;
    for (int i = 1; i <= c.n(); ++i) {
        Expression r = -l.d_q(i);
        for (int a = 1; a <= c.k(); ++a) {
            const Expression lv = l.d_v(i, a);
            r += g[a].apply(lv) - l.d_s(a) * lv;
        }
        out.field_verdicts.push_back(is_zero(r, options));
        out.field.push_back(std::move(r));
    }
    out.trace = -l.value();
    for (int a = 1; a <= c.k(); ++a) out.trace += g.action(a, a);
    out.trace_verdict = is_zero(out.trace, options);
    return out;
}

std::vector<Expression> GeometricResiduals::all() const
{
    std::vector<Expression> out(action);
    out.insert(out.end(), velocity.begin(), velocity.end());
    out.insert(out.end(), base.begin(), base.end());
    out.push_back(energy);
    return out;
}

GeometricResiduals geometric_equation_residuals(const Lagrangian& l, const KVectorField& x)
{
    if (x.chart() != l.chart()) throw ChartError("objects live on different charts");
    const auto& c = *l.chart();
    const int n = c.n(), k = c.k();
    const auto h = hessian(l);
    auto gap = [&](int j, int a) { return x[a].q(j) - Expression(c.v(j, a)); };

    GeometricResiduals out;
    for (int b = 1; b <= k; ++b) {
        Expression r;
        for (int j = 1; j <= n; ++j) {
            for (int a = 1; a <= k; ++a) r += gap(j, a) * differentiate(l.d_v(j, a), c.s(b));
        }
        out.action.push_back(std::move(r));
    }
    for (int i = 1; i <= n; ++i) {
        for (int b = 1; b <= k; ++b) {
            Expression r;
            for (int j = 1; j <= n; ++j) {
                for (int a = 1; a <= k; ++a) r += gap(j, a) * h.at(i, b, j, a);
            }
            out.velocity.push_back(std::move(r));
        }
    }
    for (int i = 1; i <= n; ++i) {
        Expression r = l.d_q(i);
        for (int a = 1; a <= k; ++a) {
            const Expression lv = l.d_v(i, a);
            for (int j = 1; j <= n; ++j) {
                r += gap(j, a) * differentiate(l.d_v(j, a), c.q(i));
                r -= x[a].q(j) * differentiate(lv, c.q(j));
                for (int b = 1; b <= k; ++b) r -= x[a].v(j, b) * h.at(j, b, i, a);
            }
            for (int b = 1; b <= k; ++b) r -= x[a].s(b) * differentiate(lv, c.s(b));
            r += l.d_s(a) * lv;
        }
        out.base.push_back(std::move(r));
    }
    out.energy = l.value();
    for (int a = 1; a <= k; ++a) {
        for (int j = 1; j <= n; ++j) out.energy += gap(j, a) * l.d_v(j, a);
        out.energy -= x[a].s(a);
    }
    return out;
}

GeometricResiduals geometric_residuals_from_forms(const Lagrangian& l, const KVectorField& x)
{
    if (x.chart() != l.chart()) throw ChartError("objects live on different charts");
    const auto& c = *l.chart();
    const auto etas = contact_forms(l);
    const Expression e = energy(l);
    OneForm omega = -1 * differential(l.chart(), e);
    Expression scalar = e;
    for (int a = 1; a <= c.k(); ++a) {
        const auto& eta = etas[static_cast<std::size_t>(a - 1)];
        omega = omega + interior_product(x[a], exterior_derivative(eta)) - l.d_s(a) * eta;
        scalar += interior_product(x[a], eta);
    }
    GeometricResiduals out;
    for (int b = 1; b <= c.k(); ++b) out.action.push_back(omega[c.s_index(b)]);
    for (int i = 1; i <= c.n(); ++i) {
        for (int b = 1; b <= c.k(); ++b) out.velocity.push_back(omega[c.v_index(i, b)]);
    }
    for (int i = 1; i <= c.n(); ++i) out.base.push_back(omega[c.q_index(i)]);
    out.energy = -scalar;
    return out;
}

std::vector<GridNorms> grid_norms(const BundleChart& chart, const FieldSolution& sol, const std::vector<Expression>& residuals)
{
    const auto slots = jet_slots(chart);
    std::vector<CompiledExpression> compiled;
    for (const auto& r : residuals) compiled.emplace_back(r, slots);
    double cell = 1.0;
    for (const auto& ax : sol.grid.axes) cell *= ax.spacing();
    std::vector<GridNorms> norms(residuals.size());
    std::vector<double> values;
    for (std::size_t node : sol.grid.interior_nodes(1)) {
        fill_jet_values(chart, sol, node, values);
        for (std::size_t r = 0; r < compiled.size(); ++r) {
            const double v = std::abs(compiled[r](values));
            norms[r].linf = std::max(norms[r].linf, v);
            norms[r].l2 += v * v;
            ++norms[r].nodes;
        }
    }
    for (auto& n : norms) n.l2 = std::sqrt(n.l2 * cell);
    return norms;
}

CompatibilityReport solution_sopde_compatibility(const Lagrangian& l, const Sopde& g, const FieldSolution& sol,
                                                 const ZeroTestOptions& options)
{
    const auto& c = *l.chart();
    if (!sopde_field_residuals(l, g, options).member()) throw Error("sopde does not satisfy the Lagrangian field equations");
    sol.check(c, true);
    const auto h = hessian(l);
    std::vector<Expression> field;
    for (int i = 1; i <= c.n(); ++i) {
        Expression r;
        for (int a = 1; a <= c.k(); ++a) {
            for (int b = 1; b <= c.k(); ++b) {
                for (int j = 1; j <= c.n(); ++j) r += h.at(i, a, j, b) * (g.second(j, a, b) - Expression(c.w(j, a, b)));
                r += differentiate(l.d_v(i, a), c.s(b)) * (g.action(b, a) - Expression(c.r(b, a)));
            }
        }
        field.push_back(std::move(r));
    }
    Expression trace;
    for (int a = 1; a <= c.k(); ++a) trace += Expression(c.r(a, a)) - g.action(a, a);
    field.push_back(trace);
    const auto norms = grid_norms(c, sol, field);
    CompatibilityReport report;
    for (std::size_t i = 0; i + 1 < norms.size(); ++i) {
        report.field.linf = std::max(report.field.linf, norms[i].linf);
        report.field.l2 = std::max(report.field.l2, norms[i].l2);
        report.field.nodes = norms[i].nodes;
    }
    report.trace = norms.back();
    return report;
}

}  // namespace kcontact
