#include "kcontact/dissipation.hpp"

#include "kcontact/errors.hpp"
#include "kcontact/solver.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace kcontact {

DissipationLaw::DissipationLaw(ChartPtr chart, std::vector<Expression> components)
    : chart_(std::move(chart)), f_(std::move(components))
{
    if (static_cast<int>(f_.size()) != chart_->k()) {
        throw ChartError("dissipation law needs " + std::to_string(chart_->k()) + " components");
    }
    for (const auto& e : f_) {
        chart_->check(e);
        for (const auto& s : free_symbols(e)) {
            if (s.kind == SymbolKind::JetFirst || s.kind == SymbolKind::JetSecond || s.kind == SymbolKind::JetAction ||
                s.kind == SymbolKind::Independent) {
                throw ChartError("dissipation law may not depend on " + to_string(s));
            }
        }
    }
}

DissipationLaw operator+(const DissipationLaw& a, const DissipationLaw& b)
{
    if (a.chart_ != b.chart_) throw ChartError("objects live on different charts");
    std::vector<Expression> out;
    for (std::size_t i = 0; i < a.f_.size(); ++i) out.push_back(a.f_[i] + b.f_[i]);
    return DissipationLaw(a.chart_, std::move(out));
}

DissipationLaw operator*(const Expression& c, const DissipationLaw& f)
{
    std::vector<Expression> out;
    for (const auto& e : f.f_) out.push_back(c * e);
    return DissipationLaw(f.chart_, std::move(out));
}

bool operator==(const DissipationLaw& a, const DissipationLaw& b)
{
    return a.chart_ == b.chart_ && a.f_ == b.f_;
}

std::string to_string(VerificationMode m)
{
    return m == VerificationMode::Symbolic ? "symbolic" : "numeric";
}

namespace {

/// Sample point generator over chart coordinates and every parameter; bound
/// parameters keep their values.
struct Sampler {
    std::vector<Symbol> slots;
    std::vector<std::optional<double>> fixed;

    explicit Sampler(const BundleChart& c)
    {
        slots = c.coordinates();
        fixed.assign(slots.size(), std::nullopt);
        for (const auto& p : c.parameters()) {
            slots.push_back(c.parameter(p.name));
            fixed.push_back(p.value);
        }
    }

    std::vector<double> draw(std::mt19937_64& rng, const ZeroTestOptions& o) const
    {
        std::uniform_real_distribution<double> d(o.lower, o.upper);
        std::vector<double> v(slots.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = fixed[i] ? *fixed[i] : d(rng);
        return v;
    }
};

struct CompiledMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<CompiledExpression> entries;
    std::vector<bool> zero;

    CompiledMatrix(int r, int c, const std::vector<Expression>& e, std::span<const Symbol> slots) : rows(r), cols(c)
    {
        for (const auto& x : e) {
            zero.push_back(x.is_zero());
            entries.emplace_back(x, slots);
        }
    }

    Eigen::MatrixXd operator()(std::span<const double> values) const
    {
        Eigen::MatrixXd m(rows, cols);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const auto i = static_cast<std::size_t>(r * cols + c);
                m(r, c) = zero[i] ? 0.0 : entries[i](values);
            }
        }
        return m;
    }
};

}  // namespace

VerificationReport verify_symbolic(const Lagrangian& l, const DissipationLaw& f, const SymbolicOptions& options)
{
    if (f.chart() != l.chart()) throw ChartError("objects live on different charts");
    const auto& c = *l.chart();
    const int n = c.n(), k = c.k(), dim = c.dim();
    const int unknowns = n * k * k + k * k;
    auto second_index = [&](int i, int a, int b) { return ((i - 1) * k + (a - 1)) * k + (b - 1); };
    auto action_index = [&](int upper, int lower) { return n * k * k + (upper - 1) * k + (lower - 1); };
    const auto h = hessian(l);

    // Membership constraints A x = rhs: n field rows and one trace row.
    const int rows = n + 1;
    std::vector<Expression> a(static_cast<std::size_t>(rows * unknowns));
    std::vector<Expression> rhs(static_cast<std::size_t>(rows));
    auto A = [&](int r, int col) -> Expression& { return a[static_cast<std::size_t>(r * unknowns + col)]; };
    for (int i = 1; i <= n; ++i) {
        Expression b = l.d_q(i);
        for (int al = 1; al <= k; ++al) {
            const Expression lv = l.d_v(i, al);
            b += l.d_s(al) * lv;
            for (int j = 1; j <= n; ++j) {
                b -= Expression(c.v(j, al)) * differentiate(lv, c.q(j));
                for (int be = 1; be <= k; ++be) A(i - 1, second_index(j, al, be)) = h.at(j, be, i, al);
            }
            for (int be = 1; be <= k; ++be) A(i - 1, action_index(be, al)) = differentiate(lv, c.s(be));
        }
        rhs[static_cast<std::size_t>(i - 1)] = b;
    }
    for (int al = 1; al <= k; ++al) A(n, action_index(al, al)) = Expression(1);
    rhs[static_cast<std::size_t>(n)] = l.value();

    // R = coefficients . x + constant.
    std::vector<Expression> coeff(static_cast<std::size_t>(unknowns));
    Expression constant;
    for (int al = 1; al <= k; ++al) {
        const Expression& fa = f[al];
        constant -= l.d_s(al) * fa;
        for (int i = 1; i <= n; ++i) {
            constant += Expression(c.v(i, al)) * differentiate(fa, c.q(i));
            for (int be = 1; be <= k; ++be) coeff[static_cast<std::size_t>(second_index(i, al, be))] = differentiate(fa, c.v(i, be));
        }
        for (int be = 1; be <= k; ++be) coeff[static_cast<std::size_t>(action_index(be, al))] = differentiate(fa, c.s(be));
    }

    // Certificate system: i_X d eta^a = dF^a, unknown X (dim), k * dim equations.
    const auto etas = contact_forms(l);
    std::vector<Expression> cert(static_cast<std::size_t>(k * dim * dim));
    std::vector<Expression> cert_rhs(static_cast<std::size_t>(k * dim));
    for (int al = 0; al < k; ++al) {
        const TwoForm d = exterior_derivative(etas[static_cast<std::size_t>(al)]);
        for (int row = 0; row < dim; ++row) {
            // (i_X w)_row = sum_col X^col w(col, row)
            for (int col = 0; col < dim; ++col) cert[static_cast<std::size_t>((al * dim + row) * dim + col)] = d.get(col, row);
            cert_rhs[static_cast<std::size_t>(al * dim + row)] = differentiate(f[al + 1], c.coordinate(row));
        }
    }

    const Sampler sampler(c);
    const CompiledMatrix am(rows, unknowns, a, sampler.slots);
    const CompiledMatrix bm(rows, 1, rhs, sampler.slots);
    const CompiledMatrix cm(1, unknowns, coeff, sampler.slots);
    const CompiledMatrix dm(1, 1, {constant}, sampler.slots);
    const CompiledMatrix xm(k * dim, dim, cert, sampler.slots);
    const CompiledMatrix ym(k * dim, 1, cert_rhs, sampler.slots);

    VerificationReport report;
    report.mode = VerificationMode::Symbolic;
    report.tolerance = options.tolerance;
    std::mt19937_64 rng(options.sampling.seed);
    std::normal_distribution<double> normal;
    bool certificate = true;
    for (int attempt = 0; report.samples < options.points && attempt < options.points * (1 + options.sampling.retries); ++attempt) {
        const auto values = sampler.draw(rng, options.sampling);
        Eigen::MatrixXd av, bv, cv, dv, xv, yv;
        try {
            av = am(values);
            bv = bm(values);
            cv = cm(values);
            dv = dm(values);
            xv = xm(values);
            yv = ym(values);
        } catch (const DomainError&) {
            ++report.skipped;
            continue;
        }
        ++report.samples;
        const Eigen::VectorXd particular = av.completeOrthogonalDecomposition().solve(bv.col(0));
        const double mismatch = (av * particular - bv.col(0)).norm();
        if (mismatch > 1e-8 * (1.0 + bv.norm())) {
            throw Error("SOPDE constraint system is inconsistent at a sample point (residual " + std::to_string(mismatch) +
                        "); no SOPDE satisfies the field equations there");
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(av);
        lu.setThreshold(1e-10);
        Eigen::MatrixXd kernel = lu.dimensionOfKernel() > 0 ? Eigen::MatrixXd(lu.kernel()) : Eigen::MatrixXd(unknowns, 0);
        if (kernel.cols() > 0) kernel = Eigen::HouseholderQR<Eigen::MatrixXd>(kernel).householderQ() * Eigen::MatrixXd::Identity(unknowns, kernel.cols());
        report.null_space_dimension = std::max(report.null_space_dimension, static_cast<int>(kernel.cols()));

        double worst = std::abs(cv.row(0).dot(particular) + dv(0, 0));
        for (int p = 0; p < options.perturbations && kernel.cols() > 0; ++p) {
            Eigen::VectorXd xi(kernel.cols());
            for (Eigen::Index j = 0; j < xi.size(); ++j) xi(j) = normal(rng);
            Eigen::VectorXd dir = kernel * xi;
            dir /= dir.norm();
            worst = std::max(worst, std::abs(cv.row(0).dot(particular + dir) + dv(0, 0)));
        }
        report.residuals.push_back(worst);
        report.max_residual = std::max(report.max_residual, worst);

        const Eigen::VectorXd x = xv.completeOrthogonalDecomposition().solve(yv.col(0));
        if ((xv * x - yv.col(0)).norm() > 1e-8 * (1.0 + yv.norm())) certificate = false;
    }
    if (report.samples == 0) throw Error("every sample point hit a domain error; verification indeterminate");
    report.certificate = certificate;
    report.pass = report.max_residual < options.tolerance;
    if (!report.pass) {
        report.notes.push_back(
            "checked over every SOPDE satisfying the field equations, integrable or not; a law that holds only on "
            "integrable members is rejected");
    }
    if (certificate) report.notes.push_back("i_X d eta = dF is solvable at every sample point");
    return report;
}

GridNorms dissipation_residual(const Lagrangian& l, const DissipationLaw& f, const FieldSolution& sol)
{
    if (f.chart() != l.chart()) throw ChartError("objects live on different charts");
    const auto& c = *l.chart();
    sol.check(c, true);
    const GridSpec& g = sol.grid;
    std::vector<Symbol> slots = c.coordinates();
    std::vector<double> params;
    for (const auto& [s, v] : c.parameter_values()) {
        slots.push_back(s);
        params.push_back(v);
    }
    std::vector<CompiledExpression> fc;
    for (const auto& e : f.components()) fc.emplace_back(e, slots);
    Expression source;
    for (int a = 1; a <= c.k(); ++a) source += l.d_s(a) * f[a];
    const CompiledExpression sc(source, slots);

    std::vector<std::vector<double>> fv(static_cast<std::size_t>(c.k()), std::vector<double>(g.size()));
    std::vector<double> rhs(g.size());
    std::vector<double> values(slots.size());
    for (std::size_t node = 0; node < g.size(); ++node) {
        std::size_t p = 0;
        for (int i = 0; i < c.n(); ++i) values[p++] = sol.phi[static_cast<std::size_t>(i)][node];
        for (int i = 0; i < c.n() * c.k(); ++i) values[p++] = sol.jets[static_cast<std::size_t>(i)][node];
        for (int a = 0; a < c.k(); ++a) values[p++] = sol.s[static_cast<std::size_t>(a)][node];
        for (double v : params) values[p++] = v;
        for (int a = 0; a < c.k(); ++a) fv[static_cast<std::size_t>(a)][node] = fc[static_cast<std::size_t>(a)](values);
        rhs[node] = sc(values);
    }
    GridNorms norms;
    double cell = 1.0;
    for (const auto& ax : g.axes) cell *= ax.spacing();
    for (std::size_t node : g.interior_nodes(2)) {
        double div = 0.0;
        for (int a = 0; a < c.k(); ++a) div += centered_first(g, fv[static_cast<std::size_t>(a)], node, a);
        const double r = std::abs(div - rhs[node]);
        norms.linf = std::max(norms.linf, r);
        norms.l2 += r * r;
        ++norms.nodes;
    }
    norms.l2 = std::sqrt(norms.l2 * cell);
    return norms;
}

VerificationReport verify_on_solution(const Lagrangian& l, const DissipationLaw& f, const FieldSolution& sol, double constant)
{
    return verify_on_refinement(l, f, {sol}, constant);
}

VerificationReport verify_on_refinement(const Lagrangian& l, const DissipationLaw& f, const std::vector<FieldSolution>& levels,
                                        double constant)
{
    if (levels.empty()) throw SolverError("no solutions to verify");
    VerificationReport report;
    report.mode = VerificationMode::Numeric;
    report.pass = true;
    for (const auto& sol : levels) {
        const auto norms = dissipation_residual(l, f, sol);
        double h2 = 0.0;
        for (const auto& ax : sol.grid.axes) h2 += ax.spacing() * ax.spacing();
        const double bound = constant * h2;
        report.spacings.push_back(sol.grid.axes[0].spacing());
        report.norms.push_back(norms);
        report.residuals.push_back(norms.linf);
        report.bounds.push_back(bound);
        report.max_residual = std::max(report.max_residual, norms.linf);
        report.pass = report.pass && norms.linf < bound;
    }
    report.tolerance = report.bounds.back();
    if (levels.size() >= 2) {
        bool positive = true;
        for (double r : report.residuals) positive = positive && r > 0.0;
        if (positive) report.order = observed_order(report.spacings, report.residuals);
    }
    return report;
}

}  // namespace kcontact
