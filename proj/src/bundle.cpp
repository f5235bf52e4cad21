#include "kcontact/bundle.hpp"

#include "kcontact/errors.hpp"

#include <cmath>

namespace kcontact {

namespace {

void require_same(const ChartPtr& a, const ChartPtr& b)
{
    if (a != b) throw ChartError("objects live on different charts");
}

}  // namespace

BaseVectorField::BaseVectorField(ChartPtr chart, std::vector<Expression> components)
    : chart_(std::move(chart)), components_(std::move(components))
{
    if (static_cast<int>(components_.size()) != chart_->n()) throw ChartError("base field needs n components");
    for (const auto& c : components_) {
        chart_->check(c);
        for (const auto& s : free_symbols(c)) {
            if (s.kind != SymbolKind::Base && s.kind != SymbolKind::Parameter) {
                throw ChartError("base field component depends on " + to_string(s));
            }
        }
    }
}

BaseVectorField BaseVectorField::zero(ChartPtr chart)
{
    const auto n = static_cast<std::size_t>(chart->n());
    return BaseVectorField(std::move(chart), std::vector<Expression>(n));
}

BundleVectorField::BundleVectorField(ChartPtr chart)
    : chart_(std::move(chart)), c_(static_cast<std::size_t>(chart_->dim()))
{
}

BundleVectorField::BundleVectorField(ChartPtr chart, std::vector<Expression> components)
    : chart_(std::move(chart)), c_(std::move(components))
{
    if (static_cast<int>(c_.size()) != chart_->dim()) throw ChartError("vector field needs one component per coordinate");
    for (const auto& e : c_) chart_->check(e);
}

BundleVectorField& BundleVectorField::set(int index, Expression value)
{
    chart_->check(value);
    c_.at(static_cast<std::size_t>(index)) = std::move(value);
    return *this;
}

Expression BundleVectorField::apply(const Expression& f) const
{
    Expression out;
    for (int c = 0; c < chart_->dim(); ++c) {
        const Expression& xc = c_[static_cast<std::size_t>(c)];
        if (xc.is_zero()) continue;
        const Symbol& s = chart_->coordinate(c);
        if (!depends_on(f, s)) continue;
        out += xc * differentiate(f, s);
    }
    return out;
}

bool BundleVectorField::is_structurally_zero() const
{
    for (const auto& e : c_) {
        if (!e.is_zero()) return false;
    }
    return true;
}

BundleVectorField operator+(const BundleVectorField& a, const BundleVectorField& b)
{
    require_same(a.chart_, b.chart_);
    BundleVectorField out(a.chart_);
    for (std::size_t i = 0; i < a.c_.size(); ++i) out.c_[i] = a.c_[i] + b.c_[i];
    return out;
}

BundleVectorField operator-(const BundleVectorField& a, const BundleVectorField& b)
{
    require_same(a.chart_, b.chart_);
    BundleVectorField out(a.chart_);
    for (std::size_t i = 0; i < a.c_.size(); ++i) out.c_[i] = a.c_[i] - b.c_[i];
    return out;
}

BundleVectorField operator*(const Expression& f, const BundleVectorField& x)
{
    x.chart_->check(f);
    BundleVectorField out(x.chart_);
    for (std::size_t i = 0; i < x.c_.size(); ++i) out.c_[i] = f * x.c_[i];
    return out;
}

bool operator==(const BundleVectorField& a, const BundleVectorField& b)
{
    return a.chart_ == b.chart_ && a.c_ == b.c_;
}

KVectorField::KVectorField(ChartPtr chart, std::vector<BundleVectorField> fields)
    : chart_(std::move(chart)), fields_(std::move(fields))
{
    if (static_cast<int>(fields_.size()) != chart_->k()) throw ChartError("k-vector field needs k members");
    for (const auto& f : fields_) require_same(chart_, f.chart());
}

Sopde Sopde::from_fields(const ChartPtr& chart, const std::vector<BundleVectorField>& fields)
{
    if (static_cast<int>(fields.size()) != chart->k()) throw ChartError("sopde needs k members");
    return build(
        chart, [&](int i, int a, int b) { return fields[static_cast<std::size_t>(a - 1)].v(i, b); },
        [&](int b, int a) { return fields[static_cast<std::size_t>(a - 1)].s(b); });
}

OneForm::OneForm(ChartPtr chart) : chart_(std::move(chart)), c_(static_cast<std::size_t>(chart_->dim())) {}

OneForm::OneForm(ChartPtr chart, std::vector<Expression> coefficients)
    : chart_(std::move(chart)), c_(std::move(coefficients))
{
    if (static_cast<int>(c_.size()) != chart_->dim()) throw ChartError("one-form needs one coefficient per coordinate");
    for (const auto& e : c_) chart_->check(e);
}

OneForm& OneForm::set(int index, Expression value)
{
    chart_->check(value);
    c_.at(static_cast<std::size_t>(index)) = std::move(value);
    return *this;
}

OneForm operator+(const OneForm& a, const OneForm& b)
{
    require_same(a.chart_, b.chart_);
    OneForm out(a.chart_);
    for (std::size_t i = 0; i < a.c_.size(); ++i) out.c_[i] = a.c_[i] + b.c_[i];
    return out;
}

OneForm operator-(const OneForm& a, const OneForm& b)
{
    require_same(a.chart_, b.chart_);
    OneForm out(a.chart_);
    for (std::size_t i = 0; i < a.c_.size(); ++i) out.c_[i] = a.c_[i] - b.c_[i];
    return out;
}

OneForm operator*(const Expression& f, const OneForm& w)
{
    OneForm out(w.chart_);
    for (std::size_t i = 0; i < w.c_.size(); ++i) out.c_[i] = f * w.c_[i];
    return out;
}

bool operator==(const OneForm& a, const OneForm& b)
{
    return a.chart_ == b.chart_ && a.c_ == b.c_;
}

TwoForm::TwoForm(ChartPtr chart) : chart_(std::move(chart))
{
    const auto d = static_cast<std::size_t>(chart_->dim());
    upper_.resize(d * (d - 1) / 2);
}

std::size_t TwoForm::slot(int c, int d) const
{
    // Row-major upper triangle without the diagonal.
    const auto n = static_cast<std::size_t>(chart_->dim());
    const auto r = static_cast<std::size_t>(c);
    const auto s = static_cast<std::size_t>(d);
    return r * n - r * (r + 1) / 2 + (s - r - 1);
}

Expression TwoForm::get(int c, int d) const
{
    if (c < 0 || d < 0 || c >= chart_->dim() || d >= chart_->dim()) throw ChartError("two-form index out of range");
    if (c == d) return Expression();
    if (c < d) return upper_[slot(c, d)];
    return -upper_[slot(d, c)];
}

TwoForm& TwoForm::set(int c, int d, Expression value)
{
    if (c == d) throw ChartError("diagonal two-form entries are zero");
    if (c > d) {
        std::swap(c, d);
        value = -value;
    }
    chart_->check(value);
    upper_.at(slot(c, d)) = std::move(value);
    return *this;
}

bool TwoForm::is_structurally_zero() const
{
    for (const auto& e : upper_) {
        if (!e.is_zero()) return false;
    }
    return true;
}

bool operator==(const TwoForm& a, const TwoForm& b)
{
    return a.chart_ == b.chart_ && a.upper_ == b.upper_;
}

OneForm differential(const ChartPtr& chart, const Expression& f)
{
    chart->check(f);
    OneForm out(chart);
    for (int c = 0; c < chart->dim(); ++c) out.set(c, differentiate(f, chart->coordinate(c)));
    return out;
}

TwoForm exterior_derivative(const OneForm& w)
{
    const auto& chart = w.chart();
    TwoForm out(chart);
    for (int c = 0; c < chart->dim(); ++c) {
        for (int d = c + 1; d < chart->dim(); ++d) {
            out.set(c, d, differentiate(w[d], chart->coordinate(c)) - differentiate(w[c], chart->coordinate(d)));
        }
    }
    return out;
}

Expression interior_product(const BundleVectorField& x, const OneForm& w)
{
    require_same(x.chart(), w.chart());
    Expression out;
    for (int c = 0; c < x.chart()->dim(); ++c) out += x.component(c) * w[c];
    return out;
}

OneForm interior_product(const BundleVectorField& x, const TwoForm& w)
{
    require_same(x.chart(), w.chart());
    const auto& chart = x.chart();
    OneForm out(chart);
    for (int d = 0; d < chart->dim(); ++d) {
        Expression acc;
        for (int c = 0; c < chart->dim(); ++c) {
            if (c == d || x.component(c).is_zero()) continue;
            acc += x.component(c) * w.get(c, d);
        }
        out.set(d, acc);
    }
    return out;
}

Expression lie_derivative(const BundleVectorField& x, const Expression& f)
{
    return x.apply(f);
}

OneForm lie_derivative(const BundleVectorField& x, const OneForm& w)
{
    return interior_product(x, exterior_derivative(w)) + differential(x.chart(), interior_product(x, w));
}

BundleVectorField lie_bracket(const BundleVectorField& x, const BundleVectorField& y)
{
    require_same(x.chart(), y.chart());
    BundleVectorField out(x.chart());
    for (int c = 0; c < x.chart()->dim(); ++c) out.set(c, x.apply(y.component(c)) - y.apply(x.component(c)));
    return out;
}

BundleVectorField vertical_lift(const BaseVectorField& z, int alpha)
{
    const auto& chart = z.chart();
    if (alpha < 1 || alpha > chart->k()) throw ChartError("lift index out of range");
    BundleVectorField out(chart);
    for (int i = 1; i <= chart->n(); ++i) out.set_v(i, alpha, z[i]);
    return out;
}

BundleVectorField complete_lift(const BaseVectorField& z)
{
    const auto& chart = z.chart();
    BundleVectorField out(chart);
    for (int i = 1; i <= chart->n(); ++i) {
        out.set_q(i, z[i]);
        for (int a = 1; a <= chart->k(); ++a) {
            Expression acc;
            for (int j = 1; j <= chart->n(); ++j) acc += Expression(chart->v(j, a)) * differentiate(z[i], chart->q(j));
            out.set_v(i, a, acc);
        }
    }
    return out;
}

BundleVectorField liouville(const ChartPtr& chart)
{
    BundleVectorField out(chart);
    for (int i = 1; i <= chart->n(); ++i) {
        for (int a = 1; a <= chart->k(); ++a) out.set_v(i, a, Expression(chart->v(i, a)));
    }
    return out;
}

BundleVectorField apply_k_tangent(int alpha, const BundleVectorField& x)
{
    const auto& chart = x.chart();
    if (alpha < 1 || alpha > chart->k()) throw ChartError("k-tangent index out of range");
    BundleVectorField out(chart);
    for (int i = 1; i <= chart->n(); ++i) out.set_v(i, alpha, x.q(i));
    return out;
}

bool is_sopde(const KVectorField& x, const ZeroTestOptions& options)
{
    const auto& chart = x.chart();
    for (int a = 1; a <= x.k(); ++a) {
        for (int i = 1; i <= chart->n(); ++i) {
            if (!is_zero_like(is_zero(x[a].q(i) - Expression(chart->v(i, a)), options))) return false;
        }
    }
    return true;
}

IntegrabilityReport check_integrability(const KVectorField& x, const ZeroTestOptions& options)
{
    IntegrabilityReport report;
    for (int a = 1; a <= x.k(); ++a) {
        for (int b = a + 1; b <= x.k(); ++b) {
            BracketEntry entry{a, b, lie_bracket(x[a], x[b]), {}, ZeroVerdict::ProvenZero};
            for (const auto& c : entry.bracket.components()) {
                const ZeroVerdict v = is_zero(c, options);
                entry.components.push_back(v);
                entry.verdict = combine(entry.verdict, v);
            }
            report.verdict = combine(report.verdict, entry.verdict);
            report.pairs.push_back(std::move(entry));
        }
    }
    return report;
}

NumericField::NumericField(const BundleVectorField& x, const Point& parameters) : dim_(x.chart()->dim())
{
    std::vector<Symbol> slots = x.chart()->coordinates();
    for (const auto& [s, v] : parameters) {
        slots.push_back(s);
        params_.push_back(v);
    }
    for (const auto& c : x.components()) {
        zero_.push_back(c.is_zero());
        components_.emplace_back(c, std::span<const Symbol>(slots));
    }
}

void NumericField::rate(std::span<const double> y, std::span<double> out) const
{
    std::vector<double> buf(y.begin(), y.end());
    buf.insert(buf.end(), params_.begin(), params_.end());
    for (int c = 0; c < dim_; ++c) {
        const auto i = static_cast<std::size_t>(c);
        out[i] = zero_[i] ? 0.0 : components_[i](buf);
    }
}

std::vector<double> NumericField::flow(std::vector<double> y, double eps, int steps) const
{
    if (steps < 1) throw SolverError("flow needs at least one step");
    const double h = eps / steps;
    const auto d = static_cast<std::size_t>(dim_);
    std::vector<double> k1(d), k2(d), k3(d), k4(d), tmp(d);
    for (int s = 0; s < steps; ++s) {
        rate(y, k1);
        for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        rate(tmp, k2);
        for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        rate(tmp, k3);
        for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + h * k3[i];
        rate(tmp, k4);
        for (std::size_t i = 0; i < d; ++i) {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (!std::isfinite(y[i])) throw DomainError("flow diverged");
        }
    }
    return y;
}

}  // namespace kcontact
