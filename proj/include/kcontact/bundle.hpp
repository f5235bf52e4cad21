#pragma once

#include "kcontact/chart.hpp"

#include <vector>

namespace kcontact {

/// Vector field on the base Q: components Z^i depending on q and parameters only.
class BaseVectorField {
public:
    BaseVectorField(ChartPtr chart, std::vector<Expression> components);
    static BaseVectorField zero(ChartPtr chart);

    const ChartPtr& chart() const noexcept { return chart_; }
    const Expression& operator[](int i) const { return components_.at(static_cast<std::size_t>(i - 1)); }
    const std::vector<Expression>& components() const noexcept { return components_; }

private:
    ChartPtr chart_;
    std::vector<Expression> components_;
};

/// Vector field on the bundle, one Expression per coordinate in chart order.
class BundleVectorField {
public:
    explicit BundleVectorField(ChartPtr chart);
    BundleVectorField(ChartPtr chart, std::vector<Expression> components);

    const ChartPtr& chart() const noexcept { return chart_; }
    const std::vector<Expression>& components() const noexcept { return c_; }
    const Expression& component(int index) const { return c_.at(static_cast<std::size_t>(index)); }
    const Expression& q(int i) const { return c_[static_cast<std::size_t>(chart_->q_index(i))]; }
    const Expression& v(int i, int alpha) const { return c_[static_cast<std::size_t>(chart_->v_index(i, alpha))]; }
    const Expression& s(int alpha) const { return c_[static_cast<std::size_t>(chart_->s_index(alpha))]; }

    BundleVectorField& set(int index, Expression value);
    BundleVectorField& set_q(int i, Expression value) { return set(chart_->q_index(i), std::move(value)); }
    BundleVectorField& set_v(int i, int alpha, Expression value) { return set(chart_->v_index(i, alpha), std::move(value)); }
    BundleVectorField& set_s(int alpha, Expression value) { return set(chart_->s_index(alpha), std::move(value)); }

    /// Derivation X(f).
    Expression apply(const Expression& f) const;
    bool is_structurally_zero() const;

    friend BundleVectorField operator+(const BundleVectorField& a, const BundleVectorField& b);
    friend BundleVectorField operator-(const BundleVectorField& a, const BundleVectorField& b);
    friend BundleVectorField operator*(const Expression& f, const BundleVectorField& x);
    friend bool operator==(const BundleVectorField& a, const BundleVectorField& b);

private:
    ChartPtr chart_;
    std::vector<Expression> c_;
};

/// (X_1, ..., X_k) on one chart.
class KVectorField {
public:
    KVectorField(ChartPtr chart, std::vector<BundleVectorField> fields);

    const ChartPtr& chart() const noexcept { return chart_; }
    int k() const noexcept { return static_cast<int>(fields_.size()); }
    /// 1-based.
    const BundleVectorField& operator[](int alpha) const { return fields_.at(static_cast<std::size_t>(alpha - 1)); }
    const std::vector<BundleVectorField>& fields() const noexcept { return fields_; }

private:
    ChartPtr chart_;
    std::vector<BundleVectorField> fields_;
};

/// k-vector field with q-components v^i_a forced by construction:
///     X_a = v^i_a d/dq^i + G^i_{ab} d/dv^i_b + G^b_a d/ds^b.
class Sopde : public KVectorField {
public:
    /// `second(i, a, b)` gives G^i_{ab}; `action(b, a)` gives G^b_a (upper index first).
    template <class Second, class Action>
    static Sopde build(const ChartPtr& chart, Second second, Action action)
    {
        std::vector<BundleVectorField> fields;
        for (int a = 1; a <= chart->k(); ++a) {
            BundleVectorField x(chart);
            for (int i = 1; i <= chart->n(); ++i) {
                x.set_q(i, Expression(chart->v(i, a)));
                for (int b = 1; b <= chart->k(); ++b) x.set_v(i, b, second(i, a, b));
            }
            for (int b = 1; b <= chart->k(); ++b) x.set_s(b, action(b, a));
            fields.push_back(std::move(x));
        }
        return Sopde(chart, std::move(fields));
    }

    /// Takes the non-q components of `fields` and overwrites the q-components.
    static Sopde from_fields(const ChartPtr& chart, const std::vector<BundleVectorField>& fields);

    const Expression& second(int i, int alpha, int beta) const { return (*this)[alpha].v(i, beta); }
    /// G^upper_lower.
    const Expression& action(int upper, int lower) const { return (*this)[lower].s(upper); }

private:
    Sopde(ChartPtr chart, std::vector<BundleVectorField> fields) : KVectorField(std::move(chart), std::move(fields)) {}
};

class OneForm {
public:
    explicit OneForm(ChartPtr chart);
    OneForm(ChartPtr chart, std::vector<Expression> coefficients);

    const ChartPtr& chart() const noexcept { return chart_; }
    const std::vector<Expression>& coefficients() const noexcept { return c_; }
    const Expression& operator[](int index) const { return c_.at(static_cast<std::size_t>(index)); }
    OneForm& set(int index, Expression value);

    friend OneForm operator+(const OneForm& a, const OneForm& b);
    friend OneForm operator-(const OneForm& a, const OneForm& b);
    friend OneForm operator*(const Expression& f, const OneForm& w);
    friend bool operator==(const OneForm& a, const OneForm& b);

private:
    ChartPtr chart_;
    std::vector<Expression> c_;
};

/// Antisymmetric table; only entries (c, d) with c < d are stored and
/// the form is sum_{c<d} T_{cd} dx^c ^ dx^d.
class TwoForm {
public:
    explicit TwoForm(ChartPtr chart);

    const ChartPtr& chart() const noexcept { return chart_; }
    /// Any ordered pair; (c, c) is zero and (d, c) is -T_{cd}.
    Expression get(int c, int d) const;
    TwoForm& set(int c, int d, Expression value);
    bool is_structurally_zero() const;

    friend bool operator==(const TwoForm& a, const TwoForm& b);

private:
    std::size_t slot(int c, int d) const;

    ChartPtr chart_;
    std::vector<Expression> upper_;
};

OneForm differential(const ChartPtr& chart, const Expression& f);
TwoForm exterior_derivative(const OneForm& w);
Expression interior_product(const BundleVectorField& x, const OneForm& w);
OneForm interior_product(const BundleVectorField& x, const TwoForm& w);
Expression lie_derivative(const BundleVectorField& x, const Expression& f);
/// Cartan formula i_X dw + d(i_X w).
OneForm lie_derivative(const BundleVectorField& x, const OneForm& w);
BundleVectorField lie_bracket(const BundleVectorField& x, const BundleVectorField& y);

BundleVectorField vertical_lift(const BaseVectorField& z, int alpha);
BundleVectorField complete_lift(const BaseVectorField& z);
BundleVectorField liouville(const ChartPtr& chart);
/// J^a(X): the v^i_a component becomes the q^i component of X.
BundleVectorField apply_k_tangent(int alpha, const BundleVectorField& x);

bool is_sopde(const KVectorField& x, const ZeroTestOptions& options = {});

struct BracketEntry {
    int alpha = 0;
    int beta = 0;
    BundleVectorField bracket;
    /// Per coordinate, chart order.
    std::vector<ZeroVerdict> components;
    ZeroVerdict verdict = ZeroVerdict::ProvenZero;
};

struct IntegrabilityReport {
    std::vector<BracketEntry> pairs;
    ZeroVerdict verdict = ZeroVerdict::ProvenZero;
    bool integrable() const { return is_zero_like(verdict); }
};

IntegrabilityReport check_integrability(const KVectorField& x, const ZeroTestOptions& options = {});

/// Bundle vector field compiled over chart coordinates followed by `parameters`.
class NumericField {
public:
    NumericField(const BundleVectorField& x, const Point& parameters);

    int dim() const noexcept { return dim_; }
    /// `y` holds coordinates; writes dy/de.
    void rate(std::span<const double> y, std::span<double> out) const;
    /// RK4 flow for parameter `eps` with `steps` equal substeps. Throws
    /// DomainError when the state stops being finite.
    std::vector<double> flow(std::vector<double> y, double eps, int steps = 8) const;

private:
    int dim_;
    std::vector<double> params_;
    std::vector<CompiledExpression> components_;
    std::vector<bool> zero_;
};

}  // namespace kcontact
