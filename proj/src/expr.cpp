#include "kcontact/expr.hpp"

#include "kcontact/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <random>

namespace kcontact {

struct Expression::Impl {
    std::vector<Term> terms;
};

namespace {

const std::shared_ptr<const Expression::Impl>& empty_impl();

std::strong_ordering compare_monomials(const std::vector<Factor>& a, const std::vector<Factor>& b)
{
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].atom != b[i].atom) {
            if (auto c = compare(*a[i].atom, *b[i].atom); c != 0) return c;
        }
        if (a[i].exponent != b[i].exponent) {
            return a[i].exponent > b[i].exponent ? std::strong_ordering::less : std::strong_ordering::greater;
        }
    }
    // Longer monomials first; the constant term is last.
    return b.size() <=> a.size();
}

bool atom_less(const Factor& a, const Factor& b)
{
    return a.atom != b.atom && compare(*a.atom, *b.atom) < 0;
}

bool same_atom(const Atom& a, const Atom& b)
{
    return a == b || compare(*a, *b) == 0;
}

Atom make_symbol_atom(const Symbol& s)
{
    auto node = std::make_shared<AtomNode>();
    node->kind = AtomNode::Kind::Symbol;
    node->symbol = s;
    return node;
}

Atom make_group_atom(const Expression& body)
{
    auto node = std::make_shared<AtomNode>();
    node->kind = AtomNode::Kind::Group;
    node->argument = body;
    return node;
}

Expression atom_power(const Atom& atom, int exponent);

bool is_special(const Factor& f)
{
    if (f.atom->kind == AtomNode::Kind::Group) return f.exponent > 0;
    if (f.atom->kind == AtomNode::Kind::Function && f.atom->function == FunctionKind::Sqrt) {
        return f.exponent >= 2 || f.exponent <= -2;
    }
    return false;
}

/// Sorts and merges factors; returns false when the coefficient is zero.
void merge_factors(std::vector<Factor>& fs)
{
    std::stable_sort(fs.begin(), fs.end(), atom_less);
    std::vector<Factor> out;
    out.reserve(fs.size());
    for (auto& f : fs) {
        if (!out.empty() && same_atom(out.back().atom, f.atom)) {
            out.back().exponent += f.exponent;
        } else {
            out.push_back(std::move(f));
        }
        if (out.back().exponent == 0) out.pop_back();
    }
    fs = std::move(out);
}

/// Sorts canonical monomial terms and merges equal monomials.
std::vector<Term> canonical_sum(std::vector<Term> terms)
{
    std::stable_sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
        return compare_monomials(a.factors, b.factors) < 0;
    });
    std::vector<Term> out;
    out.reserve(terms.size());
    for (auto& t : terms) {
        if (!out.empty() && compare_monomials(out.back().factors, t.factors) == 0) {
            out.back().coefficient = out.back().coefficient + t.coefficient;
        } else {
            if (!out.empty() && out.back().coefficient.is_zero()) out.pop_back();
            out.push_back(std::move(t));
        }
    }
    if (!out.empty() && out.back().coefficient.is_zero()) out.pop_back();
    return out;
}

}  // namespace

class ExpressionBuilder {
public:
    static Expression from_sorted(std::vector<Term> terms)
    {
        if (terms.empty()) return Expression();
        auto impl = std::make_shared<Expression::Impl>();
        impl->terms = std::move(terms);
        return Expression(std::shared_ptr<const Expression::Impl>(std::move(impl)));
    }

    /// Canonical expression for coefficient times a product of factor powers.
    static Expression term(Number c, std::vector<Factor> fs)
    {
        if (c.is_zero()) return Expression();
        merge_factors(fs);
        if (std::none_of(fs.begin(), fs.end(), is_special)) {
            std::vector<Term> one;
            one.push_back(Term{std::move(c), std::move(fs)});
            return from_sorted(std::move(one));
        }
        std::vector<Factor> plain;
        std::vector<Factor> special;
        for (auto& f : fs) (is_special(f) ? special : plain).push_back(std::move(f));
        std::vector<Term> one;
        one.push_back(Term{std::move(c), std::move(plain)});
        Expression result = from_sorted(std::move(one));
        for (const auto& f : special) {
            if (f.atom->kind == AtomNode::Kind::Group) {
                result = result * pow(f.atom->argument, f.exponent);
            } else {
                const int half = f.exponent / 2;
                const int rest = f.exponent % 2;
                result = result * pow(f.atom->argument, half);
                if (rest != 0) result = result * atom_power(f.atom, rest);
            }
        }
        return result;
    }

    static Expression single(const Atom& atom, int exponent)
    {
        std::vector<Factor> fs{Factor{atom, exponent}};
        return term(Number(1), std::move(fs));
    }
};

namespace {

Expression atom_power(const Atom& atom, int exponent)
{
    return ExpressionBuilder::single(atom, exponent);
}

const std::shared_ptr<const Expression::Impl>& empty_impl()
{
    static const std::shared_ptr<const Expression::Impl> impl = std::make_shared<Expression::Impl>();
    return impl;
}

}  // namespace

Expression::Expression() : impl_(empty_impl()) {}

Expression::Expression(const Number& value) : impl_(empty_impl())
{
    if (value.is_zero()) return;
    auto impl = std::make_shared<Impl>();
    impl->terms.push_back(Term{value, {}});
    impl_ = std::move(impl);
}

Expression::Expression(const Symbol& symbol)
{
    auto impl = std::make_shared<Impl>();
    impl->terms.push_back(Term{Number(1), {Factor{make_symbol_atom(symbol), 1}}});
    impl_ = std::move(impl);
}

Expression Expression::from_terms(std::vector<Term> terms)
{
    std::vector<Term> all;
    for (auto& t : terms) {
        Expression e = ExpressionBuilder::term(t.coefficient, std::move(t.factors));
        for (const auto& u : e.terms()) all.push_back(u);
    }
    return ExpressionBuilder::from_sorted(canonical_sum(std::move(all)));
}

const std::vector<Term>& Expression::terms() const
{
    return impl_->terms;
}

std::optional<Number> Expression::constant_value() const
{
    if (terms().empty()) return Number(0);
    if (terms().size() == 1 && terms()[0].factors.empty()) return terms()[0].coefficient;
    return std::nullopt;
}

std::optional<Symbol> Expression::as_symbol() const
{
    if (terms().size() != 1) return std::nullopt;
    const Term& t = terms()[0];
    if (!t.coefficient.is_one() || t.factors.size() != 1 || t.factors[0].exponent != 1) return std::nullopt;
    if (t.factors[0].atom->kind != AtomNode::Kind::Symbol) return std::nullopt;
    return t.factors[0].atom->symbol;
}

std::strong_ordering compare(const Expression& a, const Expression& b)
{
    if (a.impl_ == b.impl_) return std::strong_ordering::equal;
    const auto& ta = a.terms();
    const auto& tb = b.terms();
    const std::size_t n = std::min(ta.size(), tb.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (auto c = compare_monomials(ta[i].factors, tb[i].factors); c != 0) return c;
        if (auto c = compare(ta[i].coefficient, tb[i].coefficient); c != 0) return c;
    }
    return ta.size() <=> tb.size();
}

std::strong_ordering compare(const AtomNode& a, const AtomNode& b)
{
    if (&a == &b) return std::strong_ordering::equal;
    if (a.kind != b.kind) return a.kind <=> b.kind;
    switch (a.kind) {
    case AtomNode::Kind::Symbol:
        return a.symbol <=> b.symbol;
    case AtomNode::Kind::Function:
        if (a.function != b.function) return a.function <=> b.function;
        if (a.function == FunctionKind::Kernel) {
            if (auto c = a.kernel->name <=> b.kernel->name; c != 0) return c;
            if (auto c = a.order <=> b.order; c != 0) return c;
        }
        return compare(a.argument, b.argument);
    case AtomNode::Kind::Group:
        return compare(a.argument, b.argument);
    }
    return std::strong_ordering::equal;
}

Expression operator+(const Expression& a, const Expression& b)
{
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    std::vector<Term> all;
    all.reserve(a.terms().size() + b.terms().size());
    all.insert(all.end(), a.terms().begin(), a.terms().end());
    all.insert(all.end(), b.terms().begin(), b.terms().end());
    return ExpressionBuilder::from_sorted(canonical_sum(std::move(all)));
}

Expression operator-(const Expression& a)
{
    std::vector<Term> out = a.terms();
    for (auto& t : out) t.coefficient = -t.coefficient;
    return ExpressionBuilder::from_sorted(std::move(out));
}

Expression operator-(const Expression& a, const Expression& b)
{
    return a + (-b);
}

Expression operator*(const Expression& a, const Expression& b)
{
    if (a.is_zero() || b.is_zero()) return Expression();
    std::vector<Term> all;
    all.reserve(a.terms().size() * b.terms().size());
    for (const auto& x : a.terms()) {
        for (const auto& y : b.terms()) {
            std::vector<Factor> fs;
            fs.reserve(x.factors.size() + y.factors.size());
            fs.insert(fs.end(), x.factors.begin(), x.factors.end());
            fs.insert(fs.end(), y.factors.begin(), y.factors.end());
            Expression p = ExpressionBuilder::term(x.coefficient * y.coefficient, std::move(fs));
            all.insert(all.end(), p.terms().begin(), p.terms().end());
        }
    }
    return ExpressionBuilder::from_sorted(canonical_sum(std::move(all)));
}

Expression& operator+=(Expression& a, const Expression& b)
{
    a = a + b;
    return a;
}

Expression& operator-=(Expression& a, const Expression& b)
{
    a = a - b;
    return a;
}

Expression& operator*=(Expression& a, const Expression& b)
{
    a = a * b;
    return a;
}

namespace {

Expression invert(const Expression& e)
{
    const auto& ts = e.terms();
    if (ts.empty()) throw DomainError("division by zero");
    if (ts.size() == 1) {
        std::vector<Factor> fs = ts[0].factors;
        for (auto& f : fs) f.exponent = -f.exponent;
        return ExpressionBuilder::term(Number(1) / ts[0].coefficient, std::move(fs));
    }
    const Number lead = ts[0].coefficient;
    std::vector<Term> body = ts;
    for (auto& t : body) t.coefficient = t.coefficient / lead;
    Expression group = ExpressionBuilder::single(make_group_atom(ExpressionBuilder::from_sorted(std::move(body))), -1);
    return Expression(Number(1) / lead) * group;
}

}  // namespace

Expression operator/(const Expression& a, const Expression& b)
{
    if (b.is_zero()) throw DomainError("division by zero");
    if (a.is_zero()) return a;
    return a * invert(b);
}

Expression pow(const Expression& base, int exponent)
{
    if (exponent == 0) return Expression(1);
    if (exponent < 0) {
        const auto& ts = base.terms();
        if (ts.size() > 1) {
            const Number lead = ts[0].coefficient;
            std::vector<Term> body = ts;
            for (auto& t : body) t.coefficient = t.coefficient / lead;
            Atom g = make_group_atom(ExpressionBuilder::from_sorted(std::move(body)));
            return Expression(lead.pow(exponent)) * ExpressionBuilder::single(g, exponent);
        }
        return pow(invert(base), -exponent);
    }
    if (base.terms().size() == 1) {
        const Term& t = base.terms()[0];
        std::vector<Factor> fs = t.factors;
        for (auto& f : fs) f.exponent *= exponent;
        return ExpressionBuilder::term(t.coefficient.pow(exponent), std::move(fs));
    }
    Expression result(1);
    Expression sq = base;
    unsigned e = static_cast<unsigned>(exponent);
    while (e != 0) {
        if (e & 1u) result = result * sq;
        e >>= 1u;
        if (e != 0) sq = sq * sq;
    }
    return result;
}

Expression apply_function(FunctionKind kind, const Expression& x, const KernelPtr& kernel, int order)
{
    if (auto c = x.constant_value(); c && c->is_exact()) {
        if (c->is_zero()) {
            switch (kind) {
            case FunctionKind::Sin:
            case FunctionKind::Sqrt:
                return Expression();
            case FunctionKind::Cos:
            case FunctionKind::Exp:
                return Expression(1);
            default:
                break;
            }
        } else if (c->is_one()) {
            if (kind == FunctionKind::Log) return Expression();
            if (kind == FunctionKind::Sqrt) return Expression(1);
        }
    }
    if (kind == FunctionKind::Kernel && !kernel) throw Error("kernel application without a kernel");
    auto node = std::make_shared<AtomNode>();
    node->kind = AtomNode::Kind::Function;
    node->function = kind;
    node->kernel = kind == FunctionKind::Kernel ? kernel : nullptr;
    node->order = kind == FunctionKind::Kernel ? order : 0;
    node->argument = x;
    return ExpressionBuilder::single(node, 1);
}

Expression sin(const Expression& x) { return apply_function(FunctionKind::Sin, x); }
Expression cos(const Expression& x) { return apply_function(FunctionKind::Cos, x); }
Expression exp(const Expression& x) { return apply_function(FunctionKind::Exp, x); }
Expression log(const Expression& x) { return apply_function(FunctionKind::Log, x); }
Expression sqrt(const Expression& x) { return apply_function(FunctionKind::Sqrt, x); }

Expression apply_kernel(const KernelPtr& kernel, const Expression& x, int order)
{
    return apply_function(FunctionKind::Kernel, x, kernel, order);
}

namespace {

Expression atom_derivative(const AtomNode& atom, const Symbol& x)
{
    switch (atom.kind) {
    case AtomNode::Kind::Symbol:
        return atom.symbol == x ? Expression(1) : Expression();
    case AtomNode::Kind::Group:
        return differentiate(atom.argument, x);
    case AtomNode::Kind::Function: {
        const Expression du = differentiate(atom.argument, x);
        if (du.is_zero()) return du;
        const Expression& u = atom.argument;
        switch (atom.function) {
        case FunctionKind::Sin: return cos(u) * du;
        case FunctionKind::Cos: return -(sin(u) * du);
        case FunctionKind::Exp: return exp(u) * du;
        case FunctionKind::Log: return du / u;
        case FunctionKind::Sqrt: return du * Expression(Number::rational(1, 2)) * pow(sqrt(u), -1);
        case FunctionKind::Kernel: return apply_kernel(atom.kernel, u, atom.order + 1) * du;
        }
    }
    }
    return Expression();
}

bool atom_depends_on(const AtomNode& atom, const Symbol& x)
{
    if (atom.kind == AtomNode::Kind::Symbol) return atom.symbol == x;
    return depends_on(atom.argument, x);
}

}  // namespace

Expression differentiate(const Expression& e, const Symbol& x)
{
    std::vector<Term> all;
    for (const auto& t : e.terms()) {
        for (std::size_t j = 0; j < t.factors.size(); ++j) {
            const Factor& f = t.factors[j];
            if (!atom_depends_on(*f.atom, x)) continue;
            const Expression d = atom_derivative(*f.atom, x);
            if (d.is_zero()) continue;
            std::vector<Factor> rest = t.factors;
            rest[j].exponent -= 1;
            Expression part = ExpressionBuilder::term(t.coefficient * Number(f.exponent), std::move(rest)) * d;
            all.insert(all.end(), part.terms().begin(), part.terms().end());
        }
    }
    return ExpressionBuilder::from_sorted(canonical_sum(std::move(all)));
}

namespace {

Expression rebuild_atom(const AtomNode& atom, const std::map<Symbol, Expression>& rep, int exponent)
{
    switch (atom.kind) {
    case AtomNode::Kind::Symbol: {
        auto it = rep.find(atom.symbol);
        if (it != rep.end()) return pow(it->second, exponent);
        return pow(Expression(atom.symbol), exponent);
    }
    case AtomNode::Kind::Group:
        return pow(substitute(atom.argument, rep), exponent);
    case AtomNode::Kind::Function:
        return pow(apply_function(atom.function, substitute(atom.argument, rep), atom.kernel, atom.order), exponent);
    }
    return Expression();
}

}  // namespace

Expression substitute(const Expression& e, const std::map<Symbol, Expression>& replacements)
{
    Expression out;
    for (const auto& t : e.terms()) {
        Expression part(t.coefficient);
        for (const auto& f : t.factors) part = part * rebuild_atom(*f.atom, replacements, f.exponent);
        out = out + part;
    }
    return out;
}

Expression normalize(const Expression& e)
{
    return substitute(e, {});
}

namespace {

void collect_symbols(const Expression& e, std::set<Symbol>& out)
{
    for (const auto& t : e.terms()) {
        for (const auto& f : t.factors) {
            if (f.atom->kind == AtomNode::Kind::Symbol) {
                out.insert(f.atom->symbol);
            } else {
                collect_symbols(f.atom->argument, out);
            }
        }
    }
}

}  // namespace

std::set<Symbol> free_symbols(const Expression& e)
{
    std::set<Symbol> out;
    collect_symbols(e, out);
    return out;
}

bool depends_on(const Expression& e, const Symbol& x)
{
    for (const auto& t : e.terms()) {
        for (const auto& f : t.factors) {
            if (atom_depends_on(*f.atom, x)) return true;
        }
    }
    return false;
}

bool has_transcendental_parts(const Expression& e)
{
    for (const auto& t : e.terms()) {
        if (!t.coefficient.is_exact()) return true;
        for (const auto& f : t.factors) {
            if (f.atom->kind == AtomNode::Kind::Function) return true;
            if (f.atom->kind == AtomNode::Kind::Group && has_transcendental_parts(f.atom->argument)) return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------- printing

std::string to_string(const Symbol& s)
{
    const auto i = [](int v) { return std::to_string(v); };
    switch (s.kind) {
    case SymbolKind::Base:
    case SymbolKind::Independent:
    case SymbolKind::Parameter:
        return s.name;
    case SymbolKind::Velocity:
        return "v[" + s.name + "," + i(s.alpha) + "]";
    case SymbolKind::Action:
        return "s[" + i(s.alpha) + "]";
    case SymbolKind::JetFirst:
        return "a[" + s.name + "," + i(s.alpha) + "]";
    case SymbolKind::JetSecond:
        return "w[" + s.name + "," + i(s.alpha) + "," + i(s.beta) + "]";
    case SymbolKind::JetAction:
        return "r[" + i(s.alpha) + "," + i(s.beta) + "]";
    }
    return s.name;
}

namespace {

std::string function_name(const AtomNode& atom)
{
    switch (atom.function) {
    case FunctionKind::Sin: return "sin";
    case FunctionKind::Cos: return "cos";
    case FunctionKind::Exp: return "exp";
    case FunctionKind::Log: return "log";
    case FunctionKind::Sqrt: return "sqrt";
    case FunctionKind::Kernel:
        return atom.order == 0 ? atom.kernel->name : atom.kernel->name + "_d" + std::to_string(atom.order);
    }
    return "?";
}

std::string atom_string(const AtomNode& atom)
{
    switch (atom.kind) {
    case AtomNode::Kind::Symbol: return to_string(atom.symbol);
    case AtomNode::Kind::Function: return function_name(atom) + "(" + to_string(atom.argument) + ")";
    case AtomNode::Kind::Group: return "(" + to_string(atom.argument) + ")";
    }
    return "?";
}

std::string power_string(const AtomNode& atom, int exponent)
{
    std::string s = atom_string(atom);
    if (exponent != 1) s += "^" + std::to_string(exponent);
    return s;
}

std::string number_text(const Number& c)
{
    std::string s = c.magnitude_string();
    // Exponent notation would not parse as a single decimal literal.
    if (s.find_first_of("eE") != std::string::npos || s == "inf" || s == "nan") return "(" + s + ")";
    return s;
}

std::string term_string(const Term& t, bool leading)
{
    std::string out;
    const bool negative = t.coefficient.is_negative();
    std::vector<const Factor*> num, den;
    for (const auto& f : t.factors) (f.exponent > 0 ? num : den).push_back(&f);
    const bool unit = t.coefficient.abs().is_one();
    std::string body;
    if (!unit || num.empty()) body = number_text(t.coefficient.abs());
    for (const Factor* f : num) {
        if (!body.empty()) body += "*";
        body += power_string(*f->atom, f->exponent);
    }
    for (const Factor* f : den) body += "/" + power_string(*f->atom, -f->exponent);
    if (leading) {
        if (negative) {
            // A unary minus binds tighter than '^' in the grammar.
            if (unit && !num.empty() && num.front()->exponent != 1) {
                out = "-1*" + body;
            } else {
                out = "-" + body;
            }
        } else {
            out = body;
        }
    } else {
        out = (negative ? " - " : " + ") + body;
    }
    return out;
}

}  // namespace

std::string to_string(const Expression& e)
{
    if (e.terms().empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& t : e.terms()) {
        out += term_string(t, first);
        first = false;
    }
    return out;
}

std::ostream& operator<<(std::ostream& os, const Expression& e)
{
    return os << to_string(e);
}

std::ostream& operator<<(std::ostream& os, const Symbol& s)
{
    return os << to_string(s);
}

// -------------------------------------------------------------- evaluation

namespace {

double apply_numeric(FunctionKind kind, double x, const Kernel* kernel, int order)
{
    double r = 0.0;
    switch (kind) {
    case FunctionKind::Sin: r = std::sin(x); break;
    case FunctionKind::Cos: r = std::cos(x); break;
    case FunctionKind::Exp: r = std::exp(x); break;
    case FunctionKind::Log:
        if (!(x > 0.0)) throw DomainError("log of non-positive value");
        r = std::log(x);
        break;
    case FunctionKind::Sqrt:
        if (x < 0.0) throw DomainError("sqrt of negative value");
        r = std::sqrt(x);
        break;
    case FunctionKind::Kernel:
        if (!kernel->evaluate) throw MissingBinding("kernel " + kernel->name + " has no sample implementation");
        r = kernel->evaluate(order, x);
        break;
    }
    if (!std::isfinite(r)) throw DomainError("non-finite function value");
    return r;
}

double int_power(double x, int e)
{
    if (e < 0) {
        if (x == 0.0) throw DomainError("division by zero");
        return 1.0 / int_power(x, -e);
    }
    double result = 1.0;
    double b = x;
    unsigned u = static_cast<unsigned>(e);
    while (u != 0) {
        if (u & 1u) result *= b;
        u >>= 1u;
        if (u != 0) b *= b;
    }
    return result;
}

double evaluate_atom(const AtomNode& atom, const Point& point)
{
    switch (atom.kind) {
    case AtomNode::Kind::Symbol: {
        auto it = point.find(atom.symbol);
        if (it == point.end()) throw MissingBinding("no value for " + to_string(atom.symbol));
        return it->second;
    }
    case AtomNode::Kind::Group:
        return evaluate(atom.argument, point);
    case AtomNode::Kind::Function:
        return apply_numeric(atom.function, evaluate(atom.argument, point), atom.kernel.get(), atom.order);
    }
    return 0.0;
}

}  // namespace

double evaluate(const Expression& e, const Point& point)
{
    double sum = 0.0;
    for (const auto& t : e.terms()) {
        double v = t.coefficient.to_double();
        for (const auto& f : t.factors) v *= int_power(evaluate_atom(*f.atom, point), f.exponent);
        sum += v;
    }
    if (!std::isfinite(sum)) throw DomainError("non-finite value");
    return sum;
}

CompiledExpression::CompiledExpression(const Expression& e, std::span<const Symbol> slots)
{
    std::map<Symbol, int> slot_of;
    for (std::size_t i = 0; i < slots.size(); ++i) slot_of.emplace(slots[i], static_cast<int>(i));
    emit(e, slot_of);
    std::size_t depth = 0;
    for (const auto& ins : program_) {
        switch (ins.op) {
        case Op::Const:
        case Op::Load: ++depth; break;
        case Op::Add:
        case Op::Mul: --depth; break;
        default: break;
        }
        max_stack_ = std::max(max_stack_, depth);
    }
}

void CompiledExpression::emit(const Expression& e, const std::map<Symbol, int>& slot_of)
{
    if (e.terms().empty()) {
        program_.push_back({Op::Const});
        return;
    }
    bool first = true;
    for (const auto& t : e.terms()) {
        program_.push_back({Op::Const, FunctionKind::Sin, 0, t.coefficient.to_double()});
        for (const auto& f : t.factors) {
            emit_atom(*f.atom, slot_of);
            if (f.exponent != 1) program_.push_back({Op::Pow, FunctionKind::Sin, f.exponent});
            program_.push_back({Op::Mul});
        }
        if (!first) program_.push_back({Op::Add});
        first = false;
    }
}

void CompiledExpression::emit_atom(const AtomNode& atom, const std::map<Symbol, int>& slot_of)
{
    switch (atom.kind) {
    case AtomNode::Kind::Symbol: {
        auto it = slot_of.find(atom.symbol);
        if (it == slot_of.end()) throw MissingBinding("no slot for " + to_string(atom.symbol));
        program_.push_back({Op::Load, FunctionKind::Sin, it->second});
        return;
    }
    case AtomNode::Kind::Group:
        emit(atom.argument, slot_of);
        return;
    case AtomNode::Kind::Function:
        emit(atom.argument, slot_of);
        if (atom.kernel) kernels_.push_back(atom.kernel);
        program_.push_back({Op::Func, atom.function, atom.order, 0.0, atom.kernel.get()});
        return;
    }
}

double CompiledExpression::operator()(std::span<const double> values) const
{
    std::array<double, 64> small{};
    std::vector<double> large;
    double* stack = small.data();
    if (max_stack_ > small.size()) {
        large.resize(max_stack_);
        stack = large.data();
    }
    std::size_t top = 0;
    for (const auto& ins : program_) {
        switch (ins.op) {
        case Op::Const: stack[top++] = ins.value; break;
        case Op::Load: stack[top++] = values[static_cast<std::size_t>(ins.arg)]; break;
        case Op::Add: --top; stack[top - 1] += stack[top]; break;
        case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
        case Op::Pow: stack[top - 1] = int_power(stack[top - 1], ins.arg); break;
        case Op::Func: stack[top - 1] = apply_numeric(ins.function, stack[top - 1], ins.kernel, ins.arg); break;
        }
    }
    const double r = top == 0 ? 0.0 : stack[0];
    if (!std::isfinite(r)) throw DomainError("non-finite value");
    return r;
}

// -------------------------------------------------------------- zero test

std::string to_string(ZeroVerdict v)
{
    switch (v) {
    case ZeroVerdict::ProvenZero: return "proven-zero";
    case ZeroVerdict::ProvenNonzero: return "proven-nonzero";
    case ZeroVerdict::ProbablyZero: return "probably-zero";
    case ZeroVerdict::ProbablyNonzero: return "probably-nonzero";
    case ZeroVerdict::Indeterminate: return "indeterminate";
    }
    return "?";
}

ZeroVerdict combine(ZeroVerdict a, ZeroVerdict b)
{
    if (a == ZeroVerdict::ProvenNonzero || b == ZeroVerdict::ProvenNonzero) return ZeroVerdict::ProvenNonzero;
    if (a == ZeroVerdict::ProbablyNonzero || b == ZeroVerdict::ProbablyNonzero) return ZeroVerdict::ProbablyNonzero;
    if (a == ZeroVerdict::Indeterminate || b == ZeroVerdict::Indeterminate) return ZeroVerdict::Indeterminate;
    if (a == ZeroVerdict::ProbablyZero || b == ZeroVerdict::ProbablyZero) return ZeroVerdict::ProbablyZero;
    return ZeroVerdict::ProvenZero;
}

namespace {

bool has_groups(const Expression& e)
{
    for (const auto& t : e.terms()) {
        for (const auto& f : t.factors) {
            if (f.atom->kind == AtomNode::Kind::Group) return true;
        }
    }
    return false;
}

/// Numerator of `e` over the least common denominator of its negative powers.
Expression clear_denominators(const Expression& e)
{
    std::vector<Factor> den;
    for (const auto& t : e.terms()) {
        for (const auto& f : t.factors) {
            if (f.exponent >= 0) continue;
            auto it = std::find_if(den.begin(), den.end(), [&](const Factor& d) { return same_atom(d.atom, f.atom); });
            if (it == den.end()) {
                den.push_back({f.atom, -f.exponent});
            } else {
                it->exponent = std::max(it->exponent, -f.exponent);
            }
        }
    }
    Expression numerator;
    for (const auto& t : e.terms()) {
        std::vector<Factor> pos;
        for (const auto& f : t.factors) {
            if (f.exponent > 0) pos.push_back(f);
        }
        Expression part = ExpressionBuilder::term(t.coefficient, std::move(pos));
        for (const auto& d : den) {
            int have = 0;
            for (const auto& f : t.factors) {
                if (f.exponent < 0 && same_atom(f.atom, d.atom)) have = -f.exponent;
            }
            const int need = d.exponent - have;
            if (need == 0) continue;
            if (d.atom->kind == AtomNode::Kind::Group) {
                part = part * pow(d.atom->argument, need);
            } else {
                part = part * ExpressionBuilder::single(d.atom, need);
            }
        }
        numerator = numerator + part;
    }
    return numerator;
}

ZeroVerdict sample_zero(const Expression& e, const ZeroTestOptions& options)
{
    const std::set<Symbol> symbols = free_symbols(e);
    std::vector<Symbol> slots(symbols.begin(), symbols.end());
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> dist(options.lower, options.upper);
    std::vector<CompiledExpression> terms;
    terms.reserve(e.terms().size());
    for (const auto& t : e.terms()) {
        terms.emplace_back(ExpressionBuilder::from_sorted({t}), std::span<const Symbol>(slots));
    }
    std::vector<double> values(slots.size());
    int successes = 0;
    for (int s = 0; s < options.samples; ++s) {
        for (int attempt = 0; attempt <= options.retries; ++attempt) {
            for (auto& v : values) v = dist(rng);
            try {
                double sum = 0.0, scale = 0.0;
                for (const auto& c : terms) {
                    const double v = c(values);
                    sum += v;
                    scale += std::fabs(v);
                }
                ++successes;
                if (std::fabs(sum) > options.tolerance * scale) return ZeroVerdict::ProbablyNonzero;
                break;
            } catch (const DomainError&) {
                continue;
            }
        }
    }
    return successes == 0 ? ZeroVerdict::Indeterminate : ZeroVerdict::ProbablyZero;
}

}  // namespace

ZeroVerdict is_zero(const Expression& e, const ZeroTestOptions& options)
{
    if (e.terms().empty()) return ZeroVerdict::ProvenZero;
    if (!has_transcendental_parts(e)) {
        if (!has_groups(e)) return ZeroVerdict::ProvenNonzero;
        return is_zero(clear_denominators(e), options);
    }
    return sample_zero(e, options);
}

}  // namespace kcontact
