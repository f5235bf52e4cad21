#pragma once

#include "kcontact/number.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace kcontact {

/// Coordinate roles on the phase bundle and its jet extension. The
/// enumerator order is the canonical print order of symbols.
enum class SymbolKind : std::uint8_t {
    JetSecond,    ///< w^i_{ab}: second derivatives of a field, a <= b
    JetAction,    ///< r^b_a: derivative of s^b along t^a
    JetFirst,     ///< a^i_a: first derivatives of a field
    Velocity,     ///< v^i_a
    Action,       ///< s^a
    Base,         ///< q^i
    Independent,  ///< t^a
    Parameter,
};

/// A named scalar variable. `index` is the 1-based base coordinate number for
/// q/v/a/w symbols; `alpha`/`beta` hold the field indices. For r^b_a,
/// `alpha` is the upper (action) index and `beta` the derivative direction.
struct Symbol {
    SymbolKind kind = SymbolKind::Parameter;
    int index = 0;
    int alpha = 0;
    int beta = 0;
    std::string name;

    friend auto operator<=>(const Symbol&, const Symbol&) = default;
    friend bool operator==(const Symbol&, const Symbol&) = default;

    static Symbol base(int i, std::string name) { return {SymbolKind::Base, i, 0, 0, std::move(name)}; }
    static Symbol velocity(int i, std::string name, int alpha) { return {SymbolKind::Velocity, i, alpha, 0, std::move(name)}; }
    static Symbol action(int alpha) { return {SymbolKind::Action, 0, alpha, 0, {}}; }
    static Symbol jet_first(int i, std::string name, int alpha) { return {SymbolKind::JetFirst, i, alpha, 0, std::move(name)}; }
    /// Mixed partials are symmetric; indices are stored sorted.
    static Symbol jet_second(int i, std::string name, int alpha, int beta)
    {
        if (beta < alpha) std::swap(alpha, beta);
        return {SymbolKind::JetSecond, i, alpha, beta, std::move(name)};
    }
    static Symbol jet_action(int upper, int lower) { return {SymbolKind::JetAction, 0, upper, lower, {}}; }
    static Symbol independent(std::string name) { return {SymbolKind::Independent, 0, 0, 0, std::move(name)}; }
    static Symbol parameter(std::string name) { return {SymbolKind::Parameter, 0, 0, 0, std::move(name)}; }
};

std::string to_string(const Symbol& s);

/// A named unary function whose derivatives are again named kernels. Only
/// numeric samples are known; symbolic rules never look inside.
struct Kernel {
    std::string name;
    /// Value of the `order`-th derivative at z.
    std::function<double(int order, double z)> evaluate;
    /// lim_{z->0} K'(z)/z, when the kernel declares it.
    std::optional<double> derivative_over_z_at_zero;
};
using KernelPtr = std::shared_ptr<const Kernel>;

enum class FunctionKind : std::uint8_t { Sin, Cos, Exp, Log, Sqrt, Kernel };

struct AtomNode;
using Atom = std::shared_ptr<const AtomNode>;

struct Factor {
    Atom atom;
    int exponent = 1;
};

struct Term;

/// Immutable symbolic scalar held in canonical expanded form: a sorted sum
/// of terms, each a coefficient times a sorted product of atom powers.
/// Atoms are symbols, function applications, or (only with negative
/// exponents) non-monomial sums. Equal canonical forms print identically.
class Expression {
public:
    Expression();
    Expression(const Number& value);                 // NOLINT(google-explicit-constructor)
    Expression(int value) : Expression(Number(value)) {}  // NOLINT(google-explicit-constructor)
    explicit Expression(const Symbol& symbol);

    static Expression constant(double value) { return Expression(Number::from_double(value)); }
    /// Canonicalizes an arbitrary term list.
    static Expression from_terms(std::vector<Term> terms);

    const std::vector<Term>& terms() const;
    bool is_zero() const { return terms().empty(); }
    /// The numeric value if the expression has no atoms.
    std::optional<Number> constant_value() const;
    /// The symbol if the expression is exactly one symbol with coefficient 1.
    std::optional<Symbol> as_symbol() const;

    friend std::strong_ordering compare(const Expression& a, const Expression& b);
    friend bool operator==(const Expression& a, const Expression& b) { return compare(a, b) == 0; }

    struct Impl;

private:
    friend class ExpressionBuilder;
    explicit Expression(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

struct Term {
    Number coefficient;
    std::vector<Factor> factors;
};

struct AtomNode {
    enum class Kind : std::uint8_t { Symbol, Function, Group };
    Kind kind = Kind::Symbol;
    Symbol symbol;
    FunctionKind function = FunctionKind::Sin;
    KernelPtr kernel;
    int order = 0;
    /// Function argument, or group body.
    Expression argument;
};

std::strong_ordering compare(const AtomNode& a, const AtomNode& b);

Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
/// Throws DomainError when b is structurally zero.
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression& operator+=(Expression& a, const Expression& b);
Expression& operator-=(Expression& a, const Expression& b);
Expression& operator*=(Expression& a, const Expression& b);
Expression pow(const Expression& base, int exponent);

Expression sin(const Expression& x);
Expression cos(const Expression& x);
Expression exp(const Expression& x);
Expression log(const Expression& x);
Expression sqrt(const Expression& x);
Expression apply_kernel(const KernelPtr& kernel, const Expression& x, int order = 0);
Expression apply_function(FunctionKind kind, const Expression& x, const KernelPtr& kernel = nullptr, int order = 0);

/// Exact partial derivative; every other symbol is independent of `x`.
Expression differentiate(const Expression& e, const Symbol& x);
/// Simultaneous substitution of symbols by expressions.
Expression substitute(const Expression& e, const std::map<Symbol, Expression>& replacements);
/// Rebuilds `e` from its parts through the ring operations.
Expression normalize(const Expression& e);

std::set<Symbol> free_symbols(const Expression& e);
bool depends_on(const Expression& e, const Symbol& x);
/// True when the expression contains a function atom or an inexact coefficient.
bool has_transcendental_parts(const Expression& e);

/// DSL text; parse(to_string(e)) reproduces e.
std::string to_string(const Expression& e);
std::ostream& operator<<(std::ostream& os, const Expression& e);
std::ostream& operator<<(std::ostream& os, const Symbol& s);

/// Values for every free symbol of an expression.
using Point = std::map<Symbol, double>;

/// Bottom-up IEEE evaluation. Throws MissingBinding or DomainError.
double evaluate(const Expression& e, const Point& point);

/// Expression flattened into a stack program over a fixed symbol slot order.
class CompiledExpression {
public:
    CompiledExpression() = default;
    /// Throws MissingBinding when `e` uses a symbol outside `slots`.
    CompiledExpression(const Expression& e, std::span<const Symbol> slots);

    /// Throws DomainError on a domain violation.
    double operator()(std::span<const double> values) const;

private:
    enum class Op : std::uint8_t { Const, Load, Add, Mul, Pow, Func };
    struct Instruction {
        Op op;
        FunctionKind function = FunctionKind::Sin;
        int arg = 0;
        double value = 0.0;
        const Kernel* kernel = nullptr;
    };
    void emit(const Expression& e, const std::map<Symbol, int>& slot_of);
    void emit_atom(const AtomNode& atom, const std::map<Symbol, int>& slot_of);

    std::vector<Instruction> program_;
    std::vector<KernelPtr> kernels_;
    std::size_t max_stack_ = 0;
};

enum class ZeroVerdict : std::uint8_t {
    ProvenZero,
    ProvenNonzero,
    ProbablyZero,
    ProbablyNonzero,
    /// Every sample point hit a domain error.
    Indeterminate,
};

std::string to_string(ZeroVerdict v);
inline bool is_zero_like(ZeroVerdict v) { return v == ZeroVerdict::ProvenZero || v == ZeroVerdict::ProbablyZero; }
inline bool is_nonzero_like(ZeroVerdict v) { return v == ZeroVerdict::ProvenNonzero || v == ZeroVerdict::ProbablyNonzero; }
/// Weakest-link combination: any nonzero wins, then indeterminate, then probable.
ZeroVerdict combine(ZeroVerdict a, ZeroVerdict b);

struct ZeroTestOptions {
    std::uint64_t seed = 0xC0FFEE;
    int samples = 64;
    int retries = 10;
    double tolerance = 1e-9;
    double lower = -2.0;
    double upper = 2.0;
};

/// Exact for expressions built from symbols with exact coefficients
/// (rational functions); randomized evaluation otherwise.
ZeroVerdict is_zero(const Expression& e, const ZeroTestOptions& options = {});

}  // namespace kcontact
