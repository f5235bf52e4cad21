#include "kcontact/errors.hpp"
#include "kcontact/expr.hpp"
#include "kcontact/parser.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace kcontact;
using kcontact::testing::P;

namespace {

struct StringSymbols {
    ChartPtr chart = kcontact::testing::string_chart();
    Symbol q = chart->q(1), vt = chart->v(1, 1), vx = chart->v(1, 2), st = chart->s(1), sx = chart->s(2);
    Symbol rho = Symbol::parameter("rho"), tau = Symbol::parameter("tau"), gamma = Symbol::parameter("gamma");
};

}  // namespace

TEST(Number, RationalizesDecimalLiterals)
{
    EXPECT_EQ(Number::from_double(0.1), Number::rational(1, 10));
    EXPECT_EQ(Number::from_double(-2.5), Number::rational(-5, 2));
    EXPECT_EQ(Number::from_double(3.0), Number(3));
    EXPECT_EQ(Number::from_double(1.0 / 3.0), Number::rational(1, 3));
    EXPECT_FALSE(Number::from_double(1e-15 * M_PI).is_exact());
    EXPECT_EQ(Number::rational(2, -4).to_string(), "-1/2");
}

TEST(Number, OverflowFallsBackToInexact)
{
    const Number big(INT64_MAX / 2);
    const Number p = big * Number(5);
    EXPECT_FALSE(p.is_exact());
    EXPECT_NEAR(p.to_double(), 5.0 * static_cast<double>(INT64_MAX / 2), 1e6);
}

TEST(Parse, DampedStringLagrangian)
{
    StringSymbols S;
    const Expression L = P("(rho/2)*v[q,1]^2 - (tau/2)*v[q,2]^2 - gamma*s[1]", *S.chart);
    const Expression half(Number::rational(1, 2));
    const Expression built = half * Expression(S.rho) * pow(Expression(S.vt), 2) -
                             half * Expression(S.tau) * pow(Expression(S.vx), 2) - Expression(S.gamma) * Expression(S.st);
    EXPECT_EQ(L, built);
    EXPECT_EQ(to_string(L), "1/2*v[q,1]^2*rho - 1/2*v[q,2]^2*tau - s[1]*gamma");
}

TEST(Parse, ZeroLiteral)
{
    StringSymbols S;
    EXPECT_TRUE(P("0", *S.chart).is_zero());
    EXPECT_EQ(to_string(P("0", *S.chart)), "0");
}

TEST(Parse, ProductPowerCanonicalization)
{
    StringSymbols S;
    EXPECT_EQ(P("v[q,1]*v[q,1]", *S.chart), P("v[q,1]^2", *S.chart));
    EXPECT_EQ(P("w[q,2,1]", *S.chart), P("w[q,1,2]", *S.chart));
}

TEST(Parse, RoundTripIsFixedPoint)
{
    auto chart = kcontact::testing::coupled_chart();
    const char* samples[] = {
        "-v[q1,1]^2 + 3*q1*q2 - 1/2",
        "1/(q1 + q2) - 2/(q1 - q2)^2",
        "sin(q1)^2 + cos(q2)*exp(-q1) - log(1 + q2^2)",
        "C(sqrt(q1^2 + q2^2)) - C_d2(q1)*s[2]",
        "-sqrt(q1^2 + 1)^3 + w[q2,1,2]*r[2,1]*a[q1,2]",
        "0.125*q1 - 1e-3*gamma + t*x",
        "-(q1 + 1)^2",
        "-1/q1",
    };
    for (const char* text : samples) {
        const Expression e = P(text, *chart);
        const std::string printed = to_string(e);
        const Expression again = P(printed, *chart);
        EXPECT_EQ(again, e) << text << " -> " << printed;
        EXPECT_EQ(to_string(again), printed);
    }
}

TEST(Parse, UnaryMinusBindsTighterThanPower)
{
    StringSymbols S;
    EXPECT_EQ(P("-q^2", *S.chart), P("q^2", *S.chart));
    EXPECT_EQ(P("-1*q^2", *S.chart), -P("q^2", *S.chart));
    EXPECT_EQ(to_string(-P("q^2", *S.chart)), "-1*q^2");
}

TEST(Parse, ErrorsCarryLocation)
{
    StringSymbols S;
    try {
        (void)P("rho *\n  (q + )", *S.chart);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2);
        EXPECT_EQ(e.column(), 8);
    }
    try {
        (void)P("q + zeta", *S.chart);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.column(), 5);
        EXPECT_NE(e.detail().find("undeclared identifier 'zeta'"), std::string::npos);
    }
    try {
        (void)P("v[q,3]", *S.chart);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.column(), 5);
        EXPECT_NE(e.detail().find("out of range"), std::string::npos);
    }
    EXPECT_THROW((void)P("v[p,1]", *S.chart), ParseError);
    EXPECT_THROW((void)P("q^-1", *S.chart), ParseError);
    EXPECT_THROW((void)P("", *S.chart), ParseError);
    EXPECT_THROW((void)P("foo(q)", *S.chart), ParseError);
    EXPECT_THROW((void)P("q / 0", *S.chart), ParseError);
}

TEST(Differentiate, PowerRule)
{
    StringSymbols S;
    EXPECT_EQ(differentiate(P("(rho/2)*v[q,1]^2", *S.chart), S.vt), P("rho*v[q,1]", *S.chart));
}

TEST(Differentiate, ActionDerivativeOfStringLagrangian)
{
    StringSymbols S;
    const Expression L = P("(rho/2)*v[q,1]^2 - (tau/2)*v[q,2]^2 - gamma*s[1]", *S.chart);
    EXPECT_EQ(differentiate(L, S.st), -Expression(S.gamma));
}

TEST(Differentiate, OpaqueKernelChainRule)
{
    auto chart = kcontact::testing::coupled_chart();
    const Expression e = P("C(sqrt(q1^2 + q2^2))", *chart);
    const Expression expected = P("C_d1(sqrt(q1^2 + q2^2))*q1/sqrt(q1^2 + q2^2)", *chart);
    EXPECT_EQ(differentiate(e, chart->q(1)), expected);
}

TEST(Differentiate, TranscendentalRules)
{
    StringSymbols S;
    const auto& c = *S.chart;
    EXPECT_EQ(differentiate(P("sin(q^2)", c), S.q), P("2*q*cos(q^2)", c));
    EXPECT_EQ(differentiate(P("log(q)", c), S.q), P("1/q", c));
    EXPECT_EQ(differentiate(P("exp(rho*q)", c), S.q), P("rho*exp(rho*q)", c));
    EXPECT_EQ(differentiate(P("1/(q + 1)", c), S.q), -pow(P("q + 1", c), -2));
    EXPECT_EQ(is_zero(differentiate(P("1/(q + 1)", c), S.q) - P("-1/(q + 1)^2", c)), ZeroVerdict::ProvenZero);
    EXPECT_EQ(differentiate(P("sqrt(q)", c), S.q), P("1/(2*sqrt(q))", c));
}

TEST(Simplify, SqrtPowersReduce)
{
    StringSymbols S;
    const auto& c = *S.chart;
    EXPECT_EQ(P("sqrt(q^2 + 1)^2", c), P("q^2 + 1", c));
    EXPECT_EQ(P("sqrt(q)^3", c), P("q*sqrt(q)", c));
    EXPECT_EQ(P("sin(0) + cos(0) + exp(0) + log(1) + sqrt(1)", c), Expression(3));
}

TEST(ZeroTest, KnownCases)
{
    StringSymbols S;
    const auto& c = *S.chart;
    EXPECT_EQ(is_zero(P("v[q,1]^2 - v[q,1]*v[q,1]", c)), ZeroVerdict::ProvenZero);
    EXPECT_EQ(is_zero(P("rho*v[q,1]", c)), ZeroVerdict::ProvenNonzero);
    EXPECT_EQ(is_zero(P("sin(q)^2 + cos(q)^2 - 1", c)), ZeroVerdict::ProbablyZero);
}

TEST(ZeroTest, TrigIdentityOracle)
{
    // Independent check with libm at 64 points in [-2, 2].
    std::mt19937_64 rng(0xC0FFEE);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 64; ++i) {
        const double x = d(rng);
        worst = std::max(worst, std::fabs(std::sin(x) * std::sin(x) + std::cos(x) * std::cos(x) - 1.0));
    }
    EXPECT_LT(worst, 1e-9);
}

TEST(ZeroTest, RationalFunctionsDecidedExactly)
{
    StringSymbols S;
    const auto& c = *S.chart;
    EXPECT_EQ(is_zero(P("(q + 1)/(q + 1) - 1", c)), ZeroVerdict::ProvenZero);
    EXPECT_EQ(is_zero(P("1/(q + 1) + 1/(q - 1) - 2*q/(q^2 - 1)", c)), ZeroVerdict::ProvenZero);
    EXPECT_EQ(is_zero(P("1/(q + 1) - 1/(q - 1)", c)), ZeroVerdict::ProvenNonzero);
    EXPECT_EQ(is_zero(P("rho/(tau*rho) - 1/tau", c)), ZeroVerdict::ProvenZero);
}

TEST(ZeroTest, TranscendentalNonzeroAndIndeterminate)
{
    StringSymbols S;
    const auto& c = *S.chart;
    EXPECT_EQ(is_zero(P("sin(q)^2 - cos(q)^2", c)), ZeroVerdict::ProbablyNonzero);
    EXPECT_EQ(is_zero(P("log(-1 - q^2)", c)), ZeroVerdict::Indeterminate);
    EXPECT_EQ(combine(ZeroVerdict::ProvenZero, ZeroVerdict::ProbablyZero), ZeroVerdict::ProbablyZero);
    EXPECT_EQ(combine(ZeroVerdict::ProbablyZero, ZeroVerdict::ProvenNonzero), ZeroVerdict::ProvenNonzero);
}

TEST(Evaluate, KnownCases)
{
    StringSymbols S;
    const auto& c = *S.chart;
    EXPECT_DOUBLE_EQ(evaluate(P("rho*v[q,1]^2", c), {{S.rho, 2.0}, {S.vt, 3.0}}), 18.0);
    const Expression L = P("(rho/2)*v[q,1]^2 - (tau/2)*v[q,2]^2 - gamma*s[1]", c);
    EXPECT_DOUBLE_EQ(evaluate(L, {{S.rho, 1.0}, {S.tau, 1.0}, {S.gamma, 0.1}, {S.vt, 1.0}, {S.vx, 1.0}, {S.st, 0.0}}), 0.0);
    EXPECT_THROW((void)evaluate(P("log(q)", c), {{S.q, -1.0}}), DomainError);
    EXPECT_THROW((void)evaluate(P("1/q", c), {{S.q, 0.0}}), DomainError);
    EXPECT_THROW((void)evaluate(P("rho*q", c), {{S.q, 1.0}}), MissingBinding);
}

TEST(Evaluate, CompiledMatchesTreeWalk)
{
    auto chart = kcontact::testing::coupled_chart();
    const Expression e = P("C_d1(sqrt(q1^2 + q2^2))*q1/sqrt(q1^2 + q2^2) - 3/(1 + q2^2) + exp(-gamma*q1)^2", *chart);
    const std::vector<Symbol> slots{chart->q(1), chart->q(2), Symbol::parameter("gamma")};
    const CompiledExpression f(e, slots);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20; ++i) {
        const Point p = kcontact::testing::random_point(rng, slots);
        const double vals[] = {p.at(slots[0]), p.at(slots[1]), p.at(slots[2])};
        EXPECT_DOUBLE_EQ(f(vals), evaluate(e, p));
    }
}

TEST(Properties, DerivativeMatchesCentralDifference)
{
    StringSymbols S;
    const std::vector<Symbol> syms{S.q, S.vt, S.vx, S.st, S.rho};
    std::mt19937_64 rng(0xC0FFEE);
    std::uniform_int_distribution<std::size_t> pick(0, syms.size() - 1);
    for (int trial = 0; trial < 100; ++trial) {
        const Expression e = kcontact::testing::random_polynomial(rng, syms);
        const Symbol x = syms[pick(rng)];
        Point p = kcontact::testing::random_point(rng, syms);
        const double h = 1e-5;
        Point plus = p, minus = p;
        plus[x] += h;
        minus[x] -= h;
        const double fd = (evaluate(e, plus) - evaluate(e, minus)) / (2 * h);
        const double exact = evaluate(differentiate(e, x), p);
        EXPECT_NEAR(exact, fd, 1e-6 * std::max(1.0, std::fabs(exact))) << to_string(e);
    }
}

TEST(Properties, NormalizeIsIdempotent)
{
    auto chart = kcontact::testing::coupled_chart();
    const std::vector<Symbol> syms{chart->q(1), chart->q(2), chart->v(1, 1), chart->s(2)};
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Expression a = kcontact::testing::random_polynomial(rng, syms);
        const Expression b = kcontact::testing::random_polynomial(rng, syms, 2, 2) + Expression(7);
        const Expression e = a / b + sin(a) * sqrt(b * b) - apply_kernel(chart->find_kernel("C"), a, 1) / (b + 1);
        const Expression n1 = normalize(e);
        EXPECT_EQ(normalize(n1), n1);
        EXPECT_EQ(n1, e);
    }
}

TEST(Properties, MixedPartialsCommute)
{
    StringSymbols S;
    const std::vector<Symbol> syms{S.q, S.vt, S.vx, S.st};
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const Expression e = kcontact::testing::random_polynomial(rng, syms) / (Expression(S.q) * Expression(S.q) + 1) +
                             cos(kcontact::testing::random_polynomial(rng, syms, 2, 2));
        const Symbol x = syms[trial % 4], y = syms[(trial + 1) % 4];
        EXPECT_EQ(normalize(differentiate(differentiate(e, x), y)), normalize(differentiate(differentiate(e, y), x)));
    }
}

TEST(Substitute, SimultaneousReplacement)
{
    StringSymbols S;
    const auto& c = *S.chart;
    const Expression e = P("q*v[q,1] + v[q,1]^2", c);
    const Expression out = substitute(e, {{S.q, Expression(S.vt)}, {S.vt, Expression(S.q)}});
    EXPECT_EQ(out, P("q*v[q,1] + q^2", c));
    EXPECT_EQ(free_symbols(out), (std::set<Symbol>{S.q, S.vt}));
    EXPECT_TRUE(depends_on(P("sin(q)", c), S.q));
    EXPECT_FALSE(depends_on(P("sin(rho)", c), S.q));
}
