#pragma once

#include "kcontact/bundle.hpp"
#include "kcontact/chart.hpp"
#include "kcontact/parser.hpp"

#include <random>
#include <vector>

namespace kcontact::testing {

inline ChartPtr string_chart(bool bound = true)
{
    auto p = [&](const char* name, double v) { return Parameter{name, bound ? std::optional<double>(v) : std::nullopt}; };
    return make_chart(1, 2, std::vector<std::string>{"q"}, std::vector<Parameter>{p("rho", 1.0), p("tau", 0.5), p("gamma", 0.1)},
                      std::vector<std::string>{"t", "x"});
}

inline ChartPtr coupled_chart()
{
    return make_chart(2, 2, std::vector<std::string>{"q1", "q2"}, std::vector<Parameter>{{"gamma", 0.1}},
                      std::vector<std::string>{"t", "x"}, std::vector<KernelPtr>{make_sample_kernel("C")});
}

inline Expression P(const std::string& text, const BundleChart& chart)
{
    return parse(text, chart);
}

inline Expression string_lagrangian(const BundleChart& chart)
{
    return parse("(rho/2)*v[q,1]^2 - (tau/2)*v[q,2]^2 - gamma*s[1]", chart);
}

/// SOPDE fixture for the damped string.
inline Sopde string_sopde(const ChartPtr& chart)
{
    const auto& c = *chart;
    auto second = [&](int, int a, int b) -> Expression {
        if (a == 1 && b == 1) return parse("-1/2*rho*v[q,1]^2 + gamma*s[1]", c);
        if (a == 2 && b == 2) return parse("gamma*rho/tau*v[q,1] - rho^2/(2*tau)*v[q,1]^2 + gamma*rho/tau*s[1]", c);
        return Expression();
    };
    auto action = [&](int upper, int lower) -> Expression {
        if (upper == 1 && lower == 1) return parse("1/2*rho*v[q,1]^2 - gamma*s[1]", c);
        if (upper == 2 && lower == 2) return parse("-1/2*tau*v[q,2]^2", c);
        return Expression();
    };
    return Sopde::build(chart, second, action);
}

/// Random polynomial in the given symbols: sums of products with small
/// integer coefficients and exponents.
inline Expression random_polynomial(std::mt19937_64& rng, const std::vector<Symbol>& symbols, int terms = 4,
                                    int max_degree = 3)
{
    std::uniform_int_distribution<int> coeff(-5, 5);
    std::uniform_int_distribution<int> deg(0, max_degree);
    std::uniform_int_distribution<std::size_t> pick(0, symbols.size() - 1);
    std::uniform_int_distribution<int> count(1, 3);
    Expression out;
    for (int t = 0; t < terms; ++t) {
        Expression m(coeff(rng));
        const int c = count(rng);
        for (int j = 0; j < c; ++j) m = m * pow(Expression(symbols[pick(rng)]), deg(rng));
        out = out + m;
    }
    return out;
}

inline Point random_point(std::mt19937_64& rng, const std::vector<Symbol>& symbols, double lo = -1.5, double hi = 1.5)
{
    std::uniform_real_distribution<double> d(lo, hi);
    Point p;
    for (const auto& s : symbols) p[s] = d(rng);
    return p;
}

}  // namespace kcontact::testing
