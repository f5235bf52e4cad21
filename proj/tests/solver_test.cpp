#include "kcontact/errors.hpp"
#include "kcontact/solver.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace kcontact;
using kcontact::testing::P;

namespace {

const StringParams kString{1.0, 0.5, 0.1};

struct Refinement {
    std::vector<double> h;
    std::vector<double> err;
};

double discrete_energy(const FieldSolution& sol, const StringParams& p, int level)
{
    const int nx = sol.grid.axes[1].nodes;
    const double dx = sol.grid.axes[1].spacing();
    double e = 0.0;
    for (int j = 0; j < nx; ++j) {
        const std::size_t node = static_cast<std::size_t>(level) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(j);
        const double density = 0.5 * p.rho * std::pow(sol.jet(1, 1)[node], 2) + 0.5 * p.tau * std::pow(sol.jet(1, 2)[node], 2);
        e += (j == 0 || j == nx - 1 ? 0.5 : 1.0) * density * dx;
    }
    return e;
}

FieldSolution zero_solution(const GridSpec& g, int n)
{
    FieldSolution sol;
    sol.grid = g;
    sol.n = n;
    sol.k = g.k();
    sol.phi.assign(static_cast<std::size_t>(n), std::vector<double>(g.size(), 0.0));
    compute_jets(sol);
    return sol;
}

}  // namespace

TEST(Grid, Validation)
{
    EXPECT_THROW(square_grid(3).validate(), SolverError);
    EXPECT_THROW((GridSpec{{Axis{1.0, 0.0, 10}}}.validate()), SolverError);
    EXPECT_NO_THROW(square_grid(5).validate());
    auto g = square_grid(5);
    EXPECT_EQ(g.size(), 25u);
    EXPECT_EQ(g.multi_index(7), (std::vector<int>{1, 2}));
    EXPECT_EQ(g.interior_nodes().size(), 9u);
}

TEST(DampedString, ManufacturedConvergence)
{
    const auto m = manufactured_string_solution(kString, 1.0);
    Refinement r;
    for (int n : {51, 101, 201}) {
        auto g = square_grid(n);
        auto sol = solve_damped_string(kString, g, m.boundary_conditions());
        r.h.push_back(g.axes[0].spacing());
        r.err.push_back(max_error(sol, {[&](double t, double x) { return m.phi(t, x); }}));
    }
    EXPECT_NEAR(observed_order(r.h, r.err), 2.0, 0.3);
    // Calibrated error constant: err <= C h^2 with C = 0.4 on this fixture.
    for (std::size_t i = 0; i < r.h.size(); ++i) EXPECT_LT(r.err[i], 0.4 * r.h[i] * r.h[i]);
}

TEST(DampedString, ZeroDataStaysZero)
{
    BoundaryConditions bc;
    auto zero = [](double, double) { return 0.0; };
    bc.initial = bc.initial_velocity = bc.left = bc.right = zero;
    auto sol = solve_damped_string(kString, square_grid(21), bc);
    for (double v : sol.phi[0]) EXPECT_EQ(v, 0.0);
}

TEST(DampedString, ConservativeEnergyDrift)
{
    const StringParams free{1.0, 0.5, 0.0};
    const auto m = manufactured_string_solution(free, 1.0);
    std::vector<double> drift;
    for (int n : {51, 101}) {
        auto g = square_grid(n);
        auto sol = solve_damped_string(free, g, m.boundary_conditions());
        drift.push_back(std::abs(discrete_energy(sol, free, n - 1) - discrete_energy(sol, free, 0)));
    }
    EXPECT_LT(drift[1], drift[0] / 3.0);
    EXPECT_LT(drift[1], 1e-3);
}

TEST(DampedString, Errors)
{
    const auto m = manufactured_string_solution(kString, 1.0);
    GridSpec coarse_t{{Axis{0.0, 1.0, 11}, Axis{0.0, 1.0, 101}}};
    EXPECT_THROW(solve_damped_string(kString, coarse_t, m.boundary_conditions()), SolverError);
    GridSpec short_t{{Axis{0.0, 1.0, 3}, Axis{0.0, 1.0, 11}}};
    EXPECT_THROW(solve_damped_string(kString, short_t, m.boundary_conditions()), SolverError);
    BoundaryConditions missing = m.boundary_conditions();
    missing.right = nullptr;
    EXPECT_THROW(solve_damped_string(kString, square_grid(11), missing), SolverError);
    EXPECT_THROW(manufactured_string_solution(StringParams{1.0, 0.01, 5.0}, 1.0), SolverError);
}

TEST(DampedString, Deterministic)
{
    const auto m = manufactured_string_solution(kString, 1.0);
    auto a = solve_damped_string(kString, square_grid(41), m.boundary_conditions());
    auto b = solve_damped_string(kString, square_grid(41), m.boundary_conditions());
    EXPECT_EQ(a.phi, b.phi);
    EXPECT_EQ(a.jets, b.jets);
}

TEST(DampedString, PeriodicStandingWave)
{
    const StringParams p{1.0, 1.0, 0.0};
    BoundaryConditions bc;
    bc.periodic = true;
    bc.initial = [](double, double x) { return std::sin(2 * std::numbers::pi * x); };
    bc.initial_velocity = [](double, double) { return 0.0; };
    auto sol = solve_damped_string(p, square_grid(101), bc);
    const double err = max_error(sol, {[](double t, double x) {
                                     return std::sin(2 * std::numbers::pi * x) * std::cos(2 * std::numbers::pi * t);
                                 }});
    EXPECT_LT(err, 2e-3);
}

TEST(Manufactured, SatisfiesStringEquationSymbolically)
{
    auto c = kcontact::testing::string_chart(false);
    auto sys = euler_lagrange_residuals(Lagrangian(c, kcontact::testing::string_lagrangian(*c)));
    // Frequency w and wave number p stay symbolic; tau is tied to them by the dispersion relation.
    const Expression w(Symbol::parameter("w")), p(Symbol::parameter("p"));
    const Expression rho(c->parameter("rho")), gamma(c->parameter("gamma"));
    const Expression t(c->t(1)), x(c->t(2));
    const Expression phi = exp(-gamma / 2 * t) * sin(p * x) * (cos(w * t) + gamma / (2 * w) * sin(w * t));
    auto residual_with_tau = [&](const Expression& tau) {
        std::map<Symbol, Expression> m{
            {c->q(1), phi},
            {c->a(1, 1), differentiate(phi, c->t(1))},
            {c->a(1, 2), differentiate(phi, c->t(2))},
            {c->w(1, 1, 1), differentiate(differentiate(phi, c->t(1)), c->t(1))},
            {c->w(1, 2, 2), differentiate(differentiate(phi, c->t(2)), c->t(2))},
            {c->parameter("tau"), tau},
        };
        return substitute(sys.field[0], m);
    };
    const Expression tau = rho * (pow(w, 2) + pow(gamma, 2) / 4) / pow(p, 2);
    EXPECT_TRUE(is_zero_like(is_zero(residual_with_tau(tau))));
    EXPECT_TRUE(is_nonzero_like(is_zero(residual_with_tau(rho * pow(w, 2) / pow(p, 2)))));
}

TEST(Manufactured, Limits)
{
    const auto free = manufactured_string_solution(StringParams{1.0, 0.5, 0.0}, 1.0);
    const double w = std::sqrt(0.5) * std::numbers::pi;
    EXPECT_NEAR(free.phi(0.3, 0.4), std::sin(std::numbers::pi * 0.4) * std::cos(w * 0.3), 1e-15);
    const auto m = manufactured_string_solution(kString, 1.0);
    EXPECT_NEAR(m.phi(0.0, 0.25), std::sin(std::numbers::pi / 4), 1e-15);
    EXPECT_EQ(m.phi_t(0.0, 0.25), 0.0);
    const double h = 1e-6;
    EXPECT_NEAR(m.phi_t(0.4, 0.3), (m.phi(0.4 + h, 0.3) - m.phi(0.4 - h, 0.3)) / (2 * h), 1e-8);
    EXPECT_NEAR(m.phi_x(0.4, 0.3), (m.phi(0.4, 0.3 + h) - m.phi(0.4, 0.3 - h)) / (2 * h), 1e-8);
}

TEST(Telegrapher, Coefficients)
{
    const TelegrapherParams p{1.0, 1.0, 0.1, 0.1};
    EXPECT_DOUBLE_EQ(p.gamma(), 0.2);
    EXPECT_DOUBLE_EQ(p.mass_squared(), 0.01);
    EXPECT_DOUBLE_EQ(p.speed_squared(), 1.0);
}

TEST(Telegrapher, LosslessMatchesWave)
{
    const TelegrapherParams p{0.5, 2.0, 0.0, 0.0};
    const auto m = ManufacturedWave(1.0, 0.0, 0.0, 1.0);
    auto a = solve_telegrapher(p, square_grid(41), m.boundary_conditions());
    auto b = solve_damped_string(StringParams{1.0, 1.0, 0.0}, square_grid(41), m.boundary_conditions());
    EXPECT_EQ(a.phi, b.phi);
}

TEST(Telegrapher, ManufacturedConvergence)
{
    const TelegrapherParams p{1.0, 1.0, 0.1, 0.1};
    const ManufacturedWave m(p.speed_squared(), p.gamma(), p.mass_squared(), 1.0);
    Refinement r;
    for (int n : {41, 81, 161}) {
        auto g = square_grid(n);
        auto sol = solve_telegrapher(p, g, m.boundary_conditions());
        r.h.push_back(g.axes[0].spacing());
        r.err.push_back(max_error(sol, {[&](double t, double x) { return m.phi(t, x); }}));
    }
    EXPECT_NEAR(observed_order(r.h, r.err), 2.0, 0.3);
}

TEST(CoupledStrings, DecouplesWithoutKernel)
{
    const auto m = ManufacturedWave(1.0, 0.1, 0.0, 1.0);
    const auto m2 = ManufacturedWave(1.0, 0.1, 0.0, 1.0, -0.5);
    auto c = solve_coupled_strings(CoupledParams{0.1, nullptr}, square_grid(41), {m.boundary_conditions(), m2.boundary_conditions()});
    auto a = solve_damped_string(StringParams{1.0, 1.0, 0.1}, square_grid(41), m.boundary_conditions());
    auto b = solve_damped_string(StringParams{1.0, 1.0, 0.1}, square_grid(41), m2.boundary_conditions());
    EXPECT_EQ(c.phi[0], a.phi[0]);
    EXPECT_EQ(c.phi[1], b.phi[0]);
}

TEST(CoupledStrings, QuadraticKernelIsLinear)
{
    const Symbol z = Symbol::independent("z");
    auto kernel = make_kernel("C", Expression(Number::rational(1, 2)) * pow(Expression(z), 2), z);
    ASSERT_TRUE(kernel->derivative_over_z_at_zero.has_value());
    EXPECT_DOUBLE_EQ(*kernel->derivative_over_z_at_zero, 1.0);
    const ManufacturedWave a(1.0, 0.1, 1.0, 1.0), b(1.0, 0.1, 1.0, 1.0, 0.5);
    Refinement r;
    for (int n : {41, 81, 161}) {
        auto g = square_grid(n);
        auto sol = solve_coupled_strings(CoupledParams{0.1, kernel}, g, {a.boundary_conditions(), b.boundary_conditions()});
        r.h.push_back(g.axes[0].spacing());
        r.err.push_back(max_error(sol, {[&](double t, double x) { return a.phi(t, x); }, [&](double t, double x) { return b.phi(t, x); }}));
    }
    EXPECT_NEAR(observed_order(r.h, r.err), 2.0, 0.3);
}

TEST(CoupledStrings, SymmetricDataStaysSymmetric)
{
    const auto m = ManufacturedWave(1.0, 0.1, 0.0, 1.0);
    auto sol = solve_coupled_strings(CoupledParams{0.1, make_sample_kernel("C")}, square_grid(41),
                                     {m.boundary_conditions(), m.boundary_conditions()});
    EXPECT_EQ(sol.phi[0], sol.phi[1]);
}

TEST(CoupledStrings, MissingLimitAtOrigin)
{
    BoundaryConditions bc;
    auto zero = [](double, double) { return 0.0; };
    bc.initial = bc.initial_velocity = bc.left = bc.right = zero;
    EXPECT_THROW(solve_coupled_strings(CoupledParams{0.1, make_sample_kernel("C")}, square_grid(11), {bc, bc}), SolverError);
}

TEST(DampedLaplace, ExponentialSolution)
{
    const double g1 = 0.7;
    auto exact = [&](double x, double) { return std::exp(-g1 * x); };
    Refinement r;
    for (int n : {21, 41, 81}) {
        auto g = square_grid(n);
        LaplaceStatus st;
        auto sol = solve_damped_laplace(LaplaceParams{{g1, 0.0}}, g, DirichletData{exact}, &st);
        EXPECT_TRUE(st.converged);
        r.h.push_back(g.axes[0].spacing());
        r.err.push_back(max_error(sol, {exact}));
    }
    EXPECT_NEAR(observed_order(r.h, r.err), 2.0, 0.3);
}

TEST(DampedLaplace, HarmonicAndConstant)
{
    auto harmonic = [](double x, double y) { return x * x - y * y; };
    auto sol = solve_damped_laplace(LaplaceParams{{0.0, 0.0}}, square_grid(31), DirichletData{harmonic});
    EXPECT_LT(max_error(sol, {harmonic}), 1e-8);
    auto constant = [](double, double) { return 2.5; };
    auto flat = solve_damped_laplace(LaplaceParams{{0.3, -0.2}}, square_grid(21), DirichletData{constant});
    EXPECT_LT(max_error(flat, {constant}), 1e-9);
}

TEST(DampedLaplace, NonConvergenceReported)
{
    LaplaceParams p{{0.0, 0.0}};
    p.max_iterations = 5;
    EXPECT_THROW(solve_damped_laplace(p, square_grid(31), DirichletData{[](double x, double) { return x; }}), SolverError);
}

class Reconstruction : public ::testing::Test {
protected:
    ChartPtr chart = kcontact::testing::string_chart();
    Lagrangian lagrangian{chart, kcontact::testing::string_lagrangian(*chart)};
};

TEST_F(Reconstruction, FirstAxisGaugeConstraint)
{
    const auto m = manufactured_string_solution(kString, 1.0);
    auto g = square_grid(51);
    auto sol = reconstruct_s_fields(lagrangian, solve_damped_string(kString, g, m.boundary_conditions()));
    for (double v : sol.s[1]) EXPECT_EQ(v, 0.0);
    const auto slots = chart->coordinates();
    std::vector<Symbol> with_params = slots;
    std::vector<double> params;
    for (const auto& [s, v] : chart->parameter_values()) {
        with_params.push_back(s);
        params.push_back(v);
    }
    const CompiledExpression lc(lagrangian.value(), with_params);
    auto l_at = [&](std::size_t node) {
        std::vector<double> vals{sol.phi[0][node], sol.jets[0][node], sol.jets[1][node], sol.s[0][node], sol.s[1][node]};
        vals.insert(vals.end(), params.begin(), params.end());
        return lc(vals);
    };
    const std::size_t st = g.stride(0);
    const double h = g.axes[0].spacing();
    for (std::size_t node : g.interior_nodes()) {
        const double residual = (sol.s[0][node + st] - sol.s[0][node - st]) / (2 * h) - l_at(node);
        const double estimate = std::abs(l_at(node + st) - 2 * l_at(node) + l_at(node - st)) / 4.0;
        EXPECT_LE(std::abs(residual), 4.0 * estimate + 1e-12) << "node " << node;
    }
}

TEST_F(Reconstruction, ZeroLagrangianGivesZero)
{
    Lagrangian zero(chart, Expression());
    auto sol = reconstruct_s_fields(zero, zero_solution(square_grid(9), 1));
    for (const auto& s : sol.s) {
        for (double v : s) EXPECT_EQ(v, 0.0);
    }
}

TEST_F(Reconstruction, FreeStandingWaveIntegral)
{
    auto free_chart = make_chart(1, 2, std::vector<std::string>{"q"},
                                 std::vector<Parameter>{{"rho", 1.0}, {"tau", 0.5}, {"gamma", 0.0}});
    Lagrangian free_l(free_chart, kcontact::testing::string_lagrangian(*free_chart));
    const StringParams free{1.0, 0.5, 0.0};
    const auto m = manufactured_string_solution(free, 1.0);
    const double w = m.omega(), pi = std::numbers::pi, tau = 0.5;
    auto exact = [&](double t, double x) {
        const double sx = std::pow(std::sin(pi * x), 2), cx = std::pow(std::cos(pi * x), 2);
        return 0.5 * tau * pi * pi *
               (sx * (t / 2 - std::sin(2 * w * t) / (4 * w)) - cx * (t / 2 + std::sin(2 * w * t) / (4 * w)));
    };
    std::vector<double> hs, errs;
    for (int n : {26, 51, 101}) {
        auto g = square_grid(n);
        auto sol = reconstruct_s_fields(free_l, m.sample(g));
        double err = 0.0;
        for (std::size_t node = 0; node < g.size(); ++node) {
            const auto idx = g.multi_index(node);
            err = std::max(err, std::abs(sol.s[0][node] - exact(g.axes[0].at(idx[0]), g.axes[1].at(idx[1]))));
        }
        hs.push_back(g.axes[0].spacing());
        errs.push_back(err);
    }
    EXPECT_LT(errs.back(), 1e-3);
    EXPECT_NEAR(observed_order(hs, errs), 2.0, 0.3);
}

TEST_F(Reconstruction, EvenSplitGauge)
{
    const auto m = manufactured_string_solution(kString, 1.0);
    auto g = square_grid(51);
    auto sol = reconstruct_s_fields(lagrangian, m.sample(g), Gauge::EvenSplit);
    auto r = el_residual_on_grid(lagrangian, sol);
    ASSERT_TRUE(r.divergence.has_value());
    EXPECT_LT(r.divergence->linf, 1e-2);
    EXPECT_NE(sol.s[1][g.size() - 1], 0.0);
}

TEST_F(Reconstruction, GaugeNames)
{
    EXPECT_EQ(parse_gauge("first-axis"), Gauge::FirstAxis);
    EXPECT_EQ(parse_gauge("even-split"), Gauge::EvenSplit);
    EXPECT_THROW(parse_gauge("coulomb"), SolverError);
}

TEST_F(Reconstruction, ElResidualOnGrid)
{
    const auto m = manufactured_string_solution(kString, 1.0);
    std::vector<double> hs, errs;
    for (int n : {26, 51, 101}) {
        auto g = square_grid(n);
        auto r = el_residual_on_grid(lagrangian, m.sample(g));
        EXPECT_FALSE(r.divergence.has_value());
        hs.push_back(g.axes[0].spacing());
        errs.push_back(r.field[0].linf);
    }
    EXPECT_NEAR(observed_order(hs, errs), 2.0, 0.3);

    auto g = square_grid(51);
    auto computed = solve_damped_string(kString, g, m.boundary_conditions());
    EXPECT_LT(el_residual_on_grid(lagrangian, computed).field[0].linf, 1e-9);

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> d(-1e-3, 1e-3);
    for (auto& v : computed.phi[0]) v += d(rng);
    EXPECT_GT(el_residual_on_grid(lagrangian, computed).field[0].linf, 0.1);
}
