#include "kcontact/dissipation.hpp"
#include "kcontact/errors.hpp"
#include "kcontact/solver.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace kcontact;
using kcontact::testing::P;

namespace {

const StringParams kString{1.0, 0.5, 0.1};

// Calibrated as twice the measured linf / (dt^2 + dx^2) on grids 51, 101, 201.
constexpr double kEnergyConstant = 6.5;
constexpr double kActionConstant = 16.0;

class Dissipation : public ::testing::Test {
protected:
    ChartPtr c = kcontact::testing::string_chart(true);
    Lagrangian l{c, kcontact::testing::string_lagrangian(*c)};

    DissipationLaw law(const std::string& t, const std::string& x) const { return DissipationLaw(c, {P(t, *c), P(x, *c)}); }
    DissipationLaw f1() const { return law("rho*v[q,1]", "-tau*v[q,2]"); }
    DissipationLaw f2() const { return law("s[1]/rho - 1/2*q*v[q,1]", "s[2]/rho + tau/(2*rho)*q*v[q,2]"); }

    static std::vector<FieldSolution> refinement(const Lagrangian& lag, const StringParams& p)
    {
        const auto m = manufactured_string_solution(p, 1.0);
        std::vector<FieldSolution> out;
        for (int n : {51, 101, 201}) out.push_back(reconstruct_s_fields(lag, solve_damped_string(p, square_grid(n), m.boundary_conditions())));
        return out;
    }
};

}  // namespace

TEST_F(Dissipation, LawValidation)
{
    EXPECT_THROW(DissipationLaw(c, {P("q", *c)}), ChartError);
    EXPECT_THROW(DissipationLaw(c, {P("w[q,1,1]", *c), P("0", *c)}), ChartError);
    EXPECT_THROW(DissipationLaw(c, {P("t", *c), P("0", *c)}), ChartError);
    EXPECT_EQ(f1() + f1(), Expression(2) * f1());
}

TEST_F(Dissipation, EnergyLawSymbolic)
{
    const auto r = verify_symbolic(l, f1());
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.mode, VerificationMode::Symbolic);
    EXPECT_EQ(r.samples, 32);
    EXPECT_LT(r.max_residual, 1e-10);
    EXPECT_EQ(r.null_space_dimension, 6);
    ASSERT_TRUE(r.certificate.has_value());
    EXPECT_TRUE(*r.certificate);
}

TEST_F(Dissipation, ActionLawSymbolic)
{
    const auto r = verify_symbolic(l, f2());
    EXPECT_TRUE(r.pass);
    EXPECT_LT(r.max_residual, 1e-10);
    // dF^t carries ds^t, which no contraction with d eta can produce.
    ASSERT_TRUE(r.certificate.has_value());
    EXPECT_FALSE(*r.certificate);
}

TEST_F(Dissipation, BrokenLawFails)
{
    const auto r = verify_symbolic(l, law("v[q,1]", "0"));
    EXPECT_FALSE(r.pass);
    EXPECT_GT(r.max_residual, 1e-1);
    EXPECT_FALSE(r.notes.empty());
}

TEST_F(Dissipation, Linearity)
{
    EXPECT_TRUE(verify_symbolic(l, Expression(2) * f1()).pass);
    EXPECT_TRUE(verify_symbolic(l, f1() + f2()).pass);
    EXPECT_TRUE(verify_symbolic(l, P("gamma", *c) * f2()).pass);
    EXPECT_FALSE(verify_symbolic(l, f1() + law("q", "0")).pass);
}

TEST_F(Dissipation, UnboundParameters)
{
    auto free = kcontact::testing::string_chart(false);
    Lagrangian lf(free, kcontact::testing::string_lagrangian(*free));
    EXPECT_TRUE(verify_symbolic(lf, DissipationLaw(free, {P("rho*v[q,1]", *free), P("-tau*v[q,2]", *free)})).pass);
    EXPECT_FALSE(verify_symbolic(lf, DissipationLaw(free, {P("v[q,1]", *free), P("0", *free)})).pass);
}

TEST_F(Dissipation, Deterministic)
{
    const auto a = verify_symbolic(l, law("v[q,1]", "q"));
    const auto b = verify_symbolic(l, law("v[q,1]", "q"));
    EXPECT_EQ(a.residuals, b.residuals);
    SymbolicOptions other;
    other.sampling.seed = 7;
    EXPECT_NE(verify_symbolic(l, law("v[q,1]", "q"), other).residuals, a.residuals);
}

TEST_F(Dissipation, InconsistentSystemThrows)
{
    Lagrangian degenerate(c, P("v[q,1] + q", *c));
    EXPECT_THROW(verify_symbolic(degenerate, DissipationLaw(c, {P("q", *c), P("0", *c)})), Error);
}

TEST_F(Dissipation, ChartMismatch)
{
    auto other = kcontact::testing::string_chart(true);
    EXPECT_THROW(verify_symbolic(l, DissipationLaw(other, {P("q", *other), P("0", *other)})), ChartError);
}

TEST_F(Dissipation, NumericRefinement)
{
    const auto levels = refinement(l, kString);
    const auto e = verify_on_refinement(l, f1(), levels, kEnergyConstant);
    EXPECT_EQ(e.mode, VerificationMode::Numeric);
    EXPECT_TRUE(e.pass);
    ASSERT_TRUE(e.order.has_value());
    EXPECT_GE(*e.order, 1.7);
    const auto a = verify_on_refinement(l, f2(), levels, kActionConstant);
    EXPECT_TRUE(a.pass);
    ASSERT_TRUE(a.order.has_value());
    EXPECT_GE(*a.order, 1.7);
    EXPECT_NEAR(a.norms.back().linf, 3.80432e-4, 1e-6);
    EXPECT_NEAR(e.norms.back().linf, 1.53115e-4, 1e-6);
}

TEST_F(Dissipation, NumericFalseLawPlateaus)
{
    const auto levels = refinement(l, kString);
    const auto r = verify_on_refinement(l, law("q", "0"), levels, kActionConstant);
    EXPECT_FALSE(r.pass);
    ASSERT_TRUE(r.order.has_value());
    EXPECT_LT(std::abs(*r.order), 0.5);
    const auto single = verify_on_solution(l, law("v[q,1]", "0"), levels.back(), kActionConstant);
    EXPECT_FALSE(single.pass);
    EXPECT_GT(single.max_residual, 1.0);
}

TEST_F(Dissipation, ConservativeLimit)
{
    auto cons = make_chart(1, 2, std::vector<std::string>{"q"},
                           std::vector<Parameter>{{"rho", 1.0}, {"tau", 0.5}, {"gamma", 0.0}}, std::vector<std::string>{"t", "x"});
    Lagrangian lc(cons, kcontact::testing::string_lagrangian(*cons));
    const DissipationLaw f(cons, {P("rho*v[q,1]", *cons), P("-tau*v[q,2]", *cons)});
    EXPECT_TRUE(verify_symbolic(lc, f).pass);
    const auto r = verify_on_refinement(lc, f, refinement(lc, StringParams{1.0, 0.5, 0.0}), kEnergyConstant);
    EXPECT_TRUE(r.pass);
    ASSERT_TRUE(r.order.has_value());
    EXPECT_GE(*r.order, 1.7);
}

TEST_F(Dissipation, NeedsActionFields)
{
    const auto m = manufactured_string_solution(kString, 1.0);
    const auto sol = solve_damped_string(kString, square_grid(21), m.boundary_conditions());
    EXPECT_THROW(verify_on_solution(l, f1(), sol, kEnergyConstant), SolverError);
}
