#pragma once

#include "kcontact/lagrangian.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kcontact {

/// (F^1, ..., F^k) over bundle coordinates and parameters.
class DissipationLaw {
public:
    /// Throws ChartError on a wrong component count or jet/independent symbols.
    DissipationLaw(ChartPtr chart, std::vector<Expression> components);

    const ChartPtr& chart() const noexcept { return chart_; }
    const std::vector<Expression>& components() const noexcept { return f_; }
    /// 1-based.
    const Expression& operator[](int alpha) const { return f_.at(static_cast<std::size_t>(alpha - 1)); }

    friend DissipationLaw operator+(const DissipationLaw& a, const DissipationLaw& b);
    friend DissipationLaw operator*(const Expression& c, const DissipationLaw& f);
    friend bool operator==(const DissipationLaw& a, const DissipationLaw& b);

private:
    ChartPtr chart_;
    std::vector<Expression> f_;
};

enum class VerificationMode { Symbolic, Numeric };
std::string to_string(VerificationMode m);

struct SymbolicOptions {
    ZeroTestOptions sampling{};
    int points = 32;
    int perturbations = 8;
    double tolerance = 1e-8;
};

struct VerificationReport {
    VerificationMode mode = VerificationMode::Symbolic;
    bool pass = false;
    double tolerance = 0.0;
    double max_residual = 0.0;
    /// Symbolic: worst |R| per sample point. Numeric: L-infinity per refinement level.
    std::vector<double> residuals;

    // Symbolic only.
    int samples = 0;
    int skipped = 0;
    int null_space_dimension = 0;
    /// Whether i_X d eta^a = dF^a had a pointwise solution at every sample.
    std::optional<bool> certificate;

    // Numeric only.
    std::vector<double> spacings;
    std::vector<GridNorms> norms;
    std::vector<double> bounds;
    std::optional<double> order;

    std::vector<std::string> notes;
};

/// Tests G_a(F^a) = (dL/ds^a) F^a on the affine set of SOPDE data G^i_{ab},
/// G^b_a satisfying the Lagrangian field equations, sampled pointwise.
/// Throws Error when the constraint system is inconsistent at a sample point.
VerificationReport verify_symbolic(const Lagrangian& l, const DissipationLaw& f, const SymbolicOptions& options = {});

/// Discrete divergence of F along the prolonged solution minus (dL/ds^a F^a),
/// at interior nodes. Passes when L-infinity < constant * sum_a h_a^2.
VerificationReport verify_on_solution(const Lagrangian& l, const DissipationLaw& f, const FieldSolution& sol,
                                      double constant);

/// verify_on_solution over a refinement family, plus the observed order.
VerificationReport verify_on_refinement(const Lagrangian& l, const DissipationLaw& f, const std::vector<FieldSolution>& levels,
                                        double constant);

/// Pointwise divergence residual norms, without a verdict.
GridNorms dissipation_residual(const Lagrangian& l, const DissipationLaw& f, const FieldSolution& sol);

}  // namespace kcontact
