#pragma once

#include "kcontact/bundle.hpp"
#include "kcontact/grid.hpp"

#include <string>
#include <vector>

namespace kcontact {

/// L(q, v, s) on one chart. Throws ChartError when L mentions jet symbols,
/// independent variables or symbols the chart does not own.
class Lagrangian {
public:
    Lagrangian(ChartPtr chart, Expression value);

    const ChartPtr& chart() const noexcept { return chart_; }
    const Expression& value() const noexcept { return value_; }

    Expression d_q(int i) const { return differentiate(value_, chart_->q(i)); }
    Expression d_v(int i, int alpha) const { return differentiate(value_, chart_->v(i, alpha)); }
    Expression d_s(int alpha) const { return differentiate(value_, chart_->s(alpha)); }

private:
    ChartPtr chart_;
    Expression value_;
};

/// E_L = v^i_a dL/dv^i_a - L.
Expression energy(const Lagrangian& l);

/// eta^a = ds^a - (dL/dv^i_a) dq^i, one per a.
std::vector<OneForm> contact_forms(const Lagrangian& l);

/// g^{ab}_{ij}; rows and columns are indexed by (i-1)k + (a-1).
class HessianMatrix {
public:
    HessianMatrix(int n, int k, std::vector<Expression> entries);

    int size() const noexcept { return n_ * k_; }
    int index(int i, int alpha) const { return (i - 1) * k_ + (alpha - 1); }
    const Expression& operator()(int row, int col) const { return entries_.at(static_cast<std::size_t>(row * size() + col)); }
    const Expression& at(int i, int alpha, int j, int beta) const { return (*this)(index(i, alpha), index(j, beta)); }

private:
    int n_;
    int k_;
    std::vector<Expression> entries_;
};

HessianMatrix hessian(const Lagrangian& l);
/// Laplace expansion with memoized minors.
Expression determinant(const HessianMatrix& h);

enum class Regularity { Regular, Singular, Pointwise };
std::string to_string(Regularity r);

struct RegularityReport {
    Regularity verdict = Regularity::Singular;
    Expression determinant;
    ZeroVerdict determinant_verdict = ZeroVerdict::ProvenZero;
    /// Pointwise data; empty unless the determinant depends on coordinates.
    int samples = 0;
    int full_rank = 0;
    int min_rank = 0;
    int max_rank = 0;
    int positive = 0;
    int negative = 0;
};

RegularityReport is_regular(const Lagrangian& l, const ZeroTestOptions& options = {});

struct JetResidualSystem {
    /// R_i over q, a, w, r, s and parameters.
    std::vector<Expression> field;
    /// r^a_a - L with v replaced by a.
    Expression divergence;
};

JetResidualSystem euler_lagrange_residuals(const Lagrangian& l);

struct SopdeResiduals {
    std::vector<Expression> field;
    Expression trace;
    std::vector<ZeroVerdict> field_verdicts;
    ZeroVerdict trace_verdict = ZeroVerdict::ProvenZero;
    bool member() const;
};

/// G_a(dL/dv^i_a) - dL/dq^i - (dL/ds^a)(dL/dv^i_a) and G^a_a - L.
SopdeResiduals sopde_field_residuals(const Lagrangian& l, const Sopde& g, const ZeroTestOptions& options = {});

/// The four local families for an arbitrary k-vector field; each vanishes iff
/// X satisfies the Lagrangian field equations.
struct GeometricResiduals {
    /// (X^j_a - v^j_a) d2L/ds^b dv^j_a, one per b.
    std::vector<Expression> action;
    /// (X^j_a - v^j_a) g^{ab}_{ji}, at HessianMatrix::index(i, b).
    std::vector<Expression> velocity;
    /// The dq^i family, one per i.
    std::vector<Expression> base;
    /// L + (X^j_a - v^j_a) dL/dv^j_a - X^a_a.
    Expression energy;

    std::vector<Expression> all() const;
};

GeometricResiduals geometric_equation_residuals(const Lagrangian& l, const KVectorField& x);

/// Same families read off i_{X_a} d eta^a - dE_L - (dL/ds^a) eta^a and
/// -(i_{X_a} eta^a + E_L) through the form calculus.
GeometricResiduals geometric_residuals_from_forms(const Lagrangian& l, const KVectorField& x);

struct GridNorms {
    double linf = 0.0;
    double l2 = 0.0;
    std::size_t nodes = 0;
};

struct CompatibilityReport {
    /// Hessian-weighted second-jet and s-jet mismatch, max over i.
    GridNorms field;
    /// r^a_a - G^a_a.
    GridNorms trace;
};

/// Evaluates the mismatch between G on the prolonged solution and its
/// finite-difference jets. Throws Error when G is not in the Lagrangian class.
CompatibilityReport solution_sopde_compatibility(const Lagrangian& l, const Sopde& g, const FieldSolution& sol,
                                                 const ZeroTestOptions& options = {});

/// L-infinity and grid-weighted L2 norms of compiled residuals over the interior nodes.
std::vector<GridNorms> grid_norms(const BundleChart& chart, const FieldSolution& sol, const std::vector<Expression>& residuals);

/// v^i_a -> a^i_a.
Expression velocities_to_jets(const BundleChart& chart, const Expression& e);

}  // namespace kcontact
