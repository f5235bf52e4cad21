#pragma once

#include "kcontact/dissipation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kcontact {

enum class SymmetryKind { Natural, KContact, CartanLike, Newtonoid, NewtonoidCorollary, DynamicalPrecheck };
std::string to_string(SymmetryKind k);

struct SymmetryCondition {
    std::string name;
    Expression residual;
    ZeroVerdict verdict = ZeroVerdict::ProvenZero;
};

struct SymmetryVerdict {
    SymmetryKind kind = SymmetryKind::Natural;
    std::vector<SymmetryCondition> conditions;
    /// Present only when every condition is zero-like and the class yields a law.
    std::optional<DissipationLaw> law;

    bool holds() const;
    /// Worst condition verdict: nonzero beats indeterminate beats probable zero.
    ZeroVerdict combined() const;
};

/// Z^C(L) = 0; law F^a = Z^{V_a}(L).
SymmetryVerdict is_natural_symmetry(const Lagrangian& l, const BaseVectorField& z, const ZeroTestOptions& options = {});

/// L_X eta^a = 0 componentwise and L_X E_L = 0; law F^a = -i_X eta^a.
SymmetryVerdict is_k_contact_symmetry(const Lagrangian& l, const BundleVectorField& x, const ZeroTestOptions& options = {});

/// L_Z eta^a - dg^a = 0 componentwise and L_Z E_L + g^a dL/ds^a = 0; law F^a = g^a - i_Z eta^a.
SymmetryVerdict cartan_like_check(const Lagrangian& l, const BundleVectorField& z, const std::vector<Expression>& g,
                                  const ZeroTestOptions& options = {});

/// G_a(X^i) - X^i_a = 0 for all i, a.
SymmetryVerdict is_newtonoid(const Sopde& g, const BundleVectorField& x, const ZeroTestOptions& options = {});

/// X = Z^C + K^a d/ds^a: X(L) = 0, then the k-contact conditions; law F^a = Z^{V_a}(L) - K^a.
SymmetryVerdict newtonoid_corollary_check(const Lagrangian& l, const BaseVectorField& z, const std::vector<double>& k_constants,
                                          const ZeroTestOptions& options = {});

/// Z^C + K^a d/ds^a.
BundleVectorField corollary_field(const BaseVectorField& z, const std::vector<double>& k_constants);

/// Necessary condition for a dynamical symmetry: sum_a i_{[X, G_a]} eta^a = 0.
SymmetryVerdict dynamical_precheck(const Lagrangian& l, const BundleVectorField& x, const KVectorField& g,
                                   const ZeroTestOptions& options = {});

struct ProbeOptions {
    int substeps = 8;
    int margin = 2;
    /// Baseline residual allowed on the input solution.
    double tolerance = 1e-1;
    int threads = 1;
};

struct ProbeFamily {
    std::string name;
    double baseline = 0.0;
    double transformed = 0.0;
    /// L-infinity of (transformed residual - baseline residual).
    double excess = 0.0;
};

struct ProbeReport {
    double epsilon = 0.0;
    /// "form" (one-form equation, max over components) and "action" (i_T eta^a = -E_L).
    std::vector<ProbeFamily> families;
    std::optional<SymmetryVerdict> precheck;

    const ProbeFamily& family(const std::string& name) const;
    double max_excess() const;
    double max_baseline() const;
};

/// Transports the prolonged grid along the RK4 flow of X for parameter eps and
/// compares the residuals of the section form of the field equations.
/// Throws SolverError on a too-small grid or a baseline above tolerance, and
/// DomainError when the flow diverges.
ProbeReport dynamical_symmetry_probe(const Lagrangian& l, const BundleVectorField& x, const FieldSolution& sol, double eps,
                                     const ProbeOptions& options = {}, const KVectorField* precheck_against = nullptr);

}  // namespace kcontact
