#pragma once

#include "kcontact/grid.hpp"
#include "kcontact/lagrangian.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kcontact {

using ScalarFunction = std::function<double(double t, double x)>;

/// Data for a 1+1 hyperbolic problem on [t0, t1] x [x0, x1]: Dirichlet values
/// on both x boundaries, or periodic in x.
struct BoundaryConditions {
    ScalarFunction initial;
    ScalarFunction initial_velocity;
    ScalarFunction left;
    ScalarFunction right;
    bool periodic = false;
};

/// Dirichlet data for a 2D elliptic problem, evaluated on the whole boundary.
struct DirichletData {
    std::function<double(double x, double y)> value;
};

struct StringParams {
    double rho = 1.0;
    double tau = 0.5;
    double gamma = 0.1;
    double speed_squared() const { return tau / rho; }
};

struct TelegrapherParams {
    double L = 1.0;
    double C = 1.0;
    double R = 0.1;
    double G = 0.1;
    double speed_squared() const { return 1.0 / (L * C); }
    double gamma() const { return (L * G + R * C) / (L * C); }
    double mass_squared() const { return R * G / (L * C); }
};

struct CoupledParams {
    double gamma = 0.1;
    KernelPtr coupling;
};

struct LaplaceParams {
    std::vector<double> gamma{0.0, 0.0};
    double relaxation = 0.0;  ///< 0 picks the optimal value for the grid
    double tolerance = 1e-10;
    int max_iterations = 200000;
};

/// phi_tt - c^2 phi_xx + gamma phi_t + m^2 phi + source_i(phi) = 0 for every
/// component. Throws SolverError on a CFL violation or a bad grid.
struct WaveSystem {
    int components = 1;
    double speed_squared = 1.0;
    double gamma = 0.0;
    double mass_squared = 0.0;
    /// (component, values of every component at the node) -> source term.
    std::function<double(int, const std::vector<double>&)> source;
};

FieldSolution solve_wave_system(const WaveSystem& system, const GridSpec& grid, const std::vector<BoundaryConditions>& bcs);

FieldSolution solve_damped_string(const StringParams& p, const GridSpec& grid, const BoundaryConditions& bc);
FieldSolution solve_telegrapher(const TelegrapherParams& p, const GridSpec& grid, const BoundaryConditions& bc);
/// Source C'(z) phi^i / z, z = |phi|; the kernel must declare C''(0) for z < 1e-12.
FieldSolution solve_coupled_strings(const CoupledParams& p, const GridSpec& grid, const std::vector<BoundaryConditions>& bcs);

struct LaplaceStatus {
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

/// Red-black SOR for sum_a (phi_aa + gamma_a phi_a) = 0 on a 2D grid. Throws
/// SolverError when the iteration does not converge.
FieldSolution solve_damped_laplace(const LaplaceParams& p, const GridSpec& grid, const DirichletData& bc,
                                   LaplaceStatus* status = nullptr);

/// Fills first jets from centered differences, second-order one-sided at the edges.
void compute_jets(FieldSolution& sol);

enum class Gauge { FirstAxis, EvenSplit };
Gauge parse_gauge(const std::string& name);
std::string to_string(Gauge g);

/// Integrates d s^a / d t^a = L along the solution. FirstAxis keeps s^a = 0 for
/// a > 1 and integrates s^1 along the first axis from s^1 = 0 with the
/// trapezoidal rule; EvenSplit gives each s^a the share L/k along its own axis.
FieldSolution reconstruct_s_fields(const Lagrangian& l, FieldSolution sol, Gauge gauge = Gauge::FirstAxis);

/// Damped wave with exact solution
///     phi = e^{-gamma t/2} sin(pi x / ell) (cos wt + gamma/(2w) sin wt),
///     w^2 = c^2 pi^2 / ell^2 + m^2 - gamma^2 / 4.
class ManufacturedWave {
public:
    /// Throws SolverError outside the underdamped regime.
    ManufacturedWave(double speed_squared, double gamma, double mass_squared, double ell, double amplitude = 1.0);

    double omega() const noexcept { return omega_; }
    double phi(double t, double x) const;
    double phi_t(double t, double x) const;
    double phi_x(double t, double x) const;
    BoundaryConditions boundary_conditions() const;
    /// Closed-form field with analytic jets on `grid` (axis 0 = t, axis 1 = x).
    FieldSolution sample(const GridSpec& grid) const;

private:
    double c2_, gamma_, m2_, ell_, amp_, omega_;
};

ManufacturedWave manufactured_string_solution(const StringParams& p, double ell);

struct ResidualNorms {
    std::vector<GridNorms> field;
    std::optional<GridNorms> divergence;
};

/// Euler-Lagrange residuals at interior nodes; the divergence row needs s.
ResidualNorms el_residual_on_grid(const Lagrangian& l, const FieldSolution& sol);

/// Max |phi^i - exact^i| over every node.
double max_error(const FieldSolution& sol, const std::vector<std::function<double(double, double)>>& exact);

/// Least-squares slope of log(error) against log(h).
double observed_order(const std::vector<double>& spacings, const std::vector<double>& errors);

/// Square t x x grid on [0, t1] x [0, ell] with `nodes` per axis.
GridSpec square_grid(int nodes, double t1 = 1.0, double ell = 1.0);

}  // namespace kcontact
