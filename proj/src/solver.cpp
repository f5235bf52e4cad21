#include "kcontact/solver.hpp"

#include "kcontact/errors.hpp"

#include <cmath>
#include <numbers>

namespace kcontact {

namespace {

std::size_t at(int level, int nx, int j)
{
    return static_cast<std::size_t>(level) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(j);
}

FieldSolution empty_solution(const GridSpec& grid, int n)
{
    FieldSolution sol;
    sol.grid = grid;
    sol.n = n;
    sol.k = grid.k();
    sol.phi.assign(static_cast<std::size_t>(n), std::vector<double>(grid.size(), 0.0));
    return sol;
}

}  // namespace

GridSpec square_grid(int nodes, double t1, double ell)
{
    return GridSpec{{Axis{0.0, t1, nodes}, Axis{0.0, ell, nodes}}};
}

FieldSolution solve_wave_system(const WaveSystem& system, const GridSpec& grid, const std::vector<BoundaryConditions>& bcs)
{
    grid.validate();
    if (grid.k() != 2) throw SolverError("wave solvers need a t x x grid");
    if (static_cast<int>(bcs.size()) != system.components) throw SolverError("one set of boundary data per component");
    if (system.speed_squared <= 0.0) throw SolverError("wave speed must be positive");
    if (system.gamma < 0.0) throw SolverError("damping must be non-negative");
    const int nt = grid.axes[0].nodes;
    const int nx = grid.axes[1].nodes;
    const double dt = grid.axes[0].spacing();
    const double dx = grid.axes[1].spacing();
    const double courant = std::sqrt(system.speed_squared) * dt / dx;
    if (courant > 1.0 + 1e-12) {
        throw SolverError("CFL violation: c*dt/dx = " + std::to_string(courant) + " > 1");
    }
    for (const auto& bc : bcs) {
        if (!bc.initial || !bc.initial_velocity) throw SolverError("initial displacement and velocity are required");
        if (!bc.periodic && (!bc.left || !bc.right)) throw SolverError("Dirichlet data missing on an x boundary");
    }

    const int m = system.components;
    FieldSolution sol = empty_solution(grid, m);
    const double c2 = system.speed_squared;
    std::vector<double> node_values(static_cast<std::size_t>(m));

    auto neighbor = [&](const BoundaryConditions& bc, int j, int step) {
        int nj = j + step;
        if (bc.periodic) {
            if (nj < 0) nj = nx - 2;
            if (nj > nx - 1) nj = 1;
        }
        return nj;
    };
    auto interior_x = [&](const BoundaryConditions& bc, int j) { return bc.periodic || (j > 0 && j < nx - 1); };
    auto accel = [&](int level, int i, int j) {
        const auto& bc = bcs[static_cast<std::size_t>(i)];
        const auto& f = sol.phi[static_cast<std::size_t>(i)];
        const double left = f[at(level, nx, neighbor(bc, j, -1))];
        const double right = f[at(level, nx, neighbor(bc, j, 1))];
        const double mid = f[at(level, nx, j)];
        double a = c2 * (left - 2.0 * mid + right) / (dx * dx) - system.mass_squared * mid;
        if (system.source) {
            for (int c = 0; c < m; ++c) node_values[static_cast<std::size_t>(c)] = sol.phi[static_cast<std::size_t>(c)][at(level, nx, j)];
            a -= system.source(i, node_values);
        }
        return a;
    };

    const double t0 = grid.axes[0].lo;
    for (int i = 0; i < m; ++i) {
        const auto& bc = bcs[static_cast<std::size_t>(i)];
        for (int j = 0; j < nx; ++j) sol.phi[static_cast<std::size_t>(i)][at(0, nx, j)] = bc.initial(t0, grid.axes[1].at(j));
    }
    for (int level = 0; level + 1 < nt; ++level) {
        const double tn = grid.axes[0].at(level + 1);
        std::vector<std::vector<double>> next(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(nx)));
        for (int i = 0; i < m; ++i) {
            const auto& bc = bcs[static_cast<std::size_t>(i)];
            auto& f = sol.phi[static_cast<std::size_t>(i)];
            for (int j = 0; j < nx; ++j) {
                if (!interior_x(bc, j)) continue;
                const double a = accel(level, i, j);
                const double cur = f[at(level, nx, j)];
                double value = 0.0;
                if (level == 0) {
                    const double vel = bc.initial_velocity(t0, grid.axes[1].at(j));
                    value = cur + dt * vel + 0.5 * dt * dt * (a - system.gamma * vel);
                } else {
                    const double prev = f[at(level - 1, nx, j)];
                    const double damp = system.gamma * dt / 2.0;
                    value = (2.0 * cur - (1.0 - damp) * prev + dt * dt * a) / (1.0 + damp);
                }
                next[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = value;
            }
            if (bc.periodic) {
                next[static_cast<std::size_t>(i)][static_cast<std::size_t>(nx - 1)] = next[static_cast<std::size_t>(i)][0];
            } else {
                next[static_cast<std::size_t>(i)][0] = bc.left(tn, grid.axes[1].lo);
                next[static_cast<std::size_t>(i)][static_cast<std::size_t>(nx - 1)] = bc.right(tn, grid.axes[1].hi);
            }
        }
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < nx; ++j) {
                const double v = next[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                if (!std::isfinite(v)) throw SolverError("solution blew up at level " + std::to_string(level + 1));
                sol.phi[static_cast<std::size_t>(i)][at(level + 1, nx, j)] = v;
            }
        }
    }
    sol.provenance = Provenance::Computed;
    compute_jets(sol);
    return sol;
}

FieldSolution solve_damped_string(const StringParams& p, const GridSpec& grid, const BoundaryConditions& bc)
{
    if (p.rho <= 0.0 || p.tau <= 0.0) throw SolverError("rho and tau must be positive");
    WaveSystem w;
    w.speed_squared = p.speed_squared();
    w.gamma = p.gamma;
    return solve_wave_system(w, grid, {bc});
}

FieldSolution solve_telegrapher(const TelegrapherParams& p, const GridSpec& grid, const BoundaryConditions& bc)
{
    if (p.L <= 0.0 || p.C <= 0.0) throw SolverError("L and C must be positive");
    WaveSystem w;
    w.speed_squared = p.speed_squared();
    w.gamma = p.gamma();
    w.mass_squared = p.mass_squared();
    return solve_wave_system(w, grid, {bc});
}

FieldSolution solve_coupled_strings(const CoupledParams& p, const GridSpec& grid, const std::vector<BoundaryConditions>& bcs)
{
    WaveSystem w;
    w.components = 2;
    w.speed_squared = 1.0;
    w.gamma = p.gamma;
    if (p.coupling) {
        KernelPtr kernel = p.coupling;
        w.source = [kernel](int i, const std::vector<double>& phi) {
            const double z = std::hypot(phi[0], phi[1]);
            double ratio = 0.0;
            if (z < 1e-12) {
                if (!kernel->derivative_over_z_at_zero) {
                    throw SolverError("kernel " + kernel->name + " has no declared limit of C'(z)/z at z = 0");
                }
                ratio = *kernel->derivative_over_z_at_zero;
            } else {
                ratio = kernel->evaluate(1, z) / z;
            }
            return ratio * phi[static_cast<std::size_t>(i)];
        };
    }
    return solve_wave_system(w, grid, bcs);
}

FieldSolution solve_damped_laplace(const LaplaceParams& p, const GridSpec& grid, const DirichletData& bc, LaplaceStatus* status)
{
    grid.validate();
    if (grid.k() != 2) throw SolverError("damped Laplace solver needs a 2D grid");
    if (p.gamma.size() != 2) throw SolverError("damped Laplace needs two damping coefficients");
    if (!bc.value) throw SolverError("Dirichlet data required on the whole boundary");
    const int nx = grid.axes[0].nodes, ny = grid.axes[1].nodes;
    const double hx = grid.axes[0].spacing(), hy = grid.axes[1].spacing();
    FieldSolution sol = empty_solution(grid, 1);
    auto& f = sol.phi[0];
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) f[at(i, ny, j)] = bc.value(grid.axes[0].at(i), grid.axes[1].at(j));
        }
    }
    const double ce = 1.0 / (hx * hx) + p.gamma[0] / (2.0 * hx);
    const double cw = 1.0 / (hx * hx) - p.gamma[0] / (2.0 * hx);
    const double cn = 1.0 / (hy * hy) + p.gamma[1] / (2.0 * hy);
    const double cs = 1.0 / (hy * hy) - p.gamma[1] / (2.0 * hy);
    const double cc = 2.0 / (hx * hx) + 2.0 / (hy * hy);
    const double relax =
        p.relaxation > 0.0 ? p.relaxation : 2.0 / (1.0 + std::sin(std::numbers::pi / std::max(nx - 1, ny - 1)));
    auto correction = [&](int i, int j) {
        const double sum = ce * f[at(i + 1, ny, j)] + cw * f[at(i - 1, ny, j)] + cn * f[at(i, ny, j + 1)] + cs * f[at(i, ny, j - 1)];
        return sum / cc - f[at(i, ny, j)];
    };
    LaplaceStatus st;
    for (st.iterations = 1; st.iterations <= p.max_iterations; ++st.iterations) {
        for (int color = 0; color < 2; ++color) {
            for (int i = 1; i < nx - 1; ++i) {
                for (int j = 1 + (i + 1 + color) % 2; j < ny - 1; j += 2) f[at(i, ny, j)] += relax * correction(i, j);
            }
        }
        if (st.iterations % 10 == 0 || st.iterations == p.max_iterations) {
            st.residual = 0.0;
            for (int i = 1; i < nx - 1; ++i) {
                for (int j = 1; j < ny - 1; ++j) st.residual = std::max(st.residual, std::abs(correction(i, j)));
            }
            if (!std::isfinite(st.residual)) break;
            if (st.residual < p.tolerance) {
                st.converged = true;
                break;
            }
        }
    }
    if (status) *status = st;
    if (!st.converged) {
        throw SolverError("SOR did not converge: residual " + std::to_string(st.residual) + " after " +
                          std::to_string(p.max_iterations) + " iterations");
    }
    sol.provenance = Provenance::Computed;
    compute_jets(sol);
    return sol;
}

void compute_jets(FieldSolution& sol)
{
    const GridSpec& g = sol.grid;
    sol.jets.assign(static_cast<std::size_t>(sol.n * sol.k), std::vector<double>(g.size(), 0.0));
    for (int i = 0; i < sol.n; ++i) {
        const auto& f = sol.phi[static_cast<std::size_t>(i)];
        for (int a = 0; a < sol.k; ++a) {
            auto& out = sol.jets[static_cast<std::size_t>(i * sol.k + a)];
            const std::size_t st = g.stride(a);
            const double h = g.axes[static_cast<std::size_t>(a)].spacing();
            const int last = g.axes[static_cast<std::size_t>(a)].nodes - 1;
            for (std::size_t node = 0; node < g.size(); ++node) {
                const int idx = g.multi_index(node)[static_cast<std::size_t>(a)];
                if (idx == 0) {
                    out[node] = (-3.0 * f[node] + 4.0 * f[node + st] - f[node + 2 * st]) / (2.0 * h);
                } else if (idx == last) {
                    out[node] = (3.0 * f[node] - 4.0 * f[node - st] + f[node - 2 * st]) / (2.0 * h);
                } else {
                    out[node] = (f[node + st] - f[node - st]) / (2.0 * h);
                }
            }
        }
    }
}

Gauge parse_gauge(const std::string& name)
{
    if (name == "first-axis") return Gauge::FirstAxis;
    if (name == "even-split") return Gauge::EvenSplit;
    throw SolverError("unknown gauge '" + name + "' (expected first-axis or even-split)");
}

std::string to_string(Gauge g)
{
    return g == Gauge::FirstAxis ? "first-axis" : "even-split";
}

FieldSolution reconstruct_s_fields(const Lagrangian& l, FieldSolution sol, Gauge gauge)
{
    const auto& c = *l.chart();
    sol.check(c, false);
    std::vector<Symbol> slots = c.coordinates();
    std::vector<double> params;
    for (const auto& [s, v] : c.parameter_values()) {
        slots.push_back(s);
        params.push_back(v);
    }
    const CompiledExpression lc(l.value(), slots);
    const CompiledExpression ls(l.d_s(1), slots);
    const GridSpec& g = sol.grid;
    const int n = c.n(), k = c.k();
    sol.s.assign(static_cast<std::size_t>(k), std::vector<double>(g.size(), 0.0));
    std::vector<double> values(slots.size());
    auto load = [&](std::size_t node) {
        std::size_t p = 0;
        for (int i = 0; i < n; ++i) values[p++] = sol.phi[static_cast<std::size_t>(i)][node];
        for (int i = 0; i < n * k; ++i) values[p++] = sol.jets[static_cast<std::size_t>(i)][node];
        for (int a = 0; a < k; ++a) values[p++] = sol.s[static_cast<std::size_t>(a)][node];
        for (double v : params) values[p++] = v;
    };
    const std::size_t s1 = static_cast<std::size_t>(c.s_index(1));

    if (gauge == Gauge::FirstAxis) {
        const std::size_t st = g.stride(0);
        const double h = g.axes[0].spacing();
        auto& s = sol.s[0];
        for (std::size_t node = 0; node < g.size(); ++node) {
            if (g.multi_index(node)[0] == 0) continue;
            const std::size_t prev = node - st;
            load(prev);
            const double lprev = lc(values);
            double x = s[prev];
            load(node);
            for (int iter = 0; iter < 30; ++iter) {
                values[s1] = x;
                const double f = x - s[prev] - 0.5 * h * (lprev + lc(values));
                const double df = 1.0 - 0.5 * h * ls(values);
                const double step = f / df;
                x -= step;
                if (std::abs(step) <= 1e-15 * (1.0 + std::abs(x))) break;
            }
            s[node] = x;
        }
        return sol;
    }

    std::vector<double> lvals(g.size());
    for (int sweep = 0; sweep < 500; ++sweep) {
        for (std::size_t node = 0; node < g.size(); ++node) {
            load(node);
            lvals[node] = lc(values) / k;
        }
        double change = 0.0;
        for (int a = 0; a < k; ++a) {
            const std::size_t st = g.stride(a);
            const double h = g.axes[static_cast<std::size_t>(a)].spacing();
            auto& s = sol.s[static_cast<std::size_t>(a)];
            for (std::size_t node = 0; node < g.size(); ++node) {
                const double next = g.multi_index(node)[static_cast<std::size_t>(a)] == 0
                                        ? 0.0
                                        : s[node - st] + 0.5 * h * (lvals[node - st] + lvals[node]);
                change = std::max(change, std::abs(next - s[node]));
                s[node] = next;
            }
        }
        if (change < 1e-14) return sol;
    }
    throw SolverError("even-split gauge iteration did not converge");
}

ManufacturedWave::ManufacturedWave(double speed_squared, double gamma, double mass_squared, double ell, double amplitude)
    : c2_(speed_squared), gamma_(gamma), m2_(mass_squared), ell_(ell), amp_(amplitude), omega_(0.0)
{
    if (ell <= 0.0) throw SolverError("string length must be positive");
    const double k = std::numbers::pi / ell;
    const double w2 = c2_ * k * k + m2_ - gamma_ * gamma_ / 4.0;
    if (!(w2 > 0.0)) throw SolverError("parameters are not underdamped: c^2 pi^2/l^2 + m^2 <= gamma^2/4");
    omega_ = std::sqrt(w2);
}

double ManufacturedWave::phi(double t, double x) const
{
    const double k = std::numbers::pi / ell_;
    return amp_ * std::exp(-gamma_ * t / 2.0) * std::sin(k * x) *
           (std::cos(omega_ * t) + gamma_ / (2.0 * omega_) * std::sin(omega_ * t));
}

double ManufacturedWave::phi_t(double t, double x) const
{
    const double k = std::numbers::pi / ell_;
    return -amp_ * std::exp(-gamma_ * t / 2.0) * std::sin(k * x) * (omega_ + gamma_ * gamma_ / (4.0 * omega_)) *
           std::sin(omega_ * t);
}

double ManufacturedWave::phi_x(double t, double x) const
{
    const double k = std::numbers::pi / ell_;
    return amp_ * k * std::exp(-gamma_ * t / 2.0) * std::cos(k * x) *
           (std::cos(omega_ * t) + gamma_ / (2.0 * omega_) * std::sin(omega_ * t));
}

BoundaryConditions ManufacturedWave::boundary_conditions() const
{
    BoundaryConditions bc;
    const ManufacturedWave self = *this;
    bc.initial = [self](double t, double x) { return self.phi(t, x); };
    bc.initial_velocity = [self](double t, double x) { return self.phi_t(t, x); };
    bc.left = [self](double t, double x) { return self.phi(t, x); };
    bc.right = [self](double t, double x) { return self.phi(t, x); };
    return bc;
}

FieldSolution ManufacturedWave::sample(const GridSpec& grid) const
{
    grid.validate();
    if (grid.k() != 2) throw SolverError("manufactured wave needs a t x x grid");
    FieldSolution sol = empty_solution(grid, 1);
    sol.jets.assign(2, std::vector<double>(grid.size()));
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const auto idx = grid.multi_index(node);
        const double t = grid.axes[0].at(idx[0]);
        const double x = grid.axes[1].at(idx[1]);
        sol.phi[0][node] = phi(t, x);
        sol.jets[0][node] = phi_t(t, x);
        sol.jets[1][node] = phi_x(t, x);
    }
    sol.provenance = Provenance::Manufactured;
    return sol;
}

ManufacturedWave manufactured_string_solution(const StringParams& p, double ell)
{
    return ManufacturedWave(p.speed_squared(), p.gamma, 0.0, ell);
}

ResidualNorms el_residual_on_grid(const Lagrangian& l, const FieldSolution& sol)
{
    const auto& c = *l.chart();
    sol.check(c, false);
    const auto sys = euler_lagrange_residuals(l);
    std::vector<Expression> rows = sys.field;
    const bool with_s = !sol.s.empty();
    if (with_s) {
        sol.check(c, true);
        rows.push_back(sys.divergence);
    }
    auto norms = grid_norms(c, sol, rows);
    ResidualNorms out;
    if (with_s) {
        out.divergence = norms.back();
        norms.pop_back();
    }
    out.field = std::move(norms);
    return out;
}

double max_error(const FieldSolution& sol, const std::vector<std::function<double(double, double)>>& exact)
{
    if (sol.grid.k() != 2) throw SolverError("max_error needs a 2D grid");
    if (exact.size() != sol.phi.size()) throw SolverError("one exact solution per component");
    double err = 0.0;
    for (std::size_t node = 0; node < sol.grid.size(); ++node) {
        const auto idx = sol.grid.multi_index(node);
        const double t = sol.grid.axes[0].at(idx[0]);
        const double x = sol.grid.axes[1].at(idx[1]);
        for (std::size_t i = 0; i < exact.size(); ++i) err = std::max(err, std::abs(sol.phi[i][node] - exact[i](t, x)));
    }
    return err;
}

double observed_order(const std::vector<double>& spacings, const std::vector<double>& errors)
{
    if (spacings.size() != errors.size() || spacings.size() < 2) throw SolverError("order estimate needs >= 2 levels");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(spacings.size());
    for (std::size_t i = 0; i < spacings.size(); ++i) {
        const double x = std::log(spacings[i]);
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace kcontact
