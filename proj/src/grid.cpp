#include "kcontact/grid.hpp"

#include "kcontact/errors.hpp"

namespace kcontact {

void GridSpec::validate() const
{
    if (axes.empty()) throw SolverError("grid has no axes");
    for (std::size_t a = 0; a < axes.size(); ++a) {
        if (axes[a].nodes < 5) {
            throw SolverError("grid too small: axis " + std::to_string(a + 1) + " has " + std::to_string(axes[a].nodes) +
                              " nodes, centered stencils need at least 5");
        }
        if (!(axes[a].hi > axes[a].lo)) throw SolverError("axis " + std::to_string(a + 1) + " has non-positive extent");
    }
}

std::size_t GridSpec::size() const
{
    std::size_t n = 1;
    for (const auto& a : axes) n *= static_cast<std::size_t>(a.nodes);
    return n;
}

std::size_t GridSpec::stride(int axis) const
{
    std::size_t s = 1;
    for (std::size_t a = static_cast<std::size_t>(axis) + 1; a < axes.size(); ++a) s *= static_cast<std::size_t>(axes[a].nodes);
    return s;
}

std::vector<int> GridSpec::multi_index(std::size_t flat) const
{
    std::vector<int> idx(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
        const auto n = static_cast<std::size_t>(axes[a].nodes);
        idx[a] = static_cast<int>(flat % n);
        flat /= n;
    }
    return idx;
}

bool GridSpec::interior(std::size_t flat, int margin) const
{
    const auto idx = multi_index(flat);
    for (std::size_t a = 0; a < axes.size(); ++a) {
        if (idx[a] < margin || idx[a] > axes[a].nodes - 1 - margin) return false;
    }
    return true;
}

std::vector<std::size_t> GridSpec::interior_nodes(int margin) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i) {
        if (interior(i, margin)) out.push_back(i);
    }
    return out;
}

std::string to_string(Provenance p)
{
    switch (p) {
    case Provenance::Computed: return "computed";
    case Provenance::Manufactured: return "manufactured";
    case Provenance::Loaded: return "loaded";
    }
    return "?";
}

void FieldSolution::check(const BundleChart& chart, bool need_s) const
{
    grid.validate();
    if (n != chart.n() || k != chart.k() || grid.k() != k) throw SolverError("solution shape does not match the chart");
    const std::size_t m = grid.size();
    if (phi.size() != static_cast<std::size_t>(n) || jets.size() != static_cast<std::size_t>(n * k)) {
        throw SolverError("solution is missing field or jet arrays");
    }
    for (const auto& f : phi) {
        if (f.size() != m) throw SolverError("field array size does not match the grid");
    }
    for (const auto& f : jets) {
        if (f.size() != m) throw SolverError("jet array size does not match the grid");
    }
    if (need_s) {
        if (s.size() != static_cast<std::size_t>(k)) throw SolverError("solution has no action fields; reconstruct them first");
        for (const auto& f : s) {
            if (f.size() != m) throw SolverError("action array size does not match the grid");
        }
    }
}

double centered_first(const GridSpec& grid, const std::vector<double>& f, std::size_t node, int axis)
{
    const std::size_t st = grid.stride(axis);
    return (f[node + st] - f[node - st]) / (2.0 * grid.axes[static_cast<std::size_t>(axis)].spacing());
}

double centered_second(const GridSpec& grid, const std::vector<double>& f, std::size_t node, int a, int b)
{
    const std::size_t sa = grid.stride(a);
    const double ha = grid.axes[static_cast<std::size_t>(a)].spacing();
    if (a == b) return (f[node + sa] - 2.0 * f[node] + f[node - sa]) / (ha * ha);
    const std::size_t sb = grid.stride(b);
    const double hb = grid.axes[static_cast<std::size_t>(b)].spacing();
    return (f[node + sa + sb] - f[node + sa - sb] - f[node - sa + sb] + f[node - sa - sb]) / (4.0 * ha * hb);
}

std::vector<Symbol> jet_slots(const BundleChart& chart)
{
    std::vector<Symbol> out = chart.coordinates();
    const int n = chart.n(), k = chart.k();
    for (int i = 1; i <= n; ++i) {
        for (int a = 1; a <= k; ++a) out.push_back(chart.a(i, a));
    }
    for (int i = 1; i <= n; ++i) {
        for (int a = 1; a <= k; ++a) {
            for (int b = a; b <= k; ++b) out.push_back(chart.w(i, a, b));
        }
    }
    for (int u = 1; u <= k; ++u) {
        for (int l = 1; l <= k; ++l) out.push_back(chart.r(u, l));
    }
    for (int a = 1; a <= k; ++a) out.push_back(chart.t(a));
    for (const auto& [sym, value] : chart.parameter_values()) out.push_back(sym);
    return out;
}

void fill_jet_values(const BundleChart& chart, const FieldSolution& sol, std::size_t node, std::vector<double>& out)
{
    const int n = chart.n(), k = chart.k();
    out.clear();
    for (int i = 1; i <= n; ++i) out.push_back(sol.phi[static_cast<std::size_t>(i - 1)][node]);
    for (int i = 1; i <= n; ++i) {
        for (int a = 1; a <= k; ++a) out.push_back(sol.jet(i, a)[node]);
    }
    for (int a = 1; a <= k; ++a) out.push_back(sol.s.empty() ? 0.0 : sol.s[static_cast<std::size_t>(a - 1)][node]);
    for (int i = 1; i <= n; ++i) {
        for (int a = 1; a <= k; ++a) out.push_back(sol.jet(i, a)[node]);
    }
    for (int i = 1; i <= n; ++i) {
        for (int a = 1; a <= k; ++a) {
            for (int b = a; b <= k; ++b) {
                out.push_back(centered_second(sol.grid, sol.phi[static_cast<std::size_t>(i - 1)], node, a - 1, b - 1));
            }
        }
    }
    for (int u = 1; u <= k; ++u) {
        for (int l = 1; l <= k; ++l) {
            out.push_back(sol.s.empty() ? 0.0 : centered_first(sol.grid, sol.s[static_cast<std::size_t>(u - 1)], node, l - 1));
        }
    }
    const auto idx = sol.grid.multi_index(node);
    for (int a = 0; a < k; ++a) out.push_back(sol.grid.axes[static_cast<std::size_t>(a)].at(idx[static_cast<std::size_t>(a)]));
    for (const auto& [sym, value] : chart.parameter_values()) out.push_back(value);
}

}  // namespace kcontact
