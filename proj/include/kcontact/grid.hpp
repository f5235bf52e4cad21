#pragma once

#include "kcontact/chart.hpp"

#include <string>
#include <vector>

namespace kcontact {

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    int nodes = 5;

    double spacing() const { return (hi - lo) / (nodes - 1); }
    double at(int j) const { return lo + (hi - lo) * j / (nodes - 1); }
};

/// Tensor grid, one axis per independent variable. Node (j_1, ..., j_k) is
/// stored at flat index ((j_1 * N_2) + j_2) * N_3 + ...; the first axis varies slowest.
struct GridSpec {
    std::vector<Axis> axes;

    /// Throws SolverError unless every axis has >= 5 nodes and positive spacing.
    void validate() const;
    int k() const { return static_cast<int>(axes.size()); }
    std::size_t size() const;
    std::size_t stride(int axis) const;
    std::vector<int> multi_index(std::size_t flat) const;
    /// True when every index has at least `margin` nodes to each boundary.
    bool interior(std::size_t flat, int margin = 1) const;
    std::vector<std::size_t> interior_nodes(int margin = 1) const;
};

enum class Provenance { Computed, Manufactured, Loaded };
std::string to_string(Provenance p);

struct FieldSolution {
    GridSpec grid;
    int n = 1;
    int k = 1;
    /// phi[i-1][node]
    std::vector<std::vector<double>> phi;
    /// jets[(i-1)*k + (a-1)][node] = d phi^i / d t^a
    std::vector<std::vector<double>> jets;
    /// s[a-1][node]; empty until reconstructed.
    std::vector<std::vector<double>> s;
    Provenance provenance = Provenance::Computed;

    /// Throws SolverError when array shapes disagree with the grid or the chart.
    void check(const BundleChart& chart, bool need_s) const;
    const std::vector<double>& jet(int i, int alpha) const { return jets[static_cast<std::size_t>((i - 1) * k + alpha - 1)]; }
};

/// Centered first difference along `axis` at an interior node.
double centered_first(const GridSpec& grid, const std::vector<double>& f, std::size_t node, int axis);
/// Centered second difference; mixed axes use the four-point cross stencil.
double centered_second(const GridSpec& grid, const std::vector<double>& f, std::size_t node, int a, int b);

/// Symbol order used to evaluate jet expressions on a grid: bundle
/// coordinates, a, w (a <= b), r, t, then every bound parameter.
std::vector<Symbol> jet_slots(const BundleChart& chart);

/// Values for `jet_slots` at an interior node. v and a both take the stored
/// jets; w and r come from centered differences of phi and s.
void fill_jet_values(const BundleChart& chart, const FieldSolution& sol, std::size_t node, std::vector<double>& out);

}  // namespace kcontact
