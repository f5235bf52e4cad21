#pragma once

#include "kcontact/expr.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kcontact {

struct Parameter {
    std::string name;
    std::optional<double> value;
};

/// Global coordinate patch on the phase bundle.
///
/// Coordinates are laid out as q^1..q^n, then v^i_a at n + (i-1)k + (a-1),
/// then s^1..s^k. Jet symbols (a, w, r) and the independent variables are
/// owned by the chart but are not bundle coordinates.
class BundleChart {
public:
    BundleChart(int n, int k, std::vector<std::string> base_names, std::vector<Parameter> parameters = {},
                std::vector<std::string> independent_names = {}, std::vector<KernelPtr> kernels = {});

    int n() const noexcept { return n_; }
    int k() const noexcept { return k_; }
    int dim() const noexcept { return n_ + n_ * k_ + k_; }

    const std::vector<std::string>& base_names() const noexcept { return base_names_; }
    const std::vector<std::string>& independent_names() const noexcept { return independent_names_; }
    const std::vector<Parameter>& parameters() const noexcept { return parameters_; }
    const std::vector<KernelPtr>& kernels() const noexcept { return kernels_; }

    Symbol q(int i) const;
    Symbol v(int i, int alpha) const;
    Symbol s(int alpha) const;
    Symbol a(int i, int alpha) const;
    Symbol w(int i, int alpha, int beta) const;
    /// r^upper_lower = d s^upper / d t^lower.
    Symbol r(int upper, int lower) const;
    Symbol t(int alpha) const;
    Symbol parameter(const std::string& name) const;

    /// Index into the coordinate layout.
    int q_index(int i) const { return i - 1; }
    int v_index(int i, int alpha) const { return n_ + (i - 1) * k_ + (alpha - 1); }
    int s_index(int alpha) const { return n_ + n_ * k_ + (alpha - 1); }

    Symbol coordinate(int index) const;
    const std::vector<Symbol>& coordinates() const noexcept { return coordinates_; }
    /// -1 when `s` is not a bundle coordinate of this chart.
    int coordinate_index(const Symbol& s) const;

    std::optional<int> base_index(const std::string& name) const;
    std::optional<int> independent_index(const std::string& name) const;
    const Parameter* find_parameter(const std::string& name) const;
    KernelPtr find_kernel(const std::string& name) const;

    /// Symbols of every parameter that has a bound value.
    Point parameter_values() const;
    bool owns(const Symbol& s) const;
    /// Throws ChartError when `e` has a symbol the chart does not own.
    void check(const Expression& e) const;

private:
    void check_base(int i) const;
    void check_field(int alpha) const;

    int n_;
    int k_;
    std::vector<std::string> base_names_;
    std::vector<Parameter> parameters_;
    std::vector<std::string> independent_names_;
    std::vector<KernelPtr> kernels_;
    std::vector<Symbol> coordinates_;
};

using ChartPtr = std::shared_ptr<const BundleChart>;

template <class... Args>
ChartPtr make_chart(Args&&... args)
{
    return std::make_shared<const BundleChart>(std::forward<Args>(args)...);
}

/// Kernel sampled from a closed-form body in the variable `z`; derivatives of
/// every order come from symbolic differentiation of the body.
KernelPtr make_kernel(const std::string& name, const Expression& body, const Symbol& z);
/// Kernel with the stock sample f(z) = sin(7z/10 + 3/10) + z^3/5.
KernelPtr make_sample_kernel(const std::string& name);

}  // namespace kcontact
