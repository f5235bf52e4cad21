#include "kcontact/chart.hpp"

#include "kcontact/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <mutex>
#include <set>

namespace kcontact {

namespace {

bool valid_identifier(const std::string& s)
{
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

}  // namespace

BundleChart::BundleChart(int n, int k, std::vector<std::string> base_names, std::vector<Parameter> parameters,
                         std::vector<std::string> independent_names, std::vector<KernelPtr> kernels)
    : n_(n), k_(k), base_names_(std::move(base_names)), parameters_(std::move(parameters)),
      independent_names_(std::move(independent_names)), kernels_(std::move(kernels))
{
    if (n_ < 1 || k_ < 1) throw ChartError("chart needs n >= 1 and k >= 1");
    if (static_cast<int>(base_names_.size()) != n_) throw ChartError("expected " + std::to_string(n_) + " base names");
    if (independent_names_.empty()) {
        for (int a = 1; a <= k_; ++a) independent_names_.push_back("t" + std::to_string(a));
    }
    if (static_cast<int>(independent_names_.size()) != k_) {
        throw ChartError("expected " + std::to_string(k_) + " independent variable names");
    }
    std::set<std::string> seen;
    auto claim = [&](const std::string& name) {
        if (!valid_identifier(name)) throw ChartError("invalid identifier '" + name + "'");
        static const std::set<std::string> reserved{"sin", "cos", "exp", "log", "sqrt"};
        if (reserved.count(name)) throw ChartError("'" + name + "' is a reserved function name");
        if (!seen.insert(name).second) throw ChartError("duplicate name '" + name + "'");
    };
    for (const auto& b : base_names_) claim(b);
    for (const auto& t : independent_names_) claim(t);
    for (const auto& p : parameters_) claim(p.name);
    for (const auto& kp : kernels_) {
        if (!kp) throw ChartError("null kernel");
        claim(kp->name);
    }
    for (int i = 1; i <= n_; ++i) coordinates_.push_back(q(i));
    for (int i = 1; i <= n_; ++i) {
        for (int a = 1; a <= k_; ++a) coordinates_.push_back(v(i, a));
    }
    for (int a = 1; a <= k_; ++a) coordinates_.push_back(s(a));
}

void BundleChart::check_base(int i) const
{
    if (i < 1 || i > n_) throw ChartError("base index " + std::to_string(i) + " out of range 1.." + std::to_string(n_));
}

void BundleChart::check_field(int alpha) const
{
    if (alpha < 1 || alpha > k_) {
        throw ChartError("field index " + std::to_string(alpha) + " out of range 1.." + std::to_string(k_));
    }
}

Symbol BundleChart::q(int i) const
{
    check_base(i);
    return Symbol::base(i, base_names_[static_cast<std::size_t>(i - 1)]);
}

Symbol BundleChart::v(int i, int alpha) const
{
    check_base(i);
    check_field(alpha);
    return Symbol::velocity(i, base_names_[static_cast<std::size_t>(i - 1)], alpha);
}

Symbol BundleChart::s(int alpha) const
{
    check_field(alpha);
    return Symbol::action(alpha);
}

Symbol BundleChart::a(int i, int alpha) const
{
    check_base(i);
    check_field(alpha);
    return Symbol::jet_first(i, base_names_[static_cast<std::size_t>(i - 1)], alpha);
}

Symbol BundleChart::w(int i, int alpha, int beta) const
{
    check_base(i);
    check_field(alpha);
    check_field(beta);
    return Symbol::jet_second(i, base_names_[static_cast<std::size_t>(i - 1)], alpha, beta);
}

Symbol BundleChart::r(int upper, int lower) const
{
    check_field(upper);
    check_field(lower);
    return Symbol::jet_action(upper, lower);
}

Symbol BundleChart::t(int alpha) const
{
    check_field(alpha);
    return Symbol::independent(independent_names_[static_cast<std::size_t>(alpha - 1)]);
}

Symbol BundleChart::parameter(const std::string& name) const
{
    if (!find_parameter(name)) throw ChartError("unknown parameter '" + name + "'");
    return Symbol::parameter(name);
}

Symbol BundleChart::coordinate(int index) const
{
    if (index < 0 || index >= dim()) throw ChartError("coordinate index out of range");
    return coordinates_[static_cast<std::size_t>(index)];
}

int BundleChart::coordinate_index(const Symbol& s) const
{
    if (!owns(s)) return -1;
    switch (s.kind) {
    case SymbolKind::Base: return q_index(s.index);
    case SymbolKind::Velocity: return v_index(s.index, s.alpha);
    case SymbolKind::Action: return s_index(s.alpha);
    default: return -1;
    }
}

std::optional<int> BundleChart::base_index(const std::string& name) const
{
    auto it = std::find(base_names_.begin(), base_names_.end(), name);
    if (it == base_names_.end()) return std::nullopt;
    return static_cast<int>(it - base_names_.begin()) + 1;
}

std::optional<int> BundleChart::independent_index(const std::string& name) const
{
    auto it = std::find(independent_names_.begin(), independent_names_.end(), name);
    if (it == independent_names_.end()) return std::nullopt;
    return static_cast<int>(it - independent_names_.begin()) + 1;
}

const Parameter* BundleChart::find_parameter(const std::string& name) const
{
    for (const auto& p : parameters_) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

KernelPtr BundleChart::find_kernel(const std::string& name) const
{
    for (const auto& kp : kernels_) {
        if (kp->name == name) return kp;
    }
    return nullptr;
}

Point BundleChart::parameter_values() const
{
    Point out;
    for (const auto& p : parameters_) {
        if (p.value) out[Symbol::parameter(p.name)] = *p.value;
    }
    return out;
}

bool BundleChart::owns(const Symbol& s) const
{
    const auto named_base = [&] {
        return s.index >= 1 && s.index <= n_ && base_names_[static_cast<std::size_t>(s.index - 1)] == s.name;
    };
    const auto field = [&](int a) { return a >= 1 && a <= k_; };
    switch (s.kind) {
    case SymbolKind::Base: return named_base() && s.alpha == 0 && s.beta == 0;
    case SymbolKind::Velocity:
    case SymbolKind::JetFirst: return named_base() && field(s.alpha) && s.beta == 0;
    case SymbolKind::JetSecond: return named_base() && field(s.alpha) && field(s.beta) && s.alpha <= s.beta;
    case SymbolKind::Action: return s.index == 0 && field(s.alpha) && s.beta == 0 && s.name.empty();
    case SymbolKind::JetAction: return s.index == 0 && field(s.alpha) && field(s.beta) && s.name.empty();
    case SymbolKind::Independent: return independent_index(s.name).has_value();
    case SymbolKind::Parameter: return find_parameter(s.name) != nullptr;
    }
    return false;
}

void BundleChart::check(const Expression& e) const
{
    for (const auto& s : free_symbols(e)) {
        if (!owns(s)) throw ChartError("symbol " + to_string(s) + " is not declared in the chart");
    }
}

namespace {

struct BodyKernelState {
    static constexpr int kEager = 5;

    BodyKernelState(const Expression& b, const Symbol& zz) : body(b), z(zz)
    {
        Expression d = body;
        for (int i = 0; i < kEager; ++i) {
            eager.emplace_back(d, std::span<const Symbol>(&z, 1));
            d = differentiate(d, z);
        }
    }

    const CompiledExpression& derivative(int order)
    {
        if (order < kEager) return eager[static_cast<std::size_t>(order)];
        std::lock_guard<std::mutex> lock(mutex);
        while (kEager + static_cast<int>(lazy.size()) <= order) {
            Expression d = body;
            for (int i = 0; i < kEager + static_cast<int>(lazy.size()); ++i) d = differentiate(d, z);
            lazy.emplace_back(d, std::span<const Symbol>(&z, 1));
        }
        return lazy[static_cast<std::size_t>(order - kEager)];
    }

    Expression body;
    Symbol z;
    std::vector<CompiledExpression> eager;
    std::mutex mutex;
    std::deque<CompiledExpression> lazy;
};

}  // namespace

KernelPtr make_kernel(const std::string& name, const Expression& body, const Symbol& z)
{
    for (const auto& s : free_symbols(body)) {
        if (s != z) throw ChartError("kernel body for " + name + " may only use " + to_string(z));
    }
    auto state = std::make_shared<BodyKernelState>(body, z);
    auto kernel = std::make_shared<Kernel>();
    kernel->name = name;
    kernel->evaluate = [state](int order, double zv) {
        const CompiledExpression& f = state->derivative(order);
        return f(std::span<const double>(&zv, 1));
    };
    const double d1 = kernel->evaluate(1, 0.0);
    if (std::fabs(d1) < 1e-14) kernel->derivative_over_z_at_zero = kernel->evaluate(2, 0.0);
    return kernel;
}

KernelPtr make_sample_kernel(const std::string& name)
{
    const Symbol z = Symbol::independent("z");
    const Expression Z(z);
    const Expression body =
        sin(Expression(Number::rational(7, 10)) * Z + Expression(Number::rational(3, 10))) +
        Expression(Number::rational(1, 5)) * pow(Z, 3);
    return make_kernel(name, body, z);
}

}  // namespace kcontact
