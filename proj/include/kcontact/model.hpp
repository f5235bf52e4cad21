#pragma once

#include "kcontact/dissipation.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace kcontact {

/// Parsed model file.
///
///     model damped_string
///     base_dim 1                      # n = dim Q
///     field_dim 2                     # k independent variables
///     coords q
///     independent t x
///     params rho=1 tau=0.5 gamma      # no value: free parameter
///     kernel C(z) = 1/2*z^2           # or: kernel C sample
///     lagrangian (rho/2)*v[q,1]^2 - (tau/2)*v[q,2]^2 - gamma*s[1]
///     basefield dq 1                  # n components, ';' separated
///     vectorfield shift s[1] = 1; q = 1
///     law F1 rho*v[q,1]; -tau*v[q,2]  # k components
///     sopde fixture G[q,1,1] = ...; G[1,1] = ...   # G[i,a,b] and G[upper,lower]
///     calibration F1 6.5
///     preset damped-string
///
/// vectorfield and sopde lines with the same name accumulate entries.
struct ModelFile {
    std::string name;
    ChartPtr chart;
    std::optional<Lagrangian> lagrangian;
    std::map<std::string, BaseVectorField> base_fields;
    std::map<std::string, BundleVectorField> vector_fields;
    std::map<std::string, DissipationLaw> laws;
    std::map<std::string, Sopde> sopdes;
    std::map<std::string, double> calibration;
    std::optional<std::string> preset;

    const BaseVectorField& base_field(const std::string& n) const;
    /// Named bundle field, or the complete lift of a named base field.
    BundleVectorField bundle_field(const std::string& n) const;
    const DissipationLaw& law(const std::string& n) const;
    const Sopde& sopde(const std::string& n) const;
};

/// Throws ParseError with the line and column of the offending text.
/// `overrides` replaces declared parameter values; unknown names throw Error.
ModelFile parse_model(std::string_view text, const std::map<std::string, double>& overrides = {});
/// Reads and parses a file; I/O failures throw Error.
ModelFile load_model(const std::string& path, const std::map<std::string, double>& overrides = {});

/// Parses ';'-separated expressions, checking the count when `expected` >= 0.
std::vector<Expression> parse_expression_list(std::string_view text, const BundleChart& chart, int expected = -1);

}  // namespace kcontact
