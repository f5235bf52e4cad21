#pragma once

#include "kcontact/chart.hpp"

#include <map>
#include <string>
#include <string_view>

namespace kcontact {

/// Parses DSL text against `chart`. `line`/`column` give the position of the
/// first character so diagnostics point into an enclosing file.
///
///     expr   := term (('+'|'-') term)*
///     term   := factor (('*'|'/') factor)*
///     factor := base ('^' integer)?
///     base   := number | ident | ident '(' expr ')' | v[ident,int] | s[int]
///             | a[ident,int] | w[ident,int,int] | r[int,int] | '(' expr ')' | '-' base
///
/// Throws ParseError for syntax errors, undeclared names and out-of-range indices.
Expression parse(std::string_view text, const BundleChart& chart, int line = 1, int column = 1);

/// Same grammar with free-standing variables and no chart (kernel bodies).
Expression parse_with_variables(std::string_view text, const std::map<std::string, Symbol>& variables, int line = 1,
                                int column = 1);

}  // namespace kcontact
