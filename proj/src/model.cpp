#include "kcontact/model.hpp"

#include "kcontact/errors.hpp"
#include "kcontact/parser.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace kcontact {

const BaseVectorField& ModelFile::base_field(const std::string& n) const
{
    auto it = base_fields.find(n);
    if (it == base_fields.end()) throw Error("model has no basefield named '" + n + "'");
    return it->second;
}

BundleVectorField ModelFile::bundle_field(const std::string& n) const
{
    if (auto it = vector_fields.find(n); it != vector_fields.end()) return it->second;
    if (auto it = base_fields.find(n); it != base_fields.end()) return complete_lift(it->second);
    throw Error("model has no vectorfield or basefield named '" + n + "'");
}

const DissipationLaw& ModelFile::law(const std::string& n) const
{
    auto it = laws.find(n);
    if (it == laws.end()) throw Error("model has no law named '" + n + "'");
    return it->second;
}

const Sopde& ModelFile::sopde(const std::string& n) const
{
    auto it = sopdes.find(n);
    if (it == sopdes.end()) throw Error("model has no sopde named '" + n + "'");
    return it->second;
}

namespace {

struct Span {
    std::string_view text;
    int line = 0;
    int column = 1;

    Span trimmed() const
    {
        std::size_t a = 0, b = text.size();
        while (a < b && std::isspace(static_cast<unsigned char>(text[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(text[b - 1]))) --b;
        return {text.substr(a, b - a), line, column + static_cast<int>(a)};
    }
    Span sub(std::size_t pos, std::size_t len = std::string_view::npos) const
    {
        return {text.substr(pos, len), line, column + static_cast<int>(pos)};
    }
    bool empty() const { return text.empty(); }
    std::string str() const { return std::string(text); }
    [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line, column); }
};

/// Splits off the first whitespace-delimited word.
std::pair<Span, Span> first_word(const Span& s)
{
    const Span t = s.trimmed();
    std::size_t end = 0;
    while (end < t.text.size() && !std::isspace(static_cast<unsigned char>(t.text[end]))) ++end;
    return {t.sub(0, end), t.sub(end).trimmed()};
}

std::vector<Span> split(const Span& s, char sep)
{
    std::vector<Span> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.text.size(); ++i) {
        if (i == s.text.size() || s.text[i] == sep) {
            out.push_back(s.sub(start, i - start).trimmed());
            start = i + 1;
        }
    }
    return out;
}

std::vector<Span> words(const Span& s)
{
    std::vector<Span> out;
    Span rest = s.trimmed();
    while (!rest.empty()) {
        auto [w, r] = first_word(rest);
        out.push_back(w);
        rest = r;
    }
    return out;
}

double number(const Span& s)
{
    double v = 0.0;
    const auto* b = s.text.data();
    const auto [p, ec] = std::from_chars(b, b + s.text.size(), v);
    if (ec != std::errc() || p != b + s.text.size()) s.fail("expected a number, got '" + s.str() + "'");
    return v;
}

int positive_int(const Span& s)
{
    int v = 0;
    const auto* b = s.text.data();
    const auto [p, ec] = std::from_chars(b, b + s.text.size(), v);
    if (ec != std::errc() || p != b + s.text.size() || v < 1) s.fail("expected a positive integer, got '" + s.str() + "'");
    return v;
}

Expression expression(const Span& s, const BundleChart& chart)
{
    if (s.empty()) s.fail("missing expression");
    return parse(s.text, chart, s.line, s.column);
}

struct Stanza {
    std::string keyword;
    Span head;
    Span rest;
};

const std::set<std::string> kHeader{"model", "base_dim", "field_dim", "coords", "independent", "params", "kernel", "preset"};
const std::set<std::string> kBody{"lagrangian", "basefield", "vectorfield", "law", "sopde", "calibration"};

}  // namespace

std::vector<Expression> parse_expression_list(std::string_view text, const BundleChart& chart, int expected)
{
    std::vector<Expression> out;
    const Span all{text, 1, 1};
    for (const auto& piece : split(all, ';')) out.push_back(expression(piece, chart));
    if (expected >= 0 && static_cast<int>(out.size()) != expected) {
        all.fail("expected " + std::to_string(expected) + " ';'-separated expressions, got " + std::to_string(out.size()));
    }
    return out;
}

ModelFile parse_model(std::string_view text, const std::map<std::string, double>& overrides)
{
    std::vector<Stanza> stanzas;
    {
        int line = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t nl = std::min(text.find('\n', pos), text.size());
            ++line;
            std::string_view raw = text.substr(pos, nl - pos);
            if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
            const Span s = Span{raw, line, 1}.trimmed();
            if (!s.empty()) {
                auto [kw, rest] = first_word(s);
                const std::string k = kw.str();
                if (!kHeader.count(k) && !kBody.count(k)) kw.fail("unknown stanza '" + k + "'");
                stanzas.push_back({k, kw, rest});
            }
            pos = nl + 1;
        }
    }

    ModelFile m;
    std::optional<int> n, k;
    std::vector<std::string> coords, independents;
    std::vector<Parameter> params;
    std::vector<KernelPtr> kernels;
    std::set<std::string> seen;
    for (const auto& st : stanzas) {
        if (!kHeader.count(st.keyword)) continue;
        if (st.keyword != "kernel" && !seen.insert(st.keyword).second) st.head.fail("duplicate '" + st.keyword + "' stanza");
        if (st.rest.empty()) st.head.fail("'" + st.keyword + "' needs a value");
        if (st.keyword == "model") {
            m.name = st.rest.str();
        } else if (st.keyword == "base_dim") {
            n = positive_int(st.rest);
        } else if (st.keyword == "field_dim") {
            k = positive_int(st.rest);
        } else if (st.keyword == "coords") {
            for (const auto& w : words(st.rest)) coords.push_back(w.str());
        } else if (st.keyword == "independent") {
            for (const auto& w : words(st.rest)) independents.push_back(w.str());
        } else if (st.keyword == "preset") {
            m.preset = st.rest.str();
        } else if (st.keyword == "params") {
            for (const auto& w : words(st.rest)) {
                const auto eq = w.text.find('=');
                if (eq == std::string_view::npos) {
                    params.push_back({w.str(), std::nullopt});
                } else {
                    params.push_back({std::string(w.text.substr(0, eq)), number(w.sub(eq + 1))});
                }
            }
        } else if (st.keyword == "kernel") {
            static const std::regex sample(R"(^([A-Za-z_]\w*)\s+sample$)");
            static const std::regex body(R"(^([A-Za-z_]\w*)\s*\(\s*([A-Za-z_]\w*)\s*\)\s*=\s*)");
            const std::string rest = st.rest.str();
            std::smatch match;
            if (std::regex_match(rest, match, sample)) {
                kernels.push_back(make_sample_kernel(match[1]));
            } else if (std::regex_search(rest, match, body)) {
                const Symbol z = Symbol::independent(match[2]);
                const Span b = st.rest.sub(static_cast<std::size_t>(match.length(0)));
                kernels.push_back(make_kernel(match[1], parse_with_variables(b.text, {{match[2], z}}, b.line, b.column), z));
            } else {
                st.rest.fail("expected 'NAME sample' or 'NAME(z) = EXPR'");
            }
        }
    }
    for (const auto& [name, value] : overrides) {
        auto it = std::find_if(params.begin(), params.end(), [&](const Parameter& p) { return p.name == name; });
        if (it == params.end()) throw Error("model declares no parameter '" + name + "'");
        it->value = value;
    }
    if (m.name.empty()) throw ParseError("missing 'model' stanza", 1, 1);
    if (!n) throw ParseError("missing 'base_dim' stanza", 1, 1);
    if (!k) throw ParseError("missing 'field_dim' stanza", 1, 1);
    if (static_cast<int>(coords.size()) != *n) {
        throw ParseError("'coords' must name " + std::to_string(*n) + " fields", 1, 1);
    }
    if (!independents.empty() && static_cast<int>(independents.size()) != *k) {
        throw ParseError("'independent' must name " + std::to_string(*k) + " variables", 1, 1);
    }
    try {
        m.chart = make_chart(*n, *k, coords, params, independents, kernels);
    } catch (const ChartError& e) {
        throw ParseError(e.what(), 1, 1);
    }
    const auto& c = *m.chart;

    std::map<std::string, std::vector<std::pair<int, Expression>>> fields;
    std::map<std::string, Span> field_heads;
    std::map<std::string, std::map<std::vector<int>, Expression>> sopdes;
    std::vector<std::string> sopde_order;
    auto named = [](const Stanza& st) {
        auto [name, rest] = first_word(st.rest);
        if (name.empty()) st.head.fail("'" + st.keyword + "' needs a name");
        return std::pair{name, rest};
    };
    for (const auto& st : stanzas) {
        if (!kBody.count(st.keyword)) continue;
        if (st.keyword == "lagrangian") {
            if (m.lagrangian) st.head.fail("duplicate 'lagrangian' stanza");
            try {
                m.lagrangian.emplace(m.chart, expression(st.rest, c));
            } catch (const ChartError& e) {
                st.rest.fail(e.what());
            }
            continue;
        }
        auto [name, rest] = named(st);
        const std::string key = name.str();
        if (st.keyword == "calibration") {
            m.calibration[key] = number(rest);
        } else if (st.keyword == "basefield" || st.keyword == "law") {
            const bool base = st.keyword == "basefield";
            const int expected = base ? c.n() : c.k();
            std::vector<Expression> comps;
            for (const auto& piece : split(rest, ';')) comps.push_back(expression(piece, c));
            if (static_cast<int>(comps.size()) != expected) {
                rest.fail("'" + key + "' needs " + std::to_string(expected) + " ';'-separated components");
            }
            try {
                if (base) {
                    if (!m.base_fields.emplace(key, BaseVectorField(m.chart, comps)).second) name.fail("duplicate basefield '" + key + "'");
                } else {
                    if (!m.laws.emplace(key, DissipationLaw(m.chart, comps)).second) name.fail("duplicate law '" + key + "'");
                }
            } catch (const ChartError& e) {
                rest.fail(e.what());
            }
        } else if (st.keyword == "vectorfield") {
            field_heads.emplace(key, name);
            auto& entries = fields[key];
            for (const auto& piece : split(rest, ';')) {
                const auto eq = piece.text.find('=');
                if (eq == std::string_view::npos) piece.fail("expected COORDINATE = EXPR");
                std::string coord;
                for (char ch : piece.text.substr(0, eq)) {
                    if (!std::isspace(static_cast<unsigned char>(ch))) coord += ch;
                }
                int index = -1;
                for (int idx = 0; idx < c.dim(); ++idx) {
                    if (to_string(c.coordinate(idx)) == coord) index = idx;
                }
                if (index < 0) piece.fail("unknown coordinate '" + coord + "'");
                entries.emplace_back(index, expression(piece.sub(eq + 1).trimmed(), c));
            }
        } else if (st.keyword == "sopde") {
            if (!sopdes.count(key)) sopde_order.push_back(key);
            auto& entries = sopdes[key];
            static const std::regex second(R"(^G\[\s*([A-Za-z_]\w*)\s*,\s*(\d+)\s*,\s*(\d+)\s*\]$)");
            static const std::regex action(R"(^G\[\s*(\d+)\s*,\s*(\d+)\s*\]$)");
            for (const auto& piece : split(rest, ';')) {
                const auto eq = piece.text.find('=');
                if (eq == std::string_view::npos) piece.fail("expected G[...] = EXPR");
                const std::string lhs = piece.sub(0, eq).trimmed().str();
                std::smatch match;
                std::vector<int> slot;
                if (std::regex_match(lhs, match, second)) {
                    const auto i = c.base_index(match[1]);
                    if (!i) piece.fail("unknown field '" + match[1].str() + "'");
                    slot = {*i, std::stoi(match[2]), std::stoi(match[3])};
                } else if (std::regex_match(lhs, match, action)) {
                    slot = {std::stoi(match[1]), std::stoi(match[2])};
                } else {
                    piece.fail("expected G[field,a,b] or G[upper,lower]");
                }
                for (std::size_t j = slot.size() == 3 ? 1 : 0; j < slot.size(); ++j) {
                    if (slot[j] < 1 || slot[j] > c.k()) piece.fail("index out of range in '" + lhs + "'");
                }
                if (!entries.emplace(slot, expression(piece.sub(eq + 1).trimmed(), c)).second) piece.fail("duplicate entry " + lhs);
            }
        }
    }
    if (!m.lagrangian) throw ParseError("missing 'lagrangian' stanza", 1, 1);
    for (const auto& [key, entries] : fields) {
        if (m.base_fields.count(key)) field_heads.at(key).fail("name '" + key + "' is already a basefield");
        BundleVectorField x(m.chart);
        for (const auto& [idx, e] : entries) {
            if (!x.component(idx).is_zero()) field_heads.at(key).fail("component set twice in '" + key + "'");
            x.set(idx, e);
        }
        m.vector_fields.emplace(key, std::move(x));
    }
    for (const auto& key : sopde_order) {
        const auto& entries = sopdes.at(key);
        auto get = [&](std::vector<int> slot) {
            auto it = entries.find(slot);
            return it == entries.end() ? Expression() : it->second;
        };
        m.sopdes.emplace(key, Sopde::build(
                                  m.chart, [&](int i, int a, int b) { return get({i, a, b}); },
                                  [&](int upper, int lower) { return get({upper, lower}); }));
    }
    return m;
}

ModelFile load_model(const std::string& path, const std::map<std::string, double>& overrides)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_model(buf.str(), overrides);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.detail(), e.line(), e.column());
    }
}

}  // namespace kcontact
