#include "kcontact/parser.hpp"

#include "kcontact/errors.hpp"

#include <cctype>
#include <cstdlib>

namespace kcontact {

namespace {

class Parser {
public:
    Parser(std::string_view text, const BundleChart* chart, const std::map<std::string, Symbol>* variables, int line,
           int column)
        : text_(text), chart_(chart), variables_(variables), line_(line), column_(column)
    {
    }

    Expression run()
    {
        skip_space();
        if (at_end()) fail("empty expression");
        Expression e = expr();
        skip_space();
        if (!at_end()) fail(std::string("unexpected '") + peek() + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line_, column_); }
    [[noreturn]] void fail_at(const std::string& message, int line, int column) const
    {
        throw ParseError(message, line, column);
    }

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return at_end() ? '\0' : text_[pos_]; }

    void advance()
    {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_space()
    {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
    }

    bool accept(char c)
    {
        skip_space();
        if (peek() != c) return false;
        advance();
        return true;
    }

    void expect(char c)
    {
        skip_space();
        if (peek() != c) {
            if (at_end()) fail(std::string("expected '") + c + "' but reached end of input");
            fail(std::string("expected '") + c + "' but found '" + peek() + "'");
        }
        advance();
    }

    Expression expr()
    {
        Expression e = term();
        for (;;) {
            if (accept('+')) {
                e = e + term();
            } else if (accept('-')) {
                e = e - term();
            } else {
                return e;
            }
        }
    }

    Expression term()
    {
        Expression e = factor();
        for (;;) {
            skip_space();
            const int l = line_, c = column_;
            if (accept('*')) {
                e = e * factor();
            } else if (accept('/')) {
                Expression d = factor();
                if (d.is_zero()) fail_at("division by zero", l, c);
                e = e / d;
            } else {
                return e;
            }
        }
    }

    Expression factor()
    {
        Expression b = base();
        if (accept('^')) {
            skip_space();
            const int l = line_, c = column_;
            const long long n = integer();
            if (n > 1000) fail_at("exponent too large", l, c);
            if (n == 0) return Expression(1);
            return pow(b, static_cast<int>(n));
        }
        return b;
    }

    long long integer()
    {
        skip_space();
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected an integer");
        long long v = 0;
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
            v = v * 10 + (peek() - '0');
            if (v > 1'000'000'000) fail("integer too large");
            advance();
        }
        return v;
    }

    Expression number()
    {
        const std::size_t start = pos_;
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
        if (peek() == '.') {
            advance();
            while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
        }
        if (peek() == 'e' || peek() == 'E') {
            const std::size_t save = pos_;
            const int sl = line_, sc = column_;
            advance();
            if (peek() == '+' || peek() == '-') advance();
            if (!std::isdigit(static_cast<unsigned char>(peek()))) {
                pos_ = save;
                line_ = sl;
                column_ = sc;
            } else {
                while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
            }
        }
        const std::string lit(text_.substr(start, pos_ - start));
        if (lit == ".") fail("malformed number");
        return Expression(Number::from_double(std::strtod(lit.c_str(), nullptr)));
    }

    std::string identifier()
    {
        const std::size_t start = pos_;
        while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') advance();
        return std::string(text_.substr(start, pos_ - start));
    }

    int field_index()
    {
        skip_space();
        const int il = line_, ic = column_;
        const long long v = integer();
        if (chart_ && (v < 1 || v > chart_->k())) {
            fail_at("index " + std::to_string(v) + " out of range 1.." + std::to_string(chart_->k()), il, ic);
        }
        return static_cast<int>(v);
    }

    int base_ref()
    {
        skip_space();
        const int l = line_, c = column_;
        if (!(std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_')) fail("expected a coordinate name");
        const std::string name = identifier();
        auto i = chart_->base_index(name);
        if (!i) fail_at("undeclared coordinate '" + name + "'", l, c);
        return *i;
    }

    Expression jet(const std::string& head, int l, int c)
    {
        if (!chart_) fail_at("'" + head + "[...]' needs a chart", l, c);
        expect('[');
        Expression out;
        if (head == "v" || head == "a") {
            const int i = base_ref();
            expect(',');
            const int alpha = field_index();
            out = Expression(head == "v" ? chart_->v(i, alpha) : chart_->a(i, alpha));
        } else if (head == "w") {
            const int i = base_ref();
            expect(',');
            const int alpha = field_index();
            expect(',');
            const int beta = field_index();
            out = Expression(chart_->w(i, alpha, beta));
        } else if (head == "s") {
            out = Expression(chart_->s(field_index()));
        } else {
            const int upper = field_index();
            expect(',');
            const int lower = field_index();
            out = Expression(chart_->r(upper, lower));
        }
        expect(']');
        return out;
    }

    Expression call(const std::string& name, int l, int c)
    {
        expect('(');
        Expression arg = expr();
        expect(')');
        if (name == "sin") return sin(arg);
        if (name == "cos") return cos(arg);
        if (name == "exp") return exp(arg);
        if (name == "log") return log(arg);
        if (name == "sqrt") return sqrt(arg);
        if (chart_) {
            if (auto k = chart_->find_kernel(name)) return apply_kernel(k, arg, 0);
            const auto pos = name.rfind("_d");
            if (pos != std::string::npos && pos + 2 < name.size()) {
                const std::string digits = name.substr(pos + 2);
                bool ok = digits.find_first_not_of("0123456789") == std::string::npos && digits.size() < 4;
                if (ok) {
                    if (auto k = chart_->find_kernel(name.substr(0, pos))) return apply_kernel(k, arg, std::stoi(digits));
                }
            }
        }
        fail_at("undeclared function '" + name + "'", l, c);
    }

    Expression base()
    {
        skip_space();
        const int l = line_, c = column_;
        if (at_end()) fail("unexpected end of input");
        const char ch = peek();
        if (ch == '-') {
            advance();
            return -base();
        }
        if (ch == '(') {
            advance();
            Expression e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            const std::string name = identifier();
            skip_space();
            if (peek() == '[' && (name == "v" || name == "s" || name == "a" || name == "w" || name == "r")) {
                return jet(name, l, c);
            }
            if (peek() == '(') return call(name, l, c);
            return resolve(name, l, c);
        }
        fail(std::string("unexpected '") + ch + "'");
    }

    Expression resolve(const std::string& name, int l, int c)
    {
        if (variables_) {
            auto it = variables_->find(name);
            if (it != variables_->end()) return Expression(it->second);
        }
        if (chart_) {
            if (auto i = chart_->base_index(name)) return Expression(chart_->q(*i));
            if (chart_->find_parameter(name)) return Expression(Symbol::parameter(name));
            if (auto a = chart_->independent_index(name)) return Expression(chart_->t(*a));
            if (chart_->find_kernel(name)) fail_at("kernel '" + name + "' must be applied to an argument", l, c);
        }
        fail_at("undeclared identifier '" + name + "'", l, c);
    }

    std::string_view text_;
    const BundleChart* chart_;
    const std::map<std::string, Symbol>* variables_;
    std::size_t pos_ = 0;
    int line_;
    int column_;
};

}  // namespace

Expression parse(std::string_view text, const BundleChart& chart, int line, int column)
{
    return Parser(text, &chart, nullptr, line, column).run();
}

Expression parse_with_variables(std::string_view text, const std::map<std::string, Symbol>& variables, int line,
                                int column)
{
    return Parser(text, nullptr, &variables, line, column).run();
}

}  // namespace kcontact
