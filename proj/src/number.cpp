#include "kcontact/number.hpp"

#include "kcontact/errors.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

namespace kcontact {

namespace {

constexpr std::int64_t kMaxRationalDenominator = 1'000'000'000;
constexpr double kTwo53 = 9007199254740992.0;

bool checked_mul(std::int64_t a, std::int64_t b, std::int64_t& out)
{
    return !__builtin_mul_overflow(a, b, &out);
}

bool checked_add(std::int64_t a, std::int64_t b, std::int64_t& out)
{
    return !__builtin_add_overflow(a, b, &out);
}

}  // namespace

Number Number::rational(std::int64_t num, std::int64_t den)
{
    if (den == 0) throw DomainError("division by zero in constant arithmetic");
    if (num == INT64_MIN || den == INT64_MIN) {
        return inexact(static_cast<double>(num) / static_cast<double>(den));
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    Number out;
    out.num_ = g == 0 ? 0 : num / g;
    out.den_ = g == 0 ? 1 : den / g;
    if (out.num_ == 0) out.den_ = 1;
    return out;
}

Number Number::inexact(double value)
{
    Number out;
    out.exact_ = false;
    out.num_ = 0;
    out.den_ = 1;
    out.value_ = value;
    return out;
}

Number Number::from_double(double value)
{
    if (!std::isfinite(value)) return inexact(value);
    if (value == std::floor(value) && std::fabs(value) < kTwo53) {
        return Number(static_cast<std::int64_t>(value));
    }
    // Continued-fraction convergents; accept the first one that rounds to `value`.
    const double x = std::fabs(value);
    std::int64_t h_prev = 1, h = static_cast<std::int64_t>(std::floor(x));
    std::int64_t k_prev = 0, k = 1;
    double rem = x - std::floor(x);
    for (int iter = 0; iter < 64; ++iter) {
        if (static_cast<double>(h) / static_cast<double>(k) == x) {
            return rational(value < 0 ? -h : h, k);
        }
        if (rem == 0.0) break;
        const double inv = 1.0 / rem;
        const double a_d = std::floor(inv);
        if (a_d > kTwo53) break;
        const auto a = static_cast<std::int64_t>(a_d);
        rem = inv - a_d;
        std::int64_t h_next = 0, k_next = 0, tmp = 0;
        if (!checked_mul(a, h, tmp) || !checked_add(tmp, h_prev, h_next)) break;
        if (!checked_mul(a, k, tmp) || !checked_add(tmp, k_prev, k_next)) break;
        if (k_next > kMaxRationalDenominator || static_cast<double>(h_next) > kTwo53) break;
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
    }
    return inexact(value);
}

double Number::to_double() const noexcept
{
    if (!exact_) return value_;
    return static_cast<double>(num_) / static_cast<double>(den_);
}

Number Number::abs() const
{
    return is_negative() ? -*this : *this;
}

Number Number::operator-() const
{
    if (!exact_) return inexact(-value_);
    if (num_ == INT64_MIN) return inexact(-to_double());
    Number out = *this;
    out.num_ = -num_;
    return out;
}

Number operator+(const Number& a, const Number& b)
{
    if (a.exact_ && b.exact_) {
        std::int64_t x = 0, y = 0, num = 0, den = 0;
        if (checked_mul(a.num_, b.den_, x) && checked_mul(b.num_, a.den_, y) && checked_add(x, y, num) &&
            checked_mul(a.den_, b.den_, den)) {
            return Number::rational(num, den);
        }
    }
    return Number::inexact(a.to_double() + b.to_double());
}

Number operator-(const Number& a, const Number& b)
{
    return a + (-b);
}

Number operator*(const Number& a, const Number& b)
{
    if (a.exact_ && b.exact_) {
        // Cross-reduce first to delay overflow.
        const std::int64_t g1 = std::gcd(a.num_ < 0 ? -a.num_ : a.num_, b.den_);
        const std::int64_t g2 = std::gcd(b.num_ < 0 ? -b.num_ : b.num_, a.den_);
        const std::int64_t an = g1 ? a.num_ / g1 : a.num_, bd = g1 ? b.den_ / g1 : b.den_;
        const std::int64_t bn = g2 ? b.num_ / g2 : b.num_, ad = g2 ? a.den_ / g2 : a.den_;
        std::int64_t num = 0, den = 0;
        if (checked_mul(an, bn, num) && checked_mul(ad, bd, den)) return Number::rational(num, den);
    }
    return Number::inexact(a.to_double() * b.to_double());
}

Number operator/(const Number& a, const Number& b)
{
    if (b.is_zero()) throw DomainError("division by zero in constant arithmetic");
    if (b.exact_) {
        if (b.num_ == INT64_MIN) return Number::inexact(a.to_double() / b.to_double());
        return a * Number::rational(b.den_, b.num_);
    }
    return Number::inexact(a.to_double() / b.to_double());
}

Number Number::pow(int exponent) const
{
    if (exponent < 0) return Number(1) / pow(-exponent);
    Number result(1);
    Number base = *this;
    unsigned e = static_cast<unsigned>(exponent);
    while (e != 0) {
        if (e & 1u) result = result * base;
        e >>= 1u;
        if (e != 0) base = base * base;
    }
    return result;
}

bool operator==(const Number& a, const Number& b) noexcept
{
    if (a.exact_ != b.exact_) return false;
    if (a.exact_) return a.num_ == b.num_ && a.den_ == b.den_;
    return a.value_ == b.value_;
}

std::strong_ordering compare(const Number& a, const Number& b) noexcept
{
    if (a.exact_ != b.exact_) return a.exact_ ? std::strong_ordering::less : std::strong_ordering::greater;
    if (a.exact_) {
        if (auto c = a.num_ <=> b.num_; c != 0) return c;
        return a.den_ <=> b.den_;
    }
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (a.value_ > b.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::string Number::magnitude_string() const
{
    if (exact_) {
        const std::int64_t n = num_ < 0 ? -num_ : num_;
        if (den_ == 1) return std::to_string(n);
        return std::to_string(n) + "/" + std::to_string(den_);
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", std::fabs(value_));
    return buf;
}

std::string Number::to_string() const
{
    return is_negative() ? "-" + magnitude_string() : magnitude_string();
}

}  // namespace kcontact
