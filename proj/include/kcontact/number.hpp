#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace kcontact {

/// Expression coefficient.
///
/// Coefficients are exact 64-bit rationals whenever possible. A decimal
/// literal is first read as an IEEE double and then mapped to the simplest
/// rational that rounds to the same double, so "0.1" becomes 1/10. Any
/// operation that would overflow falls back to an inexact double; inexact
/// coefficients never take part in exact zero decisions.
class Number {
public:
    Number() = default;
    Number(std::int64_t value) : num_(value) {}  // NOLINT(google-explicit-constructor)
    Number(int value) : num_(value) {}            // NOLINT(google-explicit-constructor)

    /// Reduced rational num/den. Throws DomainError when den == 0.
    static Number rational(std::int64_t num, std::int64_t den);
    /// Rationalizes `value` when a small rational reproduces it bit-for-bit.
    static Number from_double(double value);
    static Number inexact(double value);

    bool is_exact() const noexcept { return exact_; }
    bool is_zero() const noexcept { return exact_ ? num_ == 0 : value_ == 0.0; }
    bool is_one() const noexcept { return exact_ && num_ == 1 && den_ == 1; }
    bool is_negative() const noexcept { return exact_ ? num_ < 0 : value_ < 0.0; }
    bool is_integer() const noexcept { return exact_ && den_ == 1; }

    std::int64_t numerator() const noexcept { return num_; }
    std::int64_t denominator() const noexcept { return den_; }
    double to_double() const noexcept;

    Number abs() const;
    Number pow(int exponent) const;

    friend Number operator+(const Number& a, const Number& b);
    friend Number operator-(const Number& a, const Number& b);
    friend Number operator*(const Number& a, const Number& b);
    friend Number operator/(const Number& a, const Number& b);
    Number operator-() const;

    /// Structural equality: exactness and value.
    friend bool operator==(const Number& a, const Number& b) noexcept;
    /// Total order used for canonical sorting.
    friend std::strong_ordering compare(const Number& a, const Number& b) noexcept;

    /// Magnitude as DSL text: "3", "1/2" or 17 significant digits for inexact values.
    std::string magnitude_string() const;
    std::string to_string() const;

private:
    bool exact_ = true;
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
    double value_ = 0.0;
};

}  // namespace kcontact
