#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "rmt/error.hpp"

namespace rmt {

/// Exact nonnegative-friendly rational used for rule quantities and formula
/// thresholds, so "30%" stays 3/10 and prints as "0.3" instead of a rounded
/// double.
class Rational {
  public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t value) : num_(value) {}
    Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) { normalize(); }

    /// Parses "30", "1.39", "-0.5". Anything else raises BadNumber.
    static Rational from_decimal_string(const std::string& text);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    bool is_integer() const { return den_ == 1; }

    /// Exact decimal expansion when the denominator is 2^a*5^b, otherwise a
    /// 12-digit fallback.
    std::string to_decimal_string() const;

    Rational operator/(std::int64_t d) const { return Rational(num_, den_ * d); }
    Rational operator*(std::int64_t m) const { return Rational(num_ * m, den_); }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return a.num_ * b.den_ < b.num_ * a.den_;
    }

  private:
    void normalize();

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

} // namespace rmt
