#include "rmt/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

namespace rmt {

void Rational::normalize() {
    if (den_ == 0) raise("BadNumber", "config", "zero denominator");
    if (den_ < 0) {
        num_ = -num_;
        den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
        num_ /= g;
        den_ /= g;
    }
    if (num_ == 0) den_ = 1;
}

Rational Rational::from_decimal_string(const std::string& text) {
    std::string s = text;
    bool negative = false;
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        negative = s[i] == '-';
        ++i;
    }
    std::int64_t whole = 0, frac = 0, scale = 1;
    bool any_digit = false, seen_dot = false;
    for (; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '.') {
            if (seen_dot) raise("BadNumber", "tokenize", "malformed number '" + text + "'");
            seen_dot = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c)))
            raise("BadNumber", "tokenize", "malformed number '" + text + "'");
        any_digit = true;
        if (!seen_dot) {
            whole = whole * 10 + (c - '0');
        } else {
            frac = frac * 10 + (c - '0');
            scale *= 10;
        }
    }
    if (!any_digit) raise("BadNumber", "tokenize", "malformed number '" + text + "'");
    Rational r(whole * scale + frac, scale);
    if (negative) r = r * -1;
    return r;
}

std::string Rational::to_decimal_string() const {
    std::int64_t n = num_;
    std::string sign;
    if (n < 0) {
        sign = "-";
        n = -n;
    }
    // Exact expansion works iff den = 2^a * 5^b.
    std::int64_t d = den_;
    while (d % 2 == 0) d /= 2;
    while (d % 5 == 0) d /= 5;
    if (d != 1) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12g", to_double());
        return buf;
    }
    const std::int64_t whole = n / den_;
    std::int64_t rem = n % den_;
    std::string out = sign + std::to_string(whole);
    if (rem == 0) return out;
    out += '.';
    while (rem != 0) {
        rem *= 10;
        out += static_cast<char>('0' + rem / den_);
        rem %= den_;
    }
    return out;
}

} // namespace rmt
