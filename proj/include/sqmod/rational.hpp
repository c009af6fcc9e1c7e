#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>
#include <charconv>

#include "sqmod/errors.hpp"

namespace sqmod {

/// Exact rational with 64-bit numerator and positive 64-bit denominator.
///
/// Kept in lowest terms. Intermediate products go through __int128 so that
/// comparisons never overflow; arithmetic results that do not fit back into
/// 64 bits raise RangeError rather than wrapping.
class Rational {
public:
    using int_type = std::int64_t;

    constexpr Rational() = default;
    constexpr Rational(int_type n) : num_(n), den_(1) {}  // NOLINT implicit from integer
    Rational(int_type n, int_type d) { assign(n, d); }

    constexpr int_type num() const noexcept { return num_; }
    constexpr int_type den() const noexcept { return den_; }

    double to_double() const noexcept {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    /// Largest integer not exceeding the value.
    int_type floor() const noexcept {
        int_type q = num_ / den_;
        if (num_ % den_ != 0 && num_ < 0) --q;
        return q;
    }
    int_type ceil() const noexcept {
        int_type q = num_ / den_;
        if (num_ % den_ != 0 && num_ > 0) ++q;
        return q;
    }

    /// Representative in [0, 1).
    Rational frac() const { return from_wide(wide(num_) - wide(floor()) * den_, den_); }

    Rational operator-() const { return from_wide(-wide(num_), den_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return from_wide(wide(a.num_) * b.den_ + wide(b.num_) * a.den_, wide(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return from_wide(wide(a.num_) * b.den_ - wide(b.num_) * a.den_, wide(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from_wide(wide(a.num_) * b.num_, wide(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw DomainError("rational division by zero");
        return from_wide(wide(a.num_) * b.den_, wide(a.den_) * b.num_);
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
        const wide lhs = wide(a.num_) * b.den_;
        const wide rhs = wide(b.num_) * a.den_;
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    /// Parses "p", "p/q" or a finite decimal such as "0.01".
    static Rational parse(std::string_view text) {
        auto fail = [&] { return ConfigError("not a rational number: '" + std::string(text) + "'"); };
        auto parse_int = [&](std::string_view s) {
            int_type v{};
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) throw fail();
            return v;
        };
        if (auto slash = text.find('/'); slash != std::string_view::npos) {
            int_type d = parse_int(text.substr(slash + 1));
            if (d == 0) throw fail();
            return Rational(parse_int(text.substr(0, slash)), d);
        }
        if (auto dot = text.find('.'); dot != std::string_view::npos) {
            std::string digits(text.substr(0, dot));
            std::string_view tail = text.substr(dot + 1);
            if (tail.size() > 17) throw fail();
            digits += tail;
            int_type d = 1;
            for (std::size_t i = 0; i < tail.size(); ++i) d *= 10;
            if (digits == "-" || digits.empty()) throw fail();
            return Rational(parse_int(digits), d);
        }
        return Rational(parse_int(text));
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    using wide = __int128;

    static wide wabs(wide v) { return v < 0 ? -v : v; }
    static wide wgcd(wide a, wide b) {
        a = wabs(a);
        b = wabs(b);
        while (b != 0) {
            wide t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    static Rational from_wide(wide n, wide d) {
        if (d == 0) throw DomainError("rational with zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        constexpr wide u64max = static_cast<wide>(UINT64_MAX);
        const wide an = wabs(n);
        const wide g = (an <= u64max && d <= u64max)
                           ? static_cast<wide>(std::gcd(static_cast<std::uint64_t>(an), static_cast<std::uint64_t>(d)))
                           : wgcd(n, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        constexpr wide lo = INT64_MIN, hi = INT64_MAX;
        if (n < lo || n > hi || d > hi) throw RangeError("rational overflow");
        Rational r;
        r.num_ = static_cast<int_type>(n);
        r.den_ = static_cast<int_type>(d);
        return r;
    }

    void assign(int_type n, int_type d) { *this = from_wide(n, d); }

    int_type num_ = 0;
    int_type den_ = 1;
};

/// Distance to the nearest integer, exact.
inline Rational dist_to_nearest_int(const Rational& theta) {
    const Rational f = theta.frac();
    const Rational g = Rational(1) - f;
    return f <= g ? f : g;
}

}  // namespace sqmod
