#pragma once

// Exact counts of fractions a/q^2 and a/(g q^2) lying within Delta of a
// target on the circle R/Z, and the maximum of that count over all targets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sqmod/errors.hpp"
#include "sqmod/prime_table.hpp"
#include "sqmod/rational.hpp"

namespace sqmod {

/// Target reduced into [0, 1), Delta >= 0, Q >= 1, g >= 1.
///
/// Delta above 1/2 is accepted and behaves like 1/2, since no point of the
/// circle is further than 1/2 from the target.
class FareyQuery {
public:
    FareyQuery(Rational target, Rational delta, std::uint64_t Q, std::uint64_t g = 1)
        : target_(target.frac()), delta_(delta), Q_(Q), g_(g) {
        if (delta < Rational(0)) throw DomainError("Delta must be nonnegative");
        if (Q == 0) throw DomainError("Q must be at least 1");
        if (g == 0) throw DomainError("g must be at least 1");
    }

    const Rational& target() const noexcept { return target_; }
    const Rational& delta() const noexcept { return delta_; }
    std::uint64_t Q() const noexcept { return Q_; }
    std::uint64_t g() const noexcept { return g_; }

private:
    Rational target_;
    Rational delta_;
    std::uint64_t Q_;
    std::uint64_t g_;
};

namespace detail {

/// Calls fn(j) for each integer j with |j/r - alpha - n| <= delta for some
/// integer n, once per residue class mod r.
template <typename Fn>
void for_each_near_residue(const Rational& alpha, const Rational& delta, std::uint64_t r, Fn&& fn) {
    const auto ri = static_cast<Rational::int_type>(r);
    if (Rational(2) * delta >= Rational(1)) {
        for (std::uint64_t j = 0; j < r; ++j) fn(j);
        return;
    }
    // The window [r(alpha - delta), r(alpha + delta)] is shorter than r, so
    // its integers are pairwise distinct mod r.
    const auto lo = (Rational(ri) * (alpha - delta)).ceil();
    const auto hi = (Rational(ri) * (alpha + delta)).floor();
    for (auto j = lo; j <= hi; ++j) {
        auto red = j % ri;
        if (red < 0) red += ri;
        fn(static_cast<std::uint64_t>(red));
    }
}

}  // namespace detail

/// Pairs (a, q), 1 <= a <= q^2, q <= Q, gcd(a, q) = 1, ||a/q^2 - beta|| <= Delta.
inline std::uint64_t count_N(const FareyQuery& query) {
    if (query.g() != 1) throw DomainError("count_N is defined for g = 1 only");
    std::uint64_t count = 0;
    for (std::uint64_t q = 1; q <= query.Q(); ++q) {
        const std::uint64_t r = q * q;
        detail::for_each_near_residue(query.target(), query.delta(), r, [&](std::uint64_t j) {
            const std::uint64_t a = j == 0 ? r : j;
            if (gcd_u64(a, q) == 1) ++count;
        });
    }
    return count;
}

/// Pairs (a, q), 0 <= a <= g q^2 - 1, gcd(a, g q^2) = 1, 1 <= q <= Q,
/// ||a/(g q^2) - alpha|| <= Delta. gcd(0, m) = m, so a = 0 only counts for m = 1.
inline std::uint64_t count_M(const FareyQuery& query) {
    std::uint64_t count = 0;
    for (std::uint64_t q = 1; q <= query.Q(); ++q) {
        const std::uint64_t r = query.g() * q * q;
        detail::for_each_near_residue(query.target(), query.delta(), r, [&](std::uint64_t a) {
            if (gcd_u64(a, r) == 1) ++count;
        });
    }
    return count;
}

/// count_N / ((Q/Delta)^eps (Q^3 Delta + Q^{1/2})).
inline double lemma1_ratio(const FareyQuery& query, double eps) {
    if (!(query.delta() > Rational(0))) throw DomainError("lemma1_ratio needs Delta > 0");
    const double n = static_cast<double>(count_N(query));
    if (n == 0.0) return 0.0;
    const double Q = static_cast<double>(query.Q());
    const double d = query.delta().to_double();
    return n / (std::pow(Q / d, eps) * (Q * Q * Q * d + std::sqrt(Q)));
}

// ---------------------------------------------------------------------------

struct ResidueSplit {
    std::int64_t b;
    std::int64_t n;
    friend bool operator==(const ResidueSplit&, const ResidueSplit&) = default;
};

/// a = b + q^2 n with 0 <= b < q^2 and 0 <= n < g.
inline ResidueSplit residue_split(std::int64_t a, std::uint64_t q, std::uint64_t g) {
    if (q == 0 || g == 0) throw DomainError("q and g must be positive");
    const auto r = static_cast<std::int64_t>(q * q);
    if (a < 0 || a >= r * static_cast<std::int64_t>(g))
        throw DomainError("residue " + std::to_string(a) + " outside [0, g q^2)");
    return {a % r, a / r};
}

/// ||b/q^2 - g alpha|| <= g Delta for the split of a, which must hold whenever
/// ||a/(g q^2) - alpha|| <= Delta.
inline bool split_inflation_holds(std::int64_t a, std::uint64_t q, std::uint64_t g, const Rational& alpha,
                                  const Rational& delta) {
    const auto [b, n] = residue_split(a, q, g);
    const auto gi = static_cast<Rational::int_type>(g);
    const Rational lhs = dist_to_nearest_int(Rational(b, static_cast<Rational::int_type>(q * q)) - Rational(gi) * alpha);
    return lhs <= Rational(gi) * delta;
}

// ---------------------------------------------------------------------------

struct SweepResult {
    std::uint64_t max_value = 0;
    Rational witness;  ///< smallest alpha in [0, 1) attaining max_value
    std::uint64_t fractions = 0;
};

inline constexpr std::uint64_t kMaxSweepFractions = 4'000'000;

/// All admissible fractions a/(g q^2) of count_M, in no particular order.
inline std::vector<Rational> admissible_fractions(std::uint64_t Q, std::uint64_t g) {
    std::uint64_t total = 0;
    for (std::uint64_t q = 1; q <= Q; ++q) total += g * q * q;
    if (total > 8 * kMaxSweepFractions)
        throw BudgetError("fraction enumeration for Q = " + std::to_string(Q) + ", g = " + std::to_string(g) +
                          " exceeds budget");
    std::vector<Rational> out;
    for (std::uint64_t q = 1; q <= Q; ++q) {
        const std::uint64_t r = g * q * q;
        for (std::uint64_t a = 0; a < r; ++a)
            if (gcd_u64(a, r) == 1)
                out.emplace_back(static_cast<Rational::int_type>(a), static_cast<Rational::int_type>(r));
    }
    if (out.size() > kMaxSweepFractions) throw BudgetError("too many fractions for the sweep");
    return out;
}

/// max over real alpha of count_M(alpha) by an endpoint sweep on the circle.
///
/// Each fraction f contributes the closed arc [f - Delta, f + Delta]. The arc
/// is laid down at f - 1, f and f + 1 so that every alpha in [0, 1) sees each
/// nearby fraction exactly once; ties open before they close.
inline SweepResult max_M_sweep(const Rational& delta, std::uint64_t Q, std::uint64_t g) {
    if (delta < Rational(0)) throw DomainError("Delta must be nonnegative");
    if (Q == 0 || g == 0) throw DomainError("Q and g must be positive");
    const auto fractions = admissible_fractions(Q, g);
    SweepResult out;
    out.fractions = fractions.size();
    if (Rational(2) * delta >= Rational(1)) {
        out.max_value = fractions.size();
        out.witness = Rational(0);
        return out;
    }

    struct Event {
        Rational pos;
        int kind;  // 0 opens, 1 closes
    };
    std::vector<Event> events;
    events.reserve(6 * fractions.size());
    for (const auto& f : fractions) {
        for (int shift = -1; shift <= 1; ++shift) {
            const Rational c = f + Rational(shift);
            events.push_back({c - delta, 0});
            events.push_back({c + delta, 1});
        }
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.pos != b.pos) return a.pos < b.pos;
        return a.kind < b.kind;
    });

    const Rational zero(0), one(1);
    std::uint64_t depth = 0;
    bool zero_seen = false;
    for (const auto& ev : events) {
        if (!zero_seen && (ev.pos > zero || (ev.pos == zero && ev.kind == 1))) {
            // Every arc containing 0 has been opened and none closed yet.
            zero_seen = true;
            out.max_value = depth;
            out.witness = zero;
        }
        if (ev.kind == 0) {
            ++depth;
            if (zero_seen && ev.pos < one && depth > out.max_value) {
                out.max_value = depth;
                out.witness = ev.pos;
            }
        } else {
            --depth;
        }
    }
    return out;
}

}  // namespace sqmod
