#pragma once

// Exponential sums at the points a/(g q^2), character sums over square moduli
// restricted by conductor, and Dirichlet polynomials on Re s = 1/2.
//
// Inequalities that hold with constant 1 are returned with a `holds` flag.
// Bounds whose implied constants are unknown are reported as ratios.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sqmod/ap_error.hpp"
#include "sqmod/characters.hpp"
#include "sqmod/errors.hpp"
#include "sqmod/farey.hpp"
#include "sqmod/parallel.hpp"
#include "sqmod/prime_table.hpp"
#include "sqmod/rational.hpp"
#include "sqmod/summation.hpp"
#include "sqmod/unit_root.hpp"

namespace sqmod {

/// Complex coefficients c_start, ..., c_{start+len-1} with a cached squared norm.
class CoefficientVector {
public:
    explicit CoefficientVector(std::vector<complex> values, std::int64_t start = 1)
        : start_(start), values_(std::move(values)) {
        if (values_.empty()) throw DomainError("coefficient vector must have at least one entry");
        KahanSum acc;
        for (const auto& v : values_) acc.add(std::norm(v));
        norm2_ = acc.value();
    }

    std::int64_t start() const noexcept { return start_; }
    std::int64_t last() const noexcept { return start_ + static_cast<std::int64_t>(values_.size()) - 1; }
    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<complex>& values() const noexcept { return values_; }
    complex at(std::int64_t n) const {
        if (n < start_ || n > last()) return {0.0, 0.0};
        return values_[static_cast<std::size_t>(n - start_)];
    }
    /// ||c||_2^2
    double norm2() const noexcept { return norm2_; }
    bool is_zero() const noexcept { return norm2_ == 0.0; }

    /// (n, c_n) pairs.
    std::vector<std::pair<std::int64_t, complex>> terms() const {
        std::vector<std::pair<std::int64_t, complex>> out;
        out.reserve(values_.size());
        for (std::size_t i = 0; i < values_.size(); ++i)
            out.emplace_back(start_ + static_cast<std::int64_t>(i), values_[i]);
        return out;
    }

private:
    std::int64_t start_;
    std::vector<complex> values_;
    double norm2_ = 0.0;
};

// ---------------------------------------------------------------------------
// Coefficient families

enum class CoefficientFamily { one, moebius, mangoldt, random };

inline CoefficientFamily parse_family(std::string_view name) {
    if (name == "one") return CoefficientFamily::one;
    if (name == "moebius") return CoefficientFamily::moebius;
    if (name == "mangoldt") return CoefficientFamily::mangoldt;
    if (name == "random") return CoefficientFamily::random;
    throw ConfigError("unknown coefficient family '" + std::string(name) + "'");
}

inline std::string_view family_name(CoefficientFamily f) {
    switch (f) {
        case CoefficientFamily::one: return "one";
        case CoefficientFamily::moebius: return "moebius";
        case CoefficientFamily::mangoldt: return "mangoldt";
        case CoefficientFamily::random: return "random";
    }
    return "?";
}

/// Uniform double in [0, 1) from the top 53 bits; unlike the standard
/// distributions this is identical on every platform.
inline double unit_interval(std::mt19937_64& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

/// Uniform point of the closed unit disk.
inline complex random_disk_point(std::mt19937_64& eng) {
    const double r = std::sqrt(unit_interval(eng));
    return r * unit_root(unit_interval(eng));
}

/// Coefficients on [start, start + length): 1, mu(n), Lambda(n)/log n, or
/// seeded uniform points of the unit disk.
inline CoefficientVector make_coefficients(CoefficientFamily family, std::int64_t start, std::size_t length,
                                           std::uint64_t seed, const PrimeTable& t) {
    if (start < 1) throw DomainError("coefficient index must start at 1 or later");
    std::vector<complex> v(length);
    std::mt19937_64 eng(seed);
    for (std::size_t i = 0; i < length; ++i) {
        const auto n = static_cast<std::uint64_t>(start) + i;
        switch (family) {
            case CoefficientFamily::one: v[i] = 1.0; break;
            case CoefficientFamily::moebius: v[i] = t.mobius(n); break;
            case CoefficientFamily::mangoldt: v[i] = t.prime_power(n) ? 1.0 / t.prime_power(n)->exponent : 0.0; break;
            case CoefficientFamily::random: v[i] = random_disk_point(eng); break;
        }
    }
    return CoefficientVector(std::move(v), start);
}

// ---------------------------------------------------------------------------
// Exponential sums

/// T(alpha) = sum c_n e(n alpha), with n alpha reduced mod 1 exactly.
inline complex exp_sum_T(const CoefficientVector& c, const Rational& alpha) {
    const auto r = alpha.den();
    auto p = alpha.num() % r;
    if (p < 0) p += r;
    complex s{0.0, 0.0};
    for (const auto& [n, v] : c.terms()) {
        auto nr = n % r;
        if (nr < 0) nr += r;
        const auto k = static_cast<std::int64_t>(static_cast<__int128>(nr) * p % r);
        s += v * unit_root(k, r);
    }
    return s;
}

inline complex exp_sum_T(const CoefficientVector& c, double alpha) {
    const double frac = alpha - std::floor(alpha);
    complex s{0.0, 0.0};
    for (const auto& [n, v] : c.terms()) {
        const double t = std::fmod(static_cast<double>(n) * frac, 1.0);
        s += v * unit_root(t);
    }
    return s;
}

inline constexpr std::uint64_t kMaxSieveModulus = 10'000;

namespace detail {

/// sum over a in [1, r], gcd(a, r) = 1 of |sum_j folded[j] e(a j / r)|^2.
inline double reduced_point_energy(std::span<const complex> folded, std::uint64_t r) {
    std::vector<complex> roots(r);
    for (std::uint64_t k = 0; k < r; ++k)
        roots[k] = unit_root(static_cast<std::int64_t>(k), static_cast<std::int64_t>(r));
    std::vector<std::uint64_t> support;
    for (std::uint64_t j = 0; j < r; ++j)
        if (folded[j] != complex{0.0, 0.0}) support.push_back(j);
    KahanSum total;
    for (std::uint64_t a = 1; a <= r; ++a) {
        if (gcd_u64(a, r) != 1) continue;
        complex s{0.0, 0.0};
        for (const auto j : support) s += folded[j] * roots[a * j % r];
        total.add(std::norm(s));
    }
    return total.value();
}

inline std::uint64_t sieve_modulus(std::uint64_t q, std::uint64_t g) {
    const std::uint64_t r = g * q * q;
    if (r > kMaxSieveModulus)
        throw BudgetError("modulus g q^2 = " + std::to_string(r) + " exceeds budget " +
                          std::to_string(kMaxSieveModulus));
    return r;
}

}  // namespace detail

/// sum_{q <= Q} sum_{a = 1, (a, g q^2) = 1}^{g q^2} |T(a / (g q^2))|^2.
inline double lemma2_lhs(const CoefficientVector& c, std::uint64_t Q, std::uint64_t g) {
    if (Q == 0 || g == 0) throw DomainError("Q and g must be positive");
    for (std::uint64_t q = 1; q <= Q; ++q) detail::sieve_modulus(q, g);
    const auto terms = c.terms();
    KahanSum total;
    for (std::uint64_t q = 1; q <= Q; ++q) {
        const auto r = g * q * q;
        const auto folded = fold_by_residue(terms, r);
        total.add(detail::reduced_point_energy(folded, r));
    }
    return total.value();
}

/// lemma2_lhs / ((Q N)^eps (1 + g/N)(g Q^3 + Q^{1/2} N) ||c||^2), N the last index.
inline double lemma2_bound_ratio(const CoefficientVector& c, std::uint64_t Q, std::uint64_t g, double eps) {
    const double lhs = lemma2_lhs(c, Q, g);
    if (c.is_zero()) return 0.0;
    const double N = static_cast<double>(c.last());
    const double q = static_cast<double>(Q), gd = static_cast<double>(g);
    const double rhs = std::pow(q * N, eps) * (1.0 + gd / N) * (gd * q * q * q + std::sqrt(q) * N) * c.norm2();
    return lhs / rhs;
}

struct InequalityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = true;
};

struct DualityCheck : InequalityCheck {
    std::uint64_t max_M = 0;
    Rational witness;
};

/// lemma2_lhs <= (N + 1/Delta) max_alpha M(alpha) ||c||^2.
inline DualityCheck duality_bound_check(const CoefficientVector& c, std::uint64_t Q, std::uint64_t g,
                                        const Rational& delta) {
    if (!(delta > Rational(0))) throw DomainError("Delta must be positive");
    DualityCheck out;
    out.lhs = lemma2_lhs(c, Q, g);
    const auto sweep = max_M_sweep(delta, Q, g);
    out.max_M = sweep.max_value;
    out.witness = sweep.witness;
    const double N = static_cast<double>(c.last());
    out.rhs = (N + 1.0 / delta.to_double()) * static_cast<double>(sweep.max_value) * c.norm2();
    out.holds = out.lhs <= out.rhs;
    return out;
}

/// Sum over primitive chi mod gk^2 of |sum_{(m,t)=1} c_m chi(m)|^2 against
/// (phi(gk^2)/gk^2) sum_{(a, gk^2) = 1} |sum_{(m,t)=1} c_m e(a m / gk^2)|^2.
inline InequalityCheck primitive_reduction_check(const CoefficientVector& c, std::uint64_t modulus,
                                                 std::uint64_t t_coprime) {
    if (modulus == 0 || t_coprime == 0) throw DomainError("modulus and t must be positive");
    if (modulus > kMaxSieveModulus) throw BudgetError("modulus exceeds character budget");
    auto terms = c.terms();
    for (auto& [n, v] : terms)
        if (gcd_u64(static_cast<std::uint64_t>(n), t_coprime) != 1) v = 0.0;
    const auto folded = fold_by_residue(terms, modulus);

    const auto group = CharacterGroup::create(modulus);
    const UnitLogTable logs(*group);
    KahanSum lhs;
    for (const auto& chi : group->characters())
        if (chi.is_primitive()) lhs.add(std::norm(character_sum(chi, folded, logs)));

    const double scale = static_cast<double>(group->order()) / static_cast<double>(modulus);
    InequalityCheck out;
    out.lhs = lhs.value();
    out.rhs = scale * detail::reduced_point_energy(folded, modulus);
    out.holds = out.lhs <= out.rhs * (1.0 + 1e-9);
    return out;
}

// ---------------------------------------------------------------------------
// Character moments over square moduli

struct CharacterMoment {
    double value = 0.0;
    std::uint64_t characters = 0;  ///< (q, chi) pairs summed
};

/// T = sum over q^2 in the window, chi mod q^2 with low < C(chi) <= high, of
/// |sum_m c_m chi(m)|^2.
inline CharacterMoment char_moment_T_lambda(const CoefficientVector& c, const SquareModulusWindow& window,
                                            double low, double high, const PrimeTable& t,
                                            unsigned threads = 1) {
    CharacterMoment out;
    if (window.empty()) return out;
    const auto qs = window.roots();
    for (const auto q : qs)
        if (q * q > kMaxSieveModulus) throw BudgetError("square modulus exceeds character budget");
    const auto terms = c.terms();
    std::vector<CharacterMoment> per(qs.size());
    parallel_for_index(qs.size(), threads, [&](std::size_t i) {
        const auto m = qs[i] * qs[i];
        const auto folded = fold_by_residue(terms, m);
        KahanSum acc;
        std::uint64_t count = 0;
        const auto chars = chars_with_conductor_in(m, low, high, t);
        if (chars.empty()) return;
        const UnitLogTable logs(chars.front().chi.group());
        for (const auto& cc : chars) {
            acc.add(std::norm(character_sum(cc.chi, folded, logs)));
            ++count;
        }
        per[i] = {acc.value(), count};
    });
    KahanSum total;
    for (const auto& p : per) {
        total.add(p.value);
        out.characters += p.characters;
    }
    out.value = total.value();
    return out;
}

/// x^eps (Q^{1/2} x^lambda + Q^{3/4} M x^{-lambda/2}) ||c||^2.
inline double lemma3_bound(double x, double Q, double M, double lambda, double eps, double norm2) {
    return std::pow(x, eps) *
           (std::sqrt(Q) * std::pow(x, lambda) + std::pow(Q, 0.75) * M * std::pow(x, -lambda / 2.0)) * norm2;
}

/// T(lambda) over the conductor window (x^lambda, 2 x^lambda], divided by its bound.
inline double lemma3_ratio(const CoefficientVector& c, const SquareModulusWindow& window, double x,
                           double lambda, double eps, const PrimeTable& t, unsigned threads = 1) {
    if (c.is_zero()) return 0.0;
    const double xl = std::pow(x, lambda);
    const auto T = char_moment_T_lambda(c, window, xl, 2.0 * xl, t, threads);
    return T.value / lemma3_bound(x, window.Q(), static_cast<double>(c.last()), lambda, eps, c.norm2());
}

// ---------------------------------------------------------------------------
// Dirichlet polynomials

struct DirichletPolySpec {
    const CoefficientVector& coeffs;
    complex s;
    const DirichletCharacter& chi;
};

inline void require_critical_line(complex s) {
    if (s.real() != 0.5) throw DomainError("Dirichlet polynomials are evaluated on Re s = 1/2 only");
}

/// sum a_n chi(n) n^{-s}.
inline complex dirichlet_poly_eval(const DirichletPolySpec& spec) {
    require_critical_line(spec.s);
    complex acc{0.0, 0.0};
    for (const auto& [n, a] : spec.coeffs.terms()) {
        if (a == complex{0.0, 0.0}) continue;
        const complex chi = spec.chi(n);
        if (chi == complex{0.0, 0.0}) continue;
        acc += a * chi * std::exp(-spec.s * std::log(static_cast<double>(n)));
    }
    return acc;
}

struct BilinearSum {
    double S = 0.0;        ///< sum |H K|
    double sum_H2 = 0.0;   ///< sum |H|^2 over the same (q, chi)
    double sum_K2 = 0.0;   ///< sum |K|^2 over the same (q, chi)
    std::uint64_t characters = 0;
};

/// S = sum over q^2 in the window and chi mod q^2 with low < C(chi) <= high of
/// |H(1/2 + it, chi) K(1/2 + it, chi)|.
inline BilinearSum bilinear_sum_S(const CoefficientVector& h, const CoefficientVector& k, double t_shift,
                                  const SquareModulusWindow& window, double low, double high,
                                  const PrimeTable& t, unsigned threads = 1) {
    const complex s{0.5, t_shift};
    BilinearSum out;
    if (window.empty()) return out;
    const auto qs = window.roots();
    for (const auto q : qs)
        if (q * q > kMaxSieveModulus) throw BudgetError("square modulus exceeds character budget");

    auto weighted = [&](const CoefficientVector& c) {
        auto terms = c.terms();
        for (auto& [n, v] : terms) v *= std::exp(-s * std::log(static_cast<double>(n)));
        return terms;
    };
    const auto hw = weighted(h), kw = weighted(k);

    struct Partial {
        double S, H2, K2;
        std::uint64_t count;
    };
    std::vector<Partial> per(qs.size());
    parallel_for_index(qs.size(), threads, [&](std::size_t i) {
        const auto m = qs[i] * qs[i];
        const auto hf = fold_by_residue(hw, m), kf = fold_by_residue(kw, m);
        KahanSum S, H2, K2;
        std::uint64_t count = 0;
        const auto chars = chars_with_conductor_in(m, low, high, t);
        if (chars.empty()) return;
        const UnitLogTable logs(chars.front().chi.group());
        for (const auto& cc : chars) {
            const complex H = character_sum(cc.chi, hf, logs), K = character_sum(cc.chi, kf, logs);
            S.add(std::abs(H * K));
            H2.add(std::norm(H));
            K2.add(std::norm(K));
            ++count;
        }
        per[i] = {S.value(), H2.value(), K2.value(), count};
    });
    KahanSum S, H2, K2;
    for (const auto& p : per) {
        S.add(p.S);
        H2.add(p.H2);
        K2.add(p.K2);
        out.characters += p.count;
    }
    out.S = S.value();
    out.sum_H2 = H2.value();
    out.sum_K2 = K2.value();
    return out;
}

/// S / (x^{1/2 - eps/20} Q^{1/2}).
inline double lemma4_ratio(double S, double x, double Q, double eps) {
    return S / (std::pow(x, 0.5 - eps / 20.0) * std::sqrt(Q));
}

/// Size hypotheses for the bilinear bound, with "<<" read as "<=".
struct Lemma4Conditions {
    bool lambda_range;        ///< 1 <= x^lambda <= Q
    bool q_regime;            ///< Q <= x^{1/2 - eps}
    bool lambda_large;        ///< x^lambda >= Q^{1/2} x^{eps/6}
    bool k_lower;             ///< Q x^{-lambda} <= K
    bool k_le_h;              ///< K <= H
    bool h_upper;             ///< H <= x^{3/5}
    bool product;             ///< H K <= x

    bool all() const {
        return lambda_range && q_regime && lambda_large && k_lower && k_le_h && h_upper && product;
    }
};

inline Lemma4Conditions lemma4_conditions(double x, double Q, double lambda, double H, double K, double eps) {
    const double xl = std::pow(x, lambda);
    return {
        1.0 <= xl && xl <= Q,
        Q <= std::pow(x, 0.5 - eps),
        xl >= std::sqrt(Q) * std::pow(x, eps / 6.0),
        Q / xl <= K,
        K <= H,
        H <= std::pow(x, 0.6),
        H * K <= x,
    };
}

}  // namespace sqmod
