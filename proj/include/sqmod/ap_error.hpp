#pragma once

// Prime sums in arithmetic progressions, their maximal error E(x, q), the
// average of E over square moduli, Riesz means with their remainders, and
// multiplicative convolutions of dyadic coefficient blocks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sqmod/errors.hpp"
#include "sqmod/parallel.hpp"
#include "sqmod/prime_table.hpp"
#include "sqmod/summation.hpp"

namespace sqmod {

namespace detail {

/// floor(x) for x >= 0 as an integer count bound; negative x gives 0.
inline std::uint64_t floor_bound(double x) {
    if (!std::isfinite(x)) throw DomainError("non-finite real argument");
    return x < 1.0 ? 0 : static_cast<std::uint64_t>(std::floor(x));
}

inline std::uint64_t reduce_residue(std::int64_t a, std::uint64_t q) {
    const auto m = static_cast<std::int64_t>(q);
    std::int64_t r = a % m;
    if (r < 0) r += m;
    return static_cast<std::uint64_t>(r);
}

/// phi(n) for n up to limit^2, by trial division when n is beyond the table.
inline std::uint64_t totient(std::uint64_t n, const PrimeTable& t) {
    if (n <= t.limit()) return t.euler_phi(n);
    std::uint64_t phi = 1;
    for (const std::uint64_t p : t.primes()) {
        if (p * p > n) break;
        if (n % p != 0) continue;
        n /= p;
        phi *= p - 1;
        while (n % p == 0) {
            n /= p;
            phi *= p;
        }
    }
    if (n > 1) {
        if (n > t.limit() && n / t.limit() > t.limit())
            throw RangeError("totient argument exceeds the square of the prime table limit");
        phi *= n - 1;
    }
    return phi;
}

inline std::int64_t mod_inverse(std::int64_t a, std::int64_t m) {
    std::int64_t g = m, x = 0, x1 = 1, a1 = a % m;
    if (a1 < 0) a1 += m;
    std::int64_t b = a1;
    while (b != 0) {
        const std::int64_t q = g / b;
        std::tie(g, b) = std::make_pair(b, g - q * b);
        std::tie(x, x1) = std::make_pair(x1, x - q * x1);
    }
    if (g != 1) throw DomainError("no modular inverse");
    x %= m;
    return x < 0 ? x + m : x;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Square moduli window

/// The squares q^2 in the half-open range (Q, 2Q], stored as q_min..q_max.
class SquareModulusWindow {
public:
    explicit SquareModulusWindow(double Q) : Q_(Q) {
        if (!std::isfinite(Q) || Q <= 0.0) throw DomainError("window parameter Q must be positive");
        if (Q > 1e18) throw RangeError("window parameter Q too large");
        auto sq = [](std::uint64_t q) { return static_cast<double>(q) * static_cast<double>(q); };
        auto lo = static_cast<std::uint64_t>(std::sqrt(Q));
        while (lo > 1 && sq(lo - 1) > Q) --lo;
        while (sq(lo) <= Q) ++lo;
        auto hi = static_cast<std::uint64_t>(std::sqrt(2.0 * Q)) + 1;
        while (hi > 0 && sq(hi) > 2.0 * Q) --hi;
        q_min_ = lo;
        q_max_ = hi;
    }

    double Q() const noexcept { return Q_; }
    std::uint64_t q_min() const noexcept { return q_min_; }
    std::uint64_t q_max() const noexcept { return q_max_; }
    bool empty() const noexcept { return q_min_ > q_max_; }
    std::uint64_t size() const noexcept { return empty() ? 0 : q_max_ - q_min_ + 1; }

    std::vector<std::uint64_t> roots() const {
        std::vector<std::uint64_t> out;
        for (std::uint64_t q = q_min_; q <= q_max_ && !empty(); ++q) out.push_back(q);
        return out;
    }

private:
    double Q_;
    std::uint64_t q_min_ = 1;
    std::uint64_t q_max_ = 0;
};

// ---------------------------------------------------------------------------
// Prime sums and E(x, q)

/// Sum of Lambda(n) over n <= x with n = a (mod q), walking the progression.
inline double psi_ap(double x, std::uint64_t q, std::int64_t a, const PrimeTable& t) {
    if (q == 0) throw DomainError("modulus must be positive");
    const auto X = detail::floor_bound(x);
    if (X > t.limit()) throw RangeError("x exceeds prime table limit");
    std::uint64_t n = detail::reduce_residue(a, q);
    if (n == 0) n = q;
    KahanSum acc;
    for (; n <= X; n += q) {
        if (const auto pp = t.prime_power(n)) acc.add(std::log(static_cast<double>(pp->prime)));
    }
    return acc.value();
}

struct ResidueError {
    double value = 0.0;          ///< max over reduced residues of |psi - x/phi(q)|
    std::uint64_t residue = 0;   ///< smallest residue attaining the maximum
};

namespace detail {

/// Progression sums for all residues mod q from one ascending prime-power scan.
inline std::vector<KahanSum> residue_sums(std::uint64_t X, std::uint64_t q, const PrimeTable& t) {
    std::vector<KahanSum> buckets(q);
    for (const auto& e : t.prime_powers_upto(X)) buckets[e.n % q].add(t.log_prime(e.prime_index));
    return buckets;
}

inline ResidueError max_reduced_error(std::span<const KahanSum> buckets, double main_term) {
    const std::uint64_t q = buckets.size();
    ResidueError out{-1.0, 0};
    for (std::uint64_t r = 0; r < q; ++r) {
        if (gcd_u64(r, q) != 1) continue;
        const double err = std::fabs(buckets[r].value() - main_term);
        if (err > out.value) out = {err, r};
    }
    return out;
}

}  // namespace detail

/// E(x, q) together with the residue that attains it.
inline ResidueError error_E_detail(double x, std::uint64_t q, const PrimeTable& t) {
    if (q == 0) throw DomainError("modulus must be positive");
    const auto X = detail::floor_bound(x);
    if (X > t.limit()) throw RangeError("x exceeds prime table limit");
    const auto buckets = detail::residue_sums(X, q, t);
    return detail::max_reduced_error(buckets, x / static_cast<double>(detail::totient(q, t)));
}

inline double error_E(double x, std::uint64_t q, const PrimeTable& t) {
    return error_E_detail(x, q, t).value;
}

struct ModulusError {
    std::uint64_t q;        ///< the modulus is q^2
    ResidueError error;
};

struct AveragedError {
    double total = 0.0;
    std::vector<ModulusError> per_modulus;  ///< ascending q
};

/// Upper bound on the residue buckets held at once by the shared scan.
inline constexpr std::uint64_t kMaxResidueBuckets = std::uint64_t{1} << 25;

/// Sum of E(x, q^2) over the window. Each worker makes a single pass over the
/// prime powers for its share of moduli; the reduction runs in ascending q.
inline AveragedError averaged_error_detail(double x, const SquareModulusWindow& window,
                                           const PrimeTable& t, unsigned threads = 1) {
    const auto X = detail::floor_bound(x);
    if (X > t.limit()) throw RangeError("x exceeds prime table limit");
    AveragedError out;
    if (window.empty()) return out;

    const auto qs = window.roots();
    std::uint64_t buckets_needed = 0;
    for (const auto q : qs) buckets_needed += q * q;
    if (buckets_needed > kMaxResidueBuckets)
        throw BudgetError("square-moduli window needs " + std::to_string(buckets_needed) +
                          " residue buckets; budget is " + std::to_string(kMaxResidueBuckets));

    out.per_modulus.resize(qs.size());
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, qs.size());
    parallel_for_index(workers, static_cast<unsigned>(workers), [&](std::size_t w) {
        std::vector<std::size_t> mine;
        for (std::size_t i = w; i < qs.size(); i += workers) mine.push_back(i);
        std::vector<std::vector<KahanSum>> buckets;
        buckets.reserve(mine.size());
        for (const auto i : mine) buckets.emplace_back(qs[i] * qs[i]);
        for (const auto& e : t.prime_powers_upto(X)) {
            const double lp = t.log_prime(e.prime_index);
            for (std::size_t j = 0; j < mine.size(); ++j) {
                const std::uint64_t m = qs[mine[j]] * qs[mine[j]];
                buckets[j][e.n % m].add(lp);
            }
        }
        for (std::size_t j = 0; j < mine.size(); ++j) {
            const std::uint64_t q = qs[mine[j]];
            const double main_term = x / static_cast<double>(q * detail::totient(q, t));
            out.per_modulus[mine[j]] = {q, detail::max_reduced_error(buckets[j], main_term)};
        }
    });

    KahanSum total;
    for (const auto& pm : out.per_modulus) total.add(pm.error.value);
    out.total = total.value();
    return out;
}

inline double averaged_error(double x, const SquareModulusWindow& window, const PrimeTable& t,
                             unsigned threads = 1) {
    return averaged_error_detail(x, window, t, threads).total;
}

// ---------------------------------------------------------------------------
// Riesz means

struct RieszParams {
    double x = 0.0;
    std::uint64_t q = 1;
    std::int64_t a = 0;
    std::uint64_t d = 1;
    unsigned k = 0;
};

inline constexpr unsigned kMaxRieszOrder = 60;
inline constexpr double kMaxRieszX = 1e15;
inline constexpr std::uint64_t kMaxRieszTerms = 2'000'000'000;

inline double factorial(unsigned k) {
    double f = 1.0;
    for (unsigned i = 2; i <= k; ++i) f *= i;
    return f;
}

/// Weight (log x/l)^k / k! attached to l in the k-th Riesz mean.
inline double riesz_weight(double x, std::uint64_t l, unsigned k) {
    if (k == 0) return 1.0;
    return std::pow(std::log(x / static_cast<double>(l)), static_cast<int>(k)) / factorial(k);
}

/// The progression { l >= 1 : l = a (mod q), l = 0 (mod d) } as first term + step.
struct DoubleProgression {
    bool solvable = false;
    std::uint64_t first = 0;
    std::uint64_t step = 0;
};

inline DoubleProgression double_progression(std::uint64_t q, std::int64_t a, std::uint64_t d) {
    if (q == 0 || d == 0) throw DomainError("moduli must be positive");
    const std::uint64_t g = gcd_u64(q, d);
    const std::uint64_t ar = detail::reduce_residue(a, q);
    if (ar % g != 0) return {};
    const std::uint64_t qg = q / g;
    const std::uint64_t step = qg * d;
    if (qg > 0 && step / qg != d) throw RangeError("lcm(q, d) overflows");
    // l = d*j with d*j = a (mod q)  <=>  (d/g) j = a/g (mod q/g)
    std::uint64_t j = 0;
    if (qg > 1) {
        const auto inv = detail::mod_inverse(static_cast<std::int64_t>((d / g) % qg),
                                             static_cast<std::int64_t>(qg));
        j = static_cast<std::uint64_t>((static_cast<unsigned __int128>((ar / g) % qg) * inv) % qg);
    }
    std::uint64_t first = d * j;
    if (first == 0) first = step;
    return {true, first, step};
}

inline void validate(const RieszParams& p) {
    if (p.q == 0 || p.d == 0) throw DomainError("Riesz moduli q and d must be positive");
    if (p.k > kMaxRieszOrder) throw DomainError("Riesz order k exceeds " + std::to_string(kMaxRieszOrder));
    if (!std::isfinite(p.x) || p.x > kMaxRieszX) throw RangeError("Riesz x outside supported range");
}

/// A_k(x, q, a, d): weighted count of l <= x in both progressions.
inline double riesz_mean_A(const RieszParams& p) {
    validate(p);
    const auto X = detail::floor_bound(p.x);
    const auto prog = double_progression(p.q, p.a, p.d);
    if (!prog.solvable || X < prog.first) return 0.0;
    const std::uint64_t terms = (X - prog.first) / prog.step + 1;
    if (p.k == 0) return static_cast<double>(terms);
    if (terms > kMaxRieszTerms) throw BudgetError("Riesz mean needs too many terms");
    KahanSum acc;
    for (std::uint64_t l = prog.first; l <= X; l += prog.step)
        acc.add(std::pow(std::log(p.x / static_cast<double>(l)), static_cast<int>(p.k)));
    return acc.value() / factorial(p.k);
}

/// r_k = A_k - x/(q d).
inline double riesz_error_r(const RieszParams& p) {
    return riesz_mean_A(p) - p.x / (static_cast<double>(p.q) * static_cast<double>(p.d));
}

// ---------------------------------------------------------------------------
// Dyadic convolution coefficients

enum class FactorFamily { one, log, custom };

/// One factor a_i(m) supported on M/2 < m <= M.
struct ConvolutionFactor {
    double M = 1.0;
    FactorFamily family = FactorFamily::one;
    std::function<double(std::uint64_t)> custom;

    std::uint64_t lo() const { return static_cast<std::uint64_t>(std::floor(M / 2.0)) + 1; }
    std::uint64_t hi() const { return static_cast<std::uint64_t>(std::floor(M)); }

    double coefficient(std::uint64_t m) const {
        switch (family) {
            case FactorFamily::one: return 1.0;
            case FactorFamily::log: return std::log(static_cast<double>(m));
            case FactorFamily::custom: return custom(m);
        }
        return 0.0;
    }
};

struct ConvolutionSpec {
    std::vector<ConvolutionFactor> factors;

    std::size_t fold_count() const noexcept { return factors.size(); }

    /// D = prod M_i.
    double D() const {
        double d = 1.0;
        for (const auto& f : factors) d *= f.M;
        return d;
    }
    /// D_1 = 2^{-fold_count} D.
    double D1() const { return std::ldexp(D(), -static_cast<int>(fold_count())); }

    static ConvolutionSpec uniform(std::size_t fold_count, double M, FactorFamily family) {
        ConvolutionSpec s;
        s.factors.assign(fold_count, ConvolutionFactor{M, family, {}});
        return s;
    }
};

/// Factors above `threshold` must carry the coefficients 1 or log m.
inline bool large_factor_rule_holds(const ConvolutionSpec& spec, double threshold) {
    return std::all_of(spec.factors.begin(), spec.factors.end(), [&](const ConvolutionFactor& f) {
        return f.M <= threshold || f.family != FactorFamily::custom;
    });
}

using CoefficientMap = std::map<std::uint64_t, double>;

inline double coefficient_at(const CoefficientMap& u, std::uint64_t d) {
    const auto it = u.find(d);
    return it == u.end() ? 0.0 : it->second;
}

inline constexpr double kMaxConvolutionSupport = 1e7;

/// u_d = sum over d = m_1 ... m_j of a_1(m_1) ... a_j(m_j), computed by
/// folding the factors in one at a time over a dense array indexed by d.
/// Only d with at least one representation appear in the result.
inline CoefficientMap convolution_coefficients(const ConvolutionSpec& spec) {
    if (spec.factors.empty()) throw ConfigError("convolution needs at least one factor");
    for (const auto& f : spec.factors) {
        if (!std::isfinite(f.M) || f.M < 1.0) throw ConfigError("factor range M must be >= 1");
        if (f.family == FactorFamily::custom && !f.custom)
            throw ConfigError("custom factor without a coefficient function");
    }
    const double D = spec.D();
    if (!(D <= kMaxConvolutionSupport))
        throw ConfigError("convolution support D = " + std::to_string(D) + " exceeds dense ceiling");
    const auto top = static_cast<std::uint64_t>(std::floor(D));

    std::vector<double> cur(top + 1, 0.0), next(top + 1, 0.0);
    std::vector<char> live(top + 1, 0), next_live(top + 1, 0);
    cur[1] = 1.0;
    live[1] = 1;
    for (const auto& f : spec.factors) {
        std::fill(next.begin(), next.end(), 0.0);
        std::fill(next_live.begin(), next_live.end(), 0);
        const auto lo = f.lo(), hi = f.hi();
        std::vector<double> coeff;
        for (auto m = lo; m <= hi; ++m) coeff.push_back(f.coefficient(m));
        for (std::uint64_t d = 1; d <= top; ++d) {
            if (!live[d]) continue;
            for (auto m = lo; m <= hi && d * m <= top; ++m) {
                next[d * m] += cur[d] * coeff[m - lo];
                next_live[d * m] = 1;
            }
        }
        std::swap(cur, next);
        std::swap(live, next_live);
    }
    CoefficientMap out;
    for (std::uint64_t d = 1; d <= top; ++d)
        if (live[d]) out.emplace(d, cur[d]);
    return out;
}

// ---------------------------------------------------------------------------
// Weighted remainder sums over square moduli

/// How a^{(q)} is picked for each modulus q^2.
struct ResidueRule {
    enum class Kind { worst_case, fixed };
    Kind kind = Kind::worst_case;
    std::int64_t residue = 1;

    static ResidueRule worst_case() { return {}; }
    static ResidueRule fixed(std::int64_t a) { return {Kind::fixed, a}; }
};

struct WeightedRemainder {
    double total = 0.0;
    struct Row {
        std::uint64_t q;         ///< modulus is q^2
        std::uint64_t residue;   ///< residue used (the maximiser for worst_case)
        double value;            ///< |sum_d u_d r_k(x, q^2, a, d)|
    };
    std::vector<Row> per_modulus;
};

inline constexpr std::uint64_t kMaxRemainderWork = 4'000'000'000;

/// Sum over q in the window of |sum_d u_d r_k(x, q^2, a^{(q)}, d)|, with no
/// moduli excluded. For each modulus, the Riesz weights of every multiple of
/// every d are binned by residue, so all residues are available at once.
inline WeightedRemainder weighted_remainder_sum(const CoefficientMap& u, double x,
                                                const SquareModulusWindow& window, unsigned k,
                                                ResidueRule rule, unsigned threads = 1) {
    if (k > kMaxRieszOrder) throw DomainError("Riesz order k exceeds " + std::to_string(kMaxRieszOrder));
    const auto X = detail::floor_bound(x);
    if (x > kMaxRieszX) throw RangeError("x outside supported range");
    WeightedRemainder out;
    if (window.empty()) return out;

    double work = 0.0;
    for (const auto& [d, ud] : u) work += static_cast<double>(X / d);
    if (work * static_cast<double>(window.size()) > static_cast<double>(kMaxRemainderWork))
        throw BudgetError("weighted remainder sum exceeds work budget");

    const auto qs = window.roots();
    std::uint64_t buckets_needed = 0;
    for (const auto q : qs) buckets_needed = std::max(buckets_needed, q * q);
    if (buckets_needed > kMaxResidueBuckets) throw BudgetError("modulus too large for residue buckets");

    out.per_modulus.resize(qs.size());
    parallel_for_index(qs.size(), threads, [&](std::size_t i) {
        const std::uint64_t q = qs[i];
        const std::uint64_t m = q * q;
        std::vector<KahanSum> buckets(m);
        KahanSum main;
        for (const auto& [d, ud] : u) {
            main.add(ud * x / (static_cast<double>(m) * static_cast<double>(d)));
            for (std::uint64_t l = d; l <= X; l += d) buckets[l % m].add(ud * riesz_weight(x, l, k));
        }
        const double main_term = main.value();
        WeightedRemainder::Row row{q, 0, -1.0};
        if (rule.kind == ResidueRule::Kind::fixed) {
            const auto r = detail::reduce_residue(rule.residue, m);
            if (gcd_u64(r, m) != 1)
                throw DomainError("fixed residue " + std::to_string(rule.residue) +
                                  " is not coprime to modulus " + std::to_string(m));
            row = {q, r, std::fabs(buckets[r].value() - main_term)};
        } else {
            for (std::uint64_t r = 0; r < m; ++r) {
                if (gcd_u64(r, m) != 1) continue;
                const double v = std::fabs(buckets[r].value() - main_term);
                if (v > row.value) row = {q, r, v};
            }
        }
        out.per_modulus[i] = row;
    });
    KahanSum total;
    for (const auto& row : out.per_modulus) total.add(row.value);
    out.total = total.value();
    return out;
}

// ---------------------------------------------------------------------------
// Power-law fit

struct PowerFit {
    double slope;
    double intercept;
};

/// Least-squares line through (log x, log value).
inline PowerFit exponent_fit(std::span<const std::pair<double, double>> samples) {
    if (samples.size() < 2) throw DomainError("exponent fit needs at least two samples");
    double sx = 0, sy = 0;
    for (const auto& [x, v] : samples) {
        if (!(x > 0.0) || !(v > 0.0)) throw DomainError("exponent fit needs positive x and values");
        sx += std::log(x);
        sy += std::log(v);
    }
    const double n = static_cast<double>(samples.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (const auto& [x, v] : samples) {
        const double dx = std::log(x) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(v) - my);
    }
    if (sxx == 0.0) throw DomainError("exponent fit needs at least two distinct x");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

}  // namespace sqmod
