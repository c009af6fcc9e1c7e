#pragma once

// Dirichlet characters stored as exponent vectors on fixed generators of the
// unit group mod m.
//
// Generator conventions (stable across runs, so labels can be golden-tested):
//   odd p^e      smallest primitive root mod p^e
//   2            trivial group
//   4            -1
//   2^e, e >= 3  -1 (order 2) and 5 (order 2^{e-2})
// Factors are ordered by ascending prime, and at p = 2 the -1 factor precedes
// the 5 factor. A character value is e(k/L) with L the group exponent; the
// exact index k is kept until a complex number is actually needed.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqmod/errors.hpp"
#include "sqmod/prime_table.hpp"
#include "sqmod/unit_root.hpp"

namespace sqmod {

namespace detail {

inline std::vector<PrimePower> factor_trial(std::uint64_t n) {
    std::vector<PrimePower> out;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        if (n % p != 0) continue;
        std::uint32_t e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.push_back({static_cast<std::uint32_t>(p), e});
    }
    if (n > 1) out.push_back({static_cast<std::uint32_t>(n), 1});
    return out;
}

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    b %= m;
    while (e) {
        if (e & 1) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

inline std::uint64_t ipow(std::uint64_t p, std::uint32_t e) {
    std::uint64_t r = 1;
    while (e--) r *= p;
    return r;
}

inline std::uint32_t valuation(std::uint64_t x, std::uint64_t p) {
    std::uint32_t v = 0;
    while (x != 0 && x % p == 0) {
        x /= p;
        ++v;
    }
    return v;
}

inline std::uint64_t smallest_primitive_root(std::uint64_t p, std::uint32_t e) {
    const std::uint64_t pe = ipow(p, e);
    const std::uint64_t order = pe / p * (p - 1);
    std::vector<std::uint64_t> order_primes;
    for (const auto& f : factor_trial(order)) order_primes.push_back(f.prime);
    for (std::uint64_t g = 2; g < pe; ++g) {
        if (g % p == 0) continue;
        const bool primitive = std::all_of(order_primes.begin(), order_primes.end(),
                                           [&](std::uint64_t r) { return powmod(g, order / r, pe) != 1; });
        if (primitive) return g;
    }
    return 1;  // pe == 2
}

/// n = r1 (mod m1), n = r2 (mod m2) for coprime m1, m2; result in [0, m1 m2).
inline std::uint64_t crt_pair(std::uint64_t r1, std::uint64_t m1, std::uint64_t r2, std::uint64_t m2) {
    if (m2 == 1) return r1 % m1;
    // n = r1 + m1 t, m1 t = r2 - r1 (mod m2)
    std::int64_t g = static_cast<std::int64_t>(m2), b = static_cast<std::int64_t>(m1 % m2), x = 0, x1 = 1;
    while (b != 0) {
        const std::int64_t q = g / b;
        std::int64_t tmp = g - q * b;
        g = b;
        b = tmp;
        tmp = x - q * x1;
        x = x1;
        x1 = tmp;
    }
    std::int64_t inv = x % static_cast<std::int64_t>(m2);
    if (inv < 0) inv += static_cast<std::int64_t>(m2);
    const std::uint64_t diff = (r2 % m2 + m2 - r1 % m2) % m2;
    const std::uint64_t t = mulmod(diff, static_cast<std::uint64_t>(inv), m2);
    return r1 % m1 + m1 * t;
}

}  // namespace detail

/// One cyclic factor of (Z/mZ)^*, living on the prime-power component p^e.
struct CyclicFactor {
    enum class Role { cyclic, sign, five };
    std::uint64_t prime;
    std::uint32_t exponent;
    std::uint64_t component;   ///< p^e
    std::uint64_t generator;   ///< as a residue mod p^e
    std::uint64_t order;
    Role role;
};

class DirichletCharacter;

class CharacterGroup : public std::enable_shared_from_this<CharacterGroup> {
    struct Private {};

public:
    static inline constexpr std::uint64_t kMaxModulus = 20'000'000;

    CharacterGroup(Private, std::uint64_t m) : modulus_(m) {
        if (m == 0) throw DomainError("character modulus must be positive");
        if (m > kMaxModulus) throw BudgetError("character modulus " + std::to_string(m) + " exceeds budget");
        build(detail::factor_trial(m));
    }

    static std::shared_ptr<const CharacterGroup> create(std::uint64_t m) {
        return std::make_shared<const CharacterGroup>(Private{}, m);
    }

    std::uint64_t modulus() const noexcept { return modulus_; }
    std::span<const CyclicFactor> factors() const noexcept { return factors_; }
    std::uint64_t order() const noexcept { return order_; }
    /// Exponent L of the group: every value is an L-th root of unity.
    std::uint64_t exponent() const noexcept { return exponent_; }

    /// Discrete log of n on factor j, or nullopt when gcd(n, m) > 1.
    std::optional<std::uint64_t> log(std::size_t j, std::uint64_t n) const {
        const auto& f = factors_[j];
        const auto v = logs_[j][n % f.component];
        if (v < 0) return std::nullopt;
        return static_cast<std::uint64_t>(v);
    }

    bool is_unit(std::uint64_t n) const noexcept { return gcd_u64(n % modulus_, modulus_) == 1; }

    /// e(k/L) from the precomputed table.
    complex root(std::uint64_t k) const noexcept { return roots_[k % exponent_]; }

    /// All characters, odometer order with the last factor varying fastest.
    std::vector<DirichletCharacter> characters() const;

    DirichletCharacter character(std::vector<std::uint64_t> exponents) const;
    DirichletCharacter principal() const;

private:
    void build(const std::vector<PrimePower>& fac) {
        for (const auto& [p, e] : fac) {
            const std::uint64_t pe = detail::ipow(p, e);
            if (p == 2) {
                if (e == 1) {
                    add_factor({2, 1, 2, 1, 1, CyclicFactor::Role::cyclic}, {-1, 0});
                } else if (e == 2) {
                    add_factor({2, 2, 4, 3, 2, CyclicFactor::Role::sign}, {-1, 0, -1, 1});
                } else {
                    std::vector<std::int64_t> sign(pe, -1), five(pe, -1);
                    std::uint64_t v = 1;
                    for (std::uint64_t k = 0; k < pe / 4; ++k) {
                        sign[v] = 0;
                        five[v] = static_cast<std::int64_t>(k);
                        sign[pe - v] = 1;
                        five[pe - v] = static_cast<std::int64_t>(k);
                        v = v * 5 % pe;
                    }
                    add_factor({2, e, pe, pe - 1, 2, CyclicFactor::Role::sign}, std::move(sign));
                    add_factor({2, e, pe, 5, pe / 4, CyclicFactor::Role::five}, std::move(five));
                }
            } else {
                const std::uint64_t g = detail::smallest_primitive_root(p, e);
                const std::uint64_t order = pe / p * (p - 1);
                std::vector<std::int64_t> lg(pe, -1);
                std::uint64_t v = 1;
                for (std::uint64_t k = 0; k < order; ++k) {
                    lg[v] = static_cast<std::int64_t>(k);
                    v = detail::mulmod(v, g, pe);
                }
                add_factor({p, e, pe, g, order, CyclicFactor::Role::cyclic}, std::move(lg));
            }
        }
        order_ = 1;
        exponent_ = 1;
        for (const auto& f : factors_) {
            order_ *= f.order;
            exponent_ = std::lcm(exponent_, f.order);
        }
        roots_.reserve(exponent_);
        for (std::uint64_t k = 0; k < exponent_; ++k)
            roots_.push_back(unit_root(static_cast<std::int64_t>(k), static_cast<std::int64_t>(exponent_)));
    }

    void add_factor(CyclicFactor f, std::vector<std::int64_t> lg) {
        factors_.push_back(f);
        logs_.push_back(std::move(lg));
    }

    std::uint64_t modulus_;
    std::vector<CyclicFactor> factors_;
    std::vector<std::vector<std::int64_t>> logs_;
    std::vector<complex> roots_;
    std::uint64_t order_ = 1;
    std::uint64_t exponent_ = 1;
};

using CharacterGroupPtr = std::shared_ptr<const CharacterGroup>;

/// Character group mod m, checked against the prime table's range.
inline CharacterGroupPtr character_group(std::uint64_t m, const PrimeTable& t) {
    if (m < 1 || m > t.limit()) throw RangeError("modulus " + std::to_string(m) + " outside prime table range");
    return CharacterGroup::create(m);
}

/// Exact value e(num/den) of a character at a unit.
struct UnitRootIndex {
    std::uint64_t num;
    std::uint64_t den;
};

class DirichletCharacter {
public:
    DirichletCharacter(CharacterGroupPtr group, std::vector<std::uint64_t> exponents)
        : group_(std::move(group)), exponents_(std::move(exponents)) {
        const auto fs = group_->factors();
        if (exponents_.size() != fs.size()) throw DomainError("exponent vector does not match the group");
        for (std::size_t j = 0; j < fs.size(); ++j)
            if (exponents_[j] >= fs[j].order) throw DomainError("character exponent out of range");
        conductor_ = compute_conductor();
    }

    const CharacterGroup& group() const noexcept { return *group_; }
    const CharacterGroupPtr& group_ptr() const noexcept { return group_; }
    std::uint64_t modulus() const noexcept { return group_->modulus(); }
    std::span<const std::uint64_t> exponents() const noexcept { return exponents_; }
    std::uint64_t conductor() const noexcept { return conductor_; }
    bool is_primitive() const noexcept { return conductor_ == modulus(); }
    bool is_principal() const noexcept {
        return std::all_of(exponents_.begin(), exponents_.end(), [](auto x) { return x == 0; });
    }

    /// Exact index k with chi(n) = e(k/L), L = group exponent; nullopt off the units.
    std::optional<std::uint64_t> index(std::int64_t n) const {
        const auto m = static_cast<std::int64_t>(modulus());
        std::int64_t r = n % m;
        if (r < 0) r += m;
        const auto ur = static_cast<std::uint64_t>(r);
        if (!group_->is_unit(ur)) return std::nullopt;
        const auto L = group_->exponent();
        const auto fs = group_->factors();
        std::uint64_t k = 0;
        for (std::size_t j = 0; j < fs.size(); ++j) {
            if (exponents_[j] == 0) continue;
            const auto lg = *group_->log(j, ur);
            k = (k + detail::mulmod(detail::mulmod(exponents_[j], lg, L), L / fs[j].order, L)) % L;
        }
        return k;
    }

    std::optional<UnitRootIndex> exact_value(std::int64_t n) const {
        const auto k = index(n);
        if (!k) return std::nullopt;
        return UnitRootIndex{*k, group_->exponent()};
    }

    complex operator()(std::int64_t n) const {
        const auto k = index(n);
        return k ? group_->root(*k) : complex{0.0, 0.0};
    }

    /// Exponent tuple such as "(1;0)".
    std::string label() const {
        std::string s = "(";
        for (std::size_t j = 0; j < exponents_.size(); ++j) {
            if (j) s += ';';
            s += std::to_string(exponents_[j]);
        }
        return s + ")";
    }

private:
    std::uint64_t compute_conductor() const {
        const auto fs = group_->factors();
        std::uint64_t f = 1;
        for (std::size_t j = 0; j < fs.size(); ++j) {
            const auto& fac = fs[j];
            const auto x = exponents_[j];
            switch (fac.role) {
                case CyclicFactor::Role::cyclic: {
                    if (x == 0) break;
                    // Trivial on 1 + p^c Z exactly when p^{e-c} divides x.
                    const auto v = std::min(detail::valuation(x, fac.prime), fac.exponent - 1);
                    f *= detail::ipow(fac.prime, fac.exponent - v);
                    break;
                }
                case CyclicFactor::Role::sign: {
                    const bool has_five = j + 1 < fs.size() && fs[j + 1].role == CyclicFactor::Role::five;
                    const auto y = has_five ? exponents_[j + 1] : 0;
                    if (y != 0) {
                        f *= detail::ipow(2, fac.exponent - detail::valuation(y, 2));
                    } else if (x != 0) {
                        f *= 4;
                    }
                    break;
                }
                case CyclicFactor::Role::five:
                    break;  // handled with its sign factor
            }
        }
        return f;
    }

    CharacterGroupPtr group_;
    std::vector<std::uint64_t> exponents_;
    std::uint64_t conductor_ = 1;
};

inline DirichletCharacter CharacterGroup::character(std::vector<std::uint64_t> exponents) const {
    return DirichletCharacter(shared_from_this(), std::move(exponents));
}

inline DirichletCharacter CharacterGroup::principal() const {
    return character(std::vector<std::uint64_t>(factors_.size(), 0));
}

inline std::vector<DirichletCharacter> CharacterGroup::characters() const {
    std::vector<DirichletCharacter> out;
    out.reserve(order_);
    std::vector<std::uint64_t> x(factors_.size(), 0);
    for (;;) {
        out.push_back(character(x));
        std::size_t j = x.size();
        while (j > 0) {
            --j;
            if (++x[j] < factors_[j].order) break;
            x[j] = 0;
            if (j == 0) return out;
        }
        if (x.empty()) return out;
    }
}

inline complex eval_char(const DirichletCharacter& chi, std::int64_t n) { return chi(n); }
inline std::uint64_t conductor(const DirichletCharacter& chi) { return chi.conductor(); }
inline bool is_primitive(const DirichletCharacter& chi) { return chi.is_primitive(); }

/// The primitive character mod conductor(chi) that induces chi.
///
/// Each generator of the conductor's unit group is lifted to a unit mod the
/// full modulus (CRT with 1 on the remaining prime powers) and the exact value
/// of chi there fixes the corresponding exponent.
inline DirichletCharacter primitive_part(const DirichletCharacter& chi) {
    if (chi.is_primitive()) return chi;
    const auto target = CharacterGroup::create(chi.conductor());
    const std::uint64_t m = chi.modulus();
    const std::uint64_t L = chi.group().exponent();
    std::vector<std::uint64_t> exps;
    for (const auto& f : target->factors()) {
        // Full power of f.prime dividing m.
        std::uint64_t P = 1;
        while (m % (P * f.prime) == 0) P *= f.prime;
        const std::uint64_t n = detail::crt_pair(f.generator, P, 1, m / P);
        const auto k = chi.index(static_cast<std::int64_t>(n));
        if (!k) throw InvariantError("lifted generator is not a unit");
        const auto scaled = static_cast<unsigned __int128>(*k) * f.order;
        if (scaled % L != 0) throw InvariantError("character is not induced from its conductor");
        exps.push_back(static_cast<std::uint64_t>(scaled / L) % f.order);
    }
    auto prim = target->character(std::move(exps));
    if (!prim.is_primitive()) throw InvariantError("primitive part is not primitive");
    return prim;
}

struct ClassifiedCharacter {
    DirichletCharacter chi;
    SquarefreeSquare split;  ///< conductor = g k^2
};

/// Characters mod m with low < conductor <= high, each with the squarefree
/// times square split of its conductor.
inline std::vector<ClassifiedCharacter> chars_with_conductor_in(std::uint64_t m, double low, double high,
                                                                const PrimeTable& t) {
    const auto group = character_group(m, t);
    std::vector<ClassifiedCharacter> out;
    for (auto& chi : group->characters()) {
        const auto c = static_cast<double>(chi.conductor());
        if (c > low && c <= high) {
            auto split = t.squarefree_square_split(chi.conductor());
            out.push_back({std::move(chi), split});
        }
    }
    return out;
}

struct DivisibilityChain {
    std::uint64_t g;
    std::uint64_t k;
    std::uint64_t t_param;
    std::uint64_t v;
};

/// For chi mod q^2 with conductor g k^2: v = q^2 / (g k^2) = g t^2 and q = g t k.
inline DivisibilityChain divisibility_chain_check(std::uint64_t q, const DirichletCharacter& chi,
                                                  const PrimeTable& t) {
    if (chi.modulus() != q * q) throw DomainError("character modulus is not q^2");
    const auto C = chi.conductor();
    if ((q * q) % C != 0) throw InvariantError("conductor does not divide the modulus");
    const auto [g, k] = t.squarefree_square_split(C);
    const std::uint64_t v = q * q / C;
    if (v % g != 0) throw InvariantError("v is not divisible by g");
    const std::uint64_t t2 = v / g;
    auto tp = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(t2)));
    while (tp * tp > t2) --tp;
    while ((tp + 1) * (tp + 1) <= t2) ++tp;
    if (tp * tp != t2) throw InvariantError("v / g is not a perfect square");
    if (g * tp * k != q) throw InvariantError("q != g t k");
    return {g, k, tp, v};
}

/// c folded onto residues mod m: out[r] = sum of c_n over n = r (mod m).
template <typename Range>
std::vector<complex> fold_by_residue(const Range& terms, std::uint64_t m) {
    std::vector<complex> out(m);
    for (const auto& [n, v] : terms) {
        auto r = static_cast<std::int64_t>(n) % static_cast<std::int64_t>(m);
        if (r < 0) r += static_cast<std::int64_t>(m);
        out[static_cast<std::size_t>(r)] += v;
    }
    return out;
}

/// Discrete logs of every unit mod m, pre-scaled to the group exponent.
///
/// Built once per modulus so that sums over many characters avoid repeated
/// table lookups and modular reductions per term.
class UnitLogTable {
public:
    explicit UnitLogTable(const CharacterGroup& G) : group_(&G), width_(G.factors().size()) {
        const auto fs = G.factors();
        const auto L = G.exponent();
        for (std::uint64_t r = 0; r < G.modulus(); ++r) {
            if (!G.is_unit(r)) continue;
            units_.push_back(r);
            for (std::size_t j = 0; j < width_; ++j) scaled_.push_back(*G.log(j, r) * (L / fs[j].order) % L);
        }
    }

    const CharacterGroup& group() const noexcept { return *group_; }
    std::span<const std::uint64_t> units() const noexcept { return units_; }

    /// Same index as chi.index(units()[i]).
    std::uint64_t index(const DirichletCharacter& chi, std::size_t i) const noexcept {
        const auto x = chi.exponents();
        const std::uint64_t* s = scaled_.data() + i * width_;
        std::uint64_t k = 0;
        for (std::size_t j = 0; j < width_; ++j) k += x[j] * s[j];
        return k % group_->exponent();
    }

private:
    const CharacterGroup* group_;
    std::size_t width_;
    std::vector<std::uint64_t> units_;
    std::vector<std::uint64_t> scaled_;
};

/// sum over units r mod m of folded[r] chi(r), using a prebuilt log table.
inline complex character_sum(const DirichletCharacter& chi, std::span<const complex> folded,
                             const UnitLogTable& logs) {
    if (&logs.group() != &chi.group()) throw DomainError("log table built for another modulus");
    complex s{0.0, 0.0};
    const auto units = logs.units();
    for (std::size_t i = 0; i < units.size(); ++i) {
        const auto& v = folded[units[i]];
        if (v == complex{0.0, 0.0}) continue;
        s += v * chi.group().root(logs.index(chi, i));
    }
    return s;
}

/// sum over units r mod m of folded[r] chi(r).
inline complex character_sum(const DirichletCharacter& chi, std::span<const complex> folded) {
    complex s{0.0, 0.0};
    const auto& G = chi.group();
    for (std::uint64_t r = 0; r < folded.size(); ++r) {
        if (folded[r] == complex{0.0, 0.0}) continue;
        if (const auto k = chi.index(static_cast<std::int64_t>(r))) s += folded[r] * G.root(*k);
    }
    return s;
}

}  // namespace sqmod
