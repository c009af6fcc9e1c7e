#pragma once

// Immutable arithmetic-function tables: least prime factors, primes, and the
// prime powers needed for von Mangoldt sums.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sqmod/errors.hpp"

namespace sqmod {

struct PrimePower {
    std::uint32_t prime;
    std::uint32_t exponent;
    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// n = squarefree * square^2 with `squarefree` squarefree.
struct SquarefreeSquare {
    std::uint64_t squarefree;
    std::uint64_t square_root;
    friend bool operator==(const SquarefreeSquare&, const SquarefreeSquare&) = default;
};

class PrimeTable {
public:
    static constexpr std::uint64_t kMaxLimit = 1'000'000'000;

    /// Sieves [1, limit]. Throws ConfigError unless 2 <= limit <= kMaxLimit.
    explicit PrimeTable(std::uint64_t limit) : limit_(limit) {
        if (limit < 2 || limit > kMaxLimit)
            throw ConfigError("prime table limit must lie in [2, " + std::to_string(kMaxLimit) +
                              "], got " + std::to_string(limit));
        sieve();
        collect_prime_powers();
    }

    std::uint64_t limit() const noexcept { return limit_; }
    std::span<const std::uint32_t> primes() const noexcept { return primes_; }

    std::uint64_t smallest_prime_factor(std::uint64_t n) const {
        check(n);
        if (n < 2) return 1;
        const std::uint16_t s = spf_[n];
        return s == 0 ? n : s;
    }

    bool is_prime(std::uint64_t n) const {
        check(n);
        return n >= 2 && spf_[n] == 0;
    }

    /// Prime factorization in ascending prime order.
    std::vector<PrimePower> factorize(std::uint64_t n) const {
        check(n);
        std::vector<PrimePower> out;
        while (n > 1) {
            const auto p = smallest_prime_factor(n);
            std::uint32_t e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            out.push_back({static_cast<std::uint32_t>(p), e});
        }
        return out;
    }

    /// (p, k) when n = p^k with k >= 1; the exact companion of von_mangoldt.
    std::optional<PrimePower> prime_power(std::uint64_t n) const {
        check(n);
        if (n < 2) return std::nullopt;
        const auto p = smallest_prime_factor(n);
        std::uint32_t k = 0;
        while (n % p == 0) {
            n /= p;
            ++k;
        }
        if (n != 1) return std::nullopt;
        return PrimePower{static_cast<std::uint32_t>(p), k};
    }

    double von_mangoldt(std::uint64_t n) const {
        const auto pp = prime_power(n);
        return pp ? std::log(static_cast<double>(pp->prime)) : 0.0;
    }

    int mobius(std::uint64_t n) const {
        check(n);
        int sign = 1;
        while (n > 1) {
            const auto p = smallest_prime_factor(n);
            n /= p;
            if (n % p == 0) return 0;
            sign = -sign;
        }
        return sign;
    }

    std::uint64_t euler_phi(std::uint64_t n) const {
        check(n);
        std::uint64_t phi = 1;
        while (n > 1) {
            const auto p = smallest_prime_factor(n);
            n /= p;
            phi *= p - 1;
            while (n % p == 0) {
                n /= p;
                phi *= p;
            }
        }
        return phi;
    }

    SquarefreeSquare squarefree_square_split(std::uint64_t n) const {
        check(n);
        SquarefreeSquare out{1, 1};
        for (const auto& [p, e] : factorize(n)) {
            if (e % 2 == 1) out.squarefree *= p;
            for (std::uint32_t i = 0; i < e / 2; ++i) out.square_root *= p;
        }
        return out;
    }

    /// All prime powers p^k <= limit in ascending order, paired with log p.
    /// Drives every von Mangoldt scan: Lambda vanishes elsewhere.
    struct PrimePowerEntry {
        std::uint32_t n;
        std::uint32_t prime_index;
    };
    std::span<const PrimePowerEntry> prime_powers() const noexcept { return prime_powers_; }
    double log_prime(std::uint32_t prime_index) const noexcept { return log_primes_[prime_index]; }

    /// Prime powers not exceeding x.
    std::span<const PrimePowerEntry> prime_powers_upto(std::uint64_t x) const {
        check(x);
        auto end = std::upper_bound(prime_powers_.begin(), prime_powers_.end(), x,
                                    [](std::uint64_t v, const PrimePowerEntry& e) { return v < e.n; });
        return {prime_powers_.data(), static_cast<std::size_t>(end - prime_powers_.begin())};
    }

private:
    void check(std::uint64_t n) const {
        if (n < 1 || n > limit_)
            throw RangeError("argument " + std::to_string(n) + " outside prime table range [1, " +
                             std::to_string(limit_) + "]");
    }

    void sieve() {
        // spf_[n] == 0 marks primes (and 0, 1); composites store their least
        // prime factor, which is below sqrt(kMaxLimit) < 2^16.
        spf_.assign(limit_ + 1, 0);
        const auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(limit_))) + 1;

        std::vector<std::uint32_t> base;
        {
            std::vector<bool> composite(root + 1, false);
            for (std::uint64_t p = 2; p <= root; ++p) {
                if (composite[p]) continue;
                base.push_back(static_cast<std::uint32_t>(p));
                for (std::uint64_t m = p * p; m <= root; m += p) composite[m] = true;
            }
        }

        constexpr std::uint64_t kSegment = 1 << 18;
        for (std::uint64_t lo = 0; lo <= limit_; lo += kSegment) {
            const std::uint64_t hi = std::min<std::uint64_t>(lo + kSegment - 1, limit_);
            for (const std::uint32_t p : base) {
                const std::uint64_t pp = std::uint64_t{p} * p;
                if (pp > hi) break;
                std::uint64_t m = std::max(pp, (lo + p - 1) / p * p);
                for (; m <= hi; m += p)
                    if (spf_[m] == 0) spf_[m] = static_cast<std::uint16_t>(p);
            }
            for (std::uint64_t n = std::max<std::uint64_t>(lo, 2); n <= hi; ++n)
                if (spf_[n] == 0) primes_.push_back(static_cast<std::uint32_t>(n));
        }
    }

    void collect_prime_powers() {
        log_primes_.reserve(primes_.size());
        for (const auto p : primes_) log_primes_.push_back(std::log(static_cast<double>(p)));
        prime_powers_.reserve(primes_.size() + primes_.size() / 8);
        for (std::uint32_t i = 0; i < primes_.size(); ++i) {
            const std::uint64_t p = primes_[i];
            for (std::uint64_t q = p; q <= limit_; q *= p) {
                prime_powers_.push_back({static_cast<std::uint32_t>(q), i});
                if (q > limit_ / p) break;
            }
        }
        std::sort(prime_powers_.begin(), prime_powers_.end(),
                  [](const PrimePowerEntry& a, const PrimePowerEntry& b) { return a.n < b.n; });
    }

    std::uint64_t limit_;
    std::vector<std::uint16_t> spf_;
    std::vector<std::uint32_t> primes_;
    std::vector<double> log_primes_;
    std::vector<PrimePowerEntry> prime_powers_;
};

inline PrimeTable build_prime_table(std::uint64_t limit) { return PrimeTable(limit); }

/// gcd helper shared by the counting modules; gcd(0, m) = m.
constexpr std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) noexcept {
    while (b != 0) {
        const auto t = a % b;
        a = b;
        b = t;
    }
    return a;
}

}  // namespace sqmod
