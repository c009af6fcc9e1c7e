#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "oracles.hpp"
#include "sqmod/characters.hpp"

using namespace sqmod;

namespace {

const PrimeTable& table() {
    static const PrimeTable t(20'000);
    return t;
}

bool same_values(const DirichletCharacter& a, const DirichletCharacter& b, std::int64_t upto) {
    for (std::int64_t n = 1; n <= upto; ++n)
        if (std::abs(a(n) - b(n)) > 1e-12) return false;
    return true;
}

std::uint64_t brute_conductor(const DirichletCharacter& chi) {
    return oracle::conductor_bruteforce(chi.modulus(), [&](std::uint64_t n) { return chi(static_cast<std::int64_t>(n)); });
}

}  // namespace

TEST(CharacterGroup, Sizes) {
    EXPECT_EQ(character_group(1, table())->characters().size(), 1u);
    EXPECT_TRUE(character_group(1, table())->characters()[0].is_principal());
    EXPECT_EQ(character_group(8, table())->characters().size(), 4u);
    EXPECT_EQ(character_group(45, table())->characters().size(), 24u);
    for (std::uint64_t m = 1; m <= 300; ++m) {
        const auto G = character_group(m, table());
        std::uint64_t prod = 1;
        for (const auto& f : G->factors()) prod *= f.order;
        ASSERT_EQ(prod, oracle::phi(m));
        ASSERT_EQ(G->order(), oracle::phi(m));
    }
    EXPECT_THROW(character_group(30'000, table()), RangeError);
}

TEST(CharacterGroup, GeneratorConventions) {
    const auto G = CharacterGroup::create(7 * 7 * 32);
    const auto fs = G->factors();
    ASSERT_EQ(fs.size(), 3u);
    EXPECT_EQ(fs[0].role, CyclicFactor::Role::sign);
    EXPECT_EQ(fs[0].order, 2u);
    EXPECT_EQ(fs[1].role, CyclicFactor::Role::five);
    EXPECT_EQ(fs[1].generator, 5u);
    EXPECT_EQ(fs[1].order, 8u);
    EXPECT_EQ(fs[2].generator, 3u);  // smallest primitive root mod 49
    EXPECT_EQ(fs[2].order, 42u);
    const auto G4 = CharacterGroup::create(4);
    ASSERT_EQ(G4->factors().size(), 1u);
    EXPECT_EQ(G4->factors()[0].generator, 3u);
}

TEST(EvalChar, Examples) {
    const auto G5 = character_group(5, table());
    EXPECT_EQ(G5->principal()(3), complex(1.0, 0.0));
    for (const auto& chi : character_group(6, table())->characters()) EXPECT_EQ(chi(3), complex(0.0, 0.0));
    // Generator of (Z/5)^* is 2; exponent 1 sends 2 to i.
    const auto chi = G5->character({1});
    EXPECT_NEAR(std::abs(chi(2) - complex(0.0, 1.0)), 0.0, 1e-15);
    EXPECT_EQ(chi(4), complex(-1.0, 0.0));
    const auto ex = chi.exact_value(4);
    ASSERT_TRUE(ex.has_value());
    EXPECT_EQ(ex->num * 2, ex->den);
}

TEST(EvalChar, Multiplicative) {
    for (std::uint64_t m : {8u, 9u, 12u, 16u, 45u, 64u, 100u, 105u}) {
        for (const auto& chi : character_group(m, table())->characters())
            for (std::int64_t a = -5; a < static_cast<std::int64_t>(m); ++a)
                for (std::int64_t b = 0; b < static_cast<std::int64_t>(m); ++b)
                    ASSERT_LT(std::abs(chi(a * b) - chi(a) * chi(b)), 1e-12) << m << ' ' << chi.label();
    }
}

TEST(Conductor, Examples) {
    EXPECT_EQ(character_group(12, table())->principal().conductor(), 1u);
    const auto chi4 = character_group(4, table())->character({1});
    std::optional<DirichletCharacter> induced;
    for (const auto& chi : character_group(8, table())->characters())
        if (same_values(chi, chi4, 64)) induced = chi;
    ASSERT_TRUE(induced.has_value());
    EXPECT_EQ(induced->conductor(), 4u);
    EXPECT_EQ(brute_conductor(*induced), 4u);
    const auto chi9 = character_group(9, table())->character({1});  // generator 2 has order 6
    EXPECT_EQ(chi9(2) * chi9(2) * chi9(2) == complex(1.0, 0.0), false);
    EXPECT_EQ(chi9.conductor(), 9u);
}

TEST(Conductor, MatchesBruteForce) {
    for (std::uint64_t m = 1; m <= 130; ++m)
        for (const auto& chi : character_group(m, table())->characters())
            ASSERT_EQ(chi.conductor(), brute_conductor(chi)) << m << ' ' << chi.label();
}

TEST(Conductor, ConductorOneIffPrincipal) {
    for (std::uint64_t m = 1; m <= 100; ++m)
        for (const auto& chi : character_group(m, table())->characters()) {
            ASSERT_EQ(chi.conductor() == 1, chi.is_principal());
            ASSERT_EQ(m % chi.conductor(), 0u);
        }
}

TEST(Primitive, Examples) {
    EXPECT_TRUE(character_group(1, table())->principal().is_primitive());
    EXPECT_FALSE(character_group(3, table())->principal().is_primitive());
    EXPECT_TRUE(character_group(3, table())->character({1}).is_primitive());
}

TEST(PrimitivePart, Examples) {
    const auto p12 = primitive_part(character_group(12, table())->principal());
    EXPECT_EQ(p12.modulus(), 1u);
    EXPECT_TRUE(p12.is_principal());
    const auto chi4 = character_group(4, table())->character({1});
    for (const auto& chi : character_group(8, table())->characters())
        if (same_values(chi, chi4, 8)) {
            const auto p = primitive_part(chi);
            EXPECT_EQ(p.modulus(), 4u);
            EXPECT_TRUE(same_values(p, chi4, 8));
        }
    const auto prim = character_group(9, table())->character({5});
    const auto same = primitive_part(prim);
    EXPECT_EQ(same.modulus(), 9u);
    EXPECT_TRUE(same_values(same, prim, 9));
}

TEST(PrimitivePart, InducesOriginal) {
    for (std::uint64_t m = 1; m <= 150; ++m)
        for (const auto& chi : character_group(m, table())->characters()) {
            const auto p = primitive_part(chi);
            ASSERT_EQ(p.modulus(), chi.conductor());
            ASSERT_TRUE(p.is_primitive());
            for (std::int64_t n = 1; n <= static_cast<std::int64_t>(m); ++n)
                if (std::gcd<std::uint64_t>(n, m) == 1) {
                    ASSERT_LT(std::abs(p(n) - chi(n)), 1e-12) << m << ' ' << n;
                }
        }
}

TEST(CharsWithConductor, Examples) {
    // Mod 9 the conductors are 1, 3, 9, 9, 9, 9: only one character has conductor 3.
    const auto w9 = chars_with_conductor_in(9, 1, 3, table());
    ASSERT_EQ(w9.size(), 1u);
    EXPECT_EQ(w9[0].chi.conductor(), 3u);
    EXPECT_EQ(w9[0].split.squarefree, 3u);
    EXPECT_EQ(w9[0].split.square_root, 1u);
    std::multiset<std::uint64_t> conductors;
    for (const auto& chi : character_group(9, table())->characters()) conductors.insert(brute_conductor(chi));
    EXPECT_EQ(conductors, (std::multiset<std::uint64_t>{1, 3, 9, 9, 9, 9}));
    EXPECT_TRUE(chars_with_conductor_in(4, 4, 8, table()).empty());
    const auto w1 = chars_with_conductor_in(1, 0, 1, table());
    ASSERT_EQ(w1.size(), 1u);
    EXPECT_TRUE(w1[0].chi.is_principal());
}

TEST(CharsWithConductor, DyadicWindowsPartitionTheGroup) {
    for (std::uint64_t q = 1; q <= 40; ++q) {
        const auto m = q * q;
        std::uint64_t total = 0;
        total += chars_with_conductor_in(m, 0, 1, table()).size();
        for (double L = 1; L < static_cast<double>(m); L *= 2) total += chars_with_conductor_in(m, L, 2 * L, table()).size();
        ASSERT_EQ(total, oracle::phi(m)) << q;
    }
}

TEST(DivisibilityChain, Examples) {
    const auto& t = table();
    std::optional<DirichletCharacter> c12;
    for (const auto& chi : character_group(36, t)->characters())
        if (chi.conductor() == 12) c12 = chi;
    ASSERT_TRUE(c12.has_value());
    EXPECT_EQ(brute_conductor(*c12), 12u);
    const auto a = divisibility_chain_check(6, *c12, t);
    EXPECT_EQ(a.g, 3u);
    EXPECT_EQ(a.k, 2u);
    EXPECT_EQ(a.v, 3u);
    EXPECT_EQ(a.t_param, 1u);

    const auto b = divisibility_chain_check(2, character_group(4, t)->principal(), t);
    EXPECT_EQ(b.g, 1u);
    EXPECT_EQ(b.k, 1u);
    EXPECT_EQ(b.v, 4u);
    EXPECT_EQ(b.t_param, 2u);

    for (std::uint64_t p : {3u, 5u, 7u, 11u}) {
        for (const auto& chi : character_group(p * p, t)->characters()) {
            if (!chi.is_primitive()) continue;
            const auto c = divisibility_chain_check(p, chi, t);
            EXPECT_EQ(c.g, 1u);
            EXPECT_EQ(c.k, p);
            EXPECT_EQ(c.v, 1u);
            EXPECT_EQ(c.t_param, 1u);
        }
    }
    EXPECT_THROW(divisibility_chain_check(3, *c12, t), DomainError);
}

TEST(DivisibilityChain, NeverFailsOnSquareModuli) {
    const auto& t = table();
    for (std::uint64_t q = 1; q <= 100; ++q) {
        const auto G = character_group(q * q, t);
        for (const auto& chi : G->characters()) ASSERT_NO_THROW(divisibility_chain_check(q, chi, t)) << q;
    }
}

TEST(Characters, Orthogonality) {
    for (std::uint64_t m = 1; m <= 60; ++m) {
        const auto c = oracle::random_vector(1000 + m, m);
        std::vector<std::pair<std::int64_t, complex>> terms;
        for (std::uint64_t n = 1; n <= m; ++n) terms.emplace_back(static_cast<std::int64_t>(n), c[n - 1]);
        const auto folded = fold_by_residue(terms, m);
        double lhs = 0.0;
        for (const auto& chi : character_group(m, table())->characters()) lhs += std::norm(character_sum(chi, folded));
        double rhs = 0.0;
        for (std::uint64_t n = 1; n <= m; ++n)
            if (std::gcd(n, m) == 1) rhs += std::norm(c[n - 1]);
        rhs *= static_cast<double>(oracle::phi(m));
        ASSERT_TRUE(oracle::rel_close(lhs, rhs, 1e-9)) << m;
    }
}

TEST(Characters, MatchIndependentlyTabulatedCharacters) {
    for (std::uint64_t m : {1u, 3u, 5u, 8u, 9u, 12u, 15u, 16u, 24u, 36u}) {
        const auto tables = oracle::character_tables(m);
        const auto chars = character_group(m, table())->characters();
        ASSERT_EQ(tables.size(), chars.size()) << m;
        std::vector<char> used(tables.size(), 0);
        for (const auto& chi : chars) {
            bool found = false;
            for (std::size_t i = 0; i < tables.size() && !found; ++i) {
                if (used[i]) continue;
                bool eq = true;
                for (std::uint64_t n = 0; n < m && eq; ++n)
                    eq = std::abs(tables[i][n] - chi(static_cast<std::int64_t>(n))) < 1e-9;
                if (eq) {
                    used[i] = 1;
                    found = true;
                }
            }
            ASSERT_TRUE(found) << m << ' ' << chi.label();
        }
    }
}

TEST(Characters, Labels) {
    const auto G = character_group(45, table());
    const auto chars = G->characters();
    EXPECT_EQ(chars.front().label(), "(0;0)");
    EXPECT_EQ(chars[1].label(), "(0;1)");
    EXPECT_THROW(G->character({6, 0}), DomainError);
    EXPECT_THROW(G->character({0}), DomainError);
}

TEST(CharacterSum, LogTableMatchesDirectEvaluation) {
    std::mt19937_64 eng(17);
    for (std::uint64_t m : {1ull, 2ull, 8ull, 45ull, 64ull, 100ull, 343ull, 1000ull}) {
        const auto G = CharacterGroup::create(m);
        const UnitLogTable logs(*G);
        std::vector<complex> folded(m);
        for (auto& v : folded) v = complex(static_cast<double>(eng() % 7) - 3.0, static_cast<double>(eng() % 5));
        for (const auto& chi : G->characters()) {
            for (std::size_t i = 0; i < logs.units().size(); ++i)
                ASSERT_EQ(logs.index(chi, i), *chi.index(static_cast<std::int64_t>(logs.units()[i])));
            ASSERT_EQ(character_sum(chi, folded, logs), character_sum(chi, folded));
        }
    }
    const auto other = CharacterGroup::create(9);
    const UnitLogTable logs(*CharacterGroup::create(9));
    std::vector<complex> folded(9);
    EXPECT_THROW(character_sum(other->principal(), folded, logs), DomainError);
}
