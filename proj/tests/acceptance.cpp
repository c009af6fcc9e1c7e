// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sqmod/ap_error.hpp"
#include "sqmod/characters.hpp"
#include "sqmod/experiment.hpp"
#include "sqmod/farey.hpp"
#include "sqmod/large_sieve.hpp"
#include "sqmod/prime_table.hpp"

using namespace sqmod;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void criterion(const char* id, const char* title, double budget_seconds, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = o.pass;
    if (secs > budget_seconds) {
        ok = false;
        o.detail += " [over time budget " + format_double(budget_seconds) + " s]";
    }
    if (!ok) ++failures;
    std::printf("%s %s  %s  (%.2f s)  %s\n", id, ok ? "PASS" : "FAIL", title, secs, o.detail.c_str());
    std::fflush(stdout);
}

Rational random_rational(std::mt19937_64& eng, std::int64_t max_den) {
    const auto den = 1 + static_cast<std::int64_t>(eng() % static_cast<std::uint64_t>(max_den));
    const auto num = static_cast<std::int64_t>(eng() % static_cast<std::uint64_t>(den));
    return Rational(num, den);
}

// Worst-case weighted remainder per modulus by the literal (d, l) double loop.
double direct_weighted_remainder(const CoefficientMap& u, double x, const SquareModulusWindow& w, unsigned k) {
    const auto X = static_cast<std::uint64_t>(std::floor(x));
    double total = 0.0;
    for (auto q : w.roots()) {
        const auto m = q * q;
        std::vector<long double> bucket(m, 0.0L);
        long double main = 0.0L;
        for (const auto& [d, ud] : u) {
            main += static_cast<long double>(ud) * x / (static_cast<double>(m) * static_cast<double>(d));
            for (std::uint64_t l = 1; l <= X; ++l) {
                if (l % d != 0) continue;
                long double wgt = 1.0L;
                if (k > 0) {
                    wgt = std::pow(std::log(x / static_cast<double>(l)), static_cast<int>(k));
                    for (unsigned i = 2; i <= k; ++i) wgt /= i;
                }
                bucket[l % m] += static_cast<long double>(ud) * wgt;
            }
        }
        long double worst = 0.0L;
        for (std::uint64_t a = 0; a < m; ++a)
            if (std::gcd(a, m) == 1) worst = std::max(worst, std::fabs(bucket[a] - main));
        total += static_cast<double>(worst);
    }
    return total;
}

// Golden value of the largest count_N ratio over the seeded sample below.
constexpr double kLemma1GoldenMax = 0.62471024205959724;

}  // namespace

int main() {
    criterion("AC1", "arithmetic functions match trial division for n <= 1e5", 10, [] {
        const PrimeTable t(100'000);
        std::uint64_t bad = 0;
        for (std::uint64_t n = 1; n <= 100'000; ++n) {
            const auto s = t.squarefree_square_split(n);
            const auto [g, k] = oracle::split(n);
            if (t.von_mangoldt(n) != oracle::lambda(n) || t.mobius(n) != oracle::mu(n) ||
                t.euler_phi(n) != oracle::phi(n) || s.squarefree != g || s.square_root != k)
                ++bad;
        }
        return Outcome{bad == 0, "mismatches=" + std::to_string(bad)};
    });

    criterion("AC2", "shared-scan E(x,q) equals per-residue walk, x in {1e4,1e5,1e6}, q <= 100", 60, [] {
        const PrimeTable t(1'000'000);
        double worst_rel = 0.0;
        std::uint64_t bad = 0;
        for (double x : {1e4, 1e5, 1e6})
            for (std::uint64_t q = 1; q <= 100; ++q) {
                const double fast = error_E(x, q, t);
                double slow = 0.0;
                const double main = x / static_cast<double>(oracle::phi(q));
                for (std::uint64_t a = 0; a < q; ++a)
                    if (std::gcd(a, q) == 1)
                        slow = std::max(slow, std::fabs(psi_ap(x, q, static_cast<std::int64_t>(a), t) - main));
                const double rel = std::fabs(fast - slow) / std::max({1e-300, std::fabs(fast), std::fabs(slow)});
                worst_rel = std::max(worst_rel, rel);
                if (!oracle::rel_close(fast, slow, 1e-9)) ++bad;
            }
        return Outcome{bad == 0, "mismatches=" + std::to_string(bad) + " max_rel=" + format_double(worst_rel)};
    });

    criterion("AC3", "scaled average R(x) decreases from x=1e5 to x=1e7 (Q = x^0.4)", 600, [] {
        const PrimeTable t(10'000'000);
        std::string table;
        std::vector<double> R;
        for (double x : {1e5, 1e6, 1e7}) {
            const double Q = std::pow(x, 0.4);
            const SquareModulusWindow w(Q);
            const double sum = averaged_error(x, w, t);
            R.push_back(sum * std::sqrt(Q) / x);
            table += " x=" + format_double(x) + ":q=" + std::to_string(w.q_min()) + ".." + std::to_string(w.q_max()) +
                     ",sum=" + format_double(sum) + ",R=" + format_double(R.back());
        }
        return Outcome{R[2] < R[0], table};
    });

    criterion("AC4", "duality inequality holds for 100 seeded vectors, Q<=12, g<=4, Delta=1/N", 300, [] {
        std::mt19937_64 pick(2024);
        std::uint64_t cases = 0, bad = 0;
        double worst = 0.0;
        for (int v = 0; v < 100; ++v) {
            const std::size_t N = 1 + pick() % 512;
            const CoefficientVector c(oracle::random_vector(10'000 + static_cast<std::uint64_t>(v), N));
            const Rational delta(1, static_cast<std::int64_t>(N));
            for (std::uint64_t g = 1; g <= 4; ++g)
                for (std::uint64_t Q = 1; Q <= 12; ++Q) {
                    const auto d = duality_bound_check(c, Q, g, delta);
                    ++cases;
                    if (!d.holds) ++bad;
                    if (d.rhs > 0) worst = std::max(worst, d.lhs / d.rhs);
                }
        }
        return Outcome{bad == 0, "cases=" + std::to_string(cases) + " violations=" + std::to_string(bad) +
                                     " max lhs/rhs=" + format_double(worst)};
    });

    criterion("AC5", "primitive-character reduction holds for moduli <= 1000, 20 vectors each", 300, [] {
        std::uint64_t cases = 0, bad = 0;
        double worst = 0.0;
        for (std::uint64_t m = 1; m <= 1000; ++m)
            for (std::uint64_t s = 0; s < 20; ++s) {
                const auto seed = m * 1000 + s;
                const CoefficientVector c(oracle::random_vector(seed, static_cast<std::size_t>(m + 1 + seed % 17)));
                const std::uint64_t tcop = 1 + s % 6;
                const auto r = primitive_reduction_check(c, m, tcop);
                ++cases;
                if (!r.holds) ++bad;
                if (r.rhs > 0) worst = std::max(worst, r.lhs / r.rhs);
            }
        return Outcome{bad == 0, "cases=" + std::to_string(cases) + " violations=" + std::to_string(bad) +
                                     " max lhs/rhs=" + format_double(worst)};
    });

    criterion("AC6", "orthogonality and brute-force conductors for all m <= 200", 60, [] {
        const PrimeTable t(200);
        std::uint64_t bad_orth = 0, bad_cond = 0, chars = 0;
        for (std::uint64_t m = 1; m <= 200; ++m) {
            const auto G = character_group(m, t);
            const auto vals = oracle::random_vector(77 + m, m);
            std::vector<std::pair<std::int64_t, complex>> terms;
            for (std::uint64_t n = 1; n <= m; ++n) terms.emplace_back(static_cast<std::int64_t>(n), vals[n - 1]);
            const auto folded = fold_by_residue(terms, m);
            KahanSum lhs;
            for (const auto& chi : G->characters()) {
                ++chars;
                lhs.add(std::norm(character_sum(chi, folded)));
                const auto brute = oracle::conductor_bruteforce(
                    m, [&](std::uint64_t n) { return chi(static_cast<std::int64_t>(n)); });
                if (brute != chi.conductor()) ++bad_cond;
            }
            KahanSum rhs;
            for (std::uint64_t n1 = 1; n1 <= m; ++n1)
                for (std::uint64_t n2 = 1; n2 <= m; ++n2)
                    if ((n1 + m - n2) % m == 0 && std::gcd(n1 * n2, m) == 1)
                        rhs.add((vals[n1 - 1] * std::conj(vals[n2 - 1])).real());
            const double r = rhs.value() * static_cast<double>(oracle::phi(m));
            if (std::fabs(lhs.value() - r) > 1e-9 * std::max(std::fabs(lhs.value()), std::fabs(r))) ++bad_orth;
        }
        return Outcome{bad_orth == 0 && bad_cond == 0, "characters=" + std::to_string(chars) +
                                                           " orthogonality_failures=" + std::to_string(bad_orth) +
                                                           " conductor_mismatches=" + std::to_string(bad_cond)};
    });

    criterion("AC7", "sweep maximum equals grid-scan maximum (step Delta/16); split inflation exact", 120, [] {
        std::uint64_t combos = 0, grid_mismatch = 0, grid_above = 0, endpoint_mismatch = 0, witness_bad = 0,
                      split_checks = 0, split_bad = 0;
        std::string first_mismatch;
        std::mt19937_64 eng(7);
        for (const Rational delta : {Rational(1, 10), Rational(1, 100)})
            for (std::uint64_t g = 1; g <= 4; ++g)
                for (std::uint64_t Q = 1; Q <= 32; ++Q) {
                    ++combos;
                    const auto s = max_M_sweep(delta, Q, g);
                    if (count_M(FareyQuery(s.witness, delta, Q, g)) != s.max_value) ++witness_bad;

                    // Literal grid scan over [0, 1) with step Delta/16.
                    const Rational step = delta / Rational(16);
                    std::uint64_t grid = 0;
                    for (Rational a(0); a < Rational(1); a = a + step)
                        grid = std::max(grid, count_M(FareyQuery(a, delta, Q, g)));
                    if (grid > s.max_value) ++grid_above;
                    if (grid != s.max_value) {
                        ++grid_mismatch;
                        if (first_mismatch.empty())
                            first_mismatch = " first: Delta=" + delta.str() + " g=" + std::to_string(g) +
                                             " Q=" + std::to_string(Q) + " sweep=" + std::to_string(s.max_value) +
                                             " grid=" + std::to_string(grid) + " witness=" + s.witness.str();
                    }

                    // Exact scan over every left endpoint, where any maximum is attained.
                    // Costly, so limited to Q <= 20; the grid and witness checks cover all Q.
                    if (Q <= 20) {
                        const auto fractions = admissible_fractions(Q, g);
                        std::uint64_t ends = count_M(FareyQuery(Rational(0), delta, Q, g));
                        for (const auto& f : fractions)
                            ends = std::max(ends, count_M(FareyQuery(f - delta, delta, Q, g)));
                        if (ends != s.max_value) ++endpoint_mismatch;
                    }

                    // Split inflation at seeded targets and at the witness.
                    std::vector<Rational> targets{s.witness};
                    for (int i = 0; i < 4; ++i) targets.push_back(random_rational(eng, 5000));
                    for (const auto& alpha : targets)
                        for (std::uint64_t q = 1; q <= Q; ++q) {
                            const auto r = static_cast<std::int64_t>(g * q * q);
                            for (std::int64_t a = 0; a < r; ++a) {
                                if (std::gcd(a, r) != 1) continue;
                                if (dist_to_nearest_int(Rational(a, r) - alpha) > delta) continue;
                                ++split_checks;
                                if (!split_inflation_holds(a, q, g, alpha, delta)) ++split_bad;
                            }
                        }
                }
        const bool ok = grid_mismatch == 0 && grid_above == 0 && endpoint_mismatch == 0 && witness_bad == 0 &&
                        split_bad == 0;
        return Outcome{ok, "combos=" + std::to_string(combos) + " grid_mismatches=" + std::to_string(grid_mismatch) +
                               " grid_above_sweep=" + std::to_string(grid_above) +
                               " endpoint_mismatches=" + std::to_string(endpoint_mismatch) +
                               " witness_failures=" + std::to_string(witness_bad) +
                               " split_checks=" + std::to_string(split_checks) +
                               " split_failures=" + std::to_string(split_bad) + first_mismatch};
    });

    criterion("AC8", "largest count_N ratio over 100 seeded targets is finite and matches its golden value", 120, [] {
        std::mt19937_64 eng(8);
        std::vector<Rational> betas;
        for (int i = 0; i < 100; ++i) betas.push_back(random_rational(eng, 1000));
        double best = 0.0;
        for (const Rational delta : {Rational(1, 100), Rational(1, 1000)})
            for (const auto& beta : betas)
                for (std::uint64_t Q = 1; Q <= 50; ++Q)
                    best = std::max(best, lemma1_ratio(FareyQuery(beta, delta, Q), 0.1));
        const bool ok = std::isfinite(best) && best > 0 && best <= kLemma1GoldenMax + 1e-9 &&
                        std::fabs(best - kLemma1GoldenMax) <= 1e-9;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", best);
        return Outcome{ok, std::string("max_ratio=") + buf + " golden=" + format_double(kLemma1GoldenMax)};
    });

    criterion("AC9", "Riesz means equal double-loop enumeration; r_0 identity exact", 120, [] {
        std::uint64_t cases = 0, bad = 0, bad_r = 0;
        std::mt19937_64 eng(9);
        const double xs[] = {0.5, 1.0, 29.75, 777.25, 4096.0, 9999.5, 10'000.0};
        for (const double x : xs)
            for (std::uint64_t q = 1; q <= 30; ++q)
                for (std::uint64_t d = 1; d <= 30; ++d) {
                    const std::int64_t as[] = {0, 1, static_cast<std::int64_t>(eng() % (3 * q)) - static_cast<std::int64_t>(q)};
                    for (const auto a : as) {
                        for (unsigned k : {0u, 1u, 4u}) {
                            ++cases;
                            if (riesz_mean_A({x, q, a, d, k}) != oracle::riesz(x, q, a, d, k)) ++bad;
                        }
                        const double expect = oracle::riesz(x, q, a, d, 0) - x / (static_cast<double>(q) * static_cast<double>(d));
                        if (riesz_error_r({x, q, a, d, 0}) != expect) ++bad_r;
                    }
                }
        return Outcome{bad == 0 && bad_r == 0, "cases=" + std::to_string(cases) + " A_mismatches=" +
                                                   std::to_string(bad) + " r0_mismatches=" + std::to_string(bad_r)};
    });

    criterion("AC10", "convolution equals exhaustive enumeration; weighted sum equals direct double loop", 300, [] {
        struct Case {
            std::vector<double> Ms;
            std::vector<FactorFamily> fams;
        };
        const std::vector<Case> cases = {
            {{2, 2}, {FactorFamily::one, FactorFamily::one}},
            {{8, 8}, {FactorFamily::log, FactorFamily::one}},
            {{10, 37}, {FactorFamily::log, FactorFamily::log}},
            {{100, 100}, {FactorFamily::one, FactorFamily::log}},
            {{4, 4, 4}, {FactorFamily::one, FactorFamily::one, FactorFamily::one}},
            {{21.5, 21.5, 21.5}, {FactorFamily::log, FactorFamily::one, FactorFamily::log}},
            {{10, 20, 50}, {FactorFamily::custom, FactorFamily::log, FactorFamily::one}},
        };
        auto custom = [](std::uint64_t m) { return (m % 3 == 0 ? -1.0 : 1.0) / static_cast<double>(m); };
        std::uint64_t conv_bad = 0, sum_bad = 0, sums = 0;
        double worst = 0.0;
        for (const auto& c : cases) {
            ConvolutionSpec spec;
            for (std::size_t i = 0; i < c.Ms.size(); ++i) spec.factors.push_back({c.Ms[i], c.fams[i], custom});
            const auto u = convolution_coefficients(spec);
            const auto ref = oracle::convolution(c.Ms, [&](std::size_t i, std::uint64_t m) {
                return spec.factors[i].coefficient(m);
            });
            // Support must match exactly. With coefficient 1 every u_d is an integer count and must
            // match exactly too. Otherwise the two sides add the same products in different orders,
            // so they may differ by at most the standard rounding bound for summing those products.
            const bool integral = std::all_of(c.fams.begin(), c.fams.end(),
                                              [](FactorFamily f) { return f == FactorFamily::one; });
            const auto counts = oracle::convolution(c.Ms, [](std::size_t, std::uint64_t) { return 1.0; });
            const auto mags = oracle::convolution(c.Ms, [&](std::size_t i, std::uint64_t m) {
                return std::fabs(spec.factors[i].coefficient(m));
            });
            if (u.size() != ref.size()) ++conv_bad;
            for (const auto& [d, v] : ref) {
                if (!u.contains(d)) {
                    ++conv_bad;
                    continue;
                }
                const double got = u.at(d);
                const double n = counts.at(d) + static_cast<double>(c.Ms.size());
                const double bound = integral ? 0.0 : 2.0 * n * std::numeric_limits<double>::epsilon() * mags.at(d);
                if (std::fabs(got - v) > bound) ++conv_bad;
            }
            for (const double x : {1000.0, 2500.5}) {
                const double Q = 50;
                const SquareModulusWindow w(Q);
                for (unsigned k : {0u, 1u, 4u}) {
                    const double lib = weighted_remainder_sum(u, x, w, k, ResidueRule::worst_case()).total;
                    const double dir = direct_weighted_remainder(u, x, w, k);
                    ++sums;
                    const double rel = std::fabs(lib - dir) / std::max({1e-300, std::fabs(lib), std::fabs(dir)});
                    worst = std::max(worst, rel);
                    if (rel > 1e-9) ++sum_bad;
                }
            }
        }
        return Outcome{conv_bad == 0 && sum_bad == 0,
                       "specs=" + std::to_string(cases.size()) + " convolution_mismatches=" + std::to_string(conv_bad) +
                           " weighted_sums=" + std::to_string(sums) + " failures=" + std::to_string(sum_bad) +
                           " max_rel=" + format_double(worst)};
    });

    criterion("AC11", "every experiment replays byte for byte across runs and thread counts", 300, [] {
        std::vector<ExperimentConfig> cfgs;
        auto make = [&](const std::string& kind) -> ExperimentConfig& {
            cfgs.emplace_back();
            cfgs.back().kind = kind;
            return cfgs.back();
        };
        make("sieve").x = {1e5, 3e5};
        make("ap-error").x = {2e5};
        make("bv-average").x = {1e5, 1e6};
        {
            auto& c = make("farey");
            c.Q = 12;
            c.g = 3;
            c.delta = "1/50";
            c.beta = "2/7";
        }
        for (const auto* fam : {"one", "moebius", "mangoldt", "random"}) {
            auto& c = make("large-sieve");
            c.family = fam;
            c.N = 96;
            c.Q = 6;
            c.g = 2;
            c.x = {1e4};
            c.seed = 12345;
        }
        make("char-table").m = 720;
        {
            auto& c = make("lemma7-toy");
            c.x = {5000};
            c.Q = 100;
            c.k = 4;
            c.fold_count = 3;
            c.M = 12;
            c.factor_family = "log";
        }
        std::uint64_t bad = 0;
        std::string which;
        for (auto cfg : cfgs) {
            cfg.threads = 1;
            const auto a = run_experiment(cfg);
            const auto b = run_experiment(cfg);
            cfg.threads = 4;
            const auto c = run_experiment(cfg);
            for (auto fmt : {ReportFormat::csv, ReportFormat::json}) {
                const auto ea = emit_report(a, fmt);
                if (ea != emit_report(b, fmt) || ea != emit_report(c, fmt)) {
                    ++bad;
                    which += " " + cfg.kind;
                }
            }
        }
        return Outcome{bad == 0, "experiments=" + std::to_string(cfgs.size()) + " differences=" + std::to_string(bad) + which};
    });

    std::printf("acceptance: %d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
