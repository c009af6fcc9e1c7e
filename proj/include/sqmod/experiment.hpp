#pragma once

// Experiment configuration, dispatch, and report serialization for the
// sqmod command line tool.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sqmod/ap_error.hpp"
#include "sqmod/characters.hpp"
#include "sqmod/errors.hpp"
#include "sqmod/farey.hpp"
#include "sqmod/large_sieve.hpp"
#include "sqmod/prime_table.hpp"
#include "sqmod/rational.hpp"

namespace sqmod {

inline constexpr const char* kVersion = "sqmod 1.0.0";

struct ExperimentConfig {
    std::string kind = "bv-average";
    std::vector<double> x = {1e5};
    double theta = 0.4;
    double lambda = 0.25;
    double eps = 0.1;
    std::string delta;            ///< rational text; empty picks the experiment default
    std::string beta = "0";
    std::uint64_t g = 1;
    double Q = 0.0;               ///< 0 derives Q from x^theta where that makes sense
    std::uint64_t N = 64;
    std::uint64_t m = 9;
    std::uint64_t fold_count = 2;
    std::vector<double> M_list;   ///< empty means fold_count copies of M
    double M = 4.0;
    unsigned k = 0;
    std::string factor_family = "one";
    std::string family = "one";
    std::string residue = "worst";
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

using Cell = std::variant<std::int64_t, double, std::string, bool>;

struct ExperimentReport {
    std::string kind;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, Cell>> summary;
    std::vector<std::string> notes;
    std::uint64_t constant_one_checks = 0;
    std::uint64_t constant_one_failures = 0;
    double runtime_seconds = 0.0;

    bool pass() const noexcept { return constant_one_failures == 0; }
    std::string status() const { return pass() ? "PASS" : "FAIL"; }

    void record_check(bool holds) {
        ++constant_one_checks;
        if (!holds) ++constant_one_failures;
    }
};

// ---------------------------------------------------------------------------
// Formatting

/// 12 significant digits, locale independent.
inline std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    (void)ec;
    return std::string(buf, end);
}

inline std::string format_cell(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) return format_double(v);
            else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
            else if constexpr (std::is_same_v<T, std::string>) return v;
            else return std::to_string(v);
        },
        c);
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

enum class ReportFormat { csv, json };

inline ReportFormat parse_format(const std::string& s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    throw ConfigError("unknown report format '" + s + "'");
}

namespace detail {

inline nlohmann::ordered_json cell_json(const Cell& c) {
    return std::visit(
        [](const auto& v) -> nlohmann::ordered_json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) return nullptr;
                // Round through the 12-digit text so the JSON carries the same value as the CSV.
                const auto text = format_double(v);
                double rounded{};
                std::from_chars(text.data(), text.data() + text.size(), rounded);
                return rounded;
            } else {
                return v;
            }
        },
        c);
}

inline Cell json_cell(const nlohmann::ordered_json& j) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) return j.get<double>();
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<std::string>();
}

}  // namespace detail

/// Serializes a report. CSV carries only the header and rows; JSON carries the
/// whole report. Runtime is omitted unless requested so that replays compare
/// byte for byte.
inline std::string emit_report(const ExperimentReport& r, ReportFormat format, bool include_timing = false) {
    if (format == ReportFormat::csv) {
        std::string out;
        for (std::size_t i = 0; i < r.columns.size(); ++i) {
            if (i) out += ',';
            out += csv_escape(r.columns[i]);
        }
        out += '\n';
        for (const auto& row : r.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out += ',';
                out += csv_escape(format_cell(row[i]));
            }
            out += '\n';
        }
        return out;
    }
    nlohmann::ordered_json j;
    j["kind"] = r.kind;
    j["version"] = kVersion;
    j["status"] = r.status();
    auto& cfg = j["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.config) cfg[k] = v;
    j["columns"] = r.columns;
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        auto jr = nlohmann::ordered_json::array();
        for (const auto& c : row) jr.push_back(detail::cell_json(c));
        rows.push_back(std::move(jr));
    }
    auto& sum = j["summary"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.summary) sum[k] = detail::cell_json(v);
    j["checks"] = {{"constant_one", r.constant_one_checks}, {"failures", r.constant_one_failures}};
    j["notes"] = r.notes;
    if (include_timing) j["runtime_seconds"] = detail::cell_json(r.runtime_seconds);
    return j.dump(2) + "\n";
}

/// Inverse of the JSON form of emit_report.
inline ExperimentReport parse_report_json(const std::string& text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("report is not valid JSON: ") + e.what());
    }
    try {
        ExperimentReport r;
        r.kind = j.at("kind").get<std::string>();
        for (const auto& [k, v] : j.at("config").items()) r.config.emplace_back(k, v.get<std::string>());
        r.columns = j.at("columns").get<std::vector<std::string>>();
        for (const auto& row : j.at("rows")) {
            std::vector<Cell> cells;
            for (const auto& c : row) cells.push_back(detail::json_cell(c));
            r.rows.push_back(std::move(cells));
        }
        for (const auto& [k, v] : j.at("summary").items()) r.summary.emplace_back(k, detail::json_cell(v));
        r.constant_one_checks = j.at("checks").at("constant_one").get<std::uint64_t>();
        r.constant_one_failures = j.at("checks").at("failures").get<std::uint64_t>();
        r.notes = j.at("notes").get<std::vector<std::string>>();
        if (j.contains("runtime_seconds") && j["runtime_seconds"].is_number())
            r.runtime_seconds = j["runtime_seconds"].get<double>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("report JSON is missing fields: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Experiments

namespace detail {

inline std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += format_double(v[i]);
    }
    return s;
}

/// Thread count is an execution setting and is left out so that reports
/// replay byte for byte across thread counts.
inline void echo_config(ExperimentReport& r, const ExperimentConfig& c) {
    r.config = {
        {"kind", c.kind},
        {"x", join_doubles(c.x)},
        {"theta", format_double(c.theta)},
        {"lambda", format_double(c.lambda)},
        {"eps", format_double(c.eps)},
        {"delta", c.delta},
        {"beta", c.beta},
        {"g", std::to_string(c.g)},
        {"Q", format_double(c.Q)},
        {"N", std::to_string(c.N)},
        {"m", std::to_string(c.m)},
        {"fold_count", std::to_string(c.fold_count)},
        {"M", format_double(c.M)},
        {"M_list", join_doubles(c.M_list)},
        {"k", std::to_string(c.k)},
        {"factor_family", c.factor_family},
        {"family", c.family},
        {"residue", c.residue},
        {"seed", std::to_string(c.seed)},
    };
}

inline std::uint64_t table_limit_for(double x) {
    if (!(x >= 1.0)) throw ConfigError("x must be at least 1");
    if (x > static_cast<double>(PrimeTable::kMaxLimit))
        throw BudgetError("x = " + format_double(x) + " exceeds the prime table ceiling");
    return std::max<std::uint64_t>(2, static_cast<std::uint64_t>(std::floor(x)));
}

inline double max_x(const ExperimentConfig& c) {
    if (c.x.empty()) throw ConfigError("x: at least one value is required");
    return *std::max_element(c.x.begin(), c.x.end());
}

inline bool in_regime(const ExperimentConfig& c) { return c.theta <= 0.5 - c.eps; }

inline void run_sieve(const ExperimentConfig& c, ExperimentReport& r) {
    const auto limit = table_limit_for(max_x(c));
    const PrimeTable t(limit);
    r.columns = {"x", "prime_count", "psi", "psi_minus_x"};
    auto xs = c.x;
    std::sort(xs.begin(), xs.end());
    for (const double x : xs) {
        const auto X = static_cast<std::uint64_t>(std::floor(x));
        const auto primes = t.primes();
        const auto pi = std::upper_bound(primes.begin(), primes.end(), X) - primes.begin();
        KahanSum psi;
        for (const auto& e : t.prime_powers_upto(X)) psi.add(t.log_prime(e.prime_index));
        r.rows.push_back({x, static_cast<std::int64_t>(pi), psi.value(), psi.value() - x});
    }
    // Divisor-sum identities over the first 10^4 integers.
    const std::uint64_t upto = std::min<std::uint64_t>(limit, 10'000);
    std::uint64_t bad = 0;
    std::vector<double> lam(upto + 1, 0.0);
    std::vector<std::int64_t> mu(upto + 1, 0), phi(upto + 1, 0);
    for (std::uint64_t d = 1; d <= upto; ++d)
        for (std::uint64_t n = d; n <= upto; n += d) {
            lam[n] += t.von_mangoldt(d);
            mu[n] += t.mobius(d);
            phi[n] += static_cast<std::int64_t>(t.euler_phi(d));
        }
    for (std::uint64_t n = 1; n <= upto; ++n) {
        const double logn = std::log(static_cast<double>(n));
        const bool ok = std::fabs(lam[n] - logn) <= 1e-9 * std::max(1.0, logn) && mu[n] == (n == 1 ? 1 : 0) &&
                        phi[n] == static_cast<std::int64_t>(n);
        r.record_check(ok);
        if (!ok) ++bad;
    }
    r.summary = {{"limit", static_cast<std::int64_t>(limit)},
                 {"identities_checked_to", static_cast<std::int64_t>(upto)},
                 {"identity_failures", static_cast<std::int64_t>(bad)}};
}

inline void run_ap_error(const ExperimentConfig& c, ExperimentReport& r) {
    const double x = c.x.front();
    const PrimeTable t(table_limit_for(x));
    const auto qmax = static_cast<std::uint64_t>(c.Q > 0 ? c.Q : 100);
    r.columns = {"x", "q", "phi_q", "E", "worst_residue", "E_over_sqrt_x"};
    double worst = 0.0;
    for (std::uint64_t q = 1; q <= qmax; ++q) {
        const auto e = error_E_detail(x, q, t);
        worst = std::max(worst, e.value);
        r.rows.push_back({x, static_cast<std::int64_t>(q), static_cast<std::int64_t>(detail::totient(q, t)), e.value,
                          static_cast<std::int64_t>(e.residue), e.value / std::sqrt(x)});
    }
    r.summary = {{"max_E", worst}};
}

inline void run_bv_average(const ExperimentConfig& c, ExperimentReport& r) {
    const PrimeTable t(table_limit_for(max_x(c)));
    r.columns = {"x", "theta", "Q", "q_min", "q_max", "moduli", "sum_E", "R", "in_regime"};
    std::vector<std::pair<double, double>> sums, ratios;
    for (const double x : c.x) {
        const double Q = c.Q > 0 ? c.Q : std::pow(x, c.theta);
        const SquareModulusWindow w(Q);
        const double total = averaged_error(x, w, t, c.threads);
        const double R = total * std::sqrt(Q) / x;
        r.rows.push_back({x, c.theta, Q, static_cast<std::int64_t>(w.q_min()), static_cast<std::int64_t>(w.q_max()),
                          static_cast<std::int64_t>(w.size()), total, R, in_regime(c)});
        if (total > 0) {
            sums.emplace_back(x, total);
            ratios.emplace_back(x, R);
        }
    }
    if (sums.size() >= 2 && sums.front().first != sums.back().first) {
        const auto fs = exponent_fit(sums);
        const auto fr = exponent_fit(ratios);
        r.summary.emplace_back("sum_E_slope", fs.slope);
        r.summary.emplace_back("R_slope", fr.slope);
    }
    r.summary.emplace_back("regime", std::string(in_regime(c) ? "in" : "out"));
    r.notes.push_back("no exceptional moduli removed: every square modulus in the window is summed");
}

inline Rational delta_or(const ExperimentConfig& c, Rational fallback) {
    return c.delta.empty() ? fallback : Rational::parse(c.delta);
}

inline void run_farey(const ExperimentConfig& c, ExperimentReport& r) {
    const Rational beta = Rational::parse(c.beta);
    const Rational delta = delta_or(c, Rational(1, 10));
    const auto Q = static_cast<std::uint64_t>(c.Q > 0 ? c.Q : 2);
    r.columns = {"quantity", "convention", "beta", "delta", "Q", "g", "value", "witness", "ratio"};
    const FareyQuery qN(beta, delta, Q, 1);
    const double ratio = delta > Rational(0) ? lemma1_ratio(qN, c.eps) : std::numeric_limits<double>::quiet_NaN();
    r.rows.push_back({std::string("count_N"), std::string("1<=a<=q^2;gcd(a,q)=1"), beta.str(), delta.str(),
                      static_cast<std::int64_t>(Q), std::int64_t{1}, static_cast<std::int64_t>(count_N(qN)),
                      std::string(""), ratio});
    const FareyQuery qM(beta, delta, Q, c.g);
    r.rows.push_back({std::string("count_M"), std::string("0<=a<gq^2;gcd(a,gq^2)=1"), beta.str(), delta.str(),
                      static_cast<std::int64_t>(Q), static_cast<std::int64_t>(c.g),
                      static_cast<std::int64_t>(count_M(qM)), std::string(""), std::string("")});
    const auto sweep = max_M_sweep(delta, Q, c.g);
    r.rows.push_back({std::string("max_M"), std::string("0<=a<gq^2;gcd(a,gq^2)=1"), std::string(""),
                      delta.str(), static_cast<std::int64_t>(Q), static_cast<std::int64_t>(c.g),
                      static_cast<std::int64_t>(sweep.max_value), sweep.witness.str(), std::string("")});
    const bool witness_ok = count_M(FareyQuery(sweep.witness, delta, Q, c.g)) == sweep.max_value;
    r.record_check(witness_ok);
    r.summary = {{"fractions", static_cast<std::int64_t>(sweep.fractions)}, {"witness_consistent", witness_ok}};
}

inline void run_large_sieve(const ExperimentConfig& c, ExperimentReport& r) {
    const auto family = parse_family(c.family);
    const auto Q = static_cast<std::uint64_t>(c.Q > 0 ? c.Q : 8);
    if (c.N == 0) throw ConfigError("N must be at least 1");
    const double x = c.x.front();
    const std::uint64_t limit = std::max<std::uint64_t>({c.N * 2 + 2, kMaxSieveModulus, table_limit_for(x)});
    const PrimeTable t(limit);
    const auto coeffs = make_coefficients(family, 1, c.N, c.seed, t);
    const Rational delta = delta_or(c, Rational(1, static_cast<Rational::int_type>(c.N)));

    r.columns = {"check",  "Q",   "g",    "N",      "modulus", "characters", "lambda",
                 "eps",    "seed", "family", "lhs", "rhs",     "ratio",      "holds"};
    const Cell blank = std::string("");
    const Cell fam = std::string(family_name(family));
    const Cell seed = static_cast<std::int64_t>(c.seed);
    const Cell N = static_cast<std::int64_t>(c.N);
    const Cell g = static_cast<std::int64_t>(c.g);
    auto ratio_of = [](double lhs, double rhs) { return rhs > 0 ? lhs / rhs : 0.0; };
    auto as_int = [](std::uint64_t v) { return Cell(static_cast<std::int64_t>(v)); };

    for (std::uint64_t q = 1; q <= Q; ++q) {
        const auto d = duality_bound_check(coeffs, q, c.g, delta);
        r.record_check(d.holds);
        r.rows.push_back({std::string("duality"), as_int(q), g, N, blank, blank, blank, c.eps, seed, fam, d.lhs,
                          d.rhs, lemma2_bound_ratio(coeffs, q, c.g, c.eps), d.holds});
    }
    for (std::uint64_t k = 1; k <= Q && c.g * k * k <= kMaxSieveModulus; ++k) {
        const auto mod = c.g * k * k;
        const auto p = primitive_reduction_check(coeffs, mod, 1);
        r.record_check(p.holds);
        r.rows.push_back({std::string("primitive_reduction"), as_int(k), g, N, as_int(mod), blank, blank, c.eps, seed,
                          fam, p.lhs, p.rhs, ratio_of(p.lhs, p.rhs), p.holds});
    }

    const double Qsq = std::pow(x, c.theta);
    const SquareModulusWindow w(Qsq);
    if (w.empty() || w.q_max() * w.q_max() > kMaxSieveModulus) {
        r.notes.push_back("character moments skipped: square-moduli window empty or beyond the character budget");
        return;
    }
    const double xl = std::pow(x, c.lambda);
    const auto T = char_moment_T_lambda(coeffs, w, xl, 2 * xl, t, c.threads);
    const double bound3 = lemma3_bound(x, Qsq, static_cast<double>(c.N), c.lambda, c.eps, coeffs.norm2());
    r.rows.push_back({std::string("lemma3_T"), Qsq, blank, N, blank, as_int(T.characters), c.lambda, c.eps, seed,
                      fam, T.value, bound3, ratio_of(T.value, bound3), blank});

    const std::uint64_t K = std::max<std::uint64_t>(1, c.N / 2);
    const auto kc = make_coefficients(family, static_cast<std::int64_t>(K) + 1, K, c.seed, t);
    const auto hc = make_coefficients(family, static_cast<std::int64_t>(K) + 1, K, c.seed + 1, t);
    const auto S = bilinear_sum_S(hc, kc, 0.0, w, xl, 2 * xl, t, c.threads);
    const double bound4 = std::pow(x, 0.5 - c.eps / 20.0) * std::sqrt(Qsq);
    r.rows.push_back({std::string("lemma4_S"), Qsq, blank, N, blank, as_int(S.characters), c.lambda, c.eps, seed,
                      fam, S.S, bound4, lemma4_ratio(S.S, x, Qsq, c.eps), blank});
    const double cs_rhs = std::sqrt(S.sum_H2 * S.sum_K2);
    const bool cs = S.S <= cs_rhs * (1.0 + 1e-9);
    r.record_check(cs);
    r.rows.push_back({std::string("cauchy_schwarz"), Qsq, blank, N, blank, as_int(S.characters), c.lambda, c.eps,
                      seed, fam, S.S, cs_rhs, ratio_of(S.S, cs_rhs), cs});
    const auto cond = lemma4_conditions(x, Qsq, c.lambda, static_cast<double>(K), static_cast<double>(K), c.eps);
    r.summary.emplace_back("lemma4_size_conditions", std::string(cond.all() ? "satisfied" : "violated"));
}

inline void run_char_table(const ExperimentConfig& c, ExperimentReport& r) {
    const PrimeTable t(std::max<std::uint64_t>(c.m, 2));
    const auto group = character_group(c.m, t);
    r.columns = {"modulus", "label", "conductor", "primitive", "g", "k"};
    std::int64_t primitive = 0;
    for (const auto& chi : group->characters()) {
        const auto split = t.squarefree_square_split(chi.conductor());
        primitive += chi.is_primitive();
        r.rows.push_back({static_cast<std::int64_t>(c.m), chi.label(), static_cast<std::int64_t>(chi.conductor()),
                          chi.is_primitive(), static_cast<std::int64_t>(split.squarefree),
                          static_cast<std::int64_t>(split.square_root)});
    }
    r.summary = {{"characters", static_cast<std::int64_t>(group->order())}, {"primitive", primitive}};
}

inline void run_lemma7_toy(const ExperimentConfig& c, ExperimentReport& r) {
    FactorFamily ff;
    if (c.factor_family == "one") ff = FactorFamily::one;
    else if (c.factor_family == "log") ff = FactorFamily::log;
    else throw ConfigError("factor_family must be 'one' or 'log'");
    ConvolutionSpec spec;
    if (c.M_list.empty()) {
        if (c.fold_count == 0) throw ConfigError("fold_count must be at least 1");
        spec = ConvolutionSpec::uniform(c.fold_count, c.M, ff);
    } else {
        for (const double M : c.M_list) spec.factors.push_back({M, ff, {}});
    }
    const auto u = convolution_coefficients(spec);
    const double x = c.x.front();
    const double Q = c.Q > 0 ? c.Q : std::pow(x, c.theta);
    const SquareModulusWindow w(Q);
    const ResidueRule rule =
        c.residue == "worst" ? ResidueRule::worst_case() : ResidueRule::fixed(std::stoll(c.residue));
    const auto res = weighted_remainder_sum(u, x, w, c.k, rule, c.threads);

    r.columns = {"q", "modulus", "residue", "k", "abs_weighted_remainder"};
    for (const auto& row : res.per_modulus)
        r.rows.push_back({static_cast<std::int64_t>(row.q), static_cast<std::int64_t>(row.q * row.q),
                          static_cast<std::int64_t>(row.residue), static_cast<std::int64_t>(c.k), row.value});
    const double D = spec.D(), D1 = spec.D1();
    bool support_ok = true;
    for (const auto& [d, ud] : u) support_ok = support_ok && static_cast<double>(d) > D1 && static_cast<double>(d) <= D;
    r.record_check(support_ok);
    r.summary = {{"total", res.total},
                 {"D", D},
                 {"D1", D1},
                 {"support_size", static_cast<std::int64_t>(u.size())},
                 {"support_within_bounds", support_ok}};
    r.notes.push_back("no exceptional moduli removed: the sum is an upper bound for the restricted one");
}

}  // namespace detail

/// Runs one experiment. Pure in (config, seed) apart from runtime_seconds.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    if (config.threads == 0) throw ConfigError("threads must be at least 1");
    if (config.x.empty()) throw ConfigError("x: at least one value is required");
    for (const double x : config.x)
        if (!std::isfinite(x) || x <= 0) throw ConfigError("x: values must be positive");
    if (!(config.eps > 0)) throw ConfigError("eps must be positive");

    const auto start = std::chrono::steady_clock::now();
    ExperimentReport r;
    r.kind = config.kind;
    detail::echo_config(r, config);
    if (config.kind == "sieve") detail::run_sieve(config, r);
    else if (config.kind == "ap-error") detail::run_ap_error(config, r);
    else if (config.kind == "bv-average") detail::run_bv_average(config, r);
    else if (config.kind == "farey") detail::run_farey(config, r);
    else if (config.kind == "large-sieve") detail::run_large_sieve(config, r);
    else if (config.kind == "char-table") detail::run_char_table(config, r);
    else if (config.kind == "lemma7-toy") detail::run_lemma7_toy(config, r);
    else throw ConfigError("kind: unknown experiment '" + config.kind + "'");
    r.summary.emplace_back("status", r.status());
    r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace sqmod
