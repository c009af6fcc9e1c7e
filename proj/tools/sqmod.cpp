// sqmod: command line front end for the square-moduli experiments.
//
// Exit codes: 0 pass, 1 usage error, 2 budget error, 3 a constant-one
// inequality failed.

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sqmod/experiment.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBudget = 2;
constexpr int kExitViolation = 3;

void write_output(const std::string& path, const std::string& bytes) {
    if (path.empty() || path == "-") {
        std::cout << bytes;
        std::cout.flush();
        if (!std::cout) throw std::runtime_error("write to stdout failed");
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    out << bytes;
    if (!out.flush()) throw std::runtime_error("write to '" + path + "' failed");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw sqmod::ConfigError("cannot read report '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Computational checks for primes in progressions to square moduli"};
    app.set_config("--config", "", "TOML/INI file with option values; flags override it");
    app.require_subcommand(1);
    app.fallthrough();

    sqmod::ExperimentConfig cfg;
    std::string out_path, format = "csv", in_path;
    bool timing = false;

    app.add_option("--x", cfg.x, "x values (space separated for sweeps)")->expected(1, -1);
    app.add_option("--theta", cfg.theta, "Q = x^theta when --Q is absent");
    app.add_option("--lambda", cfg.lambda, "conductor window (x^lambda, 2 x^lambda]");
    app.add_option("--eps", cfg.eps, "exponent epsilon in reported bounds");
    app.add_option("--delta", cfg.delta, "Delta as a rational, e.g. 1/10");
    app.add_option("--beta", cfg.beta, "target point as a rational");
    app.add_option("--g", cfg.g, "multiplier g in the moduli g q^2");
    app.add_option("--Q", cfg.Q, "Q bound (meaning depends on the experiment)");
    app.add_option("--N", cfg.N, "coefficient vector length");
    app.add_option("--m", cfg.m, "modulus for char-table");
    app.add_option("--fold", cfg.fold_count, "number of convolution factors");
    app.add_option("--M", cfg.M, "common dyadic range M for every factor");
    app.add_option("--M-list", cfg.M_list, "per-factor dyadic ranges M_i");
    app.add_option("--k", cfg.k, "Riesz order");
    app.add_option("--factor-family", cfg.factor_family, "convolution factor coefficients: one | log");
    app.add_option("--residue", cfg.residue, "residue rule: worst or a fixed integer");
    app.add_option("--seed", cfg.seed, "64-bit seed");
    app.add_option("--family", cfg.family, "coefficients: one | moebius | mangoldt | random");
    app.add_option("--threads", cfg.threads, "worker threads");
    app.add_option("--out", out_path, "output path (default stdout)");
    app.add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--timing", timing, "include wall time in JSON output");

    struct Kind {
        const char* command;
        const char* experiment;
        const char* help;
    };
    const Kind kinds[] = {
        {"sieve", "sieve", "prime counts, psi(x) and divisor-sum identities"},
        {"ap-error", "ap-error", "E(x, q) for q up to --Q"},
        {"bv-average", "bv-average", "sum of E(x, q^2) over Q < q^2 <= 2Q, Q = x^theta"},
        {"farey-count", "farey", "counts of a/q^2 and a/(g q^2) near --beta, and their maximum"},
        {"large-sieve", "large-sieve", "duality, primitive reduction and character moment checks"},
        {"char-table", "char-table", "characters mod --m with conductors"},
        {"lemma7-toy", "lemma7-toy", "convolution coefficients and weighted remainder sums"},
    };
    std::vector<std::pair<CLI::App*, const char*>> subs;
    for (const auto& k : kinds) subs.emplace_back(app.add_subcommand(k.command, k.help), k.experiment);
    auto* report_cmd = app.add_subcommand("report", "re-emit a saved JSON report");
    report_cmd->add_option("--in", in_path, "JSON report to read")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        const auto fmt = sqmod::parse_format(format);
        sqmod::ExperimentReport report;
        if (report_cmd->parsed()) {
            report = sqmod::parse_report_json(read_file(in_path));
        } else {
            for (const auto& [sub, kind] : subs)
                if (sub->parsed()) cfg.kind = kind;
            report = sqmod::run_experiment(cfg);
        }
        write_output(out_path, sqmod::emit_report(report, fmt, timing));
        if (!report.pass()) {
            std::cerr << "FAIL: " << report.constant_one_failures << " of " << report.constant_one_checks
                      << " constant-one checks failed\n";
            return kExitViolation;
        }
        return kExitPass;
    } catch (const sqmod::BudgetError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::out_of_range& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
