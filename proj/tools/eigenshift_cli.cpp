// Command-line front end: certificate evaluation on a fixed pair, Monte Carlo
// studies from a config file, and the deterministic property suite.

#include "eigenshift/harness.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>

using namespace eigenshift;
using namespace eigenshift::harness;

namespace {

constexpr int kExitViolation = 1;
constexpr int kExitError = 2;

json real(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

json certificate_json(const BoundCertificate& c) {
    return {{"bound", real(c.bound_value)},
            {"condition", real(c.condition_value)},
            {"threshold", c.condition_threshold},
            {"applicable", c.applicable}};
}

std::optional<std::uint64_t> env_seed() {
    const char* s = std::getenv("EIGENSHIFT_SEED");
    if (!s || !*s) return std::nullopt;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (*end != '\0') throw std::invalid_argument(std::string("EIGENSHIFT_SEED is not an integer: ") + s);
    return v;
}

int run_bound(const std::string& a_path, const std::string& b_path, const std::string& set_text,
              const std::string& format) {
    const PerturbedPair pair = PerturbedPair::make(read_matrix(a_path), read_matrix(b_path), {"cli", a_path + " " + b_path});
    const IndexSet I = IndexSet::parse(set_text);
    I.check_range(pair.dim());
    const TrialRecord r = evaluate_trial(pair, I);
    const auto violations = record_violations(r);

    json out;
    out["set"] = I.to_string();
    out["distance_sq"] = real(r.distance_sq);
    out["davis_kahan"] = {{"hs", real(r.dk_hs)}, {"op", real(r.dk_op)}};
    out["first_order"] = {{"linear_hs_sq", real(r.first_order_hs_sq)},
                          {"delta", real(r.delta)},
                          {"remainder_bound", real(r.remainder_bound)}};
    out["x"] = real(r.x_measured);
    out["relative_rank"] = real(r.rank_I);
    if (pair.eigs().minCoeff() > 0.0) {
        out["theorem2"] = certificate_json(theorem2_bound(pair.eigs(), r.x_measured, I));
        out["refined"] = certificate_json(refined_bound(pair, r.x_measured, I));
        out["theorem3"] = {{"bound", real(r.thm3_bound)},
                           {"condition", real(r.thm3_condition)},
                           {"applicable", bool(r.thm3_applicable)}};
    }
    out["theorem4"] = {{"bound", real(r.thm4_bound)},
                       {"condition", real(r.thm4_condition)},
                       {"applicable", bool(r.thm4_applicable)}};
    out["violations"] = violations;

    if (format == "csv")
        std::cout << records_to_csv({r});
    else
        std::cout << out.dump(2) << "\n";
    return violations.empty() ? 0 : kExitViolation;
}

struct SimulateOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<double> tolerance_slope;
    std::string format = "json";
};

int run_simulate(const SimulateOptions& o) {
    ExperimentConfig c = read_config(o.config);
    if (auto s = env_seed()) c.seed_base = *s;
    if (o.seed) c.seed_base = *o.seed;
    c.source.seed_base = c.seed_base;
    if (o.trials) c.trials = *o.trials;
    if (o.workers) c.workers = *o.workers;
    if (o.out) c.output = *o.out;
    if (o.tolerance_slope) c.tolerance_slope = *o.tolerance_slope;
    if (c.trials < 1) throw std::invalid_argument("--trials must be >= 1");
    if (c.workers < 1) throw std::invalid_argument("--workers must be >= 1");

    const StudyResult res = run_study(c);
    if (!c.output.empty()) {
        std::filesystem::path base(c.output);
        if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
        write_records(res.records, std::filesystem::path(base).replace_extension(".csv").string());
        write_summary(res.summary, std::filesystem::path(base).replace_extension(".json").string());
    }
    if (o.format == "csv")
        std::cout << records_to_csv(res.records);
    else
        std::cout << summary_to_json(res.summary).dump(2) << "\n";

    for (const auto& ch : res.summary.checks)
        if (!ch.pass)
            std::cerr << "check " << ch.name << " outside [" << ch.lo << ", " << ch.hi << "]: " << ch.value << "\n";
    for (const auto& w : res.summary.warnings) std::cerr << "warning: " << w << "\n";
    if (res.summary.total_violations() > 0) {
        std::cerr << "deterministic violations: " << res.summary.total_violations() << "\n";
        return kExitViolation;
    }
    return 0;
}

int run_verify(std::optional<std::uint64_t> seed, int workers, const std::string& format) {
    VerificationOptions opts;
    if (auto s = env_seed()) opts.seed_base = *s;
    if (seed) opts.seed_base = *seed;
    opts.workers = workers;
    const auto reports = run_verification_suite(opts);

    std::int64_t total = 0;
    json out = json::array();
    for (const auto& r : reports) {
        total += r.violations;
        out.push_back({{"name", r.name},
                       {"instances", r.instances},
                       {"evaluated", r.evaluated},
                       {"violations", r.violations},
                       {"worst_excess", real(r.worst_excess)}});
    }
    if (format == "json") {
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "name,instances,evaluated,violations,worst_excess\n";
        for (const auto& r : reports)
            std::cout << r.name << "," << r.instances << "," << r.evaluated << "," << r.violations << ","
                      << std::setprecision(17) << r.worst_excess << "\n";
    }
    return total == 0 ? 0 : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Eigenspace perturbation bounds and Monte Carlo studies"};
    app.require_subcommand(1);

    std::string a_path, b_path, set_text = "1", bound_format = "json";
    auto* bound = app.add_subcommand("bound", "Evaluate every bound for the pair (A, B) and index set I");
    bound->add_option("A", a_path, "Matrix file for Sigma")->required();
    bound->add_option("B", b_path, "Matrix file for Sigma_hat")->required();
    bound->add_option("--set", set_text, "Index set, e.g. 1..3 or 1,4")->capture_default_str();
    bound->add_option("--format", bound_format, "Output format")->check(CLI::IsMember({"csv", "json"}));

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Run the study described by a JSON config");
    simulate->add_option("config", sim.config, "Config file")->required();
    simulate->add_option("--seed", sim.seed, "Seed base (overrides EIGENSHIFT_SEED and the config)");
    simulate->add_option("--trials", sim.trials, "Trials per grid point");
    simulate->add_option("--workers", sim.workers, "Worker threads");
    simulate->add_option("--out", sim.out, "Output base path; writes <base>.csv and <base>.json");
    simulate->add_option("--tolerance-slope", sim.tolerance_slope, "Half-width of log-log slope windows");
    simulate->add_option("--format", sim.format, "Stdout format: json summary or csv records")
        ->check(CLI::IsMember({"csv", "json"}));

    std::optional<std::uint64_t> verify_seed;
    int verify_workers = 1;
    std::string verify_format = "csv";
    auto* verify = app.add_subcommand("verify", "Run the deterministic property suite");
    verify->add_option("--seed", verify_seed, "Seed base of the instance family");
    verify->add_option("--workers", verify_workers, "Worker threads")->check(CLI::PositiveNumber);
    verify->add_option("--format", verify_format, "Output format")->check(CLI::IsMember({"csv", "json"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*bound) return run_bound(a_path, b_path, set_text, bound_format);
        if (*simulate) return run_simulate(sim);
        if (*verify) return run_verify(verify_seed, verify_workers, verify_format);
    } catch (const std::exception& e) {
        std::cerr << "eigenshift: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
