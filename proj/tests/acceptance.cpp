// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "eigenshift/harness.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace eigenshift;
using namespace eigenshift::harness;

namespace {

std::string config_path(const std::string& name) { return std::string(EIGENSHIFT_CONFIG_DIR) + "/" + name; }

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s %s (%s; %.1fs)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

const CriterionReport& find(const std::vector<CriterionReport>& reports, const std::string& name) {
    for (const auto& r : reports)
        if (r.name == name) return r;
    throw std::runtime_error("missing criterion " + name);
}

std::string describe(const CriterionReport& r) {
    std::ostringstream os;
    os << r.name << ": " << r.violations << " violations / " << r.evaluated << " checks";
    return os.str();
}

Outcome all_zero(const std::vector<CriterionReport>& reports, const std::vector<std::string>& names) {
    Outcome o{true, ""};
    for (const auto& n : names) {
        const auto& r = find(reports, n);
        if (!r.pass() || r.evaluated == 0) o.pass = false;
        if (!o.detail.empty()) o.detail += "; ";
        o.detail += describe(r);
    }
    return o;
}

std::string format_checks(const StudySummary& s) {
    std::ostringstream os;
    for (const auto& c : s.checks) os << c.name << "=" << c.value << " in [" << c.lo << "," << c.hi << "]; ";
    os << "violations=" << s.total_violations();
    return os.str();
}

Outcome study_outcome(const StudyResult& res, const std::vector<std::string>& check_names) {
    Outcome o{res.summary.total_violations() == 0 && res.summary.failed == 0, format_checks(res.summary)};
    for (const auto& want : check_names) {
        bool found = false;
        for (const auto& c : res.summary.checks)
            if (c.name.rfind(want, 0) == 0) {
                found = true;
                if (!c.pass) o.pass = false;
            }
        if (!found) {
            o.pass = false;
            o.detail += " missing check " + want;
        }
    }
    return o;
}

}  // namespace

int main() {
    VerificationOptions opts;
    std::vector<CriterionReport> reports;
    double suite_secs = 0.0;
    {
        const auto start = std::chrono::steady_clock::now();
        reports = run_verification_suite(opts);
        suite_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }

    report("soundness: bounds hold under their gates (1000 instances, p in 4..12)", [&] {
        Outcome o = all_zero(reports, {"theorem2_soundness", "theorem3_soundness", "theorem4_soundness",
                                       "measured_envelopes_valid"});
        o.pass = o.pass && suite_secs <= 120.0;
        o.detail += "; suite runtime " + std::to_string(suite_secs) + "s";
        return o;
    });
    report("separation and contraction lemmas on gate-passing instances",
           [&] { return all_zero(reports, {"eigenvalue_separation", "contraction"}); });
    report("eigenvalue localisation implications (500 instances x 10 offsets)",
           [&] { return all_zero(reports, {"localisation_implications"}); });
    report("first-order remainder bound (1000 instances)",
           [&] { return all_zero(reports, {"first_order_remainder"}); });
    report("Hilbert-Schmidt identity: trace vs entrywise (500 pairs)",
           [&] { return all_zero(reports, {"hs_identity"}); });
    report("consistency: singleton block bound equals scalar bound; constant-64 form is 4x", [&] {
        return all_zero(reports, {"singleton_blocks_match_scalar_bound", "singleton_blocks_match_scalar_gate",
                                  "block_bound_is_four_times_scalar"});
    });

    report("exponential decay scaling: slope of median distance^2 in n is -1 +- 0.15", [&] {
        const auto start = std::chrono::steady_clock::now();
        const StudyResult res = run_decay_scaling(read_config(config_path("decay_scaling.json")));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        Outcome o = study_outcome(res, {"slope_distance_sq_vs_n"});
        o.pass = o.pass && secs <= 300.0;
        return o;
    });
    report("block-norm tail: 99th percentile halves (+-40%) per quadrupling of n", [&] {
        return study_outcome(run_tail(read_config(config_path("tail.json"))), {"q99_ratio_", "survival_monotone"});
    });
    report("low-rank plus GOE: epsilon slope 2 +- 0.1, (p-k) doubling ratio 2 +- 0.5", [&] {
        return study_outcome(run_goe(read_config(config_path("goe.json"))),
                             {"slope_distance_sq_vs_epsilon", "p_minus_k_ratio_"});
    });
    report("spiked covariance: n slope -1 +- 0.15", [&] {
        return study_outcome(run_spiked(read_config(config_path("spiked.json"))), {"slope_distance_sq_vs_n"});
    });
    report("sharpness: norm-based ratio grows >= 10x over k = 2..6, scalar-bound ratio within 4x", [&] {
        return study_outcome(run_sharpness(read_config(config_path("sharpness.json"))),
                             {"dk_ratio_growth", "theorem2_ratio_spread"});
    });
    report("determinism: seed 42, 10 trials, byte-identical CSV on repeat", [&] {
        ExperimentConfig c = read_config(config_path("golden.json"));
        const std::string first = records_to_csv(run_study(c).records);
        const std::string second = records_to_csv(run_study(c).records);
        c.workers = 4;
        const std::string threaded = records_to_csv(run_study(c).records);
        return Outcome{first == second && first == threaded,
                       std::to_string(first.size()) + " bytes; repeat " + (first == second ? "equal" : "differs") +
                           "; 4 workers " + (first == threaded ? "equal" : "differs")};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
