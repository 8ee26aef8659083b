#pragma once

#include "eigenshift/block_bounds.hpp"
#include "eigenshift/bounds.hpp"
#include "eigenshift/perturb_models.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace eigenshift::harness {

using nlohmann::json;

enum class StudyKind { bound_validity, sharpness, tail, decay_scaling, goe, spiked, prop_suite };

std::string to_string(StudyKind kind);
StudyKind parse_study_kind(const std::string& s);

/// Which generator a study draws its pairs from.
enum class ModelKind { covariance, spiked, low_rank_goe, fixed };

/// One study, as read from a JSON configuration file. See README for the
/// schema.
struct ExperimentConfig {
    StudyKind study = StudyKind::bound_validity;
    ModelKind model = ModelKind::covariance;

    KLSourceSpec source;
    int n = 1000;
    std::vector<int> n_grid;

    // Low-rank + GOE model.
    std::vector<double> low_rank{10.0, 5.0};
    int p = 60;
    double epsilon = 1e-3;
    std::vector<double> epsilon_grid;
    /// Values of p - k for the dimension sweep.
    std::vector<int> pk_grid;

    // Fixed pair.
    std::optional<SymMatrix> fixed_sigma;
    std::optional<SymMatrix> fixed_sigma_hat;

    /// Replaces every generated Sigma_hat by Sigma.
    bool force_zero_perturbation = false;

    /// Index set: explicit list, or top-k when `explicit_set` is empty.
    int top_k = 1;
    std::vector<int> explicit_set;
    std::vector<int> k_grid;
    /// Second index set for the tail study (defaults to the complement).
    std::vector<int> tail_set;

    int trials = 100;
    std::vector<double> t_grid;
    /// Scaling-study constant t and the budget for t k log k / sqrt(n).
    double t = 1.0;
    double budget = 0.0;
    bool m1_doubling = false;

    std::uint64_t seed_base = 0;
    std::string output;
    int workers = 1;

    double tolerance_identity = 1e-10;
    double tolerance_slope = 0.15;
    double tolerance_factor = 2.0;

    IndexSet index_set(int p) const;
};

ExperimentConfig parse_config(const json& j);
ExperimentConfig read_config(const std::string& path);
json config_to_json(const ExperimentConfig& c);

/// One Monte Carlo trial. Field order is the CSV column order.
/// Tri-state flags use 1 = ok, 0 = failed, -1 = not evaluated.
struct TrialRecord {
    std::int64_t trial = 0;
    std::uint64_t seed = 0;
    int point = 0;
    double param = 0.0;
    std::string model;
    int failed = 0;
    double distance_sq = 0.0;
    double dk_hs = 0.0;
    double dk_op = 0.0;
    double delta = 0.0;
    double first_order_hs_sq = 0.0;
    double remainder_bound = 0.0;
    int remainder_ok = -1;
    double x_measured = 0.0;
    double rank_I = 0.0;
    double thm2_condition = 0.0;
    double thm2_bound = 0.0;
    int thm2_applicable = 0;
    double refined_bound = 0.0;
    double thm3_condition = 0.0;
    double thm3_bound = 0.0;
    int thm3_applicable = 0;
    double thm4_condition = 0.0;
    double thm4_bound = 0.0;
    int thm4_applicable = 0;
    int separation_ok = -1;
    int contraction_ok = -1;
    double stat = 0.0;
    double lambda_hat_max = 0.0;
    double lambda_hat_min = 0.0;

    bool operator==(const TrialRecord&) const = default;
};

/// CSV header, columns in TrialRecord declaration order.
const std::vector<std::string>& record_columns();

struct TrialOptions {
    bool lemma_checks = true;
};

/// Evaluates every distance, bound and hypothesis check on one pair.
TrialRecord evaluate_trial(const PerturbedPair& pair, const IndexSet& I, const TrialOptions& opts = {});

/// Names of the deterministic inequalities a record violates (slack 1e-10).
std::vector<std::string> record_violations(const TrialRecord& r);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool operator==(const Series&) const = default;
};

/// Scaling or ordering check with its tolerance window.
struct Check {
    std::string name;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool pass = false;
    bool operator==(const Check&) const = default;
};

struct StudySummary {
    std::string study;
    json config;
    std::int64_t trials = 0;
    std::int64_t failed = 0;
    std::map<std::string, std::int64_t> violations;
    std::map<std::string, double> metrics;
    std::vector<Series> series;
    std::vector<Check> checks;
    std::vector<std::string> warnings;

    std::int64_t total_violations() const;
    bool checks_pass() const;
    bool operator==(const StudySummary&) const = default;
};

json summary_to_json(const StudySummary& s);
StudySummary summary_from_json(const json& j);

struct StudyResult {
    StudySummary summary;
    std::vector<TrialRecord> records;
};

StudyResult run_bound_validity(const ExperimentConfig& c);
StudyResult run_sharpness(const ExperimentConfig& c);
StudyResult run_tail(const ExperimentConfig& c);
StudyResult run_decay_scaling(const ExperimentConfig& c);
StudyResult run_goe(const ExperimentConfig& c);
StudyResult run_spiked(const ExperimentConfig& c);
StudyResult run_prop_suite(const ExperimentConfig& c);
StudyResult run_study(const ExperimentConfig& c);

void write_records(const std::vector<TrialRecord>& records, const std::string& path);
std::vector<TrialRecord> read_records(const std::string& path);
std::string records_to_csv(const std::vector<TrialRecord>& records);
std::vector<TrialRecord> records_from_csv(const std::string& text, const std::string& origin = "<string>");
void write_summary(const StudySummary& summary, const std::string& path);
StudySummary read_summary(const std::string& path);

// ---------------------------------------------------------------------------
// Statistics helpers.

/// Linear-interpolated quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> values, double level);
double median(std::vector<double> values);
/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Runs `task(i)` for i in [0, count) on `workers` threads; results are
/// stored by index so the output does not depend on scheduling.
template <class T>
std::vector<T> parallel_map(std::int64_t count, int workers, const std::function<T(std::int64_t)>& task);

// ---------------------------------------------------------------------------
// Random structured instances for the deterministic suites.

struct Instance {
    PerturbedPair pair;
    IndexSet I;
    std::string kind;
};

/// Instance `index` of the pinned instance family: p in {4..12}, mixed
/// spectra (distinct, exponential, polynomial, tied, clustered), optional
/// random basis, and relative, prototype, sampled-covariance, additive GOE
/// or low-rank perturbations over several orders of magnitude.
Instance random_instance(std::uint64_t seed_base, std::uint64_t index);

struct VerificationOptions {
    std::uint64_t seed_base = 2024;
    int soundness_instances = 1000;
    int prop_instances = 500;
    int y_grid = 10;
    int remainder_instances = 1000;
    int hs_pairs = 500;
    int consistency_instances = 200;
    int workers = 1;
};

struct CriterionReport {
    std::string name;
    std::int64_t instances = 0;
    /// Instances (or checks) where the hypothesis held and the claim was tested.
    std::int64_t evaluated = 0;
    std::int64_t violations = 0;
    /// Largest observed lhs - rhs (or relative mismatch); <= 0 means slack.
    double worst_excess = 0.0;
    bool pass() const { return violations == 0; }
};

std::vector<CriterionReport> run_verification_suite(const VerificationOptions& opts);

}  // namespace eigenshift::harness

#include "eigenshift/parallel_map.ipp"
