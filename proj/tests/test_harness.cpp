#include "eigenshift/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>

using namespace eigenshift;
using namespace eigenshift::harness;

namespace {

ExperimentConfig small_covariance(StudyKind study = StudyKind::bound_validity) {
    ExperimentConfig c;
    c.study = study;
    c.model = ModelKind::covariance;
    c.source.profile = DecayProfile::exponential(1.0);
    c.top_k = 3;
    c.n = 500;
    c.trials = 20;
    c.seed_base = 42;
    return c;
}

std::int64_t violations(const StudyResult& r) { return r.summary.total_violations(); }

}  // namespace

TEST_CASE("statistics helpers") {
    CHECK(quantile({3, 1, 2}, 0.5) == 2.0);
    CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(quantile({5}, 0.99) == 5.0);
    CHECK(quantile({1, 2, 3, 4, 5}, 0.0) == 1.0);
    CHECK(quantile({1, 2, 3, 4, 5}, 1.0) == 5.0);
    CHECK_THROWS(quantile({}, 0.5));
    CHECK(loglog_slope({1, 10, 100}, {1, 0.1, 0.01}) == doctest::Approx(-1.0));
    CHECK(loglog_slope({1, 2, 4}, {3, 12, 48}) == doctest::Approx(2.0));
}

TEST_CASE("quantiles are monotone in the level") {
    std::vector<double> v;
    for (int i = 0; i < 101; ++i) v.push_back(std::sin(i * 1.7));
    double prev = -2.0;
    for (double q = 0.0; q <= 1.0; q += 0.05) {
        const double x = quantile(v, q);
        CHECK(x >= prev);
        prev = x;
    }
}

TEST_CASE("records: empty list gives a header-only CSV") {
    const std::string csv = records_to_csv({});
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
    CHECK(csv.rfind("trial,seed,point,param,model,failed,distance_sq", 0) == 0);
    CHECK(records_from_csv(csv).empty());
}

TEST_CASE("records: write then read is field-identical") {
    ExperimentConfig c = small_covariance();
    c.trials = 100;
    const StudyResult res = run_bound_validity(c);
    REQUIRE(res.records.size() == 100);
    const std::string path = "harness_roundtrip.csv";
    write_records(res.records, path);
    const auto back = read_records(path);
    REQUIRE(back.size() == res.records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        // NaN fields compare unequal, so compare through the CSV text form.
        CHECK(records_to_csv({back[i]}) == records_to_csv({res.records[i]}));
        CHECK(back[i].distance_sq == res.records[i].distance_sq);
        CHECK(back[i].thm2_bound == res.records[i].thm2_bound);
    }
}

TEST_CASE("records: reader reports malformed input") {
    CHECK_THROWS(records_from_csv(""));
    CHECK_THROWS(records_from_csv("a,b\n1,2\n"));
    std::string csv = records_to_csv({TrialRecord{}});
    csv.pop_back();
    csv += ",extra\n";
    CHECK_THROWS(records_from_csv(csv));
    CHECK_THROWS(read_records("no/such/dir/file.csv"));
    CHECK_THROWS(write_records({}, "no/such/dir/file.csv"));
}

TEST_CASE("summary: JSON round trip") {
    ExperimentConfig c = small_covariance(StudyKind::decay_scaling);
    c.n_grid = {200, 800};
    c.trials = 10;
    const StudyResult res = run_decay_scaling(c);
    const std::string path = "harness_summary.json";
    write_summary(res.summary, path);
    const StudySummary back = read_summary(path);
    CHECK(back.study == "decay_scaling");
    CHECK(back.violations == res.summary.violations);
    CHECK(back.series == res.summary.series);
    CHECK(back.checks == res.summary.checks);
    CHECK(back.metrics == res.summary.metrics);
    CHECK(back.config == res.summary.config);
}

TEST_CASE("config: parse, validate and echo") {
    const json j = json::parse(R"({
        "study": "tail", "model": "covariance",
        "profile": {"kind": "polynomial", "alpha": 1.5, "p": 30},
        "law": {"kind": "student_t", "nu": 7}, "q": 5,
        "set": "1..2", "n_grid": [100, 400], "t_grid": [1, 2, 4],
        "trials": 5, "seed": 9, "workers": 2,
        "tolerances": {"slope": 0.2}
    })");
    const ExperimentConfig c = parse_config(j);
    CHECK(c.study == StudyKind::tail);
    CHECK(c.source.profile.kind == DecayProfile::Kind::polynomial);
    CHECK(c.source.law.nu == 7.0);
    CHECK(c.index_set(30) == IndexSet{1, 2});
    CHECK(c.seed_base == 9);
    CHECK(c.source.seed_base == 9);
    CHECK(c.tolerance_slope == 0.2);
    CHECK(c.tolerance_identity == 1e-10);
    const ExperimentConfig again = parse_config(config_to_json(c));
    CHECK(config_to_json(again) == config_to_json(c));

    CHECK_THROWS(parse_config(json::parse(R"({"study": "tail", "trials": 0})")));
    CHECK_THROWS(parse_config(json::parse(R"({"study": "tail", "t_grid": [0.5]})")));
    CHECK_THROWS(parse_config(json::parse(R"({"study": "nope"})")));
    CHECK_THROWS(parse_config(json::parse(R"({"study": "tail", "typo_key": 1})")));
    CHECK_THROWS(parse_config(json::parse(R"({"study": "tail", "model": "fixed"})")));
    CHECK_THROWS(read_config("no/such/config.json"));
}

TEST_CASE("bound validity: zero perturbation gives zero distances and no violations") {
    ExperimentConfig c = small_covariance();
    c.force_zero_perturbation = true;
    const StudyResult res = run_bound_validity(c);
    CHECK(violations(res) == 0);
    for (const auto& r : res.records) {
        CHECK(r.distance_sq == 0.0);
        CHECK(r.thm2_bound >= 0.0);
        CHECK(r.thm4_bound >= 0.0);
    }
}

TEST_CASE("bound validity: exponential decay, 500 trials, no violations") {
    ExperimentConfig c = small_covariance();
    c.source.profile = DecayProfile::exponential(1.0, 20);
    c.n = 5000;
    c.trials = 500;
    const StudyResult res = run_bound_validity(c);
    CHECK(res.summary.trials == 500);
    CHECK(res.summary.failed == 0);
    CHECK(violations(res) == 0);
    for (const auto& r : res.records) {
        CHECK(r.distance_sq >= 0.0);
        CHECK(r.distance_sq <= 6.0);
        CHECK(r.thm2_applicable == (r.thm2_condition <= 0.125));
        CHECK(r.thm4_applicable == (r.thm4_condition <= 1.0 / 64.0));
    }
}

TEST_CASE("bound validity: fixed pair with eps = 0.1 records an inapplicable scalar bound") {
    ExperimentConfig c;
    c.study = StudyKind::bound_validity;
    c.model = ModelKind::fixed;
    c.fixed_sigma = SymMatrix::diagonal(Eigen::Vector2d(2, 1));
    Eigen::Matrix2d hat;
    hat << 2.0, 0.1, 0.1, 1.0;
    c.fixed_sigma_hat = SymMatrix(hat);
    c.trials = 1;
    const StudyResult res = run_bound_validity(c);
    REQUIRE(res.records.size() == 1);
    CHECK(res.records[0].thm2_applicable == 0);
    CHECK(res.records[0].thm2_condition == doctest::Approx(0.2121).epsilon(1e-3));
    CHECK(violations(res) == 0);
}

TEST_CASE("worker count does not change the records") {
    ExperimentConfig c = small_covariance();
    c.n_grid = {300, 600};
    c.trials = 25;
    const std::string one = records_to_csv(run_bound_validity(c).records);
    c.workers = 3;
    const std::string three = records_to_csv(run_bound_validity(c).records);
    CHECK(one == three);
}

TEST_CASE("every record carries the seed needed to regenerate its pair") {
    ExperimentConfig c = small_covariance();
    c.trials = 5;
    const StudyResult res = run_bound_validity(c);
    for (const auto& r : res.records) {
        KLSourceSpec spec = c.source;
        spec.seed_base = r.seed;
        const PerturbedPair pair = sample_empirical_covariance(spec, static_cast<int>(r.param), r.trial);
        CHECK(hs_distance_sq(pair.model, pair.model_hat, c.index_set(pair.dim())) == r.distance_sq);
    }
}

TEST_CASE("sharpness: zero perturbation gives zero numerators") {
    ExperimentConfig c = small_covariance(StudyKind::sharpness);
    c.k_grid = {2, 3};
    c.force_zero_perturbation = true;
    const StudyResult res = run_sharpness(c);
    CHECK(res.records.size() == 40);
    for (const auto& r : res.records) {
        CHECK(r.dk_hs == 0.0);
        CHECK(r.thm2_bound == 0.0);
        CHECK(r.first_order_hs_sq == 0.0);
    }
}

TEST_CASE("sharpness: first-order term never exceeds the scalar bound") {
    ExperimentConfig c = small_covariance(StudyKind::sharpness);
    c.k_grid = {2, 4, 6};
    c.trials = 30;
    const StudyResult res = run_sharpness(c);
    CHECK(res.summary.violations.at("first_order_vs_theorem2") == 0);
    for (const auto& r : res.records) CHECK(r.first_order_hs_sq <= r.thm2_bound);
}

TEST_CASE("tail: survival curves are non-increasing and heavier for the Student law") {
    ExperimentConfig c = small_covariance(StudyKind::tail);
    c.n_grid = {500};
    c.trials = 400;
    c.t_grid = {1, 4, 9, 16, 25};
    const StudyResult g = run_tail(c);
    c.source.law.kind = CoefficientLaw::Kind::student_t;
    const StudyResult t = run_tail(c);
    for (const auto* res : {&g, &t}) {
        const auto& s = res->summary.series.front();
        for (std::size_t i = 1; i < s.y.size(); ++i) CHECK(s.y[i] <= s.y[i - 1]);
    }
    CHECK(quantile([&] {
              std::vector<double> v;
              for (const auto& r : t.records) v.push_back(r.stat);
              return v;
          }(), 0.999) > quantile([&] {
              std::vector<double> v;
              for (const auto& r : g.records) v.push_back(r.stat);
              return v;
          }(), 0.999));
}

TEST_CASE("decay scaling: zero perturbation gives zero medians, budget warning fires") {
    ExperimentConfig c = small_covariance(StudyKind::decay_scaling);
    c.n_grid = {100, 400};
    c.trials = 5;
    c.force_zero_perturbation = true;
    c.budget = 0.01;
    const StudyResult res = run_decay_scaling(c);
    for (double v : res.summary.series.front().y) CHECK(v == 0.0);
    CHECK(res.summary.warnings.size() == 2);
}

TEST_CASE("goe: epsilon = 0 gives zero distances") {
    ExperimentConfig c;
    c.study = StudyKind::goe;
    c.model = ModelKind::low_rank_goe;
    c.p = 20;
    c.epsilon_grid = {0.0, 1e-3};
    c.trials = 5;
    const StudyResult res = run_goe(c);
    for (const auto& r : res.records)
        if (r.param == 0.0) CHECK(r.distance_sq == 0.0);
    CHECK(violations(res) == 0);
}

TEST_CASE("spiked: zero perturbation surrogate gives zero and non-spiked profiles are rejected") {
    ExperimentConfig c;
    c.study = StudyKind::spiked;
    c.model = ModelKind::spiked;
    c.source.profile = DecayProfile::spiked({4, 2, 1}, {2, 3, 20});
    c.n_grid = {100, 200};
    c.trials = 3;
    c.force_zero_perturbation = true;
    const StudyResult res = run_spiked(c);
    for (const auto& r : res.records) CHECK(r.distance_sq == 0.0);
    c.source.profile = DecayProfile::exponential(1.0);
    CHECK_THROWS_AS(run_spiked(c), std::invalid_argument);
}

TEST_CASE("prop suite: no localisation failures") {
    ExperimentConfig c = small_covariance(StudyKind::prop_suite);
    c.trials = 30;
    const StudyResult res = run_prop_suite(c);
    CHECK(res.summary.violations.at("localisation") == 0);
    CHECK(violations(res) == 0);
}

TEST_CASE("random instances are reproducible") {
    const Instance a = random_instance(7, 12);
    const Instance b = random_instance(7, 12);
    CHECK(a.pair.sigma_hat.matrix() == b.pair.sigma_hat.matrix());
    CHECK(a.I == b.I);
    CHECK(a.kind == b.kind);
    for (std::uint64_t i = 0; i < 200; ++i) {
        const Instance inst = random_instance(7, i);
        CHECK(inst.pair.dim() >= 4);
        CHECK(inst.pair.dim() <= 12);
        CHECK_FALSE(inst.I.empty());
        CHECK(inst.I.size() < inst.pair.dim());
    }
}
