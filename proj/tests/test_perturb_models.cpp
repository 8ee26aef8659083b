#include "eigenshift/perturb_models.hpp"

#include <doctest.h>

#include <cmath>

using namespace eigenshift;

TEST_CASE("rng: keyed streams are reproducible and distinct") {
    StreamRng a(42, 3, streams::samples), b(42, 3, streams::samples), c(42, 4, streams::samples);
    for (int i = 0; i < 10; ++i) {
        const double x = a.normal();
        CHECK(x == b.normal());
        CHECK(x != c.normal());
    }
    CHECK(StreamRng::derive_key(42, 3, 1) == StreamRng::splitmix64(StreamRng::splitmix64(StreamRng::splitmix64(42) ^ 3) ^ 1));
    // splitmix64 reference value for input 0.
    CHECK(StreamRng::splitmix64(0) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("spectrum examples") {
    const Eigen::VectorXd e = spectrum(DecayProfile::exponential(std::log(2.0), 3));
    CHECK(e(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(e(1) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(e(2) == doctest::Approx(0.125).epsilon(1e-15));

    const Eigen::VectorXd s = spectrum(DecayProfile::spiked({3, 2, 1}, {1, 2, 1}));
    CHECK(s == Eigen::Vector4d(3, 2, 2, 1));

    const Eigen::VectorXd poly = spectrum(DecayProfile::polynomial(1.0, 3));
    CHECK(poly(0) == 1.0);
    CHECK(poly(1) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(poly(2) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));

    CHECK_THROWS_AS(spectrum(DecayProfile::exponential(0.0, 3)), std::invalid_argument);
    CHECK_THROWS_AS(spectrum(DecayProfile::spiked({1, 2, 3}, {1, 1, 1})), std::invalid_argument);
    CHECK_THROWS_AS(spectrum(DecayProfile::explicit_spectrum({1.0, -1.0})), std::invalid_argument);
}

TEST_CASE("default truncation keeps the discarded tail below 1e-6 of the trace") {
    const DecayProfile ex = DecayProfile::exponential(1.0);
    const int p = default_truncation(ex);
    CHECK(p == 14);
    const double a = 1.0;
    const double trace = std::exp(-a) / (1.0 - std::exp(-a));
    const double tail = std::exp(-a * (p + 1)) / (1.0 - std::exp(-a));
    CHECK(tail < 1e-6 * trace);
    const double tail_before = std::exp(-a * p) / (1.0 - std::exp(-a));
    CHECK(tail_before >= 1e-6 * trace);
    CHECK(default_truncation(DecayProfile::polynomial(1.0)) <= kMaxPolynomialTruncation);
}

TEST_CASE("spectrum invariants: positive and non-increasing") {
    for (const DecayProfile& prof : {DecayProfile::exponential(0.7), DecayProfile::polynomial(1.5),
                                     DecayProfile::spiked({4, 2, 1}, {2, 3, 20})}) {
        const Eigen::VectorXd l = spectrum(prof);
        for (int j = 0; j < l.size(); ++j) {
            CHECK(l(j) > 0.0);
            if (j > 0) CHECK(l(j) <= l(j - 1));
        }
    }
}

TEST_CASE("coefficient laws have unit variance") {
    KLSourceSpec spec;
    for (auto kind : {CoefficientLaw::Kind::gaussian, CoefficientLaw::Kind::student_t, CoefficientLaw::Kind::rademacher}) {
        spec.law.kind = kind;
        const CoefficientLaw law = spec.resolved_law();
        StreamRng rng(1, static_cast<std::uint64_t>(kind), streams::samples);
        double sum = 0.0, sq = 0.0;
        const int n = 1'000'000;
        for (int i = 0; i < n; ++i) {
            const double v = law.draw(rng);
            sum += v;
            sq += v * v;
        }
        const double mean = sum / n;
        CHECK(std::abs(mean) < 0.01);
        CHECK(sq / n - mean * mean == doctest::Approx(1.0).epsilon(0.01));
    }
}

TEST_CASE("student law needs nu > q") {
    KLSourceSpec spec;
    spec.law.kind = CoefficientLaw::Kind::student_t;
    CHECK(spec.resolved_law().nu == 6.0);
    spec.law.nu = 5.0;
    CHECK_THROWS_AS(spec.resolved_law(), std::invalid_argument);
    spec.law.nu = 0.0;
    spec.q = 4.0;
    CHECK_THROWS_AS(spec.resolved_law(), std::invalid_argument);
}

TEST_CASE("moment_bound matches the Gaussian fourth moment pattern") {
    KLSourceSpec spec;
    spec.q = 6.0;
    CHECK(spec.moment_bound() == doctest::Approx(15.0));
}

TEST_CASE("sample_empirical_covariance: large n stays close to Sigma") {
    KLSourceSpec spec;
    spec.profile = DecayProfile::explicit_spectrum({2.0, 1.0});
    int close = 0;
    const int trials = 30;
    for (int t = 0; t < trials; ++t) {
        const PerturbedPair pair = sample_empirical_covariance(spec, 1'000'000, t);
        close += pair.E.max_abs() <= 0.02;
    }
    CHECK(close >= 0.99 * trials);
}

TEST_CASE("sample_empirical_covariance is unbiased") {
    KLSourceSpec spec;
    spec.seed_base = 5;
    spec.profile = DecayProfile::explicit_spectrum({2.0, 1.0, 0.5});
    const int trials = 10'000;
    Eigen::Matrix3d sum = Eigen::Matrix3d::Zero(), sq = Eigen::Matrix3d::Zero();
    for (int t = 0; t < trials; ++t) {
        const Eigen::MatrixXd s = sample_empirical_covariance(spec, 10, t).sigma_hat.matrix();
        sum += s;
        sq += s.cwiseProduct(s);
    }
    const Eigen::Matrix3d mean = sum / trials;
    const Eigen::Matrix3d se = ((sq / trials - mean.cwiseProduct(mean)) / trials).cwiseSqrt();
    const Eigen::Matrix3d target = Eigen::Vector3d(2.0, 1.0, 0.5).asDiagonal();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(mean(i, j) - target(i, j)) <= 5.0 * se(i, j));
}

TEST_CASE("generators are bit-reproducible") {
    KLSourceSpec spec;
    spec.seed_base = 77;
    spec.rotate = true;
    const PerturbedPair a = sample_empirical_covariance(spec, 50, 3);
    const PerturbedPair b = sample_empirical_covariance(spec, 50, 3);
    CHECK(a.sigma_hat.matrix() == b.sigma_hat.matrix());
    CHECK(a.sigma.matrix() == b.sigma.matrix());
    CHECK(sample_goe(10, 4, 9).matrix() == sample_goe(10, 4, 9).matrix());
    CHECK(sample_goe(10, 4, 9).matrix() != sample_goe(10, 5, 9).matrix());
    CHECK(low_rank_plus_goe({3, 1}, 8, 0.1, 2, 1).sigma_hat.matrix() ==
          low_rank_plus_goe({3, 1}, 8, 0.1, 2, 1).sigma_hat.matrix());
}

TEST_CASE("empirical covariance is positive semidefinite") {
    KLSourceSpec spec;
    spec.law.kind = CoefficientLaw::Kind::student_t;
    for (int t = 0; t < 50; ++t) {
        const PerturbedPair pair = sample_empirical_covariance(spec, 5 + t, t);
        CHECK(pair.eigs_hat().minCoeff() >= -1e-10);
        CHECK((pair.E.matrix() - (pair.sigma_hat.matrix() - pair.sigma.matrix())).norm() == 0.0);
    }
}

TEST_CASE("rotation leaves the spectrum unchanged") {
    KLSourceSpec spec;
    spec.rotate = true;
    const PerturbedPair pair = sample_empirical_covariance(spec, 100, 1);
    const Eigen::VectorXd l = spectrum(spec.profile);
    CHECK((pair.eigs() - l).cwiseAbs().maxCoeff() < 1e-12);
    StreamRng rng(1, 1, streams::rotation);
    const Eigen::MatrixXd q = random_orthogonal(6, rng);
    CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-13);
}

TEST_CASE("sample_goe moments and edge") {
    double sum = 0.0, sq = 0.0;
    const int n = 100'000;
    for (int t = 0; t < n; ++t) {
        const double d = sample_goe(1, t, 3)(0, 0);
        sum += d;
        sq += d * d;
    }
    const double var = sq / n - (sum / n) * (sum / n);
    CHECK(std::abs(var - 2.0) <= 3.0 * 2.0 * std::sqrt(2.0 / n));

    const SymMatrix g = sample_goe(200, 0, 3);
    CHECK(g.matrix() == g.matrix().transpose());
    CHECK(g.op_norm() / std::sqrt(200.0) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("low_rank_plus_goe examples") {
    const PerturbedPair zero = low_rank_plus_goe({10.0}, 20, 0.0, 0, 1);
    CHECK(hs_distance_sq(zero.model, zero.model_hat, IndexSet{1}) == 0.0);
    for (int t = 0; t < 20; ++t) {
        const PerturbedPair pair = low_rank_plus_goe({10.0}, 50, 0.01, t, 1);
        const double d = hs_distance_sq(pair.model, pair.model_hat, IndexSet{1});
        CHECK(std::isfinite(d));
        CHECK(d < 1e-3);
    }
    CHECK_THROWS_AS(low_rank_plus_goe({1, 2}, 5, 0.1, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(low_rank_plus_goe({1, 1, 1}, 2, 0.1, 0, 0), std::invalid_argument);
}

TEST_CASE("spiked_covariance_sample examples") {
    KLSourceSpec spec;
    spec.profile = DecayProfile::spiked({3, 2, 1}, {1, 2, 1});
    int close = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        const PerturbedPair pair = spiked_covariance_sample(spec, 100'000, t);
        close += (pair.eigs_hat() - Eigen::Vector4d(3, 2, 2, 1)).cwiseAbs().maxCoeff() <= 0.1;
        CHECK(pair.provenance.generator == "spiked_covariance");
    }
    CHECK(close >= 0.99 * trials);

    const PerturbedPair one = spiked_covariance_sample(spec, 1, 0);
    int rank = 0;
    for (int i = 0; i < 4; ++i) rank += one.eigs_hat()(i) > 1e-10;
    CHECK(rank == 1);

    spec.law.kind = CoefficientLaw::Kind::student_t;
    CHECK_THROWS_AS(spiked_covariance_sample(spec, 10, 0), std::invalid_argument);
    KLSourceSpec exp_spec;
    CHECK_THROWS_AS(spiked_covariance_sample(exp_spec, 10, 0), std::invalid_argument);
}
