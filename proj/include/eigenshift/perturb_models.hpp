#pragma once

#include "eigenshift/perturbed_pair.hpp"
#include "eigenshift/rng.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eigenshift {

/// Eigenvalue profile of the population operator, truncated at dimension p.
struct DecayProfile {
    enum class Kind { exponential, polynomial, spiked, explicit_values };

    Kind kind = Kind::exponential;
    /// Exponential rate (lambda_j = exp(-alpha j)) or polynomial exponent
    /// (lambda_j = j^(-alpha-1)).
    double alpha = 1.0;
    /// Pivot index of the approximate polynomial decay; informational.
    int d = 1;
    /// Truncation dimension; 0 selects default_truncation().
    int p = 0;
    std::vector<double> explicit_values;
    std::array<double, 3> mu{3.0, 2.0, 1.0};
    std::array<int, 3> m{1, 1, 1};

    static DecayProfile exponential(double alpha, int p = 0);
    static DecayProfile polynomial(double alpha, int p = 0);
    static DecayProfile spiked(std::array<double, 3> mu, std::array<int, 3> m);
    static DecayProfile explicit_spectrum(std::vector<double> values);
};

std::string to_string(DecayProfile::Kind kind);
DecayProfile::Kind parse_profile_kind(const std::string& s);

/// Upper bound on the polynomial truncation dimension.
inline constexpr int kMaxPolynomialTruncation = 400;

/// Smallest p whose discarded tail mass is below 1e-6 of the trace
/// (capped at kMaxPolynomialTruncation for polynomial decay); the explicit
/// length for explicit and spiked profiles.
int default_truncation(const DecayProfile& profile);

Eigen::VectorXd spectrum(const DecayProfile& profile);

struct CoefficientLaw {
    enum class Kind { gaussian, student_t, rademacher };
    Kind kind = Kind::gaussian;
    /// Degrees of freedom of the Student law; 0 means q + 1.
    double nu = 0.0;

    /// One zero-mean, unit-variance draw.
    double draw(StreamRng& rng) const;
    bool sub_gaussian() const { return kind != Kind::student_t; }
};

std::string to_string(CoefficientLaw::Kind kind);
CoefficientLaw::Kind parse_law_kind(const std::string& s);

/// Distribution of the Karhunen-Loeve coefficients of the sampled vectors.
struct KLSourceSpec {
    DecayProfile profile;
    CoefficientLaw law;
    /// Moment order; must exceed 4.
    double q = 5.0;
    std::uint64_t seed_base = 0;
    /// Express samples in a random orthonormal basis instead of the
    /// eigenbasis.
    bool rotate = false;

    /// Resolved law: nu filled in with q + 1 when unset, validated.
    CoefficientLaw resolved_law() const;
    /// E|eta|^q of the (scaled) coefficient law.
    double moment_bound() const;
};

/// Sigma = diag(lambda), Sigma_hat = (1/n) sum_l X_l X_l^T with
/// X_l = sum_j sqrt(lambda_j) eta_lj e_j.
PerturbedPair sample_empirical_covariance(const KLSourceSpec& spec, int n, std::uint64_t trial);

/// Gaussian orthogonal ensemble: off-diagonal variance 1, diagonal variance 2.
SymMatrix sample_goe(int p, std::uint64_t trial, std::uint64_t seed_base);

/// Sigma = diag(eigs_k, 0, ..., 0), Sigma_hat = Sigma + epsilon * GOE.
PerturbedPair low_rank_plus_goe(const std::vector<double>& eigs_k, int p, double epsilon, std::uint64_t trial,
                                std::uint64_t seed_base);

/// Empirical covariance under a spiked (step) spectrum; the coefficient law
/// must be sub-Gaussian.
PerturbedPair spiked_covariance_sample(const KLSourceSpec& spec, int n, std::uint64_t trial);

/// Haar-distributed orthogonal matrix from the given stream.
Eigen::MatrixXd random_orthogonal(int p, StreamRng& rng);

}  // namespace eigenshift
