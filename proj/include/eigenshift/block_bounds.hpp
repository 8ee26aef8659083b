#pragma once

#include "eigenshift/bounds.hpp"
#include "eigenshift/perturbed_pair.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace eigenshift {

enum class Granularity { singletons, eigenlevel, custom };

/// Partition of I (inner blocks) and of I^c into intervals (outer blocks),
/// with the gaps the general bound needs. Blocks are numbered 1..m for the
/// inner ones and m+1.. for the outer ones.
struct BlockScheme {
    IndexSet I;
    std::vector<IndexSet> inner;
    std::vector<IndexSet> outer;
    /// g_r per block, inner first.
    Eigen::VectorXd g;
    /// g_cross(r, s) = min_{i in outer r, j in inner s} (lambda_i - lambda_j)^2.
    Eigen::MatrixXd g_cross;

    int inner_count() const { return static_cast<int>(inner.size()); }
    int block_count() const { return static_cast<int>(inner.size() + outer.size()); }
    /// 1-based block index.
    const IndexSet& block(int r) const;
};

/// Per-block envelope sequences (a_r) and (b_r).
struct EnvelopePair {
    Eigen::VectorXd a;
    Eigen::VectorXd b;
};

BlockScheme build_scheme(const Eigen::VectorXd& eigs, const IndexSet& I, Granularity granularity);
/// Validates a caller-supplied partition; throws std::invalid_argument
/// naming the violated invariant.
BlockScheme build_custom_scheme(const Eigen::VectorXd& eigs, const IndexSet& I, std::vector<IndexSet> inner,
                                std::vector<IndexSet> outer);

struct EnvelopeCheck {
    bool ok = true;
    /// Most violated block pair (1-based), 0 when ok.
    int worst_r = 0;
    int worst_s = 0;
    /// max over pairs of lhs / rhs for both inequalities.
    double worst_ratio = 0.0;
};

EnvelopeCheck envelope_check(const Eigen::MatrixXd& coeffs, const BlockScheme& scheme, const EnvelopePair& env);
EnvelopeCheck envelope_check(const SymMatrix& e, const SpectralModel& model, const BlockScheme& scheme,
                             const EnvelopePair& env);

/// a_r = b_r = x * sum_{i in I_r} lambda_i.
EnvelopePair relative_envelope(const Eigen::VectorXd& eigs, const BlockScheme& scheme, double x);

/// Smallest valid envelope of the form a_r = x_a w_r, b_r = x_b w_r with
/// w_r = sum_{i in I_r} lambda_i, x_b from Hilbert-Schmidt block norms and
/// x_a from operator block norms. Requires a positive spectrum.
EnvelopePair measured_envelope(const PerturbedPair& pair, const BlockScheme& scheme);

/// Two-block scheme (I, I^c) with a_r = ||E||_inf^2 / ||E||_2 and
/// b_r = ||E||_2; I^c must be an interval.
std::pair<BlockScheme, EnvelopePair> davis_kahan_envelope(const PerturbedPair& pair, const IndexSet& I);

struct Theorem4Certificate : BoundCertificate {
    double general_value = 0.0;
    /// Constant-16 value, present when a == b and sum b_r/g_r <= 1/8.
    std::optional<double> simplified_value;
    /// 16 sum_{r outer, s inner} b_r b_s / g_cross(r, s), whatever the gate.
    double constant16_value = 0.0;
    double sum_a_over_g = 0.0;
    double sum_b_over_g = 0.0;
};

Theorem4Certificate theorem4_bound(const BlockScheme& scheme, const EnvelopePair& env);

struct SeparationEntry {
    int i = 0;
    int j = 0;
    double lhs = 0.0;  ///< |lambda_hat_i - lambda_j|
    double rhs = 0.0;  ///< |lambda_i - lambda_j| / 2
    bool ok = true;
};

std::vector<SeparationEntry> separation_check(const PerturbedPair& pair, const IndexSet& I);

struct Prop42Result {
    double up_lhs = 0.0;
    double down_lhs = 0.0;
    bool up_implication_ok = true;
    bool down_implication_ok = true;
};

/// Eigenvalue localisation test for index i (1-based) at offset y > 0.
Prop42Result prop42_check(const PerturbedPair& pair, int i, double y);

struct ContractionResult {
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = true;
};

/// Compares ||sum_{i in I} P_{I_r} E P_hat_i / (lambda_hat_i - lambda_j)||_2
/// against its envelope bound, for block r (1-based) and j notin I.
ContractionResult contraction_check(const PerturbedPair& pair, const BlockScheme& scheme, const EnvelopePair& env,
                                    int r, int j);

struct ContractionSweep {
    int checked = 0;
    int violations = 0;
    /// max over (r, j) of lhs - rhs.
    double worst_excess = -std::numeric_limits<double>::infinity();
    bool ok() const { return violations == 0; }
};

/// contraction_check over every block r and every j notin I, sharing the
/// projected perturbation between checks.
ContractionSweep contraction_sweep(const PerturbedPair& pair, const BlockScheme& scheme, const EnvelopePair& env);

inline constexpr double kInequalitySlack = 1e-10;

}  // namespace eigenshift
