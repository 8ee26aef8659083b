#pragma once

#include "eigenshift/perturbed_pair.hpp"
#include "eigenshift/spectral_core.hpp"

#include <string>

namespace eigenshift {

/// A bound on ||P_hat_I - P_I||_2^2 together with the condition that gates
/// it. `applicable` is exactly `condition_value <= condition_threshold`.
struct BoundCertificate {
    double bound_value = 0.0;
    double condition_value = 0.0;
    double condition_threshold = 0.0;
    bool applicable = false;
    std::string label;
};

/// Linear term of the expansion of P_hat_I - P_I and the operator-norm bound
/// on what is left over.
struct FirstOrderResult {
    SymMatrix linear_term;
    double linear_hs_sq = 0.0;
    double remainder_op_bound = 0.0;
    double delta = 0.0;
};

enum class NormMode { hs, op };

/// Weighted separation of {lambda_i : i in I} from the rest of the spectrum.
/// +infinity when some cross gap vanishes; 0 when I^c is empty.
double relative_rank(const Eigen::VectorXd& eigs, const IndexSet& I);
/// Relative rank of the eigenvalue level {i : lambda_i == lambda_k}.
double relative_rank_eigenlevel(const Eigen::VectorXd& eigs, int k);
/// Relative rank of {1..k}; k == p uses lambda_{p+1} = 0.
double relative_rank_topk(const Eigen::VectorXd& eigs, int k);

/// min_{i in I, j notin I} |lambda_i - lambda_j|, +infinity for empty I^c.
double spectral_gap(const Eigen::VectorXd& eigs, const IndexSet& I);

/// Bound on ||P_hat_I - P_I||_2 (not squared).
double davis_kahan_bound(const SymMatrix& e, const Eigen::VectorXd& eigs, const IndexSet& I, NormMode mode);

FirstOrderResult first_order(const PerturbedPair& pair, const IndexSet& I);

/// Least x with |<u_i, E u_j>| <= x sqrt(lambda_i lambda_j) for all i, j.
double coefficient_envelope(const PerturbedPair& pair);

/// sum_{i in I} sum_{j notin I} lambda_i lambda_j / (lambda_i - lambda_j)^2.
double cross_weight_sum(const Eigen::VectorXd& eigs, const IndexSet& I);

BoundCertificate theorem2_bound(const Eigen::VectorXd& eigs, double x, const IndexSet& I);
BoundCertificate refined_bound(const PerturbedPair& pair, double x, const IndexSet& I);

/// Smallest I' containing I with |lambda_i - lambda_j| >= lambda_i / 2 for
/// all i in I and j outside I'.
IndexSet build_iprime(const Eigen::VectorXd& eigs, const IndexSet& I);

/// Least x for the equal-eigenvalue block bound over I, I' \ I and I'^c.
/// Throws std::invalid_argument naming (i, j) if I' violates the gap rule.
double block_envelope(const PerturbedPair& pair, const IndexSet& I, const IndexSet& Iprime);
/// Theorem-3 form with constant 64, for a given x.
BoundCertificate theorem3_certificate(const Eigen::VectorXd& eigs, double x, const IndexSet& I);
/// Measures x with block_envelope and evaluates the constant-64 bound.
BoundCertificate theorem3_bound(const PerturbedPair& pair, const IndexSet& I, const IndexSet& Iprime);

/// Partition of I into equal-eigenvalue classes (tie tolerance applied).
std::vector<IndexSet> eigenvalue_levels(const Eigen::VectorXd& eigs, const IndexSet& I);

}  // namespace eigenshift
