#pragma once

#include "eigenshift/spectral_core.hpp"

#include <cstdint>
#include <string>

namespace eigenshift {

struct Provenance {
    std::string generator = "manual";
    std::string parameters;
    std::uint64_t seed_base = 0;
    std::uint64_t trial = 0;
};

/// An operator, its perturbed version and both spectral decompositions.
/// `coeffs` holds <u_i, E u_j> in the eigenbasis of sigma.
struct PerturbedPair {
    SymMatrix sigma;
    SymMatrix sigma_hat;
    SymMatrix E;
    SpectralModel model;
    SpectralModel model_hat;
    Eigen::MatrixXd coeffs;
    Provenance provenance;

    int dim() const { return sigma.dim(); }
    const Eigen::VectorXd& eigs() const { return model.eigenvalues; }
    const Eigen::VectorXd& eigs_hat() const { return model_hat.eigenvalues; }

    static PerturbedPair make(const SymMatrix& sigma, const SymMatrix& sigma_hat, Provenance provenance = {});
};

}  // namespace eigenshift
