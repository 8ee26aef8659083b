#include "eigenshift/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace eigenshift {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(const Eigen::VectorXd& eigs, const char* who) {
    for (int i = 0; i < eigs.size(); ++i)
        if (!(eigs(i) > 0.0))
            throw std::invalid_argument(std::string(who) + ": eigenvalue " + std::to_string(i + 1) +
                                        " is not strictly positive");
}

double abs_gap(double a, double b) { return same_level(a, b) ? 0.0 : std::abs(a - b); }

// min_{j in others} |lambda - lambda_j|, +infinity for an empty set.
double min_gap(const Eigen::VectorXd& eigs, double lambda, const IndexSet& others) {
    double g = kInf;
    for (int j : others) g = std::min(g, abs_gap(lambda, eigs(j - 1)));
    return g;
}

BoundCertificate gated(std::string label, double x, double rank, double constant, double cross_sum,
                       double threshold = 0.125) {
    BoundCertificate c;
    c.label = std::move(label);
    c.condition_threshold = threshold;
    if (!std::isfinite(rank)) {
        c.condition_value = kInf;
        c.bound_value = kInf;
        c.applicable = false;
        return c;
    }
    c.condition_value = x * rank;
    c.bound_value = constant * (x * x * cross_sum);
    c.applicable = c.condition_value <= c.condition_threshold;
    return c;
}

}  // namespace

double relative_rank(const Eigen::VectorXd& eigs, const IndexSet& I) {
    require_positive(eigs, "relative_rank");
    const int p = static_cast<int>(eigs.size());
    I.check_range(p);
    const IndexSet Ic = I.complement(p);
    double r = 0.0;
    for (int i : I) {
        const double g = min_gap(eigs, eigs(i - 1), Ic);
        if (g == 0.0) return kInf;
        if (std::isfinite(g)) r += eigs(i - 1) / g;
    }
    for (int j : Ic) {
        const double g = min_gap(eigs, eigs(j - 1), I);
        if (g == 0.0) return kInf;
        if (std::isfinite(g)) r += eigs(j - 1) / g;
    }
    return r;
}

double relative_rank_eigenlevel(const Eigen::VectorXd& eigs, int k) {
    require_positive(eigs, "relative_rank_eigenlevel");
    const int p = static_cast<int>(eigs.size());
    if (k < 1 || k > p) throw std::out_of_range("relative_rank_eigenlevel: k out of range");
    const double lk = eigs(k - 1);
    int multiplicity = 0;
    double gap = kInf;
    double tail = 0.0;
    for (int j = 0; j < p; ++j) {
        if (same_level(eigs(j), lk)) {
            ++multiplicity;
        } else {
            const double d = std::abs(eigs(j) - lk);
            gap = std::min(gap, d);
            tail += eigs(j) / d;
        }
    }
    if (multiplicity == p)
        throw std::invalid_argument("relative_rank_eigenlevel: all eigenvalues are equal");
    return multiplicity * lk / gap + tail;
}

double relative_rank_topk(const Eigen::VectorXd& eigs, int k) {
    require_positive(eigs, "relative_rank_topk");
    const int p = static_cast<int>(eigs.size());
    if (k < 1 || k > p) throw std::out_of_range("relative_rank_topk: k out of range");
    const double next = k < p ? eigs(k) : 0.0;
    const double lk = eigs(k - 1);
    if (same_level(lk, next)) return kInf;
    double r = 0.0;
    for (int i = 0; i < k; ++i) r += eigs(i) / (eigs(i) - next);
    for (int j = k; j < p; ++j) r += eigs(j) / (lk - eigs(j));
    return r;
}

double spectral_gap(const Eigen::VectorXd& eigs, const IndexSet& I) {
    const int p = static_cast<int>(eigs.size());
    I.check_range(p);
    const IndexSet Ic = I.complement(p);
    double g = kInf;
    for (int i : I) g = std::min(g, min_gap(eigs, eigs(i - 1), Ic));
    return g;
}

double davis_kahan_bound(const SymMatrix& e, const Eigen::VectorXd& eigs, const IndexSet& I, NormMode mode) {
    const double g = spectral_gap(eigs, I);
    if (!std::isfinite(g)) return 0.0;
    const double norm = mode == NormMode::hs ? e.hs_norm() : std::sqrt(double(I.size())) * e.op_norm();
    if (g == 0.0) return norm == 0.0 ? 0.0 : kInf;
    return 2.0 * std::sqrt(2.0) * norm / g;
}

FirstOrderResult first_order(const PerturbedPair& pair, const IndexSet& I) {
    const auto& eigs = pair.eigs();
    const int p = pair.dim();
    const double g = spectral_gap(eigs, I);
    if (g == 0.0) throw std::invalid_argument("first_order: zero eigenvalue gap between I and its complement");

    const IndexSet Ic = I.complement(p);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
    for (int i : I)
        for (int j : Ic) {
            const double v = pair.coeffs(i - 1, j - 1) / (eigs(i - 1) - eigs(j - 1));
            m(i - 1, j - 1) = v;
            m(j - 1, i - 1) = v;
        }

    FirstOrderResult r;
    const auto& u = pair.model.eigenvectors;
    r.linear_term = SymMatrix(u * m * u.transpose());
    r.linear_hs_sq = m.squaredNorm();
    r.delta = std::isfinite(g) ? 2.0 * pair.E.op_norm() / g : 0.0;
    r.remainder_op_bound = r.delta < 1.0 ? I.size() * r.delta * r.delta / (1.0 - r.delta) : kInf;
    return r;
}

double coefficient_envelope(const PerturbedPair& pair) {
    const auto& eigs = pair.eigs();
    require_positive(eigs, "coefficient_envelope");
    double x = 0.0;
    for (int i = 0; i < pair.dim(); ++i)
        for (int j = 0; j < pair.dim(); ++j)
            x = std::max(x, std::abs(pair.coeffs(i, j)) / std::sqrt(eigs(i) * eigs(j)));
    return x;
}

double cross_weight_sum(const Eigen::VectorXd& eigs, const IndexSet& I) {
    const IndexSet Ic = I.complement(static_cast<int>(eigs.size()));
    double s = 0.0;
    for (int i : I)
        for (int j : Ic) {
            const double d = abs_gap(eigs(i - 1), eigs(j - 1));
            if (d == 0.0) return kInf;
            s += eigs(i - 1) * eigs(j - 1) / (d * d);
        }
    return s;
}

BoundCertificate theorem2_bound(const Eigen::VectorXd& eigs, double x, const IndexSet& I) {
    if (!(x >= 0.0)) throw std::invalid_argument("theorem2_bound: x must be non-negative");
    const double rank = relative_rank(eigs, I);
    return gated("theorem2", x, rank, 16.0, std::isfinite(rank) ? cross_weight_sum(eigs, I) : kInf);
}

BoundCertificate refined_bound(const PerturbedPair& pair, double x, const IndexSet& I) {
    if (!(x >= 0.0)) throw std::invalid_argument("refined_bound: x must be non-negative");
    const auto& eigs = pair.eigs();
    const double rank = relative_rank(eigs, I);
    BoundCertificate c = gated("refined", x, rank, 16.0, 0.0);
    if (!std::isfinite(rank)) return c;

    const IndexSet Ic = I.complement(pair.dim());
    double first = 0.0;
    for (int i : I)
        for (int j : Ic) {
            const double d = eigs(i - 1) - eigs(j - 1);
            const double cij = pair.coeffs(i - 1, j - 1);
            first += cij * cij / (d * d);
        }
    const double x2 = x * x;
    c.bound_value = 8.0 * first + 512.0 * x2 * x2 * rank * rank * cross_weight_sum(eigs, I);
    return c;
}

IndexSet build_iprime(const Eigen::VectorXd& eigs, const IndexSet& I) {
    require_positive(eigs, "build_iprime");
    const int p = static_cast<int>(eigs.size());
    I.check_range(p);
    std::vector<int> v(I.begin(), I.end());
    for (int j = 1; j <= p; ++j) {
        if (I.contains(j)) continue;
        for (int i : I)
            if (std::abs(eigs(i - 1) - eigs(j - 1)) < eigs(i - 1) / 2.0) {
                v.push_back(j);
                break;
            }
    }
    return IndexSet(std::move(v));
}

std::vector<IndexSet> eigenvalue_levels(const Eigen::VectorXd& eigs, const IndexSet& I) {
    std::vector<std::vector<int>> groups;
    std::vector<double> level;
    for (int i : I) {
        bool placed = false;
        for (std::size_t g = 0; g < groups.size(); ++g)
            if (same_level(level[g], eigs(i - 1))) {
                groups[g].push_back(i);
                placed = true;
                break;
            }
        if (!placed) {
            groups.push_back({i});
            level.push_back(eigs(i - 1));
        }
    }
    std::vector<IndexSet> out;
    for (auto& g : groups) out.emplace_back(std::move(g));
    return out;
}

double block_envelope(const PerturbedPair& pair, const IndexSet& I, const IndexSet& Iprime) {
    const auto& eigs = pair.eigs();
    require_positive(eigs, "block_envelope");
    const int p = pair.dim();
    Iprime.check_range(p);
    for (int i : I)
        if (!Iprime.contains(i))
            throw std::invalid_argument("block_envelope: I' does not contain index " + std::to_string(i));
    const IndexSet outside = Iprime.complement(p);
    for (int i : I)
        for (int j : outside)
            if (std::abs(eigs(i - 1) - eigs(j - 1)) < eigs(i - 1) / 2.0)
                throw std::invalid_argument("block_envelope: I' violates |lambda_i - lambda_j| >= lambda_i/2 at (i,j) = (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");

    std::vector<int> rest;
    for (int j : Iprime)
        if (!I.contains(j)) rest.push_back(j);
    std::vector<IndexSet> blocks = eigenvalue_levels(eigs, I);
    for (auto& b : eigenvalue_levels(eigs, IndexSet(rest))) blocks.push_back(std::move(b));
    if (!outside.empty()) blocks.push_back(outside);

    std::vector<double> weight;
    for (const auto& b : blocks) {
        double w = 0.0;
        for (int i : b) w += eigs(i - 1);
        weight.push_back(w);
    }
    double x = 0.0;
    for (std::size_t r = 0; r < blocks.size(); ++r)
        for (std::size_t s = 0; s < blocks.size(); ++s) {
            const double hs = block_norms(pair.coeffs, blocks[r], blocks[s]).hs;
            x = std::max(x, hs / std::sqrt(weight[r] * weight[s]));
        }
    return x;
}

BoundCertificate theorem3_certificate(const Eigen::VectorXd& eigs, double x, const IndexSet& I) {
    if (!(x >= 0.0)) throw std::invalid_argument("theorem3_certificate: x must be non-negative");
    const double rank = relative_rank(eigs, I);
    return gated("theorem3", x, rank, 64.0, std::isfinite(rank) ? cross_weight_sum(eigs, I) : kInf);
}

BoundCertificate theorem3_bound(const PerturbedPair& pair, const IndexSet& I, const IndexSet& Iprime) {
    return theorem3_certificate(pair.eigs(), block_envelope(pair, I, Iprime), I);
}

}  // namespace eigenshift
