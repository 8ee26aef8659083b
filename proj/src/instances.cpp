#include "eigenshift/harness.hpp"

#include <algorithm>
#include <cmath>

namespace eigenshift::harness {

namespace {

int uniform_int(StreamRng& rng, int lo, int hi) {
    return lo + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
}

double log_uniform(StreamRng& rng, double lo, double hi) {
    return std::exp(std::log(lo) + rng.uniform() * (std::log(hi) - std::log(lo)));
}

Eigen::VectorXd random_spectrum(StreamRng& rng, int p, std::string& kind) {
    Eigen::VectorXd l(p);
    switch (uniform_int(rng, 0, 4)) {
    case 0:
        kind = "loguniform";
        for (int i = 0; i < p; ++i) l(i) = log_uniform(rng, 1e-3, 10.0);
        break;
    case 1: {
        kind = "exponential";
        const double a = 0.3 + 1.7 * rng.uniform();
        for (int i = 0; i < p; ++i) l(i) = std::exp(-a * (i + 1));
        break;
    }
    case 2: {
        kind = "polynomial";
        const double a = 0.5 + 1.5 * rng.uniform();
        for (int i = 0; i < p; ++i) l(i) = std::pow(i + 1.0, -a - 1.0);
        break;
    }
    case 3: {
        kind = "tied";
        const int levels = uniform_int(rng, 2, std::min(4, p));
        std::vector<double> values(levels);
        for (auto& v : values) v = log_uniform(rng, 1e-2, 10.0);
        // Every level gets at least one index, the rest are spread at random.
        std::vector<int> owner(p);
        for (int i = 0; i < p; ++i) owner[i] = i < levels ? i : uniform_int(rng, 0, levels - 1);
        for (int i = 0; i < p; ++i) l(i) = values[owner[i]];
        break;
    }
    default: {
        kind = "clustered";
        double base = log_uniform(rng, 1.0, 10.0);
        for (int i = 0; i < p; ++i) {
            if (i > 0 && rng.uniform() < 0.5) base *= 1.0 - 0.02 * rng.uniform();
            else if (i > 0) base *= 0.2 + 0.5 * rng.uniform();
            l(i) = base;
        }
        break;
    }
    }
    std::sort(l.data(), l.data() + p, std::greater<>());
    return l;
}

IndexSet random_index_set(StreamRng& rng, const Eigen::VectorXd& l, std::string& kind) {
    const int p = static_cast<int>(l.size());
    const double u = rng.uniform();
    if (u < 0.4) {
        kind += "/topk";
        return IndexSet::range(1, uniform_int(rng, 1, p - 1));
    }
    if (u < 0.7) {
        kind += "/subset";
        std::vector<int> v;
        for (int i = 1; i <= p; ++i)
            if (rng.uniform() < 0.4) v.push_back(i);
        if (v.empty()) v.push_back(uniform_int(rng, 1, p));
        if (static_cast<int>(v.size()) == p) v.pop_back();
        return IndexSet(std::move(v));
    }
    if (u < 0.85) {
        kind += "/singleton";
        return IndexSet{uniform_int(rng, 1, p)};
    }
    kind += "/level";
    const int k = uniform_int(rng, 1, p);
    std::vector<int> v;
    for (int i = 1; i <= p; ++i)
        if (same_level(l(i - 1), l(k - 1))) v.push_back(i);
    if (static_cast<int>(v.size()) == p) v = {1};
    return IndexSet(std::move(v));
}

Eigen::MatrixXd goe_matrix(StreamRng& rng, int p) {
    Eigen::MatrixXd g(p, p);
    for (int i = 0; i < p; ++i) {
        g(i, i) = std::sqrt(2.0) * rng.normal();
        for (int j = i + 1; j < p; ++j) g(i, j) = g(j, i) = rng.normal();
    }
    return g;
}

}  // namespace

Instance random_instance(std::uint64_t seed_base, std::uint64_t index) {
    StreamRng rng(seed_base, index, streams::instance);
    const int p = uniform_int(rng, 4, 12);
    Instance out;
    const Eigen::VectorXd l = random_spectrum(rng, p, out.kind);
    const Eigen::VectorXd root = l.cwiseSqrt();
    const double s = std::pow(10.0, -4.5 + 4.0 * rng.uniform());

    // Perturbation built in the eigenbasis.
    Eigen::MatrixXd e;
    switch (uniform_int(rng, 0, 4)) {
    case 0:
        out.kind += "/relative";
        e = s * root.asDiagonal() * goe_matrix(rng, p) * root.asDiagonal();
        break;
    case 1: {
        out.kind += "/prototype";
        const double sign = rng.rademacher();
        e = sign * s * root * root.transpose();
        break;
    }
    case 2: {
        out.kind += "/sampled";
        const int n = static_cast<int>(std::pow(10.0, 2.0 + 2.5 * rng.uniform()));
        Eigen::MatrixXd x(n, p);
        for (int a = 0; a < n; ++a)
            for (int j = 0; j < p; ++j) x(a, j) = root(j) * rng.normal();
        e = x.transpose() * x / n - Eigen::MatrixXd(l.asDiagonal());
        break;
    }
    case 3:
        out.kind += "/additive_goe";
        e = s * l(0) * goe_matrix(rng, p) / std::sqrt(double(p));
        break;
    default: {
        out.kind += "/low_rank";
        Eigen::VectorXd w(p);
        for (int j = 0; j < p; ++j) w(j) = rng.normal();
        w.normalize();
        e = s * l(0) * rng.rademacher() * w * w.transpose();
        break;
    }
    }

    Eigen::MatrixXd sigma = l.asDiagonal();
    if (rng.uniform() < 0.5) {
        out.kind += "/rotated";
        const Eigen::MatrixXd q = random_orthogonal(p, rng);
        sigma = q * sigma * q.transpose();
        e = q * e * q.transpose();
    }
    const SymMatrix sig(sigma);
    out.I = random_index_set(rng, l, out.kind);
    out.pair = PerturbedPair::make(sig, sig + SymMatrix(e), {"instance", out.kind, seed_base, index});
    return out;
}

}  // namespace eigenshift::harness
