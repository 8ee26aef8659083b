#include "eigenshift/block_bounds.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace eigenshift {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double abs_gap(double a, double b) { return same_level(a, b) ? 0.0 : std::abs(a - b); }

double min_gap(const Eigen::VectorXd& eigs, const IndexSet& from, const IndexSet& to) {
    double g = kInf;
    for (int i : from)
        for (int j : to) g = std::min(g, abs_gap(eigs(i - 1), eigs(j - 1)));
    return g;
}

void fill_gaps(const Eigen::VectorXd& eigs, BlockScheme& s) {
    const IndexSet Ic = s.I.complement(static_cast<int>(eigs.size()));
    s.g.resize(s.block_count());
    for (int r = 0; r < s.inner_count(); ++r) s.g(r) = min_gap(eigs, s.inner[r], Ic);
    for (std::size_t r = 0; r < s.outer.size(); ++r) s.g(s.inner_count() + r) = min_gap(eigs, s.outer[r], s.I);

    s.g_cross.resize(static_cast<int>(s.outer.size()), s.inner_count());
    for (std::size_t r = 0; r < s.outer.size(); ++r)
        for (int c = 0; c < s.inner_count(); ++c) {
            const double g = min_gap(eigs, s.outer[r], s.inner[c]);
            s.g_cross(r, c) = g * g;
        }
}

// Checks that `parts` are non-empty, disjoint and cover `whole`.
void check_partition(const std::vector<IndexSet>& parts, const IndexSet& whole, const std::string& what) {
    std::set<int> seen;
    for (const auto& b : parts) {
        if (b.empty()) throw std::invalid_argument("custom scheme: empty block in " + what);
        for (int i : b)
            if (!seen.insert(i).second)
                throw std::invalid_argument("custom scheme: index " + std::to_string(i) + " appears twice in " + what);
    }
    if (std::vector<int>(seen.begin(), seen.end()) != whole.indices())
        throw std::invalid_argument("custom scheme: union of " + what + " blocks is not " + whole.to_string());
}

double safe_ratio(double num, double den) {
    if (num == 0.0) return 0.0;
    return den == 0.0 ? kInf : num / den;
}

}  // namespace

const IndexSet& BlockScheme::block(int r) const {
    if (r < 1 || r > block_count()) throw std::out_of_range("BlockScheme: block index out of range");
    return r <= inner_count() ? inner[r - 1] : outer[r - 1 - inner_count()];
}

BlockScheme build_custom_scheme(const Eigen::VectorXd& eigs, const IndexSet& I, std::vector<IndexSet> inner,
                                std::vector<IndexSet> outer) {
    const int p = static_cast<int>(eigs.size());
    I.check_range(p);
    if (I.empty()) throw std::invalid_argument("block scheme: I must be non-empty");
    const IndexSet Ic = I.complement(p);
    if (Ic.empty()) throw std::invalid_argument("block scheme: I must be a proper subset of {1..p}");
    check_partition(inner, I, "inner");
    check_partition(outer, Ic, "outer");
    for (const auto& b : outer)
        if (!b.is_interval())
            throw std::invalid_argument("custom scheme: outer block " + b.to_string() + " is not an interval");

    BlockScheme s;
    s.I = I;
    s.inner = std::move(inner);
    s.outer = std::move(outer);
    fill_gaps(eigs, s);
    return s;
}

BlockScheme build_scheme(const Eigen::VectorXd& eigs, const IndexSet& I, Granularity granularity) {
    const int p = static_cast<int>(eigs.size());
    I.check_range(p);
    const IndexSet Ic = I.complement(p);
    std::vector<IndexSet> inner, outer;
    switch (granularity) {
    case Granularity::singletons:
        for (int i : I) inner.push_back(IndexSet{i});
        for (int j : Ic) outer.push_back(IndexSet{j});
        break;
    case Granularity::eigenlevel: {
        inner = eigenvalue_levels(eigs, I);
        std::vector<int> run;
        for (int j : Ic) {
            if (!run.empty() && (j != run.back() + 1 || !same_level(eigs(j - 1), eigs(run.back() - 1)))) {
                outer.emplace_back(std::move(run));
                run.clear();
            }
            run.push_back(j);
        }
        if (!run.empty()) outer.emplace_back(std::move(run));
        break;
    }
    case Granularity::custom:
        throw std::invalid_argument("build_scheme: use build_custom_scheme for caller-supplied partitions");
    }
    return build_custom_scheme(eigs, I, std::move(inner), std::move(outer));
}

EnvelopeCheck envelope_check(const Eigen::MatrixXd& coeffs, const BlockScheme& scheme, const EnvelopePair& env) {
    const int nb = scheme.block_count();
    if (env.a.size() != nb || env.b.size() != nb)
        throw std::invalid_argument("envelope_check: envelope size does not match block count");
    EnvelopeCheck out;
    for (int r = 1; r <= nb; ++r)
        for (int s = 1; s <= nb; ++s) {
            const BlockNorms n = block_norms(coeffs, scheme.block(r), scheme.block(s));
            const double op_rhs = std::max(std::sqrt(env.a(r - 1) * env.b(s - 1)), std::sqrt(env.b(r - 1) * env.a(s - 1)));
            const double hs_rhs = std::sqrt(env.b(r - 1) * env.b(s - 1));
            const double ratio = std::max(safe_ratio(n.op, op_rhs), safe_ratio(n.hs, hs_rhs));
            if (ratio > out.worst_ratio) {
                out.worst_ratio = ratio;
                if (ratio > 1.0 + 1e-10) {
                    out.ok = false;
                    out.worst_r = r;
                    out.worst_s = s;
                }
            }
        }
    return out;
}

EnvelopeCheck envelope_check(const SymMatrix& e, const SpectralModel& model, const BlockScheme& scheme,
                             const EnvelopePair& env) {
    return envelope_check(coefficients(e, model), scheme, env);
}

namespace {

Eigen::VectorXd block_weights(const Eigen::VectorXd& eigs, const BlockScheme& scheme) {
    Eigen::VectorXd w(scheme.block_count());
    for (int r = 1; r <= scheme.block_count(); ++r) {
        double sum = 0.0;
        for (int i : scheme.block(r)) sum += eigs(i - 1);
        w(r - 1) = sum;
    }
    return w;
}

}  // namespace

EnvelopePair relative_envelope(const Eigen::VectorXd& eigs, const BlockScheme& scheme, double x) {
    const Eigen::VectorXd w = block_weights(eigs, scheme);
    return {x * w, x * w};
}

EnvelopePair measured_envelope(const PerturbedPair& pair, const BlockScheme& scheme) {
    const Eigen::VectorXd w = block_weights(pair.eigs(), scheme);
    if (!(w.minCoeff() > 0.0)) throw std::invalid_argument("measured_envelope: block weights must be positive");
    double xa = 0.0, xb = 0.0;
    for (int r = 1; r <= scheme.block_count(); ++r)
        for (int s = r; s <= scheme.block_count(); ++s) {
            const BlockNorms n = block_norms(pair.coeffs, scheme.block(r), scheme.block(s));
            const double scale = std::sqrt(w(r - 1) * w(s - 1));
            xa = std::max(xa, n.op / scale);
            xb = std::max(xb, n.hs / scale);
        }
    return {xa * w, xb * w};
}

std::pair<BlockScheme, EnvelopePair> davis_kahan_envelope(const PerturbedPair& pair, const IndexSet& I) {
    const IndexSet Ic = I.complement(pair.dim());
    BlockScheme scheme = build_custom_scheme(pair.eigs(), I, {I}, {Ic});
    const double hs = pair.E.hs_norm();
    const double op = pair.E.op_norm();
    const double a = hs > 0.0 ? op * op / hs : 0.0;
    EnvelopePair env{Eigen::VectorXd::Constant(2, a), Eigen::VectorXd::Constant(2, hs)};
    return {std::move(scheme), std::move(env)};
}

Theorem4Certificate theorem4_bound(const BlockScheme& scheme, const EnvelopePair& env) {
    const int nb = scheme.block_count();
    const int m = scheme.inner_count();
    if (env.a.size() != nb || env.b.size() != nb)
        throw std::invalid_argument("theorem4_bound: envelope size does not match block count");
    if (env.a.minCoeff() < 0.0 || env.b.minCoeff() < 0.0)
        throw std::invalid_argument("theorem4_bound: envelopes must be non-negative");

    Theorem4Certificate c;
    c.label = "theorem4";
    c.condition_threshold = 1.0 / 64.0;
    for (int r = 0; r < nb; ++r) {
        c.sum_a_over_g += safe_ratio(env.a(r), scheme.g(r));
        c.sum_b_over_g += safe_ratio(env.b(r), scheme.g(r));
    }
    double bb = 0.0, ab = 0.0;
    for (int r = m; r < nb; ++r)
        for (int s = 0; s < m; ++s) {
            const double gc = scheme.g_cross(r - m, s);
            bb += safe_ratio(env.b(r) * env.b(s), gc);
            ab += safe_ratio(env.a(r) * env.b(s), gc);
        }
    c.constant16_value = 16.0 * bb;
    if (!std::isfinite(c.sum_a_over_g) || !std::isfinite(c.sum_b_over_g)) {
        c.condition_value = kInf;
        c.bound_value = c.general_value = kInf;
        c.applicable = false;
        return c;
    }
    c.condition_value = c.sum_a_over_g * c.sum_b_over_g;
    c.general_value = 12.0 * bb + 256.0 * c.sum_b_over_g * c.sum_b_over_g * ab;
    c.bound_value = c.general_value;
    if (env.a == env.b && c.sum_b_over_g <= 0.125) {
        c.simplified_value = 16.0 * bb;
        c.bound_value = std::min(c.general_value, *c.simplified_value);
    }
    c.applicable = c.condition_value <= c.condition_threshold;
    return c;
}

std::vector<SeparationEntry> separation_check(const PerturbedPair& pair, const IndexSet& I) {
    const IndexSet Ic = I.complement(pair.dim());
    std::vector<SeparationEntry> out;
    for (int i : I)
        for (int j : Ic) {
            SeparationEntry e;
            e.i = i;
            e.j = j;
            e.lhs = std::abs(pair.eigs_hat()(i - 1) - pair.eigs()(j - 1));
            e.rhs = std::abs(pair.eigs()(i - 1) - pair.eigs()(j - 1)) / 2.0;
            e.ok = e.lhs >= e.rhs - kInequalitySlack;
            out.push_back(e);
        }
    return out;
}

Prop42Result prop42_check(const PerturbedPair& pair, int i, double y) {
    const int p = pair.dim();
    if (i < 1 || i > p) throw std::out_of_range("prop42_check: index out of range");
    if (!(y > 0.0)) throw std::invalid_argument("prop42_check: y must be positive");
    const auto& l = pair.eigs();
    const double li = l(i - 1);
    const double shift = pair.eigs_hat()(i - 1) - li;

    // Upper tail: indices k >= i, weights (lambda_i + y - lambda_k)^{-1/2}.
    const int nu = p - i + 1;
    Eigen::VectorXd wu(nu);
    for (int k = 0; k < nu; ++k) wu(k) = 1.0 / std::sqrt(li + y - l(i - 1 + k));
    Eigen::MatrixXd up = wu.asDiagonal() * pair.coeffs.block(i - 1, i - 1, nu, nu) * wu.asDiagonal();

    // Lower: indices k <= i, weights (lambda_k + y - lambda_i)^{-1/2}.
    Eigen::VectorXd wd(i);
    for (int k = 0; k < i; ++k) wd(k) = 1.0 / std::sqrt(l(k) + y - li);
    Eigen::MatrixXd down = wd.asDiagonal() * pair.coeffs.block(0, 0, i, i) * wd.asDiagonal();

    Prop42Result r;
    const double nup = SymMatrix(up).op_norm();
    const double ndown = SymMatrix(down).op_norm();
    r.up_lhs = nup * nup;
    r.down_lhs = ndown * ndown;
    r.up_implication_ok = r.up_lhs > 1.0 || shift <= y + kInequalitySlack;
    r.down_implication_ok = r.down_lhs > 1.0 || shift >= -y - kInequalitySlack;
    return r;
}

namespace {

// Shared pieces of the contraction inequality for a fixed scheme.
struct ContractionContext {
    const PerturbedPair& pair;
    const BlockScheme& scheme;
    const EnvelopePair& env;
    // U^T E U_hat_I, rows indexed by 1..p, columns by the members of I.
    Eigen::MatrixXd projected;
    double sum_b_over_g = 0.0;

    ContractionContext(const PerturbedPair& pr, const BlockScheme& sc, const EnvelopePair& en)
        : pair(pr), scheme(sc), env(en) {
        projected = pair.model.eigenvectors.transpose() * pair.E.matrix() * pair.model_hat.basis(scheme.I);
        for (int s = 0; s < scheme.block_count(); ++s) sum_b_over_g += safe_ratio(env.b(s), scheme.g(s));
    }

    ContractionResult check(int r, int j) const {
        const auto& l = pair.eigs();
        const auto& lh = pair.eigs_hat();
        const double lj = l(j - 1);
        const IndexSet& Ir = scheme.block(r);

        double lhs_sq = 0.0;
        int c = 0;
        for (int i : scheme.I) {
            const double d = lh(i - 1) - lj;
            if (d == 0.0)
                throw std::invalid_argument("contraction_check: lambda_hat_" + std::to_string(i) + " equals lambda_" +
                                            std::to_string(j));
            double col = 0.0;
            for (int k : Ir) col += projected(k - 1, c) * projected(k - 1, c);
            lhs_sq += col / (d * d);
            ++c;
        }

        double inner_sum = 0.0;
        for (int s = 0; s < scheme.inner_count(); ++s) {
            double md = kInf;
            for (int i : scheme.inner[s]) md = std::min(md, std::abs(l(i - 1) - lj));
            inner_sum += safe_ratio(env.b(s), md * md);
        }

        ContractionResult out;
        out.lhs = std::sqrt(lhs_sq);
        out.rhs = (1.5 * std::sqrt(env.b(r - 1)) + 4.0 * std::sqrt(env.a(r - 1)) * sum_b_over_g) * std::sqrt(inner_sum);
        out.ok = out.lhs <= out.rhs + kInequalitySlack;
        return out;
    }
};

}  // namespace

ContractionResult contraction_check(const PerturbedPair& pair, const BlockScheme& scheme, const EnvelopePair& env,
                                    int r, int j) {
    const int p = pair.dim();
    if (j < 1 || j > p || scheme.I.contains(j))
        throw std::invalid_argument("contraction_check: j must lie outside I");
    if (r < 1 || r > scheme.block_count()) throw std::out_of_range("contraction_check: block index out of range");
    return ContractionContext(pair, scheme, env).check(r, j);
}

ContractionSweep contraction_sweep(const PerturbedPair& pair, const BlockScheme& scheme, const EnvelopePair& env) {
    const ContractionContext ctx(pair, scheme, env);
    const IndexSet Ic = scheme.I.complement(pair.dim());
    ContractionSweep out;
    for (int r = 1; r <= scheme.block_count(); ++r)
        for (int j : Ic) {
            const ContractionResult c = ctx.check(r, j);
            ++out.checked;
            if (!c.ok) ++out.violations;
            out.worst_excess = std::max(out.worst_excess, c.lhs - c.rhs);
        }
    return out;
}

}  // namespace eigenshift
