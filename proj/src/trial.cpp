#include "eigenshift/harness.hpp"

#include <cmath>
#include <limits>

namespace eigenshift::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

struct GatedScheme {
    BlockScheme scheme;
    EnvelopePair env;
};

}  // namespace

TrialRecord evaluate_trial(const PerturbedPair& pair, const IndexSet& I, const TrialOptions& opts) {
    TrialRecord r;
    r.trial = static_cast<std::int64_t>(pair.provenance.trial);
    r.seed = pair.provenance.seed_base;
    r.model = pair.provenance.generator;

    const int p = pair.dim();
    I.check_range(p);
    const auto& eigs = pair.eigs();
    const IndexSet Ic = I.complement(p);
    const bool proper = !I.empty() && !Ic.empty();

    try {
        r.lambda_hat_max = pair.eigs_hat().maxCoeff();
        r.lambda_hat_min = pair.eigs_hat().minCoeff();
        r.distance_sq = hs_distance_sq(pair.model, pair.model_hat, I);
        r.dk_hs = davis_kahan_bound(pair.E, eigs, I, NormMode::hs);
        r.dk_op = davis_kahan_bound(pair.E, eigs, I, NormMode::op);

        if (spectral_gap(eigs, I) > 0.0) {
            const FirstOrderResult fo = first_order(pair, I);
            r.delta = fo.delta;
            r.first_order_hs_sq = fo.linear_hs_sq;
            r.remainder_bound = fo.remainder_op_bound;
            if (fo.delta < 1.0) {
                const SymMatrix diff = projector(pair.model_hat, I) - projector(pair.model, I) - fo.linear_term;
                r.remainder_ok = diff.op_norm() <= fo.remainder_op_bound + kInequalitySlack ? 1 : 0;
            }
        } else {
            r.delta = kInf;
            r.first_order_hs_sq = kNaN;
            r.remainder_bound = kInf;
        }

        std::vector<GatedScheme> gated;
        const bool positive = eigs.minCoeff() > 0.0;
        if (positive) {
            r.x_measured = coefficient_envelope(pair);
            r.rank_I = relative_rank(eigs, I);
            const BoundCertificate t2 = theorem2_bound(eigs, r.x_measured, I);
            r.thm2_condition = t2.condition_value;
            r.thm2_bound = t2.bound_value;
            r.thm2_applicable = t2.applicable;
            r.refined_bound = refined_bound(pair, r.x_measured, I).bound_value;

            const BoundCertificate t3 = theorem3_bound(pair, I, build_iprime(eigs, I));
            r.thm3_condition = t3.condition_value;
            r.thm3_bound = t3.bound_value;
            r.thm3_applicable = t3.applicable;

            if (t2.applicable && proper) {
                BlockScheme s = build_scheme(eigs, I, Granularity::singletons);
                EnvelopePair env = relative_envelope(eigs, s, r.x_measured);
                gated.push_back({std::move(s), std::move(env)});
            }
        } else {
            r.x_measured = r.rank_I = kNaN;
            r.thm2_condition = r.thm2_bound = r.refined_bound = kNaN;
            r.thm3_condition = r.thm3_bound = kNaN;
        }

        r.thm4_condition = r.thm4_bound = kNaN;
        if (proper && (positive || Ic.is_interval())) {
            BlockScheme scheme;
            EnvelopePair env;
            if (positive) {
                scheme = build_scheme(eigs, I, Granularity::eigenlevel);
                env = measured_envelope(pair, scheme);
            } else {
                std::tie(scheme, env) = davis_kahan_envelope(pair, I);
            }
            const Theorem4Certificate t4 = theorem4_bound(scheme, env);
            r.thm4_condition = t4.condition_value;
            r.thm4_bound = t4.bound_value;
            r.thm4_applicable = t4.applicable;
            if (t4.applicable) gated.push_back({std::move(scheme), std::move(env)});
        }

        if (opts.lemma_checks && !gated.empty()) {
            r.separation_ok = 1;
            for (const auto& e : separation_check(pair, I))
                if (!e.ok) r.separation_ok = 0;
            r.contraction_ok = 1;
            for (const auto& g : gated) {
                try {
                    if (!contraction_sweep(pair, g.scheme, g.env).ok()) r.contraction_ok = 0;
                } catch (const std::invalid_argument&) {
                    r.contraction_ok = 0;
                }
            }
        }
    } catch (const NumericalError&) {
        r.failed = 1;
    }
    return r;
}

std::vector<std::string> record_violations(const TrialRecord& r) {
    std::vector<std::string> out;
    if (r.failed) return out;
    const double d = r.distance_sq;
    auto exceeds = [&](double bound) { return std::isfinite(bound) && d > bound + kInequalitySlack; };
    if (r.thm2_applicable && exceeds(r.thm2_bound)) out.emplace_back("theorem2");
    if (r.thm2_applicable && exceeds(r.refined_bound)) out.emplace_back("refined");
    if (r.thm3_applicable && exceeds(r.thm3_bound)) out.emplace_back("theorem3");
    if (r.thm4_applicable && exceeds(r.thm4_bound)) out.emplace_back("theorem4");
    if (r.separation_ok == 0) out.emplace_back("separation");
    if (r.contraction_ok == 0) out.emplace_back("contraction");
    if (r.remainder_ok == 0) out.emplace_back("remainder");
    if (std::isfinite(r.thm2_bound) && std::isfinite(r.first_order_hs_sq) &&
        r.first_order_hs_sq > r.thm2_bound + kInequalitySlack)
        out.emplace_back("first_order_vs_theorem2");
    return out;
}

}  // namespace eigenshift::harness
