#include "eigenshift/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eigenshift::harness {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Index offsets keep the instance streams of the sub-suites disjoint.
constexpr std::uint64_t kPropOffset = 1'000'000;
constexpr std::uint64_t kRemainderOffset = 2'000'000;
constexpr std::uint64_t kHsOffset = 3'000'000;
constexpr std::uint64_t kConsistencyOffset = 4'000'000;

/// Tally for one criterion on one instance.
struct Tally {
    std::int64_t evaluated = 0;
    std::int64_t violations = 0;
    double worst = kNegInf;

    void record(double excess, double slack) {
        ++evaluated;
        if (excess > slack) ++violations;
        worst = std::max(worst, excess);
    }
    void add(const Tally& o) {
        evaluated += o.evaluated;
        violations += o.violations;
        worst = std::max(worst, o.worst);
    }
};

enum Criterion {
    theorem2,
    refined,
    theorem3,
    theorem4,
    envelope,
    separation,
    contraction,
    davis_kahan,
    criterion_count
};

const char* criterion_name(int c) {
    switch (c) {
    case theorem2: return "theorem2_soundness";
    case refined: return "refined_soundness";
    case theorem3: return "theorem3_soundness";
    case theorem4: return "theorem4_soundness";
    case envelope: return "measured_envelopes_valid";
    case separation: return "eigenvalue_separation";
    case contraction: return "contraction";
    case davis_kahan: return "davis_kahan_interval";
    }
    return "?";
}

using Tallies = std::array<Tally, criterion_count>;

Tallies soundness_instance(const Instance& inst) {
    Tallies t;
    const PerturbedPair& pair = inst.pair;
    const IndexSet& I = inst.I;
    const auto& eigs = pair.eigs();
    const double d = hs_distance_sq(pair.model, pair.model_hat, I);

    const double x = coefficient_envelope(pair);
    const BoundCertificate t2 = theorem2_bound(eigs, x, I);
    if (t2.applicable) {
        t.at(theorem2).record(d - t2.bound_value, kInequalitySlack);
        t.at(refined).record(d - refined_bound(pair, x, I).bound_value, kInequalitySlack);
    }
    const BoundCertificate t3 = theorem3_bound(pair, I, build_iprime(eigs, I));
    if (t3.applicable) t.at(theorem3).record(d - t3.bound_value, kInequalitySlack);

    std::vector<std::pair<BlockScheme, EnvelopePair>> schemes;
    {
        BlockScheme s = build_scheme(eigs, I, Granularity::singletons);
        EnvelopePair e = relative_envelope(eigs, s, x);
        schemes.emplace_back(std::move(s), std::move(e));
    }
    {
        BlockScheme s = build_scheme(eigs, I, Granularity::eigenlevel);
        EnvelopePair e = measured_envelope(pair, s);
        schemes.emplace_back(std::move(s), std::move(e));
    }
    if (I.complement(pair.dim()).is_interval()) schemes.push_back(davis_kahan_envelope(pair, I));

    bool any_gate = false;
    for (const auto& [scheme, env] : schemes) {
        const EnvelopeCheck ec = envelope_check(pair.coeffs, scheme, env);
        t.at(envelope).record(ec.worst_ratio - 1.0, 1e-10);
        if (!ec.ok) continue;
        const Theorem4Certificate t4 = theorem4_bound(scheme, env);
        if (!t4.applicable) continue;
        any_gate = true;
        t.at(theorem4).record(d - t4.bound_value, kInequalitySlack);
        const ContractionSweep cs = contraction_sweep(pair, scheme, env);
        t.at(contraction).evaluated += cs.checked;
        t.at(contraction).violations += cs.violations;
        t.at(contraction).worst = std::max(t.at(contraction).worst, cs.worst_excess);
    }
    if (any_gate || t2.applicable)
        for (const auto& e : separation_check(pair, I)) t.at(separation).record(e.rhs - e.lhs, kInequalitySlack);

    if (I.is_interval()) {
        const double dk = davis_kahan_bound(pair.E, eigs, I, NormMode::hs);
        if (std::isfinite(dk)) t.at(davis_kahan).record(std::sqrt(d) - dk, kInequalitySlack);
    }
    return t;
}

CriterionReport to_report(std::string name, std::int64_t instances, const Tally& t) {
    CriterionReport r;
    r.name = std::move(name);
    r.instances = instances;
    r.evaluated = t.evaluated;
    r.violations = t.violations;
    r.worst_excess = t.evaluated ? t.worst : 0.0;
    return r;
}

template <class F>
Tally fold(int count, int workers, std::uint64_t seed, std::uint64_t offset, F per_instance) {
    const auto parts = parallel_map<Tally>(count, workers, [&](std::int64_t i) {
        return per_instance(random_instance(seed, offset + static_cast<std::uint64_t>(i)));
    });
    Tally total;
    for (const auto& p : parts) total.add(p);
    return total;
}

double relative_mismatch(double a, double b) {
    if (a == b) return 0.0;
    if (!std::isfinite(a) || !std::isfinite(b)) return std::numeric_limits<double>::infinity();
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

}  // namespace

std::vector<CriterionReport> run_verification_suite(const VerificationOptions& opts) {
    std::vector<CriterionReport> out;

    const auto sound = parallel_map<Tallies>(opts.soundness_instances, opts.workers, [&](std::int64_t i) {
        return soundness_instance(random_instance(opts.seed_base, static_cast<std::uint64_t>(i)));
    });
    for (int c = 0; c < criterion_count; ++c) {
        Tally total;
        for (const auto& s : sound) total.add(s[c]);
        out.push_back(to_report(criterion_name(c), opts.soundness_instances, total));
    }

    const int ny = opts.y_grid;
    out.push_back(to_report("localisation_implications", opts.prop_instances,
                            fold(opts.prop_instances, opts.workers, opts.seed_base, kPropOffset, [ny](const Instance& inst) {
                                Tally t;
                                const auto& pair = inst.pair;
                                const double scale = pair.eigs().maxCoeff();
                                for (int k = 0; k < ny; ++k) {
                                    const double y =
                                        scale * std::pow(10.0, ny > 1 ? -5.0 + 5.0 * k / (ny - 1) : 0.0);
                                    for (int i = 1; i <= pair.dim(); ++i) {
                                        const Prop42Result r = prop42_check(pair, i, y);
                                        t.record(r.up_implication_ok ? -1.0 : 1.0, 0.0);
                                        t.record(r.down_implication_ok ? -1.0 : 1.0, 0.0);
                                    }
                                }
                                return t;
                            })));

    out.push_back(to_report(
        "first_order_remainder", opts.remainder_instances,
        fold(opts.remainder_instances, opts.workers, opts.seed_base, kRemainderOffset, [](const Instance& inst) {
            Tally t;
            const auto& pair = inst.pair;
            if (!(spectral_gap(pair.eigs(), inst.I) > 0.0)) return t;
            const FirstOrderResult fo = first_order(pair, inst.I);
            if (!(fo.delta < 1.0)) return t;
            const SymMatrix diff =
                projector(pair.model_hat, inst.I) - projector(pair.model, inst.I) - fo.linear_term;
            t.record(diff.op_norm() - fo.remainder_op_bound, kInequalitySlack);
            return t;
        })));

    out.push_back(to_report("hs_identity", opts.hs_pairs,
                            fold(opts.hs_pairs, opts.workers, opts.seed_base, kHsOffset, [](const Instance& inst) {
                                Tally t;
                                const auto& m = inst.pair.model;
                                const auto& mh = inst.pair.model_hat;
                                const double entry = hs_distance_sq_entrywise(m, mh, inst.I);
                                t.record(std::abs(hs_distance_sq_trace(m, mh, inst.I) - entry), 1e-10);
                                t.record(std::abs(hs_distance_sq(m, mh, inst.I) - entry), 1e-10);
                                return t;
                            })));

    struct Consistency {
        Tally value;
        Tally gate;
        Tally factor4;
    };
    const auto cons = parallel_map<Consistency>(opts.consistency_instances, opts.workers, [&](std::int64_t i) {
        const Instance inst = random_instance(opts.seed_base, kConsistencyOffset + static_cast<std::uint64_t>(i));
        const auto& eigs = inst.pair.eigs();
        const double x = coefficient_envelope(inst.pair);
        const BoundCertificate t2 = theorem2_bound(eigs, x, inst.I);
        const BlockScheme s = build_scheme(eigs, inst.I, Granularity::singletons);
        const Theorem4Certificate t4 = theorem4_bound(s, relative_envelope(eigs, s, x));
        Consistency c;
        c.value.record(relative_mismatch(t4.constant16_value, t2.bound_value), 1e-12);
        if (t4.simplified_value) c.value.record(relative_mismatch(*t4.simplified_value, t2.bound_value), 1e-12);
        c.gate.record(t4.applicable == t2.applicable ? 0.0 : 1.0, 0.0);
        const BoundCertificate t3 = theorem3_certificate(eigs, x, inst.I);
        c.factor4.record(t3.bound_value == 4.0 * t2.bound_value ? 0.0 : 1.0, 0.0);
        return c;
    });
    Tally value, gate, factor4;
    for (const auto& c : cons) {
        value.add(c.value);
        gate.add(c.gate);
        factor4.add(c.factor4);
    }
    out.push_back(to_report("singleton_blocks_match_scalar_bound", opts.consistency_instances, value));
    out.push_back(to_report("singleton_blocks_match_scalar_gate", opts.consistency_instances, gate));
    out.push_back(to_report("block_bound_is_four_times_scalar", opts.consistency_instances, factor4));
    return out;
}

}  // namespace eigenshift::harness
