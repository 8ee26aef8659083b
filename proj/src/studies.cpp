#include "eigenshift/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace eigenshift::harness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<std::string>& violation_names() {
    static const std::vector<std::string> names = {"theorem2",  "refined",     "theorem3",  "theorem4",
                                                   "separation", "contraction", "remainder", "first_order_vs_theorem2"};
    return names;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

PerturbedPair generate(const ExperimentConfig& c, std::uint64_t trial) {
    PerturbedPair pair;
    switch (c.model) {
    case ModelKind::covariance: {
        KLSourceSpec spec = c.source;
        spec.seed_base = c.seed_base;
        pair = sample_empirical_covariance(spec, c.n, trial);
        break;
    }
    case ModelKind::spiked: {
        KLSourceSpec spec = c.source;
        spec.seed_base = c.seed_base;
        pair = spiked_covariance_sample(spec, c.n, trial);
        break;
    }
    case ModelKind::low_rank_goe:
        pair = low_rank_plus_goe(c.low_rank, c.p, c.epsilon, trial, c.seed_base);
        break;
    case ModelKind::fixed:
        pair = PerturbedPair::make(*c.fixed_sigma, *c.fixed_sigma_hat, {"fixed", "", c.seed_base, trial});
        break;
    }
    if (c.force_zero_perturbation) {
        Provenance prov = pair.provenance;
        prov.parameters += " zero_perturbation";
        pair = PerturbedPair::make(pair.sigma, pair.sigma, std::move(prov));
    }
    return pair;
}

/// Generates trial `t` at each grid point and lets `eval` turn the pair into
/// records. Output is ordered by (point, trial).
using Evaluator = std::function<std::vector<TrialRecord>(const PerturbedPair&, const ExperimentConfig&)>;

/// With stride > 1 the evaluator numbers its records 0..stride-1 in `point`
/// and sets `param` itself.
std::vector<TrialRecord> run_grid(const std::vector<ExperimentConfig>& points, const std::vector<double>& params,
                                  int trials, int workers, const Evaluator& eval, int stride = 1) {
    const std::int64_t count = static_cast<std::int64_t>(points.size()) * trials;
    auto chunks = parallel_map<std::vector<TrialRecord>>(count, workers, [&](std::int64_t idx) {
        const int point = static_cast<int>(idx / trials);
        const auto trial = static_cast<std::uint64_t>(idx % trials);
        const ExperimentConfig& c = points[point];
        std::vector<TrialRecord> out;
        try {
            out = eval(generate(c, trial), c);
        } catch (const NumericalError&) {
            TrialRecord r;
            r.trial = static_cast<std::int64_t>(trial);
            r.seed = c.seed_base;
            r.failed = 1;
            out.push_back(r);
        }
        for (auto& r : out) {
            r.point = point * stride + r.point;
            if (stride == 1) r.param = params[point];
        }
        return out;
    });
    std::vector<TrialRecord> records;
    for (auto& ch : chunks)
        for (auto& r : ch) records.push_back(std::move(r));
    return records;
}

Evaluator standard_evaluator(bool lemma_checks = true) {
    return [lemma_checks](const PerturbedPair& pair, const ExperimentConfig& c) {
        return std::vector<TrialRecord>{evaluate_trial(pair, c.index_set(pair.dim()), {lemma_checks})};
    };
}

StudySummary base_summary(const ExperimentConfig& c, const std::vector<TrialRecord>& records) {
    StudySummary s;
    s.study = to_string(c.study);
    s.config = config_to_json(c);
    for (const auto& name : violation_names()) s.violations[name] = 0;
    std::int64_t t2 = 0, t3 = 0, t4 = 0, ok = 0;
    std::vector<double> dist;
    for (const auto& r : records) {
        ++s.trials;
        if (r.failed) {
            ++s.failed;
            continue;
        }
        ++ok;
        for (const auto& v : record_violations(r)) ++s.violations[v];
        t2 += r.thm2_applicable;
        t3 += r.thm3_applicable;
        t4 += r.thm4_applicable;
        dist.push_back(r.distance_sq);
    }
    if (ok > 0) {
        s.metrics["applicability_theorem2"] = double(t2) / ok;
        s.metrics["applicability_theorem3"] = double(t3) / ok;
        s.metrics["applicability_theorem4"] = double(t4) / ok;
        for (double q : {0.1, 0.5, 0.9, 0.99}) s.metrics["distance_sq_q" + fmt(q)] = quantile(dist, q);
    }
    return s;
}

/// Per-point median of a record field.
std::vector<double> point_medians(const std::vector<TrialRecord>& records, int points,
                                  const std::function<double(const TrialRecord&)>& field) {
    std::vector<std::vector<double>> by(points);
    for (const auto& r : records)
        if (!r.failed) by[r.point].push_back(field(r));
    std::vector<double> out;
    for (auto& v : by) out.push_back(v.empty() ? std::numeric_limits<double>::quiet_NaN() : median(v));
    return out;
}

Check window_check(std::string name, double value, double lo, double hi) {
    return {std::move(name), value, lo, hi, std::isfinite(value) && value >= lo && value <= hi};
}

std::vector<double> to_doubles(const std::vector<int>& v) { return {v.begin(), v.end()}; }

std::vector<int> n_points(const ExperimentConfig& c) { return c.n_grid.empty() ? std::vector<int>{c.n} : c.n_grid; }

std::vector<ExperimentConfig> with_n(const ExperimentConfig& c, const std::vector<int>& ns) {
    std::vector<ExperimentConfig> out;
    for (int n : ns) {
        ExperimentConfig p = c;
        p.n = n;
        out.push_back(std::move(p));
    }
    return out;
}

double ratio(double num, double den) {
    if (num == 0.0) return 0.0;
    return den == 0.0 ? kInf : num / den;
}

}  // namespace

double quantile(std::vector<double> values, double level) {
    if (values.empty()) throw std::invalid_argument("quantile: empty sample");
    if (!(level >= 0.0 && level <= 1.0)) throw std::invalid_argument("quantile: level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = level * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two or more points");
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("loglog_slope: x values are all equal");
    return sxy / sxx;
}

StudyResult run_bound_validity(const ExperimentConfig& c) {
    std::vector<ExperimentConfig> points;
    std::vector<double> params;
    if (c.model == ModelKind::low_rank_goe && !c.epsilon_grid.empty()) {
        for (double eps : c.epsilon_grid) {
            ExperimentConfig p = c;
            p.epsilon = eps;
            points.push_back(std::move(p));
            params.push_back(eps);
        }
    } else {
        const auto ns = n_points(c);
        points = with_n(c, ns);
        params = to_doubles(ns);
    }
    StudyResult res;
    res.records = run_grid(points, params, c.trials, c.workers, standard_evaluator());
    res.summary = base_summary(c, res.records);
    const int np = static_cast<int>(points.size());
    res.summary.series.push_back(
        {"median_distance_sq", params, point_medians(res.records, np, [](const auto& r) { return r.distance_sq; })});
    return res;
}

StudyResult run_sharpness(const ExperimentConfig& c) {
    const std::vector<int> ks = c.k_grid.empty() ? std::vector<int>{c.top_k} : c.k_grid;
    const auto ns = n_points(c);
    const auto points = with_n(c, ns);

    // One pair per trial, evaluated for every k; point = n index * |k| + k index.
    Evaluator eval = [&ks](const PerturbedPair& pair, const ExperimentConfig&) {
        std::vector<TrialRecord> out;
        for (std::size_t ki = 0; ki < ks.size(); ++ki) {
            TrialRecord r = evaluate_trial(pair, IndexSet::range(1, ks[ki]), {true});
            r.stat = ratio(r.dk_hs * r.dk_hs, r.distance_sq);
            r.point = static_cast<int>(ki);
            r.param = ks[ki];
            out.push_back(std::move(r));
        }
        return out;
    };
    const int nk = static_cast<int>(ks.size());
    StudyResult res;
    res.records = run_grid(points, to_doubles(ns), c.trials, c.workers, eval, nk);
    res.summary = base_summary(c, res.records);

    const int np = static_cast<int>(ns.size()) * nk;
    const auto med_d = point_medians(res.records, np, [](const auto& r) { return r.distance_sq; });
    const auto med_dk = point_medians(res.records, np, [](const auto& r) { return r.dk_hs * r.dk_hs; });
    const auto med_t2 = point_medians(res.records, np, [](const auto& r) { return r.thm2_bound; });
    const auto med_fo = point_medians(res.records, np, [](const auto& r) { return r.first_order_hs_sq; });
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
        Series dk{"dk_hs_sq_over_distance_sq_n=" + std::to_string(ns[ni]), {}, {}};
        Series t2{"theorem2_over_distance_sq_n=" + std::to_string(ns[ni]), {}, {}};
        Series fo{"first_order_over_distance_sq_n=" + std::to_string(ns[ni]), {}, {}};
        for (int ki = 0; ki < nk; ++ki) {
            const int pt = static_cast<int>(ni) * nk + ki;
            dk.x.push_back(ks[ki]);
            dk.y.push_back(ratio(med_dk[pt], med_d[pt]));
            t2.x.push_back(ks[ki]);
            t2.y.push_back(ratio(med_t2[pt], med_d[pt]));
            fo.x.push_back(ks[ki]);
            fo.y.push_back(ratio(med_fo[pt], med_d[pt]));
        }
        if (nk >= 2) {
            const std::string tag = "_n=" + std::to_string(ns[ni]);
            res.summary.checks.push_back(
                window_check("dk_ratio_growth" + tag, ratio(dk.y.back(), dk.y.front()), 10.0, kInf));
            const auto [lo, hi] = std::minmax_element(t2.y.begin(), t2.y.end());
            res.summary.checks.push_back(window_check("theorem2_ratio_spread" + tag, ratio(*hi, *lo), 1.0, 4.0));
        }
        res.summary.series.push_back(std::move(dk));
        res.summary.series.push_back(std::move(t2));
        res.summary.series.push_back(std::move(fo));
    }
    return res;
}

StudyResult run_tail(const ExperimentConfig& c) {
    const auto ns = n_points(c);
    const auto points = with_n(c, ns);
    Evaluator eval = [](const PerturbedPair& pair, const ExperimentConfig& pc) {
        const IndexSet I = pc.index_set(pair.dim());
        const IndexSet J = pc.tail_set.empty() ? I.complement(pair.dim()) : IndexSet(pc.tail_set);
        J.check_range(pair.dim());
        TrialRecord r = evaluate_trial(pair, I, {false});
        double w = 0.0;
        for (int i : I)
            for (int j : J) w += pair.eigs()(i - 1) * pair.eigs()(j - 1);
        r.stat = block_norms(pair.coeffs, I, J).op / std::sqrt(w);
        return std::vector<TrialRecord>{r};
    };
    StudyResult res;
    res.records = run_grid(points, to_doubles(ns), c.trials, c.workers, eval);
    res.summary = base_summary(c, res.records);

    const int np = static_cast<int>(ns.size());
    std::vector<std::vector<double>> stats(np);
    for (const auto& r : res.records)
        if (!r.failed) stats[r.point].push_back(r.stat);
    std::vector<double> t_grid = c.t_grid;
    if (t_grid.empty())
        for (int t = 1; t <= 10; ++t) t_grid.push_back(t);

    Series q99{"q99_normalized_block_norm", to_doubles(ns), {}};
    bool monotone = true;
    for (int pt = 0; pt < np; ++pt) {
        q99.y.push_back(stats[pt].empty() ? std::numeric_limits<double>::quiet_NaN() : quantile(stats[pt], 0.99));
        // Survival of sqrt(n) * stat at the sqrt(t) level.
        Series surv{"survival_n=" + std::to_string(ns[pt]), t_grid, {}};
        const double root_n = std::sqrt(static_cast<double>(ns[pt]));
        for (double t : t_grid) {
            std::int64_t above = 0;
            for (double v : stats[pt]) above += root_n * v > std::sqrt(t);
            surv.y.push_back(stats[pt].empty() ? 0.0 : double(above) / stats[pt].size());
        }
        for (std::size_t k = 1; k < surv.y.size(); ++k)
            if (t_grid[k] >= t_grid[k - 1] && surv.y[k] > surv.y[k - 1]) monotone = false;
        res.summary.series.push_back(std::move(surv));
    }
    res.summary.checks.push_back({"survival_monotone", monotone ? 1.0 : 0.0, 1.0, 1.0, monotone});
    for (int pt = 1; pt < np; ++pt) {
        // Expected factor sqrt(n_prev / n) on the 99th percentile, within +-40%.
        const double expected = std::sqrt(double(ns[pt - 1]) / ns[pt]);
        res.summary.checks.push_back(window_check(
            "q99_ratio_n=" + std::to_string(ns[pt - 1]) + "->" + std::to_string(ns[pt]),
            ratio(q99.y[pt], q99.y[pt - 1]), 0.6 * expected, 1.4 * expected));
    }
    if (np >= 2) res.summary.metrics["q99_slope"] = loglog_slope(q99.x, q99.y);
    res.summary.series.push_back(std::move(q99));
    return res;
}

StudyResult run_decay_scaling(const ExperimentConfig& c) {
    if (c.source.profile.kind != DecayProfile::Kind::exponential &&
        c.source.profile.kind != DecayProfile::Kind::polynomial)
        throw std::invalid_argument("decay_scaling: profile must be exponential or polynomial");
    const auto ns = n_points(c);
    const int np = static_cast<int>(ns.size());
    const bool exponential = c.source.profile.kind == DecayProfile::Kind::exponential;

    std::vector<ExperimentConfig> points = with_n(c, ns);
    std::vector<double> params = to_doubles(ns);
    // Optional k sweep at the base n, appended as extra points.
    for (int k : c.k_grid) {
        ExperimentConfig p = c;
        p.top_k = k;
        p.explicit_set.clear();
        points.push_back(std::move(p));
        params.push_back(k);
    }
    StudyResult res;
    res.records = run_grid(points, params, c.trials, c.workers, standard_evaluator());
    res.summary = base_summary(c, res.records);

    const auto med = point_medians(res.records, static_cast<int>(points.size()), [](const auto& r) { return r.distance_sq; });
    const int k = c.explicit_set.empty() ? c.top_k : static_cast<int>(c.explicit_set.size());
    const double klogk = k * std::log(std::max(k, 2));
    Series m{"median_distance_sq", to_doubles(ns), {med.begin(), med.begin() + np}};
    Series scaled{exponential ? "median_n_distance_sq" : "median_n_distance_sq_over_k2logk", to_doubles(ns), {}};
    for (int pt = 0; pt < np; ++pt)
        scaled.y.push_back(exponential ? ns[pt] * med[pt] : ns[pt] * med[pt] / (k * klogk));
    if (np >= 2) {
        const double slope = loglog_slope(m.x, m.y);
        res.summary.metrics["slope_distance_sq_vs_n"] = slope;
        res.summary.checks.push_back(
            window_check("slope_distance_sq_vs_n", slope, -1.0 - c.tolerance_slope, -1.0 + c.tolerance_slope));
    }
    res.summary.series.push_back(std::move(m));
    res.summary.series.push_back(std::move(scaled));

    if (!c.k_grid.empty()) {
        Series ks{"median_distance_sq_vs_k", to_doubles(c.k_grid), {med.begin() + np, med.end()}};
        const auto [lo, hi] = std::minmax_element(ks.y.begin(), ks.y.end());
        res.summary.checks.push_back(window_check("k_sweep_spread", ratio(*hi, *lo), 1.0, 4.0));
        res.summary.series.push_back(std::move(ks));
    }
    if (c.budget > 0.0)
        for (int n : ns) {
            const double load = c.t * klogk / std::sqrt(static_cast<double>(n));
            if (load > c.budget)
                res.summary.warnings.push_back("n=" + std::to_string(n) + ": t k log k / sqrt(n) = " + fmt(load) +
                                               " exceeds the budget " + fmt(c.budget));
        }
    return res;
}

StudyResult run_goe(const ExperimentConfig& c) {
    if (c.model != ModelKind::low_rank_goe) throw std::invalid_argument("goe: model must be low_rank_goe");
    const std::vector<double> eps =
        c.epsilon_grid.empty() ? std::vector<double>{1e-3, 2e-3, 5e-3, 1e-2} : c.epsilon_grid;
    const int k = static_cast<int>(c.low_rank.size());

    std::vector<ExperimentConfig> points;
    std::vector<double> params;
    for (double e : eps) {
        ExperimentConfig p = c;
        p.epsilon = e;
        points.push_back(std::move(p));
        params.push_back(e);
    }
    for (int pk : c.pk_grid) {
        ExperimentConfig p = c;
        p.p = pk + k;
        points.push_back(std::move(p));
        params.push_back(pk);
    }
    Evaluator eval = [](const PerturbedPair& pair, const ExperimentConfig& pc) {
        return std::vector<TrialRecord>{evaluate_trial(pair, pc.index_set(pair.dim()), {true})};
    };
    StudyResult res;
    res.records = run_grid(points, params, c.trials, c.workers, eval);
    res.summary = base_summary(c, res.records);

    const int ne = static_cast<int>(eps.size());
    const auto med = point_medians(res.records, static_cast<int>(points.size()), [](const auto& r) { return r.distance_sq; });
    Series se{"median_distance_sq_vs_epsilon", eps, {med.begin(), med.begin() + ne}};
    if (ne >= 2) {
        const double slope = loglog_slope(se.x, se.y);
        res.summary.metrics["slope_distance_sq_vs_epsilon"] = slope;
        res.summary.checks.push_back(
            window_check("slope_distance_sq_vs_epsilon", slope, 2.0 - c.tolerance_slope, 2.0 + c.tolerance_slope));
    }
    res.summary.series.push_back(std::move(se));
    if (!c.pk_grid.empty()) {
        Series sp{"median_distance_sq_vs_p_minus_k", to_doubles(c.pk_grid), {med.begin() + ne, med.end()}};
        for (std::size_t i = 1; i < sp.y.size(); ++i) {
            const double factor = double(c.pk_grid[i]) / c.pk_grid[i - 1];
            res.summary.checks.push_back(window_check(
                "p_minus_k_ratio_" + std::to_string(c.pk_grid[i - 1]) + "->" + std::to_string(c.pk_grid[i]),
                ratio(sp.y[i], sp.y[i - 1]), factor - 0.25 * factor, factor + 0.25 * factor));
        }
        res.summary.series.push_back(std::move(sp));
    }
    return res;
}

StudyResult run_spiked(const ExperimentConfig& c) {
    if (c.source.profile.kind != DecayProfile::Kind::spiked) throw std::invalid_argument("spiked: profile must be spiked");
    ExperimentConfig base = c;
    base.model = ModelKind::spiked;
    base.explicit_set.clear();
    base.top_k = c.source.profile.m[0];
    const auto ns = n_points(base);
    const int np = static_cast<int>(ns.size());

    std::vector<ExperimentConfig> points = with_n(base, ns);
    std::vector<double> params = to_doubles(ns);
    if (c.m1_doubling) {
        ExperimentConfig d = base;
        d.source.profile.m[0] *= 2;
        d.n = ns.front();
        d.top_k = d.source.profile.m[0];
        points.push_back(d);
        params.push_back(d.source.profile.m[0]);
    }
    StudyResult res;
    res.records = run_grid(points, params, c.trials, c.workers, standard_evaluator());
    res.summary = base_summary(base, res.records);

    const auto med = point_medians(res.records, static_cast<int>(points.size()), [](const auto& r) { return r.distance_sq; });
    const auto& mu = c.source.profile.mu;
    const auto& m = c.source.profile.m;
    const int p = m[0] + m[1] + m[2];
    Series sm{"median_distance_sq", to_doubles(ns), {med.begin(), med.begin() + np}};
    Series shape{"dk_op_shape", to_doubles(ns), {}};
    Series rel{"median_over_dk_op_shape", to_doubles(ns), {}};
    for (int pt = 0; pt < np; ++pt) {
        const double s = mu[0] * mu[0] * m[0] * p / (ns[pt] * (mu[0] - mu[1]) * (mu[0] - mu[1]));
        shape.y.push_back(s);
        rel.y.push_back(ratio(med[pt], s));
    }
    if (np >= 2) {
        const double slope = loglog_slope(sm.x, sm.y);
        res.summary.metrics["slope_distance_sq_vs_n"] = slope;
        res.summary.checks.push_back(
            window_check("slope_distance_sq_vs_n", slope, -1.0 - c.tolerance_slope, -1.0 + c.tolerance_slope));
    }
    if (c.m1_doubling) {
        // Doubling is evaluated at the first n of the grid.
        const double r = ratio(med.back(), med.front());
        res.summary.metrics["m1_doubling_ratio"] = r;
        res.summary.checks.push_back(window_check("m1_doubling_ratio", r, 1.0, 3.0));
        res.summary.series.push_back({"m1_doubling", {double(m[0]), double(2 * m[0])}, {med.front(), med.back()}});
    }
    res.summary.series.push_back(std::move(sm));
    res.summary.series.push_back(std::move(shape));
    res.summary.series.push_back(std::move(rel));
    return res;
}

StudyResult run_prop_suite(const ExperimentConfig& c) {
    const auto ns = n_points(c);
    const auto points = with_n(c, ns);
    const int ny = c.t_grid.empty() ? 10 : static_cast<int>(c.t_grid.size());
    Evaluator eval = [&c, ny](const PerturbedPair& pair, const ExperimentConfig& pc) {
        TrialRecord r = evaluate_trial(pair, pc.index_set(pair.dim()), {true});
        // Offsets y relative to the spectral scale, log-spaced over five decades
        // unless the config supplies them (as multiples of 1e-5 lambda_1).
        const double scale = std::max(pair.eigs().cwiseAbs().maxCoeff(), 1e-300);
        int failures = 0;
        for (int k = 0; k < ny; ++k) {
            const double y = c.t_grid.empty() ? scale * std::pow(10.0, -5.0 + 5.0 * k / (ny - 1))
                                              : scale * 1e-5 * c.t_grid[k];
            for (int i = 1; i <= pair.dim(); ++i) {
                const Prop42Result pr = prop42_check(pair, i, y);
                failures += !pr.up_implication_ok + !pr.down_implication_ok;
            }
        }
        r.stat = failures;
        return std::vector<TrialRecord>{r};
    };
    StudyResult res;
    res.records = run_grid(points, to_doubles(ns), c.trials, c.workers, eval);
    res.summary = base_summary(c, res.records);
    std::int64_t failures = 0;
    for (const auto& r : res.records) failures += static_cast<std::int64_t>(r.stat);
    res.summary.violations["localisation"] = failures;
    res.summary.metrics["y_grid_size"] = ny;
    return res;
}

StudyResult run_study(const ExperimentConfig& c) {
    switch (c.study) {
    case StudyKind::bound_validity: return run_bound_validity(c);
    case StudyKind::sharpness: return run_sharpness(c);
    case StudyKind::tail: return run_tail(c);
    case StudyKind::decay_scaling: return run_decay_scaling(c);
    case StudyKind::goe: return run_goe(c);
    case StudyKind::spiked: return run_spiked(c);
    case StudyKind::prop_suite: return run_prop_suite(c);
    }
    throw std::logic_error("run_study: unknown study kind");
}

}  // namespace eigenshift::harness
