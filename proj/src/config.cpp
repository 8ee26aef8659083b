#include "eigenshift/harness.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace eigenshift::harness {

namespace {

const std::vector<std::pair<StudyKind, std::string>>& study_names() {
    static const std::vector<std::pair<StudyKind, std::string>> names = {
        {StudyKind::bound_validity, "bound_validity"}, {StudyKind::sharpness, "sharpness"},
        {StudyKind::tail, "tail"},                     {StudyKind::decay_scaling, "decay_scaling"},
        {StudyKind::goe, "goe"},                       {StudyKind::spiked, "spiked"},
        {StudyKind::prop_suite, "prop_suite"},
    };
    return names;
}

const std::vector<std::pair<ModelKind, std::string>>& model_names() {
    static const std::vector<std::pair<ModelKind, std::string>> names = {
        {ModelKind::covariance, "covariance"},
        {ModelKind::spiked, "spiked"},
        {ModelKind::low_rank_goe, "low_rank_goe"},
        {ModelKind::fixed, "fixed"},
    };
    return names;
}

std::string model_name(ModelKind m) {
    for (const auto& [k, n] : model_names())
        if (k == m) return n;
    throw std::logic_error("unknown model kind");
}

ModelKind parse_model_kind(const std::string& s) {
    for (const auto& [k, n] : model_names())
        if (n == s) return k;
    throw std::invalid_argument("config: unknown model '" + s + "'");
}

std::vector<int> parse_set(const json& j) {
    if (j.is_string()) return IndexSet::parse(j.get<std::string>()).indices();
    return j.get<std::vector<int>>();
}

SymMatrix parse_matrix_value(const json& j, const std::string& key) {
    if (j.is_string()) return read_matrix(j.get<std::string>());
    const auto rows = j.get<std::vector<std::vector<double>>>();
    const int p = static_cast<int>(rows.size());
    Eigen::MatrixXd m(p, p);
    for (int i = 0; i < p; ++i) {
        if (static_cast<int>(rows[i].size()) != p) throw std::invalid_argument("config: " + key + " is not square");
        for (int k = 0; k < p; ++k) m(i, k) = rows[i][k];
    }
    if (p > 0 && (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("config: " + key + " is not symmetric");
    return SymMatrix(m);
}

json matrix_to_json(const SymMatrix& a) {
    json rows = json::array();
    for (int i = 0; i < a.dim(); ++i) {
        json row = json::array();
        for (int k = 0; k < a.dim(); ++k) row.push_back(a(i, k));
        rows.push_back(row);
    }
    return rows;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
}

DecayProfile parse_profile(const json& j) {
    check_keys(j, {"kind", "alpha", "d", "p", "values", "mu", "m"}, "profile");
    DecayProfile prof;
    prof.kind = parse_profile_kind(j.value("kind", std::string("exponential")));
    prof.alpha = j.value("alpha", prof.alpha);
    prof.d = j.value("d", prof.d);
    prof.p = j.value("p", prof.p);
    if (j.contains("values")) prof.explicit_values = j.at("values").get<std::vector<double>>();
    if (j.contains("mu")) prof.mu = j.at("mu").get<std::array<double, 3>>();
    if (j.contains("m")) prof.m = j.at("m").get<std::array<int, 3>>();
    spectrum(prof);  // validates
    return prof;
}

json profile_to_json(const DecayProfile& prof) {
    json j{{"kind", to_string(prof.kind)}, {"alpha", prof.alpha}, {"d", prof.d}, {"p", prof.p}};
    if (prof.kind == DecayProfile::Kind::explicit_values) j["values"] = prof.explicit_values;
    if (prof.kind == DecayProfile::Kind::spiked) {
        j["mu"] = prof.mu;
        j["m"] = prof.m;
    }
    return j;
}

}  // namespace

std::string to_string(StudyKind kind) {
    for (const auto& [k, n] : study_names())
        if (k == kind) return n;
    throw std::logic_error("unknown study kind");
}

StudyKind parse_study_kind(const std::string& s) {
    for (const auto& [k, n] : study_names())
        if (n == s) return k;
    throw std::invalid_argument("config: unknown study '" + s + "'");
}

IndexSet ExperimentConfig::index_set(int dim) const {
    IndexSet I = explicit_set.empty() ? IndexSet::range(1, top_k) : IndexSet(explicit_set);
    I.check_range(dim);
    return I;
}

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    check_keys(j,
               {"study", "model", "profile", "law", "q", "rotate", "n", "n_grid", "low_rank", "p", "epsilon",
                "epsilon_grid", "pk_grid", "sigma", "sigma_hat", "zero_perturbation", "set", "k", "k_grid",
                "tail_set", "trials", "t_grid", "t", "budget", "m1_doubling", "seed", "output", "workers",
                "tolerances"},
               "config");
    ExperimentConfig c;
    try {
        c.study = parse_study_kind(j.at("study").get<std::string>());
        if (j.contains("model")) c.model = parse_model_kind(j.at("model").get<std::string>());
        if (j.contains("profile")) c.source.profile = parse_profile(j.at("profile"));
        if (j.contains("law")) {
            const json& law = j.at("law");
            check_keys(law, {"kind", "nu"}, "law");
            c.source.law.kind = parse_law_kind(law.value("kind", std::string("gaussian")));
            c.source.law.nu = law.value("nu", 0.0);
        }
        c.source.q = j.value("q", c.source.q);
        c.source.rotate = j.value("rotate", false);
        c.n = j.value("n", c.n);
        if (j.contains("n_grid")) c.n_grid = j.at("n_grid").get<std::vector<int>>();
        if (j.contains("low_rank")) c.low_rank = j.at("low_rank").get<std::vector<double>>();
        c.p = j.value("p", c.p);
        c.epsilon = j.value("epsilon", c.epsilon);
        if (j.contains("epsilon_grid")) c.epsilon_grid = j.at("epsilon_grid").get<std::vector<double>>();
        if (j.contains("pk_grid")) c.pk_grid = j.at("pk_grid").get<std::vector<int>>();
        if (j.contains("sigma")) c.fixed_sigma = parse_matrix_value(j.at("sigma"), "sigma");
        if (j.contains("sigma_hat")) c.fixed_sigma_hat = parse_matrix_value(j.at("sigma_hat"), "sigma_hat");
        c.force_zero_perturbation = j.value("zero_perturbation", false);
        if (j.contains("set")) c.explicit_set = parse_set(j.at("set"));
        c.top_k = j.value("k", c.top_k);
        if (j.contains("k_grid")) c.k_grid = j.at("k_grid").get<std::vector<int>>();
        if (j.contains("tail_set")) c.tail_set = parse_set(j.at("tail_set"));
        c.trials = j.value("trials", c.trials);
        if (j.contains("t_grid")) c.t_grid = j.at("t_grid").get<std::vector<double>>();
        c.t = j.value("t", c.t);
        c.budget = j.value("budget", c.budget);
        c.m1_doubling = j.value("m1_doubling", false);
        c.seed_base = j.value("seed", std::uint64_t{0});
        c.output = j.value("output", std::string());
        c.workers = j.value("workers", 1);
        if (j.contains("tolerances")) {
            const json& t = j.at("tolerances");
            check_keys(t, {"identity", "slope", "factor"}, "tolerances");
            c.tolerance_identity = t.value("identity", c.tolerance_identity);
            c.tolerance_slope = t.value("slope", c.tolerance_slope);
            c.tolerance_factor = t.value("factor", c.tolerance_factor);
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    c.source.seed_base = c.seed_base;

    if (c.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    for (double t : c.t_grid)
        if (!(t >= 1.0)) throw std::invalid_argument("config: t_grid values must be >= 1");
    if (c.workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    if (c.n < 1) throw std::invalid_argument("config: n must be >= 1");
    for (int n : c.n_grid)
        if (n < 1) throw std::invalid_argument("config: n_grid values must be >= 1");
    if (c.top_k < 1) throw std::invalid_argument("config: k must be >= 1");
    if (c.model == ModelKind::fixed && (!c.fixed_sigma || !c.fixed_sigma_hat))
        throw std::invalid_argument("config: the fixed model needs both sigma and sigma_hat");
    if (c.model == ModelKind::fixed && c.fixed_sigma->dim() != c.fixed_sigma_hat->dim())
        throw std::invalid_argument("config: sigma and sigma_hat have different dimensions");
    if (c.model == ModelKind::spiked && c.source.profile.kind != DecayProfile::Kind::spiked)
        throw std::invalid_argument("config: the spiked model needs a spiked profile");
    c.source.resolved_law();
    return c;
}

ExperimentConfig read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    try {
        return parse_config(j);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["study"] = to_string(c.study);
    j["model"] = model_name(c.model);
    j["profile"] = profile_to_json(c.source.profile);
    j["law"] = {{"kind", to_string(c.source.law.kind)}, {"nu", c.source.law.nu}};
    j["q"] = c.source.q;
    j["rotate"] = c.source.rotate;
    j["n"] = c.n;
    j["n_grid"] = c.n_grid;
    j["low_rank"] = c.low_rank;
    j["p"] = c.p;
    j["epsilon"] = c.epsilon;
    j["epsilon_grid"] = c.epsilon_grid;
    j["pk_grid"] = c.pk_grid;
    if (c.fixed_sigma) j["sigma"] = matrix_to_json(*c.fixed_sigma);
    if (c.fixed_sigma_hat) j["sigma_hat"] = matrix_to_json(*c.fixed_sigma_hat);
    j["zero_perturbation"] = c.force_zero_perturbation;
    if (!c.explicit_set.empty()) j["set"] = c.explicit_set;
    j["k"] = c.top_k;
    j["k_grid"] = c.k_grid;
    if (!c.tail_set.empty()) j["tail_set"] = c.tail_set;
    j["trials"] = c.trials;
    j["t_grid"] = c.t_grid;
    j["t"] = c.t;
    j["budget"] = c.budget;
    j["m1_doubling"] = c.m1_doubling;
    j["seed"] = c.seed_base;
    j["tolerances"] = {{"identity", c.tolerance_identity}, {"slope", c.tolerance_slope}, {"factor", c.tolerance_factor}};
    return j;
}

}  // namespace eigenshift::harness
