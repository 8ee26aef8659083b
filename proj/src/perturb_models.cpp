#include "eigenshift/perturb_models.hpp"

#include <Eigen/QR>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace eigenshift {

PerturbedPair PerturbedPair::make(const SymMatrix& sigma, const SymMatrix& sigma_hat, Provenance provenance) {
    if (sigma.dim() != sigma_hat.dim())
        throw std::invalid_argument("PerturbedPair: dimension mismatch");
    PerturbedPair pair;
    pair.sigma = sigma;
    pair.sigma_hat = sigma_hat;
    pair.E = SymMatrix(sigma_hat.matrix() - sigma.matrix());
    pair.model = decompose(sigma, "sigma (" + provenance.generator + ")");
    pair.model_hat = decompose(sigma_hat, "sigma_hat (" + provenance.generator + ")");
    pair.coeffs = coefficients(pair.E, pair.model);
    pair.provenance = std::move(provenance);
    return pair;
}

// ---------------------------------------------------------------------------

DecayProfile DecayProfile::exponential(double alpha, int p) {
    DecayProfile d;
    d.kind = Kind::exponential;
    d.alpha = alpha;
    d.p = p;
    return d;
}

DecayProfile DecayProfile::polynomial(double alpha, int p) {
    DecayProfile d;
    d.kind = Kind::polynomial;
    d.alpha = alpha;
    d.p = p;
    return d;
}

DecayProfile DecayProfile::spiked(std::array<double, 3> mu, std::array<int, 3> m) {
    DecayProfile d;
    d.kind = Kind::spiked;
    d.mu = mu;
    d.m = m;
    return d;
}

DecayProfile DecayProfile::explicit_spectrum(std::vector<double> values) {
    DecayProfile d;
    d.kind = Kind::explicit_values;
    d.explicit_values = std::move(values);
    return d;
}

std::string to_string(DecayProfile::Kind kind) {
    switch (kind) {
    case DecayProfile::Kind::exponential: return "exponential";
    case DecayProfile::Kind::polynomial: return "polynomial";
    case DecayProfile::Kind::spiked: return "spiked";
    case DecayProfile::Kind::explicit_values: return "explicit";
    }
    return "?";
}

DecayProfile::Kind parse_profile_kind(const std::string& s) {
    if (s == "exponential") return DecayProfile::Kind::exponential;
    if (s == "polynomial") return DecayProfile::Kind::polynomial;
    if (s == "spiked") return DecayProfile::Kind::spiked;
    if (s == "explicit") return DecayProfile::Kind::explicit_values;
    throw std::invalid_argument("unknown profile kind '" + s + "'");
}

int default_truncation(const DecayProfile& profile) {
    switch (profile.kind) {
    case DecayProfile::Kind::exponential:
        // Tail over trace is exactly exp(-alpha p).
        return static_cast<int>(std::floor(std::log(1e6) / profile.alpha)) + 1;
    case DecayProfile::Kind::polynomial: {
        // Tail <= p^-alpha / alpha and the trace is at least 1.
        const double p = std::pow(1e6 / profile.alpha, 1.0 / profile.alpha);
        return static_cast<int>(std::min<double>(std::floor(p) + 1, kMaxPolynomialTruncation));
    }
    case DecayProfile::Kind::spiked: return profile.m[0] + profile.m[1] + profile.m[2];
    case DecayProfile::Kind::explicit_values: return static_cast<int>(profile.explicit_values.size());
    }
    return 0;
}

Eigen::VectorXd spectrum(const DecayProfile& profile) {
    using Kind = DecayProfile::Kind;
    if ((profile.kind == Kind::exponential || profile.kind == Kind::polynomial) && !(profile.alpha > 0.0))
        throw std::invalid_argument("spectrum: alpha must be positive");
    if (profile.p < 0) throw std::invalid_argument("spectrum: p must be non-negative");
    const int p = profile.p > 0 ? profile.p : default_truncation(profile);

    Eigen::VectorXd l;
    switch (profile.kind) {
    case Kind::exponential:
        l.resize(p);
        for (int j = 1; j <= p; ++j) l(j - 1) = std::exp(-profile.alpha * j);
        break;
    case Kind::polynomial:
        l.resize(p);
        for (int j = 1; j <= p; ++j) l(j - 1) = std::pow(double(j), -profile.alpha - 1.0);
        break;
    case Kind::spiked: {
        const auto& mu = profile.mu;
        if (!(mu[0] > mu[1] && mu[1] > mu[2] && mu[2] > 0.0))
            throw std::invalid_argument("spectrum: spiked levels must satisfy mu1 > mu2 > mu3 > 0");
        for (int m : profile.m)
            if (m < 1) throw std::invalid_argument("spectrum: spiked multiplicities must be positive");
        l.resize(profile.m[0] + profile.m[1] + profile.m[2]);
        int k = 0;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < profile.m[r]; ++c) l(k++) = mu[r];
        break;
    }
    case Kind::explicit_values: {
        const auto& v = profile.explicit_values;
        if (v.empty()) throw std::invalid_argument("spectrum: explicit profile is empty");
        l = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        for (int j = 0; j < l.size(); ++j) {
            if (!(l(j) > 0.0)) throw std::invalid_argument("spectrum: explicit eigenvalues must be positive");
            if (j > 0 && l(j) > l(j - 1)) throw std::invalid_argument("spectrum: explicit eigenvalues must be non-increasing");
        }
        break;
    }
    }
    return l;
}

// ---------------------------------------------------------------------------

std::string to_string(CoefficientLaw::Kind kind) {
    switch (kind) {
    case CoefficientLaw::Kind::gaussian: return "gaussian";
    case CoefficientLaw::Kind::student_t: return "student_t";
    case CoefficientLaw::Kind::rademacher: return "rademacher";
    }
    return "?";
}

CoefficientLaw::Kind parse_law_kind(const std::string& s) {
    if (s == "gaussian") return CoefficientLaw::Kind::gaussian;
    if (s == "student_t") return CoefficientLaw::Kind::student_t;
    if (s == "rademacher") return CoefficientLaw::Kind::rademacher;
    throw std::invalid_argument("unknown coefficient law '" + s + "'");
}

double CoefficientLaw::draw(StreamRng& rng) const {
    switch (kind) {
    case Kind::gaussian: return rng.normal();
    case Kind::rademacher: return rng.rademacher();
    case Kind::student_t: {
        // Z / sqrt(V / nu) rescaled by sqrt((nu - 2) / nu), V ~ chi^2_nu.
        const double z = rng.normal();
        const double v = 2.0 * rng.gamma(nu / 2.0);
        return z * std::sqrt((nu - 2.0) / v);
    }
    }
    return 0.0;
}

CoefficientLaw KLSourceSpec::resolved_law() const {
    if (!(q > 4.0)) throw std::invalid_argument("KLSourceSpec: moment order q must exceed 4");
    CoefficientLaw law2 = law;
    if (law2.kind == CoefficientLaw::Kind::student_t) {
        if (law2.nu == 0.0) law2.nu = q + 1.0;
        if (!(law2.nu > q)) throw std::invalid_argument("KLSourceSpec: student_t needs nu > q for a finite q-th moment");
    }
    return law2;
}

double KLSourceSpec::moment_bound() const {
    const CoefficientLaw l = resolved_law();
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    switch (l.kind) {
    case CoefficientLaw::Kind::gaussian: return std::pow(2.0, q / 2.0) * std::tgamma((q + 1.0) / 2.0) / sqrt_pi;
    case CoefficientLaw::Kind::rademacher: return 1.0;
    case CoefficientLaw::Kind::student_t:
        return std::pow(l.nu - 2.0, q / 2.0) * std::tgamma((q + 1.0) / 2.0) * std::tgamma((l.nu - q) / 2.0) /
               (sqrt_pi * std::tgamma(l.nu / 2.0));
    }
    return 0.0;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd random_orthogonal(int p, StreamRng& rng) {
    Eigen::MatrixXd g(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < p; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

namespace {

std::string describe(const KLSourceSpec& spec, int p, int n) {
    std::ostringstream os;
    os << "profile=" << to_string(spec.profile.kind) << " p=" << p << " law=" << to_string(spec.law.kind) << " n=" << n;
    if (spec.profile.kind == DecayProfile::Kind::spiked)
        os << " mu=" << spec.profile.mu[0] << "," << spec.profile.mu[1] << "," << spec.profile.mu[2] << " m="
           << spec.profile.m[0] << "," << spec.profile.m[1] << "," << spec.profile.m[2];
    else if (spec.profile.kind != DecayProfile::Kind::explicit_values)
        os << " alpha=" << spec.profile.alpha;
    return os.str();
}

}  // namespace

PerturbedPair sample_empirical_covariance(const KLSourceSpec& spec, int n, std::uint64_t trial) {
    if (n < 1) throw std::invalid_argument("sample_empirical_covariance: n must be positive");
    const CoefficientLaw law = spec.resolved_law();
    const Eigen::VectorXd l = spectrum(spec.profile);
    const int p = static_cast<int>(l.size());
    const Eigen::VectorXd scale = l.cwiseSqrt();

    StreamRng rng(spec.seed_base, trial, streams::samples);
    Eigen::MatrixXd x(n, p);
    for (int s = 0; s < n; ++s)
        for (int j = 0; j < p; ++j) x(s, j) = scale(j) * law.draw(rng);

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / n);
    Eigen::MatrixXd full = cov.selfadjointView<Eigen::Lower>();
    cov = std::move(full);
    Eigen::MatrixXd sigma = l.asDiagonal();

    if (spec.rotate) {
        StreamRng rot(spec.seed_base, trial, streams::rotation);
        const Eigen::MatrixXd q = random_orthogonal(p, rot);
        sigma = q * sigma * q.transpose();
        cov = q * cov * q.transpose();
    }
    Provenance prov{"empirical_covariance", describe(spec, p, n), spec.seed_base, trial};
    return PerturbedPair::make(SymMatrix(sigma), SymMatrix(cov), std::move(prov));
}

SymMatrix sample_goe(int p, std::uint64_t trial, std::uint64_t seed_base) {
    if (p < 1) throw std::invalid_argument("sample_goe: p must be positive");
    StreamRng rng(seed_base, trial, streams::goe);
    Eigen::MatrixXd g(p, p);
    for (int i = 0; i < p; ++i) {
        g(i, i) = std::sqrt(2.0) * rng.normal();
        for (int j = i + 1; j < p; ++j) {
            g(i, j) = rng.normal();
            g(j, i) = g(i, j);
        }
    }
    return SymMatrix(g);
}

PerturbedPair low_rank_plus_goe(const std::vector<double>& eigs_k, int p, double epsilon, std::uint64_t trial,
                                std::uint64_t seed_base) {
    const int k = static_cast<int>(eigs_k.size());
    if (k < 1 || k > p) throw std::invalid_argument("low_rank_plus_goe: need 1 <= k <= p");
    if (epsilon < 0.0) throw std::invalid_argument("low_rank_plus_goe: epsilon must be non-negative");
    Eigen::VectorXd d = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < k; ++i) {
        if (!(eigs_k[i] > 0.0) || (i > 0 && eigs_k[i] > eigs_k[i - 1]))
            throw std::invalid_argument("low_rank_plus_goe: eigenvalues must be positive and non-increasing");
        d(i) = eigs_k[i];
    }
    const SymMatrix sigma = SymMatrix::diagonal(d);
    const SymMatrix xi = sample_goe(p, trial, seed_base);
    std::ostringstream os;
    os << "k=" << k << " p=" << p << " epsilon=" << epsilon;
    return PerturbedPair::make(sigma, sigma + xi * epsilon, {"low_rank_goe", os.str(), seed_base, trial});
}

PerturbedPair spiked_covariance_sample(const KLSourceSpec& spec, int n, std::uint64_t trial) {
    if (spec.profile.kind != DecayProfile::Kind::spiked)
        throw std::invalid_argument("spiked_covariance_sample: profile must be spiked");
    if (!spec.law.sub_gaussian())
        throw std::invalid_argument("spiked_covariance_sample: coefficient law must be sub-Gaussian (gaussian or rademacher)");
    PerturbedPair pair = sample_empirical_covariance(spec, n, trial);
    pair.provenance.generator = "spiked_covariance";
    return pair;
}

}  // namespace eigenshift
