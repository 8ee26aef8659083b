#include "eigenshift/spectral_core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace eigenshift {

SymMatrix::SymMatrix(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols())
        throw std::invalid_argument("SymMatrix: matrix is not square");
    if (a.rows() < 1)
        throw std::invalid_argument("SymMatrix: dimension must be positive");
    m_ = (a + a.transpose()) * 0.5;
}

SymMatrix SymMatrix::zero(int p) { return SymMatrix(Eigen::MatrixXd::Zero(p, p)); }

SymMatrix SymMatrix::identity(int p) { return SymMatrix(Eigen::MatrixXd::Identity(p, p)); }

SymMatrix SymMatrix::diagonal(const Eigen::VectorXd& d) { return SymMatrix(Eigen::MatrixXd(d.asDiagonal())); }

double SymMatrix::max_abs() const { return m_.cwiseAbs().maxCoeff(); }

double SymMatrix::op_norm() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m_, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericalError("op_norm: eigensolver did not converge");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

SymMatrix SymMatrix::operator+(const SymMatrix& other) const { return SymMatrix(m_ + other.m_); }
SymMatrix SymMatrix::operator-(const SymMatrix& other) const { return SymMatrix(m_ - other.m_); }
SymMatrix SymMatrix::operator*(double s) const { return SymMatrix(m_ * s); }

// ---------------------------------------------------------------------------

IndexSet::IndexSet(std::initializer_list<int> indices) : IndexSet(std::vector<int>(indices)) {}

IndexSet::IndexSet(std::vector<int> indices) : idx_(std::move(indices)) {
    std::sort(idx_.begin(), idx_.end());
    idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
    if (!idx_.empty() && idx_.front() < 1)
        throw std::out_of_range("IndexSet: indices are 1-based, got " + std::to_string(idx_.front()));
}

IndexSet IndexSet::range(int first, int last) {
    std::vector<int> v;
    for (int i = first; i <= last; ++i) v.push_back(i);
    return IndexSet(std::move(v));
}

IndexSet IndexSet::parse(const std::string& text) {
    auto dots = text.find("..");
    try {
        if (dots != std::string::npos)
            return range(std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2)));
        std::vector<int> v;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) v.push_back(std::stoi(item));
        return IndexSet(std::move(v));
    } catch (const std::logic_error&) {
        throw std::invalid_argument("IndexSet: cannot parse '" + text + "'");
    }
}

bool IndexSet::contains(int i) const { return std::binary_search(idx_.begin(), idx_.end(), i); }

IndexSet IndexSet::complement(int p) const {
    std::vector<int> v;
    for (int i = 1; i <= p; ++i)
        if (!contains(i)) v.push_back(i);
    return IndexSet(std::move(v));
}

IndexSet IndexSet::united(const IndexSet& other) const {
    std::vector<int> v = idx_;
    v.insert(v.end(), other.idx_.begin(), other.idx_.end());
    return IndexSet(std::move(v));
}

bool IndexSet::is_interval() const { return idx_.empty() || idx_.back() - idx_.front() + 1 == size(); }

void IndexSet::check_range(int p) const {
    if (!idx_.empty() && idx_.back() > p)
        throw std::out_of_range("IndexSet: index " + std::to_string(idx_.back()) + " exceeds dimension " +
                                std::to_string(p));
}

std::string IndexSet::to_string() const {
    std::string s = "{";
    for (std::size_t k = 0; k < idx_.size(); ++k) {
        if (k) s += ",";
        s += std::to_string(idx_[k]);
    }
    return s + "}";
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd SpectralModel::basis(const IndexSet& I) const {
    I.check_range(dim());
    Eigen::MatrixXd b(dim(), I.size());
    int c = 0;
    for (int i : I) b.col(c++) = eigenvectors.col(i - 1);
    return b;
}

SpectralModel decompose(const SymMatrix& a, const std::string& name) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.matrix());
    if (solver.info() != Eigen::Success)
        throw NumericalError("decompose: eigensolver did not converge for " + name);

    const int p = a.dim();
    // Eigen returns ascending order; reverse, then stable-sort descending so
    // ties keep a deterministic order.
    std::vector<int> order(p);
    for (int k = 0; k < p; ++k) order[k] = p - 1 - k;
    const auto& vals = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](int l, int r) { return vals(l) > vals(r); });

    SpectralModel model;
    model.eigenvalues.resize(p);
    model.eigenvectors.resize(p, p);
    for (int k = 0; k < p; ++k) {
        model.eigenvalues(k) = vals(order[k]);
        model.eigenvectors.col(k) = solver.eigenvectors().col(order[k]);
    }
    return model;
}

SymMatrix projector(const SpectralModel& model, const IndexSet& I) {
    Eigen::MatrixXd b = model.basis(I);
    return SymMatrix(b * b.transpose());
}

namespace {

void check_same_dim(const SpectralModel& a, const SpectralModel& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                                    std::to_string(b.dim()));
}

}  // namespace

double hs_distance_sq(const SpectralModel& model, const SpectralModel& model_hat, const IndexSet& I) {
    check_same_dim(model, model_hat);
    const IndexSet Ic = I.complement(model.dim());
    if (Ic.empty() || I.empty()) {
        I.check_range(model.dim());
        return 0.0;
    }
    const double v = 2.0 * (model.basis(Ic).transpose() * model_hat.basis(I)).squaredNorm();
    return std::clamp(v, 0.0, 2.0 * I.size());
}

double hs_distance_sq_trace(const SpectralModel& model, const SpectralModel& model_hat, const IndexSet& I) {
    check_same_dim(model, model_hat);
    const double overlap = (model.basis(I).transpose() * model_hat.basis(I)).squaredNorm();
    return 2.0 * (I.size() - overlap);
}

double hs_distance_sq_entrywise(const SpectralModel& model, const SpectralModel& model_hat, const IndexSet& I) {
    check_same_dim(model, model_hat);
    return (projector(model_hat, I).matrix() - projector(model, I).matrix()).squaredNorm();
}

Eigen::MatrixXd coefficients(const SymMatrix& e, const SpectralModel& model) {
    if (e.dim() != model.dim())
        throw std::invalid_argument("coefficients: dimension mismatch");
    Eigen::MatrixXd c = model.eigenvectors.transpose() * e.matrix() * model.eigenvectors;
    return (c + c.transpose()) * 0.5;
}

double spectral_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() == 1 || m.cols() == 1) return m.norm();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return std::min(svd.singularValues()(0), m.norm());
}

BlockNorms block_norms(const Eigen::MatrixXd& coeffs, const IndexSet& R, const IndexSet& S) {
    const int p = static_cast<int>(coeffs.rows());
    R.check_range(p);
    S.check_range(p);
    Eigen::MatrixXd block(R.size(), S.size());
    int a = 0;
    for (int r : R) {
        int b = 0;
        for (int s : S) block(a, b++) = coeffs(r - 1, s - 1);
        ++a;
    }
    return {spectral_norm(block), block.norm()};
}

BlockNorms block_norms(const SymMatrix& e, const SpectralModel& model, const IndexSet& R, const IndexSet& S) {
    return block_norms(coefficients(e, model), R, S);
}

bool same_level(double a, double b) {
    return std::abs(a - b) <= kTieTolerance * std::max(std::abs(a), std::abs(b));
}

}  // namespace eigenshift
