#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace eigenshift {

/// Raised when the eigensolver does not converge.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense real symmetric matrix. Symmetry is exact: the input is replaced by
/// (A + A^T) / 2 at construction.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(const Eigen::MatrixXd& a);

    static SymMatrix zero(int p);
    static SymMatrix identity(int p);
    static SymMatrix diagonal(const Eigen::VectorXd& d);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& matrix() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }

    double max_abs() const;
    double hs_norm() const { return m_.norm(); }
    double op_norm() const;

    SymMatrix operator+(const SymMatrix& other) const;
    SymMatrix operator-(const SymMatrix& other) const;
    SymMatrix operator*(double s) const;

private:
    Eigen::MatrixXd m_;
};

/// Sorted set of 1-based indices.
class IndexSet {
public:
    IndexSet() = default;
    IndexSet(std::initializer_list<int> indices);
    explicit IndexSet(std::vector<int> indices);

    /// {first, ..., last}, inclusive.
    static IndexSet range(int first, int last);
    /// Parses "1..k", "3" or "1,4,7".
    static IndexSet parse(const std::string& text);

    const std::vector<int>& indices() const { return idx_; }
    int size() const { return static_cast<int>(idx_.size()); }
    bool empty() const { return idx_.empty(); }
    bool contains(int i) const;
    int front() const { return idx_.front(); }
    int back() const { return idx_.back(); }

    /// {1..p} minus this set.
    IndexSet complement(int p) const;
    IndexSet united(const IndexSet& other) const;
    /// Contiguous run of integers.
    bool is_interval() const;

    /// Throws std::out_of_range unless every index lies in {1..p}.
    void check_range(int p) const;

    auto begin() const { return idx_.begin(); }
    auto end() const { return idx_.end(); }

    bool operator==(const IndexSet&) const = default;

    std::string to_string() const;

private:
    std::vector<int> idx_;
};

/// Eigenvalues in descending order and matching orthonormal eigenvector
/// columns.
struct SpectralModel {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;

    int dim() const { return static_cast<int>(eigenvalues.size()); }
    double eigenvalue(int i) const { return eigenvalues(i - 1); }
    /// p x |I| matrix of the eigenvectors indexed by I.
    Eigen::MatrixXd basis(const IndexSet& I) const;
};

SpectralModel decompose(const SymMatrix& a, const std::string& name = "matrix");

SymMatrix projector(const SpectralModel& model, const IndexSet& I);

/// Squared Hilbert-Schmidt distance ||P_hat_I - P_I||_2^2, evaluated as
/// 2 ||P_{I^c} P_hat_I||_2^2 = 2 (|I| - tr(P_I P_hat_I)).
double hs_distance_sq(const SpectralModel& model, const SpectralModel& model_hat, const IndexSet& I);
/// 2 (|I| - tr(P_I P_hat_I)) taken literally.
double hs_distance_sq_trace(const SpectralModel& model, const SpectralModel& model_hat, const IndexSet& I);
/// Sum of squared entries of P_hat_I - P_I.
double hs_distance_sq_entrywise(const SpectralModel& model, const SpectralModel& model_hat, const IndexSet& I);

/// Coefficients <u_i, E u_j> of E in the eigenbasis of `model`.
Eigen::MatrixXd coefficients(const SymMatrix& e, const SpectralModel& model);

struct BlockNorms {
    double op = 0.0;
    double hs = 0.0;
};

/// Norms of P_R E P_S, computed on the |R| x |S| coefficient block.
BlockNorms block_norms(const SymMatrix& e, const SpectralModel& model, const IndexSet& R, const IndexSet& S);
/// Same, from a precomputed coefficient matrix.
BlockNorms block_norms(const Eigen::MatrixXd& coeffs, const IndexSet& R, const IndexSet& S);

/// Largest singular value, exact for a single row or column.
double spectral_norm(const Eigen::MatrixXd& m);

/// Relative tie tolerance used to group equal eigenvalues.
inline constexpr double kTieTolerance = 1e-12;
bool same_level(double a, double b);

/// Plain-text matrix file: first line p, then p rows of p numbers.
SymMatrix read_matrix(const std::string& path);
SymMatrix parse_matrix(const std::string& text, const std::string& origin = "<string>");
void write_matrix(const SymMatrix& a, const std::string& path);

}  // namespace eigenshift
