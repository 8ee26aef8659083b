#include "eigenshift/spectral_core.hpp"

#include <doctest.h>

#include <cmath>

using namespace eigenshift;

namespace {

SymMatrix running_example(double eps) {
    Eigen::Matrix2d m;
    m << 2.0, eps, eps, 1.0;
    return SymMatrix(m);
}

SymMatrix diag21() { return SymMatrix::diagonal(Eigen::Vector2d(2.0, 1.0)); }

}  // namespace

TEST_CASE("decompose: diagonal input keeps order and basis") {
    const SpectralModel m = decompose(diag21());
    CHECK(m.eigenvalues(0) == doctest::Approx(2.0));
    CHECK(m.eigenvalues(1) == doctest::Approx(1.0));
    CHECK((m.eigenvectors.cwiseAbs() - Eigen::Matrix2d::Identity()).norm() < 1e-14);
}

TEST_CASE("decompose: 2x2 closed form") {
    const SpectralModel m = decompose(running_example(0.1));
    const double root = std::sqrt(0.25 + 0.01);
    CHECK(m.eigenvalues(0) == doctest::Approx(1.5 + root).epsilon(1e-14));
    CHECK(m.eigenvalues(1) == doctest::Approx(1.5 - root).epsilon(1e-14));
    CHECK(m.eigenvalues(0) == doctest::Approx(2.009902).epsilon(1e-6));
}

TEST_CASE("decompose: identity reconstructs") {
    const SpectralModel m = decompose(SymMatrix::identity(3));
    const Eigen::MatrixXd rec = m.eigenvectors * m.eigenvalues.asDiagonal() * m.eigenvectors.transpose();
    CHECK((rec - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-14);
    CHECK(m.eigenvalues.isApprox(Eigen::Vector3d::Ones()));
}

TEST_CASE("decompose: descending order and orthonormal basis on a random matrix") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(7, 7);
    const SpectralModel m = decompose(SymMatrix(a + a.transpose()));
    for (int i = 1; i < 7; ++i) CHECK(m.eigenvalues(i - 1) >= m.eigenvalues(i));
    CHECK((m.eigenvectors.transpose() * m.eigenvectors - Eigen::MatrixXd::Identity(7, 7)).norm() < 1e-13);
}

TEST_CASE("SymMatrix symmetrizes its input") {
    Eigen::Matrix2d a;
    a << 1.0, 2.0, 4.0, 1.0;
    const SymMatrix s(a);
    CHECK(s(0, 1) == 3.0);
    CHECK(s(1, 0) == 3.0);
}

TEST_CASE("IndexSet parsing and set operations") {
    CHECK(IndexSet::parse("1..3") == IndexSet{1, 2, 3});
    CHECK(IndexSet::parse("4,1,4") == IndexSet{1, 4});
    CHECK(IndexSet::parse("2") == IndexSet{2});
    CHECK(IndexSet{1, 3}.complement(4) == IndexSet{2, 4});
    CHECK(IndexSet{2, 3, 4}.is_interval());
    CHECK_FALSE(IndexSet{1, 3}.is_interval());
    CHECK_THROWS_AS(IndexSet{0}.check_range(3), std::out_of_range);
    CHECK_THROWS_AS(IndexSet{4}.check_range(3), std::out_of_range);
    CHECK_THROWS(IndexSet::parse("a..b"));
}

TEST_CASE("projector examples") {
    const SymMatrix p1 = projector(decompose(diag21()), IndexSet{1});
    Eigen::Matrix2d e11 = Eigen::Matrix2d::Zero();
    e11(0, 0) = 1.0;
    CHECK((p1.matrix() - e11).norm() < 1e-15);

    const SymMatrix full = projector(decompose(SymMatrix::identity(2)), IndexSet{1, 2});
    CHECK((full.matrix() - Eigen::Matrix2d::Identity()).norm() < 1e-14);

    const SymMatrix ph = projector(decompose(running_example(0.1)), IndexSet{1});
    CHECK(ph.matrix().trace() == doctest::Approx(1.0));
    CHECK((ph.matrix() * ph.matrix() - ph.matrix()).norm() < 1e-14);
    CHECK((p1.matrix() * ph.matrix()).trace() == doctest::Approx(0.990290).epsilon(1e-6));
}

TEST_CASE("hs_distance_sq examples") {
    const SpectralModel m = decompose(diag21());
    CHECK(hs_distance_sq(m, m, IndexSet{1}) == 0.0);

    const SpectralModel swapped = decompose(SymMatrix::diagonal(Eigen::Vector2d(1.0, 2.0)));
    CHECK(hs_distance_sq(m, swapped, IndexSet{1}) == doctest::Approx(2.0));

    // 2 sin^2(theta) with tan(2 theta) = 0.2.
    const double expected = 1.0 - 1.0 / std::sqrt(1.04);
    const SpectralModel mh = decompose(running_example(0.1));
    CHECK(hs_distance_sq(m, mh, IndexSet{1}) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(hs_distance_sq(m, mh, IndexSet{1}) == doctest::Approx(0.019420).epsilon(1e-4));
    CHECK(hs_distance_sq_trace(m, mh, IndexSet{1}) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(hs_distance_sq_entrywise(m, mh, IndexSet{1}) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("hs_distance_sq routes agree and stay in [0, 2|I|]") {
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Random(6, 6);
        Eigen::MatrixXd b = a + 0.3 * Eigen::MatrixXd::Random(6, 6);
        const SpectralModel m = decompose(SymMatrix(a + a.transpose()));
        const SpectralModel mh = decompose(SymMatrix(b + b.transpose()));
        const IndexSet I{1, 3, 4};
        const double d = hs_distance_sq(m, mh, I);
        CHECK(d >= 0.0);
        CHECK(d <= 6.0);
        CHECK(std::abs(d - hs_distance_sq_entrywise(m, mh, I)) < 1e-10);
        CHECK(std::abs(hs_distance_sq_trace(m, mh, I) - hs_distance_sq_entrywise(m, mh, I)) < 1e-10);
    }
}

TEST_CASE("block_norms examples") {
    const SpectralModel m = decompose(diag21());
    const BlockNorms zero = block_norms(SymMatrix::zero(2), m, IndexSet{1}, IndexSet{2});
    CHECK(zero.op == 0.0);
    CHECK(zero.hs == 0.0);

    const SymMatrix e = running_example(0.1) - diag21();
    const BlockNorms n = block_norms(e, m, IndexSet{1}, IndexSet{2});
    CHECK(n.op == doctest::Approx(0.1));
    CHECK(n.hs == doctest::Approx(0.1));

    Eigen::MatrixXd r = Eigen::MatrixXd::Random(4, 4);
    const SymMatrix e4(r);
    const SpectralModel m4 = decompose(SymMatrix::diagonal(Eigen::Vector4d(4, 3, 2, 1)));
    const BlockNorms s = block_norms(e4, m4, IndexSet{2}, IndexSet{2});
    CHECK(s.op == doctest::Approx(s.hs));
}

TEST_CASE("block_norms: operator norm never exceeds Hilbert-Schmidt norm") {
    Eigen::MatrixXd r = Eigen::MatrixXd::Random(8, 8);
    const SymMatrix e(r);
    const SpectralModel m = decompose(SymMatrix::identity(8));
    const BlockNorms n = block_norms(e, m, IndexSet{1, 2, 3}, IndexSet{4, 5, 6, 7});
    CHECK(n.op <= n.hs + 1e-15);
    CHECK(n.op > 0.0);
}

TEST_CASE("matrix text format round-trips and rejects bad input") {
    const SymMatrix a = running_example(0.123456789012345678);
    const std::string path = "spectral_core_roundtrip.txt";
    write_matrix(a, path);
    const SymMatrix b = read_matrix(path);
    CHECK(a.matrix() == b.matrix());

    CHECK(parse_matrix("2\n1 0\n0 1\n").matrix() == Eigen::Matrix2d::Identity());
    CHECK_THROWS(parse_matrix("2\n1 0\n0\n"));
    CHECK_THROWS(parse_matrix("2\n1 0\n0 1 5\n"));
    CHECK_THROWS(parse_matrix("2\n1 2\n0 1\n"));
    CHECK_THROWS(read_matrix("does/not/exist.txt"));
}

TEST_CASE("same_level uses a relative tolerance") {
    CHECK(same_level(1.0, 1.0 + 1e-14));
    CHECK_FALSE(same_level(1.0, 1.0 + 1e-9));
    CHECK(same_level(1e-20, 1e-20 * (1 + 1e-14)));
}
