#include <catch_amalgamated.hpp>

#include <cmath>

#include "edmcoh/linalg.hpp"
#include "edmcoh/matrix.hpp"
#include "edmcoh/rng.hpp"

using namespace edmc;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(i, j) = 2.0 * uniform01(seed, i * cols + j) - 1.0;
    return m;
}

Matrix line_edm() {
    Matrix m(3, 3);
    m(0, 1) = m(1, 0) = 1.0;
    m(0, 2) = m(2, 0) = 4.0;
    m(1, 2) = m(2, 1) = 1.0;
    return m;
}

}  // namespace

TEST_CASE("thin QR of a single column") {
    Matrix m(2, 1);
    m(0, 0) = 3.0;
    m(1, 0) = 4.0;
    const QrThin qr = thin_qr(m);
    CHECK(qr.v(0, 0) == Catch::Approx(0.6).margin(1e-14));
    CHECK(qr.v(1, 0) == Catch::Approx(0.8).margin(1e-14));
    CHECK(qr.a(0, 0) == Catch::Approx(5.0).margin(1e-14));
    CHECK_FALSE(qr.rank_deficient);
}

TEST_CASE("thin QR of the identity is the identity") {
    const QrThin qr = thin_qr(Matrix::identity(3));
    CHECK((qr.v - Matrix::identity(3)).max_abs() <= 1e-14);
    CHECK((qr.a - Matrix::identity(3)).max_abs() <= 1e-14);
}

TEST_CASE("thin QR invariants on a random tall matrix") {
    const Matrix m = random_matrix(20, 5, 31);
    const QrThin qr = thin_qr(m);
    CHECK((qr.v * qr.a - m).max_abs() <= 1e-12);
    CHECK((at_times_b(qr.v, qr.v) - Matrix::identity(5)).max_abs() <= 1e-12);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(qr.a(i, i) >= 0.0);
        for (std::size_t j = 0; j < i; ++j) CHECK(qr.a(i, j) == 0.0);
    }
}

TEST_CASE("thin QR flags rank deficiency") {
    Matrix m = random_matrix(10, 3, 8);
    for (std::size_t i = 0; i < 10; ++i) m(i, 2) = m(i, 0) + m(i, 1);
    CHECK(thin_qr(m).rank_deficient);
    CHECK_THROWS_AS(thin_qr(random_matrix(2, 5, 1)), std::invalid_argument);
}

TEST_CASE("Jacobi eigendecomposition of a diagonal matrix") {
    Matrix m(2, 2);
    m(0, 0) = 2.0;
    m(1, 1) = 1.0;
    const SymEig e = eig_sym(m);
    CHECK(e.eigvals[0] == Catch::Approx(2.0).margin(1e-14));
    CHECK(e.eigvals[1] == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("Jacobi resolves tiny off-diagonal couplings") {
    const double delta = 1e-8;
    Matrix m(2, 2);
    m(0, 1) = m(1, 0) = delta;
    const SymEig e = eig_sym(m);
    CHECK(std::abs(e.eigvals[0]) == Catch::Approx(delta).epsilon(1e-10));
    CHECK(std::abs(e.eigvals[1]) == Catch::Approx(delta).epsilon(1e-10));
    CHECK(e.eigvals[0] * e.eigvals[1] < 0.0);
}

TEST_CASE("Jacobi reconstructs a random symmetric matrix") {
    Matrix s(8, 8);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = i; j < 8; ++j)
            s(i, j) = s(j, i) = 2.0 * uniform01(55, i * 8 + j) - 1.0;
    const SymEig e = eig_sym(s);
    Matrix lam(8, 8);
    for (std::size_t i = 0; i < 8; ++i) lam(i, i) = e.eigvals[i];
    CHECK((e.eigvecs * lam * e.eigvecs.transposed() - s).max_abs() <= 1e-10);
    CHECK((at_times_b(e.eigvecs, e.eigvecs) - Matrix::identity(8)).max_abs() <= 1e-12);
}

TEST_CASE("Jacobi spectrum of the expected Gramian at uniform moments, d = 2") {
    // [[1,0,0,2/3],[0,1/3,0,0],[0,0,1/3,0],[2/3,0,0,28/45]]
    Matrix r(4, 4);
    r(0, 0) = 1.0;
    r(1, 1) = r(2, 2) = 1.0 / 3.0;
    r(0, 3) = r(3, 0) = 2.0 / 3.0;
    r(3, 3) = 28.0 / 45.0;
    const SymEig e = eig_sym(r);
    const double s = std::sqrt(3889.0);
    CHECK(e.eigvals[0] == Catch::Approx((73.0 + s) / 90.0).margin(1e-12));
    CHECK(e.eigvals[1] == Catch::Approx(1.0 / 3.0).margin(1e-12));
    CHECK(e.eigvals[2] == Catch::Approx(1.0 / 3.0).margin(1e-12));
    CHECK(e.eigvals[3] == Catch::Approx((73.0 - s) / 90.0).margin(1e-12));
}

TEST_CASE("truncated symmetric SVD of the line-cloud squared distances") {
    const TruncatedSymSvd svd = svd_sym_truncated(line_edm(), 3);
    CHECK(svd.sigma[0] == Catch::Approx(4.449489742783178).margin(1e-10));
    CHECK(svd.sigma[1] == Catch::Approx(4.0).margin(1e-10));
    CHECK(svd.sigma[2] == Catch::Approx(0.449489742783178).margin(1e-10));
    CHECK(svd.signs[0] == 1);
    CHECK(svd.signs[1] == -1);
    CHECK(svd.signs[2] == -1);
    // U is orthonormal
    CHECK((at_times_b(svd.u, svd.u) - Matrix::identity(3)).max_abs() <= 1e-10);
}

TEST_CASE("truncated symmetric SVD past the true rank returns zero tail") {
    Matrix rank1(5, 5);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            rank1(i, j) = (static_cast<double>(i) + 1.0) * (static_cast<double>(j) + 1.0);
    const TruncatedSymSvd svd = svd_sym_truncated(rank1, 2, 1e-8);
    CHECK(svd.sigma[0] == Catch::Approx(55.0).margin(1e-8));
    CHECK(svd.sigma[1] <= 1e-8);
}

TEST_CASE("truncated symmetric SVD of the identity") {
    const TruncatedSymSvd svd = svd_sym_truncated(Matrix::identity(4), 2);
    CHECK(svd.sigma[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(svd.sigma[1] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("general truncated SVD matches the symmetric one on a symmetric input") {
    const Matrix m = line_edm();
    const TruncatedSvd svd = svd_truncated(m, 3);
    CHECK(svd.sigma[0] == Catch::Approx(4.449489742783178).margin(1e-8));
    CHECK(svd.sigma[1] == Catch::Approx(4.0).margin(1e-8));
    CHECK(svd.sigma[2] == Catch::Approx(0.449489742783178).margin(1e-8));
    // U sigma V' reconstructs
    Matrix rec(3, 3);
    for (std::size_t l = 0; l < 3; ++l)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                rec(i, j) += svd.sigma[l] * svd.u(i, l) * svd.v(j, l);
    CHECK((rec - m).max_abs() <= 1e-8);
}

TEST_CASE("cubic solver: triple root") {
    const auto r = cubic_real_roots({1.0, -3.0, 3.0, -1.0});
    for (double x : r) CHECK(x == Catch::Approx(1.0).margin(1e-7));
}

TEST_CASE("cubic solver: characteristic cubic of the uniform d = 2 Gramian") {
    // coefficients for m2 = 1/3, m3 = 0, m4 = 1/5, d = 2
    const auto r = cubic_real_roots({8.0 / 135.0, -97.0 / 135.0, 88.0 / 45.0, -1.0});
    const double s = std::sqrt(3889.0);
    CHECK(r[0] == Catch::Approx((73.0 - s) / 90.0).margin(1e-12));
    CHECK(r[1] == Catch::Approx(1.0 / 3.0).margin(1e-12));
    CHECK(r[2] == Catch::Approx((73.0 + s) / 90.0).margin(1e-12));
}

TEST_CASE("cubic solver: repeated zero root") {
    const auto r = cubic_real_roots({0.0, 0.0, 1.0, -1.0});
    CHECK(r[0] == Catch::Approx(0.0).margin(1e-12));
    CHECK(r[1] == Catch::Approx(0.0).margin(1e-12));
    CHECK(r[2] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("cubic solver rejects complex root pairs") {
    // -x^3 + x + 1 = 0 has a single real root
    CHECK_THROWS_AS(cubic_real_roots({1.0, 1.0, 0.0, -1.0}), std::domain_error);
    CHECK_THROWS_AS(cubic_real_roots({1.0, 1.0, 1.0, 0.0}), std::invalid_argument);
}
