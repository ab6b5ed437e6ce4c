#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bullwhip/matrix.hpp"
#include "test_util.hpp"

using bullwhip::Matrix;
using bullwhip::cholesky;
using bullwhip::inverse_pd;
using bullwhip::solve_pd;
using bullwhip::sym_eigen;

namespace {

double residual_norm(const Matrix& a, const bullwhip::SymEigen& e) {
    // ||A V - V diag(values)||_max
    Matrix av = a * e.vectors;
    Matrix vl = e.vectors;
    for (std::size_t j = 0; j < vl.cols(); ++j)
        for (std::size_t i = 0; i < vl.rows(); ++i) vl(i, j) *= e.values[j];
    return (av - vl).max_abs();
}

double orthonormality_defect(const Matrix& v) {
    return (v.transpose() * v - Matrix::identity(v.cols())).max_abs();
}

}  // namespace

TEST_CASE("sym_eigen on a diagonal matrix returns sorted eigenvalues") {
    const Matrix a{{3, 0, 0}, {0, 1, 0}, {0, 0, 2}};
    const auto e = sym_eigen(a);
    REQUIRE(e.values.size() == 3);
    CHECK(e.values[0] == Catch::Approx(1.0).margin(1e-14));
    CHECK(e.values[1] == Catch::Approx(2.0).margin(1e-14));
    CHECK(e.values[2] == Catch::Approx(3.0).margin(1e-14));
    // Eigenvectors are signed unit coordinate vectors here.
    CHECK(std::abs(e.vectors(1, 0)) == Catch::Approx(1.0).margin(1e-12));
    CHECK(std::abs(e.vectors(2, 1)) == Catch::Approx(1.0).margin(1e-12));
    CHECK(std::abs(e.vectors(0, 2)) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("sym_eigen on the identity") {
    const auto e = sym_eigen(Matrix::identity(4));
    for (double v : e.values) CHECK(v == Catch::Approx(1.0).margin(1e-14));
    CHECK(orthonormality_defect(e.vectors) < 1e-12);
}

TEST_CASE("sym_eigen on the 2x2 exchange matrix") {
    // Characteristic polynomial x^2 - 1: eigenvalues -1 and +1.
    const Matrix a{{0, 1}, {1, 0}};
    const auto e = sym_eigen(a);
    CHECK(e.values[0] == Catch::Approx(-1.0).margin(1e-14));
    CHECK(e.values[1] == Catch::Approx(1.0).margin(1e-14));
    CHECK(residual_norm(a, e) < 1e-12);
}

TEST_CASE("sym_eigen invariants on random symmetric matrices") {
    std::mt19937_64 rng(12345);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng() % 15);  // up to 16
        const Matrix a = testutil::random_symmetric(rng, n, 10.0);
        const auto e = sym_eigen(a);

        CHECK(orthonormality_defect(e.vectors) < 1e-10);
        CHECK(residual_norm(a, e) < 1e-8 * (1.0 + a.max_abs()));

        double sum = 0.0;
        for (double v : e.values) sum += v;
        CHECK(sum == Catch::Approx(bullwhip::trace(a)).margin(1e-10 * (1.0 + a.max_abs())));

        for (std::size_t i = 0; i + 1 < e.values.size(); ++i)
            CHECK(e.values[i] <= e.values[i + 1]);
    }
}

TEST_CASE("sym_eigen rejects bad input") {
    CHECK_THROWS_AS(sym_eigen(Matrix(2, 3)), std::invalid_argument);
    CHECK_THROWS_AS(sym_eigen(Matrix{{0, 1}, {2, 0}}), std::invalid_argument);
    Matrix nan2 = Matrix::identity(2);
    nan2(0, 0) = std::nan("");
    CHECK_THROWS_AS(sym_eigen(nan2), std::invalid_argument);
}

TEST_CASE("cholesky of a diagonal matrix") {
    const auto l = cholesky(Matrix{{4, 0}, {0, 9}});
    REQUIRE(l.has_value());
    CHECK((*l)(0, 0) == Catch::Approx(2.0));
    CHECK((*l)(1, 1) == Catch::Approx(3.0));
    CHECK((*l)(0, 1) == 0.0);
}

TEST_CASE("cholesky reports indefiniteness as a value") {
    CHECK_FALSE(cholesky(Matrix{{-1, 0}, {0, 1}}).has_value());
    // A shift can rescue it.
    const auto l = cholesky(Matrix{{-1, 0}, {0, 1}}, 2.0);
    REQUIRE(l.has_value());
    CHECK((*l)(0, 0) == Catch::Approx(1.0));
    CHECK((*l)(1, 1) == Catch::Approx(std::sqrt(3.0)));
}

TEST_CASE("cholesky agrees with sym_eigen on definiteness") {
    std::mt19937_64 rng(777);
    int pd_seen = 0, indef_seen = 0;
    for (int rep = 0; rep < 60; ++rep) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng() % 7);
        Matrix a = testutil::random_symmetric(rng, n);
        if (rep % 2 == 0) a += Matrix::identity(n) * (1.0 + static_cast<double>(n));
        const auto e = sym_eigen(a);
        const bool pd_by_eigen = e.values.front() > 1e-12 * (1.0 + a.max_abs());
        const bool indef_by_eigen = e.values.front() < -1e-12 * (1.0 + a.max_abs());
        const bool chol_ok = cholesky(a).has_value();
        // Skip the razor-thin numerically singular band.
        if (pd_by_eigen) {
            CHECK(chol_ok);
            ++pd_seen;
        } else if (indef_by_eigen) {
            CHECK_FALSE(chol_ok);
            ++indef_seen;
        }
    }
    CHECK(pd_seen > 10);
    CHECK(indef_seen > 10);
}

TEST_CASE("solve_pd round trips") {
    SECTION("identity") {
        const Matrix rhs{{1}, {2}, {3}};
        const Matrix x = solve_pd(Matrix::identity(3), rhs);
        CHECK((x - rhs).max_abs() == 0.0);
    }
    SECTION("diagonal") {
        const Matrix x = solve_pd(Matrix{{2, 0}, {0, 4}}, Matrix{{2}, {8}});
        CHECK(x(0, 0) == Catch::Approx(1.0));
        CHECK(x(1, 0) == Catch::Approx(2.0));
    }
    SECTION("random PD with known solution") {
        std::mt19937_64 rng(2024);
        for (int rep = 0; rep < 20; ++rep) {
            const Matrix a = testutil::random_pd(rng, 5);
            Matrix xstar(5, 1);
            for (std::size_t i = 0; i < 5; ++i) xstar(i, 0) = testutil::uniform(rng, -3.0, 3.0);
            const Matrix x = solve_pd(a, a * xstar);
            CHECK((x - xstar).max_abs() < 1e-10);
        }
    }
    SECTION("not PD throws") {
        CHECK_THROWS_AS(solve_pd(Matrix{{-1, 0}, {0, 1}}, Matrix(2, 1)), std::invalid_argument);
    }
}

TEST_CASE("inverse_pd inverts") {
    std::mt19937_64 rng(99);
    const Matrix a = testutil::random_pd(rng, 6);
    const Matrix p = inverse_pd(a);
    CHECK((a * p - Matrix::identity(6)).max_abs() < 1e-10);
    CHECK((p * a - Matrix::identity(6)).max_abs() < 1e-10);
}

TEST_CASE("diff_of_products keeps cancelling products accurate") {
    // (2^27+1)^2 - 2^27*(2^27+2) = 1 exactly; all four factors are exact
    // doubles and the naive expression rounds the difference to 0.
    const double b = 134217728.0;  // 2^27
    const double x = b + 1.0;
    CHECK(x * x - b * (b + 2.0) == 0.0);
    CHECK(bullwhip::diff_of_products(x, x, b, b + 2.0) == 1.0);
}
