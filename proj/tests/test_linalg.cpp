#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "morphrom/errors.hpp"
#include "morphrom/linalg.hpp"
#include "morphrom/util.hpp"

using namespace morphrom;

namespace {

Matrix random_matrix(int r, int c, std::mt19937_64& rng) {
    Matrix m(r, c);
    for (double& v : m.a) v = 2 * u01(rng) - 1;
    return m;
}

Matrix random_symmetric(int n, std::mt19937_64& rng) {
    Matrix m(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i) {
            double v = 2 * u01(rng) - 1;
            m(i, j) = v;
            m(j, i) = v;
        }
    return m;
}

// Closed-form eigenvalues of a symmetric 3x3 matrix (trigonometric form of
// the characteristic cubic), descending. Independent of the Jacobi code.
std::array<double, 3> eig3_ref(const Matrix& a) {
    double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    double q = (a(0, 0) + a(1, 1) + a(2, 2)) / 3.0;
    if (p1 == 0.0) {
        std::array<double, 3> d{a(0, 0), a(1, 1), a(2, 2)};
        std::sort(d.begin(), d.end(), std::greater<>());
        return d;
    }
    double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
    double p = std::sqrt(p2 / 6.0);
    Matrix b(3, 3);
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) b(i, j) = (a(i, j) - (i == j ? q : 0.0)) / p;
    double detb = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                  b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                  b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    double r = std::clamp(detb / 2.0, -1.0, 1.0);
    double phi = std::acos(r) / 3.0;
    double l1 = q + 2.0 * p * std::cos(phi);
    double l3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
    return {l1, 3.0 * q - l1 - l3, l3};
}

double frob2(const Matrix& m) {
    double s = 0.0;
    for (double v : m.a) s += v * v;
    return s;
}

}  // namespace

TEST_CASE("dot, norm2 and identity") {
    std::vector<double> x{1, 2, 3}, y{4, -5, 6};
    CHECK(dot(x, y) == doctest::Approx(12.0).epsilon(1e-15));
    CHECK(norm2(x) == doctest::Approx(std::sqrt(14.0)).epsilon(1e-15));
    Matrix id = Matrix::identity(3);
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) CHECK(id(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("matvec and matvec_t against explicit loops") {
    std::mt19937_64 rng(5);
    Matrix a = random_matrix(7, 4, rng);
    std::vector<double> x(4), z(7);
    for (auto& v : x) v = 2 * u01(rng) - 1;
    for (auto& v : z) v = 2 * u01(rng) - 1;
    auto ax = matvec(a, x);
    auto atz = matvec_t(a, z);
    REQUIRE(ax.size() == 7);
    REQUIRE(atz.size() == 4);
    for (int i = 0; i < 7; ++i) {
        double s = 0;
        for (int j = 0; j < 4; ++j) s += a(i, j) * x[static_cast<std::size_t>(j)];
        CHECK(ax[static_cast<std::size_t>(i)] == doctest::Approx(s).epsilon(1e-14));
    }
    for (int j = 0; j < 4; ++j) {
        double s = 0;
        for (int i = 0; i < 7; ++i) s += a(i, j) * z[static_cast<std::size_t>(i)];
        CHECK(atz[static_cast<std::size_t>(j)] == doctest::Approx(s).epsilon(1e-14));
    }
}

TEST_CASE("gram matches the triple loop and is symmetric") {
    std::mt19937_64 rng(9);
    Matrix a = random_matrix(9, 5, rng);
    Matrix g = gram(a);
    REQUIRE(g.rows == 5);
    REQUIRE(g.cols == 5);
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 5; ++i) {
            double s = 0;
            for (int k = 0; k < 9; ++k) s += a(k, i) * a(k, j);
            CHECK(g(i, j) == doctest::Approx(s).epsilon(1e-13));
            CHECK(g(i, j) == g(j, i));
        }
}

TEST_CASE("jacobi_eigh solves the 2x2 case exactly") {
    Matrix a(2, 2);
    a(0, 0) = 2;
    a(0, 1) = 1;
    a(1, 0) = 1;
    a(1, 1) = 2;
    EigResult e = jacobi_eigh(a);
    REQUIRE(e.values.size() == 2);
    CHECK(e.values[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-14));
    double inv = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(std::abs(e.vectors(0, 0)) - inv) <= 1e-12);
    CHECK(std::abs(std::abs(e.vectors(1, 0)) - inv) <= 1e-12);
    CHECK(std::abs(e.vectors(0, 0) - e.vectors(1, 0)) <= 1e-12);  // same sign for (1,1)
}

TEST_CASE("jacobi_eigh matches the closed-form 3x3 eigenvalues") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix a = random_symmetric(3, rng);
        EigResult e = jacobi_eigh(a);
        auto ref = eig3_ref(a);
        REQUIRE(e.values.size() == 3);
        for (int k = 0; k < 3; ++k)
            CHECK(e.values[static_cast<std::size_t>(k)] ==
                  doctest::Approx(ref[static_cast<std::size_t>(k)]).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("jacobi_eigh eigenpairs satisfy A v = lambda v with orthonormal v") {
    std::mt19937_64 rng(17);
    Matrix a = random_symmetric(12, rng);
    EigResult e = jacobi_eigh(a);
    REQUIRE(static_cast<int>(e.values.size()) == 12);
    for (std::size_t k = 1; k < e.values.size(); ++k) CHECK(e.values[k - 1] >= e.values[k]);
    double tr = 0.0, sum = 0.0;
    for (int i = 0; i < 12; ++i) tr += a(i, i);
    for (double v : e.values) sum += v;
    CHECK(sum == doctest::Approx(tr).epsilon(1e-12));
    for (int k = 0; k < 12; ++k) {
        auto av = matvec(a, e.vectors.col_span(k));
        for (int i = 0; i < 12; ++i)
            CHECK(std::abs(av[static_cast<std::size_t>(i)] -
                           e.values[static_cast<std::size_t>(k)] * e.vectors(i, k)) <= 1e-10);
        for (int l = 0; l <= k; ++l) {
            double d = dot(e.vectors.col_span(k), e.vectors.col_span(l));
            CHECK(std::abs(d - (k == l ? 1.0 : 0.0)) <= 1e-11);
        }
    }
}

TEST_CASE("svd of a diagonal matrix returns its entries sorted") {
    Matrix a(4, 3);
    a(0, 0) = 3.0;
    a(1, 1) = 5.0;
    a(2, 2) = 1.0;
    SvdResult s = one_sided_jacobi_svd(a);
    REQUIRE(s.sigma.size() == 3);
    CHECK(s.sigma[0] == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(s.sigma[1] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(s.sigma[2] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(std::abs(s.u(1, 0)) - 1.0) <= 1e-13);
    CHECK(std::abs(std::abs(s.u(0, 1)) - 1.0) <= 1e-13);
    CHECK(std::abs(std::abs(s.u(2, 2)) - 1.0) <= 1e-13);
}

TEST_CASE("svd of the all-ones 2x2 matrix finds sigma (2, 0) and a dead direction") {
    Matrix a(2, 2);
    a.a = {1, 1, 1, 1};
    SvdResult s = one_sided_jacobi_svd(a);
    REQUIRE(s.sigma.size() == 2);
    CHECK(s.sigma[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::abs(s.sigma[1]) <= 1e-14);
    double inv = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(std::abs(s.u(0, 0)) - inv) <= 1e-13);
    CHECK(std::abs(std::abs(s.u(1, 0)) - inv) <= 1e-13);
    // The rank-deficient direction is reported as a zero column, never a
    // fabricated unit vector.
    CHECK(s.u(0, 1) == 0.0);
    CHECK(s.u(1, 1) == 0.0);
}

TEST_CASE("svd of a zero matrix keeps no pairs") {
    Matrix a(5, 3);
    SvdResult s = one_sided_jacobi_svd(a);
    CHECK(s.sigma.empty());
    CHECK(s.u.cols == 0);
}

TEST_CASE("svd left vectors diagonalize A A^T and capture the energy") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        int m = 6 + static_cast<int>(u01(rng) * 20);
        int n = 2 + static_cast<int>(u01(rng) * 6);
        Matrix a = random_matrix(m, n, rng);
        SvdResult s = one_sided_jacobi_svd(a);
        REQUIRE(static_cast<int>(s.sigma.size()) == std::min(m, n));
        double fro = 0.0;
        for (double v : s.sigma) fro += v * v;
        CHECK(fro == doctest::Approx(frob2(a)).epsilon(1e-12));
        for (std::size_t k = 1; k < s.sigma.size(); ++k) CHECK(s.sigma[k - 1] >= s.sigma[k]);
        for (int k = 0; k < s.u.cols; ++k) {
            // A (A^T u_k) = sigma_k^2 u_k
            auto atu = matvec_t(a, s.u.col_span(k));
            auto aatu = matvec(a, atu);
            double s2 = s.sigma[static_cast<std::size_t>(k)] * s.sigma[static_cast<std::size_t>(k)];
            for (int i = 0; i < m; ++i)
                CHECK(std::abs(aatu[static_cast<std::size_t>(i)] - s2 * s.u(i, k)) <=
                      1e-9 * std::max(1.0, s2));
            for (int l = 0; l <= k; ++l) {
                double d = dot(s.u.col_span(k), s.u.col_span(l));
                CHECK(std::abs(d - (k == l ? 1.0 : 0.0)) <= 1e-10);
            }
        }
    }
}

TEST_CASE("svd singular values match jacobi_eigh of the gram matrix") {
    std::mt19937_64 rng(25);
    Matrix a = random_matrix(30, 8, rng);
    SvdResult s = one_sided_jacobi_svd(a);
    EigResult e = jacobi_eigh(gram(a));
    REQUIRE(s.sigma.size() == 8);
    for (int k = 0; k < 8; ++k) {
        double lam = std::max(0.0, e.values[static_cast<std::size_t>(k)]);
        CHECK(s.sigma[static_cast<std::size_t>(k)] ==
              doctest::Approx(std::sqrt(lam)).epsilon(1e-10));
    }
}

TEST_CASE("solve_spd solves well-conditioned systems to round-off") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 2 + static_cast<int>(u01(rng) * 10);
        Matrix b = random_matrix(n, n, rng);
        Matrix a = gram(b);
        for (int i = 0; i < n; ++i) a(i, i) += 1.0;
        std::vector<double> x_true(static_cast<std::size_t>(n));
        for (auto& v : x_true) v = 2 * u01(rng) - 1;
        auto rhs = matvec(a, x_true);
        auto x = solve_spd(a, rhs);
        REQUIRE(x.size() == x_true.size());
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i] - x_true[i]) <= 1e-10);
    }
}

TEST_CASE("solve_spd 2x2 closed form") {
    Matrix a(2, 2);
    a(0, 0) = 4;
    a(0, 1) = 1;
    a(1, 0) = 1;
    a(1, 1) = 3;
    auto x = solve_spd(a, {9.0, 7.0});
    // det = 11; x = (A^-1) rhs = ([3,-1;-1,4]/11) (9,7) = (20/11, 19/11)
    CHECK(x[0] == doctest::Approx(20.0 / 11).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(19.0 / 11).epsilon(1e-14));
}

TEST_CASE("solve_spd rejects a collapsed pivot") {
    Matrix a(2, 2);
    a(0, 0) = 1;
    a(0, 1) = 1;
    a(1, 0) = 1;
    a(1, 1) = 1;  // singular
    CHECK_THROWS_AS(solve_spd(a, {1.0, 1.0}), IllPosedError);
}
