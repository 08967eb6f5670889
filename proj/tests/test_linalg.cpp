#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "qbd/error.hpp"
#include "qbd/linalg.hpp"
#include "support.hpp"

using namespace qbd;

TEST_CASE("LU solves and inverts") {
    const Matrix a{{4, 1, 0}, {1, 3, 1}, {0, 1, 2}};
    LuDecomposition lu(a);
    REQUIRE_FALSE(lu.singular());
    CHECK(lu.determinant() == doctest::Approx(18.0));
    const Vector x = lu.solve(Vector{1, 2, 3});
    const Vector ax = a * x;
    for (int i = 0; i < 3; ++i) CHECK(ax[i] == doctest::Approx(i + 1.0));
    const Vector xl = lu.solve_left(Vector{1, 2, 3});
    const Vector xa = xl * a;
    for (int i = 0; i < 3; ++i) CHECK(xa[i] == doctest::Approx(i + 1.0));
    CHECK(max_abs_diff(a * lu.inverse(), Matrix::identity(3)) < 1e-14);
}

TEST_CASE("singular matrix is reported") {
    const Matrix a{{1, 2}, {2, 4}};
    CHECK(LuDecomposition(a).singular());
}

TEST_CASE("condition estimate of a diagonal matrix") {
    const Matrix a{{1, 0}, {0, 1e-6}};
    const auto r = inverse_with_condition(a);
    CHECK(r.rcond == doctest::Approx(1e-6));
}

TEST_CASE("complex determinant") {
    using C = std::complex<double>;
    std::vector<C> m = {C(1, 1), C(2, 0), C(0, 1), C(3, -1)};
    const C d = determinant<C>(m, 2);
    const C expect = C(1, 1) * C(3, -1) - C(2, 0) * C(0, 1);
    CHECK(std::abs(d - expect) < 1e-14);
}

TEST_CASE("stationary distribution of a doubly stochastic matrix is uniform") {
    const Matrix p{{0.2, 0.5, 0.3}, {0.5, 0.3, 0.2}, {0.3, 0.2, 0.5}};
    const Vector pi = stationary_distribution(p);
    for (double v : pi) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(balance_residual(pi, p) < 1e-15);
}

TEST_CASE("stationary distribution of random stochastic matrices") {
    std::mt19937 rng(3);
    for (std::size_t n : {2u, 5u, 20u}) {
        Matrix p = support::random_positive(rng, n, n);
        const Vector rs = p.row_sums();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) p(i, j) /= rs[i];
        const Vector pi = stationary_distribution(p);
        CHECK(sum(pi) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(balance_residual(pi, p) < 1e-14);
    }
}
