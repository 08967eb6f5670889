#include <random>

#include "doctest.h"
#include "qbd/perron.hpp"
#include "qbd/spectral.hpp"
#include "support.hpp"

using namespace qbd;

TEST_CASE("2x2 Perron root against the closed form") {
    std::mt19937 rng(1);
    for (int t = 0; t < 50; ++t) {
        const Matrix a = support::random_positive(rng, 2, 2) * 3.0;
        const PerronResult r = perron_root(a);
        CHECK(r.converged);
        CHECK(r.value == doctest::Approx(support::spr_2x2(a)).epsilon(1e-13));
        CHECK(r.lower <= r.value);
        CHECK(r.value <= r.upper);
    }
}

TEST_CASE("accelerated root agrees with plain power iteration") {
    std::mt19937 rng(2);
    for (std::size_t n : {3u, 6u, 20u}) {
        const Matrix a = support::random_positive(rng, n, n);
        const double fast = perron_root(a).value;
        CHECK(fast == doctest::Approx(perron_root_power_iteration(a).value).epsilon(1e-12));
        CHECK(fast == doctest::Approx(support::power_spr(a)).epsilon(1e-12));
    }
}

TEST_CASE("sparse and badly scaled C matrices of the 51-phase model") {
    const QbdModel m = support::table_model(1, 50);
    for (auto zw : {std::pair{1.0, 1.0}, std::pair{1.6, 4.4}, std::pair{0.2, 6.0}, std::pair{1.67, 0.03}}) {
        CAPTURE(zw.first);
        CAPTURE(zw.second);
        const Matrix c = c_matrix(m, zw.first, zw.second);
        CHECK(perron_root(c).value == doctest::Approx(support::power_spr(c)).epsilon(1e-11));
    }
}

TEST_CASE("reducible matrix takes the largest block root") {
    const Matrix a{{0.5, 0.2, 0.0}, {0.0, 0.3, 0.4}, {0.0, 0.4, 0.3}};
    CHECK_FALSE(is_irreducible(a));
    CHECK(strongly_connected_components(a).size() == 2);
    CHECK(spectral_radius(a) == doctest::Approx(0.7).epsilon(1e-13));
}

TEST_CASE("period of cyclic and aperiodic graphs") {
    const Matrix cyc{{0, 1, 0}, {0, 0, 1}, {1, 0, 0}};
    CHECK(is_irreducible(cyc));
    CHECK(period(cyc) == 3);
    CHECK(spectral_radius(cyc) == doctest::Approx(1.0).epsilon(1e-13));
    const Matrix ap{{0.5, 0.5}, {1, 0}};
    CHECK(period(ap) == 1);
}

TEST_CASE("zero and one-by-one matrices") {
    CHECK(spectral_radius(Matrix{{0.0}}) == 0.0);
    CHECK(spectral_radius(Matrix{{2.5}}) == doctest::Approx(2.5));
    CHECK(spectral_radius(Matrix::zeros(3)) == 0.0);
}
