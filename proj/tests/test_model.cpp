#include <random>
#include <string>

#include "doctest.h"
#include "qbd/error.hpp"
#include "qbd/model.hpp"
#include "qbd/perron.hpp"
#include "support.hpp"

using namespace qbd;

namespace {

bool contains(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& s : v)
        if (s.find(needle) != std::string::npos) return true;
    return false;
}

std::string error_of(const std::string& text) {
    try {
        load_model(text);
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("limited service blocks for K=1") {
    // nu = lambda1 + lambda2 + mu1 + mu2 = 2.6
    const QbdModel m = build_limited_service({1, 0.3, 0.3, 1.0, 1.0});
    const double nu = 2.6;
    REQUIRE(m.phases() == 2);
    CHECK(max_abs_diff(m.interior(1, 0), Matrix::identity(2) * (0.3 / nu)) < 1e-16);
    CHECK(max_abs_diff(m.interior(0, 1), Matrix::identity(2) * (0.3 / nu)) < 1e-16);
    CHECK(max_abs_diff(m.interior(0, -1), Matrix{{0, 0}, {1.0 / nu, 0}}) < 1e-16);
    CHECK(max_abs_diff(m.interior(-1, 0), Matrix{{0, 1.0 / nu}, {0, 0}}) < 1e-16);
    CHECK(max_abs(m.interior(1, 1)) == 0.0);
    CHECK(max_abs(m.interior(-1, -1)) == 0.0);
    CHECK(max_abs(m.interior(1, -1)) == 0.0);
    CHECK(max_abs(m.interior(-1, 1)) == 0.0);
    CHECK(m.interior(0, 0)(0, 0) == doctest::Approx(1.0 - 1.6 / nu));
}

TEST_CASE("limited service face blocks for K=2") {
    const LimitedServiceParams p{2, 0.4, 0.5, 1.3, 0.9};
    const QbdModel m = build_limited_service(p);
    const double nu = p.uniformization();
    const Matrix expect(3, 3, p.mu1 / (3.0 * nu));
    CHECK(max_abs_diff(m.face1(-1, 0), expect) < 1e-16);
    // x2-face downward block: the half/half row
    const Matrix& d = m.face2(0, -1);
    double half_rows = 0;
    for (std::size_t r = 0; r < 3; ++r) {
        int halves = 0;
        for (std::size_t c = 0; c < 3; ++c)
            if (std::fabs(d(r, c) - 0.5 * p.mu2 / nu) < 1e-16) ++halves;
        if (halves == 2) ++half_rows;
    }
    CHECK(half_rows == 1);
}

TEST_CASE("generated models are valid and row-stochastic for K in [1, 50]") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> rate(0.01, 10.0);
    for (int K = 1; K <= 50; ++K) {
        CAPTURE(K);
        const QbdModel m = build_limited_service({K, rate(rng), rate(rng), rate(rng), rate(rng)});
        const ValidationReport r = validate(m);
        CHECK(r.ok());
        if (!r.ok()) MESSAGE(r.violations.front());
        for (Family f : {Family::Interior, Family::Face1, Family::Face2, Family::Origin})
            for (double s : family_sum(m, f).row_sums()) CHECK(std::fabs(s - 1.0) <= 1e-12);
    }
}

TEST_CASE("bad parameters are rejected") {
    CHECK_THROWS_AS(build_limited_service({0, 0.3, 0.3, 1, 1}), InputError);
    CHECK_THROWS_AS(build_limited_service({1, 0.0, 0.3, 1, 1}), InputError);
    CHECK_THROWS_AS(build_limited_service({1, 0.3, 0.3, -1, 1}), InputError);
}

TEST_CASE("row-sum violation is named") {
    const QbdModel good = build_limited_service({1, 0.3, 0.3, 1, 1});
    QbdModel::InteriorBlocks a;
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) a[i + 1][j + 1] = good.interior(i, j);
    a[1][1](0, 0) -= 0.1;
    QbdModel::Face1Blocks f1;
    QbdModel::Face2Blocks f2;
    QbdModel::OriginBlocks f0;
    for (int i = -1; i <= 1; ++i)
        for (int j = 0; j <= 1; ++j) f1[i + 1][j] = good.face1(i, j);
    for (int i = 0; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) f2[i][j + 1] = good.face2(i, j);
    for (int i = 0; i <= 1; ++i)
        for (int j = 0; j <= 1; ++j) f0[i][j] = good.origin(i, j);
    const ValidationReport r = validate(QbdModel(2, a, f1, f2, f0));
    CHECK(contains(r.violations, "row-sum violation, family A, row 0"));
}

TEST_CASE("block-diagonal A_{*,*} is reducible") {
    std::mt19937 rng(9);
    QbdModel m = support::random_model(rng, 4);
    QbdModel::InteriorBlocks a;
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) {
            Matrix b = m.interior(i, j);
            for (std::size_t r = 0; r < 4; ++r)
                for (std::size_t c = 0; c < 4; ++c)
                    if ((r < 2) != (c < 2)) b(r, c) = 0.0;
            a[i + 1][j + 1] = b;
        }
    support::normalize_family(a, 4);
    QbdModel::Face1Blocks f1;
    QbdModel::Face2Blocks f2;
    QbdModel::OriginBlocks f0;
    for (int i = -1; i <= 1; ++i)
        for (int j = 0; j <= 1; ++j) f1[i + 1][j] = m.face1(i, j);
    for (int i = 0; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) f2[i][j + 1] = m.face2(i, j);
    for (int i = 0; i <= 1; ++i)
        for (int j = 0; j <= 1; ++j) f0[i][j] = m.origin(i, j);
    const ValidationReport r = validate(QbdModel(4, a, f1, f2, f0));
    CHECK(contains(r.violations, "A_{*,*} reducible"));
}

TEST_CASE("negative entries are reported") {
    double p[3][3] = {{0, 0.2, 0}, {0.3, 0.1, 0.2}, {0, 0.3, -0.1}};
    p[1][1] += 0.1;
    const ValidationReport r = validate(support::scalar_walk(p));
    CHECK(contains(r.violations, "negative"));
}

TEST_CASE("the window check is labelled heuristic") {
    const ValidationReport r = validate(build_limited_service({3, 0.3, 0.3, 1, 1}));
    CHECK(r.ok());
    CHECK(contains(r.notes, "heuristic"));
}

TEST_CASE("save and load round-trip exactly") {
    std::mt19937 rng(4);
    for (const QbdModel& m : {build_limited_service({1, 0.3, 0.3, 1, 1}), build_limited_service({7, 0.24, 0.7, 1.2, 1}),
                              support::random_model(rng, 3)}) {
        const QbdModel back = load_model(save_model(m));
        CHECK(back == m);
    }
}

TEST_CASE("shape errors name the field") {
    const std::string good = save_model(build_limited_service({1, 0.3, 0.3, 1, 1}));
    // A1 with three j-indices in its first i-row
    std::string bad = good;
    const auto pos = bad.find("\"A1\"");
    REQUIRE(pos != std::string::npos);
    const auto open = bad.find("[[", pos);  // first block of the i = -1 row
    REQUIRE(open != std::string::npos);
    bad.insert(open, "[[0,0],[0,0]],");
    const std::string msg = error_of(bad);
    CHECK(msg.find("A1") != std::string::npos);

    const std::string dim = R"({"s0": 2,
      "A": [[[[0,0,0],[0,0,0],[0,0,0]],[[0,0],[0,0]],[[0,0],[0,0]]],
            [[[0,0],[0,0]],[[1,0],[0,1]],[[0,0],[0,0]]],
            [[[0,0],[0,0]],[[0,0],[0,0]],[[0,0],[0,0]]]],
      "A1": [[[[0,0],[0,0]],[[0,0],[0,0]]],[[[1,0],[0,1]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[0,0]]]],
      "A2": [[[[0,0],[0,0]],[[1,0],[0,1]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[0,0]],[[0,0],[0,0]]]],
      "A0": [[[[1,0],[0,1]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[0,0]]]]})";
    const std::string dmsg = error_of(dim);
    CHECK(dmsg.find("dimension mismatch") != std::string::npos);
    CHECK(dmsg.find("A") != std::string::npos);

    CHECK_FALSE(error_of("{\"s0\": 2").empty());
    CHECK(error_of("{\"A\": []}").find("s0") != std::string::npos);
}

TEST_CASE("swap and permutation are involutions") {
    std::mt19937 rng(8);
    const QbdModel m = support::random_model(rng, 3);
    CHECK(m.swapped().swapped() == m);
    CHECK(m.swapped().interior(1, -1) == m.interior(-1, 1));
    CHECK(m.swapped().face1(-1, 1) == m.face2(1, -1));
    const std::vector<std::size_t> p{2, 0, 1}, inv{1, 2, 0};
    CHECK(m.permuted(p).permuted(inv) == m);
    CHECK(m.permuted(p).interior(0, 0)(p[0], p[1]) == m.interior(0, 0)(0, 1));
}
