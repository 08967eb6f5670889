#include <cmath>
#include <random>

#include "doctest.h"
#include "qbd/error.hpp"
#include "qbd/perron.hpp"
#include "qbd/qbd_core.hpp"
#include "support.hpp"

using namespace qbd;

namespace {

std::vector<double> grid(const SpectralSummary& e, int n) {
    std::vector<double> z;
    for (int i = 0; i < n; ++i) {
        if (i == 0) z.push_back(e.z1_min);
        else if (i == n - 1) z.push_back(e.z1_max);
        else z.push_back(std::exp(std::log(e.z1_min) + (std::log(e.z1_max) - std::log(e.z1_min)) * i / (n - 1)));
    }
    return z;
}

}  // namespace

TEST_CASE("G(1) is stochastic when the x2 drift is negative") {
    for (int K : {1, 2, 5}) {
        const AxisKernels k = solve_axis1(support::table_model(1, K), 1.0);
        for (double s : k.G.row_sums()) CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(min_entry(k.G) >= 0.0);
        CHECK(min_entry(k.R) >= 0.0);
    }
}

TEST_CASE("natural iteration is monotone and converges to the reduction result") {
    const QbdModel m = support::table_model(1, 3);
    for (double z : {0.6, 1.0, 1.4}) {
        CAPTURE(z);
        const AxisKernels k = solve_axis1(m, z);
        const Matrix am = interior_col_poly(m, -1, z), a0 = interior_col_poly(m, 0, z), ap = interior_col_poly(m, 1, z);
        Matrix x = Matrix::zeros(m.phases());
        bool monotone = true, bounded = true;
        for (int it = 0; it < 200000; ++it) {
            Matrix next = am + a0 * x + ap * (x * x);
            const double step = max_abs_diff(next, x);
            for (std::size_t i = 0; i < x.rows(); ++i)
                for (std::size_t j = 0; j < x.cols(); ++j) {
                    if (next(i, j) < x(i, j) - 1e-15) monotone = false;
                    if (next(i, j) > k.G(i, j) + 1e-10) bounded = false;
                }
            x = std::move(next);
            if (step < 1e-14) break;
        }
        CHECK(monotone);
        CHECK(bounded);
        CHECK(max_abs_diff(x, k.G) <= 1e-10);
    }
}

TEST_CASE("both solvers satisfy the same contract") {
    const QbdModel m = support::table_model(2, 4);
    KernelOptions ni;
    ni.method = KernelMethod::NaturalIteration;
    for (double z : {0.9, 1.0, 1.05}) {
        const AxisKernels a = solve_axis1(m, z);
        const AxisKernels b = solve_axis1(m, z, ni);
        CHECK(max_abs_diff(a.G, b.G) <= 1e-10);
        CHECK(max_abs_diff(a.R, b.R) <= 1e-9);
        CHECK(b.residuals.max() <= 1e-10);
    }
}

TEST_CASE("identities and spectral relations across the admissible interval") {
    for (int K : {1, 3}) {
        const QbdModel m = support::table_model(1, K);
        const SpectralSummary e = extreme_points(m);
        for (double z : grid(e, 11)) {
            CAPTURE(K);
            CAPTURE(z);
            const AxisKernels k = solve_axis1(m, z);
            CHECK(k.residuals.max() <= 10.0 * k.tolerance);
            const BranchRoots br = branch_roots_2(m, z);
            REQUIRE(br.kind != RootKind::NoRoot);
            if (!k.at_extreme) {
                CHECK(spectral_radius(k.G) == doctest::Approx(br.lower).epsilon(1e-7));
                CHECK(spectral_radius(k.R) * br.upper == doctest::Approx(1.0).epsilon(1e-7));
            } else {
                // double root: eigenvalue error ~ sqrt(residual)
                CHECK(std::fabs(spectral_radius(k.G) - br.lower) <= std::sqrt(k.tolerance));
            }
            for (double w : {0.5, 1.0, 2.0}) CHECK(factorization_residual(m, k, w) <= 1e-8);
        }
    }
}

TEST_CASE("factorization at z = 1 on the symmetric model") {
    const QbdModel m = support::table_model(1, 1);
    const AxisKernels k = solve_axis1(m, 1.0);
    for (double w : {0.5, 1.0, 2.0}) CHECK(factorization_residual(m, k, w) <= 1e-9);
}

TEST_CASE("factorization residual grows with a perturbation of G") {
    const QbdModel m = support::table_model(1, 2);
    const AxisKernels k = solve_axis1(m, 1.1);
    double prev = factorization_residual(m, k, 1.5);
    for (double eps : {1e-8, 1e-6, 1e-4, 1e-2}) {
        AxisKernels p = k;
        p.G(0, 0) += eps;
        const double r = factorization_residual(m, p, 1.5);
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("x2-axis G of the limited model has one nonzero column") {
    for (int K : {2, 4}) {
        const QbdModel m = support::table_model(1, K);
        const SpectralSummary e = extreme_points(m);
        for (double w : {e.z2_min * 1.05, 1.0, 0.5 * (1.0 + e.z2_max)}) {
            const AxisKernels k = solve_axis2(m, w);
            const std::size_t last = m.phases() - 1;
            double off = 0.0;
            for (std::size_t i = 0; i < m.phases(); ++i)
                for (std::size_t j = 0; j < last; ++j) off = std::max(off, std::fabs(k.G(i, j)));
            CHECK(off <= 1e-12);
            double col = 0.0;
            for (std::size_t i = 0; i < m.phases(); ++i) col += k.G(i, last);
            CHECK(col > 0.0);
        }
    }
}

TEST_CASE("outside the interval the solve is refused") {
    const QbdModel m = support::table_model(1, 1);
    const SpectralSummary e = extreme_points(m);
    CHECK_THROWS_AS(solve_axis1(m, e.z1_max * 1.05), OutsideIntervalError);
    CHECK_THROWS_AS(solve_axis1(m, e.z1_min * 0.9), OutsideIntervalError);
    KernelOptions ni;
    ni.method = KernelMethod::NaturalIteration;
    CHECK_THROWS_AS(solve_axis1(m, e.z1_max * 1.05, ni), OutsideIntervalError);
    CHECK_THROWS_AS(solve_axis1(m, -1.0), InputError);
}

TEST_CASE("one-dimensional stationary vector") {
    for (int face : {1, 2}) {
        const QbdModel m = support::table_model(1, 1);
        const OneDQbdStationary st = qbd_stationary(face, m);
        CHECK(st.normalization == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(spectral_radius(st.R_star) < 1.0);

        // balance on levels 0..3 built here from the blocks, closing with R
        const QbdModel mm = face == 1 ? m : m.swapped();
        const Matrix b0 = face1_col_poly(mm, 0, 1.0), b1 = face1_col_poly(mm, 1, 1.0);
        const Matrix am = interior_col_poly(mm, -1, 1.0), a0 = interior_col_poly(mm, 0, 1.0),
                     ap = interior_col_poly(mm, 1, 1.0);
        std::vector<Vector> lv;
        for (int k = 0; k <= 4; ++k) lv.push_back(st.level(k));
        auto add = [](Vector a, const Vector& b) {
            for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
            return a;
        };
        double res = 0.0;
        const Vector l0 = add(lv[0] * b0, lv[1] * am);
        const Vector l1 = add(add(lv[0] * b1, lv[1] * a0), lv[2] * am);
        for (std::size_t i = 0; i < l0.size(); ++i) res = std::max({res, std::fabs(l0[i] - lv[0][i]), std::fabs(l1[i] - lv[1][i])});
        for (int k = 2; k <= 3; ++k) {
            const Vector lk = add(add(lv[k - 1] * ap, lv[k] * a0), lv[k + 1] * am);
            for (std::size_t i = 0; i < lk.size(); ++i) res = std::max(res, std::fabs(lk[i] - lv[k][i]));
        }
        CHECK(res <= 1e-9);
    }
}

TEST_CASE("unstable face chain is a precondition failure") {
    // table 2, K = 1: the x2 drift is positive, so the x1-face chain is not positive recurrent
    CHECK_THROWS_AS(qbd_stationary(1, support::table_model(2, 1)), PreconditionError);
}
