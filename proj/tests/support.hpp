#pragma once

// Model builders and small independent reference computations shared by the
// unit tests. Nothing here calls the library's eigen or root solvers.

#include <cmath>
#include <random>
#include <vector>

#include "qbd/model.hpp"
#include "qbd/report.hpp"

namespace support {

using qbd::Matrix;
using qbd::QbdModel;

inline QbdModel table_model(int table, int K) { return qbd::build_limited_service(qbd::table_params(table, K)); }

inline Matrix random_positive(std::mt19937& rng, std::size_t r, std::size_t c) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = u(rng);
    return m;
}

// Divides the rows of every block by the row sums of the family total.
template <typename Blocks>
void normalize_family(Blocks& blocks, std::size_t n) {
    std::vector<double> rs(n, 0.0);
    for (auto& row : blocks)
        for (auto& b : row)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) rs[i] += b(i, j);
    for (auto& row : blocks)
        for (auto& b : row)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) b(i, j) /= rs[i];
}

/// Every block strictly positive, each family row-stochastic.
inline QbdModel random_model(std::mt19937& rng, std::size_t n) {
    QbdModel::InteriorBlocks a;
    QbdModel::Face1Blocks f1;
    QbdModel::Face2Blocks f2;
    QbdModel::OriginBlocks f0;
    for (auto& row : a)
        for (auto& b : row) b = random_positive(rng, n, n);
    for (auto& row : f1)
        for (auto& b : row) b = random_positive(rng, n, n);
    for (auto& row : f2)
        for (auto& b : row) b = random_positive(rng, n, n);
    for (auto& row : f0)
        for (auto& b : row) b = random_positive(rng, n, n);
    normalize_family(a, n);
    normalize_family(f1, n);
    normalize_family(f2, n);
    normalize_family(f0, n);
    return QbdModel(n, a, f1, f2, f0);
}

/// One-phase model from jump probabilities p[i+1][j+1]. Boundary families
/// keep the allowed jumps and put the removed mass on the stay-put block.
inline QbdModel scalar_walk(const double (&p)[3][3]) {
    auto s = [](double v) { return Matrix{{v}}; };
    QbdModel::InteriorBlocks a;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a[i][j] = s(p[i][j]);
    QbdModel::Face1Blocks f1;
    double lost1 = p[0][0] + p[1][0] + p[2][0];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) f1[i][j] = s(p[i][j + 1] + (i == 1 && j == 0 ? lost1 : 0.0));
    QbdModel::Face2Blocks f2;
    double lost2 = p[0][0] + p[0][1] + p[0][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) f2[i][j] = s(p[i + 1][j] + (i == 0 && j == 1 ? lost2 : 0.0));
    QbdModel::OriginBlocks f0;
    double kept = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) kept += p[i + 1][j + 1];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) f0[i][j] = s(p[i + 1][j + 1] + (i == 0 && j == 0 ? 1.0 - kept : 0.0));
    return QbdModel(1, a, f1, f2, f0);
}

/// Perron root of a 2 x 2 nonnegative matrix in closed form.
inline double spr_2x2(const Matrix& m) {
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
}

/// Plain power iteration on A + I with a Rayleigh-type stopping rule.
inline double power_spr(const Matrix& a, int max_iter = 2000000) {
    const std::size_t n = a.rows();
    std::vector<double> x(n, 1.0), y(n);
    double lam = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = x[i];
            for (std::size_t j = 0; j < n; ++j) s += a(i, j) * x[j];
            y[i] = s;
        }
        double lo = INFINITY, hi = 0.0, norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            lo = std::min(lo, y[i] / x[i]);
            hi = std::max(hi, y[i] / x[i]);
            norm = std::max(norm, y[i]);
        }
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
        lam = 0.5 * (lo + hi) - 1.0;
        if (hi - lo <= 1e-15 * hi) break;
    }
    return lam;
}

/// min over s of f by golden section on [lo, hi] (f unimodal).
template <typename F>
double golden_min(F f, double lo, double hi, double* arg = nullptr) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if (arg != nullptr) *arg = 0.5 * (a + b);
    return std::min(fc, fd);
}

/// Root of f on [a, b] with f(a) <= 0 < f(b) (or reversed), by bisection.
template <typename F>
double bisect(F f, double a, double b, int iters = 200) {
    double fa = f(a);
    for (int it = 0; it < iters; ++it) {
        const double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        const double fm = f(m);
        if ((fm <= 0.0) == (fa <= 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace support
