#pragma once

// One-dimensional helpers shared by the spectral and asymptotics code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "qbd/error.hpp"

namespace qbd::detail {

inline constexpr double kLogLimit = 700.0;  // |s| beyond this overflows e^{+-s} in C(z1, z2)

struct Minimum {
    double x;
    double fx;
    bool bounded;
};

/// Minimum of a convex function: walk downhill from `start` with doubling
/// steps until the function rises, then run Brent on the bracket.
template <typename F>
Minimum minimize_convex(F&& f, double start, double step = 0.25) {
    double a = start;
    double fa = f(a);
    double b = a + step;
    double fb = f(b);
    double h = step;
    if (!(fb < fa)) {
        const double c = a - step;
        const double fc = f(c);
        if (!(fc < fa)) {
            // start is within one step of the minimum
            const auto r = boost::math::tools::brent_find_minima(f, c, b, std::numeric_limits<double>::digits / 2);
            return r.second <= fa ? Minimum{r.first, r.second, true} : Minimum{a, fa, true};
        }
        b = c;
        fb = fc;
        h = -step;
    }
    // Now f(b) < f(a) and b = a + h.
    for (;;) {
        h *= 2.0;
        const double c = b + h;
        if (std::fabs(c) > kLogLimit) return {b, fb, false};
        const double fc = f(c);
        if (!(fc < fb)) {
            const double lo = std::min(a, c), hi = std::max(a, c);
            std::uintmax_t iters = 200;
            const auto r = boost::math::tools::brent_find_minima(f, lo, hi, std::numeric_limits<double>::digits / 2,
                                                                 iters);
            return r.second <= fb ? Minimum{r.first, r.second, true} : Minimum{b, fb, true};
        }
        a = b;
        fa = fb;
        b = c;
        fb = fc;
    }
}

/// Root of f on [a, b] given f(a), f(b) of opposite signs (TOMS 748). Returns
/// the final bracket ordered as (side where f <= 0, side where f > 0) when
/// the signs allow, so callers can pick the side they need.
template <typename F>
std::pair<double, double> bracketed_root(F&& f, double a, double b, double fa, double fb, double rel_tol,
                                         std::uintmax_t max_iter = 200) {
    auto tol = [rel_tol](double x, double y) {
        return std::fabs(x - y) <= rel_tol * std::max(1.0, std::min(std::fabs(x), std::fabs(y)));
    };
    if (a > b) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    std::uintmax_t it = max_iter;
    auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, it);
    const double f1 = f(r.first);
    if (f1 > 0.0) std::swap(r.first, r.second);
    return r;
}

}  // namespace qbd::detail
