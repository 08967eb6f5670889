#include "qbd/spectral.hpp"

#include <cmath>
#include <sstream>

#include "line_search.hpp"
#include "qbd/error.hpp"
#include "qbd/perron.hpp"

namespace qbd {

namespace {

PerronOptions perron_opts(const SpectralOptions& o) {
    PerronOptions p;
    p.rel_tol = o.tol_eig;
    p.max_iter = o.max_iter;
    return p;
}

constexpr double kRootRelTol = 1e-13;  // on s = log z; keeps the z-width below 1e-12 max(1, z)

}  // namespace

const char* to_string(RootKind k) {
    switch (k) {
        case RootKind::TwoRoots: return "TwoRoots";
        case RootKind::Tangent: return "Tangent";
        case RootKind::NoRoot: return "NoRoot";
    }
    return "?";
}

Matrix c_matrix(const QbdModel& m, double z1, double z2) {
    if (!(z1 > 0.0) || !(z2 > 0.0) || !std::isfinite(z1) || !std::isfinite(z2)) {
        throw InputError("C(z1, z2) requires finite z1 > 0 and z2 > 0");
    }
    const double p1[3] = {1.0 / z1, 1.0, z1};
    const double p2[3] = {1.0 / z2, 1.0, z2};
    Matrix c = Matrix::zeros(m.phases());
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) c.add_scaled(m.interior(i, j), p1[i + 1] * p2[j + 1]);
    return c;
}

double chi(const QbdModel& m, double z1, double z2, const SpectralOptions& opts) {
    return perron_root(c_matrix(m, z1, z2), perron_opts(opts)).value;
}

LineMinimum min_chi_over_s2(const QbdModel& m, double z1, const SpectralOptions& opts, double start) {
    auto f = [&](double s) { return chi(m, z1, std::exp(s), opts); };
    const auto r = detail::minimize_convex(f, start);
    return {r.x, r.fx, r.bounded};
}

BranchRoots branch_roots_2(const QbdModel& m, double z1, const SpectralOptions& opts) {
    const LineMinimum lm = min_chi_over_s2(m, z1, opts);
    if (!lm.bounded) {
        throw NumericalError("chi(z1, .) has no minimum for z1=" + std::to_string(z1) +
                             " (no downward or no upward x2-jumps?)");
    }
    BranchRoots out;
    out.min_arg = std::exp(lm.s);
    out.min_value = lm.value;
    const double g0 = lm.value - 1.0;
    if (g0 > opts.tangent_slack) {
        out.kind = RootKind::NoRoot;
        return out;
    }
    if (g0 >= 0.0) {
        out.kind = RootKind::Tangent;
        out.lower = out.upper = out.min_arg;
        return out;
    }
    auto g = [&](double s) { return chi(m, z1, std::exp(s), opts) - 1.0; };
    double roots[2];
    for (int side = 0; side < 2; ++side) {
        const double dir = side == 0 ? -1.0 : 1.0;
        double inner = lm.s, g_inner = g0;
        double h = 0.25;
        double outer = inner + dir * h;
        double g_outer = g(outer);
        while (g_outer <= 0.0) {
            inner = outer;
            g_inner = g_outer;
            h *= 2.0;
            outer = inner + dir * h;
            if (std::fabs(outer) > detail::kLogLimit) {
                throw NumericalError("branch root bracket for chi(z1, .) = 1 escaped |s| <= 700");
            }
            g_outer = g(outer);
        }
        const auto r = detail::bracketed_root(g, inner, outer, g_inner, g_outer, kRootRelTol);
        roots[side] = std::exp(0.5 * (r.first + r.second));
    }
    out.lower = roots[0];
    out.upper = roots[1];
    if (out.upper - out.lower < opts.tangent_gap) {
        out.kind = RootKind::Tangent;
        out.lower = out.upper = out.min_arg;
    } else {
        out.kind = RootKind::TwoRoots;
    }
    return out;
}

BranchRoots branch_roots_1(const QbdModel& m, double z2, const SpectralOptions& opts) {
    return branch_roots_2(m.swapped(), z2, opts);
}

namespace {

// Extreme of {s1 : min_{s2} chi(e^{s1}, e^{s2}) <= 1} in direction dir (+1 or -1).
double extreme_s1(const QbdModel& m, double dir, const SpectralOptions& opts) {
    double warm = 0.0;
    auto g = [&](double s1) {
        const LineMinimum lm = min_chi_over_s2(m, std::exp(s1), opts, warm);
        if (lm.bounded) warm = lm.s;
        return lm.value - 1.0;
    };
    double inner = 0.0;
    double g_inner = g(inner);
    if (!(g_inner < -opts.tangent_slack)) {
        // The origin sits on the boundary; start from the interior minimum instead.
        const auto r = detail::minimize_convex(g, 0.0);
        if (!r.bounded || !(r.fx < 0.0)) {
            if (std::fabs(g_inner) <= opts.tangent_slack) return 0.0;
            throw NumericalError("the set {chi <= 1} has empty interior; model is degenerate");
        }
        inner = r.x;
        g_inner = r.fx;
        warm = 0.0;
    }
    double h = 0.125;
    double outer = inner + dir * h;
    double g_outer = g(outer);
    int doublings = 0;
    while (!(g_outer > 0.0)) {
        if (++doublings > 200 || std::fabs(outer) > detail::kLogLimit) {
            throw NumericalError("extreme-point bracket expansion failed; the set {chi <= 1} looks unbounded");
        }
        inner = outer;
        g_inner = g_outer;
        h *= 2.0;
        outer = inner + dir * h;
        g_outer = g(outer);
    }
    const auto r = detail::bracketed_root(g, inner, outer, g_inner, g_outer, 4.0 * std::numeric_limits<double>::epsilon());
    return r.second;  // the side with min chi > 1
}

}  // namespace

double z1_max_extreme(const QbdModel& m, const SpectralOptions& opts) {
    return std::exp(extreme_s1(m, 1.0, opts));
}

SpectralSummary extreme_points(const QbdModel& m, const SpectralOptions& opts) {
    const QbdModel sw = m.swapped();
    SpectralSummary s;
    s.z1_min = std::exp(extreme_s1(m, -1.0, opts));
    s.z1_max = std::exp(extreme_s1(m, 1.0, opts));
    s.z2_min = std::exp(extreme_s1(sw, -1.0, opts));
    s.z2_max = std::exp(extreme_s1(sw, 1.0, opts));
    s.tol_root = opts.tol_root;
    return s;
}

namespace {

template <typename T>
T kernel_det_impl(const QbdModel& m, T z, T w) {
    if (z == T(0.0) || w == T(0.0)) throw InputError("kernel determinant requires z, w != 0");
    const std::size_t n = m.phases();
    const T pz[3] = {T(1.0), z, z * z};
    const T pw[3] = {T(1.0), w, w * w};
    std::vector<T> l(n * n, T(0.0));
    for (int i = -1; i <= 1; ++i) {
        for (int j = -1; j <= 1; ++j) {
            const Matrix& a = m.interior(i, j);
            const T f = pz[i + 1] * pw[j + 1];
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c)
                    if (a(r, c) != 0.0) l[r * n + c] += f * a(r, c);
        }
    }
    for (std::size_t r = 0; r < n; ++r) l[r * n + r] -= z * w;
    const T d = determinant<T>(std::move(l), n);
    if (!std::isfinite(std::abs(d))) throw NumericalError("kernel determinant overflowed");
    return d;
}

}  // namespace

double kernel_det(const QbdModel& m, double z, double w) { return kernel_det_impl<double>(m, z, w); }

std::complex<double> kernel_det(const QbdModel& m, std::complex<double> z, std::complex<double> w) {
    return kernel_det_impl<std::complex<double>>(m, z, w);
}

}  // namespace qbd
