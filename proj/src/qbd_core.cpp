#include "qbd/qbd_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qbd/error.hpp"
#include "qbd/perron.hpp"

namespace qbd {

const char* to_string(KernelMethod m) {
    return m == KernelMethod::CyclicReduction ? "cyclic-reduction" : "natural-iteration";
}

double KernelResiduals::max() const {
    return std::max({quadratic_g, quadratic_r, g_identity, r_identity, inverse});
}

namespace {

constexpr double kDivergence = 1e12;
constexpr int kMaxReductionSteps = 80;

struct Blocks {
    Matrix down, local, up;  // A_{*,-1}(z), A_{*,0}(z), A_{*,1}(z)
};

double quadratic_residual(const Blocks& b, const Matrix& g) {
    Matrix r = b.down;
    r += b.local * g;
    r += b.up * (g * g);
    r -= g;
    return max_abs(r);
}

// Rounding leaves entries like -1e-18 where the exact solution has zeros.
void clamp_small_negatives(Matrix& m, double scale) {
    const double floor = -1e-12 * std::max(1.0, scale);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (m(i, j) < 0.0 && m(i, j) > floor) m(i, j) = 0.0;
}

bool all_finite(const Matrix& m) {
    for (double v : m.values())
        if (!std::isfinite(v)) return false;
    return true;
}

struct GSolution {
    Matrix g;
    long iterations;
    double residual;
};

// Cyclic reduction on the scaled equation Y = A_{-1}/c + A_0 Y + c A_1 Y^2, G = c Y.
// At an extreme point the reduction converges only linearly and eventually
// loses accuracy, so the iterate with the smallest residual is kept and the
// loop stops once the residual has grown tenfold past it.
GSolution cyclic_reduction(const Blocks& b, double c, double tol) {
    const std::size_t n = b.local.rows();
    const Matrix I = Matrix::identity(n);
    Matrix down = b.down * (1.0 / c);
    Matrix local = b.local;
    Matrix up = b.up * c;
    Matrix hat = b.local;

    GSolution best{Matrix(), 0, std::numeric_limits<double>::infinity()};
    int stale = 0;
    for (int step = 0; step < kMaxReductionSteps; ++step) {
        LuDecomposition lu_hat(I - hat);
        if (lu_hat.singular()) break;
        Matrix g = lu_hat.solve(b.down);
        const double res = all_finite(g) ? quadratic_residual(b, g) : std::numeric_limits<double>::infinity();
        if (res < best.residual) {
            best = {std::move(g), step, res};
            stale = 0;
        } else {
            ++stale;
        }
        if (best.residual <= 0.01 * tol || res > 10.0 * best.residual) break;
        if (stale >= 3 && best.residual <= tol) break;  // at the rounding floor

        LuDecomposition lu(I - local);
        if (lu.singular()) break;
        const Matrix k_down = lu.solve(down);
        const Matrix k_up = lu.solve(up);
        const Matrix inc = up * k_down;
        if (!all_finite(inc)) break;
        hat += inc;
        local += inc;
        local += down * k_up;
        down = down * k_down;
        up = up * k_up;
    }
    if (best.g.empty()) throw NumericalError("cyclic reduction broke down (singular I - A_0)");
    return best;
}

GSolution natural_iteration(const Blocks& b, double tol, long cap, long progress_every) {
    const std::size_t n = b.local.rows();
    Matrix x = Matrix::zeros(n);
    double last_diff = std::numeric_limits<double>::infinity();
    double checkpoint = last_diff;
    for (long it = 1; it <= cap; ++it) {
        Matrix next = b.down;
        next += b.local * x;
        next += b.up * (x * x);
        last_diff = max_abs_diff(next, x);
        x = std::move(next);
        if (!(max_abs(x) < kDivergence)) {
            throw OutsideIntervalError("natural iteration diverged (entry above 1e12); z is outside the interval "
                                       "where the minimal solution exists");
        }
        if (last_diff < tol) {
            const double res = quadratic_residual(b, x);
            return {std::move(x), it, res};
        }
        if (progress_every > 0 && it % progress_every == 0) {
            if (!(last_diff < checkpoint)) {
                std::ostringstream msg;
                msg << "natural iteration stalled at iteration " << it << " (step " << last_diff << ")";
                throw NumericalError(msg.str());
            }
            checkpoint = last_diff;
        }
    }
    std::ostringstream msg;
    msg << "natural iteration hit the cap of " << cap << " iterations (last step " << last_diff
        << "); z may be outside the admissible interval";
    throw NumericalError(msg.str());
}

AxisKernels finish_kernels(const Blocks& b, GSolution sol, const KernelOptions& opts, double z, double scale,
                           bool at_extreme, int axis) {
    const std::size_t n = b.local.rows();
    const Matrix I = Matrix::identity(n);
    AxisKernels k;
    k.axis = axis;
    k.z = z;
    k.method = opts.method;
    k.scale = scale;
    k.at_extreme = at_extreme;
    k.iterations = sol.iterations;
    k.tolerance = at_extreme ? std::max(opts.tol, opts.tangent_tol) : opts.tol;
    k.G = std::move(sol.g);
    clamp_small_negatives(k.G, max_abs(k.G));
    k.H = b.local + b.up * k.G;
    auto inv = inverse_with_condition(I - k.H);
    if (inv.rcond == 0.0) throw NumericalError("I - H is singular");
    k.rcond = inv.rcond;
    if (inv.rcond < 1e-12) {
        std::ostringstream msg;
        msg << "I - H is ill-conditioned (rcond " << inv.rcond << ")";
        k.warnings.push_back(msg.str());
    }
    k.N = std::move(inv.inverse);
    clamp_small_negatives(k.N, max_abs(k.N));
    k.R = b.up * k.N;

    k.residuals.quadratic_g = quadratic_residual(b, k.G);
    Matrix rr = b.up;
    rr += k.R * b.local;
    rr += (k.R * k.R) * b.down;
    rr -= k.R;
    k.residuals.quadratic_r = max_abs(rr);
    k.residuals.g_identity = max_abs_diff(k.G, k.N * b.down);
    k.residuals.r_identity = max_abs_diff(k.R, b.up * k.N);
    k.residuals.inverse = max_abs_diff((I - k.H) * k.N, I);
    if (!std::isfinite(k.residuals.max())) throw NumericalError("kernel residuals are not finite");
    return k;
}

AxisKernels solve_axis1_impl(const QbdModel& m, double z, const KernelOptions& opts, int axis) {
    if (!(z > 0.0) || !std::isfinite(z)) throw InputError("kernel argument must be a finite positive number");
    const LineMinimum lm = min_chi_over_s2(m, z, opts.spectral);
    const double gap = lm.value - 1.0;
    if (!lm.bounded || gap > opts.spectral.tangent_slack) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "z=" << z << " is outside the interval where the minimal nonnegative solution exists (min chi - 1 = "
            << gap << ")";
        throw OutsideIntervalError(msg.str());
    }
    const bool at_extreme = gap > -1e-10;
    Blocks b{interior_col_poly(m, -1, z), interior_col_poly(m, 0, z), interior_col_poly(m, 1, z)};
    const double tol = at_extreme ? std::max(opts.tol, opts.tangent_tol) : opts.tol;
    const double scale = std::exp(lm.s);

    GSolution sol;
    if (opts.method == KernelMethod::CyclicReduction) {
        sol = cyclic_reduction(b, scale, tol);
    } else {
        sol = natural_iteration(b, opts.tol, at_extreme ? opts.max_iter_tangent : opts.max_iter, opts.progress_every);
    }
    if (!(sol.residual <= tol)) {
        std::ostringstream msg;
        msg << to_string(opts.method) << " reached residual " << sol.residual << " > " << tol << " at z=" << z;
        throw NumericalError(msg.str());
    }
    return finish_kernels(b, std::move(sol), opts, z, opts.method == KernelMethod::CyclicReduction ? scale : 1.0,
                          at_extreme, axis);
}

}  // namespace

AxisKernels solve_axis1(const QbdModel& m, double z, const KernelOptions& opts) {
    return solve_axis1_impl(m, z, opts, 1);
}

AxisKernels solve_axis2(const QbdModel& m, double w, const KernelOptions& opts) {
    return solve_axis1_impl(m.swapped(), w, opts, 2);
}

double factorization_residual(const QbdModel& m, const AxisKernels& k, double w) {
    if (!(w > 0.0)) throw InputError("factorization residual requires w > 0");
    const std::size_t n = m.phases();
    const Matrix I = Matrix::identity(n);
    const Matrix c = k.axis == 1 ? c_matrix(m, k.z, w) : c_matrix(m, w, k.z);
    const Matrix rhs = (I * (1.0 / w) - k.R) * (I - k.H) * (I * w - k.G);
    return max_abs_diff(I - c, rhs);
}

Vector OneDQbdStationary::level(int k) const {
    if (k <= 0) return pi0;
    Vector v = pi1;
    for (int i = 1; i < k; ++i) v = v * R_star;
    return v;
}

OneDQbdStationary qbd_stationary(int face, const QbdModel& m, const KernelOptions& opts) {
    if (face != 1 && face != 2) throw InputError("face must be 1 or 2");
    const QbdModel mm = face == 1 ? m : m.swapped();
    const std::size_t n = mm.phases();
    const Matrix I = Matrix::identity(n);

    AxisKernels k;
    try {
        k = solve_axis1(mm, 1.0, opts);
    } catch (const NumericalError& e) {
        throw PreconditionError(std::string("face-") + std::to_string(face) +
                                " chain: kernel solve at z=1 failed: " + e.what());
    }
    if (k.at_extreme || spectral_radius(k.R) >= 1.0 - 1e-10) {
        throw PreconditionError("the induced chain with only face " + std::to_string(face) +
                                " is not positive recurrent (spr(R) >= 1)");
    }

    const Matrix b00 = face1_col_poly(mm, 0, 1.0);
    const Matrix b01 = face1_col_poly(mm, 1, 1.0);
    const Matrix am = interior_col_poly(mm, -1, 1.0);
    const Matrix a0 = interior_col_poly(mm, 0, 1.0);
    const Matrix b11 = a0 + k.R * am;

    Matrix p(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            p(i, j) = b00(i, j);
            p(i, n + j) = b01(i, j);
            p(n + i, j) = am(i, j);
            p(n + i, n + j) = b11(i, j);
        }
    }
    const Vector tail_mass = LuDecomposition(I - k.R).solve(Vector(n, 1.0));
    Matrix sys = p - Matrix::identity(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        sys(i, 0) = 1.0;
        sys(n + i, 0) = tail_mass[i];
    }
    LuDecomposition lu(sys);
    if (lu.singular()) throw PreconditionError("boundary balance system is singular");
    Vector rhs(2 * n, 0.0);
    rhs[0] = 1.0;
    const Vector x = lu.solve_left(rhs);

    OneDQbdStationary out;
    out.face = face;
    out.pi0.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
    out.pi1.assign(x.begin() + static_cast<std::ptrdiff_t>(n), x.end());
    for (double& v : out.pi0) v = std::max(v, 0.0);
    for (double& v : out.pi1) v = std::max(v, 0.0);
    out.R_star = k.R;
    double mass = sum(out.pi0);
    const Vector t = out.pi1;
    for (std::size_t i = 0; i < n; ++i) mass += t[i] * tail_mass[i];
    out.normalization = mass;
    out.balance_residual = balance_residual(x, p);
    return out;
}

}  // namespace qbd
