#include "qbd/perron.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "qbd/error.hpp"
#include "qbd/kernels.hpp"

namespace qbd {
namespace {

constexpr long kPowerWarmup = 48;
constexpr long kInverseSteps = 60;

struct Bracket {
    double lo;
    double hi;
};

// Collatz-Wielandt bounds min/max (A x)_i / x_i for a positive vector x.
Bracket collatz_wielandt(const Vector& x, const Vector& ax) {
    Bracket b{std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = ax[i] / x[i];
        b.lo = std::min(b.lo, r);
        b.hi = std::max(b.hi, r);
    }
    return b;
}

void normalize(Vector& x) {
    const double s = sum(x);
    for (double& v : x) v /= s;
}

bool positive(const Vector& x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return v > 0.0 && std::isfinite(v); });
}

bool closed(const Bracket& b, double tol) { return b.hi - b.lo <= tol * b.hi; }

PerronResult finish(const Bracket& b, long it, bool ok) {
    return {0.5 * (b.lo + b.hi), b.lo, b.hi, it, ok};
}

PerronResult irreducible_root(const Matrix& a, const PerronOptions& opts, bool allow_inverse) {
    const std::size_t n = a.rows();
    if (n == 1) {
        return {a(0, 0), a(0, 0), a(0, 0), 0, true};
    }
    const auto& k = kernels::active();
    Vector x(n, 1.0 / static_cast<double>(n));
    Vector ax(n);
    Bracket b{};
    long it = 0;

    const long warmup = allow_inverse ? std::min(kPowerWarmup, opts.max_iter) : opts.max_iter;
    for (; it < warmup; ++it) {
        k.gemv(n, n, a.data(), x.data(), ax.data());
        b = collatz_wielandt(x, ax);
        if (closed(b, opts.rel_tol)) return finish(b, it + 1, true);
        for (std::size_t i = 0; i < n; ++i) x[i] = ax[i] + opts.shift * x[i];
        normalize(x);
    }
    if (!allow_inverse) {
        return finish(b, it, false);
    }

    // (sigma I - A)^{-1} is entrywise positive for sigma above the root, so
    // inverse iteration is again a positive power iteration. The iteration
    // runs on D^{-1} A D with D the current eigenvector estimate, so the
    // iterate stays close to all-ones and its small components keep full
    // relative accuracy.
    Matrix work = a;
    for (long step = 0; step < kInverseSteps && it < opts.max_iter; ++step, ++it) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) work(i, j) *= x[j] / x[i];
        std::fill(x.begin(), x.end(), 1.0 / static_cast<double>(n));
        double sigma = b.hi + (b.hi - b.lo);
        sigma = std::max(sigma, b.hi * (1.0 + 8.0 * std::numeric_limits<double>::epsilon()));
        Matrix shifted = Matrix::identity(n) * sigma;
        shifted -= work;
        LuDecomposition lu(shifted);
        if (lu.singular()) {
            return finish({sigma, sigma}, it + 1, true);
        }
        Vector y = lu.solve(x);
        if (!positive(y)) {
            // sigma fell on or below the root through rounding; treat the
            // bracket as closed at this resolution.
            return finish(b, it + 1, closed(b, 64 * opts.rel_tol));
        }
        normalize(y);
        x.swap(y);
        k.gemv(n, n, work.data(), x.data(), ax.data());
        const Bracket nb = collatz_wielandt(x, ax);
        b = {std::max(b.lo, nb.lo), std::min(b.hi, nb.hi)};
        if (closed(b, opts.rel_tol)) return finish(b, it + 1, true);
    }

    // Inverse iteration stalled (very ill-conditioned shift); keep powering.
    for (; it < opts.max_iter; ++it) {
        k.gemv(n, n, work.data(), x.data(), ax.data());
        const Bracket nb = collatz_wielandt(x, ax);
        b = {std::max(b.lo, nb.lo), std::min(b.hi, nb.hi)};
        if (closed(b, opts.rel_tol)) return finish(b, it + 1, true);
        for (std::size_t i = 0; i < n; ++i) x[i] = ax[i] + opts.shift * x[i];
        normalize(x);
    }
    return finish(b, it, false);
}

Matrix submatrix(const Matrix& a, const std::vector<std::size_t>& idx) {
    Matrix s(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) s(i, j) = a(idx[i], idx[j]);
    return s;
}

void check_input(const Matrix& a) {
    if (!a.square()) throw InputError("Perron root requires a square matrix");
    for (double v : a.values()) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw NumericalError("Perron root requires a finite nonnegative matrix");
        }
    }
}

[[noreturn]] void throw_nonconvergence(const PerronResult& r, std::size_t n) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "Perron root did not converge after " << r.iterations << " iterations (n=" << n
        << ", bracket [" << r.lower << ", " << r.upper << "])";
    throw NumericalError(msg.str());
}

}  // namespace

std::vector<std::vector<std::size_t>> strongly_connected_components(const Matrix& a) {
    // Iterative Tarjan.
    const std::size_t n = a.rows();
    constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> index(n, kUnset), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> comps;
    std::size_t counter = 0;

    struct Frame {
        std::size_t v;
        std::size_t next;
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != kUnset) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.next < n) {
                const std::size_t w = f.next++;
                if (a(f.v, w) <= 0.0) continue;
                if (index[w] == kUnset) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
                continue;
            }
            const std::size_t v = f.v;
            call.pop_back();
            if (!call.empty()) {
                low[call.back().v] = std::min(low[call.back().v], low[v]);
            }
            if (low[v] == index[v]) {
                std::vector<std::size_t> comp;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                comps.push_back(std::move(comp));
            }
        }
    }
    return comps;
}

bool is_irreducible(const Matrix& a) {
    return a.rows() > 0 && strongly_connected_components(a).size() == 1;
}

std::size_t period(const Matrix& a) {
    const std::size_t n = a.rows();
    std::vector<long> level(n, -1);
    std::queue<std::size_t> q;
    level[0] = 0;
    q.push(0);
    std::size_t g = 0;
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (std::size_t v = 0; v < n; ++v) {
            if (a(u, v) <= 0.0) continue;
            if (level[v] < 0) {
                level[v] = level[u] + 1;
                q.push(v);
            } else {
                const long d = level[u] + 1 - level[v];
                g = std::gcd(g, static_cast<std::size_t>(d < 0 ? -d : d));
            }
        }
    }
    return g == 0 ? 0 : g;
}

PerronResult perron_root(const Matrix& a, const PerronOptions& opts) {
    check_input(a);
    const auto comps = strongly_connected_components(a);
    PerronResult best{};
    bool first = true;
    for (const auto& comp : comps) {
        PerronResult r = comps.size() == 1 ? irreducible_root(a, opts, true)
                                           : irreducible_root(submatrix(a, comp), opts, true);
        if (!r.converged) throw_nonconvergence(r, comp.size());
        if (first || r.value > best.value) {
            const long total = best.iterations + r.iterations;
            best = r;
            best.iterations = total;
            first = false;
        } else {
            best.iterations += r.iterations;
        }
    }
    return best;
}

double spectral_radius(const Matrix& a, const PerronOptions& opts) { return perron_root(a, opts).value; }

PerronResult perron_root_power_iteration(const Matrix& a, const PerronOptions& opts) {
    check_input(a);
    if (!is_irreducible(a)) {
        throw InputError("reference power iteration requires an irreducible matrix");
    }
    return irreducible_root(a, opts, false);
}

}  // namespace qbd
