#include "qbd/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <sstream>

#include "qbd/error.hpp"
#include "qbd/kernels.hpp"
#include "qbd/linalg.hpp"

namespace qbd {

const char* to_string(OracleMethod m) {
    return m == OracleMethod::GaussSeidel ? "GaussSeidel" : "PowerIteration";
}

double TruncatedSolution::axis_mass(int axis, int k) const {
    double s = 0.0;
    for (std::size_t j = 0; j < s0; ++j) s += axis == 1 ? at(k, 0, j) : at(0, k, j);
    return s;
}

namespace {

constexpr double kTiny = 1e-280;

// Block for a jump (i, j) out of lattice point (k, l), or nullptr.
const Matrix* jump_block(const QbdModel& m, int k, int l, int i, int j) {
    if (k > 0 && l > 0) return &m.interior(i, j);
    if (k > 0) return j >= 0 ? &m.face1(i, j) : nullptr;
    if (l > 0) return i >= 0 ? &m.face2(i, j) : nullptr;
    return i >= 0 && j >= 0 ? &m.origin(i, j) : nullptr;
}

const Matrix* nonzero_block(const QbdModel& m, int k, int l, int i, int j) {
    const Matrix* b = jump_block(m, k, l, i, j);
    return b != nullptr && max_abs(*b) > 0.0 ? b : nullptr;
}

int edge_class(int x, int N) { return x == 0 ? 0 : (x == N ? 2 : 1); }

class TruncatedChain {
public:
    TruncatedChain(const QbdModel& m, int N) : N_(N), s0_(m.phases()) {
        for (int kc = 0; kc < 3; ++kc) {
            for (int lc = 0; lc < 3; ++lc) {
                const int k = kc == 0 ? 0 : (kc == 1 ? 1 : N);
                const int l = lc == 0 ? 0 : (lc == 1 ? 1 : N);
                Matrix diag = *jump_block(m, k, l, 0, 0);
                for (int i = -1; i <= 1; ++i) {
                    for (int j = -1; j <= 1; ++j) {
                        if (i == 0 && j == 0) continue;
                        const Matrix* b = jump_block(m, k, l, i, j);
                        if (b == nullptr || inside(k + i, l + j)) continue;
                        const Vector lost = b->row_sums();
                        for (std::size_t r = 0; r < s0_; ++r) diag(r, r) += lost[r];
                    }
                }
                LuDecomposition lu(Matrix::identity(s0_) - diag);
                if (lu.singular()) throw NumericalError("truncated chain has an absorbing lattice point");
                self_[kc][lc] = diag;
                inv_[kc][lc] = lu.inverse();
            }
        }
        for (int kb = 0; kb < 2; ++kb)
            for (int lb = 0; lb < 2; ++lb)
                for (int i = -1; i <= 1; ++i)
                    for (int j = -1; j <= 1; ++j)
                        out_[kb][lb][i + 1][j + 1] = (i == 0 && j == 0) ? nullptr : nonzero_block(m, kb, lb, i, j);
    }

    bool inside(int k, int l) const { return k >= 0 && l >= 0 && k <= N_ && l <= N_; }
    std::size_t offset(int k, int l) const {
        return (static_cast<std::size_t>(k) * static_cast<std::size_t>(N_ + 1) + static_cast<std::size_t>(l)) * s0_;
    }

    // acc = sum over neighbours q != p of x_q P_{q,p}.
    void incoming(const std::vector<double>& x, int k, int l, double* acc, double* tmp) const {
        const auto& kt = kernels::active();
        std::fill(acc, acc + s0_, 0.0);
        for (int i = -1; i <= 1; ++i) {
            for (int j = -1; j <= 1; ++j) {
                if (i == 0 && j == 0) continue;
                const int qk = k - i, ql = l - j;
                if (!inside(qk, ql)) continue;
                const Matrix* b = out_[qk > 0][ql > 0][i + 1][j + 1];
                if (b == nullptr) continue;
                kt.gevm(s0_, s0_, x.data() + offset(qk, ql), b->data(), tmp);
                kt.axpy(s0_, 1.0, tmp, acc);
            }
        }
    }

    const Matrix& self(int k, int l) const { return self_[edge_class(k, N_)][edge_class(l, N_)]; }
    const Matrix& inv(int k, int l) const { return inv_[edge_class(k, N_)][edge_class(l, N_)]; }

    std::size_t size() const { return offset(N_ + 1, 0); }
    int N() const { return N_; }
    std::size_t s0() const { return s0_; }

    // max |x P - x|
    double residual(const std::vector<double>& x) const {
        std::vector<double> acc(s0_), tmp(s0_);
        double r = 0.0;
        for (int k = 0; k <= N_; ++k) {
            for (int l = 0; l <= N_; ++l) {
                incoming(x, k, l, acc.data(), tmp.data());
                kernels::active().gevm(s0_, s0_, x.data() + offset(k, l), self(k, l).data(), tmp.data());
                for (std::size_t j = 0; j < s0_; ++j)
                    r = std::max(r, std::fabs(acc[j] + tmp[j] - x[offset(k, l) + j]));
            }
        }
        return r;
    }

private:
    int N_;
    std::size_t s0_;
    std::array<std::array<Matrix, 3>, 3> self_;
    std::array<std::array<Matrix, 3>, 3> inv_;
    // Nonzero off-diagonal jump blocks by (k > 0, l > 0, i + 1, j + 1).
    const Matrix* out_[2][2][3][3];
};

void normalize(std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    for (double& v : x) v /= s;
}

double relative_change(double before, double after) {
    if (after < kTiny && before < kTiny) return 0.0;
    return std::fabs(after - before) / std::max(after, kTiny);
}

long gauss_seidel(const TruncatedChain& ch, std::vector<double>& x, const OracleOptions& opts) {
    const std::size_t s0 = ch.s0();
    std::vector<double> acc(s0), tmp(s0), next(s0);
    for (long sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        double change = 0.0;
        for (int k = 0; k <= ch.N(); ++k) {
            for (int l = 0; l <= ch.N(); ++l) {
                ch.incoming(x, k, l, acc.data(), tmp.data());
                kernels::active().gevm(s0, s0, acc.data(), ch.inv(k, l).data(), next.data());
                double* cur = x.data() + ch.offset(k, l);
                for (std::size_t j = 0; j < s0; ++j) {
                    change = std::max(change, relative_change(cur[j], next[j]));
                    cur[j] = next[j];
                }
            }
        }
        normalize(x);
        if (change < opts.tol) return sweep;
    }
    return -1;
}

long power_iteration(const TruncatedChain& ch, std::vector<double>& x, const OracleOptions& opts) {
    const std::size_t s0 = ch.s0();
    std::vector<double> y(x.size()), acc(s0), tmp(s0);
    for (long it = 1; it <= opts.max_sweeps; ++it) {
        double change = 0.0;
        for (int k = 0; k <= ch.N(); ++k) {
            for (int l = 0; l <= ch.N(); ++l) {
                ch.incoming(x, k, l, acc.data(), tmp.data());
                const std::size_t off = ch.offset(k, l);
                kernels::active().gevm(s0, s0, x.data() + off, ch.self(k, l).data(), tmp.data());
                for (std::size_t j = 0; j < s0; ++j) y[off + j] = acc[j] + tmp[j];
            }
        }
        normalize(y);
        for (std::size_t i = 0; i < x.size(); ++i) change = std::max(change, relative_change(x[i], y[i]));
        x.swap(y);
        if (change < opts.tol) return it;
    }
    return -1;
}

}  // namespace

TruncatedSolution truncated_stationary(const QbdModel& m, int N, const OracleOptions& opts) {
    if (N < 5) throw InputError("truncation level N must be at least 5");
    const TruncatedChain ch(m, N);
    TruncatedSolution sol;
    sol.N = N;
    sol.s0 = m.phases();
    sol.method = opts.method;
    // Any positive start works; a product-form decay reaches the tail faster than a flat one.
    sol.nu.resize(ch.size());
    for (int k = 0; k <= N; ++k)
        for (int l = 0; l <= N; ++l)
            for (std::size_t j = 0; j < sol.s0; ++j) sol.nu[ch.offset(k, l) + j] = std::ldexp(1.0, -(k + l));
    normalize(sol.nu);

    const long it = opts.method == OracleMethod::GaussSeidel ? gauss_seidel(ch, sol.nu, opts)
                                                              : power_iteration(ch, sol.nu, opts);
    if (it < 0) {
        std::ostringstream msg;
        msg << to_string(opts.method) << " did not reach relative change " << opts.tol << " within " << opts.max_sweeps
            << " sweeps";
        throw NumericalError(msg.str());
    }
    sol.sweeps = it;
    for (double& v : sol.nu) v = std::max(v, 0.0);
    normalize(sol.nu);
    sol.mass = 0.0;
    for (double v : sol.nu) sol.mass += v;
    sol.residual = ch.residual(sol.nu);
    return sol;
}

EmpiricalDecay empirical_decay(const TruncatedSolution& sol, int axis, int k_lo, int k_hi) {
    if (axis != 1 && axis != 2) throw InputError("axis must be 1 or 2");
    if (k_lo < 0 || k_hi <= k_lo) throw InputError("empty ratio window");
    if (k_hi >= sol.N - 5) {
        throw InputError("ratio window must end below N - 5 (window too small for N=" + std::to_string(sol.N) + ")");
    }
    EmpiricalDecay out;
    for (int k = k_lo; k < k_hi; ++k) {
        const double den = sol.axis_mass(axis, k);
        if (den < 1e-250) continue;
        out.k.push_back(k);
        out.ratios.push_back(sol.axis_mass(axis, k + 1) / den);
    }
    if (out.ratios.empty()) throw NumericalError("no usable ratios in the window (underflow)");
    std::vector<double> sorted = out.ratios;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    out.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    double mean = 0.0;
    for (double r : out.ratios) mean += r;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double r : out.ratios) var += (r - mean) * (r - mean);
    out.stddev = std::sqrt(var / static_cast<double>(n));
    return out;
}

EmpiricalDecay empirical_decay(const TruncatedSolution& sol, int axis) {
    return empirical_decay(sol, axis, static_cast<int>(0.4 * sol.N), static_cast<int>(0.8 * sol.N));
}

void write_csv(const TruncatedSolution& sol, std::ostream& out) {
    out << "k,l,j,probability\n";
    char buf[64];
    for (int k = 0; k <= sol.N; ++k) {
        for (int l = 0; l <= sol.N; ++l) {
            for (std::size_t j = 0; j < sol.s0; ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", sol.at(k, l, j));
                out << k << ',' << l << ',' << j << ',' << buf << '\n';
            }
        }
    }
}

}  // namespace qbd
