#pragma once

// Stationary distribution of the chain restricted to the window
// [0, N] x [0, N]. Transitions that would leave the window are folded into
// the diagonal of the row, so the truncated matrix stays stochastic; this
// biases the far edge by roughly r^{-N}.

#include <iosfwd>
#include <vector>

#include "qbd/model.hpp"

namespace qbd {

enum class OracleMethod { GaussSeidel, PowerIteration };

const char* to_string(OracleMethod m);

struct OracleOptions {
    OracleMethod method = OracleMethod::GaussSeidel;
    double tol = 1e-13;      // max relative change per sweep on entries above 1e-280
    long max_sweeps = 2000000;
};

struct TruncatedSolution {
    int N = 0;
    std::size_t s0 = 0;
    std::vector<double> nu;  // index ((k * (N + 1)) + l) * s0 + j
    OracleMethod method = OracleMethod::GaussSeidel;
    double residual = 0.0;   // max |nu P - nu|
    double mass = 0.0;
    long sweeps = 0;

    double at(int k, int l, std::size_t j) const {
        return nu[(static_cast<std::size_t>(k) * static_cast<std::size_t>(N + 1) + static_cast<std::size_t>(l)) * s0 + j];
    }
    /// Sum over phases at (k, 0) for axis 1, (0, k) for axis 2.
    double axis_mass(int axis, int k) const;
};

/// Throws InputError for N < 5, NumericalError if the iteration budget runs out.
TruncatedSolution truncated_stationary(const QbdModel& m, int N, const OracleOptions& opts = {});

struct EmpiricalDecay {
    std::vector<int> k;          // denominators' index
    std::vector<double> ratios;  // mass(k + 1) / mass(k)
    double median = 0.0;
    double stddev = 0.0;
};

/// Ratios over k in [k_lo, k_hi); requires k_hi < N - 5. Denominators below
/// 1e-250 are dropped.
EmpiricalDecay empirical_decay(const TruncatedSolution& sol, int axis, int k_lo, int k_hi);
/// Window (0.4 N, 0.8 N).
EmpiricalDecay empirical_decay(const TruncatedSolution& sol, int axis);

/// Columns k,l,j,probability.
void write_csv(const TruncatedSolution& sol, std::ostream& out);

}  // namespace qbd
