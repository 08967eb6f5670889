#pragma once

// Perron roots of nonnegative matrices and the directed-graph checks that
// go with them (irreducibility, period).

#include <cstddef>
#include <vector>

#include "qbd/linalg.hpp"

namespace qbd {

struct PerronOptions {
    double rel_tol = 1e-13;  // on the Collatz-Wielandt bracket width
    long max_iter = 100000;
    double shift = 1.0;      // power iteration runs on A + shift * I
};

struct PerronResult {
    double value = 0.0;
    double lower = 0.0;  // Collatz-Wielandt lower bound
    double upper = 0.0;  // Collatz-Wielandt upper bound
    long iterations = 0;
    bool converged = false;
};

/// Spectral radius of a nonnegative matrix. The matrix is split into strongly
/// connected components; each irreducible block runs a short shifted power
/// iteration and then shifted inverse iteration with the shift above the
/// root, so every iterate stays positive and the Collatz-Wielandt quotients
/// bracket the root. Throws NumericalError if the bracket does not close
/// within max_iter.
PerronResult perron_root(const Matrix& a, const PerronOptions& opts = {});

/// Convenience wrapper returning perron_root(a).value.
double spectral_radius(const Matrix& a, const PerronOptions& opts = {});

/// Plain shifted power iteration on an irreducible nonnegative matrix, with
/// no inverse-iteration acceleration. Slow; kept as an independent reference.
PerronResult perron_root_power_iteration(const Matrix& a, const PerronOptions& opts = {});

/// Strongly connected components of the graph with an edge i -> j iff a(i,j) > 0.
std::vector<std::vector<std::size_t>> strongly_connected_components(const Matrix& a);

bool is_irreducible(const Matrix& a);

/// Period of an irreducible nonnegative matrix (1 means aperiodic).
std::size_t period(const Matrix& a);

}  // namespace qbd
