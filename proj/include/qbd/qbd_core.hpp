#pragma once

// Minimal nonnegative solutions of the matrix quadratic equations
//   G = A_{*,-1}(z) + A_{*,0}(z) G + A_{*,1}(z) G^2
//   R = A_{*,1}(z) + R A_{*,0}(z) + R^2 A_{*,-1}(z)
// and the associated H and N, plus the one-dimensional QBD stationary
// solver used for the face drifts.

#include <string>
#include <vector>

#include "qbd/linalg.hpp"
#include "qbd/model.hpp"
#include "qbd/spectral.hpp"

namespace qbd {

enum class KernelMethod { CyclicReduction, NaturalIteration };

const char* to_string(KernelMethod m);

struct KernelOptions {
    KernelMethod method = KernelMethod::CyclicReduction;
    double tol = 1e-12;
    long max_iter = 1000000;           // natural iteration cap
    long max_iter_tangent = 10000000;  // cap when z is an extreme point
    long progress_every = 10000;
    double tangent_tol = 1e-8;         // achievable residual at an extreme point
    SpectralOptions spectral{};
};

struct KernelResiduals {
    double quadratic_g = 0.0;  // |A_{-1} + A_0 G + A_1 G^2 - G|
    double quadratic_r = 0.0;  // |A_1 + R A_0 + R^2 A_{-1} - R|
    double g_identity = 0.0;   // |G - N A_{-1}|
    double r_identity = 0.0;   // |R - A_1 N|
    double inverse = 0.0;      // |(I - H) N - I|

    double max() const;
};

struct AxisKernels {
    int axis = 1;
    double z = 1.0;
    Matrix G, R, N, H;
    KernelResiduals residuals;
    long iterations = 0;
    KernelMethod method = KernelMethod::CyclicReduction;
    double scale = 1.0;       // cyclic reduction ran on G / scale
    bool at_extreme = false;  // z is (numerically) an end point of the admissible interval
    double tolerance = 0.0;   // the tolerance the residuals were held to
    double rcond = 0.0;       // reciprocal condition estimate of I - H
    std::vector<std::string> warnings;
};

/// Kernels for the x1-axis: G solves the G-equation with the x1-aggregated
/// blocks A_{*,j}(z). Throws OutsideIntervalError when z lies outside the
/// interval where the minimal solution exists, NumericalError otherwise.
AxisKernels solve_axis1(const QbdModel& m, double z, const KernelOptions& opts = {});

/// Same for the x2-axis: blocks A_{j,*}(w) aggregated over x2.
AxisKernels solve_axis2(const QbdModel& m, double w, const KernelOptions& opts = {});

/// max-norm of I - C - (w^{-1} I - R)(I - H)(w I - G), where C = C(z, w) for
/// axis-1 kernels and C(w, z) for axis-2 kernels.
double factorization_residual(const QbdModel& m, const AxisKernels& k, double w);

/// Stationary distribution of the one-dimensional QBD obtained by removing
/// one boundary. face = 1 keeps the x1-face (level x2, phases aggregated over
/// x1); face = 2 keeps the x2-face.
struct OneDQbdStationary {
    int face = 1;
    Vector pi0;      // level 0
    Vector pi1;      // level 1; level k >= 1 is pi1 R^{k-1}
    Matrix R_star;
    double normalization = 0.0;  // pi0 1 + pi1 (I - R)^{-1} 1 after scaling
    double balance_residual = 0.0;

    /// pi1 R^{k-1} for k >= 1, pi0 for k = 0.
    Vector level(int k) const;
};

/// Throws PreconditionError unless the induced one-dimensional chain is
/// positive recurrent (spr(R_star) < 1).
OneDQbdStationary qbd_stationary(int face, const QbdModel& m, const KernelOptions& opts = {});

}  // namespace qbd
