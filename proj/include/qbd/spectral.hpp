#pragma once

#include <complex>

#include "qbd/linalg.hpp"
#include "qbd/model.hpp"

namespace qbd {

struct SpectralOptions {
    double tol_eig = 1e-13;      // relative width of the Perron bracket
    long max_iter = 100000;      // Perron iteration cap
    double tol_root = 1e-10;     // |chi - 1| accepted at a reported root
    double tangent_gap = 1e-6;   // roots closer than this are one tangent root
    double tangent_slack = 1e-11;  // min chi this far above 1 still counts as touching
};

/// C(z1, z2) = sum_{i,j} A_{i,j} z1^i z2^j. Throws InputError unless z1, z2 > 0.
Matrix c_matrix(const QbdModel& m, double z1, double z2);

/// Perron root of C(z1, z2).
double chi(const QbdModel& m, double z1, double z2, const SpectralOptions& opts = {});

/// Minimum of the convex function s -> f(s), located by a downhill bracket
/// search from `start` followed by Brent's method. `value` is f(s).
struct LineMinimum {
    double s = 0.0;
    double value = 0.0;
    bool bounded = true;  // false if f kept decreasing up to |s| = 700
};

/// min over s2 of chi(z1, e^{s2}).
LineMinimum min_chi_over_s2(const QbdModel& m, double z1, const SpectralOptions& opts = {}, double start = 0.0);

enum class RootKind { TwoRoots, Tangent, NoRoot };

const char* to_string(RootKind k);

struct BranchRoots {
    RootKind kind = RootKind::NoRoot;
    double lower = 0.0;  // zeta lower, in z-space
    double upper = 0.0;  // zeta upper, in z-space
    double min_arg = 0.0;  // argmin of the line minimum (z-space)
    double min_value = 0.0;
};

/// Real solutions w of chi(z1, w) = 1.
BranchRoots branch_roots_2(const QbdModel& m, double z1, const SpectralOptions& opts = {});
/// Real solutions z of chi(z, z2) = 1.
BranchRoots branch_roots_1(const QbdModel& m, double z2, const SpectralOptions& opts = {});

/// Extreme points of the closed set {(s1, s2) : chi(e^{s1}, e^{s2}) <= 1} in z-space.
struct SpectralSummary {
    double z1_min = 0.0;
    double z1_max = 0.0;
    double z2_min = 0.0;
    double z2_max = 0.0;
    double tol_root = 0.0;
};

/// Each extreme is found by a bracketed root search on s1 -> min_{s2} chi - 1,
/// which is convex; the bracket doubles outward until the minimum exceeds 1.
/// Reported extremes sit on the outer side, so min chi there is >= 1 up to
/// rounding. Throws NumericalError if the set looks unbounded.
SpectralSummary extreme_points(const QbdModel& m, const SpectralOptions& opts = {});

/// Largest z1 with min_{s2} chi(z1, e^{s2}) <= 1 (the z1_max field above).
double z1_max_extreme(const QbdModel& m, const SpectralOptions& opts = {});

/// det(z w (C(z, w) - I)).
double kernel_det(const QbdModel& m, double z, double w);
std::complex<double> kernel_det(const QbdModel& m, std::complex<double> z, std::complex<double> w);

}  // namespace qbd
