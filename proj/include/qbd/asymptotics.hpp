#pragma once

#include <string>
#include <vector>

#include "qbd/model.hpp"
#include "qbd/qbd_core.hpp"
#include "qbd/spectral.hpp"

namespace qbd {

struct AsymptoticsOptions {
    double eq_tol = 1e-8;     // differences below this count as equalities
    double psi_band = 1e-6;   // minimum band for psi(z_max) = 1 (kernel is only 1e-8 accurate there)
    int scan_points = 33;
    KernelOptions kernel{};
};

/// psi1(z) = spr(A1_{*,0}(z) + A1_{*,1}(z) G1(z)).
double psi1(const QbdModel& m, double z, const KernelOptions& opts = {});
/// psi2(w), the same quantity for the x2-face.
double psi2(const QbdModel& m, double w, const KernelOptions& opts = {});

/// Critical points in log scale.
struct CriticalPoints {
    double theta1 = 0.0, theta2 = 0.0, theta2_bar = 0.0;
    double eta1 = 0.0, eta2 = 0.0, eta1_bar = 0.0;
    double s1_max = 0.0, s2_max = 0.0;  // log of the upper extreme points
    bool multiple_crossings_1 = false;  // psi1 scan crossed 1 upward more than once
    bool multiple_crossings_2 = false;
    bool scan_jump_1 = false;  // adjacent scan values of psi1 differ by >= 0.2
    bool scan_jump_2 = false;
    std::vector<double> psi1_scan, psi2_scan;  // psi on the uniform grid over [0, s_max]
};

CriticalPoints critical_points(const QbdModel& m, const SpectralSummary& ext, const AsymptoticsOptions& opts = {});
CriticalPoints critical_points(const QbdModel& m, const AsymptoticsOptions& opts = {});

enum class QbdType { I, II, III };
const char* to_string(QbdType t);

struct TypeDecision {
    QbdType type = QbdType::I;
    std::vector<std::string> equality_flags;
};

/// Throws NumericalError when the points match none of the three configurations.
TypeDecision classify_type(const CriticalPoints& cp, double eq_tol = 1e-8);

struct DecayRates {
    double xi1 = 0.0, xi2 = 0.0;
    double r1 = 1.0, r2 = 1.0;
};

DecayRates decay_rates(const CriticalPoints& cp, QbdType type);

enum class FormTag { PureGeometric, PolyHalfOddLower, PolyHalfOddUpper, LinearTimesGeometric, PlainAtBranch, InverseSqrt };
const char* to_string(FormTag t);

/// h(k) up to a constant: PureGeometric r^{-k}; PolyHalfOddLower k^{-(2l-1)/2} r^{-k};
/// PolyHalfOddUpper k^{-(2l+1)/2} r^{-k}; LinearTimesGeometric k r^{-k};
/// PlainAtBranch r^{-k} with r the extreme point; InverseSqrt k^{-1/2} r^{-k}.
struct FormClass {
    FormTag tag = FormTag::PureGeometric;
    double rate = 1.0;
};

struct FormSelection {
    FormClass h1, h2;
    std::vector<std::string> equality_flags;
};

/// -1, 0, +1 as psi - 1 lies below, inside or above [-band, band].
int psi_sign(double psi, double band);

/// Branch selection given psi at the two upper extreme points.
FormSelection form_classes(const CriticalPoints& cp, QbdType type, double psi1_at_zmax, double psi2_at_zmax,
                           double eq_tol = 1e-8, double psi_band = 1e-6);
/// Same, evaluating psi at the extreme points of the model.
FormSelection form_classes(const QbdModel& m, const CriticalPoints& cp, QbdType type,
                           const AsymptoticsOptions& opts = {});

struct AsymptoticsReport {
    SpectralSummary extremes;
    CriticalPoints cp;
    QbdType type = QbdType::I;
    DecayRates rates;
    double psi1_at_zmax = 0.0;
    double psi2_at_zmax = 0.0;
    FormClass h1, h2;
    std::vector<std::string> equality_flags;
    double eq_tol = 0.0;
    double psi_band = 0.0;
};

/// Extremes, critical points, type, rates and form classes. Assumes the model
/// is positive recurrent.
AsymptoticsReport analyze_asymptotics(const QbdModel& m, const AsymptoticsOptions& opts = {});

}  // namespace qbd
