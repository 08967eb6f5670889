#pragma once

#include <optional>

#include "qbd/linalg.hpp"
#include "qbd/model.hpp"
#include "qbd/qbd_core.hpp"

namespace qbd {

enum class Verdict { PositiveRecurrent, Transient, OutsideAssumption };

const char* to_string(Verdict v);

struct DriftReport {
    Vector pi_star;
    double a1 = 0.0;  // x1 drift of the boundary-free chain
    double a2 = 0.0;  // x2 drift of the boundary-free chain
    std::optional<double> a1_face1;  // x1 drift with only the x1-face kept; set iff a2 < 0
    std::optional<double> a2_face2;  // x2 drift with only the x2-face kept; set iff a1 < 0
    Verdict verdict = Verdict::OutsideAssumption;
    double zero_tol = 0.0;
};

/// Stationary vector of A_{*,*}. Throws PreconditionError if A_{*,*} is reducible.
Vector pi_star(const QbdModel& m);

/// Drifts are treated as zero when |a| <= zero_tol; zero drifts give
/// OutsideAssumption.
DriftReport drifts(const QbdModel& m, const KernelOptions& opts = {}, double zero_tol = 1e-12);

/// x1 drift of the chain that keeps only the x1-face, from its stationary vector.
double face1_drift(const QbdModel& m, const OneDQbdStationary& st);

}  // namespace qbd
