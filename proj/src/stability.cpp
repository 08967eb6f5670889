#include "qbd/stability.hpp"

#include <cmath>

#include "qbd/error.hpp"
#include "qbd/perron.hpp"

namespace qbd {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::PositiveRecurrent: return "PositiveRecurrent";
        case Verdict::Transient: return "Transient";
        case Verdict::OutsideAssumption: return "OutsideAssumption";
    }
    return "?";
}

Vector pi_star(const QbdModel& m) {
    const Matrix total = family_sum(m, Family::Interior);
    if (!is_irreducible(total)) throw PreconditionError("A_{*,*} is reducible; its stationary vector is not unique");
    return stationary_distribution(total);
}

namespace {

// (sum over j of A_{1,j} - A_{-1,j}) 1, the per-phase mean x1-jump.
Vector interior_x1_jump(const QbdModel& m) {
    Matrix d = Matrix::zeros(m.phases());
    for (int j = -1; j <= 1; ++j) {
        d += m.interior(1, j);
        d -= m.interior(-1, j);
    }
    return d.row_sums();
}

double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

int sign(double a, double tol) { return a > tol ? 1 : (a < -tol ? -1 : 0); }

}  // namespace

double face1_drift(const QbdModel& m, const OneDQbdStationary& st) {
    const std::size_t n = m.phases();
    Matrix d0 = Matrix::zeros(n);
    for (int j = 0; j <= 1; ++j) {
        d0 += m.face1(1, j);
        d0 -= m.face1(-1, j);
    }
    const Vector jump = interior_x1_jump(m);
    const Vector tail = LuDecomposition(Matrix::identity(n) - st.R_star).solve(jump);
    return dot(st.pi0, d0.row_sums()) + dot(st.pi1, tail);
}

DriftReport drifts(const QbdModel& m, const KernelOptions& opts, double zero_tol) {
    DriftReport r;
    r.zero_tol = zero_tol;
    r.pi_star = pi_star(m);
    r.a1 = dot(r.pi_star, interior_x1_jump(m));
    const QbdModel sw = m.swapped();
    r.a2 = dot(r.pi_star, interior_x1_jump(sw));

    const int s1 = sign(r.a1, zero_tol);
    const int s2 = sign(r.a2, zero_tol);
    if (s2 < 0) r.a1_face1 = face1_drift(m, qbd_stationary(1, m, opts));
    if (s1 < 0) r.a2_face2 = face1_drift(sw, qbd_stationary(1, sw, opts));

    if (s1 == 0 || s2 == 0 || (s1 > 0 && s2 > 0)) {
        r.verdict = Verdict::OutsideAssumption;
        return r;
    }
    // Each required face drift must be strictly negative; a positive one
    // means the walk escapes along that face.
    int worst = -1;
    if (s2 < 0 && s1 > 0) worst = sign(*r.a1_face1, zero_tol);
    if (s1 < 0 && s2 > 0) worst = sign(*r.a2_face2, zero_tol);
    if (s1 < 0 && s2 < 0) worst = std::max(sign(*r.a1_face1, zero_tol), sign(*r.a2_face2, zero_tol));
    r.verdict = worst < 0 ? Verdict::PositiveRecurrent : (worst > 0 ? Verdict::Transient : Verdict::OutsideAssumption);
    return r;
}

}  // namespace qbd
