#include "qbd/asymptotics.hpp"

#include <cmath>
#include <sstream>

#include "line_search.hpp"
#include "qbd/error.hpp"
#include "qbd/perron.hpp"

namespace qbd {

const char* to_string(QbdType t) {
    switch (t) {
        case QbdType::I: return "I";
        case QbdType::II: return "II";
        case QbdType::III: return "III";
    }
    return "?";
}

const char* to_string(FormTag t) {
    switch (t) {
        case FormTag::PureGeometric: return "PureGeometric";
        case FormTag::PolyHalfOddLower: return "PolyHalfOddLower";
        case FormTag::PolyHalfOddUpper: return "PolyHalfOddUpper";
        case FormTag::LinearTimesGeometric: return "LinearTimesGeometric";
        case FormTag::PlainAtBranch: return "PlainAtBranch";
        case FormTag::InverseSqrt: return "InverseSqrt";
    }
    return "?";
}

double psi1(const QbdModel& m, double z, const KernelOptions& opts) {
    const AxisKernels k = solve_axis1(m, z, opts);
    Matrix c1 = face1_col_poly(m, 0, z);
    c1 += face1_col_poly(m, 1, z) * k.G;
    PerronOptions po;
    po.rel_tol = opts.spectral.tol_eig;
    po.max_iter = opts.spectral.max_iter;
    return perron_root(c1, po).value;
}

double psi2(const QbdModel& m, double w, const KernelOptions& opts) { return psi1(m.swapped(), w, opts); }

namespace {

struct Theta {
    double theta = 0.0;
    bool multiple = false;
    bool jump = false;
    std::vector<double> scan;
};

// max{s in [0, s_max] : psi1(e^s) <= 1}, refined on the last upward crossing of the scan.
Theta critical_theta(const QbdModel& m, double s_max, const AsymptoticsOptions& opts) {
    const int n = std::max(opts.scan_points, 2);
    auto g = [&](double s) { return psi1(m, std::exp(s), opts.kernel) - 1.0; };
    Theta out;
    std::vector<double> s(n), v(n);
    for (int k = 0; k < n; ++k) {
        s[k] = k == n - 1 ? s_max : s_max * k / (n - 1);
        v[k] = g(s[k]);
        out.scan.push_back(v[k] + 1.0);
    }
    // psi1(1) = 1 exactly when the face chain is recurrent; rounding must not
    // make the origin look like a crossing.
    if (std::fabs(v[0]) < 1e-9) v[0] = 0.0;
    int ups = 0;
    int last = -1;
    for (int k = 0; k + 1 < n; ++k) {
        if (std::fabs(v[k + 1] - v[k]) >= 0.2) out.jump = true;
        if (v[k] <= 0.0 && v[k + 1] > 0.0) {
            ++ups;
            last = k;
        }
    }
    out.multiple = ups > 1;
    if (v[n - 1] <= 0.0) {
        out.theta = s_max;
        return out;
    }
    if (last < 0) {
        // psi1 > 1 on the whole scan except possibly at 0
        out.theta = 0.0;
        return out;
    }
    const auto r = detail::bracketed_root(g, s[last], s[last + 1], v[last], v[last + 1], 1e-13);
    out.theta = r.first;
    return out;
}

void log_branch(const QbdModel& m, double theta1, const SpectralOptions& sopts, double& lower, double& upper) {
    const BranchRoots br = branch_roots_2(m, std::exp(theta1), sopts);
    if (br.kind == RootKind::NoRoot) {
        std::ostringstream msg;
        msg.precision(15);
        msg << "no branch root at the critical point s=" << theta1 << " (min chi " << br.min_value << ")";
        throw NumericalError(msg.str());
    }
    lower = std::log(br.lower);
    upper = std::log(br.upper);
}

}  // namespace

CriticalPoints critical_points(const QbdModel& m, const SpectralSummary& ext, const AsymptoticsOptions& opts) {
    const QbdModel sw = m.swapped();
    CriticalPoints cp;
    cp.s1_max = std::log(ext.z1_max);
    cp.s2_max = std::log(ext.z2_max);

    Theta t1 = critical_theta(m, cp.s1_max, opts);
    cp.theta1 = t1.theta;
    cp.multiple_crossings_1 = t1.multiple;
    cp.scan_jump_1 = t1.jump;
    cp.psi1_scan = std::move(t1.scan);
    log_branch(m, cp.theta1, opts.kernel.spectral, cp.theta2, cp.theta2_bar);

    Theta t2 = critical_theta(sw, cp.s2_max, opts);
    cp.eta2 = t2.theta;
    cp.multiple_crossings_2 = t2.multiple;
    cp.scan_jump_2 = t2.jump;
    cp.psi2_scan = std::move(t2.scan);
    log_branch(sw, cp.eta2, opts.kernel.spectral, cp.eta1, cp.eta1_bar);
    return cp;
}

CriticalPoints critical_points(const QbdModel& m, const AsymptoticsOptions& opts) {
    return critical_points(m, extreme_points(m, opts.kernel.spectral), opts);
}

namespace {

void flag_if_close(std::vector<std::string>& flags, const char* what, double a, double b, double band) {
    if (std::fabs(a - b) <= 10.0 * band) {
        std::ostringstream msg;
        msg.precision(6);
        msg << what << " (difference " << (a - b) << ", band " << band << ")";
        flags.push_back(msg.str());
    }
}

}  // namespace

TypeDecision classify_type(const CriticalPoints& cp, double eq_tol) {
    auto lt = [eq_tol](double a, double b) { return b - a > eq_tol; };
    TypeDecision d;
    const bool eta1_lt_theta1 = lt(cp.eta1, cp.theta1);
    const bool theta2_lt_eta2 = lt(cp.theta2, cp.eta2);
    flag_if_close(d.equality_flags, "eta1 vs theta1", cp.eta1, cp.theta1, eq_tol);
    flag_if_close(d.equality_flags, "theta2 vs eta2", cp.theta2, cp.eta2, eq_tol);
    if (eta1_lt_theta1 && theta2_lt_eta2) {
        d.type = QbdType::I;
    } else if (eta1_lt_theta1) {
        d.type = QbdType::II;
    } else if (theta2_lt_eta2) {
        d.type = QbdType::III;
    } else {
        std::ostringstream msg;
        msg.precision(12);
        msg << "critical points fit no configuration: theta=(" << cp.theta1 << ", " << cp.theta2 << "), eta=("
            << cp.eta1 << ", " << cp.eta2 << ")";
        throw NumericalError(msg.str());
    }
    return d;
}

DecayRates decay_rates(const CriticalPoints& cp, QbdType type) {
    DecayRates r;
    switch (type) {
        case QbdType::I:
            r.xi1 = cp.theta1;
            r.xi2 = cp.eta2;
            break;
        case QbdType::II:
            r.xi1 = cp.eta1_bar;
            r.xi2 = cp.eta2;
            break;
        case QbdType::III:
            r.xi1 = cp.theta1;
            r.xi2 = cp.theta2_bar;
            break;
    }
    r.r1 = std::exp(r.xi1);
    r.r2 = std::exp(r.xi2);
    return r;
}

int psi_sign(double psi, double band) {
    const double d = psi - 1.0;
    return d > band ? 1 : (d < -band ? -1 : 0);
}

namespace {

// Type I selection along one axis.
FormClass type1_form(double psi_at_max, double r, double z_max, double band) {
    switch (psi_sign(psi_at_max, band)) {
        case 1: return {FormTag::PureGeometric, r};
        case 0: return {FormTag::PolyHalfOddLower, z_max};
        default: return {FormTag::PolyHalfOddUpper, z_max};
    }
}

// Type II h1 (or Type III h2) when the two critical points share the
// relevant coordinate.
FormClass touching_form(double psi_at_max, double r, double z_max, double band) {
    switch (psi_sign(psi_at_max, band)) {
        case 1: return {FormTag::LinearTimesGeometric, r};
        case 0: return {FormTag::PlainAtBranch, z_max};
        default: return {FormTag::InverseSqrt, z_max};
    }
}

}  // namespace

FormSelection form_classes(const CriticalPoints& cp, QbdType type, double psi1_at_zmax, double psi2_at_zmax,
                           double eq_tol, double psi_band) {
    const DecayRates r = decay_rates(cp, type);
    const double z1_max = std::exp(cp.s1_max);
    const double z2_max = std::exp(cp.s2_max);
    const double band = std::max(eq_tol, psi_band);
    FormSelection out;
    switch (type) {
        case QbdType::I:
            out.h1 = type1_form(psi1_at_zmax, r.r1, z1_max, band);
            out.h2 = type1_form(psi2_at_zmax, r.r2, z2_max, band);
            flag_if_close(out.equality_flags, "psi1(z1_max) vs 1", psi1_at_zmax, 1.0, band);
            flag_if_close(out.equality_flags, "psi2(z2_max) vs 1", psi2_at_zmax, 1.0, band);
            break;
        case QbdType::II:
            out.h2 = {FormTag::PureGeometric, r.r2};
            flag_if_close(out.equality_flags, "eta2 vs theta2", cp.eta2, cp.theta2, eq_tol);
            if (cp.theta2 - cp.eta2 > eq_tol) {
                out.h1 = {FormTag::PureGeometric, r.r1};
            } else {
                out.h1 = touching_form(psi1_at_zmax, r.r1, z1_max, band);
                flag_if_close(out.equality_flags, "psi1(z1_max) vs 1", psi1_at_zmax, 1.0, band);
            }
            break;
        case QbdType::III:
            out.h1 = {FormTag::PureGeometric, r.r1};
            flag_if_close(out.equality_flags, "theta1 vs eta1", cp.theta1, cp.eta1, eq_tol);
            if (cp.eta1 - cp.theta1 > eq_tol) {
                out.h2 = {FormTag::PureGeometric, r.r2};
            } else {
                out.h2 = touching_form(psi2_at_zmax, r.r2, z2_max, band);
                flag_if_close(out.equality_flags, "psi2(z2_max) vs 1", psi2_at_zmax, 1.0, band);
            }
            break;
    }
    return out;
}

FormSelection form_classes(const QbdModel& m, const CriticalPoints& cp, QbdType type,
                           const AsymptoticsOptions& opts) {
    const double p1 = cp.psi1_scan.empty() ? psi1(m, std::exp(cp.s1_max), opts.kernel) : cp.psi1_scan.back();
    const double p2 = cp.psi2_scan.empty() ? psi2(m, std::exp(cp.s2_max), opts.kernel) : cp.psi2_scan.back();
    return form_classes(cp, type, p1, p2, opts.eq_tol, opts.psi_band);
}

AsymptoticsReport analyze_asymptotics(const QbdModel& m, const AsymptoticsOptions& opts) {
    AsymptoticsReport rep;
    rep.eq_tol = opts.eq_tol;
    rep.psi_band = std::max(opts.eq_tol, opts.psi_band);
    rep.extremes = extreme_points(m, opts.kernel.spectral);
    rep.cp = critical_points(m, rep.extremes, opts);
    const TypeDecision td = classify_type(rep.cp, opts.eq_tol);
    rep.type = td.type;
    rep.rates = decay_rates(rep.cp, rep.type);
    rep.psi1_at_zmax = rep.cp.psi1_scan.back();
    rep.psi2_at_zmax = rep.cp.psi2_scan.back();
    const FormSelection fs = form_classes(rep.cp, rep.type, rep.psi1_at_zmax, rep.psi2_at_zmax, opts.eq_tol,
                                          opts.psi_band);
    rep.h1 = fs.h1;
    rep.h2 = fs.h2;
    rep.equality_flags = td.equality_flags;
    rep.equality_flags.insert(rep.equality_flags.end(), fs.equality_flags.begin(), fs.equality_flags.end());
    return rep;
}

}  // namespace qbd
