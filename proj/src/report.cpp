#include "qbd/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "json.hpp"
#include "qbd/error.hpp"

namespace qbd {

using nlohmann::json;

void apply_env_overrides(AnalyzeOptions& opts) {
    const char* env = std::getenv("QBD_MAX_ITER");
    if (env == nullptr || *env == '\0') return;
    const std::string_view text(env);
    long cap = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), cap);
    if (ec != std::errc() || ptr != text.data() + text.size() || cap <= 0) {
        throw InputError("QBD_MAX_ITER must be a positive integer, got '" + std::string(text) + "'");
    }
    auto& k = opts.asymptotics.kernel;
    k.max_iter = cap;
    k.max_iter_tangent = cap;
    k.spectral.max_iter = cap;
    opts.oracle.max_sweeps = cap;
}

ToleranceSet ToleranceSet::from(const AnalyzeOptions& o) {
    const auto& k = o.asymptotics.kernel;
    ToleranceSet t;
    t.kernel_tol = k.tol;
    t.tangent_tol = k.tangent_tol;
    t.eig_tol = k.spectral.tol_eig;
    t.root_tol = k.spectral.tol_root;
    t.tangent_gap = k.spectral.tangent_gap;
    t.tangent_slack = k.spectral.tangent_slack;
    t.eq_tol = o.asymptotics.eq_tol;
    t.psi_band = std::max(o.asymptotics.eq_tol, o.asymptotics.psi_band);
    t.zero_drift_tol = o.zero_drift_tol;
    t.stochastic_tol = o.stochastic_tol;
    t.oracle_tol = o.oracle.tol;
    t.max_iter = k.max_iter;
    t.max_iter_tangent = k.max_iter_tangent;
    t.oracle_max_sweeps = o.oracle.max_sweeps;
    return t;
}

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

}  // namespace

AnalysisBundle analyze(const QbdModel& m, const ModelDescriptor& desc, const AnalyzeOptions& opts) {
    AnalysisBundle b;
    b.tolerances = ToleranceSet::from(opts);
    b.model = desc;
    b.model.phases = m.phases();
    b.validation = validate(m, opts.stochastic_tol);
    if (!b.validation.ok()) {
        std::string msg = "model failed validation:";
        for (const auto& v : b.validation.violations) msg += " " + v + ";";
        throw InputError(msg);
    }

    const auto& ao = opts.asymptotics;
    b.drifts = stage("drifts", [&] { return drifts(m, ao.kernel, opts.zero_drift_tol); });
    if (b.drifts.verdict != Verdict::PositiveRecurrent) {
        b.warnings.push_back(std::string("verdict ") + to_string(b.drifts.verdict) +
                             ": asymptotics apply only to positive recurrent models and were skipped");
        return b;
    }

    AsymptoticsReport rep;
    rep.eq_tol = ao.eq_tol;
    rep.psi_band = std::max(ao.eq_tol, ao.psi_band);
    rep.extremes = stage("extremes", [&] { return extreme_points(m, ao.kernel.spectral); });
    rep.cp = stage("critical_points", [&] { return critical_points(m, rep.extremes, ao); });
    const TypeDecision td = stage("type", [&] { return classify_type(rep.cp, ao.eq_tol); });
    rep.type = td.type;
    rep.rates = decay_rates(rep.cp, rep.type);
    rep.psi1_at_zmax = rep.cp.psi1_scan.back();
    rep.psi2_at_zmax = rep.cp.psi2_scan.back();
    const FormSelection fs = stage("forms", [&] {
        return form_classes(rep.cp, rep.type, rep.psi1_at_zmax, rep.psi2_at_zmax, ao.eq_tol, ao.psi_band);
    });
    rep.h1 = fs.h1;
    rep.h2 = fs.h2;
    rep.equality_flags = td.equality_flags;
    rep.equality_flags.insert(rep.equality_flags.end(), fs.equality_flags.begin(), fs.equality_flags.end());

    if (rep.cp.multiple_crossings_1 || rep.cp.multiple_crossings_2)
        b.warnings.push_back("psi crossed 1 upward more than once on the scan; the last crossing was used");
    if (rep.cp.scan_jump_1 || rep.cp.scan_jump_2)
        b.warnings.push_back("adjacent psi scan values differ by 0.2 or more; the scan may be too coarse");
    b.asymptotics = std::move(rep);
    return b;
}

OracleComparison compare_with_oracle(const QbdModel& m, const AsymptoticsReport& rep, int N, int axis,
                                     const OracleOptions& opts) {
    if (axis != 1 && axis != 2) throw InputError("axis must be 1 or 2");
    if (N < 7) throw InputError("truncation N must be at least 7 to leave a ratio window below N - 5");
    OracleComparison c;
    c.axis = axis;
    c.N = N;
    c.method = to_string(opts.method);
    c.k_hi = std::min(static_cast<int>(0.8 * N), N - 6);
    c.k_lo = std::min(static_cast<int>(0.4 * N), c.k_hi - 1);

    const TruncatedSolution sol = truncated_stationary(m, N, opts);
    const EmpiricalDecay ed = empirical_decay(sol, axis, c.k_lo, c.k_hi);
    if (N < 50 || ed.ratios.size() < 10) {
        c.warnings.push_back("window too small: " + std::to_string(ed.ratios.size()) + " ratios in [" +
                             std::to_string(c.k_lo) + ", " + std::to_string(c.k_hi) +
                             "); estimates are dominated by boundary effects");
    }
    c.analytic_rate = axis == 1 ? rep.rates.r1 : rep.rates.r2;
    c.analytic_ratio = 1.0 / c.analytic_rate;
    c.empirical_ratio = ed.median;
    c.ratio_stddev = ed.stddev;
    c.relative_gap = std::fabs(c.empirical_ratio - c.analytic_ratio) / c.analytic_ratio;
    c.residual = sol.residual;
    c.mass = sol.mass;
    c.sweeps = sol.sweeps;
    return c;
}

// ---- JSON ----

namespace {

json tolerances_json(const ToleranceSet& t) {
    return {{"kernel_tol", t.kernel_tol},       {"tangent_tol", t.tangent_tol},
            {"eig_tol", t.eig_tol},             {"root_tol", t.root_tol},
            {"tangent_gap", t.tangent_gap},     {"tangent_slack", t.tangent_slack},
            {"eq_tol", t.eq_tol},               {"psi_band", t.psi_band},
            {"zero_drift_tol", t.zero_drift_tol}, {"stochastic_tol", t.stochastic_tol},
            {"oracle_tol", t.oracle_tol},       {"max_iter", t.max_iter},
            {"max_iter_tangent", t.max_iter_tangent}, {"oracle_max_sweeps", t.oracle_max_sweeps}};
}

ToleranceSet tolerances_from(const json& j) {
    ToleranceSet t;
    t.kernel_tol = j.at("kernel_tol");
    t.tangent_tol = j.at("tangent_tol");
    t.eig_tol = j.at("eig_tol");
    t.root_tol = j.at("root_tol");
    t.tangent_gap = j.at("tangent_gap");
    t.tangent_slack = j.at("tangent_slack");
    t.eq_tol = j.at("eq_tol");
    t.psi_band = j.at("psi_band");
    t.zero_drift_tol = j.at("zero_drift_tol");
    t.stochastic_tol = j.at("stochastic_tol");
    t.oracle_tol = j.at("oracle_tol");
    t.max_iter = j.at("max_iter");
    t.max_iter_tangent = j.at("max_iter_tangent");
    t.oracle_max_sweeps = j.at("oracle_max_sweeps");
    return t;
}

template <typename E, std::size_t N>
E enum_from(const json& j, const E (&values)[N]) {
    const std::string s = j.get<std::string>();
    for (E v : values)
        if (s == to_string(v)) return v;
    throw InputError("unknown enumerator '" + s + "'");
}

constexpr Verdict kVerdicts[] = {Verdict::PositiveRecurrent, Verdict::Transient, Verdict::OutsideAssumption};
constexpr QbdType kTypes[] = {QbdType::I, QbdType::II, QbdType::III};
constexpr FormTag kForms[] = {FormTag::PureGeometric,        FormTag::PolyHalfOddLower, FormTag::PolyHalfOddUpper,
                              FormTag::LinearTimesGeometric, FormTag::PlainAtBranch,    FormTag::InverseSqrt};

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
std::optional<double> optional_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

json form_json(const FormClass& f, double tol) {
    return {{"form", to_string(f.tag)}, {"rate", f.rate}, {"tolerance", tol}};
}
FormClass form_from(const json& j) { return {enum_from(j.at("form"), kForms), j.at("rate").get<double>()}; }

json asymptotics_json(const AsymptoticsReport& r, const ToleranceSet& t) {
    const auto& e = r.extremes;
    const auto& c = r.cp;
    return {
        {"spectral",
         {{"z1_min", e.z1_min}, {"z1_max", e.z1_max}, {"z2_min", e.z2_min}, {"z2_max", e.z2_max},
          {"tolerance", e.tol_root}}},
        {"critical_points",
         {{"theta1", c.theta1},
          {"theta2", c.theta2},
          {"theta2_bar", c.theta2_bar},
          {"eta1", c.eta1},
          {"eta2", c.eta2},
          {"eta1_bar", c.eta1_bar},
          {"s1_max", c.s1_max},
          {"s2_max", c.s2_max},
          {"multiple_crossings_1", c.multiple_crossings_1},
          {"multiple_crossings_2", c.multiple_crossings_2},
          {"scan_jump_1", c.scan_jump_1},
          {"scan_jump_2", c.scan_jump_2},
          {"psi1_scan", c.psi1_scan},
          {"psi2_scan", c.psi2_scan},
          {"tolerance", t.root_tol}}},
        {"type", to_string(r.type)},
        {"rates", {{"xi1", r.rates.xi1}, {"xi2", r.rates.xi2}, {"r1", r.rates.r1}, {"r2", r.rates.r2}, {"tolerance", t.root_tol}}},
        {"psi", {{"psi1_at_z1_max", r.psi1_at_zmax}, {"psi2_at_z2_max", r.psi2_at_zmax}, {"tolerance", t.tangent_tol}}},
        {"h1", form_json(r.h1, t.root_tol)},
        {"h2", form_json(r.h2, t.root_tol)},
        {"equality_flags", r.equality_flags},
        {"eq_tol", r.eq_tol},
        {"psi_band", r.psi_band},
    };
}

AsymptoticsReport asymptotics_from(const json& j) {
    AsymptoticsReport r;
    const json& s = j.at("spectral");
    r.extremes = {s.at("z1_min"), s.at("z1_max"), s.at("z2_min"), s.at("z2_max"), s.at("tolerance")};
    const json& c = j.at("critical_points");
    r.cp.theta1 = c.at("theta1");
    r.cp.theta2 = c.at("theta2");
    r.cp.theta2_bar = c.at("theta2_bar");
    r.cp.eta1 = c.at("eta1");
    r.cp.eta2 = c.at("eta2");
    r.cp.eta1_bar = c.at("eta1_bar");
    r.cp.s1_max = c.at("s1_max");
    r.cp.s2_max = c.at("s2_max");
    r.cp.multiple_crossings_1 = c.at("multiple_crossings_1");
    r.cp.multiple_crossings_2 = c.at("multiple_crossings_2");
    r.cp.scan_jump_1 = c.at("scan_jump_1");
    r.cp.scan_jump_2 = c.at("scan_jump_2");
    r.cp.psi1_scan = c.at("psi1_scan").get<std::vector<double>>();
    r.cp.psi2_scan = c.at("psi2_scan").get<std::vector<double>>();
    r.type = enum_from(j.at("type"), kTypes);
    const json& rt = j.at("rates");
    r.rates = {rt.at("xi1"), rt.at("xi2"), rt.at("r1"), rt.at("r2")};
    r.psi1_at_zmax = j.at("psi").at("psi1_at_z1_max");
    r.psi2_at_zmax = j.at("psi").at("psi2_at_z2_max");
    r.h1 = form_from(j.at("h1"));
    r.h2 = form_from(j.at("h2"));
    r.equality_flags = j.at("equality_flags").get<std::vector<std::string>>();
    r.eq_tol = j.at("eq_tol");
    r.psi_band = j.at("psi_band");
    return r;
}

json oracle_json(const OracleComparison& o, const ToleranceSet& t) {
    return {{"axis", o.axis},
            {"N", o.N},
            {"window", {o.k_lo, o.k_hi}},
            {"method", o.method},
            {"analytic_rate", o.analytic_rate},
            {"analytic_ratio", o.analytic_ratio},
            {"empirical_ratio", o.empirical_ratio},
            {"ratio_stddev", o.ratio_stddev},
            {"relative_gap", o.relative_gap},
            {"residual", o.residual},
            {"mass", o.mass},
            {"sweeps", o.sweeps},
            {"warnings", o.warnings},
            {"tolerance", t.oracle_tol}};
}

OracleComparison oracle_from(const json& j) {
    OracleComparison o;
    o.axis = j.at("axis");
    o.N = j.at("N");
    o.k_lo = j.at("window").at(0);
    o.k_hi = j.at("window").at(1);
    o.method = j.at("method");
    o.analytic_rate = j.at("analytic_rate");
    o.analytic_ratio = j.at("analytic_ratio");
    o.empirical_ratio = j.at("empirical_ratio");
    o.ratio_stddev = j.at("ratio_stddev");
    o.relative_gap = j.at("relative_gap");
    o.residual = j.at("residual");
    o.mass = j.at("mass");
    o.sweeps = j.at("sweeps");
    o.warnings = j.at("warnings").get<std::vector<std::string>>();
    return o;
}

}  // namespace

std::string to_json(const AnalysisBundle& b, int indent) {
    json model = {{"source", b.model.source}, {"phases", b.model.phases}, {"limited_service", nullptr}};
    if (const auto& p = b.model.limited_service) {
        model["limited_service"] = {
            {"K", p->K}, {"lambda1", p->lambda1}, {"lambda2", p->lambda2}, {"mu1", p->mu1}, {"mu2", p->mu2}};
    }
    const DriftReport& d = b.drifts;
    json j = {
        {"schema", b.schema},
        {"tool_version", b.tool_version},
        {"tolerances", tolerances_json(b.tolerances)},
        {"model", model},
        {"validation",
         {{"ok", b.validation.ok()},
          {"violations", b.validation.violations},
          {"notes", b.validation.notes},
          {"tolerance", b.tolerances.stochastic_tol}}},
        {"stability",
         {{"verdict", to_string(d.verdict)},
          {"pi_star", d.pi_star},
          {"a1", d.a1},
          {"a2", d.a2},
          {"a1_face1", optional_json(d.a1_face1)},
          {"a2_face2", optional_json(d.a2_face2)},
          {"tolerance", d.zero_tol}}},
        {"asymptotics", b.asymptotics ? asymptotics_json(*b.asymptotics, b.tolerances) : json(nullptr)},
        {"oracle", b.oracle ? oracle_json(*b.oracle, b.tolerances) : json(nullptr)},
        {"warnings", b.warnings},
    };
    return j.dump(indent);
}

AnalysisBundle bundle_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("analysis bundle is not valid JSON: ") + e.what());
    }
    try {
        AnalysisBundle b;
        b.schema = j.at("schema");
        if (b.schema != kBundleSchema) throw InputError("unsupported bundle schema '" + b.schema + "'");
        b.tool_version = j.at("tool_version");
        b.tolerances = tolerances_from(j.at("tolerances"));
        const json& m = j.at("model");
        b.model.source = m.at("source");
        b.model.phases = m.at("phases");
        if (const json& p = m.at("limited_service"); !p.is_null()) {
            b.model.limited_service = LimitedServiceParams{p.at("K"), p.at("lambda1"), p.at("lambda2"), p.at("mu1"),
                                                           p.at("mu2")};
        }
        const json& v = j.at("validation");
        b.validation.violations = v.at("violations").get<std::vector<std::string>>();
        b.validation.notes = v.at("notes").get<std::vector<std::string>>();
        const json& s = j.at("stability");
        b.drifts.verdict = enum_from(s.at("verdict"), kVerdicts);
        b.drifts.pi_star = s.at("pi_star").get<std::vector<double>>();
        b.drifts.a1 = s.at("a1");
        b.drifts.a2 = s.at("a2");
        b.drifts.a1_face1 = optional_from(s.at("a1_face1"));
        b.drifts.a2_face2 = optional_from(s.at("a2_face2"));
        b.drifts.zero_tol = s.at("tolerance");
        if (const json& a = j.at("asymptotics"); !a.is_null()) b.asymptotics = asymptotics_from(a);
        if (const json& o = j.at("oracle"); !o.is_null()) b.oracle = oracle_from(o);
        b.warnings = j.at("warnings").get<std::vector<std::string>>();
        return b;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed analysis bundle: ") + e.what());
    }
}

// ---- CSV ----

namespace {

class CsvWriter {
public:
    CsvWriter() { out_ << "key,value,tolerance\n"; }
    void row(const std::string& key, double value, double tol) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.17g,%.3g\n", value, tol);
        out_ << key << ',' << buf;
    }
    void row(const std::string& key, const std::string& value) { out_ << key << ',' << value << ",\n"; }
    void row(const std::string& key, const char* value) { row(key, std::string(value)); }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

}  // namespace

std::string to_csv(const AnalysisBundle& b) {
    CsvWriter w;
    const ToleranceSet& t = b.tolerances;
    w.row("schema", b.schema);
    w.row("tool_version", b.tool_version);
    w.row("model.source", b.model.source);
    w.row("model.phases", std::to_string(b.model.phases));
    w.row("validation.ok", b.validation.ok() ? "true" : "false");
    w.row("stability.verdict", to_string(b.drifts.verdict));
    w.row("stability.a1", b.drifts.a1, b.drifts.zero_tol);
    w.row("stability.a2", b.drifts.a2, b.drifts.zero_tol);
    if (b.drifts.a1_face1) w.row("stability.a1_face1", *b.drifts.a1_face1, b.drifts.zero_tol);
    if (b.drifts.a2_face2) w.row("stability.a2_face2", *b.drifts.a2_face2, b.drifts.zero_tol);
    if (const auto& a = b.asymptotics) {
        w.row("spectral.z1_min", a->extremes.z1_min, t.root_tol);
        w.row("spectral.z1_max", a->extremes.z1_max, t.root_tol);
        w.row("spectral.z2_min", a->extremes.z2_min, t.root_tol);
        w.row("spectral.z2_max", a->extremes.z2_max, t.root_tol);
        w.row("critical.theta1", a->cp.theta1, t.root_tol);
        w.row("critical.theta2", a->cp.theta2, t.root_tol);
        w.row("critical.theta2_bar", a->cp.theta2_bar, t.root_tol);
        w.row("critical.eta1", a->cp.eta1, t.root_tol);
        w.row("critical.eta2", a->cp.eta2, t.root_tol);
        w.row("critical.eta1_bar", a->cp.eta1_bar, t.root_tol);
        w.row("asymptotics.type", to_string(a->type));
        w.row("asymptotics.r1", a->rates.r1, t.root_tol);
        w.row("asymptotics.r2", a->rates.r2, t.root_tol);
        w.row("asymptotics.psi1_at_z1_max", a->psi1_at_zmax, a->psi_band);
        w.row("asymptotics.psi2_at_z2_max", a->psi2_at_zmax, a->psi_band);
        w.row("asymptotics.h1", to_string(a->h1.tag));
        w.row("asymptotics.h2", to_string(a->h2.tag));
        w.row("asymptotics.equality_flags", std::to_string(a->equality_flags.size()));
    }
    if (const auto& o = b.oracle) {
        w.row("oracle.axis", std::to_string(o->axis));
        w.row("oracle.N", std::to_string(o->N));
        w.row("oracle.analytic_ratio", o->analytic_ratio, t.root_tol);
        w.row("oracle.empirical_ratio", o->empirical_ratio, t.oracle_tol);
        w.row("oracle.relative_gap", o->relative_gap, t.oracle_tol);
    }
    return w.str();
}

// ---- tables ----

LimitedServiceParams table_params(int table, int K) {
    if (table == 1) return {K, 0.3, 0.3, 1.0, 1.0};
    if (table == 2) return {K, 0.24, 0.7, 1.2, 1.0};
    throw InputError("table must be 1 or 2, got " + std::to_string(table));
}

TableRow reproduce_row(int table, int K, const AnalyzeOptions& opts) {
    const LimitedServiceParams p = table_params(table, K);
    const AnalysisBundle b = analyze(build_limited_service(p), {"generated", 0, p}, opts);
    if (!b.asymptotics) {
        throw StageError("reproduce", "table " + std::to_string(table) + " K=" + std::to_string(K) + " is " +
                                          to_string(b.drifts.verdict));
    }
    const AsymptoticsReport& a = *b.asymptotics;
    TableRow r;
    r.K = K;
    r.type = a.type;
    r.a1 = b.drifts.a1;
    r.a2 = b.drifts.a2;
    r.psi1_sign = psi_sign(a.psi1_at_zmax, a.psi_band);
    r.psi2_sign = psi_sign(a.psi2_at_zmax, a.psi_band);
    r.r1 = a.rates.r1;
    r.r2 = a.rates.r2;
    r.equality_flags = a.equality_flags;
    return r;
}

std::string format_row(const TableRow& r) {
    auto sign = [](int s) { return s > 0 ? "+" : (s < 0 ? "-" : "0"); };
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s, %#.3g, %#.3g, %s, %s, %.3f, %.3f", to_string(r.type), r.a1, r.a2,
                  sign(r.psi1_sign), sign(r.psi2_sign), r.r1, r.r2);
    return buf;
}

std::string reproduce_table_csv(int table, const AnalyzeOptions& opts) {
    table_params(table, 1);
    std::string out = "K, Type, a1, a2, psi1(z1_max)-1, psi2(z2_max)-1, r1, r2\n";
    for (int K : kTableKs) out += std::to_string(K) + ", " + format_row(reproduce_row(table, K, opts)) + "\n";
    return out;
}

}  // namespace qbd
