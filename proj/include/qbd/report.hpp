#pragma once

// End-to-end analysis pipeline, its serialized form, and the reproduction of
// the (1,K)-limited service rate tables.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qbd/asymptotics.hpp"
#include "qbd/model.hpp"
#include "qbd/oracle.hpp"
#include "qbd/stability.hpp"

namespace qbd {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kBundleSchema = "qbd-analysis-bundle/1";

/// A pipeline stage failed; `stage` names it ("drifts", "extremes", ...).
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct AnalyzeOptions {
    AsymptoticsOptions asymptotics{};
    double zero_drift_tol = 1e-12;
    double stochastic_tol = 1e-12;
    OracleOptions oracle{};
};

/// Overrides every iteration cap from QBD_MAX_ITER if it is set to a positive
/// integer. Throws InputError on a malformed value.
void apply_env_overrides(AnalyzeOptions& opts);

struct ToleranceSet {
    double kernel_tol = 0.0;
    double tangent_tol = 0.0;
    double eig_tol = 0.0;
    double root_tol = 0.0;
    double tangent_gap = 0.0;
    double tangent_slack = 0.0;
    double eq_tol = 0.0;
    double psi_band = 0.0;
    double zero_drift_tol = 0.0;
    double stochastic_tol = 0.0;
    double oracle_tol = 0.0;
    long max_iter = 0;
    long max_iter_tangent = 0;
    long oracle_max_sweeps = 0;

    static ToleranceSet from(const AnalyzeOptions& o);
};

struct ModelDescriptor {
    std::string source;  // file path or "generated"
    std::size_t phases = 0;
    std::optional<LimitedServiceParams> limited_service;
};

/// Analytic rate against the truncated-window estimate along one axis.
struct OracleComparison {
    int axis = 1;
    int N = 0;
    int k_lo = 0, k_hi = 0;
    std::string method;
    double analytic_rate = 0.0;     // r
    double analytic_ratio = 0.0;    // 1 / r
    double empirical_ratio = 0.0;   // median of mass(k + 1) / mass(k)
    double ratio_stddev = 0.0;
    double relative_gap = 0.0;      // |empirical - 1/r| / (1/r)
    double residual = 0.0;
    double mass = 0.0;
    long sweeps = 0;
    std::vector<std::string> warnings;
};

struct AnalysisBundle {
    std::string schema = kBundleSchema;
    std::string tool_version = kToolVersion;
    ToleranceSet tolerances;
    ModelDescriptor model;
    ValidationReport validation;
    DriftReport drifts;
    std::optional<AsymptoticsReport> asymptotics;  // only for PositiveRecurrent
    std::optional<OracleComparison> oracle;
    std::vector<std::string> warnings;
};

/// Drifts, then (for a positive recurrent model) extremes, critical points,
/// type, rates and form classes. Throws InputError if validation fails and
/// StageError for any later failure.
AnalysisBundle analyze(const QbdModel& m, const ModelDescriptor& desc, const AnalyzeOptions& opts = {});

/// Truncated solve and ratio estimate. The default window is (0.4 N, 0.8 N),
/// pulled in to end below N - 5 for small N, with a "window too small"
/// warning when fewer than 10 ratios remain or N < 50.
OracleComparison compare_with_oracle(const QbdModel& m, const AsymptoticsReport& rep, int N, int axis,
                                     const OracleOptions& opts = {});

std::string to_json(const AnalysisBundle& b, int indent = 2);
/// Throws InputError on schema mismatch or missing fields.
AnalysisBundle bundle_from_json(std::string_view text);

/// Flat "section.field,value,tolerance" lines.
std::string to_csv(const AnalysisBundle& b);

struct TableRow {
    int K = 0;
    QbdType type = QbdType::I;
    double a1 = 0.0, a2 = 0.0;
    int psi1_sign = 0, psi2_sign = 0;
    double r1 = 0.0, r2 = 0.0;
    std::vector<std::string> equality_flags;
};

inline constexpr int kTableKs[] = {1, 2, 3, 4, 5, 6, 7, 8, 10, 20, 50};

/// Table 1: (0.3, 0.3, 1, 1); table 2: (0.24, 0.7, 1.2, 1). Throws InputError otherwise.
LimitedServiceParams table_params(int table, int K);

TableRow reproduce_row(int table, int K, const AnalyzeOptions& opts = {});

/// "I, 0.0726, -0.226, +, -, 1.667, 3.978": drifts to 3 significant digits, rates to 3 decimals.
std::string format_row(const TableRow& r);

/// Header plus one "K, <format_row>" line per K.
std::string reproduce_table_csv(int table, const AnalyzeOptions& opts = {});

}  // namespace qbd
