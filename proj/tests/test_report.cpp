#include <cstdlib>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "qbd/error.hpp"
#include "qbd/report.hpp"
#include "support.hpp"

using namespace qbd;

namespace {

AnalysisBundle bundle_for(int table, int K) {
    const LimitedServiceParams p = table_params(table, K);
    return analyze(build_limited_service(p), {"generated", 0, p});
}

// Sets an environment variable for the lifetime of the object.
struct EnvGuard {
    explicit EnvGuard(const char* value) { ::setenv("QBD_MAX_ITER", value, 1); }
    ~EnvGuard() { ::unsetenv("QBD_MAX_ITER"); }
};

}  // namespace

TEST_CASE("table rows print with three significant digits") {
    CHECK(format_row(reproduce_row(1, 8)) == "I, 0.0726, -0.226, +, -, 1.667, 3.978");
    CHECK(format_row(reproduce_row(2, 2)) == "I, -0.0360, -0.00187, -, +, 1.844, 1.116");
}

TEST_CASE("format_row signs") {
    TableRow r;
    r.a1 = -0.5;
    r.a2 = 0.25;
    r.psi1_sign = 0;
    r.psi2_sign = -1;
    r.r1 = 2.0;
    r.r2 = 1.5;
    CHECK(format_row(r) == "I, -0.500, 0.250, 0, -, 2.000, 1.500");
}

TEST_CASE("table parameters") {
    CHECK(table_params(1, 4).lambda1 == 0.3);
    CHECK(table_params(2, 4).mu1 == 1.2);
    CHECK_THROWS_AS(table_params(3, 1), InputError);
}

TEST_CASE("bundle JSON round trip") {
    AnalysisBundle b = bundle_for(1, 3);
    b.oracle = compare_with_oracle(build_limited_service(table_params(1, 3)), *b.asymptotics, 20, 2);
    const std::string text = to_json(b);
    const AnalysisBundle back = bundle_from_json(text);
    CHECK(to_json(back) == text);
    CHECK(back.asymptotics->rates.r1 == b.asymptotics->rates.r1);
    CHECK(back.drifts.verdict == Verdict::PositiveRecurrent);
    REQUIRE(back.oracle.has_value());
    CHECK_FALSE(back.oracle->warnings.empty());
}

TEST_CASE("every numeric section records its tolerance") {
    const nlohmann::json j = nlohmann::json::parse(to_json(bundle_for(2, 1)));
    CHECK(j.at("schema") == kBundleSchema);
    CHECK(j.at("tool_version") == kToolVersion);
    CHECK(j.at("tolerances").at("kernel_tol").get<double>() > 0.0);
    CHECK(j.at("tolerances").at("eq_tol").get<double>() == 1e-8);
    CHECK(j.at("validation").contains("tolerance"));
    CHECK(j.at("stability").contains("tolerance"));
    for (const auto& [key, sec] : j.at("asymptotics").items())
        if (sec.is_object()) CHECK_MESSAGE(sec.contains("tolerance"), key);
}

TEST_CASE("schema mismatch is an input error") {
    nlohmann::json j = nlohmann::json::parse(to_json(bundle_for(1, 1)));
    j["schema"] = "something-else/9";
    CHECK_THROWS_AS(bundle_from_json(j.dump()), InputError);
    CHECK_THROWS_AS(bundle_from_json("{"), InputError);
}

TEST_CASE("transient models carry no asymptotics") {
    const QbdModel m = build_limited_service({1, 0.9, 0.3, 1, 1});
    const AnalysisBundle b = analyze(m, {"generated", 0, std::nullopt});
    CHECK(b.drifts.verdict == Verdict::Transient);
    CHECK_FALSE(b.asymptotics.has_value());
    CHECK_FALSE(b.warnings.empty());
    CHECK(nlohmann::json::parse(to_json(b)).at("asymptotics").is_null());
}

TEST_CASE("CSV output") {
    const std::string csv = to_csv(bundle_for(1, 2));
    CHECK(csv.rfind("key,value,tolerance\n", 0) == 0);
    CHECK(csv.find("asymptotics.type,I,") != std::string::npos);
    CHECK(csv.find("stability.verdict,PositiveRecurrent,") != std::string::npos);
}

TEST_CASE("QBD_MAX_ITER overrides every cap") {
    {
        EnvGuard g("1234");
        AnalyzeOptions o;
        apply_env_overrides(o);
        CHECK(o.asymptotics.kernel.max_iter == 1234);
        CHECK(o.asymptotics.kernel.max_iter_tangent == 1234);
        CHECK(o.asymptotics.kernel.spectral.max_iter == 1234);
        CHECK(o.oracle.max_sweeps == 1234);
        CHECK(ToleranceSet::from(o).max_iter == 1234);
    }
    for (const char* bad : {"abc", "-3", "0", "12x"}) {
        EnvGuard g(bad);
        AnalyzeOptions o;
        CHECK_THROWS_AS(apply_env_overrides(o), InputError);
    }
    AnalyzeOptions o;
    const long before = o.asymptotics.kernel.max_iter;
    apply_env_overrides(o);
    CHECK(o.asymptotics.kernel.max_iter == before);
}

TEST_CASE("reproduced table text") {
    const std::string t = reproduce_table_csv(2);
    CHECK(t.rfind("K, Type, a1, a2, psi1(z1_max)-1, psi2(z2_max)-1, r1, r2\n", 0) == 0);
    CHECK(t.find("\n2, I, -0.0360, -0.00187, -, +, 1.844, 1.116\n") != std::string::npos);
}
