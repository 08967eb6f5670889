// qbd: command-line front end.
//
//   qbd validate MODEL
//   qbd analyze MODEL [--tol T] [--eq-tol E] [--json | --csv]
//   qbd reproduce TABLE
//   qbd oracle MODEL --truncation N [--axis 1|2] [--json]
//   qbd generate --k K --l1 L1 --l2 L2 --m1 M1 --m2 M2 OUTPUT
//
// Exit codes: 0 success, 1 analysis-stage failure, 2 input error. Errors are
// printed to stdout as a JSON object so scripted callers can parse them.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qbd/error.hpp"
#include "qbd/report.hpp"

namespace {

constexpr int kExitAnalysis = 1;
constexpr int kExitInput = 2;

int report_error(const char* kind, const std::string& stage, const std::string& message, int code) {
    nlohmann::json err = {{"error", {{"kind", kind}, {"stage", stage}, {"message", message}, {"exit_code", code}}}};
    std::cout << err.dump(2) << std::endl;
    return code;
}

qbd::ModelDescriptor describe(const std::string& path) { return {path, 0, std::nullopt}; }

int cmd_validate(const std::string& path) {
    const qbd::QbdModel m = qbd::load_model_file(path);
    const qbd::ValidationReport r = qbd::validate(m);
    nlohmann::json out = {{"model", path}, {"phases", m.phases()}, {"ok", r.ok()},
                          {"violations", r.violations}, {"notes", r.notes}};
    std::cout << out.dump(2) << std::endl;
    return r.ok() ? 0 : kExitInput;
}

int cmd_analyze(const std::string& path, qbd::AnalyzeOptions opts, bool csv) {
    const qbd::QbdModel m = qbd::load_model_file(path);
    const qbd::AnalysisBundle b = qbd::analyze(m, describe(path), opts);
    for (const auto& w : b.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << (csv ? qbd::to_csv(b) : qbd::to_json(b) + "\n");
    return 0;
}

int cmd_reproduce(int table, const qbd::AnalyzeOptions& opts) {
    std::cout << "K, Type, a1, a2, psi1(z1_max)-1, psi2(z2_max)-1, r1, r2\n";
    for (int K : qbd::kTableKs) {
        const qbd::TableRow row = qbd::reproduce_row(table, K, opts);
        std::cout << K << ", " << qbd::format_row(row) << '\n' << std::flush;
        for (const auto& f : row.equality_flags) std::cerr << "note: K=" << K << " near-equality " << f << '\n';
    }
    return 0;
}

int cmd_oracle(const std::string& path, int N, int axis, bool json_out, const qbd::AnalyzeOptions& opts) {
    const qbd::QbdModel m = qbd::load_model_file(path);
    qbd::AnalysisBundle b = qbd::analyze(m, describe(path), opts);
    if (!b.asymptotics) {
        return report_error("precondition", "stability",
                            std::string("refusing to run the oracle: verdict is ") + qbd::to_string(b.drifts.verdict) +
                                "; a truncated solve only approximates positive recurrent models",
                            kExitAnalysis);
    }
    try {
        b.oracle = qbd::compare_with_oracle(m, *b.asymptotics, N, axis, opts.oracle);
    } catch (const qbd::InputError&) {
        throw;
    } catch (const std::exception& e) {
        throw qbd::StageError("oracle", e.what());
    }
    const qbd::OracleComparison& o = *b.oracle;
    for (const auto& w : o.warnings) std::cerr << "warning: " << w << '\n';
    if (json_out) {
        std::cout << qbd::to_json(b) << '\n';
        return 0;
    }
    std::printf("axis %d, N=%d, window [%d, %d), %s, %ld sweeps, residual %.2e\n", o.axis, o.N, o.k_lo, o.k_hi,
                o.method.c_str(), o.sweeps, o.residual);
    std::printf("analytic  r = %.6f   1/r = %.6f\n", o.analytic_rate, o.analytic_ratio);
    std::printf("empirical ratio = %.6f (stddev %.2e)\n", o.empirical_ratio, o.ratio_stddev);
    std::printf("relative gap = %.3f%%\n", 100.0 * o.relative_gap);
    return 0;
}

int cmd_generate(const qbd::LimitedServiceParams& p, const std::string& out) {
    const qbd::QbdModel m = qbd::build_limited_service(p);
    qbd::save_model_file(m, out);
    std::cerr << "wrote " << out << " (s0=" << m.phases() << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tail asymptotics of two-dimensional quasi-birth-and-death processes"};
    app.set_version_flag("--version", qbd::kToolVersion);
    app.require_subcommand(1);

    std::string model_path;
    qbd::AnalyzeOptions opts;

    auto* validate = app.add_subcommand("validate", "Check a model file");
    validate->add_option("model", model_path, "model JSON file")->required();

    bool csv = false, json_flag = false;
    auto* analyze = app.add_subcommand("analyze", "Stability verdict, decay rates and asymptotic forms");
    analyze->add_option("model", model_path, "model JSON file")->required();
    analyze->add_option("--tol", opts.asymptotics.kernel.tol, "residual tolerance for the G/R solves")
        ->check(CLI::PositiveNumber);
    analyze->add_option("--eq-tol", opts.asymptotics.eq_tol, "band within which critical points count as equal")
        ->check(CLI::PositiveNumber);
    auto* csv_opt = analyze->add_flag("--csv", csv, "flat key,value,tolerance output");
    analyze->add_flag("--json", json_flag, "JSON output (default)")->excludes(csv_opt);

    int table = 1;
    auto* reproduce = app.add_subcommand("reproduce", "Rate table for the (1,K)-limited service model");
    reproduce->add_option("table", table, "1: (0.3, 0.3, 1, 1), 2: (0.24, 0.7, 1.2, 1)")
        ->required()
        ->check(CLI::IsMember({1, 2}));

    int truncation = 150, axis = 1;
    bool oracle_json = false;
    auto* oracle = app.add_subcommand("oracle", "Compare analytic rates with a truncated-window solve");
    oracle->add_option("model", model_path, "model JSON file")->required();
    oracle->add_option("--truncation,-N", truncation, "window [0, N]^2")->required()->check(CLI::PositiveNumber);
    oracle->add_option("--axis", axis, "1 or 2")->check(CLI::IsMember({1, 2}));
    oracle->add_flag("--json", oracle_json, "emit the analysis bundle with the oracle section");

    qbd::LimitedServiceParams gp;
    std::string out_path;
    auto* generate = app.add_subcommand("generate", "Write a (1,K)-limited service model file");
    generate->add_option("--k", gp.K, "service limit at queue 2 (K >= 1)")->required()->check(CLI::Range(1, 100000));
    generate->add_option("--l1", gp.lambda1, "arrival rate 1")->required()->check(CLI::PositiveNumber);
    generate->add_option("--l2", gp.lambda2, "arrival rate 2")->required()->check(CLI::PositiveNumber);
    generate->add_option("--m1", gp.mu1, "service rate 1")->required()->check(CLI::PositiveNumber);
    generate->add_option("--m2", gp.mu2, "service rate 2")->required()->check(CLI::PositiveNumber);
    generate->add_option("output", out_path, "output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        qbd::apply_env_overrides(opts);
        if (*validate) return cmd_validate(model_path);
        if (*analyze) return cmd_analyze(model_path, opts, csv);
        if (*reproduce) return cmd_reproduce(table, opts);
        if (*oracle) return cmd_oracle(model_path, truncation, axis, oracle_json, opts);
        if (*generate) return cmd_generate(gp, out_path);
    } catch (const qbd::InputError& e) {
        return report_error("input", "input", e.what(), kExitInput);
    } catch (const qbd::StageError& e) {
        return report_error("analysis", e.stage(), e.what(), kExitAnalysis);
    } catch (const std::exception& e) {
        return report_error("analysis", "unknown", e.what(), kExitAnalysis);
    }
    return kExitInput;
}
