#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

// Runs the CLI with the given arguments; stdout is captured, stderr is dropped.
Run qbd_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + "'" QBD_CLI_PATH "' " + args + " 2>/dev/null";
    Run r;
    FILE* p = ::popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch() {
    const fs::path d = fs::temp_directory_path() / ("qbd_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

std::string generate(const std::string& name, const std::string& params) {
    const std::string path = (scratch() / name).string();
    const Run r = qbd_cli("generate " + params + " '" + path + "'");
    REQUIRE(r.code == 0);
    return path;
}

}  // namespace

TEST_CASE("generate") {
    const std::string one = generate("k1.json", "--k 1 --l1 0.3 --l2 0.3 --m1 1 --m2 1");
    const std::string five = generate("k5.json", "--k 5 --l1 0.3 --l2 0.3 --m1 1 --m2 1");
    CHECK(nlohmann::json::parse(std::ifstream(one)).at("s0") == 2);
    CHECK(nlohmann::json::parse(std::ifstream(five)).at("s0") == 6);
    CHECK(qbd_cli("generate --k 0 --l1 0.3 --l2 0.3 --m1 1 --m2 1 /dev/null").code == 2);
    CHECK(qbd_cli("generate --k 2 --l1 -1 --l2 0.3 --m1 1 --m2 1 /dev/null").code == 2);
}

TEST_CASE("validate") {
    const std::string good = generate("v.json", "--k 3 --l1 0.3 --l2 0.3 --m1 1 --m2 1");
    const Run ok = qbd_cli("validate '" + good + "'");
    CHECK(ok.code == 0);
    CHECK(nlohmann::json::parse(ok.out).at("ok") == true);

    const std::string bad = (scratch() / "bad.json").string();
    std::ofstream(bad) << "{\"s0\": 2, \"A\": [[";
    const Run r = qbd_cli("validate '" + bad + "'");
    CHECK(r.code == 2);
    CHECK(nlohmann::json::parse(r.out).at("error").at("exit_code") == 2);

    CHECK(qbd_cli("validate /nonexistent/model.json").code == 2);
}

TEST_CASE("analyze") {
    const std::string path = generate("a.json", "--k 1 --l1 0.3 --l2 0.3 --m1 1 --m2 1");
    const Run r = qbd_cli("analyze '" + path + "'");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("asymptotics").at("type") == "I");
    CHECK(j.at("asymptotics").at("rates").at("r1").get<double>() == doctest::Approx(1.968).epsilon(5e-4));

    const Run csv = qbd_cli("analyze --csv '" + path + "'");
    CHECK(csv.code == 0);
    CHECK(csv.out.rfind("key,value,tolerance", 0) == 0);
    CHECK(qbd_cli("analyze --csv --json '" + path + "'").code == 2);

    const Run wide = qbd_cli("analyze --eq-tol 0.01 '" + path + "'");
    CHECK(nlohmann::json::parse(wide.out).at("asymptotics").at("eq_tol") == 0.01);
}

TEST_CASE("transient model") {
    const std::string path = generate("t.json", "--k 1 --l1 0.9 --l2 0.3 --m1 1 --m2 1");
    const Run r = qbd_cli("analyze '" + path + "'");
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("stability").at("verdict") == "Transient");
    CHECK(j.at("asymptotics").is_null());

    const Run o = qbd_cli("oracle '" + path + "' -N 40");
    CHECK(o.code == 1);
    CHECK(nlohmann::json::parse(o.out).at("error").at("stage") == "stability");
}

TEST_CASE("oracle") {
    const std::string path = generate("o.json", "--k 1 --l1 0.3 --l2 0.3 --m1 1 --m2 1");
    const Run r = qbd_cli("oracle '" + path + "' -N 10 --json");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    const auto& w = j.at("oracle").at("warnings");
    REQUIRE(w.size() >= 1);
    CHECK(w[0].get<std::string>().rfind("window too small", 0) == 0);
    CHECK(qbd_cli("oracle '" + path + "' -N 3").code == 2);
    CHECK(qbd_cli("oracle '" + path + "' -N 40 --axis 3").code == 2);
}

TEST_CASE("reproduce") {
    const Run r = qbd_cli("reproduce 2");
    CHECK(r.code == 0);
    CHECK(r.out.find("2, I, -0.0360, -0.00187, -, +, 1.844, 1.116") != std::string::npos);
    CHECK(qbd_cli("reproduce 3").code == 2);
}

TEST_CASE("iteration cap from the environment") {
    const std::string path = generate("e.json", "--k 1 --l1 0.3 --l2 0.3 --m1 1 --m2 1");
    const Run bad = qbd_cli("analyze '" + path + "'", "QBD_MAX_ITER=banana");
    CHECK(bad.code == 2);
    CHECK(nlohmann::json::parse(bad.out).at("error").at("kind") == "input");
    const Run ok = qbd_cli("analyze '" + path + "'", "QBD_MAX_ITER=50000");
    CHECK(ok.code == 0);
    CHECK(nlohmann::json::parse(ok.out).at("tolerances").at("max_iter") == 50000);
}

TEST_CASE("version and help") {
    CHECK(qbd_cli("--version").code == 0);
    CHECK(qbd_cli("--help").code == 0);
    CHECK(qbd_cli("").code == 2);
}
