#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "fieldsym/cli.hpp"
#include "fieldsym/parser.hpp"

using namespace fieldsym;
using nlohmann::json;

namespace {

std::string models_dir() { return FIELDSYM_MODELS_DIR; }
std::string fixtures_dir() { return FIELDSYM_FIXTURES_DIR; }
std::string golden_dir() { return FIELDSYM_GOLDEN_DIR; }

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

// Numeric-aware JSON comparison: numbers within relative 1e-9, everything
// else exact. Keeps golden files stable across math-library ulp drift.
bool json_close(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) {
        double x = a.get<double>(), y = b.get<double>();
        return std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)});
    }
    if (a.type() != b.type()) return false;
    if (a.is_object()) {
        if (a.size() != b.size()) return false;
        for (auto it = a.begin(); it != a.end(); ++it) {
            if (!b.contains(it.key())) return false;
            if (!json_close(it.value(), b.at(it.key()))) return false;
        }
        return true;
    }
    if (a.is_array()) {
        if (a.size() != b.size()) return false;
        for (size_t i = 0; i < a.size(); ++i)
            if (!json_close(a[i], b[i])) return false;
        return true;
    }
    return a == b;
}

}  // namespace

TEST_CASE("goldstone run matches the documented verdicts and exit code") {
    RunResult r = run_cli({"goldstone", "--model", models_dir() + "/mexican_hat.ftl", "--vacuum",
                           "phi[1]=1,phi[2]=0", "--param", "lambda=0.5,v=1", "--format", "json"});
    REQUIRE(r.exit_code == 0);
    json report = json::parse(r.out);
    CHECK(report["schema"] == "fieldsym-report/1");
    CHECK(report["model"] == "mexican_hat");
    auto eig = report["sections"]["mass_matrix"]["eigenvalues"];
    REQUIRE(eig.size() == 2);
    CHECK(std::abs(eig[0].get<double>()) < 1e-8);
    CHECK(std::abs(eig[1].get<double>() - 1.0) < 1e-8);
    CHECK(report["sections"]["goldstone_accounting"]["goldstone_modes"] == 1);
    CHECK(report["status"] == "pass");
}

TEST_CASE("higgs run reports the gauge mass") {
    RunResult r = run_cli({"higgs", "--model", models_dir() + "/u1_higgs.ftl", "--vacuum",
                           "phi[1]=1,phi[2]=0", "--format", "json"});
    REQUIRE(r.exit_code == 0);
    json report = json::parse(r.out);
    CHECK(std::abs(report["sections"]["gauge_mass"]["mass"].get<double>() -
                   std::sqrt(2.0)) < 1e-12);
    for (auto& [key, value] : report["sections"]["constraints"].items()) {
        CAPTURE(key);
        CHECK(value["satisfied"] == true);
    }
}

TEST_CASE("verify on the broken fixture exits 1 and prints the residual") {
    RunResult r = run_cli({"verify", "--model", fixtures_dir() + "/broken.ftl", "--transform",
                           "shift"});
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("broken") != std::string::npos);
    // Residual is -m0^2 eps0 phi in some canonical factor order.
    CHECK(r.out.find("eps0") != std::string::npos);
    CHECK(r.out.find("m0^2") != std::string::npos);
}

TEST_CASE("text format carries the goldstone accounting header") {
    RunResult r = run_cli({"goldstone", "--model", models_dir() + "/mexican_hat.ftl", "--vacuum",
                           "phi[1]=1,phi[2]=0", "--param", "lambda=0.5,v=1"});
    CHECK(r.out.find("GOLDSTONE ACCOUNTING") != std::string::npos);
}

TEST_CASE("reports are byte-identical across repeated runs") {
    std::vector<std::string> args = {"conformal", "--model", models_dir() + "/coleman.ftl",
                                     "--vacuum", "phi=0,sigma=0", "--param",
                                     "mu0=1,f=1,lam=24", "--format", "json"};
    RunResult first = run_cli(args);
    RunResult second = run_cli(args);
    CHECK(first.exit_code == second.exit_code);
    CHECK(first.out == second.out);
    args.back() = "text";
    RunResult third = run_cli(args);
    RunResult fourth = run_cli(args);
    CHECK(third.out == fourth.out);
}

TEST_CASE("json output parses back with the expected top-level shape") {
    RunResult r = run_cli({"verify", "--model", models_dir() + "/u1_higgs.ftl", "--format",
                           "json"});
    REQUIRE(r.exit_code == 0);
    json report = json::parse(r.out);
    for (const char* key : {"schema", "tool_version", "model", "command", "sections", "status"})
        CHECK(report.contains(key));
    CHECK(report["command"] == "verify");
}

TEST_CASE("usage and parse errors exit 2 with diagnostics") {
    RunResult nofile = run_cli({"verify", "--model", "/nonexistent.ftl"});
    CHECK(nofile.exit_code == 2);
    CHECK(!nofile.err.empty());

    // A syntactically broken model file produces a caret diagnostic.
    std::string bad_path = std::string(FIELDSYM_GOLDEN_DIR) + "/../bad_model.ftl";
    {
        std::ofstream bad(bad_path);
        bad << "model demo\nfield phi scalar\nlagrangian = phi + )\n";
    }
    RunResult parse = run_cli({"verify", "--model", bad_path});
    CHECK(parse.exit_code == 2);
    CHECK(parse.err.find("^") != std::string::npos);
    std::remove(bad_path.c_str());

    RunResult badflag = run_cli({"goldstone", "--model", models_dir() + "/mexican_hat.ftl",
                                 "--vacuum", "zeta=1"});
    CHECK(badflag.exit_code == 2);

    RunResult nosub = run_cli({});
    CHECK(nosub.exit_code == 2);
}

TEST_CASE("dimension override reruns the pipeline in lower dimensions") {
    RunResult r = run_cli({"conformal", "--model", models_dir() + "/coleman.ftl", "--vacuum",
                           "phi=0,sigma=0", "--param", "mu0=1,f=1,lam=24", "--dimension", "3",
                           "--format", "json"});
    REQUIRE(r.exit_code == 0);
    json report = json::parse(r.out);
    CHECK(report["sections"]["goldstone_accounting"]["broken"] == 4);
    CHECK(report["sections"]["goldstone_accounting"]["extra_constraint_count"] == 3);
}

TEST_CASE("arbitrary argv never crashes the driver") {
    std::mt19937 rng(20240823);
    const std::vector<std::string> words = {
        "verify",  "goldstone", "--model",  models_dir() + "/mexican_hat.ftl",
        "--param", "lambda=",   "--vacuum", "phi[9]=1",
        "--tol",   "-3",        "oracle",   "\xff\xfe",
        "--format", "yaml",     "--lattice", "0"};
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> args;
        int n = static_cast<int>(rng() % 6);
        for (int k = 0; k < n; ++k) args.push_back(words[rng() % words.size()]);
        std::ostringstream out, err;
        int code = cli::run(args, out, err);
        CHECK(code >= 0);
        CHECK(code <= 2);
    }
}

TEST_CASE("golden reports for the three shipped models") {
    struct Golden {
        const char* name;
        std::vector<std::string> args;
    };
    std::vector<Golden> goldens = {
        {"mexican_hat_goldstone.json",
         {"goldstone", "--model", models_dir() + "/mexican_hat.ftl", "--vacuum",
          "phi[1]=1,phi[2]=0", "--param", "lambda=0.5,v=1", "--format", "json"}},
        {"u1_higgs_higgs.json",
         {"higgs", "--model", models_dir() + "/u1_higgs.ftl", "--vacuum", "phi[1]=1,phi[2]=0",
          "--format", "json"}},
        {"coleman_conformal.json",
         {"conformal", "--model", models_dir() + "/coleman.ftl", "--vacuum", "phi=0,sigma=0",
          "--param", "mu0=1,f=1,lam=24", "--format", "json"}},
    };
    for (const auto& g : goldens) {
        RunResult r = run_cli(g.args);
        CAPTURE(g.name);
        REQUIRE(r.exit_code == 0);
        std::string path = golden_dir() + "/" + g.name;
        std::ifstream in(path);
        REQUIRE_MESSAGE(in.good(), ("golden file missing: " + path));
        std::ostringstream buf;
        buf << in.rdbuf();
        json expected = json::parse(buf.str());
        json actual = json::parse(r.out);
        CHECK_MESSAGE(json_close(expected, actual), ("golden mismatch for " + path));
    }
}
