#include <catch_amalgamated.hpp>

#include <sturmdisc/cli.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

using namespace sturmdisc;
using cli::json;

namespace {

const std::string samples = STURMDISC_SAMPLES_DIR;

struct Proc {
    int status = -1;
    std::string out;
};

Proc shell(const std::string& args) {
    const std::string cmd = std::string("\"") + STURMDISC_TOOL_PATH + "\" " + args + " 2>/dev/null";
    Proc p;
    FILE* f = popen(cmd.c_str(), "r");
    REQUIRE(f != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, f)) > 0) p.out.append(buf, n);
    const int st = pclose(f);
    p.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return p;
}

cli::RunResult run_json(const std::string& text, const std::string& command, const std::string& sub = "") {
    return cli::run(json::parse(text), command, sub);
}

} // namespace

TEST_CASE("spectrum report") {
    const cli::RunResult r = cli::run_file(samples + "/neumann_spectrum.json", "spectrum", "");
    REQUIRE(r.exit_code == cli::exit_ok);
    const json j = json::parse(r.output);
    CHECK(j["tool"] == "sturmdisc");
    CHECK(j["version"] == version);
    CHECK(j["status"] == "ok");
    CHECK(j["config"]["params"]["c_im"] == 50.0);  // defaults are written back
    const json& ev = j["result"]["eigenvalues"];
    REQUIRE(ev.size() == 10);
    for (std::size_t n = 0; n < ev.size(); ++n) CHECK(std::abs(ev[n]["re"].get<double>() - double(n * n)) < 1e-8);
}

TEST_CASE("norming report") {
    const cli::RunResult r = cli::run_file(samples + "/neumann_norming.json", "norming", "");
    REQUIRE(r.exit_code == cli::exit_ok);
    const json ev = json::parse(r.output)["result"]["eigenvalues"];
    REQUIRE(ev.size() >= 5);
    for (std::size_t n = 0; n < ev.size(); ++n) {
        const double kappa = ev[n]["kappas"][0]["re"].get<double>();
        CHECK(std::abs(kappa - (n % 2 ? -1.0 : 1.0)) < 1e-9);
    }
}

TEST_CASE("identical pair gives zero discrepancy") {
    const cli::RunResult r = cli::run_file(samples + "/identical_fqh.json", "uniq", "fqh");
    REQUIRE(r.exit_code == cli::exit_ok);
    const json j = json::parse(r.output);
    CHECK(j["pass"] == true);
    for (const json& s : j["result"]["samples"]) CHECK(s["discrepancy"] == 0.0);
}

TEST_CASE("csv output") {
    const cli::RunResult r = cli::run_file(samples + "/jump_charfn.json", "charfn", "", std::nullopt, "csv");
    REQUIRE(r.exit_code == cli::exit_ok);
    std::istringstream in(r.output);
    std::string line;
    std::getline(in, line);
    CHECK(line == std::string("# sturmdisc ") + version + " charfn");
    int comments = 1, rows = 0;
    while (std::getline(in, line)) {
        if (line.rfind("#", 0) == 0) ++comments;
        else ++rows;
    }
    CHECK(comments == 3);
    CHECK(rows == 1 + 3 * 3);  // header, 3 lambdas x derivatives 0..2
    CHECK(cli::fmt17(0.1) == "0.10000000000000001");
    CHECK(cli::fmt17(-2.5) == "-2.5");
}

TEST_CASE("reports are reproducible") {
    const cli::RunResult a = cli::run_file(samples + "/jump_charfn.json", "charfn", "");
    const cli::RunResult b = cli::run_file(samples + "/jump_charfn.json", "charfn", "");
    CHECK(a.output == b.output);
}

TEST_CASE("config errors carry the field path") {
    struct Case {
        const char* text;
        const char* path;
    };
    const Case cases[] = {
        {R"({"problems":{"p":{"q":"sin("}},"command":"spectrum","params":{"problem":"p","bound":10}})", "/problems/p/q"},
        {R"({"problems":{"p":{"q":"0"}},"command":"spectrum","params":{"problem":"p","bound":10,"bogus":1}})", "/params/bogus"},
        {R"({"problems":{"p":{"q":"0"}},"command":"spectrum","params":{"problem":"q","bound":10}})", "/params/problem"},
        {R"({"problems":{"p":{"q":"0"}},"command":"spectrum","params":{"problem":"p","bound":-1}})", "/params/bound"},
        {R"({"problems":{"p":{"q":"0","beta":-2}},"command":"spectrum","params":{"problem":"p","bound":10}})", "/problems/p"},
        {R"({"problems":{"p":{"q":"0"}},"command":"spectrum","params":{"problem":"p"}})", "/params/bound"},
    };
    for (const Case& c : cases) {
        const cli::RunResult r = run_json(c.text, "spectrum");
        INFO(c.text);
        CHECK(r.exit_code == cli::exit_validation);
        CHECK(r.message.find(c.path) != std::string::npos);
        CHECK(r.output.empty());
    }
    CHECK(run_json(R"({"problems":{},"command":"spectrum","params":{}})", "nothing").exit_code == cli::exit_validation);
    CHECK(run_json(R"({"problems":{},"command":"uniq","params":{}})", "uniq", "other").exit_code == cli::exit_validation);
    CHECK(cli::run_file("/nonexistent/config.json", "spectrum", "").exit_code == cli::exit_validation);
}

TEST_CASE("property failure exit code") {
    // the counting hypothesis fails once two eigenvalues are dropped from G
    const std::string text = R"J({
      "problems": { "base": { "q": "2 + cos(x)", "h": 0.5, "H": 0.25, "beta": 1.3, "gamma": 0.2, "d": 1 } },
      "command": "uniq ratio",
      "params": { "a": "base", "splice": { "w": "1" }, "agreement_point": "pi/2", "m": 0,
                  "product": { "kind": "F/G", "power_B": 1, "remove_B": [0, 1], "spectrum_bound": 100 },
                  "y_min": 1000, "y_max": 1e5, "per_decade": 2 } })J";
    const cli::RunResult r = run_json(text, "uniq", "ratio");
    CHECK(r.exit_code == cli::exit_property);
    const json j = json::parse(r.output);
    CHECK(j["pass"] == false);
    CHECK(j["result"]["counting_ok"] == false);
}

TEST_CASE("command line tool") {
    const Proc ok = shell("spectrum --config \"" + samples + "/neumann_spectrum.json\"");
    CHECK(ok.status == 0);
    CHECK(json::parse(ok.out)["result"]["count"] == 10);

    const std::filesystem::path out = std::filesystem::temp_directory_path() / "sturmdisc_test_out.csv";
    std::filesystem::remove(out);
    const Proc file = shell("charfn --config \"" + samples + "/jump_charfn.json\" --format csv --out \"" + out.string() + "\"");
    CHECK(file.status == 0);
    CHECK(file.out.empty());
    std::ifstream in(out);
    std::string first;
    std::getline(in, first);
    CHECK(first.rfind("# sturmdisc", 0) == 0);
    std::filesystem::remove(out);

    CHECK(shell("spectrum --config /nonexistent.json").status == 1);
    CHECK(shell("spectrum --config \"" + samples + "/neumann_spectrum.json\" --format xml").status != 0);
    CHECK(shell("uniq fqh --config \"" + samples + "/identical_fqh.json\"").status == 0);
}
