#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "witten/json_io.hpp"

using witten::json;

namespace {

int run(const std::string& args, const std::string& stdout_path = "/dev/null") {
    const std::string cmd = std::string(WITTEN_CLI_PATH) + " " + args + " > " + stdout_path + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json report_without_timing(const std::string& path) {
    json j = json::parse(slurp(path));
    j.erase("timing");
    return j;
}

}  // namespace

TEST_CASE("exit codes") {
    CHECK(run("check-criterion --potential vdelta:1") == 0);
    CHECK(run("check-criterion --potential vdelta:0") == 2);
    CHECK(run("check-criterion --potential nothing:1") == 1);
    CHECK(run("mtau --tau 1 --tau0 10 --c 2") == 0);
    CHECK(run("mtau --tau 20 --tau0 10 --c 2") == 1);
    CHECK(run("limit-poly --v 1 --a 1 --b 2 --c 1 --j 4,8,16,32,64 --potential-missing") == 1);
    CHECK(run("--help") == 0);
    CHECK(run("no-such-command") == 1);
}

TEST_CASE("reports are deterministic and replayable") {
    const std::string a = "witten_cli_a.json", b = "witten_cli_b.json", c = "witten_cli_c.json";
    REQUIRE(run("check-criterion --potential phidelta:-1 --out " + a) == 2);
    REQUIRE(run("check-criterion --potential phidelta:-1 --out " + b) == 2);
    CHECK(report_without_timing(a) == report_without_timing(b));
    const json ra = report_without_timing(a);
    CHECK(ra.at("exit_code") == 2);
    CHECK(ra.at("config").at("options").at("potential") == "phidelta:-1");
    CHECK(run("--config " + a + " --out " + c) == 2);
    CHECK(report_without_timing(c) == ra);

    REQUIRE(run("mtau --tau 1 --tau0 10 --c 2 --json", a) == 0);
    CHECK(json::parse(slurp(a)).at("exit_code") == 0);
    for (const auto& p : {a, b, c}) std::remove(p.c_str());
}

TEST_CASE("malformed potential file") {
    const std::string bad = "witten_cli_bad.json";
    {
        std::ofstream out(bad);
        out << "{ not json";
    }
    CHECK(run("check-criterion --potential " + bad + " --k 2") == 1);
    std::remove(bad.c_str());
}
