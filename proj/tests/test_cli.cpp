#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(GEBSDE_BIN) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

std::string bench(const std::string& name) { return std::string(BENCH_DIR) + "/" + name; }

std::string filtered_report(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("time:", 0) != 0) out << line << '\n';
    return out.str();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("config errors exit with code 1") {
    CHECK(run_cli("check --config " + bench("broken_missing_sigma.toml")) == 1);
    CHECK(run_cli("check --config /nonexistent/nowhere.toml") == 1);
}

TEST_CASE("parabolic benchmark passes and reports are deterministic") {
    std::filesystem::create_directories("cli_tmp");
    CHECK(run_cli("parabolic --config " + bench("gheat.toml") + " --out cli_tmp/a --quiet") == 0);
    CHECK(run_cli("parabolic --config " + bench("gheat.toml") + " --out cli_tmp/b --quiet") == 0);
    CHECK(filtered_report("cli_tmp/a/report.txt") == filtered_report("cli_tmp/b/report.txt"));
    CHECK(slurp("cli_tmp/a/parabolic.csv") == slurp("cli_tmp/b/parabolic.csv"));
}

TEST_CASE("acceptance misses exit with code 3") {
    std::filesystem::create_directories("cli_tmp");
    std::ifstream in(bench("gheat.toml"));
    std::ostringstream body;
    body << in.rdbuf();
    std::string text = body.str();
    auto pos = text.find("u0 = 4.0");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 8, "u0 = 9.0");
    std::ofstream out("cli_tmp/gheat_wrong.toml");
    out << text;
    out.close();
    CHECK(run_cli("parabolic --config cli_tmp/gheat_wrong.toml --out cli_tmp/w --quiet") == 3);
}

TEST_CASE("numerical failures exit with code 2") {
    std::filesystem::create_directories("cli_tmp");
    std::ofstream out("cli_tmp/cfl_violation.toml");
    out << "[model]\nn = 1\nd = 1\nb = \"0\"\nh = \"0\"\nsigma = \"1\"\nf = \"0\"\ng = \"0\"\n"
           "L = 0\nalpha1 = 0\nalpha2 = 0\nmu = 0\neta = 0\nalpha = 0\n"
           "[uncertainty]\nsigma_lo_sq = 1.0\nsigma_hi_sq = 4.0\n"
           "[grid]\nx_lo = -4.0\nx_hi = 4.0\nh = 0.1\ndt = 0.01\n"
           "[parabolic]\nphi = \"x1^2\"\nT = 1.0\n";
    out.close();
    CHECK(run_cli("parabolic --config cli_tmp/cfl_violation.toml --out cli_tmp/c --quiet") == 2);
}

TEST_CASE("constant-driver ergodic benchmark exits clean") {
    CHECK(run_cli("ergodic --config " + bench("constant.toml")
                  + " --out cli_tmp/constant --quiet") == 0);
    std::string rep = filtered_report("cli_tmp/constant/report.txt");
    CHECK(rep.find("lambda") != std::string::npos);
    CHECK(rep.find("verdict: pass") != std::string::npos);
    CHECK(std::filesystem::exists("cli_tmp/constant/lambda_history.csv"));
    CHECK(std::filesystem::exists("cli_tmp/constant/v.csv"));
}

TEST_CASE("assumption check passes on the classical benchmark") {
    CHECK(run_cli("check --config " + bench("ou_classical.toml")
                  + " --out cli_tmp/check --quiet") == 0);
    std::string rep = slurp("cli_tmp/check/report.txt");
    CHECK(rep.find("B4: holds on sample") != std::string::npos);
    CHECK(rep.find("B5: holds") != std::string::npos);
}

TEST_CASE("violated assumptions are an acceptance failure") {
    std::filesystem::create_directories("cli_tmp");
    std::ofstream out("cli_tmp/bad_monotone.toml");
    out << "[model]\nn = 1\nd = 1\nb = \"-x1\"\nh = \"0\"\nsigma = \"1\"\nf = \"y\"\ng = \"0\"\n"
           "L = 1\nalpha1 = 0\nalpha2 = 0\nmu = 1\neta = 1\nalpha = 1\n"
           "[uncertainty]\nsigma_lo_sq = 1.0\nsigma_hi_sq = 4.0\n"
           "[grid]\nx_lo = -4.0\nx_hi = 4.0\nh = 0.1\n";
    out.close();
    CHECK(run_cli("check --config cli_tmp/bad_monotone.toml --out cli_tmp/bad --quiet") == 3);
}

TEST_CASE("grid override propagates") {
    CHECK(run_cli("large-time --config " + bench("constant.toml")
                  + " --grid-h 0.2 --out cli_tmp/override --quiet") == 0);
}
