#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "pdisk/cli.hpp"

using namespace pdisk;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "pdisk");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

json run_json(std::vector<std::string> args, int expect_code = 0) {
    const Run r = run_cli(std::move(args));
    REQUIRE(r.code == expect_code);
    return json::parse(r.out);
}

fs::path scratch_dir() {
    const fs::path d = fs::temp_directory_path() / ("pdisk_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

int run_binary(const std::string& args) {
    const std::string cmd = std::string(PDISK_CLI_PATH) + " " + args;
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("complex list parsing") {
    const auto v = cli::parse_complex_list("1,0.5:-0.25,-3e-2");
    REQUIRE(v.size() == 3);
    CHECK(v[0] == cplx(1.0, 0.0));
    CHECK(v[1] == cplx(0.5, -0.25));
    CHECK(v[2] == cplx(-0.03, 0.0));
    CHECK_THROWS_AS(cli::parse_complex_list("1,x"), Error);
    CHECK_THROWS_AS(cli::parse_complex_list("1:2:3"), Error);
    CHECK_THROWS_AS(cli::parse_complex_list(""), Error);
}

TEST_CASE("structure files") {
    const auto J = cli::parse_structure(
        R"({"n": 2, "R": 1, "R1": 0.1, "terms": [{"i": 2, "mbar": 1, "alpha": [0, 0], "beta": [0, 1], "re": 0.3, "im": -0.1}]})");
    CHECK(J.n() == 2);
    CHECK_FALSE(J.integrable());
    const std::vector<cplx> z{0.2, cplx(0.01, 0.02)};
    CHECK(std::abs(J.coefficient(1, 0, z) - cplx(0.3, -0.1) * std::conj(z[1])) <= 1e-15);
    CHECK(J.coefficient(0, 1, z) == 0.0);

    CHECK_THROWS_WITH(cli::parse_structure(R"({"n": 2, "R": 1, "terms": []})"), "structure file: missing field 'R1'");
    CHECK_THROWS_WITH(
        cli::parse_structure(R"({"n": 2, "R": 1, "R1": 0.1, "terms": [{"i": 1, "mbar": 2, "alpha": [0, 0], "re": 1, "im": 0}]})"),
        "structure file: missing field 'terms[0].beta'");
    CHECK_THROWS_WITH(
        cli::parse_structure(R"({"n": 2, "R": 1, "R1": 0.1, "terms": [{"i": 3, "mbar": 1, "alpha": [0, 0], "beta": [0, 0], "re": 1, "im": 0}]})"),
        "structure file: field 'terms[0].i' out of range 1..2");
    CHECK_THROWS_AS(cli::parse_structure("{\"n\": 2,"), Error);
}

TEST_CASE("solve command") {
    SUBCASE("integrable") {
        const json d = run_json({"solve", "--catalog", "integrable", "--n", "2", "--R", "1", "--u", "1,0"});
        CHECK(d["result"]["verdict"] == "converged");
        CHECK(d["result"]["residual"].get<double>() <= 1e-12);
        CHECK(d["seed"] == 1);
        CHECK(d["version"] == cli::kVersion);
        CHECK(d["config"]["catalog"] == "integrable");
    }
    SUBCASE("perturbed") {
        const json d = run_json({"solve", "--catalog", "perturbed", "--amplitude", "0.05", "--R", "1", "--R-solve",
                                 "0.9", "--u", "1,0"});
        CHECK(d["result"]["verdict"] == "converged");
    }
    SUBCASE("transverse jet on the perturbed structure") {
        const json d = run_json({"solve", "--catalog", "perturbed", "--u", "1,0.02:0.01", "--scheme", "layered"});
        CHECK(d["result"]["verdict"] == "converged");
        CHECK(d["result"]["scheme"] == "layered");
        CHECK(d["result"]["residual"].get<double>() <= 1e-8);
    }
    SUBCASE("non-convergence exits with 2") {
        const Run r = run_cli({"solve", "--catalog", "perturbed", "--amplitude", "5", "--R1", "1", "--u", "1,0.5",
                               "--R-solve", "0.95", "--delta", "1e9"});
        CHECK(r.code == cli::not_converged);
        CHECK(json::parse(r.out)["result"]["verdict"] == "diverged");
    }
    SUBCASE("sweep table as CSV") {
        const Run r = run_cli({"solve", "--catalog", "perturbed", "--u", "1,0.02", "--sweep-ball", "0.01",
                               "--sweep-grid", "3", "--format", "csv"});
        CHECK(r.code == 0);
        std::istringstream in(r.out);
        std::string line;
        std::vector<std::string> lines;
        while (std::getline(in, line)) lines.push_back(line);
        REQUIRE(lines.size() == 4 + 1 + 9);
        CHECK(lines[0] == std::string("# pdisk ") + cli::kVersion);
        CHECK(lines[2] == "# seed 1");
        CHECK(lines[4] == "index,u1_re,u1_im,u2_re,u2_im,offset,verdict,residual,iterations");
    }
    SUBCASE("usage errors") {
        CHECK(run_cli({"solve", "--u", "1,0,3"}).code == cli::usage);
        CHECK(run_cli({"solve", "--catalog", "nope"}).code == cli::usage);
        CHECK(run_cli({"solve", "--R-solve", "2"}).code == cli::usage);
        CHECK(run_cli({"solve", "--format", "xml"}).code == cli::usage);
        CHECK(run_cli({}).code == cli::usage);
    }
}

TEST_CASE("structure file errors name the field") {
    const fs::path dir = scratch_dir();
    write_file(dir / "bad.json",
               R"({"n": 2, "R": 1, "R1": 0.1, "terms": [{"i": 1, "mbar": 2, "alpha": [0, 1], "beta": [0, 0], "re": 0.1}]})");
    const Run r = run_cli({"solve", "--structure", (dir / "bad.json").string()});
    CHECK(r.code == cli::usage);
    CHECK(r.err.find("terms[0].im") != std::string::npos);
    CHECK(run_cli({"solve", "--structure", (dir / "missing.json").string()}).code == cli::usage);
    fs::remove_all(dir);
}

TEST_CASE("operator-check command") {
    const json d = run_json({"operator-check"});
    CHECK(d["result"]["pass"] == true);
    for (const auto& [name, value] : d["result"]["identities"].items()) CHECK(value.get<double>() <= 1e-8);
    CHECK(d["result"]["monomial_table_error"].get<double>() <= 1e-12);

    const json m = run_json({"operator-check", "--monomial", "l=3,m=0,k=1", "--R", "1.5"});
    CHECK(m["result"]["monomial"]["exact"] == true);
    // zeta^3 zetabar - R^2 zeta^2
    CHECK(m["result"]["monomial"]["image"] == json::parse("[[2, 0, -2.25, 0.0], [3, 1, 1.0, 0.0]]"));

    const json z = run_json({"operator-check", "--samples", "0"});
    CHECK(z["result"]["bounds"] == json{{"sample_count", 0}});
    CHECK(run_cli({"operator-check", "--monomial", "l=3"}).code == cli::usage);
}

TEST_CASE("pseudonorm command") {
    const json d = run_json({"pseudonorm", "--catalog", "product-disk", "--R", "1", "--R1", "0.5", "--v", "1,1"});
    CHECK(d["result"]["value"].get<double>() == doctest::Approx(2.0).epsilon(0.05));
    CHECK(d["result"]["witness"]["verdict"] == "converged");

    const json s = run_json({"pseudonorm", "--catalog", "perturbed", "--R1", "1", "--v", "1,0.3", "--ball", "0.02",
                             "--samples", "4"});
    const auto& semi = s["result"]["semicontinuity"];
    CHECK(semi["samples"].size() == 4);
    CHECK(semi["excess"].get<double>() <= 0.05 * semi["base_value"].get<double>());
}

TEST_CASE("no disk found exits with 3") {
    const fs::path dir = scratch_dir();
    write_file(dir / "wild.json",
               R"({"n": 2, "R": 1, "R1": 1, "terms": [{"i": 2, "mbar": 1, "alpha": [0, 0], "beta": [0, 0], "re": 1e300, "im": 0}]})");
    const Run r = run_cli({"pseudonorm", "--structure", (dir / "wild.json").string(), "--v", "1,0"});
    CHECK(r.code == cli::no_disk);
    CHECK(r.err.find("no disk found") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("distance command") {
    const json d = run_json({"distance", "--method", "both", "--p", "0,0", "--q", "0.5,0", "--R1", "1"});
    const double a = std::atanh(0.5);
    const double path = d["result"]["path"]["value"].get<double>();
    const double chain = d["result"]["chain"]["value"].get<double>();
    CHECK(path == doctest::Approx(a).epsilon(0.05));
    CHECK(chain == doctest::Approx(a).epsilon(0.05));
    CHECK(std::abs(chain - path) <= 0.05 * chain);
    CHECK(d["result"]["relative_gap"].get<double>() <= 0.05);
    CHECK(run_cli({"distance", "--method", "straight"}).code == cli::usage);
    CHECK(run_cli({"distance", "--q", "2,0"}).code == cli::usage);
}

TEST_CASE("hyperbolicity command") {
    const json d = run_json({"hyperbolicity", "--catalog", "integrable", "--region", "full"});
    CHECK(d["result"]["min"].get<double>() > 0.0);
    CHECK(d["result"]["verdict"] == "hyperbolic evidence");
    CHECK(d["result"]["entries"].size() == 5 * 8);
}

TEST_CASE("output files are written whole and reproducibly") {
    const fs::path dir = scratch_dir();
    const std::vector<std::string> base{"hyperbolicity", "--catalog", "perturbed", "--R1", "1", "--region", "full",
                                        "--directions", "3", "--seed", "7"};
    auto with = [&](const std::string& out, const std::string& threads) {
        auto args = base;
        args.insert(args.end(), {"--out", (dir / out).string(), "--threads", threads});
        return args;
    };
    REQUIRE(run_cli(with("a.json", "1")).code == 0);
    REQUIRE(run_cli(with("b.json", "1")).code == 0);
    REQUIRE(run_cli(with("c.json", "8")).code == 0);
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    CHECK(slurp(dir / "a.json") == slurp(dir / "c.json"));
    CHECK(fs::exists(dir / "a.json.timing.json"));
    CHECK(json::parse(slurp(dir / "a.json.timing.json")).contains("wall_seconds"));
    for (const auto& entry : fs::directory_iterator(dir)) CHECK(entry.path().string().find(".tmp.") == std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("installed binary") {
    const fs::path dir = scratch_dir();
    const std::string out = (dir / "s.json").string();
    CHECK(run_binary("solve --catalog integrable --u 1,0 --out " + out) == 0);
    CHECK(json::parse(slurp(out))["result"]["verdict"] == "converged");
    CHECK(run_binary("solve --u 1 2> /dev/null") == 1);
    CHECK(run_binary("--version > /dev/null") == 0);
    fs::remove_all(dir);
}
