#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "riskbandit/cli.hpp"
#include "riskbandit/error.hpp"
#include "riskbandit/risk.hpp"

using namespace riskbandit;
using namespace riskbandit::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "riskbandit");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path(RISKBANDIT_TEST_TMP) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write(const fs::path& path, const std::string& body) {
    std::ofstream(path, std::ios::binary) << body;
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const char* kSmallRegret =
    "[experiment]\nkind = regret\nname = small\ntrials = 1\n"
    "[instance]\narms = gaussian(0,1); gaussian(1,1); gaussian(2,1)\n"
    "[risk]\nmeasure = cvar\nalpha = 0.9\n"
    "[policy]\nname = risk-lcb\nhorizon = 6\ntrace = true\n";

}  // namespace

TEST_CASE("estimate examples") {
    const auto dir = scratch("estimate");
    const auto f = write(dir / "s.txt", "1\n2\n3\n4\n");
    auto r = invoke({"estimate", "--file", f.string(), "--cvar", "0.5"});
    CHECK(r.code == 0);
    CHECK(r.out == "3.5\n");
    r = invoke({"estimate", "--file", write(dir / "five.txt", "5\n").string(), "--mv", "--gamma", "2"});
    CHECK(r.code == 0);
    CHECK(r.out == "10\n");
    r = invoke({"estimate", "--samples", "1,2,3", "--ubsr", "linear:1"});
    CHECK(r.code == 0);
    CHECK(std::abs(std::stod(r.out) - 2.0) <= 1e-8);
    r = invoke({"estimate", "--samples", "0 0 0 1", "--distorted-sqrt"});
    CHECK(r.out == "0.5\n");
    r = invoke({"estimate", "--samples", "1/3", "--mv"});
    CHECK(r.code == kExitInput);
}

TEST_CASE("estimate prints 12 significant digits") {
    const auto r = invoke({"estimate", "--samples", "0,1,1", "--mv", "--gamma", "1"});
    CHECK(r.out == "0.444444444444\n");
}

TEST_CASE("estimate error paths") {
    const auto dir = scratch("estimate_errors");
    auto r = invoke({"estimate", "--file", write(dir / "empty.txt", "").string(), "--cvar", "0.5"});
    CHECK(r.code == kExitInput);
    r = invoke({"estimate", "--file", write(dir / "bad.txt", "1\n2\nthree\n").string(), "--cvar", "0.5"});
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("line 3") != std::string::npos);
    r = invoke({"estimate", "--samples", "1,2", "--cvar", "1.5"});
    CHECK(r.code == kExitDomain);
    r = invoke({"estimate", "--samples", "-1,2", "--distorted-sqrt"});
    CHECK(r.code == kExitDomain);
    CHECK(r.err.find("non-negative support required") != std::string::npos);
    r = invoke({"estimate", "--samples", "1,2", "--cvar", "0.5", "--mv"});
    CHECK(r.code == kExitInput);
    r = invoke({"estimate", "--file", (dir / "missing.txt").string(), "--mv"});
    CHECK(r.code == kExitInput);
}

TEST_CASE("reading samples") {
    std::istringstream in("1.5\n\n  -2\n3e2\n");
    CHECK(read_samples(in) == std::vector<double>{1.5, -2.0, 300.0});
    std::istringstream blank("\n\n");
    CHECK_THROWS_AS(read_samples(blank), InputError);
    std::istringstream bad("1\nx\n");
    CHECK_THROWS_WITH_AS(read_samples(bad), "line 2: cannot parse 'x' as a number", InputError);
}

TEST_CASE("bound examples") {
    auto r = invoke({"bound", "--family", "lipschitz", "--lipschitz", "1", "--sigma", "1", "--n", "262144", "--eps", "2"});
    CHECK(r.code == 0);
    const double v = std::stod(r.out);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK(r.out.find("VACUOUS") == std::string::npos);
    CHECK(r.out.find("window [1, ") != std::string::npos);

    r = invoke({"bound", "--family", "lipschitz", "--lipschitz", "1", "--sigma", "1", "--n", "262144", "--eps", "0.5"});
    CHECK(r.code == kExitDomain);
    CHECK(r.err.find("bound not applicable") != std::string::npos);

    r = invoke({"bound", "--family", "cpt-bounded", "--holder-constant", "1", "--holder-order", "1", "--utility-bound", "1",
             "--n", "2", "--eps", "1"});
    CHECK(r.code == 0);
    CHECK(std::stod(r.out) == doctest::Approx(2.0 * std::exp(-4.0)).epsilon(1e-11));

    r = invoke({"bound", "--family", "mean-variance", "--gamma", "1", "--sigma", "1", "--n", "8", "--eps", "1"});
    CHECK(r.out.find("VACUOUS") != std::string::npos);

    r = invoke({"bound", "--family", "nope", "--n", "8", "--eps", "1"});
    CHECK(r.code == kExitInput);
}

TEST_CASE("parsers") {
    CHECK(parse_arm("gaussian(1, 2)").subgaussian_proxy() == 4.0);
    CHECK(parse_arm("point(3)").mean() == 3.0);
    CHECK(parse_arm("empirical(0:0.5 2:0.5)").mean() == doctest::Approx(1.0));
    CHECK(parse_arms("bernoulli(0.5); uniform(0,2)").size() == 2);
    CHECK_THROWS_AS(parse_arm("cauchy(0,1)"), InputError);
    CHECK_THROWS_AS(parse_arm("gaussian(0,-1)"), DomainError);
    CHECK(parse_spectrum("power:2").bound() == 3.0);
    CHECK(parse_spectrum("step:0.5,1.5").cells().size() == 2);
    CHECK(parse_utility("softplus:0.5,2").lipschitz() == 2.0);
    CHECK(parse_weight("power:0.5")(0.25) == doctest::Approx(0.5));
    CHECK_THROWS_AS(parse_number("abc", "x"), InputError);
    CHECK(parse_number_list("1, 2 ,3", "x") == std::vector<double>{1, 2, 3});
}

TEST_CASE("risk and bound builders") {
    Params p{"risk", {{"measure", "cvar"}, {"alpha", "0.9"}}};
    const auto spec = build_risk(p);
    CHECK(risk::lipschitz_constant(spec) == doctest::Approx(10.0));
    const auto model = parse_arm("gaussian(0,2)");
    Params b{"bound", {{"family", "cvar-lipschitz"}}};
    const auto bound = build_bound(b, &spec, &model);
    const auto* cl = std::get_if<conc::CvarLipschitzBound>(&bound);
    REQUIRE(cl != nullptr);
    CHECK(cl->alpha == 0.9);
    CHECK(cl->sigma == 2.0);
    Params missing{"bound", {{"family", "lipschitz"}}};
    CHECK_THROWS_AS(build_bound(missing, nullptr, nullptr), InputError);
    CHECK_THROWS_AS(build_risk(Params{"risk", {{"measure", "median"}}}), InputError);
}

TEST_CASE("run: unknown keys are rejected by name") {
    const auto dir = scratch("unknown_key");
    const auto cfg = write(dir / "c.ini", std::string(kSmallRegret).replace(std::string(kSmallRegret).find("alpha"), 0, "alpah = 0.5\n"));
    auto r = invoke({"run", cfg.string(), "--seed", "1", "--output-dir", (dir / "out").string()});
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("risk.alpah") != std::string::npos);

    const auto cfg2 = write(dir / "d.ini", "[experiment]\nkind = regret\n[nonsense]\nx = 1\n");
    r = invoke({"run", cfg2.string(), "--seed", "1"});
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("nonsense") != std::string::npos);
}

TEST_CASE("run: regret trace shows the initialization sweep") {
    const auto dir = scratch("init_sweep");
    const auto cfg = write(dir / "c.ini", kSmallRegret);
    const auto r = invoke({"run", cfg.string(), "--seed", "5", "--output-dir", dir.string(), "--workers", "1"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("summary: ") != std::string::npos);
    std::istringstream trace(slurp(dir / "small_trace.csv"));
    std::string line;
    std::getline(trace, line);
    CHECK(line == "trial,t,arm,reward,inst_regret\r");
    std::vector<std::string> arms;
    while (std::getline(trace, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        arms.push_back(cells.at(2));
    }
    REQUIRE(arms.size() == 6);
    CHECK(arms[0] == "0");
    CHECK(arms[1] == "1");
    CHECK(arms[2] == "2");
    CHECK(fs::exists(dir / "small.json"));
}

TEST_CASE("run: seed precedence") {
    const auto dir = scratch("seed");
    const auto cfg = write(dir / "c.ini", kSmallRegret);
    ::unsetenv("RISKBANDIT_SEED");
    auto r = invoke({"run", cfg.string(), "--output-dir", dir.string()});
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("seed") != std::string::npos);

    ::setenv("RISKBANDIT_SEED", "7", 1);
    r = invoke({"run", cfg.string(), "--output-dir", (dir / "env").string(), "-q"});
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    r = invoke({"run", cfg.string(), "--output-dir", (dir / "flag7").string(), "--seed", "7", "-q"});
    CHECK(slurp(dir / "env" / "small_trace.csv") == slurp(dir / "flag7" / "small_trace.csv"));
    r = invoke({"run", cfg.string(), "--output-dir", (dir / "flag8").string(), "--seed", "8", "-q"});
    CHECK(r.code == 0);
    CHECK(slurp(dir / "flag8" / "small_trace.csv") != slurp(dir / "env" / "small_trace.csv"));
    CHECK(slurp(dir / "flag8" / "small.json").find("\"seed\": 8") != std::string::npos);
    ::unsetenv("RISKBANDIT_SEED");
}

TEST_CASE("run: config seed sits between flag and environment") {
    const auto dir = scratch("seed_config");
    std::string body = kSmallRegret;
    body.insert(body.find("trials"), "seed = 8\n");
    const auto cfg = write(dir / "c.ini", body);
    ::setenv("RISKBANDIT_SEED", "7", 1);
    CHECK(invoke({"run", cfg.string(), "--output-dir", (dir / "a").string(), "-q"}).code == 0);
    CHECK(invoke({"run", cfg.string(), "--output-dir", (dir / "b").string(), "--seed", "8", "-q"}).code == 0);
    CHECK(invoke({"run", cfg.string(), "--output-dir", (dir / "c").string(), "--seed", "7", "-q"}).code == 0);
    ::unsetenv("RISKBANDIT_SEED");
    CHECK(slurp(dir / "a" / "small_trace.csv") == slurp(dir / "b" / "small_trace.csv"));
    CHECK(slurp(dir / "a" / "small_trace.csv") != slurp(dir / "c" / "small_trace.csv"));
}

TEST_CASE("run: same config twice gives identical output") {
    const auto dir = scratch("repeat");
    const auto cfg = fs::path(RISKBANDIT_CONFIG_DIR) / "nonlipschitz.ini";
    REQUIRE(invoke({"run", cfg.string(), "--output-dir", (dir / "a").string(), "-q"}).code == 0);
    REQUIRE(invoke({"run", cfg.string(), "--output-dir", (dir / "b").string(), "-q"}).code == 0);
    CHECK(slurp(dir / "a" / "nonlipschitz.csv") == slurp(dir / "b" / "nonlipschitz.csv"));
    // The sidecar echoes output_dir, so compare it across reruns into one directory.
    const auto first_json = slurp(dir / "a" / "nonlipschitz.json");
    REQUIRE(invoke({"run", cfg.string(), "--output-dir", (dir / "a").string(), "-q"}).code == 0);
    CHECK(slurp(dir / "a" / "nonlipschitz.json") == first_json);
    CHECK(slurp(dir / "a" / "nonlipschitz.csv").rfind("eps,rho_diff,w1,ratio\r\n", 0) == 0);

    const auto small = write(dir / "c.ini", kSmallRegret);
    REQUIRE(invoke({"run", small.string(), "--seed", "3", "--trials", "4", "--output-dir", (dir / "c").string(),
                 "--workers", "1", "-q"}).code == 0);
    REQUIRE(invoke({"run", small.string(), "--seed", "3", "--trials", "4", "--output-dir", (dir / "d").string(),
                 "--workers", "3", "-q"}).code == 0);
    CHECK(slurp(dir / "c" / "small.csv") == slurp(dir / "d" / "small.csv"));
    CHECK(slurp(dir / "c" / "small_trace.csv") == slurp(dir / "d" / "small_trace.csv"));
}

TEST_CASE("run: coverage CSV columns") {
    const auto dir = scratch("coverage");
    const auto cfg = fs::path(RISKBANDIT_CONFIG_DIR) / "coverage_cvar.ini";
    const auto r = invoke({"run", cfg.string(), "--trials", "50", "--output-dir", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "coverage_cvar.csv").rfind("n,eps,emp_rate,bound,vacuous\r\n", 0) == 0);
}

TEST_CASE("help") {
    for (const auto& sub : {"", "estimate", "bound", "run"}) {
        std::vector<std::string> args;
        if (*sub) args.push_back(sub);
        args.push_back("--help");
        const auto r = invoke(args);
        CHECK(r.code == 0);
        CHECK(!r.out.empty());
    }
    const auto r = invoke({"bound", "--help"});
    for (const auto* flag : {"--family", "--sigma", "--lipschitz", "--alpha", "--eta", "--delta", "--holder-order",
                             "--utility-bound", "--n", "--eps"})
        CHECK(r.out.find(flag) != std::string::npos);
    CHECK(invoke({"estimate", "--bogus"}).code == kExitInput);
}
