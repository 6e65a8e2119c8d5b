// End-to-end tests of the perfprism executable: outputs, artifacts, exit codes.

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = 0;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("perfprism_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

CliRun run(const std::string& args) {
    fs::path out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
    std::string cmd = std::string("cd ") + PERFPRISM_DATA_DIR + " && " + PERFPRISM_CLI + " " + args + " > " + out.string() +
                      " 2> " + err.string();
    int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

json run_json(const std::string& args) {
    CliRun r = run(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return json::parse(r.out);
}

} // namespace

TEST(Cli, SlopesOfDiagonalMatrix) {
    // diag(p, 1): rank-one pieces with v_p = 1 and 0, slope = -v_p
    json j = run_json("slopes --json diag_p_1.json");
    std::multiset<int> slopes;
    for (auto& s : j["slopes"]) slopes.insert(s.get<int>());
    EXPECT_EQ(slopes, (std::multiset<int>{-1, 0}));
    EXPECT_EQ(j["degree"], -1);
    EXPECT_EQ(j["pure"], false);
}

TEST(Cli, SlopesWritesPolygonArtifacts) {
    fs::path csv = scratch() / "slopes.csv", svg = scratch() / "slopes.svg";
    run_json("slopes diag_p_1.json --csv " + csv.string() + " --svg " + svg.string());
    EXPECT_EQ(slurp(csv), "x,y\n0,0\n1,0\n2,-1\n");
    std::string s = slurp(svg);
    EXPECT_NE(s.find("<svg"), std::string::npos);
    EXPECT_NE(s.find("polyline"), std::string::npos);
}

TEST(Cli, CyclotomicContractionRow) {
    // p = 2, n = 0: |gamma - 1| = p^(-p^2/(p-1)) = 2^-4 on (1+pi)^(1/2)
    json j = run_json("gamma contract --tower cyclo --n 0 --p 2");
    bool seen = false;
    for (auto& row : j["rows"])
        if (row["summand"] == json::array({1})) {
            EXPECT_EQ(row["valuation"], 4);
            EXPECT_EQ(row["norm"], "p^-4");
            seen = true;
        }
    EXPECT_TRUE(seen);
}

TEST(Cli, ToricContractionTable) {
    fs::path csv = scratch() / "toric.csv";
    json j = run_json("gamma contract --tower toric --n 1 --p 3 --csv " + csv.string());
    // t^(e/3), e = 1, 2: v(eps^(3e/3) - 1) = 3 / (3 - 1)
    for (auto& row : j["rows"])
        if (row["summand"] != json::array({0})) EXPECT_EQ(row["valuation"], "3/2");
    EXPECT_NE(slurp(csv).find("toric,3,1,1,3/2,p^-3/2"), std::string::npos);
}

TEST(Cli, GhostOfOnePlusOne) {
    // oracle: ghost([1]) = (1, 1, 1, 1); the sum is 2 in Z/2^(n+1) per component
    json j = run_json("witt ghost teich_one.json teich_one.json");
    EXPECT_EQ(j["ghost_a"], json::array({1, 1, 1, 1}));
    EXPECT_EQ(j["ghost_sum"], json::array({0, 2, 2, 2}));
    EXPECT_EQ(j["ghost_product"], json::array({1, 1, 1, 1}));
    EXPECT_EQ(j["sum_matches_oracle"], true);
    EXPECT_EQ(j["product_matches_oracle"], true);
}

TEST(Cli, WittArithmeticRoundTrips) {
    // the result document parses back: (x + y) + 0 reproduces it byte for byte
    fs::path sum = scratch() / "sum.json", zero = scratch() / "zero.json";
    CliRun w = run("witt add witt_x.json witt_y.json --out " + sum.string());
    EXPECT_EQ(w.code, 0);
    EXPECT_TRUE(w.out.empty());
    json a = json::parse(slurp(sum));
    json z = a;
    z["terms"] = json::array();
    std::ofstream(zero) << z.dump();
    EXPECT_EQ(run_json("witt add " + sum.string() + " " + zero.string()), a);
    EXPECT_EQ(run_json("witt add " + sum.string() + " " + zero.string() + " --precision-p 1")["plen"], 1);
}

TEST(Cli, ThetaOfTeichmullerOne) {
    json j = run_json("theta teich_one.json --guard 3");
    EXPECT_EQ(j["value"]["terms"], json::parse("[[0, 1]]"));
}

TEST(Cli, DivisionByStandardPrimitive) {
    json j = run_json("divide witt_x.json");
    EXPECT_EQ(j["certified"], true);
    json b = run_json("divide --mode b --eps 2 --m 1 witt_x.json");
    EXPECT_TRUE(b.contains("y"));
}

TEST(Cli, GaussNormRows) {
    json j = run_json("norm gauss --r 1 --r 1/2 witt_x.json");
    ASSERT_EQ(j["gauss_norm"].size(), 2u);
    // digit 0 has leading exponent 1/4, so log_p = -r/4
    EXPECT_EQ(j["gauss_norm"][0]["log_p"], "-1/4");
    EXPECT_EQ(j["gauss_norm"][1]["log_p"], "-1/8");
}

TEST(Cli, NewtonPolygonOfPoints) {
    json j = run_json("polygon newton points.json");
    EXPECT_EQ(j["polygon"]["vertices"], json::parse(R"([[0,3],[1,1],[3,0],[4,1]])"));
}

TEST(Cli, HarderNarasimhanBlocks) {
    json j = run_json("polygon hn hn_blocks.json");
    EXPECT_EQ(j["matches"], true);
    EXPECT_EQ(j["admissible_orderings"], 1);
}

TEST(Cli, TypeACohomologyOfTrivialModule) {
    json j = run_json("cohomology typeA trivial_f2.json");
    EXPECT_EQ(j["H0"].size(), 1u);
    EXPECT_EQ(j["H0"][0]["cyclic_exponent"], 2);
    EXPECT_EQ(j["H1"][0]["cyclic_exponent"], 2);
}

TEST(Cli, LangTrivialization) {
    // A has order 3 and no fixed vector over F_2, so F_8 is needed
    json j = run_json("lang lang.json");
    EXPECT_EQ(j["k"], 3);
}

TEST(Cli, PreparationAndZeroSeparation) {
    json p = run_json("prep factor puiseux.json");
    EXPECT_EQ(p["prepared"], true);
    EXPECT_EQ(p["width"], "1/2");
    json z = run_json("zeros separate zeros.json");
    EXPECT_EQ(z["multiplicity"], json::array({1, 1}));
    EXPECT_EQ(z["rest"]["terms"], json::parse("[[0, [[0, [1, 0]]]]]"));
}

TEST(Cli, FittingIdealsMatchInvariantFactors) {
    // the relations present Z/3 + Z/9 (invariant factors 1, 3, 9)
    json j = run_json("fitting --presentation presentation.json --upto 3");
    std::vector<int> e;
    for (auto& row : j["fitting"]) e.push_back(row["exponent"].get<int>());
    EXPECT_EQ(e, (std::vector<int>{3, 1, 0, 0}));
}

TEST(Cli, DecompletionTrace) {
    fs::path log = scratch() / "trace.csv";
    json j = run_json("gamma decomplete --in gamma_G.json --log " + log.string());
    for (auto& row : j["G0"]["entries"])
        for (auto& e : row)
            for (auto& t : e) EXPECT_TRUE(t[0][0].is_number_integer());
    std::string csv = slurp(log);
    EXPECT_EQ(csv.rfind("step,defect,v_N,v_c,predicted,next\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), int(j["steps"].size()) + 1);
}

TEST(Cli, SuiteByName) {
    json j = run_json("suite contraction --seed 7");
    EXPECT_EQ(j["results"][0]["pass"], true);
}

TEST(Cli, OutputIsDeterministic) {
    for (const char* args : {"witt mul witt_x.json witt_y.json", "suite preparation --seed 3", "gamma decomplete gamma_G.json"}) {
        CliRun a = run(args), b = run(args);
        EXPECT_EQ(a.code, 0);
        EXPECT_EQ(a.out, b.out) << args;
    }
}

TEST(Cli, SchemaErrorExitCode) {
    fs::path bad = scratch() / "bad.json";
    std::ofstream(bad) << R"({"coeff": {"p": 2}, "entries": [[1]]})";
    CliRun r = run("slopes " + bad.string());
    EXPECT_EQ(r.code, 3);
    json e = json::parse(r.err);
    EXPECT_EQ(e["error"], "SchemaError");
    EXPECT_TRUE(e.contains("message"));

    std::ofstream(bad) << "{not json";
    EXPECT_EQ(run("slopes " + bad.string()).code, 3);
    EXPECT_EQ(run("slopes missing_file.json").code, 3);
    EXPECT_EQ(run("gamma contract --tower elliptic").code, 3);
    EXPECT_EQ(run("no-such-command").code, 3);
}

TEST(Cli, PrecisionFailureExitCode) {
    CliRun r = run("witt add witt_x.json witt_y.json --precision-p 9");
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(json::parse(r.err)["error"], "InsufficientPrecision");
    EXPECT_EQ(run("theta witt_x.json --guard 2 --denom-exp 1").code, 2);
}

TEST(Cli, NonConvergenceExitCode) {
    CliRun r = run("gamma decomplete gamma_G.json --max-iter 1");
    EXPECT_EQ(r.code, 4);
    EXPECT_EQ(json::parse(r.err)["error"], "MaxIterExceeded");
}
