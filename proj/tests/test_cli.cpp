#include "cli.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

namespace {

struct Result {
    int status;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int s = selmer::cli::run(args, out, err);
    return {s, out.str(), err.str()};
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

const std::string E0 = "[1,0,1,0,0]";
std::string fixture(const std::string& name) { return std::string(SELMER_FIXTURES) + "/" + name; }

}  // namespace

TEST(Cli, Headers) {
    EXPECT_EQ(first_line(run({"localdata", "--curve", E0}).out), "p,kodaira,c_p,reduction,f_p");
    EXPECT_EQ(first_line(run({"ratios", "--curve", E0, "--twist", "5"}).out), "place,c_phi,c_phiprime,c_pi");
    EXPECT_EQ(first_line(run({"profile", "--curve", E0}).out), "signature,c,t,density");
    EXPECT_EQ(first_line(run({"densities", "--curve", E0, "--height", "1000"}).out), "m,mu_exact,mu_empirical,count");
    EXPECT_EQ(first_line(run({"enumerate", "--curve", E0, "--height", "10"}).out), "d,signature,c,t");
    EXPECT_EQ(first_line(run({"descent", "--curve", E0}).out),
              "dim_selmer_phiprime,dim_selmer_phi_derived,c_phi,epsilon0,window_lo,window_hi,parity_verdict");
    EXPECT_EQ(first_line(run({"rm", "validate", fixture("j0_127.rmd")}).out), "identity,result,detail");
}

TEST(Cli, BoundsForE0) {
    auto r = run({"bounds", "--curve", E0});
    EXPECT_EQ(r.status, 0);
    EXPECT_EQ(r.out, "rank_bound,rank0_lower,selmer1_lower\n485/168,155/672,5/12\n");
}

TEST(Cli, RatiosGlobalRow) {
    auto r = run({"ratios", "--curve", E0, "--twist", "1"});
    EXPECT_EQ(r.out,
              "place,c_phi,c_phiprime,c_pi\n2,1,1,1\n3,1,3,3\n13,3,1/3,1\ninf,1/3,1,1/3\nglobal,1,1,1\n");
}

TEST(Cli, EnumerateCountsSquarefree) {
    // Squarefree n <= 10: 1,2,3,5,6,7,10, each with both signs.
    auto r = run({"enumerate", "--curve", E0, "--height", "10"});
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1 + 14);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run({"bounds"}).status, 2);
    EXPECT_EQ(run({"bounds", "--curve", "[1,0,1"}).status, 2);
    EXPECT_EQ(run({"bounds", "--curve", E0, "--height", "5"}).status, 2);
    EXPECT_EQ(run({"densities", "--curve", E0}).status, 2);
    EXPECT_EQ(run({"ratios", "--curve", E0, "--twist", "0"}).status, 2);
    EXPECT_EQ(run({"ratios", "--curve", E0, "--kernel-x", "abc"}).status, 2);
    EXPECT_EQ(run({"frobnicate"}).status, 2);
    EXPECT_EQ(run({"rm", "validate", "/nonexistent.rmd"}).status, 2);
    EXPECT_EQ(run({"bounds", "--curve", "[0,0,0,0,0]"}).status, 1);
    EXPECT_EQ(run({"bounds", "--curve", "[0,0,0,0,1]", "--kernel-x", "5"}).status, 1);
    EXPECT_EQ(run({"descent", "--curve", "[0,0,0,0,2]"}).status, 1);
    EXPECT_EQ(run({"bounds", "--curve", "[0,0,0,1,0]"}).status, 1);  // no rational 3-isogeny
}

TEST(Cli, DistinctUsageMessages) {
    auto a = run({"bounds"}).err, b = run({"bounds", "--curve", "[1,0,1"}).err,
         c = run({"rm", "validate", "/nonexistent.rmd"}).err;
    EXPECT_NE(a, b);
    EXPECT_NE(b, c);
    EXPECT_NE(a, c);
}

TEST(Cli, RmValidateFailureExitsOne) {
    std::string path = ::testing::TempDir() + "bad.rmd";
    std::ifstream in(fixture("j0_109.rmd"));
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    text.replace(text.find("polarization_degree 32"), 22, "polarization_degree 33");
    std::ofstream(path) << text;
    auto r = run({"rm", "validate", path});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.out.find("polarization_prime_to_3,fail"), std::string::npos);
    EXPECT_NE(r.err.find("failed: polarization_prime_to_3"), std::string::npos);
}

TEST(Cli, ExtractAnalyzeMatchesBounds) {
    for (const std::string curve : {E0, std::string("[0,0,0,0,16]"), std::string("[4,0,7,0,0]")}) {
        std::string path = ::testing::TempDir() + "extract.rmd";
        ASSERT_EQ(run({"rm", "extract", "--curve", curve, "--out", path}).status, 0);
        auto via_rm = run({"rm", "analyze", path});
        ASSERT_EQ(via_rm.status, 0) << via_rm.err;
        EXPECT_EQ(via_rm.out, run({"bounds", "--curve", curve}).out) << curve;
        EXPECT_EQ(run({"rm", "analyze", path, "--profile"}).out, run({"profile", "--curve", curve}).out);
    }
}

TEST(Cli, JsonLinesMirrorsRows) {
    auto r = run({"ratios", "--curve", E0, "--json-lines"});
    EXPECT_EQ(first_line(r.out), R"({"place":"2","c_phi":"1","c_phiprime":"1","c_pi":"1"})");
    auto csv = run({"ratios", "--curve", E0});
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n') + 1, std::count(csv.out.begin(), csv.out.end(), '\n'));
}

TEST(Cli, OutFileAndDeterminism) {
    std::string path = ::testing::TempDir() + "profile.csv";
    auto r = run({"profile", "--curve", E0, "--out", path, "--threads", "3"});
    EXPECT_EQ(r.status, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), run({"profile", "--curve", E0}).out);
    EXPECT_EQ(run({"descent", "--curve", "[-2,0,2,0,0]", "--seed", "5", "--threads", "2"}).out,
              run({"descent", "--curve", "[-2,0,2,0,0]", "--seed", "5"}).out);
}

TEST(Cli, DescentFixtureMismatchIsReportedNotFatal) {
    std::string path = ::testing::TempDir() + "known.csv";
    std::ofstream(path) << "curve,dim_phi,dim_phiprime\n[1,0,1,0,0],2,0\n";
    auto r = run({"descent", "--curve", E0, "--fixture", path});
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.err.find("fixture mismatch"), std::string::npos);
    auto ok = run({"descent", "--curve", E0, "--fixture", fixture("selmer_known.csv")});
    EXPECT_EQ(ok.err, "");
}
