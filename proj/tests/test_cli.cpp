// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks of the relaydmt binary.

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef DMT_CLI_PATH
#error "DMT_CLI_PATH must point at the relaydmt binary"
#endif

namespace {

namespace fs = std::filesystem;

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path scratch_dir()
{
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("relaydmt_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Run run(const std::string& args)
{
    const auto err_path = scratch_dir() / "stderr.txt";
    const std::string cmd = std::string("'") + DMT_CLI_PATH + "' " + args + " 2>'" + err_path.string() + "'";
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr)
        return r;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0)
        r.out.append(buf, got);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err_path);
    return r;
}

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string line;
    while (std::getline(is, line))
        out.push_back(line);
    return out;
}

bool has_line(const std::string& s, const std::string& want)
{
    for (const auto& l : lines(s))
        if (l == want)
            return true;
    return false;
}

double slope_of(const std::string& s)
{
    for (const auto& l : lines(s))
        if (l.rfind("# slope=", 0) == 0)
            return std::stod(l.substr(8, l.find(' ', 8) - 8));
    return std::nan("");
}

fs::path write_file(const std::string& name, const std::string& text)
{
    const auto p = scratch_dir() / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

} // namespace

TEST(CliDmt, PointValues)
{
    auto r = run("dmt --protocol oaf --n 3");
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(has_line(r.out, "0.25,1.75"));
    EXPECT_EQ(lines(r.out).front(), "r,d");
    EXPECT_EQ(lines(r.out).size(), 102u);

    r = run("dmt --protocol naf --n 2");
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(has_line(r.out, "0.60,0.40"));

    r = run("dmt --protocol nsdf-variable --n 2");
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(has_line(r.out, "0.50,0.75"));
}

TEST(CliDmt, AllColumnsAndGrid)
{
    const auto r = run("dmt --all --n 3 --r-step 0.125");
    ASSERT_EQ(r.code, 0);
    const auto ls = lines(r.out);
    EXPECT_EQ(ls.front(), "r,miso,oaf,naf,nsdf-fixed,nsdf-variable,osdf-fixed,osdf-variable");
    EXPECT_EQ(ls.size(), 10u);
    EXPECT_EQ(ls[1], "0.000,3.000,3.000,3.000,3.000,3.000,3.000,3.000");
    EXPECT_EQ(ls.back().substr(0, 6), "1.000,");
}

TEST(CliDmt, InvalidArguments)
{
    for (const char* args : {"dmt --protocol bogus", "dmt", "dmt --protocol oaf --n 1", "dmt --protocol nsdf --p 1 --q 2",
                             "dmt --protocol naf --r-step 0", "dmt --protocol naf --r-max 1.5", "dmt --protocol naf --n x",
                             "", "frobnicate", "dmt --all --protocol naf"}) {
        const auto r = run(args);
        EXPECT_EQ(r.code, 2) << args;
        EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << args << ": " << r.err;
    }
}

TEST(CliVerify, DefaultSuitePasses)
{
    const auto r = run("verify");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(has_line(r.out, "PASS"));
    EXPECT_NE(r.out.find("cases=54"), std::string::npos);
}

TEST(CliVerify, PerturbationIsCaught)
{
    const auto r = run("verify --perturb");
    EXPECT_EQ(r.code, 1);
    EXPECT_TRUE(has_line(r.out, "FAIL"));
    EXPECT_NE(r.out.find("worst protocol="), std::string::npos);
}

TEST(CliVerify, ReportsNsdfIntersection)
{
    const auto r = run("verify --protocol nsdf --n 2 --p 2 --q 1");
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(has_line(r.out, "intersection r=0.5 d=0.75"));
}

TEST(CliOutage, MisoClosedForm)
{
    const auto r = run("outage --protocol miso --n 1 --r 0 --rate-offset 1 --snr-min 10 --snr-max 10 --trials 100000 "
                       "--no-fit --seed 4");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 2u);
    EXPECT_EQ(ls[0], "snr_db,rho,trials,outage_count,p_hat,stderr");
    std::istringstream row(ls[1]);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(row, field, ','))
        f.push_back(field);
    ASSERT_EQ(f.size(), 6u);
    const double p = std::stod(f[4]);
    const double want = 1.0 - std::exp(-0.1);
    EXPECT_NEAR(p, want, 3.0 * std::sqrt(want * (1.0 - want) / 1e5));
}

TEST(CliOutage, TooFewPointsExitsThreeAfterRows)
{
    const auto r = run("outage --protocol miso --n 1 --r 0 --rate-offset 1 --snr-min 10 --snr-max 15 --trials 1000");
    EXPECT_EQ(r.code, 3);
    EXPECT_EQ(lines(r.out).size(), 3u);
    EXPECT_EQ(r.out.find("# slope"), std::string::npos);
    EXPECT_FALSE(r.err.empty());
}

TEST(CliOutage, WarnsWhenManyPointsAreEmpty)
{
    const auto r = run("outage --protocol miso --n 2 --r 0.1 --snr-min 10 --snr-max 60 --snr-step 10 --trials 2000");
    EXPECT_NE(r.err.find("warning"), std::string::npos) << r.err;
}

TEST(CliOutage, SameSeedAnyWorkerCount)
{
    const std::string base = "outage --protocol oaf --n 2 --r 0.25 --snr-min 5 --snr-max 25 --trials 20001 --seed 9";
    const auto a = run(base + " --workers 1");
    const auto b = run(base + " --workers 3");
    const auto c = run("--workers 7 " + base);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out, c.out);
    EXPECT_TRUE(std::isfinite(slope_of(a.out)));
    const auto d = run("outage --protocol oaf --n 2 --r 0.25 --snr-min 5 --snr-max 25 --trials 20001 --seed 10");
    EXPECT_NE(a.out, d.out);
}

TEST(CliOutage, RejectsBadRanges)
{
    for (const char* args : {"outage --protocol oaf --n 2 --trials 0", "outage --protocol oaf --n 2 --snr-min 20 --snr-max 10",
                             "outage --protocol oaf --n 2 --r 1.5", "outage --protocol oaf --n 2 --p 3 --q 1",
                             "outage --protocol nsdf-variable --n 2", "outage --protocol oaf --n 2 --workers 0",
                             "outage --protocol oaf --n 2 --snr-step -1"}) {
        const auto r = run(args);
        EXPECT_EQ(r.code, 2) << args;
        EXPECT_TRUE(r.out.empty()) << args;
    }
}

TEST(CliOutage, OutFileMatchesStdout)
{
    const auto path = scratch_dir() / "sweep.csv";
    const std::string base = "outage --protocol naf --n 2 --r 0.25 --snr-min 0 --snr-max 20 --trials 5000";
    const auto a = run(base);
    const auto b = run(base + " --out '" + path.string() + "'");
    ASSERT_EQ(a.code, 0);
    ASSERT_EQ(b.code, 0);
    EXPECT_TRUE(b.out.empty());
    EXPECT_EQ(slurp(path), a.out);
    EXPECT_EQ(a.out.find('\r'), std::string::npos);
}

TEST(CliCodesim, InvalidPairs)
{
    for (const char* args : {"codesim --code naf --protocol oaf", "codesim --code oaf-diag --protocol naf",
                             "codesim --code golden", "codesim --code naf --n 3", "codesim --code oaf-diag --M 3"}) {
        const auto r = run(args);
        EXPECT_EQ(r.code, 2) << args;
    }
}

TEST(CliCodesim, DiagonalCodeSlope)
{
    const auto r = run("codesim --code oaf-diag --n 2 --M 2 --snr-min 22 --snr-max 34 --snr-step 4 --trials 1000000");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_GE(slope_of(r.out), 1.6);
}

TEST(CliCodesim, Deterministic)
{
    const std::string base = "codesim --code naf --snr-min 6 --snr-max 14 --trials 3000 --seed 2";
    const auto a = run(base + " --workers 1");
    const auto b = run(base + " --workers 4");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
}

TEST(CliCodesim, CodebookExport)
{
    const auto path = scratch_dir() / "code.csv";
    const auto r = run("codesim --code oaf-diag --snr-min 10 --snr-max 20 --trials 100 --no-fit --codebook '" +
                       path.string() + "'");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(slurp(path));
    ASSERT_EQ(ls.size(), 1u + 16u * 2u);
    EXPECT_EQ(ls[0], "index,row,col,re,im");
    EXPECT_EQ(ls[1].substr(0, 6), "0,0,0,");
}

TEST(CliConfig, KeysFlagsAndErrors)
{
    const auto cfg = write_file("a.cfg", "# tradeoff\nprotocol = naf\nn = 3   # three nodes\n\nr-step = 0.25\n");
    auto r = run("dmt --config '" + cfg.string() + "'");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(has_line(r.out, "0.25,1.75"));
    EXPECT_EQ(lines(r.out).size(), 6u);

    // Flags override the file.
    r = run("--config '" + cfg.string() + "' dmt --n 2 --r-step 0.2");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(has_line(r.out, "0.60,0.40"));

    const auto bad = write_file("b.cfg", "protocol = naf\nwidth = 3\n");
    r = run("dmt --config '" + bad.string() + "'");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("width"), std::string::npos);

    const auto junk = write_file("c.cfg", "protocol naf\n");
    EXPECT_EQ(run("dmt --config '" + junk.string() + "'").code, 2);

    const auto badval = write_file("d.cfg", "protocol = naf\nn = many\n");
    EXPECT_EQ(run("dmt --config '" + badval.string() + "'").code, 2);

    EXPECT_EQ(run("dmt --protocol naf --config /nonexistent/relaydmt.cfg").code, 2);

    // Global keys and flags in a config file.
    const auto sim = write_file("e.cfg", "seed = 9\nworkers = 2\nprotocol = oaf\nn = 2\nr = 0.25\nsnr-min = 5\n"
                                         "snr-max = 25\ntrials = 20001\n");
    const auto a = run("outage --config '" + sim.string() + "'");
    const auto b = run("outage --protocol oaf --n 2 --r 0.25 --snr-min 5 --snr-max 25 --trials 20001 --seed 9");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);

    const auto flag = write_file("f.cfg", "perturb = true\n");
    EXPECT_EQ(run("verify --n 2 --config '" + flag.string() + "'").code, 1);
}

TEST(CliHelp, ExitsZero)
{
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("dmt --help").code, 0);
}
