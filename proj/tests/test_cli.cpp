#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include <caustic/caustic.hpp>

using namespace caustic;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / ("caustic_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + CAUSTIC_CLI_PATH + " " + args + " > " + (scratch() / "stdout").string() + " 2> " +
                            (scratch() / "stderr").string();
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

csv::Table table(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return csv::read(in);
}

} // namespace

TEST(Csv, RoundTripWithQuotesAndComments) {
    csv::Table t;
    t.comments = {"first", "second, with comma"};
    t.header = {"a", "b,c", "d"};
    t.add({"1", "say \"hi\"", csv::number(0.1)});
    t.add({"line\nbreak", "", csv::number(-1e-300)});
    std::stringstream ss;
    csv::write(ss, t);
    const auto r = csv::read(ss);
    EXPECT_EQ(r.comments, t.comments);
    EXPECT_EQ(r.header, t.header);
    EXPECT_EQ(r.rows, t.rows);
    EXPECT_EQ(csv::parse_number(r.rows[1][2]), -1e-300);
    EXPECT_THROW(csv::parse_number("1.5x"), std::invalid_argument);
}

TEST(Csv, NumbersRoundTripExactly) {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int i = 0; i < 1000; ++i) {
        const double v = std::exp(u(rng)) * (i % 2 ? 1 : -1);
        EXPECT_EQ(csv::parse_number(csv::number(v)), v);
    }
}

TEST(Config, Ranges) {
    const auto a = config::parse_range("-3:3:0.1");
    ASSERT_EQ(a.size(), 61u);
    EXPECT_EQ(a[1], -2.9);
    EXPECT_EQ(a[30], 0.0);
    EXPECT_EQ(a.back(), 3.0);
    EXPECT_EQ(config::parse_range("100:1600:*2"), (std::vector<double>{100, 200, 400, 800, 1600}));
    EXPECT_EQ(config::parse_int_range("100,200, 400"), (std::vector<int>{100, 200, 400}));
    EXPECT_EQ(config::parse_range("2.5"), std::vector<double>{2.5});
    EXPECT_EQ(config::parse_range("5:1:-2"), (std::vector<double>{5, 3, 1}));
    EXPECT_THROW(config::parse_range("0:1:0"), std::invalid_argument);
    EXPECT_THROW(config::parse_range("0:1:-1"), std::invalid_argument);
    EXPECT_THROW(config::parse_range("0:1e9:1e-3"), std::invalid_argument);
    EXPECT_THROW(config::parse_range("1:2"), std::invalid_argument);
    EXPECT_THROW(config::parse_int_range("1.5"), std::invalid_argument);
}

TEST(Config, KeyValueFile) {
    std::istringstream in("# header\ncommand = airy\n\nk=-1  # weight\n s = 0:1:0.5\n");
    const auto kv = config::read_key_values(in);
    ASSERT_EQ(kv.size(), 3u);
    EXPECT_EQ(kv[1], (std::pair<std::string, std::string>{"k", "-1"}));
    EXPECT_EQ(kv[2].second, "0:1:0.5");
    std::istringstream bad("just words\n");
    EXPECT_THROW(config::read_key_values(bad), std::invalid_argument);
}

TEST(Cli, AiryTableRoundTrips) {
    const auto out = scratch() / "airy.csv";
    ASSERT_EQ(run("airy --k -1 --s -10:10:0.05 -o " + out.string()), 0);
    const auto t = table(out);
    ASSERT_EQ(t.rows.size(), 401u);
    EXPECT_FALSE(t.comments.empty());
    const auto s = t.numbers("s"), v = t.numbers("ai_k");
    for (std::size_t i = 0; i < s.size(); i += 40) EXPECT_EQ(v[i], ai_k(-1, s[i])) << s[i];
}

TEST(Cli, DensityCausticTubeCurve) {
    ASSERT_EQ(run("density --regime caustic-tube --d 2 --u1-range -3:3:0.1 -o " + (scratch() / "tube.csv").string()), 0);
    const auto t = table(scratch() / "tube.csv");
    ASSERT_EQ(t.rows.size(), 61u);
    const auto u1 = t.numbers("u1"), F = t.numbers("rescaled");
    EXPECT_EQ(u1[30], 0.0);
    const auto ref = density_regime({default_frame(2), {0.0, 0.0}, 2.0 / 3, Region::caustic_tube}, level_new(2, 400));
    EXPECT_EQ(F[30], ref.rescaled.to_double());
    for (double f : F) EXPECT_GT(f, 0.0);
}

TEST(Cli, ScalingSweepReportsSlope) {
    const auto out = scratch() / "sweep.csv";
    ASSERT_EQ(run("scaling-sweep --d 2 --N 100,200,400 --point caustic -o " + out.string()), 0);
    const auto t = table(out);
    EXPECT_EQ(t.rows.size(), 3u);
    bool found = false;
    for (const auto& c : t.comments) found |= c.find("fitted slope") != std::string::npos;
    EXPECT_TRUE(found);
    const auto m = nlohmann::json::parse(slurp(out.string() + ".manifest.json"));
    const auto lh = t.numbers("log_hbar"), le = t.numbers("log_error");
    EXPECT_NEAR(m["summary"]["slope"].get<double>(), fit_slope(lh, le), 1e-12);
}

TEST(Cli, ManifestRecordsParametersVersionAndTime) {
    const auto out = scratch() / "tm.csv";
    ASSERT_EQ(run("tube-mass --N 50 --kappa 0.5 -o " + out.string()), 0);
    const auto m = nlohmann::json::parse(slurp(out.string() + ".manifest.json"));
    EXPECT_EQ(m["command"], "tube-mass");
    EXPECT_EQ(m["parameters"]["kappa"], "0.5");
    EXPECT_EQ(m["parameters"]["d"], "2");
    EXPECT_EQ(m["version"], CAUSTIC_VERSION);
    EXPECT_GE(m["wall_time_seconds"].get<double>(), 0.0);
}

TEST(Cli, DeterministicOutput) {
    const std::string args = "montecarlo --statistic crossings --N 80 --seeds 6 --seed 11 -o ";
    ASSERT_EQ(run(args + (scratch() / "d1.csv").string()), 0);
    ASSERT_EQ(run(args + (scratch() / "d2.csv").string(), "CAUSTIC_THREADS=3"), 0);
    const std::string a = slurp(scratch() / "d1.csv"), b = slurp(scratch() / "d2.csv");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("--help"), 0);
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("no-such-command"), 1);
    EXPECT_EQ(run("projector --N abc"), 1);
    EXPECT_EQ(run("density --regime allowed-bulk --u1-range 0.1"), 1);
    EXPECT_EQ(run("montecarlo --d 3"), 1);
    EXPECT_EQ(run("tube-mass --N 20 --check --tol 1e-6"), 2);
    EXPECT_NE(slurp(scratch() / "stderr").find("check failed"), std::string::npos);
    EXPECT_EQ(run("tube-mass --N 400 --check"), 0);
}

TEST(Cli, ConfigFileWithOverride) {
    const auto cfg = scratch() / "run.cfg";
    std::ofstream(cfg) << "# tube run\ncommand = tube-mass\nN = 60   # level\nkappa = 1\n";
    ASSERT_EQ(run("--config " + cfg.string() + " --kappa 0.25 -o " + (scratch() / "cfg.csv").string()), 0);
    const auto t = table(scratch() / "cfg.csv");
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.numbers("N")[0], 60.0);
    EXPECT_EQ(t.numbers("kappa")[0], 0.25);
}

TEST(Cli, EveryCommandWritesAHeader) {
    const std::vector<std::string> cmds{"projector --N 10 --method both --x1-range 0:1:0.5",
                                        "airy --k 0,1 --s 0",
                                        "pi0 --u 0.1,0.2 --check",
                                        "density --regime forbidden-bulk --u1-range 0.3 --with-exact --N 50",
                                        "scaling-sweep --N 50,100 --point forbidden-bulk",
                                        "montecarlo --statistic radial-profile --N 40 --seeds 3 --radii 0.5,1.2",
                                        "tube-mass --N 30"};
    for (const auto& c : cmds) {
        const auto out = scratch() / "h.csv";
        ASSERT_EQ(run(c + " -o " + out.string()), 0) << c;
        const auto t = table(out);
        EXPECT_FALSE(t.header.empty()) << c;
        EXPECT_FALSE(t.rows.empty()) << c;
    }
}
